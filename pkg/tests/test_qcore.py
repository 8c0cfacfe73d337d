import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from swapsteer import qcore
from swapsteer.errors import UsageError
from swapsteer.qcore import DensityOperator, StateVector


def partial_trace_loop(rho, keep, dims):
    """Index-by-index reference implementation."""
    n = len(dims)
    keep = sorted(keep)
    drop = [k for k in range(n) if k not in keep]
    kd = [dims[k] for k in keep]
    out = np.zeros((int(np.prod(kd)),) * 2, dtype=complex)
    t = rho.reshape(tuple(dims) * 2)
    for ki in itertools.product(*(range(d) for d in kd)):
        for kj in itertools.product(*(range(d) for d in kd)):
            acc = 0
            for di in itertools.product(*(range(dims[k]) for k in drop)):
                row = [0] * n
                col = [0] * n
                for pos, k in enumerate(keep):
                    row[k], col[k] = ki[pos], kj[pos]
                for pos, k in enumerate(drop):
                    row[k] = col[k] = di[pos]
                acc += t[tuple(row) + tuple(col)]
            out[np.ravel_multi_index(ki, kd), np.ravel_multi_index(kj, kd)] = acc
    return out


def test_partial_trace_matches_loop(rng):
    dims = (2, 3, 2)
    rho = qcore.random_density(12, rng)
    for keep in [(0,), (1,), (2,), (0, 2), (1, 2)]:
        got = qcore.partial_trace(rho, keep, dims)
        assert np.allclose(got, partial_trace_loop(rho, keep, dims), atol=1e-13)


def test_partial_transpose_matches_definition(rng):
    rho = qcore.random_density(6, rng)
    got = qcore.partial_transpose(rho, 1, (2, 3))
    t = rho.reshape(2, 3, 2, 3)
    ref = np.einsum("ijkl->ilkj", t).reshape(6, 6)
    assert np.allclose(got, ref)


def test_partial_transpose_of_phi_plus_is_swap_over_two():
    phi = qcore.max_entangled(2)
    pt = qcore.partial_transpose(qcore.proj(phi), 1, (2, 2))
    swap = np.eye(4)[[0, 2, 1, 3]]
    assert np.allclose(pt, swap / 2)
    assert np.isclose(np.linalg.eigvalsh(pt)[0], -0.5)


def test_permute_subsystems_on_product(rng):
    a, b, c = (qcore.random_pure_state(d, rng) for d in (2, 3, 4))
    v = qcore.kron_all([a, b, c])
    got = qcore.permute_subsystems(v, (2, 0, 1), (2, 3, 4))
    assert np.allclose(got, qcore.kron_all([c, a, b]))
    back = qcore.permute_subsystems(got, qcore.inverse_permutation((2, 0, 1)), (4, 2, 3))
    assert np.allclose(back, v)


def test_permute_operator_consistent_with_vector(rng):
    v = qcore.random_pure_state(12, rng)
    perm, dims = (1, 2, 0), (2, 3, 2)
    pv = qcore.permute_subsystems(v, perm, dims)
    assert np.allclose(qcore.permute_subsystems(qcore.proj(v), perm, dims), qcore.proj(pv))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([(2, 2), (2, 3), (3, 2), (3, 3)]))
def test_schmidt_reconstructs(seed, dims):
    rng = np.random.default_rng(seed)
    psi = qcore.random_pure_state(int(np.prod(dims)), rng)
    lam, left, right = qcore.schmidt_decompose(psi, dims)
    rebuilt = sum(l * np.kron(left[:, i], right[:, i]) for i, l in enumerate(lam))
    assert np.allclose(rebuilt, psi, atol=1e-12)
    assert np.isclose(np.sum(lam**2), 1.0)
    assert np.all(np.diff(lam) <= 1e-15)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_partial_trace_preserves_trace_and_positivity(seed):
    rng = np.random.default_rng(seed)
    rho = qcore.random_density(8, rng)
    red = qcore.partial_trace(rho, (0, 2), (2, 2, 2))
    assert np.isclose(np.trace(red).real, 1.0)
    assert np.linalg.eigvalsh(red)[0] > -1e-12


def test_eig_hermitian_rejects_non_hermitian():
    with pytest.raises(UsageError):
        qcore.eig_hermitian(np.array([[0, 1], [0, 0]], dtype=complex))


def test_eig_hermitian_roundtrip(rng):
    h = qcore.random_density(5, rng)
    vals, vecs = qcore.eig_hermitian(h)
    assert np.all(np.diff(vals) >= 0)
    assert np.allclose(vecs @ np.diag(vals) @ vecs.conj().T, h, atol=1e-12)


def test_density_validation():
    with pytest.raises(UsageError):
        DensityOperator(np.diag([0.6, 0.6]), (2,))
    with pytest.raises(UsageError):
        DensityOperator(np.diag([1.2, -0.2]), (2,))
    with pytest.raises(UsageError):
        StateVector(np.array([1.0, 1.0]), (2,))
    assert np.isclose(DensityOperator(np.eye(4) / 4, (2, 2)).purity(), 0.25)


def test_bloch_density_matches_ket():
    theta, phi = 0.7, 2.1
    ket = np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])
    assert np.allclose(qcore.bloch_to_density(qcore.angles_to_bloch(theta, phi)), qcore.proj(ket))


def test_phase_distance_is_phase_invariant(rng):
    v = qcore.random_pure_state(4, rng)
    assert qcore.phase_distance(v, np.exp(0.9j) * v) < 1e-15
    w = qcore.random_pure_state(4, rng)
    ref = min(np.linalg.norm(v - np.exp(1j * t) * w) for t in np.linspace(0, 2 * np.pi, 20001))
    assert abs(qcore.phase_distance(v, w) - ref) < 1e-6


def test_haar_unitary_is_unitary(rng):
    u = qcore.haar_unitary(5, rng)
    assert np.allclose(u.conj().T @ u, np.eye(5))
