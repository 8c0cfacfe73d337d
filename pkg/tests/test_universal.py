import numpy as np
import pytest

from swapsteer import qcore
from swapsteer.errors import ConfigurationError, UnsupportedStateError, UsageError
from swapsteer.network import build_ring_state, swapchain_probability
from swapsteer.noise import werner_state
from swapsteer.qcore import DensityOperator
from swapsteer.universal import (
    build_universal_network,
    closed_form,
    closed_form_swapped,
    decompose,
    evaluate_universal,
    gamma,
    npt_witness,
    random_npt_state,
    swap_weight,
    tomographic_basis,
    universal_sohs_check,
)

PHI = DensityOperator(qcore.proj(qcore.max_entangled(2)), (2, 2))


def dense_all_zero_branch(unet):
    """Project every untrusted node onto outcome 0 in the global state and trace out."""
    base = unet.base
    dims = base.slot_dims
    rho = build_ring_state(base).matrix
    d_t = dims[0] * dims[1]
    ops = [np.eye(d_t)] + [base.measurements[j].operators[0] for j in range(1, base.n)]
    big = qcore.kron_all(ops)
    sigma = qcore.partial_trace(big @ rho @ big, (0, 1), dims)
    w = np.trace(sigma).real
    return sigma / w, w


@pytest.mark.parametrize("d", [2, 3])
def test_tomographic_basis_spans(d):
    b = tomographic_basis(d)
    assert len(b.projectors) == d * d
    assert np.linalg.matrix_rank(b.gram()) == d * d


def test_witness_detects_state_and_is_nonnegative_on_products(rng):
    rho = random_npt_state((2, 3), rng)
    w = npt_witness(rho)
    assert np.trace(w.matrix @ rho.matrix).real < 0
    for _ in range(200):
        x = np.kron(qcore.random_density(2, rng), qcore.random_density(3, rng))
        assert np.trace(w.matrix @ x).real >= -1e-12


def test_ppt_state_rejected():
    with pytest.raises(UnsupportedStateError):
        npt_witness(werner_state(0.3))


def test_decomposition_reconstructs(rng):
    rho = random_npt_state((3, 2), rng)
    w = npt_witness(rho)
    dec = decompose(w, tomographic_basis(3), tomographic_basis(2))
    assert dec.residual() < 1e-10


@pytest.mark.parametrize("dims", [(2, 2), (2, 3)])
def test_delivery_and_weight_against_dense_projection(rng, dims):
    rho = random_npt_state(dims, rng)
    unet = build_universal_network(rho, 3)
    state, w = dense_all_zero_branch(unet)
    delivered = qcore.permute_subsystems(state, (1, 0), (dims[1], dims[0]))
    assert np.allclose(delivered, rho.matrix, atol=1e-12)
    assert w == pytest.approx(swap_weight(*dims, 3), rel=1e-12)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_branch_weight_against_swapchain(n):
    unet = build_universal_network(PHI, n)
    w = swapchain_probability(unet.base, (0,) * n)
    assert w == pytest.approx(1 / (4 * 4 ** (n - 2)), rel=1e-12)
    assert unet.branch_weight == pytest.approx(w, rel=1e-12)


def test_phi_plus_value_n3():
    w = npt_witness(PHI)
    unet = build_universal_network(PHI, 3)
    s = evaluate_universal(unet, decompose(w, unet.basis_a, unet.basis_b))
    assert s == pytest.approx(0.5 / 16, abs=1e-12)


def test_werner_two_thirds_n3():
    rho = werner_state(2 / 3)
    w = npt_witness(rho)
    unet = build_universal_network(rho, 3)
    s = evaluate_universal(unet, decompose(w, unet.basis_a, unet.basis_b))
    assert s == pytest.approx(1 / 64, abs=1e-12)


@pytest.mark.parametrize("n", [3, 4])
@pytest.mark.parametrize("name", ["phi", "w04", "w07", "npt23"])
def test_value_equals_witness_times_branch_weight(n, name):
    rho = {
        "phi": PHI,
        "w04": werner_state(0.4),
        "w07": werner_state(0.7),
        "npt23": random_npt_state((2, 3), np.random.default_rng(5)),
    }[name]
    w = npt_witness(rho)
    unet = build_universal_network(rho, n)
    s = evaluate_universal(unet, decompose(w, unet.basis_a, unet.basis_b))
    assert s > 0
    assert s == pytest.approx(closed_form_swapped(w, rho, n), abs=1e-12)
    if n == 3:
        assert s == pytest.approx(closed_form(w, rho, n), abs=1e-12)


def test_classical_payoff_nonpositive(rng):
    rho = random_npt_state((2, 3), rng)
    dec = decompose(npt_witness(rho), tomographic_basis(2), tomographic_basis(3))
    for _ in range(200):
        assert gamma(dec, qcore.random_density(2, rng), qcore.random_density(3, rng)) <= 1e-12
    assert universal_sohs_check(dec, samples=1000, seed=1) <= 1e-9


def test_construction_requires_three_nodes():
    with pytest.raises(ConfigurationError):
        build_universal_network(PHI, 2)


def test_sample_floor():
    dec = decompose(npt_witness(PHI), tomographic_basis(2), tomographic_basis(2))
    with pytest.raises(UsageError):
        universal_sohs_check(dec, samples=10)
