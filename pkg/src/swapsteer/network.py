"""Ring networks, their joint outcome distributions, and conditional states.

Node ``j`` (0-based here, ``A_{j+1}`` in physics notation) owns two slots:
slot 1 receives the second half of source ``j-1`` and slot 2 the first half of
source ``j`` (indices mod n). The canonical global ordering is node-major,
``(A_1^1, A_1^2, A_2^1, A_2^2, ...)``.

Bell outcomes are labelled 0 = phi+, 1 = psi+, 2 = phi-, 3 = psi-. With this
labelling the Bell-swap identities compose like XOR on the labels, which is
what makes the ring witness support consistent with ideal correlations.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from . import qcore
from .errors import ConfigurationError, UnsupportedOracleError, UsageError
from .qcore import DensityOperator, StateVector

MAX_NODES = 8
PROB_TOL = 1e-12
NORM_TOL = 1e-10
ZERO_WEIGHT = 1e-14

BELL_LABELS = ("phi+", "psi+", "phi-", "psi-")


def bell_vectors() -> np.ndarray:
    """Rows are |phi+>, |psi+>, |phi->, |psi-> in that (outcome) order."""
    s = 1 / np.sqrt(2)
    return np.array(
        [[s, 0, 0, s], [0, s, s, 0], [s, 0, 0, -s], [0, s, -s, 0]],
        dtype=complex,
    )


@dataclass(frozen=True)
class Measurement:
    """A complete POVM on one node's slots."""

    operators: tuple[np.ndarray, ...]
    dims: tuple[int, ...]
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        total = int(np.prod(dims))
        ops = []
        for k, op in enumerate(self.operators):
            op = np.array(op, dtype=complex)
            if op.shape != (total, total):
                raise UsageError(f"effect {k} has shape {op.shape}, expected {(total, total)}")
            if not qcore.is_hermitian(op, PROB_TOL):
                raise UsageError(f"effect {k} is not Hermitian")
            if np.linalg.eigvalsh(op)[0] < -qcore.PSD_TOL:
                raise UsageError(f"effect {k} is not positive semidefinite")
            op.setflags(write=False)
            ops.append(op)
        if not ops:
            raise UsageError("a measurement needs at least one effect")
        if np.abs(sum(ops) - np.eye(total)).max() > PROB_TOL:
            raise UsageError("effects do not sum to the identity")
        labels = tuple(self.labels) or tuple(str(k) for k in range(len(ops)))
        if len(labels) != len(ops):
            raise UsageError("one label per effect is required")
        object.__setattr__(self, "operators", tuple(ops))
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "labels", labels)

    @property
    def n_outcomes(self) -> int:
        return len(self.operators)

    def is_projective(self, tol: float = NORM_TOL) -> bool:
        return all(np.abs(op @ op - op).max() <= tol for op in self.operators)

    def conjugated(self, u: np.ndarray) -> "Measurement":
        """Effects ``u^dag M u`` (the measurement seen after applying ``u`` to the input)."""
        u = np.asarray(u, dtype=complex)
        return Measurement(tuple(u.conj().T @ op @ u for op in self.operators), self.dims, self.labels)


def bell_measurement() -> Measurement:
    return Measurement(tuple(qcore.proj(v) for v in bell_vectors()), (2, 2), BELL_LABELS)


def projective_measurement(vectors: Sequence[np.ndarray], dims: Sequence[int]) -> Measurement:
    """Rank-1 projective measurement from an orthonormal list of vectors."""
    return Measurement(tuple(qcore.proj(v) for v in vectors), tuple(dims))


def product_basis_measurement(dims: Sequence[int] = (2, 2)) -> Measurement:
    """Computational product basis |i>|j>; every effect is separable."""
    total = int(np.prod(dims))
    return projective_measurement([qcore.ket(k, total) for k in range(total)], dims)


def bell_source() -> StateVector:
    return StateVector(bell_vectors()[0], (2, 2))


def maximally_mixed(dims: Sequence[int] = (2, 2)) -> DensityOperator:
    total = int(np.prod(dims))
    return DensityOperator(np.eye(total) / total, tuple(dims))


def _as_density(src) -> DensityOperator:
    if isinstance(src, StateVector):
        return src.density()
    if isinstance(src, DensityOperator):
        return src
    raise ConfigurationError(f"unsupported source type {type(src).__name__}")


def _pure_vector(src) -> np.ndarray | None:
    if isinstance(src, StateVector):
        return src.amplitudes
    rho = src.matrix
    vals, vecs = np.linalg.eigh(rho)
    if abs(vals[-1] - 1.0) > NORM_TOL:
        return None
    return qcore.canonical_phase(vecs[:, -1])


@dataclass(frozen=True)
class RingNetwork:
    """n sources on a ring plus one measurement per node.

    ``sources[i]`` feeds (node i, slot 2) and (node i+1, slot 1).
    ``trusted`` is the 0-based index of the trusted node.
    """

    sources: tuple
    measurements: tuple[Measurement, ...]
    trusted: int = 0
    _densities: tuple[DensityOperator, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        sources = tuple(self.sources)
        meas = tuple(self.measurements)
        n = len(sources)
        if n < 2:
            raise ConfigurationError("a ring needs at least 2 nodes")
        if n > MAX_NODES:
            raise ConfigurationError(
                f"n={n} exceeds the dense-table ceiling of {MAX_NODES} nodes (memory bound)"
            )
        if len(meas) != n:
            raise ConfigurationError(f"{n} sources but {len(meas)} measurements")
        if not 0 <= self.trusted < n:
            raise ConfigurationError(f"trusted node {self.trusted} out of range")
        dens = tuple(_as_density(s) for s in sources)
        for i, rho in enumerate(dens):
            if len(rho.dims) != 2:
                raise ConfigurationError(f"source {i} must be bipartite, got dims {rho.dims}")
        for j, m in enumerate(meas):
            if not isinstance(m, Measurement):
                raise ConfigurationError(f"measurement {j} is not a Measurement")
            expected = (dens[(j - 1) % n].dims[1], dens[j].dims[0])
            if tuple(m.dims) != expected:
                raise ConfigurationError(
                    f"node {j} measurement dims {m.dims} do not match incoming slots {expected}"
                )
        object.__setattr__(self, "sources", sources)
        object.__setattr__(self, "measurements", meas)
        object.__setattr__(self, "_densities", dens)

    @property
    def n(self) -> int:
        return len(self.sources)

    @property
    def densities(self) -> tuple[DensityOperator, ...]:
        return self._densities

    @property
    def slot_dims(self) -> tuple[int, ...]:
        """Dimensions in canonical node-major order."""
        out = []
        for m in self.measurements:
            out.extend(m.dims)
        return tuple(out)

    @property
    def alphabet(self) -> tuple[int, ...]:
        return tuple(m.n_outcomes for m in self.measurements)

    @property
    def untrusted(self) -> tuple[int, ...]:
        return tuple(j for j in range(self.n) if j != self.trusted)

    def with_source(self, i: int, src) -> "RingNetwork":
        srcs = list(self.sources)
        srcs[i] = src
        return RingNetwork(tuple(srcs), self.measurements, self.trusted)

    def with_measurement(self, j: int, m: Measurement) -> "RingNetwork":
        ms = list(self.measurements)
        ms[j] = m
        return RingNetwork(self.sources, tuple(ms), self.trusted)


def ideal_network(n: int) -> RingNetwork:
    """All sources |phi+>, every node measuring the Bell basis."""
    return RingNetwork(tuple(bell_source() for _ in range(n)), tuple(bell_measurement() for _ in range(n)))


def canonical_permutation(n: int) -> tuple[int, ...]:
    """Permutation taking source order (S_1 halves, S_2 halves, ...) to node-major order.

    Source order lists (A_1^2, A_2^1, A_2^2, A_3^1, ..., A_n^2, A_1^1).
    """
    perm = []
    for j in range(n):
        perm.append(2 * ((j - 1) % n) + 1)  # slot 1 of node j: second half of source j-1
        perm.append(2 * j)  # slot 2 of node j: first half of source j
    return tuple(perm)


def build_ring_state(network: RingNetwork) -> DensityOperator:
    """Global density operator on the canonical slot ordering."""
    dens = network.densities
    mat = qcore.kron_all([r.matrix for r in dens])
    src_dims = tuple(d for r in dens for d in r.dims)
    perm = canonical_permutation(network.n)
    out = qcore.permute_subsystems(mat, perm, src_dims)
    return DensityOperator(out, tuple(src_dims[p] for p in perm))


def build_ring_vector(network: RingNetwork) -> np.ndarray:
    """Global pure state (canonical ordering); requires every source to be pure."""
    vecs = []
    for i, src in enumerate(network.sources):
        v = _pure_vector(src)
        if v is None:
            raise UnsupportedOracleError(f"source {i} is not pure")
        vecs.append(v)
    dens = network.densities
    src_dims = tuple(d for r in dens for d in r.dims)
    return qcore.permute_subsystems(qcore.kron_all(vecs), canonical_permutation(network.n), src_dims)


@dataclass(frozen=True)
class CorrelationTable:
    """Dense probability table ``probs[a_1, ..., a_n]``.

    ``setting`` optionally records the trusted node's input pair ``(s, t)``.
    """

    probs: np.ndarray
    setting: tuple[int, int] | None = None

    def __post_init__(self):
        p = np.array(self.probs, dtype=float)
        if p.ndim < 2:
            raise UsageError("a correlation table needs at least 2 parties")
        if p.min() < -PROB_TOL or p.max() > 1 + PROB_TOL:
            raise UsageError("probabilities outside [0, 1]")
        if abs(p.sum() - 1.0) > NORM_TOL:
            raise UsageError(f"probabilities sum to {p.sum()!r}")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @property
    def n(self) -> int:
        return self.probs.ndim

    @property
    def alphabet(self) -> tuple[int, ...]:
        return self.probs.shape

    def __getitem__(self, outcomes) -> float:
        return float(self.probs[tuple(outcomes)])

    def items(self) -> Iterator[tuple[tuple[int, ...], float]]:
        for idx in itertools.product(*(range(k) for k in self.alphabet)):
            yield idx, float(self.probs[idx])

    def marginal(self, keep: Sequence[int]) -> np.ndarray:
        drop = tuple(i for i in range(self.n) if i not in keep)
        return self.probs.sum(axis=drop)

    def max_abs_diff(self, other: "CorrelationTable") -> float:
        if self.alphabet != other.alphabet:
            raise UsageError("tables have different shapes")
        return float(np.abs(self.probs - other.probs).max())


def _clean_probs(p: np.ndarray) -> np.ndarray:
    if np.abs(p.imag).max(initial=0.0) > 1e-9:
        raise ConfigurationError("complex probability encountered; check the inputs")
    p = p.real
    p[np.abs(p) < 1e-15] = 0.0
    return p


def _node_transfer(m: Measurement) -> np.ndarray:
    """Stack of matrices E[a][(u,u'),(v,v')] = M_a[(u v),(u' v')]."""
    du, dv = m.dims
    ops = np.stack(m.operators).reshape(m.n_outcomes, du, dv, du, dv)
    return ops.transpose(0, 1, 3, 2, 4).reshape(m.n_outcomes, du * du, dv * dv)


def _source_transfer(rho: DensityOperator) -> np.ndarray:
    """S[(v,v'),(w,w')] = rho[(v' w'),(v w)] for a source on (v, w)."""
    da, db = rho.dims
    r = rho.matrix.reshape(da, db, da, db)
    return r.transpose(2, 0, 3, 1).reshape(da * da, db * db)


def _ring_transfers(network: RingNetwork) -> list[np.ndarray]:
    dens = network.densities
    return [
        np.einsum("aij,jk->aik", _node_transfer(m), _source_transfer(dens[j]))
        for j, m in enumerate(network.measurements)
    ]


def _joint_transfer(network: RingNetwork) -> np.ndarray:
    t = _ring_transfers(network)
    acc = t[0]  # (k0, D0, D1)
    for tj in t[1:]:
        acc = np.einsum("...ij,bjk->...bik", acc, tj)
    return np.einsum("...ii->...", acc)


def _joint_dense(network: RingNetwork) -> np.ndarray:
    rho = build_ring_state(network).matrix
    out = np.zeros(network.alphabet, dtype=complex)
    for idx in itertools.product(*(range(k) for k in network.alphabet)):
        op = qcore.kron_all([network.measurements[j].operators[a] for j, a in enumerate(idx)])
        out[idx] = np.trace(op @ rho)
    return out


def joint_distribution(network: RingNetwork, method: str = "transfer") -> CorrelationTable:
    """Exact p(a_1..a_n) = Tr[(M_1 x ... x M_n) rho_global].

    ``method="transfer"`` contracts the ring as a closed chain of small transfer
    matrices; ``method="dense"`` forms the global density operator and the
    full Kronecker product of effects for every string (small networks only).
    """
    if method == "transfer":
        p = _joint_transfer(network)
    elif method == "dense":
        if int(np.prod(network.slot_dims)) > 256:
            raise ConfigurationError("dense contraction is limited to global dimension 256")
        p = _joint_dense(network)
    else:
        raise UsageError(f"unknown method {method!r}")
    return CorrelationTable(_clean_probs(p))


def _require_swapchain_scope(network: RingNetwork) -> np.ndarray:
    for j in network.untrusted:
        if not network.measurements[j].is_projective():
            raise UnsupportedOracleError(f"node {j} measurement is not projective")
    return build_ring_vector(network)


def _apply_local(psi: np.ndarray, op: np.ndarray, axes: tuple[int, int]) -> np.ndarray:
    d0, d1 = psi.shape[axes[0]], psi.shape[axes[1]]
    op_t = op.reshape(d0, d1, d0, d1)
    out = np.tensordot(op_t, psi, axes=([2, 3], list(axes)))
    # tensordot puts the new axes first; move them back into place
    return np.moveaxis(out, [0, 1], list(axes))


def _trusted_reduced(psi: np.ndarray, trusted: int) -> np.ndarray:
    n_ax = psi.ndim
    keep = [2 * trusted, 2 * trusted + 1]
    rest = [k for k in range(n_ax) if k not in keep]
    d = psi.shape[keep[0]] * psi.shape[keep[1]]
    x = psi.transpose(keep + rest).reshape(d, -1)
    return x @ x.conj().T


def joint_distribution_swapchain(network: RingNetwork) -> CorrelationTable:
    """Independent oracle: project untrusted nodes one at a time on the global pure vector.

    Each branch is renormalized after every projection and its weight tracked;
    the trusted node's statistics come from the reduced state of the surviving
    branch. Requires pure sources and projective untrusted measurements.
    """
    psi0 = _require_swapchain_scope(network).reshape(network.slot_dims)
    order = network.untrusted
    t = network.trusted
    trusted_ops = network.measurements[t].operators
    probs = np.zeros(network.alphabet)

    def descend(psi: np.ndarray, depth: int, weight: float, outcomes: dict[int, int]):
        if depth == len(order):
            rho_t = _trusted_reduced(psi, t)
            for a, op in enumerate(trusted_ops):
                idx = [0] * network.n
                for j, b in outcomes.items():
                    idx[j] = b
                idx[t] = a
                probs[tuple(idx)] = weight * np.real(np.trace(op @ rho_t))
            return
        j = order[depth]
        for b, op in enumerate(network.measurements[j].operators):
            branch = _apply_local(psi, op, (2 * j, 2 * j + 1))
            w = float(np.vdot(branch, branch).real)
            if w * weight <= ZERO_WEIGHT:
                continue
            descend(branch / np.sqrt(w), depth + 1, weight * w, {**outcomes, j: b})

    descend(psi0, 0, 1.0, {})
    probs[np.abs(probs) < 1e-15] = 0.0
    return CorrelationTable(probs)


def swapchain_probability(network: RingNetwork, outcomes: Sequence[int]) -> float:
    """Single-string query of the swap-chain oracle (follows one branch only)."""
    psi = _require_swapchain_scope(network).reshape(network.slot_dims)
    outcomes = tuple(int(a) for a in outcomes)
    if len(outcomes) != network.n:
        raise UsageError("one outcome per node is required")
    weight = 1.0
    for j in network.untrusted:
        psi = _apply_local(psi, network.measurements[j].operators[outcomes[j]], (2 * j, 2 * j + 1))
        w = float(np.vdot(psi, psi).real)
        if w <= ZERO_WEIGHT:
            return 0.0
        psi = psi / np.sqrt(w)
        weight *= w
    rho_t = _trusted_reduced(psi, network.trusted)
    op = network.measurements[network.trusted].operators[outcomes[network.trusted]]
    return float(weight * np.real(np.trace(op @ rho_t)))


def _rotated(seq: Sequence, start: int) -> list:
    return list(seq[start:]) + list(seq[:start])


def unnormalized_trusted_states(network: RingNetwork) -> np.ndarray:
    """Array ``sigma[b_1, ..., b_{n-1}]`` of unnormalized trusted-slot operators.

    Untrusted outcomes are ordered by walking the ring from the trusted node,
    i.e. nodes t+1, t+2, ... (mod n). Contracted with transfer matrices, never
    through the global density operator.
    """
    n, t = network.n, network.trusted
    dens = network.densities
    du, dv = network.measurements[t].dims
    full = _ring_transfers(network)
    acc = _source_transfer(dens[t])
    for j in _rotated(range(n), t)[1:]:
        acc = np.einsum("...ij,bjk->...bik", acc, full[j])
    # acc[..., (v,v'), (u,u')]
    lead = acc.shape[:-2]
    y = acc.reshape(lead + (dv, dv, du, du))
    nl = len(lead)
    axes = list(range(nl)) + [nl + 3, nl + 1, nl + 2, nl + 0]
    sigma = y.transpose(axes).reshape(lead + (du * dv, du * dv))
    return sigma


def conditional_trusted_state(network: RingNetwork, untrusted_outcomes: Sequence[int]):
    """Normalized post-measurement state at the trusted node and its weight.

    ``untrusted_outcomes`` lists outcomes for the untrusted nodes in increasing
    node order. Returns ``(state, weight)``; for a zero-probability branch the
    state is ``None`` and the weight is 0.
    """
    outs = tuple(int(a) for a in untrusted_outcomes)
    unt = network.untrusted
    if len(outs) != len(unt):
        raise UsageError(f"expected {len(unt)} untrusted outcomes, got {len(outs)}")
    for j, a in zip(unt, outs):
        if not 0 <= a < network.measurements[j].n_outcomes:
            raise UsageError(f"outcome {a} invalid for node {j}")
    by_node = dict(zip(unt, outs))
    ring_order = _rotated(range(network.n), network.trusted)[1:]
    sigma = unnormalized_trusted_states(network)[tuple(by_node[j] for j in ring_order)]
    weight = float(np.trace(sigma).real)
    if weight <= ZERO_WEIGHT:
        return None, 0.0
    du, dv = network.measurements[network.trusted].dims
    mat = sigma / weight
    mat = (mat + mat.conj().T) / 2
    return DensityOperator(mat, (du, dv)), weight


def iter_conditional_states(network: RingNetwork):
    """Yield ``(untrusted_outcomes, state, weight)`` for every untrusted string."""
    unt = network.untrusted
    for outs in itertools.product(*(range(network.measurements[j].n_outcomes) for j in unt)):
        state, w = conditional_trusted_state(network, outs)
        yield outs, state, w


def min_pt_eigenvalue(rho, dims: Sequence[int] = (2, 2)) -> float:
    m = rho.matrix if isinstance(rho, qcore.HermitianOperator) else np.asarray(rho)
    return float(np.linalg.eigvalsh(qcore.partial_transpose(m, 1, dims))[0])


def is_ppt_separable_2x2(rho) -> bool:
    """PPT test, exact for two qubits."""
    dims = rho.dims if isinstance(rho, qcore.HermitianOperator) else (2, 2)
    m = rho.matrix if isinstance(rho, qcore.HermitianOperator) else np.asarray(rho)
    if tuple(dims) != (2, 2) or m.shape != (4, 4):
        raise UsageError("is_ppt_separable_2x2 requires a two-qubit state")
    return min_pt_eigenvalue(m) >= -qcore.PSD_TOL


def bell_swap_residuals() -> list[float]:
    """Residuals of |B_0>_{12}|B_k>_{34} = 1/2 sum_j s_j |B_x>_{14}|B_y>_{23}, k = 0..3."""
    b = bell_vectors()
    rhs_terms = {
        0: [(1, 0, 0), (1, 1, 1), (1, 2, 2), (1, 3, 3)],
        1: [(1, 1, 0), (1, 0, 1), (1, 2, 3), (1, 3, 2)],
        2: [(1, 2, 0), (1, 0, 2), (-1, 1, 3), (-1, 3, 1)],
        3: [(1, 3, 0), (-1, 0, 3), (1, 1, 2), (-1, 2, 1)],
    }
    out = []
    for k, terms in rhs_terms.items():
        lhs = qcore.permute_subsystems(np.kron(b[0], b[k]), (0, 3, 1, 2), (2, 2, 2, 2))
        rhs = sum(s * np.kron(b[x], b[y]) for s, x, y in terms) / 2
        out.append(float(np.abs(lhs - rhs).max()))
    return out
