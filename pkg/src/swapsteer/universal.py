"""Swap-steering functionals for arbitrary NPT bipartite states.

The trusted node performs binary tomographic measurements
{tau_s x omega_t, 1 - tau_s x omega_t}; the source between nodes 2 and 3
carries the target state, and a chain of entanglement swaps delivers it to the
trusted node whenever every untrusted node reports outcome 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from . import qcore
from .errors import ConfigurationError, UnsupportedStateError, UsageError, VerificationFailure
from .network import (
    Measurement,
    RingNetwork,
    conditional_trusted_state,
    joint_distribution,
)
from .qcore import DensityOperator, HermitianOperator, StateVector

BUILD_TOL = 1e-9


@dataclass(frozen=True)
class TomographicBasis:
    d: int
    projectors: tuple[np.ndarray, ...]

    def __post_init__(self):
        if len(self.projectors) != self.d**2:
            raise UsageError(f"need {self.d ** 2} projectors, got {len(self.projectors)}")
        if np.linalg.matrix_rank(self.gram(), tol=1e-10) != self.d**2:
            raise UsageError("projectors do not span the Hermitian operator space")

    def gram(self) -> np.ndarray:
        p = np.stack(self.projectors)
        return np.einsum("sij,tji->st", p, p).real


def tomographic_basis(d: int) -> TomographicBasis:
    """|j><j| for every j, plus (|j>+|k>)/sqrt2 and (|j>+i|k>)/sqrt2 for j<k."""
    if d < 2:
        raise UsageError("d must be >= 2")
    projs = [qcore.proj(qcore.ket(j, d)) for j in range(d)]
    for j in range(d):
        for k in range(j + 1, d):
            projs.append(qcore.proj((qcore.ket(j, d) + qcore.ket(k, d)) / np.sqrt(2)))
            projs.append(qcore.proj((qcore.ket(j, d) + 1j * qcore.ket(k, d)) / np.sqrt(2)))
    return TomographicBasis(d, tuple(projs))


def npt_witness(rho: DensityOperator) -> HermitianOperator:
    """Witness (|eta><eta|)^{T_B} from the most negative eigenvector of rho^{T_B}."""
    if len(rho.dims) != 2:
        raise UsageError("npt_witness needs a bipartite state")
    vals, vecs = qcore.eig_hermitian(qcore.partial_transpose(rho.matrix, 1, rho.dims))
    if vals[0] >= -qcore.PSD_TOL:
        raise UnsupportedStateError(
            "state has a positive partial transpose; no witness can be built for it"
        )
    w = qcore.partial_transpose(qcore.proj(vecs[:, 0]), 1, rho.dims)
    return HermitianOperator(w, rho.dims)


@dataclass(frozen=True)
class WitnessDecomposition:
    beta: np.ndarray  # beta[s, t]
    witness: HermitianOperator
    basis_a: TomographicBasis
    basis_b: TomographicBasis

    def reconstruct(self) -> np.ndarray:
        a = np.stack(self.basis_a.projectors)
        b = np.stack(self.basis_b.projectors)
        return np.einsum("st,sij,tkl->ikjl", self.beta, a, b).reshape(self.witness.matrix.shape)

    def residual(self) -> float:
        return float(np.linalg.norm(self.witness.matrix - self.reconstruct()))


def decompose(w: HermitianOperator, basis_a: TomographicBasis, basis_b: TomographicBasis) -> WitnessDecomposition:
    """Coefficients beta with W = sum_{s,t} beta[s,t] tau_s x omega_t."""
    if tuple(w.dims) != (basis_a.d, basis_b.d):
        raise UsageError(f"witness dims {w.dims} do not match bases ({basis_a.d}, {basis_b.d})")
    a = np.stack(basis_a.projectors)
    b = np.stack(basis_b.projectors)
    wt = w.matrix.reshape(basis_a.d, basis_b.d, basis_a.d, basis_b.d)
    # Hilbert-Schmidt overlaps <tau_s x omega_t, W>
    rhs = np.einsum("sji,tlk,ikjl->st", a, b, wt).real
    gram = np.kron(basis_a.gram(), basis_b.gram())
    try:
        beta = np.linalg.solve(gram, rhs.reshape(-1)).reshape(rhs.shape)
    except np.linalg.LinAlgError as exc:
        raise VerificationFailure("singular Gram matrix for the product basis") from exc
    dec = WitnessDecomposition(beta, w, basis_a, basis_b)
    if dec.residual() > 1e-8:
        raise VerificationFailure(f"decomposition residual {dec.residual():.3e}")
    return dec


def _phi_plus(d: int) -> StateVector:
    return StateVector(qcore.max_entangled(d), (d, d))


def _binary_phi_plus(d: int) -> Measurement:
    p = qcore.proj(qcore.max_entangled(d))
    return Measurement((p, np.eye(d * d) - p), (d, d))


def swap_weight(d1: int, d2: int, n: int) -> float:
    """Probability that all untrusted nodes report 0 in the construction.

    Node 2 succeeds with 1/d1^2 and each of nodes 3..n with 1/d2^2.
    """
    return 1.0 / (d1**2 * d2 ** (2 * (n - 2)))


@dataclass(frozen=True)
class UniversalNetwork:
    """Ring network whose trusted node takes a tomographic input pair (s, t).

    ``base`` holds the sources and untrusted measurements; its trusted slot
    carries a trivial one-outcome placeholder. The target state arrives at the
    trusted node with its first factor on slot 2 (node 1's side) and its second
    factor on slot 1, so trusted effects are built in that order.
    """

    base: RingNetwork
    rho_tilde: DensityOperator
    basis_a: TomographicBasis
    basis_b: TomographicBasis
    branch_weight: float

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def dims(self) -> tuple[int, int]:
        return self.rho_tilde.dims

    def trusted_effect(self, op_target_order: np.ndarray) -> np.ndarray:
        """Re-express an operator on (target factor 1, factor 2) in trusted slot order."""
        return qcore.permute_subsystems(op_target_order, (1, 0), self.dims)

    def trusted_measurement(self, s: int, t: int) -> Measurement:
        d1, d2 = self.dims
        eff = self.trusted_effect(np.kron(self.basis_a.projectors[s], self.basis_b.projectors[t]))
        return Measurement((eff, np.eye(d1 * d2) - eff), (d2, d1))

    def network(self, s: int, t: int) -> RingNetwork:
        return self.base.with_measurement(0, self.trusted_measurement(s, t))

    def settings(self):
        for s in range(len(self.basis_a.projectors)):
            for t in range(len(self.basis_b.projectors)):
                yield s, t


def build_universal_network(rho_tilde: DensityOperator, n: int,
                            basis_a: TomographicBasis | None = None,
                            basis_b: TomographicBasis | None = None) -> UniversalNetwork:
    """Ring with rho_tilde on the A_2-A_3 source, phi+_{d1} on A_1-A_2, phi+_{d2} elsewhere."""
    if n < 3:
        raise ConfigurationError("the universal construction needs n >= 3")
    if len(rho_tilde.dims) != 2:
        raise ConfigurationError("target state must be bipartite")
    d1, d2 = rho_tilde.dims
    basis_a = basis_a or tomographic_basis(d1)
    basis_b = basis_b or tomographic_basis(d2)
    if basis_a.d != d1 or basis_b.d != d2:
        raise ConfigurationError("tomographic bases do not match the target dimensions")
    sources = (_phi_plus(d1), rho_tilde) + tuple(_phi_plus(d2) for _ in range(n - 2))
    placeholder = Measurement((np.eye(d1 * d2),), (d2, d1))
    meas = (placeholder, _binary_phi_plus(d1)) + tuple(_binary_phi_plus(d2) for _ in range(n - 2))
    base = RingNetwork(sources, meas)
    state, weight = conditional_trusted_state(base, (0,) * (n - 1))
    if state is None:
        raise ConfigurationError("all-zero branch has zero probability")
    delivered = qcore.permute_subsystems(state.matrix, (1, 0), (d2, d1))
    if np.abs(delivered - rho_tilde.matrix).max() > BUILD_TOL:
        raise ConfigurationError("wiring does not deliver the target state to the trusted node")
    if abs(weight - swap_weight(d1, d2, n)) > BUILD_TOL:
        raise ConfigurationError(f"unexpected all-zero branch weight {weight!r}")
    return UniversalNetwork(base, rho_tilde, basis_a, basis_b, weight)


def all_zero_probabilities(unet: UniversalNetwork) -> np.ndarray:
    """p(0, ..., 0 | s, t) for every trusted input pair."""
    d1, d2 = unet.dims
    out = np.zeros((d1**2, d2**2))
    zero = (0,) * unet.n
    for s, t in unet.settings():
        out[s, t] = joint_distribution(unet.network(s, t))[zero]
    return out


def evaluate_universal(unet: UniversalNetwork, decomposition: WitnessDecomposition) -> float:
    """S = -sum_{s,t} beta[s,t] p(0..0 | s,t)."""
    if decomposition.beta.shape != (unet.dims[0] ** 2, unet.dims[1] ** 2):
        raise UsageError("decomposition does not match the network dimensions")
    return float(-np.sum(decomposition.beta * all_zero_probabilities(unet)))


def closed_form(w: HermitianOperator, rho_tilde: DensityOperator, n: int) -> float:
    """-Tr(W rho) / (d1^2 d2^(n-1)), the normalization quoted for the construction."""
    d1, d2 = rho_tilde.dims
    return float(-np.trace(w.matrix @ rho_tilde.matrix).real / (d1**2 * d2 ** (n - 1)))


def closed_form_swapped(w: HermitianOperator, rho_tilde: DensityOperator, n: int) -> float:
    """-Tr(W rho) times the actual all-zero branch weight of the construction."""
    d1, d2 = rho_tilde.dims
    return float(-np.trace(w.matrix @ rho_tilde.matrix).real * swap_weight(d1, d2, n))


def gamma(decomposition: WitnessDecomposition, rho1: np.ndarray, rho2: np.ndarray) -> float:
    """-sum beta[s,t] Tr(tau_s rho1) Tr(omega_t rho2): the classical per-state payoff."""
    pa = np.array([np.trace(p @ rho1).real for p in decomposition.basis_a.projectors])
    pb = np.array([np.trace(p @ rho2).real for p in decomposition.basis_b.projectors])
    return float(-pa @ decomposition.beta @ pb)


def _unit(x: np.ndarray) -> np.ndarray:
    half = x.size // 2
    v = x[:half] + 1j * x[half:]
    nrm = np.linalg.norm(v)
    return v / nrm if nrm > 0 else v


def universal_sohs_check(decomposition: WitnessDecomposition, samples: int = 1000,
                         seed: int = 0, refine_top: int = 5) -> float:
    """Largest Gamma found over random product states plus local refinement.

    The classical bound is 0; a positive return value would falsify it.
    """
    if samples < 100:
        raise UsageError("samples must be >= 100")
    rng = np.random.default_rng(seed)
    d1, d2 = decomposition.basis_a.d, decomposition.basis_b.d
    a = np.stack(decomposition.basis_a.projectors)
    b = np.stack(decomposition.basis_b.projectors)
    beta = decomposition.beta

    def value(x1, x2) -> float:
        pa = np.einsum("i,sij,j->s", x1.conj(), a, x1).real
        pb = np.einsum("i,tij,j->t", x2.conj(), b, x2).real
        return float(-pa @ beta @ pb)

    starts = []
    for _ in range(samples):
        x1 = qcore.random_pure_state(d1, rng)
        x2 = qcore.random_pure_state(d2, rng)
        starts.append((value(x1, x2), x1, x2))
    starts.sort(key=lambda r: -r[0])
    best = starts[0][0]

    def objective(z):
        return -value(_unit(z[: 2 * d1]), _unit(z[2 * d1:]))

    for _, x1, x2 in starts[:refine_top]:
        z0 = np.concatenate([x1.real, x1.imag, x2.real, x2.imag])
        res = minimize(objective, z0, method="Nelder-Mead",
                       options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 20000})
        best = max(best, -float(res.fun))
    return best


def random_npt_state(dims: Sequence[int], rng: np.random.Generator, max_tries: int = 1000) -> DensityOperator:
    """Random full-rank state with a negative partial transpose."""
    dims = tuple(dims)
    d = int(np.prod(dims))
    for _ in range(max_tries):
        # bias toward entanglement: mix a random pure state with a little noise
        psi = qcore.random_pure_state(d, rng)
        rho = 0.8 * qcore.proj(psi) + 0.2 * qcore.random_density(d, rng)
        if np.linalg.eigvalsh(qcore.partial_transpose(rho, 1, dims))[0] < -1e-3:
            return DensityOperator(rho, dims)
    raise RuntimeError("failed to sample an NPT state")
