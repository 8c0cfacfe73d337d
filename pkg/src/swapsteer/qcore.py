"""Dense linear algebra on small composite Hilbert spaces.

Operators and vectors are plain numpy arrays accompanied by a tuple of
subsystem dimensions. Kronecker ordering is standard: the first factor is the
slowest-varying index. The thin dataclasses below only validate and carry the
dimension list around; every routine also accepts bare arrays plus ``dims``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import UsageError

STATE_TOL = 1e-12
PSD_TOL = 1e-10
ROUNDTRIP_TOL = 1e-10


def _dims_tuple(dims: Sequence[int]) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if not dims:
        raise UsageError("dims must be nonempty")
    if any(d < 2 for d in dims):
        raise UsageError(f"every subsystem dimension must be >= 2, got {dims}")
    return dims


@dataclass(frozen=True)
class HilbertShape:
    dims: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "dims", _dims_tuple(self.dims))

    @property
    def total(self) -> int:
        return int(np.prod(self.dims))

    def __len__(self) -> int:
        return len(self.dims)


@dataclass(frozen=True)
class StateVector:
    amplitudes: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        dims = _dims_tuple(self.dims)
        amp = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amp.size != int(np.prod(dims)):
            raise UsageError(f"{amp.size} amplitudes do not fit dims {dims}")
        if abs(np.linalg.norm(amp) - 1.0) > STATE_TOL:
            raise UsageError(f"state vector not normalized (norm {np.linalg.norm(amp)!r})")
        amp.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amplitudes", amp)

    @property
    def shape(self) -> HilbertShape:
        return HilbertShape(self.dims)

    def density(self) -> "DensityOperator":
        return DensityOperator(np.outer(self.amplitudes, self.amplitudes.conj()), self.dims)


@dataclass(frozen=True)
class HermitianOperator:
    matrix: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        dims = _dims_tuple(self.dims)
        m = np.asarray(self.matrix, dtype=complex)
        total = int(np.prod(dims))
        if m.shape != (total, total):
            raise UsageError(f"matrix shape {m.shape} does not fit dims {dims}")
        if not is_hermitian(m, STATE_TOL):
            raise UsageError("operator is not Hermitian")
        m = m.copy()
        m.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "matrix", m)

    @property
    def shape(self) -> HilbertShape:
        return HilbertShape(self.dims)


@dataclass(frozen=True)
class DensityOperator(HermitianOperator):
    def __post_init__(self):
        super().__post_init__()
        tr = np.trace(self.matrix).real
        if abs(tr - 1.0) > STATE_TOL:
            raise UsageError(f"density operator has trace {tr!r}")
        if np.linalg.eigvalsh(self.matrix)[0] < -PSD_TOL:
            raise UsageError("density operator is not positive semidefinite")

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))


def is_hermitian(m: np.ndarray, tol: float = STATE_TOL) -> bool:
    return m.ndim == 2 and m.shape[0] == m.shape[1] and np.abs(m - m.conj().T).max(initial=0.0) <= tol


def ket(index: int, dim: int = 2) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def proj(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1)
    return np.outer(v, v.conj())


def max_entangled(d: int) -> np.ndarray:
    """|phi+_d> = sum_k |kk> / sqrt(d)."""
    return np.eye(d, dtype=complex).reshape(-1) / np.sqrt(d)


def kron(a, b):
    """Kronecker product of two vectors, two operators, or two typed objects.

    Typed inputs (``StateVector``, ``DensityOperator``, ``HermitianOperator``)
    return the same type with concatenated dims.
    """
    if isinstance(a, StateVector) and isinstance(b, StateVector):
        return StateVector(np.kron(a.amplitudes, b.amplitudes), a.dims + b.dims)
    if isinstance(a, DensityOperator) and isinstance(b, DensityOperator):
        return DensityOperator(np.kron(a.matrix, b.matrix), a.dims + b.dims)
    if isinstance(a, HermitianOperator) and isinstance(b, HermitianOperator):
        return HermitianOperator(np.kron(a.matrix, b.matrix), a.dims + b.dims)
    return np.kron(np.asarray(a), np.asarray(b))


def kron_all(factors: Sequence) -> np.ndarray:
    out = factors[0]
    for f in factors[1:]:
        out = kron(out, f)
    return out


def _unwrap(x, dims):
    if isinstance(x, (StateVector,)):
        return x.amplitudes, x.dims
    if isinstance(x, HermitianOperator):
        return x.matrix, x.dims
    if dims is None:
        raise UsageError("dims are required for bare arrays")
    return np.asarray(x), _dims_tuple(dims)


def _check_indices(idx: Sequence[int], n: int) -> tuple[int, ...]:
    idx = tuple(int(i) for i in idx)
    for i in idx:
        if not 0 <= i < n:
            raise UsageError(f"subsystem index {i} out of range for {n} subsystems")
    if len(set(idx)) != len(idx):
        raise UsageError(f"repeated subsystem index in {idx}")
    return idx


def partial_trace(rho, keep: Sequence[int], dims: Sequence[int] | None = None):
    """Trace out every subsystem not listed in ``keep``.

    The kept subsystems stay in their original relative order. Returns the
    same kind of object that was passed in.
    """
    m, dims = _unwrap(rho, dims)
    n = len(dims)
    keep = _check_indices(keep, n)
    if not keep:
        raise UsageError("keep must name at least one subsystem")
    keep = tuple(sorted(keep))
    traced = [i for i in range(n) if i not in keep]
    t = m.reshape(dims + dims)
    # contract ket/bra pairs of the traced systems, highest axis first
    for i in sorted(traced, reverse=True):
        cur = t.ndim // 2
        t = np.trace(t, axis1=i, axis2=i + cur)
    kd = tuple(dims[i] for i in keep)
    tot = int(np.prod(kd))
    out = t.reshape(tot, tot)
    if isinstance(rho, DensityOperator):
        return DensityOperator(out, kd)
    if isinstance(rho, HermitianOperator):
        return HermitianOperator(out, kd)
    return out


def partial_transpose(rho, sys: int | Sequence[int], dims: Sequence[int] | None = None):
    """Transpose the listed subsystems (ket <-> bra index swap)."""
    m, dims = _unwrap(rho, dims)
    n = len(dims)
    systems = _check_indices([sys] if np.isscalar(sys) else sys, n)
    t = m.reshape(dims + dims)
    axes = list(range(2 * n))
    for i in systems:
        axes[i], axes[i + n] = axes[i + n], axes[i]
    out = t.transpose(axes).reshape(m.shape)
    if isinstance(rho, HermitianOperator):
        return HermitianOperator(out, dims)
    return out


def _check_perm(perm: Sequence[int], n: int) -> tuple[int, ...]:
    perm = tuple(int(p) for p in perm)
    if sorted(perm) != list(range(n)):
        raise UsageError(f"{perm} is not a permutation of {n} subsystems")
    return perm


def permute_subsystems(x, perm: Sequence[int], dims: Sequence[int] | None = None):
    """Reorder subsystems so that output subsystem ``k`` is input subsystem ``perm[k]``.

    Works on state vectors and on square operators.
    """
    arr, dims = _unwrap(x, dims)
    n = len(dims)
    perm = _check_perm(perm, n)
    new_dims = tuple(dims[p] for p in perm)
    if arr.ndim == 1:
        out = arr.reshape(dims).transpose(perm).reshape(-1)
        if isinstance(x, StateVector):
            return StateVector(out, new_dims)
        return out
    t = arr.reshape(dims + dims)
    out = t.transpose(list(perm) + [p + n for p in perm]).reshape(arr.shape)
    if isinstance(x, DensityOperator):
        return DensityOperator(out, new_dims)
    if isinstance(x, HermitianOperator):
        return HermitianOperator(out, new_dims)
    return out


def inverse_permutation(perm: Sequence[int]) -> tuple[int, ...]:
    inv = [0] * len(perm)
    for k, p in enumerate(perm):
        inv[p] = k
    return tuple(inv)


def _normalize_column_phase(vecs: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    out = vecs.copy()
    for j in range(out.shape[1]):
        col = out[:, j]
        nz = np.flatnonzero(np.abs(col) > tol)
        if nz.size:
            c = col[nz[0]]
            out[:, j] = col * (abs(c) / c)
    return out


def eig_hermitian(h, tol: float = STATE_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and eigenvectors (as columns).

    Each eigenvector is rotated so its first nonzero component is real and
    positive, which makes the output reproducible across runs.
    """
    m = h.matrix if isinstance(h, HermitianOperator) else np.asarray(h, dtype=complex)
    if not is_hermitian(m, tol):
        raise UsageError("eig_hermitian requires a Hermitian matrix")
    vals, vecs = np.linalg.eigh((m + m.conj().T) / 2)
    return vals, _normalize_column_phase(vecs)


def canonical_phase(v: np.ndarray) -> np.ndarray:
    """Rotate the global phase so the largest-magnitude amplitude is real positive."""
    v = np.asarray(v, dtype=complex)
    k = int(np.argmax(np.abs(v)))
    if abs(v[k]) == 0:
        return v.copy()
    return v * (abs(v[k]) / v[k])


def schmidt_decompose(psi, dims: Sequence[int] | None = None):
    """Schmidt coefficients (descending) with left and right vectors as columns.

    ``psi`` must live on exactly two subsystems. The number of coefficients is
    ``min(dA, dB)``; zero coefficients are kept.
    """
    amp, dims = _unwrap(psi, dims)
    if len(dims) != 2:
        raise UsageError(f"Schmidt decomposition needs a bipartition, got dims {dims}")
    u, s, vh = np.linalg.svd(amp.reshape(dims), full_matrices=False)
    # fix each term's phase on the left vector; the product term is unchanged
    phases = np.ones(len(s), dtype=complex)
    for j in range(len(s)):
        col = u[:, j]
        nz = np.flatnonzero(np.abs(col) > 1e-12)
        if nz.size:
            phases[j] = abs(col[nz[0]]) / col[nz[0]]
    left = u * phases
    right = vh.T * phases.conj()
    return s, left, right


def fidelity_pure(a: np.ndarray, b: np.ndarray) -> float:
    return float(abs(np.vdot(a, b)) ** 2)


def phase_distance(a: np.ndarray, b: np.ndarray) -> float:
    """min over global phase of ||a - e^{i t} b|| for normalized vectors."""
    ov = np.vdot(b, a)
    phase = ov / abs(ov) if abs(ov) > 0 else 1.0
    # direct norm avoids the sqrt(2 - 2|ov|) cancellation near ov = 1
    return float(np.linalg.norm(np.asarray(a) - phase * np.asarray(b)))


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    diag = np.diag(r)
    return q * (diag / np.abs(diag))


def random_pure_state(d: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def random_density(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    rank = d if rank is None else rank
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def bloch_to_density(r: Sequence[float]) -> np.ndarray:
    x, y, z = r
    return 0.5 * np.array([[1 + z, x - 1j * y], [x + 1j * y, 1 - z]], dtype=complex)


def angles_to_bloch(theta: float, phi: float) -> np.ndarray:
    return np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])
