"""Numerical certification of triangle realizations against the self-testing statement.

Given a candidate realization (one pure two-qubit source state shared by all
three sources, projective four-outcome measurements at the two untrusted
nodes) this module checks the correlation premises and then verifies that a
single local unitary U maps the source onto |phi+> and the measurements onto
the Bell basis.

Gauge bookkeeping in the ring wiring used by :mod:`swapsteer.network`
(source i feeds node i slot 2 and node i+1 slot 1): with (1 x U)|psi> = |phi+>,
node 2 is aligned by U x 1 and node 3 by U x U^T. The trusted node receives no
gauge because the source it shares with node 3 can be rewritten with the
unitary on node 3's side.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import qcore
from .errors import HypothesisViolation, UsageError
from .network import (
    CorrelationTable,
    Measurement,
    RingNetwork,
    bell_measurement,
    bell_vectors,
    joint_distribution,
)
from .qcore import StateVector
from .witness import evaluate, ring_witness

TOLERANCE_PROFILES = {"exact": 1e-9, "experimental": 1e-3}
CERTIFY_TOL = 1e-6


@dataclass
class PremiseCheck:
    passed: bool
    w3: float
    violations: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "w3": self.w3,
            "violations": [
                {"outcomes": "".join(map(str, o)), "probability": p, "expected": e}
                for o, p, e in self.violations
            ],
        }


def verify_premises(table: CorrelationTable, tol: float | str = "exact") -> PremiseCheck:
    """Every supported cell equals 1/16, every other cell is 0, and W_3 = 1."""
    tol = TOLERANCE_PROFILES[tol] if isinstance(tol, str) else float(tol)
    if table.alphabet != (4, 4, 4):
        raise UsageError("premises are defined for a three-party, four-outcome table")
    w = ring_witness(3)
    violations = []
    for idx, p in table.items():
        expected = 1 / 16 if w.table[idx] else 0.0
        if abs(p - expected) > tol:
            violations.append((idx, p, expected))
    w3 = evaluate(w, table)
    passed = not violations and abs(w3 - 1.0) <= tol
    return PremiseCheck(passed, w3, violations)


@dataclass(frozen=True)
class Alignment:
    unitary: np.ndarray
    aligned: np.ndarray
    distance: float
    schmidt: np.ndarray


def extract_alignment(psi) -> Alignment:
    """U with U|f_i> = |e_i*> from the Schmidt form sum_i l_i |e_i>|f_i>.

    For equal Schmidt coefficients U is fixed up to a global phase. Otherwise
    the Schmidt phases leave a diagonal gauge, and the choice made here (real
    coefficients on |e_i>|e_i*>) already maximizes the overlap with |phi+>.
    """
    amp = psi.amplitudes if isinstance(psi, StateVector) else np.asarray(psi, dtype=complex)
    if abs(np.linalg.norm(amp) - 1) > qcore.STATE_TOL:
        raise UsageError("state must be normalized")
    lam, left, right = qcore.schmidt_decompose(amp, (2, 2))
    u = left.conj() @ right.conj().T
    aligned = np.kron(np.eye(2), u) @ amp
    dist = qcore.phase_distance(aligned, bell_vectors()[0])
    return Alignment(u, aligned, dist, lam)


@dataclass(frozen=True)
class Realization:
    state: np.ndarray
    node2: Measurement
    node3: Measurement

    def __post_init__(self):
        v = np.asarray(self.state, dtype=complex).reshape(-1)
        if v.size != 4 or abs(np.linalg.norm(v) - 1) > 1e-10:
            raise UsageError("source state must be a normalized two-qubit vector")
        for name, m in (("node 2", self.node2), ("node 3", self.node3)):
            if m.dims != (2, 2) or m.n_outcomes != 4:
                raise UsageError(f"{name} needs a four-outcome two-qubit measurement")
        object.__setattr__(self, "state", v)

    def network(self) -> RingNetwork:
        src = StateVector(self.state, (2, 2))
        return RingNetwork((src, src, src), (bell_measurement(), self.node2, self.node3))


def ideal_realization() -> Realization:
    b = bell_measurement()
    return Realization(bell_vectors()[0], b, b)


def gauge_realization(v: np.ndarray) -> Realization:
    """Ideal realization with source (1 x V^dag)|phi+> and matching measurements."""
    v = np.asarray(v, dtype=complex)
    b = bell_measurement()
    state = np.kron(np.eye(2), v.conj().T) @ bell_vectors()[0]
    return Realization(state, b.conjugated(np.kron(v, np.eye(2))), b.conjugated(np.kron(v, v.T)))


@dataclass
class CertificationReport:
    premises_pass: bool
    w3: float
    unitary: np.ndarray
    unitarity_residual: float
    state_distance: float
    wire_distances: list[float]
    measurement_distances: dict[str, list[float]]
    max_deviation: float
    schmidt_coefficients: list[float]
    violations: list = field(default_factory=list)

    @property
    def certified(self) -> bool:
        return self.premises_pass and self.max_deviation <= CERTIFY_TOL

    def to_dict(self) -> dict:
        return {
            "premises_pass": self.premises_pass,
            "certified": self.certified,
            "w3": self.w3,
            "alignment_unitary": [[[z.real, z.imag] for z in row] for row in self.unitary],
            "unitarity_residual": self.unitarity_residual,
            "state_distance": self.state_distance,
            "wire_distances": self.wire_distances,
            "measurement_distances": self.measurement_distances,
            "max_deviation": self.max_deviation,
            "schmidt_coefficients": self.schmidt_coefficients,
            "premise_violations": len(self.violations),
        }


def _op_distance(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(a - b, ord=2))


def certify_realization(r: Realization, tol: float | str = "exact") -> CertificationReport:
    for name, m in (("node 2", r.node2), ("node 3", r.node3)):
        if not m.is_projective():
            raise HypothesisViolation(f"{name} measurement is not projective")
    premises = verify_premises(joint_distribution(r.network()), tol)
    al = extract_alignment(r.state)
    u = al.unitary
    bell = [qcore.proj(v) for v in bell_vectors()]
    dists = {}
    for name, m, c in (("node2", r.node2, np.kron(u, np.eye(2))),
                       ("node3", r.node3, np.kron(u, u.T))):
        dists[name] = [_op_distance(c @ op @ c.conj().T, bell[a]) for a, op in enumerate(m.operators)]
    wires = [al.distance] * 3
    max_dev = max([al.distance] + dists["node2"] + dists["node3"])
    return CertificationReport(
        premises_pass=premises.passed,
        w3=premises.w3,
        unitary=u,
        unitarity_residual=float(np.abs(u.conj().T @ u - np.eye(2)).max()),
        state_distance=al.distance,
        wire_distances=wires,
        measurement_distances=dists,
        max_deviation=float(max_dev),
        schmidt_coefficients=[float(x) for x in al.schmidt],
        violations=premises.violations,
    )


def random_projective_measurement(rng: np.random.Generator) -> Measurement:
    u = qcore.haar_unitary(4, rng)
    return Measurement(tuple(qcore.proj(u[:, k]) for k in range(4)), (2, 2))


def random_realization(rng: np.random.Generator) -> Realization:
    return Realization(
        qcore.random_pure_state(4, rng),
        random_projective_measurement(rng),
        random_projective_measurement(rng),
    )
