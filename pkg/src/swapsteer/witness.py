"""Linear ring witnesses W_n and their evaluation on correlation tables."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import UsageError
from .network import CorrelationTable

DENSE_MAX_N = 8

# last outcome x of W_{n-1} splits into these (a_{n-1}, a_n) pairs
REFINEMENT = {
    0: ((0, 0), (1, 1), (2, 2), (3, 3)),
    1: ((0, 1), (1, 0), (2, 3), (3, 2)),
    2: ((0, 2), (2, 0), (1, 3), (3, 1)),
    3: ((0, 3), (3, 0), (1, 2), (2, 1)),
}


def _check_outcomes(outcomes: Sequence[int]) -> tuple[int, ...]:
    outs = tuple(int(a) for a in outcomes)
    if len(outs) < 2:
        raise UsageError("a witness string needs at least 2 outcomes")
    for a in outs:
        if not 0 <= a <= 3:
            raise UsageError(f"outcome {a} outside 0..3")
    return outs


def signed_offset(rest: Sequence[int]) -> int:
    """a_2 + sum_{i>=3} (-1)^(a_2+...+a_{i-1}) a_i, reduced mod 4."""
    total = 0
    parity = 0
    for k, a in enumerate(rest):
        total += a if k == 0 or parity % 2 == 0 else -a
        parity += a
    return total % 4


def coeff(outcomes: Sequence[int]) -> int:
    """1 if a_1 - a_2 - sum_i (-1)^{a_2+..+a_{i-1}} a_i = 0 (mod 4), else 0.

    For two parties this reduces to a_1 = a_2.
    """
    outs = _check_outcomes(outcomes)
    return int((outs[0] - signed_offset(outs[1:])) % 4 == 0)


def solve_trusted(rest: Sequence[int]) -> int:
    """The unique a_1 with coefficient 1 for the untrusted string ``rest``."""
    return signed_offset(rest)


@dataclass(frozen=True)
class WitnessSpec:
    """0/1 coefficient table over n four-valued outcomes.

    ``table`` is a dense boolean array of shape ``(4,)*n`` for n <= 8, and
    ``None`` beyond that (coefficients then come from the predicate).
    """

    n: int
    table: np.ndarray | None

    def __post_init__(self):
        if self.n < 2:
            raise UsageError("witnesses need n >= 2")
        if self.table is not None:
            t = np.asarray(self.table, dtype=bool)
            if t.shape != (4,) * self.n:
                raise UsageError(f"table shape {t.shape} does not match n={self.n}")
            t.setflags(write=False)
            object.__setattr__(self, "table", t)

    @classmethod
    def from_predicate(cls, n: int) -> "WitnessSpec":
        if n > DENSE_MAX_N:
            return cls(n, None)
        t = np.zeros((4,) * n, dtype=bool)
        for rest in itertools.product(range(4), repeat=n - 1):
            t[(solve_trusted(rest),) + rest] = True
        return cls(n, t)

    def coefficient(self, outcomes: Sequence[int]) -> int:
        outs = _check_outcomes(outcomes)
        if len(outs) != self.n:
            raise UsageError(f"expected {self.n} outcomes")
        if self.table is None:
            return coeff(outs)
        return int(self.table[outs])

    def column(self, rest: Sequence[int]) -> np.ndarray:
        """Coefficients c(a_1, rest) for a_1 = 0..3."""
        rest = tuple(rest)
        if self.table is None:
            col = np.zeros(4)
            col[solve_trusted(rest)] = 1.0
            return col
        return self.table[(slice(None),) + rest].astype(float)

    def support(self) -> Iterator[tuple[int, ...]]:
        if self.table is None:
            for rest in itertools.product(range(4), repeat=self.n - 1):
                yield (solve_trusted(rest),) + rest
            return
        for idx in zip(*np.nonzero(self.table)):
            yield tuple(int(i) for i in idx)

    def support_size(self) -> int:
        if self.table is None:
            return 4 ** (self.n - 1)
        return int(self.table.sum())


def refine(witness: WitnessSpec) -> WitnessSpec:
    """Grow W_{n-1} into W_n by splitting the last outcome into pairs."""
    n = witness.n + 1
    t = np.zeros((4,) * n, dtype=bool)
    for s in witness.support():
        for pair in REFINEMENT[s[-1]]:
            t[s[:-1] + pair] = True
    return WitnessSpec(n, t)


def ring_witness(n: int) -> WitnessSpec:
    return WitnessSpec.from_predicate(n)


def evaluate(witness: WitnessSpec, table: CorrelationTable) -> float:
    """Sum of c(a) p(a) over all outcome strings."""
    if table.n != witness.n or table.alphabet != (4,) * witness.n:
        raise UsageError(
            f"table with alphabet {table.alphabet} does not match a {witness.n}-party witness"
        )
    if witness.table is None:
        return float(sum(table[s] for s in witness.support()))
    return float(np.sum(table.probs[witness.table]))


def support_csv(witness: WitnessSpec) -> str:
    lines = ["outcomes,coefficient"]
    lines += ["".join(map(str, s)) + ",1" for s in witness.support()]
    return "\n".join(lines) + "\n"
