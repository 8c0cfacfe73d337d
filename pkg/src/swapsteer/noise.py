"""White-noise models for sources and measurements, and the visibility threshold."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import qcore
from .errors import UsageError
from .network import Measurement, RingNetwork, bell_measurement, bell_vectors, joint_distribution
from .qcore import DensityOperator
from .witness import evaluate, ring_witness


def _check_unit(name: str, x: float) -> float:
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise UsageError(f"{name} must lie in [0, 1], got {x}")
    return x


def werner_state(v: float) -> DensityOperator:
    """v |phi+><phi+| + (1 - v) I/4."""
    v = _check_unit("v", v)
    return DensityOperator(v * qcore.proj(bell_vectors()[0]) + (1 - v) * np.eye(4) / 4, (2, 2))


def noisy_bell_measurement(w: float) -> Measurement:
    """Effects w N_a + (1 - w) I/4."""
    w = _check_unit("w", w)
    ideal = bell_measurement()
    ops = tuple(w * op + (1 - w) * np.eye(4) / 4 for op in ideal.operators)
    return Measurement(ops, (2, 2), ideal.labels)


@dataclass(frozen=True)
class VisibilityConfig:
    """Source visibilities v_1..v_n and untrusted measurement visibilities w_2..w_n."""

    source: tuple[float, ...]
    measurement: tuple[float, ...]

    def __post_init__(self):
        src = tuple(_check_unit("source visibility", v) for v in self.source)
        meas = tuple(_check_unit("measurement visibility", w) for w in self.measurement)
        object.__setattr__(self, "source", src)
        object.__setattr__(self, "measurement", meas)

    @classmethod
    def ideal(cls, n: int) -> "VisibilityConfig":
        return cls((1.0,) * n, (1.0,) * (n - 1))

    @property
    def combined(self) -> float:
        return float(np.prod(self.source) * np.prod(self.measurement))


def noisy_network(n: int, cfg: VisibilityConfig) -> RingNetwork:
    if n < 2:
        raise UsageError("n must be >= 2")
    if len(cfg.source) != n or len(cfg.measurement) != n - 1:
        raise UsageError(
            f"need {n} source and {n - 1} measurement visibilities, got "
            f"{len(cfg.source)} and {len(cfg.measurement)}"
        )
    sources = tuple(werner_state(v) for v in cfg.source)
    meas = (bell_measurement(),) + tuple(noisy_bell_measurement(w) for w in cfg.measurement)
    return RingNetwork(sources, meas)


def noisy_witness_value(n: int, cfg: VisibilityConfig) -> float:
    """W_n for Werner sources, noisy untrusted Bell measurements and a perfect trusted node."""
    return evaluate(ring_witness(n), joint_distribution(noisy_network(n, cfg)))


def triangle_closed_form(cfg: VisibilityConfig) -> float:
    """(1 + 3 v_1 v_2 v_3 w_2 w_3) / 4, the known triangle noise curve."""
    return 0.25 * (1 + 3 * cfg.combined)


@dataclass(frozen=True)
class ThresholdResult:
    n: int
    threshold: float
    iterations: int
    value_at_threshold: float

    def to_dict(self) -> dict:
        return {"n": self.n, "threshold": self.threshold, "iterations": self.iterations}


def _scaled(n: int, x: float) -> VisibilityConfig:
    return VisibilityConfig((x,) + (1.0,) * (n - 1), (1.0,) * (n - 1))


def visibility_threshold(n: int, target: float = 0.5, tol: float = 1e-6) -> ThresholdResult:
    """Smallest combined visibility at which W_n reaches ``target``.

    The visibility of the first source is the only knob (everything else is
    ideal); since the noise enters through the product of visibilities, this
    value is the combined-visibility threshold. Bisection to absolute ``tol``.
    """
    if n < 2:
        raise UsageError("n must be >= 2")
    lo, hi = 0.0, 1.0
    f_lo = noisy_witness_value(n, _scaled(n, lo)) - target
    f_hi = noisy_witness_value(n, _scaled(n, hi)) - target
    if f_lo > 0 or f_hi < 0:
        raise UsageError(f"target {target} is not bracketed by visibilities 0 and 1")
    iterations = 0
    while hi - lo > tol / 4:
        mid = (lo + hi) / 2
        if noisy_witness_value(n, _scaled(n, mid)) - target < 0:
            lo = mid
        else:
            hi = mid
        iterations += 1
    x = (lo + hi) / 2
    return ThresholdResult(n, x, iterations, noisy_witness_value(n, _scaled(n, x)))


def visibility_grid(levels: Sequence[float], n: int):
    """Every VisibilityConfig with entries drawn from ``levels``."""
    for combo in itertools.product(levels, repeat=2 * n - 1):
        yield VisibilityConfig(tuple(combo[:n]), tuple(combo[n:]))
