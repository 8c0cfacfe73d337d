import itertools

import numpy as np
import pytest

from swapsteer import qcore
from swapsteer.errors import UsageError
from swapsteer.network import bell_vectors, joint_distribution
from swapsteer.noise import (
    VisibilityConfig,
    noisy_bell_measurement,
    noisy_network,
    noisy_witness_value,
    triangle_closed_form,
    visibility_grid,
    visibility_threshold,
    werner_state,
)
from swapsteer.witness import evaluate, ring_witness


def test_werner_eigenvalues():
    vals = np.linalg.eigvalsh(werner_state(0.6).matrix)
    assert np.allclose(sorted(vals), [0.1, 0.1, 0.1, 0.7])


def test_noisy_effects():
    m = noisy_bell_measurement(0.5)
    assert np.allclose(sum(m.operators), np.eye(4))
    assert np.isclose(np.trace(m.operators[0] @ qcore.proj(bell_vectors()[0])).real, 0.625)


def test_range_checks():
    for bad in (-0.1, 1.5):
        with pytest.raises(UsageError):
            werner_state(bad)
        with pytest.raises(UsageError):
            noisy_bell_measurement(bad)
    with pytest.raises(UsageError):
        noisy_network(3, VisibilityConfig((1.0,) * 2, (1.0,) * 2))


def test_noise_curve_on_grid():
    worst = 0.0
    for cfg in visibility_grid([0.0, 0.5, 1.0], 3):
        worst = max(worst, abs(noisy_witness_value(3, cfg) - triangle_closed_form(cfg)))
    assert worst <= 1e-10


def test_noise_curve_random_points(rng):
    for _ in range(10):
        cfg = VisibilityConfig(tuple(rng.uniform(size=3)), tuple(rng.uniform(size=2)))
        assert noisy_witness_value(3, cfg) == pytest.approx(triangle_closed_form(cfg), abs=1e-12)


def test_fully_noisy_value_is_quarter():
    assert noisy_witness_value(4, VisibilityConfig((0.0,) * 4, (1.0,) * 3)) == pytest.approx(0.25)


@pytest.mark.parametrize("n", [3, 4])
def test_noise_only_through_product(n):
    # moving visibility between sources leaves W_n unchanged
    a = VisibilityConfig((0.5, 0.8) + (1.0,) * (n - 2), (1.0,) * (n - 1))
    b = VisibilityConfig((0.4,) + (1.0,) * (n - 1), (1.0,) * (n - 1))
    assert noisy_witness_value(n, a) == pytest.approx(noisy_witness_value(n, b), abs=1e-12)


def test_threshold_triangle():
    res = visibility_threshold(3)
    assert res.threshold == pytest.approx(1 / 3, abs=1e-6)
    assert res.value_at_threshold == pytest.approx(0.5, abs=1e-6)


def test_threshold_unbracketed():
    with pytest.raises(UsageError):
        visibility_threshold(3, target=1.5)


def test_grid_size():
    assert sum(1 for _ in visibility_grid([0.0, 1.0], 3)) == 2**5
