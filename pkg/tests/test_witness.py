import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from swapsteer.errors import UsageError
from swapsteer.network import CorrelationTable, ideal_network, joint_distribution
from swapsteer.witness import (
    WitnessSpec,
    coeff,
    evaluate,
    refine,
    ring_witness,
    signed_offset,
    solve_trusted,
    support_csv,
)

# term list of the triangle witness, written out by hand
W3_TERMS = {
    (0, 0, 0), (0, 1, 1), (0, 2, 2), (0, 3, 3),
    (1, 0, 1), (1, 1, 0), (1, 2, 3), (1, 3, 2),
    (2, 0, 2), (2, 2, 0), (2, 1, 3), (2, 3, 1),
    (3, 0, 3), (3, 3, 0), (3, 1, 2), (3, 2, 1),
}


def test_triangle_support_matches_hand_list():
    assert set(ring_witness(3).support()) == W3_TERMS


def test_two_party_witness_is_diagonal():
    assert set(ring_witness(2).support()) == {(a, a) for a in range(4)}


@pytest.mark.parametrize("n", [3, 4, 5])
def test_refinement_equals_predicate(n):
    grown = ring_witness(2)
    for _ in range(n - 2):
        grown = refine(grown)
    assert np.array_equal(grown.table, ring_witness(n).table)


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_unique_trusted_outcome(n):
    w = ring_witness(n)
    for rest in itertools.product(range(4), repeat=n - 1):
        col = w.column(rest)
        assert col.sum() == 1 and col[solve_trusted(rest)] == 1


def test_signed_offset_is_xor():
    # with this labelling the mod-4 predicate coincides with bitwise XOR
    for rest in itertools.product(range(4), repeat=4):
        x = 0
        for a in rest:
            x ^= a
        assert signed_offset(rest) == x


@given(st.lists(st.integers(0, 3), min_size=2, max_size=9))
def test_coeff_is_binary_and_predicate(outs):
    c = coeff(outs)
    assert c in (0, 1)
    assert c == int(outs[0] == signed_offset(outs[1:]))


def test_large_n_uses_predicate():
    w = ring_witness(10)
    assert w.table is None
    assert w.support_size() == 4**9
    assert w.coefficient((solve_trusted((1,) * 9),) + (1,) * 9) == 1


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_ideal_value_and_per_term_probability(n):
    t = joint_distribution(ideal_network(n))
    w = ring_witness(n)
    assert evaluate(w, t) == pytest.approx(1.0, abs=1e-10)
    vals = t.probs[w.table]
    assert np.allclose(vals, 4.0 ** (-(n - 1)), atol=1e-12)


def test_evaluate_rejects_shape_mismatch():
    with pytest.raises(UsageError):
        evaluate(ring_witness(3), CorrelationTable(np.full((4, 4), 1 / 16)))


def test_uniform_table_gives_quarter():
    t = CorrelationTable(np.full((4, 4, 4), 1 / 64))
    assert evaluate(ring_witness(3), t) == pytest.approx(0.25)


def test_support_csv_listing():
    text = support_csv(ring_witness(3))
    lines = text.strip().split("\n")
    assert lines[0] == "outcomes,coefficient" and len(lines) == 17


def test_bad_outcome_rejected():
    with pytest.raises(UsageError):
        coeff((0, 4, 1))
    with pytest.raises(UsageError):
        WitnessSpec(3, np.zeros((4, 4)))
