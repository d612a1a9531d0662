import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from signedshift import (
    CellFunction,
    ChainValues,
    ChainWeights,
    FactorSpace,
    ValueTail,
    WeightTail,
    best_split,
    cell_value,
    check_contraction,
    combine,
    make_indicator,
    norm_L1,
    norm_L1_plus_Linf,
    norm_Linf,
    optimal_split,
    rearrange,
    scale,
    to_cplx,
)
from signedshift.norms import random_finite_function
from signedshift.shift import cell_sign

from conftest import finite_function


def _atom_space(weights):
    return FactorSpace(
        (ChainWeights(tuple(weights), WeightTail("constant", max(weights))),)
    )


def test_norm_L1_examples(unit_space):
    zero = finite_function([[]])
    assert norm_L1(unit_space, zero) == 0
    one = make_indicator(unit_space, [0])
    assert norm_L1(unit_space, one) == math.inf
    space = _atom_space([Fraction(1), Fraction(2)])
    v = finite_function([[3, -4j]])
    assert norm_L1(space, v) == 11  # 3*1 + 4*2


def test_norm_Linf_examples(unit_space):
    # truncated sign pattern capped by a constant tail: sup modulus is 1
    psi_like = CellFunction(
        (
            ChainValues(
                tuple(cell_sign(n) for n in range(30)), ValueTail("constant", 1)
            ),
        )
    )
    assert norm_Linf(unit_space, psi_like) == 1
    assert norm_Linf(unit_space, finite_function([[]])) == 0
    v = CellFunction((ChainValues((2, 5j), ValueTail("constant", 1)),))
    assert norm_Linf(unit_space, v) == 5


def test_rearrange_examples(unit_space):
    one = make_indicator(unit_space, [0])
    prof = rearrange(unit_space, one)
    assert prof.steps == ((1, math.inf),)
    space = _atom_space([Fraction(1, 2), Fraction(1, 2)])
    prof2 = rearrange(space, finite_function([[4, 2]]))
    assert prof2.steps == ((4, Fraction(1, 2)), (2, Fraction(1, 2)))
    assert rearrange(unit_space, finite_function([[]])).steps == ()


def test_l1_plus_linf_examples(unit_space):
    one = make_indicator(unit_space, [0])
    assert norm_L1_plus_Linf(unit_space, one) == 1  # exact
    space5 = _atom_space([Fraction(2)])
    v5 = finite_function([[5]])
    assert norm_L1_plus_Linf(space5, v5) == 5
    space = _atom_space([Fraction(1, 2), Fraction(1, 2)])
    assert norm_L1_plus_Linf(space, finite_function([[4, 2]])) == 3


def test_optimal_split_examples():
    space = _atom_space([Fraction(2)])
    w = finite_function([[5]])
    at_zero = optimal_split(space, w, 0)
    assert at_zero.cost == norm_L1(space, w) == 10
    at_sup = optimal_split(space, w, 5)
    assert at_sup.cost == 5
    assert best_split(space, w).tau == 5
    # cost(tau) = 2*(5 - tau) + tau decreases in tau, so 5 is optimal
    assert optimal_split(space, w, 3).cost == 2 * 2 + 3


def test_split_reconstructs_and_clamps(unit_space):
    rng = random.Random(9)
    for _ in range(40):
        w = random_finite_function(unit_space, rng)
        tau = rng.uniform(0, 1.2)
        split = optimal_split(unit_space, w, tau)
        recombined = combine(split.w1, split.w2)
        for n in range(14):
            assert to_cplx(cell_value(recombined, (0, n))) == pytest.approx(
                to_cplx(cell_value(w, (0, n))), abs=1e-12
            )
            assert abs(to_cplx(cell_value(split.w2, (0, n)))) <= tau + 1e-12


def test_rearrangement_norm_equals_bruteforce_threshold_min():
    rng = random.Random(31)
    for _ in range(60):
        count = rng.randint(1, 20)
        # weight order along the chain is irrelevant to both sides, so
        # sort to satisfy the monotone-chain invariant
        weights = sorted(
            Fraction(rng.randint(1, 8), rng.randint(1, 8)) for _ in range(count)
        )
        space = _atom_space(weights)
        values = [complex(rng.uniform(-3, 3), rng.uniform(-3, 3)) for _ in range(count)]
        v = finite_function([values])
        analytic = float(norm_L1_plus_Linf(space, v))
        brute = float(best_split(space, v).cost)
        assert abs(analytic - brute) <= 1e-9


def test_rearrangement_norm_with_infinite_tail(unit_space):
    v = CellFunction((ChainValues((5, 2), ValueTail("constant", Fraction(1, 4))),))
    # profile: (5, 1), (2, 1), (1/4, inf); only the first unit of width counts
    assert norm_L1_plus_Linf(unit_space, v) == 5
    w = CellFunction((ChainValues((), ValueTail("constant", Fraction(1, 4))),))
    assert norm_L1_plus_Linf(unit_space, w) == Fraction(1, 4)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**30), st.floats(-4, 4))
def test_norm_triangle_and_homogeneity(seed, c):
    rng = random.Random(seed)
    space = FactorSpace((ChainWeights((), WeightTail("constant", 1)),))
    a = random_finite_function(space, rng)
    b = random_finite_function(space, rng)
    na = float(norm_L1_plus_Linf(space, a))
    nb = float(norm_L1_plus_Linf(space, b))
    assert float(norm_L1_plus_Linf(space, combine(a, b))) <= na + nb + 1e-9
    assert float(norm_L1_plus_Linf(space, scale(a, c))) == pytest.approx(
        abs(c) * na, rel=1e-9, abs=1e-12
    )


def test_mixed_norm_dominated_by_each_summand(unit_space):
    rng = random.Random(17)
    for _ in range(30):
        v = random_finite_function(unit_space, rng)
        mixed = float(norm_L1_plus_Linf(unit_space, v))
        assert mixed <= float(norm_L1(unit_space, v)) + 1e-9
        assert mixed <= float(norm_Linf(unit_space, v)) + 1e-9


def test_contraction_on_monotone_spaces(two_space):
    rep = check_contraction(two_space, "shift", samples=1000, seed=2)
    assert rep.passed
    assert rep.worst_l1_ratio <= 1 + 1e-12
    assert rep.worst_linf_ratio <= 1 + 1e-12


def test_contraction_single_cell_mass_is_weight_ratio():
    space = FactorSpace((ChainWeights((1, 2, 4), WeightTail("constant", 4)),))
    v = finite_function([[0, 1]])  # unit mass at cell 1
    assert norm_L1(space, v) == 2
    from signedshift import apply_shift

    sv = apply_shift(space, v)
    assert norm_L1(space, sv) == 1  # mass moves to cell 0 of weight 1


def test_contraction_negative_control_decreasing_weights():
    bad = FactorSpace(
        (ChainWeights((4, 2, 1), WeightTail("constant", 1)),),
        require_monotone=False,
    )
    rep = check_contraction(bad, "shift", samples=300, seed=2)
    assert not rep.passed  # weight monotonicity is necessary, not cosmetic
    assert rep.worst_l1_ratio > 1
    assert rep.worst_linf_ratio <= 1 + 1e-12  # sup norm never sees weights
