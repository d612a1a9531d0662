from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from signedshift import (
    CellFunction,
    ChainMismatchError,
    ChainValues,
    ChainWeights,
    FactorSpace,
    SpaceError,
    ValueTail,
    WeightTail,
    cell_value,
    cell_weight,
    combine,
    function_from_lines,
    function_from_prefixes,
    function_to_lines,
    make_indicator,
    space_from_lines,
    space_to_lines,
    to_cplx,
)

from conftest import finite_function


def test_cell_weight_prefix_and_constant_tail():
    space = FactorSpace((ChainWeights((1, 2, 4), WeightTail("constant", 4)),))
    assert cell_weight(space, (0, 1)) == 2
    assert cell_weight(space, (0, 100)) == 4


def test_cell_weight_geometric_tail_absolute_exponent():
    space = FactorSpace((ChainWeights((1,), WeightTail("geometric", 1, 2)),))
    assert cell_weight(space, (0, 3)) == 8  # 1 * 2**3 by repeated doubling
    assert cell_weight(space, (0, 40)) == 2**40


def test_cell_weight_rejects_bad_chain():
    space = FactorSpace((ChainWeights((1,), WeightTail("constant", 1)),))
    with pytest.raises(ChainMismatchError):
        cell_weight(space, (1, 0))


def test_monotonicity_validated_at_construction():
    with pytest.raises(SpaceError):
        FactorSpace((ChainWeights((2, 1), WeightTail("constant", 1)),))
    # seam violation: tail starts below the last prefix weight
    with pytest.raises(SpaceError):
        FactorSpace((ChainWeights((1, 5), WeightTail("constant", 4)),))
    # explicit opt-out for the negative-control space
    FactorSpace(
        (ChainWeights((2, 1), WeightTail("constant", 1)),), require_monotone=False
    )


def test_weight_monotone_exhaustive_prefix_and_tail(two_space):
    for j, cw in enumerate(two_space.chains):
        values = [cell_weight(two_space, (j, n)) for n in range(len(cw.prefix) + 10)]
        assert all(b >= a for a, b in zip(values, values[1:]))


def test_geometric_ratio_below_one_rejected():
    with pytest.raises(SpaceError):
        WeightTail("geometric", 1, Fraction(1, 2))


def test_cell_value_examples():
    v = finite_function([[1j, 2]])
    assert cell_value(v, (0, 0)) == 1j
    assert cell_value(v, (0, 5)) == 0
    one_chain = CellFunction((ChainValues((), ValueTail("constant", 1)),))
    assert cell_value(one_chain, (0, 12345)) == 1


def test_make_indicator(two_space):
    empty = make_indicator(two_space, [])
    full = make_indicator(two_space, [0, 1])
    half = make_indicator(two_space, [0])
    for n in (0, 1, 7, 100):
        assert cell_value(empty, (0, n)) == 0
        assert cell_value(full, (1, n)) == 1
        assert cell_value(half, (0, n)) == 1
        assert cell_value(half, (1, n)) == 0


def test_combine_examples():
    v = CellFunction((ChainValues((1,), ValueTail("constant", 2)),))
    w = CellFunction((ChainValues((0, 3), ValueTail("zero")),))
    out = combine(v, w)
    assert [cell_value(out, (0, n)) for n in (0, 1, 2)] == [1, 5, 2]
    assert out.chains[0].tail.kind == "constant"
    cancel = combine(v, v, 1, -1)
    assert all(not to_cplx(cell_value(cancel, (0, n))) for n in range(5))


def test_combine_rejects_mismatched_chain_counts(two_space, unit_space):
    v = make_indicator(two_space, [0])
    w = make_indicator(unit_space, [0])
    with pytest.raises(ChainMismatchError):
        combine(v, w)


@given(
    a=st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
    b=st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
    n=st.integers(0, 30),
)
def test_combine_is_pointwise_linear(a, b, n):
    v = CellFunction((ChainValues((1, 2j, -0.5), ValueTail("constant", 0.25)),))
    w = CellFunction((ChainValues((0.5, 1), ValueTail("zero")),))
    out = combine(v, w, a, b)
    lhs = to_cplx(cell_value(out, (0, n)))
    rhs = a * to_cplx(cell_value(v, (0, n))) + b * to_cplx(cell_value(w, (0, n)))
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


def test_zero_tail_values_vanish_at_infinity():
    # the vanishing-tail property that makes L1 perturbations harmless
    v = finite_function([[5, 7, 9]])
    assert all(cell_value(v, (0, n)) == 0 for n in range(3, 50))


def test_space_serialization_roundtrip(two_space):
    lines = space_to_lines(two_space)
    back = space_from_lines(lines)
    for j in range(2):
        for n in range(8):
            assert cell_weight(back, (j, n)) == cell_weight(two_space, (j, n))


def test_function_serialization_roundtrip():
    v = function_from_prefixes(
        [[Fraction(1, 3), 2], []],
        [ValueTail("zero"), ValueTail("constant", Fraction(3, 4))],
    )
    back = function_from_lines(function_to_lines(v))
    for j in range(2):
        for n in range(6):
            assert cell_value(back, (j, n)) == cell_value(v, (j, n))
