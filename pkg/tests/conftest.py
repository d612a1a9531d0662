from fractions import Fraction

import pytest

from signedshift import (
    BaseSpace,
    CellFunction,
    ChainValues,
    ChainWeights,
    FactorSpace,
    MotifSpec,
    PiecewiseFunction,
    ValueTail,
    WeightTail,
    build_partition,
    choose_z0,
    constant_function,
)


@pytest.fixture
def unit_space():
    """One chain, every cell weight 1."""
    return FactorSpace((ChainWeights((), WeightTail("constant", 1)),))


@pytest.fixture
def two_space():
    """Two chains with different monotone weight laws."""
    return FactorSpace(
        (
            ChainWeights((Fraction(1), Fraction(2), Fraction(4)), WeightTail("constant", 4)),
            ChainWeights((Fraction(1),), WeightTail("geometric", 1, 2)),
        )
    )


@pytest.fixture
def ones(unit_space):
    return constant_function(unit_space, 1)


@pytest.fixture
def canonical_partition():
    """Unit-interval cells over [0, oo) from the constant-3/4 function."""
    motif = MotifSpec(start=0, period=1, pattern=((Fraction(0), Fraction(1)),))
    space = BaseSpace(motif=motif)
    f = PiecewiseFunction(space=space, motif_values=(Fraction(3, 4),))
    scan = choose_z0(f, Fraction(1, 2))
    return build_partition(f, scan, 1, 1), f


@pytest.fixture
def complement_partition():
    """f = 2 on [0,1) is uncaptured and becomes cell 0; motif from 1 on."""
    space = BaseSpace(
        segments=((Fraction(0), Fraction(1)),),
        motif=MotifSpec(start=1, period=1, pattern=((Fraction(0), Fraction(1)),)),
    )
    f = PiecewiseFunction(
        space=space, segment_values=(Fraction(2),), motif_values=(Fraction(3, 4),)
    )
    scan = choose_z0(f, Fraction(1, 2))
    return build_partition(f, scan, 1, 1), f


def finite_function(prefixes, tails=None):
    """Shorthand used across the tests."""
    if tails is None:
        tails = [ValueTail("zero")] * len(prefixes)
    return CellFunction(
        tuple(ChainValues(tuple(p), t) for p, t in zip(prefixes, tails))
    )
