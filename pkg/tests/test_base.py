import math
import random
from fractions import Fraction

import pytest

from signedshift import (
    BaseSpace,
    CellFunction,
    ChainValues,
    ComplementTooLarge,
    InfiniteLevelSetRequired,
    MisalignedCellMeasure,
    MotifSpec,
    NoZ0Found,
    PiecewiseFunction,
    ValueTail,
    apply_base_operator,
    apply_shift,
    base_norm_L1,
    base_norm_Linf,
    build_partition,
    cell_weight,
    choose_z0,
    constant_function,
    embed_step,
    function_from_prefixes,
    make_indicator,
    measure_of_halfstrip,
    norm_L1,
    norm_Linf,
    partition_to_lines,
    project_to_cells,
    to_cplx,
    to_exact,
    verify_factorization,
)

HALF_OPEN_LINE = MotifSpec(start=0, period=1, pattern=((Fraction(0), Fraction(1)),))


def _const_f(value):
    space = BaseSpace(motif=HALF_OPEN_LINE)
    return PiecewiseFunction(space=space, motif_values=(value,))


def test_measure_of_halfstrip_examples():
    assert measure_of_halfstrip(_const_f(Fraction(3, 4)), 1) is math.inf
    assert measure_of_halfstrip(_const_f(Fraction(2)), 1) == 0
    finite_space = BaseSpace(segments=((Fraction(0), Fraction(5)),))
    f = PiecewiseFunction(space=finite_space, segment_values=(1,))
    assert measure_of_halfstrip(f, 1) == 5
    with pytest.raises(ValueError):
        measure_of_halfstrip(f, 0)


def test_choose_z0_constant_function():
    f = _const_f(Fraction(3, 4))
    scan = choose_z0(f, Fraction(1, 2))
    assert scan.captured_measure is math.inf
    assert to_exact(scan.z0) == to_exact(1)  # (4/3) * 3/4 on the real axis
    r = (to_exact(Fraction(3, 4)) / to_exact(scan.z0)).re
    assert r == Fraction(3, 4)


def test_choose_z0_two_phase_function():
    space = BaseSpace(
        motif=MotifSpec(
            start=0,
            period=1,
            pattern=((Fraction(0), Fraction(1, 2)), (Fraction(1, 2), Fraction(1))),
        )
    )
    f = PiecewiseFunction(space=space, motif_values=(1, 1j))
    scan = choose_z0(f, Fraction(1, 2))
    assert scan.captured_measure is math.inf
    # the value-1 level set is captured (here the scan's densest direction
    # sits between the two phases and captures both level sets)
    r = (to_exact(1) / to_exact(scan.z0)).re
    assert Fraction(1, 2) <= r <= 1


def test_choose_z0_prefers_denser_captures():
    # one direction captures both motif values, another only one; the
    # denser capture must win so the complement stays finite
    space = BaseSpace(
        motif=MotifSpec(
            start=0,
            period=2,
            pattern=((Fraction(0), Fraction(1)), (Fraction(1), Fraction(2))),
        )
    )
    f = PiecewiseFunction(space=space, motif_values=(Fraction(3, 4), Fraction(1, 2)))
    scan = choose_z0(f, Fraction(1, 4))
    for val in (Fraction(3, 4), Fraction(1, 2)):
        r = (to_exact(val) / to_exact(scan.z0)).re
        assert Fraction(1, 2) <= r <= 1


def test_choose_z0_rejects_finite_level_sets():
    space = BaseSpace(segments=((Fraction(0), Fraction(9)),))
    f = PiecewiseFunction(space=space, segment_values=(5,))
    with pytest.raises(InfiniteLevelSetRequired):
        choose_z0(f, Fraction(1, 2))


def test_choose_z0_grid_too_coarse():
    # a phase exactly between two of three directions sits 60 degrees off
    # both, and cos(60) * 3/4 < 1/2 escapes the half-strip
    import cmath

    space = BaseSpace(motif=HALF_OPEN_LINE)
    f = PiecewiseFunction(
        space=space, motif_values=(0.8 * cmath.exp(1j * cmath.pi / 3),)
    )
    with pytest.raises(NoZ0Found) as err:
        choose_z0(f, Fraction(1, 2), direction_count=3, radius_count=1)
    assert err.value.best_direction is not None
    scan = choose_z0(f, Fraction(1, 2), direction_count=24)
    assert scan.captured_measure is math.inf


def test_build_partition_canonical_unit_cells(canonical_partition):
    part, f = canonical_partition
    assert part.first_analytic == (1,)
    assert part.weight(0, 0) == 1 and part.weight(0, 7) == 1
    pieces = part.materialize_cell(0, 5)
    assert len(pieces) == 1 and (pieces[0].lo, pieces[0].hi) == (5, 6)
    fs = part.factor_space()
    assert cell_weight(fs, (0, 123)) == 1


def test_build_partition_complement_slab(complement_partition):
    part, f = complement_partition
    cell0 = part.prefix_cells[0][0]
    assert (cell0[0].lo, cell0[0].hi) == (0, 1)  # H(0,0) = [0,1)
    pieces = part.materialize_cell(0, 3)
    assert (pieces[0].lo, pieces[0].hi) == (3, 4)  # H(0,n) = [n, n+1)


def test_build_partition_infinite_complement_rejected():
    space = BaseSpace(
        motif=MotifSpec(
            start=0,
            period=1,
            pattern=((Fraction(0), Fraction(1, 2)), (Fraction(1, 2), Fraction(1))),
        )
    )
    f = PiecewiseFunction(space=space, motif_values=(Fraction(3, 4), Fraction(9)))
    scan = choose_z0(f, Fraction(1, 2))
    with pytest.raises(ComplementTooLarge):
        build_partition(f, scan, 3, Fraction(1, 2))


def test_build_partition_more_slabs_than_chains():
    space = BaseSpace(
        segments=((Fraction(0), Fraction(1)), (Fraction(2), Fraction(3))),
        motif=MotifSpec(start=3, period=1, pattern=((Fraction(0), Fraction(1)),)),
    )
    f = PiecewiseFunction(
        space=space, segment_values=(9, 9), motif_values=(Fraction(3, 4),)
    )
    scan = choose_z0(f, Fraction(1, 2))
    with pytest.raises(ComplementTooLarge):
        build_partition(f, scan, 1, 1)
    part = build_partition(f, scan, 2, 1)
    assert part.chain_count == 2


def test_build_partition_misaligned_cell_measure(canonical_partition):
    part, f = canonical_partition
    scan = choose_z0(f, Fraction(1, 2))
    with pytest.raises(MisalignedCellMeasure):
        build_partition(f, scan, 1, Fraction(1, 3))
    # multiples of the per-period capture are fine
    assert build_partition(f, scan, 1, 3).weight(0, 1) == 3


def test_oversized_complement_slab_rejected():
    space = BaseSpace(
        segments=((Fraction(0), Fraction(5)),),
        motif=MotifSpec(start=5, period=1, pattern=((Fraction(0), Fraction(1)),)),
    )
    f = PiecewiseFunction(
        space=space, segment_values=(9,), motif_values=(Fraction(3, 4),)
    )
    scan = choose_z0(f, Fraction(1, 2))
    with pytest.raises(ComplementTooLarge):
        build_partition(f, scan, 1, 1)  # slab measure 5 > cell measure 1


def test_atoms_pack_into_cells():
    space = BaseSpace(
        atom_weights=(Fraction(1, 2), Fraction(1, 2)),
        motif=MotifSpec(start=0, period=1, pattern=((Fraction(0), Fraction(1)),)),
    )
    f = PiecewiseFunction(
        space=space,
        atom_values=(Fraction(3, 4), Fraction(3, 4)),
        motif_values=(Fraction(3, 4),),
    )
    scan = choose_z0(f, Fraction(1, 2))
    part = build_partition(f, scan, 1, 1)
    # no complement here, so cell 0 is the leading captured slab and the
    # two half-weight atoms pack it exactly
    cell0 = part.prefix_cells[0][0]
    assert {p.source for p in cell0} == {("atom", 0), ("atom", 1)}
    # an indivisible atom that straddles a boundary is refused
    space2 = BaseSpace(
        atom_weights=(Fraction(3, 2),),
        motif=MotifSpec(start=0, period=1, pattern=((Fraction(0), Fraction(1)),)),
    )
    f2 = PiecewiseFunction(
        space=space2, atom_values=(Fraction(3, 4),), motif_values=(Fraction(3, 4),)
    )
    scan2 = choose_z0(f2, Fraction(1, 2))
    with pytest.raises(MisalignedCellMeasure):
        build_partition(f2, scan2, 1, 1)


def test_halfstrip_membership_on_deep_cells(complement_partition):
    part, f = complement_partition
    z = to_exact(part.z0)
    for n in (1, 2, 5, 9):
        for piece in part.materialize_cell(0, n):
            val = f.motif_values[piece.source[2]]
            r = (to_exact(val) / z).re
            assert Fraction(1, 2) <= r <= 1


def test_project_constant_and_halves():
    part, f = None, None
    space = BaseSpace(
        motif=MotifSpec(
            start=0,
            period=1,
            pattern=((Fraction(0), Fraction(1, 2)), (Fraction(1, 2), Fraction(1))),
        )
    )
    f = PiecewiseFunction(
        space=space, motif_values=(Fraction(3, 4), Fraction(3, 4))
    )
    scan = choose_z0(f, Fraction(1, 2))
    part = build_partition(f, scan, 1, 1)
    const = project_to_cells(part, f)
    assert to_exact(const.value(0, 0)) == to_exact(Fraction(3, 4))
    # g = 2 on the left half of every cell, 0 on the right: averages to 1.
    # 0 is outside the half-strip, so build g on the same partition.
    g = PiecewiseFunction(space=space, motif_values=(2, 0))
    avg = project_to_cells(part, g)
    for n in range(4):
        assert to_cplx(avg.value(0, n)) == 1


def test_project_embed_inverse(canonical_partition):
    part, _ = canonical_partition
    rng = random.Random(4)
    for _ in range(10):
        prefix = tuple(complex(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(6))
        v = CellFunction((ChainValues(prefix, ValueTail("constant", Fraction(1, 2))),))
        back = project_to_cells(part, embed_step(part, v))
        for n in range(10):
            assert to_cplx(back.value(0, n)) == to_cplx(v.value(0, n))


def test_embedding_is_isometric(canonical_partition):
    part, _ = canonical_partition
    fs = part.factor_space()
    rng = random.Random(8)
    for _ in range(20):
        prefix = tuple(complex(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(8))
        v = CellFunction((ChainValues(prefix, ValueTail("zero")),))
        sf = embed_step(part, v)
        assert float(base_norm_L1(part, sf)) == pytest.approx(
            float(norm_L1(fs, v)), rel=1e-12, abs=1e-15
        )
        assert float(base_norm_Linf(part, sf)) == pytest.approx(
            float(norm_Linf(fs, v)), rel=1e-12, abs=1e-15
        )


def test_apply_base_operator_examples(canonical_partition):
    part, f = canonical_partition
    space = part.space
    # g = 1 everywhere: cell 1 average is 1 and 1 = 3**0 flips the sign
    g = PiecewiseFunction(space=space, motif_values=(1,))
    tg = apply_base_operator(part, g)
    assert to_cplx(tg.values.value(0, 0)) == -1
    zero = PiecewiseFunction(space=space, motif_values=(0,))
    tz = apply_base_operator(part, zero)
    assert all(to_cplx(tz.values.value(0, n)) == 0 for n in range(6))


def test_zero_cell_average_lands_in_kernel():
    space = BaseSpace(
        motif=MotifSpec(
            start=0,
            period=1,
            pattern=((Fraction(0), Fraction(1, 2)), (Fraction(1, 2), Fraction(1))),
        )
    )
    f = PiecewiseFunction(space=space, motif_values=(Fraction(3, 4), Fraction(3, 4)))
    scan = choose_z0(f, Fraction(1, 2))
    part = build_partition(f, scan, 1, 1)
    g = PiecewiseFunction(space=space, motif_values=(1, -1))  # zero mean per cell
    tg = apply_base_operator(part, g)
    assert all(to_cplx(tg.values.value(0, n)) == 0 for n in range(6))


def test_base_step_agrees_with_shift(canonical_partition):
    part, _ = canonical_partition
    fs = part.factor_space()
    v = constant_function(fs, 1)
    lhs = apply_base_operator(part, embed_step(part, v), min_horizon=20)
    rhs = apply_shift(fs, v, min_horizon=20)
    for n in range(min(lhs.values.valid_below, rhs.valid_below)):
        assert to_cplx(lhs.values.value(0, n)) == to_cplx(rhs.value(0, n))


def test_factorization_canonical(canonical_partition):
    part, f = canonical_partition
    rep = verify_factorization(part, f, k_max=50)
    assert rep.passed and rep.checked > 0


def test_factorization_random_step_functions(canonical_partition):
    part, _ = canonical_partition
    rng = random.Random(12)
    for _ in range(20):
        prefix = tuple(complex(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(7))
        tail = (
            ValueTail("zero")
            if rng.random() < 0.5
            else ValueTail("constant", complex(rng.uniform(-1, 1), 0))
        )
        v = CellFunction((ChainValues(prefix, tail),))
        rep = verify_factorization(part, embed_step(part, v), k_max=50)
        assert rep.passed, rep.failures[:3]


def test_factorization_two_chain_base():
    space = BaseSpace(
        segments=((Fraction(0), Fraction(1)),),
        motif=MotifSpec(
            start=1,
            period=2,
            pattern=((Fraction(0), Fraction(1)), (Fraction(1), Fraction(2))),
        ),
    )
    f = PiecewiseFunction(
        space=space,
        segment_values=(3,),
        motif_values=(Fraction(3, 4), Fraction(1, 2)),
    )
    scan = choose_z0(f, Fraction(1, 4))
    part = build_partition(f, scan, 2, 2)
    rep = verify_factorization(part, f, k_max=40)
    assert rep.passed
    rep_d = verify_factorization(
        build_partition(f, scan, 2, 2, schedule="doubling"), f, k_max=25
    )
    assert rep_d.passed


def test_partition_serialization_stable(complement_partition):
    part, _ = complement_partition
    lines = partition_to_lines(part)
    assert lines[0].startswith("z0,")
    assert any(line.startswith("chain,0,cell,0") for line in lines)
    assert lines == partition_to_lines(part)  # deterministic bytes


def test_base_contraction(canonical_partition):
    from signedshift import check_contraction

    part, _ = canonical_partition
    rep = check_contraction(
        part.factor_space(), "base", samples=200, seed=3, partition=part
    )
    assert rep.passed
