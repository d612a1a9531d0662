"""Sigma-finite base spaces and their reduction to chain spaces.

A base space is a finite list of atoms, a finite list of disjoint real
intervals, and an optional motif: a finite pattern of subintervals that
repeats with a fixed period forever, which is what makes the total
measure infinite.  Functions are piecewise constant on those pieces.

Given a function f and a direction z0 with mu({Re(f/z0) in [1/2,1]})
infinite, ``build_partition`` splits the space into chains of cells
H(j, n): each chain absorbs one finite complement slab as its cell 0,
and the captured set is consumed left to right into slabs of a fixed
cell measure, assigned round-robin.  Beyond a finite materialised
prefix every cell is described analytically as a measure-coordinate
window into the motif, so integrals over arbitrarily deep cells cost
O(pattern) arithmetic.

The averaging projection onto cell functions, the step-function
embedding, and the signed base operator

    (T g)|_{H(j,n)} = cell_sign(n+1) * average of g over H(j, n+1)

live here, together with the dual-route factorisation check that the
base operator agrees with the signed shift conjugated through the
projection/embedding pair.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .numeric import ExactComplex, is_exact_scalar, modulus, to_cplx, to_exact
from .shift import cell_sign, next_power_of_3
from .space import (
    CellFunction,
    ChainValues,
    ChainWeights,
    FactorSpace,
    SpaceError,
    TAIL_CONSTANT,
    TAIL_GEOMETRIC,
    VALUE_CONSTANT,
    ValueTail,
    WeightTail,
    ZERO_TAIL,
)


class ConstructionError(ValueError):
    """A partition or scan cannot be built as requested."""


class NoZ0Found(ConstructionError):
    """The direction/radius grid captured no infinite half-strip."""

    def __init__(self, message, best_direction=None, best_measure=None):
        super().__init__(message)
        self.best_direction = best_direction
        self.best_measure = best_measure


class InfiniteLevelSetRequired(ConstructionError):
    """mu({|f| > eps}) is finite, so no direction can work."""


class ComplementTooLarge(ConstructionError):
    """The uncaptured part cannot be absorbed into the available chains."""


class MisalignedCellMeasure(ConstructionError):
    """cell_measure does not tile the captured stream as required."""


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class MotifSpec:
    """Pattern of subintervals of [0, period) repeating on [start, oo)."""

    start: Fraction
    period: Fraction
    pattern: tuple  # of (lo, hi) Fraction offsets

    def __post_init__(self):
        object.__setattr__(self, "start", _frac(self.start))
        object.__setattr__(self, "period", _frac(self.period))
        pattern = tuple((_frac(lo), _frac(hi)) for lo, hi in self.pattern)
        if self.period <= 0:
            raise SpaceError("motif period must be positive")
        prev = Fraction(0)
        for lo, hi in pattern:
            if not (prev <= lo < hi <= self.period):
                raise SpaceError("motif pattern must be disjoint ascending offsets")
            prev = hi
        object.__setattr__(self, "pattern", pattern)

    def pattern_measure(self) -> Fraction:
        return sum((hi - lo for lo, hi in self.pattern), Fraction(0))


@dataclass(frozen=True)
class BaseSpace:
    """Atoms + disjoint intervals + optional repeating motif."""

    atom_weights: tuple = ()
    segments: tuple = ()  # of (lo, hi)
    motif: Optional[MotifSpec] = None

    def __post_init__(self):
        object.__setattr__(
            self, "atom_weights", tuple(_frac(w) for w in self.atom_weights)
        )
        for w in self.atom_weights:
            if w <= 0:
                raise SpaceError("atom weights must be positive")
        segs = tuple(
            (_frac(lo), _frac(hi))
            for lo, hi in sorted(self.segments, key=lambda s: _frac(s[0]))
        )
        prev = None
        for lo, hi in segs:
            if hi <= lo:
                raise SpaceError("segments must have positive length")
            if prev is not None and lo < prev:
                raise SpaceError("segments must be disjoint")
            prev = hi
        if self.motif is not None and segs and segs[-1][1] > self.motif.start:
            raise SpaceError("segments must end before the motif starts")
        object.__setattr__(self, "segments", segs)

    def is_infinite(self) -> bool:
        return self.motif is not None and self.motif.pattern_measure() > 0


@dataclass(frozen=True)
class PiecewiseFunction:
    """Constant on each atom, segment, and motif pattern element.

    Finitely many values means the function is bounded, which is the
    integrable-plus-bounded decomposability every operation here needs.
    """

    space: BaseSpace
    atom_values: tuple = ()
    segment_values: tuple = ()
    motif_values: tuple = ()

    def __post_init__(self):
        if len(self.atom_values) != len(self.space.atom_weights):
            raise SpaceError("one value per atom required")
        if len(self.segment_values) != len(self.space.segments):
            raise SpaceError("one value per segment required")
        motif = self.space.motif
        expected = len(motif.pattern) if motif is not None else 0
        if len(self.motif_values) != expected:
            raise SpaceError("one value per motif pattern element required")


def _captured(value, z0) -> bool:
    # Exact rational test: floats are dyadic rationals, so membership of
    # Re(value/z0) in [1/2, 1] is decided without rounding.
    r = (to_exact(value) / to_exact(z0)).re
    return Fraction(1, 2) <= r <= 1


def measure_of_halfstrip(f: PiecewiseFunction, z0):
    """mu({Re(f/z0) in [1/2, 1]}); math.inf when a motif element recurs."""
    if not to_exact(z0):
        raise ValueError("z0 must be nonzero")
    sp = f.space
    total = Fraction(0)
    for w, val in zip(sp.atom_weights, f.atom_values):
        if _captured(val, z0):
            total += w
    for (lo, hi), val in zip(sp.segments, f.segment_values):
        if _captured(val, z0):
            total += hi - lo
    if sp.motif is not None:
        for (lo, hi), val in zip(sp.motif.pattern, f.motif_values):
            if _captured(val, z0):
                return math.inf
    return total


@dataclass(frozen=True)
class HalfStripScan:
    """A chosen direction z0 and the measure its half-strip captured."""

    z0: object
    epsilon: object
    captured_measure: object


def _all_values(f: PiecewiseFunction):
    yield from f.atom_values
    yield from f.segment_values
    yield from f.motif_values


def choose_z0(
    f: PiecewiseFunction,
    epsilon,
    direction_count: int = 24,
    radius_count: int = 8,
) -> HalfStripScan:
    """Scan directions and radii for a half-strip of infinite measure.

    Candidates are z0 = (4/3) * r * exp(2*pi*i*k/K) with r drawn from
    the distinct |f|-values in [epsilon, 2 * ess-sup] plus interpolated
    radii.  Candidates are ranked by captured measure (infinite first);
    the best one wins, ties broken by grid position.
    """
    if direction_count < 1 or radius_count < 1:
        raise ValueError("direction and radius counts must be >= 1")
    eps = _frac(epsilon) if is_exact_scalar(epsilon) else float(epsilon)
    sp = f.space
    level_inf = Fraction(0)
    if sp.motif is not None:
        for (lo, hi), val in zip(sp.motif.pattern, f.motif_values):
            if modulus(val) > eps and hi > lo:
                level_inf += hi - lo
    if level_inf == 0:
        raise InfiniteLevelSetRequired(
            f"mu({{|f| > {epsilon}}}) is finite; no direction can capture "
            "infinite measure"
        )
    ess_sup = max(modulus(v) for v in _all_values(f))
    radii = sorted(
        {m for v in _all_values(f) if eps <= (m := modulus(v)) <= 2 * ess_sup}
    )
    lo_r, hi_r = float(radii[0]), float(radii[-1])
    for i in range(radius_count):
        if radius_count == 1 or hi_r == lo_r:
            break
        radii.append(lo_r + (hi_r - lo_r) * i / (radius_count - 1))
    seen = set()
    grid = []
    for m in radii:
        if m in seen:
            continue
        seen.add(m)
        grid.append(m)

    candidates = []
    for k in range(direction_count):
        for ri, r in enumerate(grid):
            z0 = _direction_times(k, direction_count, r)
            m = measure_of_halfstrip(f, z0)
            per_period = Fraction(0)
            if m is math.inf:
                for (lo, hi), val in zip(sp.motif.pattern, f.motif_values):
                    if _captured(val, z0):
                        per_period += hi - lo
            rank = (
                0 if m is math.inf else 1,
                -float(per_period),
                -float(m) if m is not math.inf else 0.0,
                k,
                ri,
            )
            candidates.append((rank, z0, m))
    candidates.sort(key=lambda c: c[0])
    best = candidates[0]
    if best[2] is not math.inf:
        dense = min(candidates, key=lambda c: c[0][2])
        raise NoZ0Found(
            "no grid direction captured infinite measure; densest direction "
            f"index {dense[0][3]} captured {float(-dense[0][2])}",
            best_direction=dense[0][3],
            best_measure=-dense[0][2],
        )
    return HalfStripScan(z0=best[1], epsilon=epsilon, captured_measure=math.inf)


def _direction_times(k: int, K: int, r):
    """(4/3) * r * exp(2 pi i k / K), exact on the four axes."""
    scaled = Fraction(4, 3) * _frac(r) if is_exact_scalar(r) else (4 * float(r)) / 3
    if k % K == 0:
        return scaled
    if 4 * k % K == 0:
        quarter = (4 * k) // K  # 1, 2, or 3
        if quarter == 2:
            return -scaled
        s = _frac(scaled) if is_exact_scalar(scaled) else Fraction(scaled)
        return ExactComplex(0, s if quarter == 1 else -s)
    return complex(float(scaled)) * cmath.exp(2j * cmath.pi * k / K)


# -- pieces and the captured stream -------------------------------------------


@dataclass(frozen=True)
class Piece:
    """One measurable chunk of a cell, tagged with its source piece.

    source is ('atom', i), ('segment', i) or ('motif', period_index,
    element_index); interval pieces carry absolute coordinates.
    """

    source: tuple
    lo: Optional[Fraction]
    hi: Optional[Fraction]
    measure: Fraction


def _piece_value(f, piece: Piece):
    kind = piece.source[0]
    if kind == "atom":
        return f.atom_values[piece.source[1]]
    if kind == "segment":
        return f.segment_values[piece.source[1]]
    return f.motif_values[piece.source[2]]


class _StreamCursor:
    """Left-to-right consumer of the captured part of the space."""

    def __init__(self, finite_pieces, motif, captured_elems):
        self._finite = list(finite_pieces)  # Piece list, untouched portions
        self._fin_idx = 0
        self._fin_used = Fraction(0)  # measure taken from current piece
        self._motif = motif
        self._elems = captured_elems  # [(elem_index, lo, hi)]
        self._period = 0
        self._elem_pos = 0
        self._elem_used = Fraction(0)
        self.position = Fraction(0)

    def take(self, amount: Fraction) -> list:
        need = _frac(amount)
        if need <= 0:
            raise ConstructionError("cells must have positive measure")
        out = []
        while need > 0 and self._fin_idx < len(self._finite):
            piece = self._finite[self._fin_idx]
            if piece.source[0] == "atom":
                if piece.measure > need:
                    raise MisalignedCellMeasure(
                        "an indivisible atom straddles a cell boundary"
                    )
                out.append(piece)
                need -= piece.measure
                self._fin_idx += 1
                continue
            avail = piece.measure - self._fin_used
            take = min(avail, need)
            lo = piece.lo + self._fin_used
            out.append(Piece(piece.source, lo, lo + take, take))
            self._fin_used += take
            need -= take
            if self._fin_used == piece.measure:
                self._fin_idx += 1
                self._fin_used = Fraction(0)
        while need > 0:
            if not self._elems:
                raise ConstructionError("captured stream exhausted")
            e, elo, ehi = self._elems[self._elem_pos]
            avail = (ehi - elo) - self._elem_used
            take = min(avail, need)
            base = self._motif.start + self._period * self._motif.period
            lo = base + elo + self._elem_used
            out.append(Piece(("motif", self._period, e), lo, lo + take, take))
            self._elem_used += take
            need -= take
            if self._elem_used == ehi - elo:
                self._elem_pos += 1
                self._elem_used = Fraction(0)
                if self._elem_pos == len(self._elems):
                    self._elem_pos = 0
                    self._period += 1
        self.position += _frac(amount)
        return out


SCHEDULE_CONSTANT = "constant"
SCHEDULE_DOUBLING = "doubling"


@dataclass(frozen=True)
class Partition:
    """Chains of cells partitioning the base space.

    Prefix cells are explicit piece lists; from ``first_analytic[j]`` on,
    cell (j, n) is the measure-coordinate window of width weight(j, n)
    starting at ``slab_start((n - 1) * chain_count + j)`` inside the
    captured stream, which lies wholly in the motif region.
    """

    space: BaseSpace
    f: PiecewiseFunction
    z0: object
    chain_count: int
    cell_measure: Fraction
    schedule: str
    prefix_cells: tuple  # per chain: tuple of tuple-of-Piece
    prefix_weights: tuple  # per chain: tuple of Fraction
    first_analytic: tuple  # per chain: first analytic cell index
    finite_captured: Fraction  # measure of captured atoms + segments
    leading_measure: Fraction  # consumed before round-robin slabs begin
    captured_elems: tuple  # [(elem_index, lo, hi)] within one period
    period_captured: Fraction

    def weight(self, j: int, n: int) -> Fraction:
        if not 0 <= j < self.chain_count:
            raise SpaceError(f"chain {j} out of range")
        if n < self.first_analytic[j]:
            return self.prefix_weights[j][n]
        if self.schedule == SCHEDULE_CONSTANT:
            return self.cell_measure
        return self.cell_measure * 2 ** (n - 1)

    def slab_start(self, s: int) -> Fraction:
        """Measure coordinate where round-robin slab s begins."""
        if self.schedule == SCHEDULE_CONSTANT:
            return self.leading_measure + s * self.cell_measure
        r, within = divmod(s, self.chain_count)
        full = self.chain_count * (2**r - 1)
        return self.leading_measure + self.cell_measure * (full + within * 2**r)

    def cell_window(self, j: int, n: int) -> tuple:
        """Measure-coordinate [a, b) of an analytic cell."""
        if n < self.first_analytic[j]:
            raise SpaceError(f"cell ({j}, {n}) is materialised, not analytic")
        s = (n - 1) * self.chain_count + j
        a = self.slab_start(s)
        return a, a + self.weight(j, n)

    def factor_space(self) -> FactorSpace:
        chains = []
        for j in range(self.chain_count):
            prefix = self.prefix_weights[j]
            if self.schedule == SCHEDULE_CONSTANT:
                tail = WeightTail(TAIL_CONSTANT, self.cell_measure)
            else:
                tail = WeightTail(
                    TAIL_GEOMETRIC, self.cell_measure / 2, 2
                )  # base * 2**n = cell_measure * 2**(n-1)
            chains.append(ChainWeights(prefix, tail))
        return FactorSpace(tuple(chains))

    # -- integration ----------------------------------------------------------

    def _motif_window_integral(self, g: PiecewiseFunction, a: Fraction, b: Fraction):
        """Integral of g over the captured-stream window [a, b), both >= F."""
        q = self.period_captured
        rel_a = a - self.finite_captured
        rel_b = b - self.finite_captured
        if rel_a < 0:
            raise SpaceError("window reaches into the finite captured part")
        exact = all(is_exact_scalar(v) for v in g.motif_values)
        zero = ExactComplex(Fraction(0), Fraction(0)) if exact else 0j

        def within_period(x: Fraction, y: Fraction):
            # integral over captured offsets [x, y) of one period
            out = zero
            pos = Fraction(0)
            for e, lo, hi in self.captured_elems:
                length = hi - lo
                s = max(x, pos)
                t = min(y, pos + length)
                if t > s:
                    val = g.motif_values[e]
                    seg = (t - s) if exact else float(t - s)
                    out = out + (to_exact(val) if exact else to_cplx(val)) * seg
                pos += length
            return out

        t0, r0 = divmod(rel_a, q)
        t1, r1 = divmod(rel_b, q)
        if t0 == t1:
            return within_period(r0, r1)
        per_period = within_period(Fraction(0), q)
        whole = int(t1 - t0 - 1)
        out = within_period(r0, q) + per_period * whole
        if r1 > 0:
            out = out + within_period(Fraction(0), r1)
        return out

    def cell_integral(self, g, j: int, n: int):
        """Integral of g over cell (j, n); exact for exact values."""
        if isinstance(g, StepFunction):
            return _step_cell_integral(self, g, j, n)
        if n < self.first_analytic[j]:
            pieces = self.prefix_cells[j][n]
            exact = all(is_exact_scalar(_piece_value(g, p)) for p in pieces)
            total = ExactComplex(Fraction(0), Fraction(0)) if exact else 0j
            for p in pieces:
                val = _piece_value(g, p)
                if exact:
                    total = total + to_exact(val) * p.measure
                else:
                    total = total + to_cplx(val) * float(p.measure)
            return total
        a, b = self.cell_window(j, n)
        return self._motif_window_integral(g, a, b)

    def cell_average(self, g, j: int, n: int):
        if isinstance(g, StepFunction):
            return g.values.value(j, n)
        w = self.weight(j, n)
        total = self.cell_integral(g, j, n)
        if isinstance(total, ExactComplex):
            return total / w
        return total / float(w)

    def materialize_cell(self, j: int, n: int, max_pieces: int = 10000) -> tuple:
        """Explicit piece list for any cell; guarded against huge windows."""
        if n < self.first_analytic[j]:
            return self.prefix_cells[j][n]
        a, b = self.cell_window(j, n)
        q = self.period_captured
        if (b - a) / q > max_pieces:
            raise SpaceError("cell spans too many periods to materialise")
        rel_a = a - self.finite_captured
        rel_b = b - self.finite_captured
        pieces = []
        t = rel_a // q
        while t * q < rel_b:
            pos = t * q
            base = self.space.motif.start + t * self.space.motif.period
            off = Fraction(0)
            for e, lo, hi in self.captured_elems:
                length = hi - lo
                s = max(rel_a, pos + off)
                u = min(rel_b, pos + off + length)
                if u > s:
                    plo = base + lo + (s - pos - off)
                    pieces.append(Piece(("motif", int(t), e), plo, plo + (u - s), u - s))
                off += length
            t += 1
        return tuple(pieces)


@dataclass(frozen=True)
class StepFunction:
    """A function constant on every cell of a partition.

    The embedding of a cell function into the base space; also the shape
    of every base-operator output.  ``values.valid_below`` carries the
    representation horizon exactly as for shifted chain functions.
    """

    partition: Partition
    values: CellFunction


def _step_cell_integral(partition: Partition, g: StepFunction, j: int, n: int):
    val = g.values.value(j, n)
    w = partition.weight(j, n)
    if is_exact_scalar(val):
        return to_exact(val) * w
    return to_cplx(val) * float(w)


def build_partition(
    f: PiecewiseFunction,
    scan: HalfStripScan,
    chain_count: int,
    cell_measure,
    schedule: str = SCHEDULE_CONSTANT,
) -> Partition:
    """Split the space into chains of cells around the captured set.

    The uncaptured part must consist of finitely many atoms/segments,
    one per chain at most; every chain's cell 0 is either one such slab
    or a leading captured slab of the full cell measure.  Captured
    material is then consumed left to right into cell_measure slabs,
    round-robin across chains, materialised explicitly until the stream
    leaves the finite pieces and analytic from there on.
    """
    if scan.captured_measure is not math.inf:
        raise ConstructionError("the scan did not capture infinite measure")
    if schedule not in (SCHEDULE_CONSTANT, SCHEDULE_DOUBLING):
        raise ConstructionError(f"unknown schedule {schedule!r}")
    if chain_count < 1:
        raise ConstructionError("need at least one chain")
    z0 = scan.z0
    sp = f.space
    cm = _frac(cell_measure)
    if cm <= 0:
        raise MisalignedCellMeasure("cell_measure must be positive")

    captured_fin = []
    complement = []
    for i, (w, val) in enumerate(zip(sp.atom_weights, f.atom_values)):
        piece = Piece(("atom", i), None, None, w)
        (captured_fin if _captured(val, z0) else complement).append(piece)
    for i, ((lo, hi), val) in enumerate(zip(sp.segments, f.segment_values)):
        piece = Piece(("segment", i), lo, hi, hi - lo)
        (captured_fin if _captured(val, z0) else complement).append(piece)
    captured_elems = []
    if sp.motif is not None:
        for e, ((lo, hi), val) in enumerate(zip(sp.motif.pattern, f.motif_values)):
            if _captured(val, z0):
                captured_elems.append((e, lo, hi))
            elif hi > lo:
                raise ComplementTooLarge(
                    "the complement recurs in the motif, so it has infinite "
                    "measure and would need one chain per slab forever"
                )
    q = sum((hi - lo for _, lo, hi in captured_elems), Fraction(0))
    if q <= 0:
        raise ConstructionError("captured stream carries no motif measure")
    if cm % q != 0:
        raise MisalignedCellMeasure(
            f"cell_measure {cm} is not an integer multiple of the captured "
            f"measure per period {q}"
        )
    if len(complement) > chain_count:
        raise ComplementTooLarge(
            f"{len(complement)} complement slabs need as many chains, "
            f"got {chain_count}"
        )
    for piece in complement:
        if piece.measure > cm:
            raise ComplementTooLarge(
                f"complement slab of measure {piece.measure} exceeds the "
                f"cell measure {cm}, breaking weight monotonicity"
            )
    fin_total = sum((p.measure for p in captured_fin), Fraction(0))
    if schedule == SCHEDULE_DOUBLING and fin_total % q != 0:
        raise MisalignedCellMeasure(
            "the doubling schedule needs the finite captured measure to be "
            "a whole number of motif periods"
        )

    cursor = _StreamCursor(captured_fin, sp.motif, captured_elems)
    cells = [[] for _ in range(chain_count)]
    weights = [[] for _ in range(chain_count)]
    for j in range(chain_count):
        if j < len(complement):
            cells[j].append((complement[j],))
            weights[j].append(complement[j].measure)
        else:
            cells[j].append(tuple(cursor.take(cm)))
            weights[j].append(cm)
    leading = cursor.position

    def slab_size(s: int) -> Fraction:
        if schedule == SCHEDULE_CONSTANT:
            return cm
        return cm * 2 ** (s // chain_count)

    def slab_start(s: int) -> Fraction:
        if schedule == SCHEDULE_CONSTANT:
            return leading + s * cm
        r, within = divmod(s, chain_count)
        return leading + cm * (chain_count * (2**r - 1) + within * 2**r)

    s = 0
    while slab_start(s) < fin_total:
        j = s % chain_count
        cells[j].append(tuple(cursor.take(slab_size(s))))
        weights[j].append(slab_size(s))
        s += 1

    part = Partition(
        space=sp,
        f=f,
        z0=z0,
        chain_count=chain_count,
        cell_measure=cm,
        schedule=schedule,
        prefix_cells=tuple(tuple(c) for c in cells),
        prefix_weights=tuple(tuple(w) for w in weights),
        first_analytic=tuple(len(c) for c in cells),
        finite_captured=fin_total,
        leading_measure=leading,
        captured_elems=tuple(captured_elems),
        period_captured=q,
    )
    _validate_partition(part)
    return part


def _validate_partition(part: Partition) -> None:
    """Exhaustive prefix checks + analytic tail checks of the invariants."""
    # (iv) positivity and (iii) monotonicity across prefix and seam
    for j in range(part.chain_count):
        ws = part.prefix_weights[j]
        for w in ws:
            if w <= 0:
                raise ConstructionError(f"chain {j} has a nonpositive cell weight")
        for a, b in zip(ws, ws[1:]):
            if b < a:
                raise ConstructionError(f"chain {j} weights decrease in the prefix")
        seam = part.weight(j, part.first_analytic[j])
        if ws and seam < ws[-1]:
            raise ConstructionError(f"chain {j} weights decrease at the tail seam")
    # (i) prefix cells pairwise disjoint (intervals; atoms by identity)
    intervals = []
    atoms = set()
    for j in range(part.chain_count):
        for cell in part.prefix_cells[j]:
            for p in cell:
                if p.source[0] == "atom":
                    if p.source in atoms:
                        raise ConstructionError("an atom appears in two cells")
                    atoms.add(p.source)
                else:
                    intervals.append((p.lo, p.hi))
    intervals.sort()
    for (alo, ahi), (blo, bhi) in zip(intervals, intervals[1:]):
        if blo < ahi:
            raise ConstructionError("two prefix cells overlap")
    # analytic tail: consecutive slabs tile the stream with no gap
    for s in range(2 * part.chain_count + 2):
        a = part.slab_start(s)
        b = part.slab_start(s + 1)
        size = part.weight(s % part.chain_count, 1 + s // part.chain_count)
        if b - a != size:
            raise ConstructionError("analytic slabs do not tile the stream")


# -- projection / embedding / the base operator -------------------------------


def project_to_cells(partition: Partition, g) -> CellFunction:
    """Average g over every cell: the inverse of the step embedding.

    Motif-periodic functions average to the same value on every analytic
    cell, so the result is an exact prefix + constant tail with no
    representation horizon.
    """
    if isinstance(g, StepFunction):
        if g.partition is not partition:
            raise SpaceError("step function belongs to a different partition")
        chains = []
        for j in range(partition.chain_count):
            cv = g.values.chains[j]
            upto = max(partition.first_analytic[j], len(cv.prefix))
            prefix = tuple(partition.cell_average(g, j, n) for n in range(upto))
            chains.append(ChainValues(prefix, cv.tail))
        return CellFunction(tuple(chains), g.values.valid_below)
    if g.space is not partition.space:
        raise SpaceError("function lives on a different space")
    chains = []
    for j in range(partition.chain_count):
        n0 = partition.first_analytic[j]
        prefix = tuple(partition.cell_average(g, j, n) for n in range(n0))
        tail_val = partition.cell_average(g, j, n0)
        check = partition.cell_average(g, j, n0 + 1)
        if to_cplx(check) != to_cplx(tail_val):
            raise SpaceError(
                "analytic cells do not share an average; the function is "
                "not aligned with the partition tail"
            )
        if not to_exact(tail_val):
            chains.append(ChainValues(prefix, ZERO_TAIL))
        else:
            chains.append(ChainValues(prefix, ValueTail(VALUE_CONSTANT, tail_val)))
    return CellFunction(tuple(chains))


def embed_step(partition: Partition, v: CellFunction) -> StepFunction:
    """The step function equal to v(j, n) everywhere on cell (j, n)."""
    if v.chain_count != partition.chain_count:
        raise SpaceError("cell function and partition disagree on chains")
    return StepFunction(partition, v)


def apply_base_operator(
    partition: Partition, g, min_horizon: int = 0
) -> StepFunction:
    """One application of the signed cell-averaging operator.

    On cell (j, n) the output equals cell_sign(n+1) times the average of
    g over cell (j, n+1); averages are computed by integration over the
    partition's cells, never read off a factor representation, so
    repeated application is an honest base-space iteration.  The output
    carries the same constant-tail validity horizon as the signed shift.
    """
    input_valid = g.values.valid_below if isinstance(g, StepFunction) else None
    chains = []
    horizons = []
    for j in range(partition.chain_count):
        n0 = partition.first_analytic[j]
        # beyond base_len the (unsigned) cell average is the constant
        # analytic-cell average of g along this chain
        if isinstance(g, StepFunction):
            cv = g.values.chains[j]
            base_len = max(n0, len(cv.prefix))
            tail_avg = cv.tail.value
            tail_zero = cv.tail.is_zero()
        else:
            base_len = n0
            tail_avg = partition.cell_average(g, j, n0)
            tail_zero = not to_exact(tail_avg)
        if tail_zero:
            prefix = []
            for n in range(max(base_len - 1, 0)):
                avg = partition.cell_average(g, j, n + 1)
                prefix.append(-avg if cell_sign(n + 1) < 0 else avg)
            chains.append(ChainValues(tuple(prefix), ZERO_TAIL))
            continue
        target = max(base_len - 1, 1, min_horizon)
        materialise = next_power_of_3(target + 1) + 1
        if input_valid is not None:
            materialise = max(min(materialise, input_valid - 1), 0)
        prefix = []
        for n in range(materialise):
            avg = partition.cell_average(g, j, n + 1)
            prefix.append(-avg if cell_sign(n + 1) < 0 else avg)
        chains.append(
            ChainValues(tuple(prefix), ValueTail(VALUE_CONSTANT, tail_avg))
        )
        horizons.append(next_power_of_3(materialise + 1) - 1)
    if input_valid is not None:
        horizons.append(input_valid - 1)
    out = CellFunction(tuple(chains), min(horizons) if horizons else None)
    return StepFunction(partition, out)


def base_norm_L1(partition: Partition, sf: StepFunction):
    """L1 norm of a step function from cell measures; inf for nonzero tails."""
    total = Fraction(0)
    for j in range(partition.chain_count):
        cv = sf.values.chains[j]
        if not cv.tail.is_zero():
            return math.inf
        for n, x in enumerate(cv.prefix):
            m = modulus(x)
            if m:
                total = total + partition.weight(j, n) * m
    return total


def base_norm_Linf(partition: Partition, sf: StepFunction):
    """Essential sup of a step function (every cell has positive measure)."""
    best = Fraction(0)
    for cv in sf.values.chains:
        for x in cv.prefix:
            m = modulus(x)
            if m > best:
                best = m
        if cv.tail.kind == VALUE_CONSTANT:
            m = modulus(cv.tail.value)
            if m > best:
                best = m
    return best


@dataclass(frozen=True)
class FactorizationReport:
    k_max: int
    n_max: int
    checked: int
    failures: tuple  # of (j, n, k, lhs, rhs)
    cesaro_failures: tuple
    passed: bool


def verify_factorization(
    partition: Partition,
    g,
    k_max: int,
    n_max: Optional[int] = None,
    tol: float = 1e-12,
) -> FactorizationReport:
    """Dual-route check that base iteration equals shift conjugation.

    The left route applies the base operator k times, accumulating signs
    step by step and integrating over cells.  The right route projects g
    once and evaluates the closed-form shift iterate.  Both the iterates
    and their running averages must agree cell by cell.
    """
    from .cesaro import cesaro_naive
    from .shift import iterate_value

    if n_max is None:
        n_max = max(partition.first_analytic) + 3
    v = project_to_cells(partition, g)
    horizon = n_max + k_max + 2
    failures = []
    checked = 0
    sums = {
        (j, n): 0j for j in range(partition.chain_count) for n in range(n_max)
    }
    h = g
    for k in range(1, k_max + 1):
        h = apply_base_operator(partition, h, min_horizon=horizon)
        for j in range(partition.chain_count):
            for n in range(n_max):
                lhs = to_cplx(h.values.value(j, n))
                rhs = to_cplx(iterate_value(v, (j, n), k))
                sums[(j, n)] += lhs
                checked += 1
                if abs(lhs - rhs) > tol:
                    failures.append((j, n, k, lhs, rhs))
    cesaro_failures = []
    for j in range(partition.chain_count):
        for n in range(n_max):
            lhs_avg = sums[(j, n)] / k_max
            rhs_avg = to_cplx(cesaro_naive(v, (j, n), k_max))
            if abs(lhs_avg - rhs_avg) > tol:
                cesaro_failures.append((j, n, lhs_avg, rhs_avg))
    return FactorizationReport(
        k_max=k_max,
        n_max=n_max,
        checked=checked,
        failures=tuple(failures),
        cesaro_failures=tuple(cesaro_failures),
        passed=not failures and not cesaro_failures,
    )


# -- serialization ------------------------------------------------------------


def _fmt_q(x: Fraction) -> str:
    return str(Fraction(x))


def _piece_str(p: Piece) -> str:
    if p.source[0] == "atom":
        return f"atom#{p.source[1]}"
    return f"[{_fmt_q(p.lo)},{_fmt_q(p.hi)})"


def partition_to_lines(part: Partition) -> list:
    """Stable text form: chosen direction, prefix cells, tail rules."""
    z = to_cplx(part.z0)
    lines = [
        f"z0,{z.real:.17g},{z.imag:.17g}",
        f"chains,{part.chain_count}",
        f"cell_measure,{_fmt_q(part.cell_measure)}",
        f"schedule,{part.schedule}",
    ]
    for j in range(part.chain_count):
        for n, cell in enumerate(part.prefix_cells[j]):
            pieces = "|".join(_piece_str(p) for p in cell)
            lines.append(
                f"chain,{j},cell,{n},measure,{_fmt_q(part.prefix_weights[j][n])},"
                f"pieces,{pieces}"
            )
        n0 = part.first_analytic[j]
        a, _ = part.cell_window(j, n0)
        lines.append(
            f"chain,{j},tail,from_n,{n0},stream_position,{_fmt_q(a)},"
            f"cell_measure,{_fmt_q(part.cell_measure)},schedule,{part.schedule}"
        )
    return lines
