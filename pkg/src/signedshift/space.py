"""Atomic chain spaces and the functions living on them.

A space is a finite family of chains; chain ``j`` carries cells
``(j, 0), (j, 1), ...`` each with a positive weight that never
decreases along the chain.  A function assigns every cell a complex
value.  Both are stored as a finite per-chain prefix plus an analytic
tail rule, so objects describe all infinitely many cells without
materialising them: weight tails are constant or geometric, value
tails are zero or constant.

Cell indices are plain ``(chain, n)`` tuples with ``n >= 0`` unbounded;
nothing in this module ever walks a tail cell by cell.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .numeric import (
    ExactComplex,
    is_exact_scalar,
    modulus,
    parse_scalar,
    to_cplx,
    to_exact,
)

ChainId = int
CellIndex = tuple  # (chain, n)


class SpaceError(ValueError):
    """Malformed space or function description."""


class ChainMismatchError(SpaceError):
    """Two objects defined over different chain families were mixed."""


TAIL_CONSTANT = "constant"
TAIL_GEOMETRIC = "geometric"
VALUE_ZERO = "zero"
VALUE_CONSTANT = "constant"


def _positive_weight(x):
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    return float(x)


@dataclass(frozen=True)
class WeightTail:
    """Analytic weight rule for cells beyond the prefix.

    ``constant``: weight(n) = base.  ``geometric``: weight(n) = base *
    ratio**n with the absolute cell index in the exponent, ratio >= 1 so
    the rule is nondecreasing on its own.
    """

    kind: str
    base: object
    ratio: object = None

    def __post_init__(self):
        if self.kind not in (TAIL_CONSTANT, TAIL_GEOMETRIC):
            raise SpaceError(f"unknown weight tail kind {self.kind!r}")
        base = _positive_weight(self.base)
        if not base > 0:
            raise SpaceError("weight tail base must be positive")
        object.__setattr__(self, "base", base)
        if self.kind == TAIL_GEOMETRIC:
            if self.ratio is None:
                raise SpaceError("geometric weight tail needs a ratio")
            ratio = _positive_weight(self.ratio)
            if not ratio >= 1:
                raise SpaceError("geometric ratio must be >= 1")
            object.__setattr__(self, "ratio", ratio)
        elif self.ratio is not None:
            raise SpaceError("constant weight tail takes no ratio")

    def value_at(self, n: int):
        if self.kind == TAIL_CONSTANT:
            return self.base
        return self.base * self.ratio**n


@dataclass(frozen=True)
class ValueTail:
    """Analytic value rule beyond the prefix: identically zero, or constant."""

    kind: str
    value: object = 0

    def __post_init__(self):
        if self.kind not in (VALUE_ZERO, VALUE_CONSTANT):
            raise SpaceError(f"unknown value tail kind {self.kind!r}")
        if self.kind == VALUE_ZERO:
            object.__setattr__(self, "value", 0)

    def is_zero(self) -> bool:
        if self.kind == VALUE_ZERO:
            return True
        return not bool(to_exact(self.value))


ZERO_TAIL = ValueTail(VALUE_ZERO)


@dataclass(frozen=True)
class ChainWeights:
    prefix: tuple
    tail: WeightTail

    def weight(self, n: int):
        if n < len(self.prefix):
            return self.prefix[n]
        return self.tail.value_at(n)


@dataclass(frozen=True)
class FactorSpace:
    """Finitely many chains of weighted cells, weights nondecreasing in n.

    ``require_monotone=False`` skips the monotonicity validation; it
    exists solely so that the contraction checks can exercise their
    negative control on a deliberately broken space.
    """

    chains: tuple
    require_monotone: bool = True

    def __post_init__(self):
        if not self.chains:
            raise SpaceError("a space needs at least one chain")
        norm = []
        for j, cw in enumerate(self.chains):
            prefix = tuple(_positive_weight(w) for w in cw.prefix)
            for w in prefix:
                if not w > 0:
                    raise SpaceError(f"chain {j}: weights must be positive")
            cw = ChainWeights(prefix, cw.tail)
            if self.require_monotone:
                for a, b in zip(prefix, prefix[1:]):
                    if b < a:
                        raise SpaceError(f"chain {j}: prefix weights decrease")
                if prefix:
                    seam = cw.tail.value_at(len(prefix))
                    if seam < prefix[-1]:
                        raise SpaceError(
                            f"chain {j}: tail starts below the prefix "
                            f"({seam} < {prefix[-1]})"
                        )
            norm.append(cw)
        object.__setattr__(self, "chains", tuple(norm))

    @property
    def chain_count(self) -> int:
        return len(self.chains)


def cell_weight(space: FactorSpace, idx: CellIndex):
    """Weight of cell (j, n); exact (Fraction) when the inputs were exact."""
    j, n = idx
    if not 0 <= j < space.chain_count:
        raise ChainMismatchError(f"chain {j} not in space of {space.chain_count}")
    if n < 0:
        raise SpaceError("cell index must be nonnegative")
    return space.chains[j].weight(n)


@dataclass(frozen=True)
class ChainValues:
    prefix: tuple
    tail: ValueTail

    def value(self, n: int):
        if n < len(self.prefix):
            return self.prefix[n]
        return self.tail.value


@dataclass(frozen=True)
class CellFunction:
    """Complex-valued function on the cells of a chain family.

    ``valid_below`` marks functions produced by one-step shift
    application on a nonzero constant tail: the stored representation is
    guaranteed pointwise correct only for n < valid_below (None means
    everywhere).  The closed-form iterate evaluator never sets it.
    """

    chains: tuple
    valid_below: Optional[int] = None

    @property
    def chain_count(self) -> int:
        return len(self.chains)

    def value(self, j: int, n: int):
        return self.chains[j].value(n)


def cell_value(v: CellFunction, idx: CellIndex):
    j, n = idx
    if not 0 <= j < v.chain_count:
        raise ChainMismatchError(f"chain {j} not in function over {v.chain_count}")
    if n < 0:
        raise SpaceError("cell index must be nonnegative")
    return v.chains[j].value(n)


def function_from_prefixes(prefixes: Sequence[Sequence], tails: Sequence[ValueTail]):
    if len(prefixes) != len(tails):
        raise SpaceError("one tail per chain required")
    return CellFunction(
        tuple(ChainValues(tuple(p), t) for p, t in zip(prefixes, tails))
    )


def constant_function(space: FactorSpace, value) -> CellFunction:
    return CellFunction(
        tuple(
            ChainValues((), ValueTail(VALUE_CONSTANT, value))
            for _ in range(space.chain_count)
        )
    )


def zero_function(space: FactorSpace) -> CellFunction:
    return CellFunction(
        tuple(ChainValues((), ZERO_TAIL) for _ in range(space.chain_count))
    )


def make_indicator(space: FactorSpace, chains: Iterable[ChainId]) -> CellFunction:
    """Indicator of a union of whole chains: 1 on them, 0 elsewhere."""
    chosen = set(chains)
    for j in chosen:
        if not 0 <= j < space.chain_count:
            raise ChainMismatchError(f"chain {j} not in space")
    out = []
    for j in range(space.chain_count):
        if j in chosen:
            out.append(ChainValues((), ValueTail(VALUE_CONSTANT, 1)))
        else:
            out.append(ChainValues((), ZERO_TAIL))
    return CellFunction(tuple(out))


def _lin2(a, x, b, y):
    """a*x + b*y, exact when every operand is exact, complex otherwise."""
    if all(is_exact_scalar(s) for s in (a, x, b, y)):
        return to_exact(a) * to_exact(x) + to_exact(b) * to_exact(y)
    return to_cplx(a) * to_cplx(x) + to_cplx(b) * to_cplx(y)


def combine(v: CellFunction, w: CellFunction, a=1, b=1) -> CellFunction:
    """Pointwise a*v + b*w over the same chain family."""
    if v.chain_count != w.chain_count:
        raise ChainMismatchError("combine() needs functions over the same chains")
    out = []
    for cv, cw in zip(v.chains, w.chains):
        length = max(len(cv.prefix), len(cw.prefix))
        prefix = tuple(_lin2(a, cv.value(n), b, cw.value(n)) for n in range(length))
        if cv.tail.kind == VALUE_ZERO and cw.tail.kind == VALUE_ZERO:
            tail = ZERO_TAIL
        else:
            tail = ValueTail(VALUE_CONSTANT, _lin2(a, cv.tail.value, b, cw.tail.value))
        out.append(ChainValues(prefix, tail))
    horizons = [h for h in (v.valid_below, w.valid_below) if h is not None]
    return CellFunction(tuple(out), min(horizons) if horizons else None)


def scale(v: CellFunction, a) -> CellFunction:
    return combine(v, v, a, 0)


def chain_sup_modulus(v: CellFunction, j: ChainId) -> float:
    """sup_n |v(j, n)|; finite by construction."""
    cv = v.chains[j]
    best = 0.0
    for x in cv.prefix:
        m = float(modulus(x))
        if m > best:
            best = m
    if cv.tail.kind == VALUE_CONSTANT:
        m = float(modulus(cv.tail.value))
        if m > best:
            best = m
    return best


# -- line-oriented text form --------------------------------------------------
# One line per chain:  chain,field,...,tail_kind,tail_params...


def _fmt(x) -> str:
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, ExactComplex):
        if x.im == 0:
            return str(x.re)
        sign = "+" if x.im >= 0 else "-"
        return f"{x.re}{sign}{abs(x.im)}j"
    if isinstance(x, complex):
        return repr(x).strip("()")
    return repr(x)


def space_to_lines(space: FactorSpace) -> list:
    lines = []
    for j, cw in enumerate(space.chains):
        fields = [str(j)] + [_fmt(w) for w in cw.prefix] + [cw.tail.kind]
        fields.append(_fmt(cw.tail.base))
        if cw.tail.kind == TAIL_GEOMETRIC:
            fields.append(_fmt(cw.tail.ratio))
        lines.append(",".join(fields))
    return lines


def space_from_lines(lines: Iterable[str], require_monotone: bool = True) -> FactorSpace:
    chains = []
    for expected, raw in enumerate(lines):
        fields = [f for f in (s.strip() for s in raw.split(",")) if f]
        if not fields:
            continue
        if int(fields[0]) != expected:
            raise SpaceError(f"chain lines out of order at {raw!r}")
        kinds = [i for i, f in enumerate(fields) if f in (TAIL_CONSTANT, TAIL_GEOMETRIC)]
        if not kinds:
            raise SpaceError(f"missing weight tail kind in {raw!r}")
        k = kinds[-1]
        prefix = tuple(parse_scalar(f) for f in fields[1:k])
        params = [parse_scalar(f) for f in fields[k + 1 :]]
        if fields[k] == TAIL_CONSTANT:
            tail = WeightTail(TAIL_CONSTANT, params[0])
        else:
            tail = WeightTail(TAIL_GEOMETRIC, params[0], params[1])
        chains.append(ChainWeights(prefix, tail))
    return FactorSpace(tuple(chains), require_monotone=require_monotone)


def function_to_lines(v: CellFunction) -> list:
    lines = []
    for j, cv in enumerate(v.chains):
        fields = [str(j)] + [_fmt(x) for x in cv.prefix] + [cv.tail.kind]
        if cv.tail.kind == VALUE_CONSTANT:
            fields.append(_fmt(cv.tail.value))
        lines.append(",".join(fields))
    return lines


def function_from_lines(lines: Iterable[str]) -> CellFunction:
    chains = []
    for expected, raw in enumerate(lines):
        fields = [f for f in (s.strip() for s in raw.split(",")) if f]
        if not fields:
            continue
        if int(fields[0]) != expected:
            raise SpaceError(f"chain lines out of order at {raw!r}")
        kinds = [i for i, f in enumerate(fields) if f in (VALUE_ZERO, VALUE_CONSTANT)]
        if not kinds:
            raise SpaceError(f"missing value tail kind in {raw!r}")
        k = kinds[-1]
        prefix = tuple(parse_scalar(f) for f in fields[1:k])
        if fields[k] == VALUE_ZERO:
            tail = ZERO_TAIL
        else:
            tail = ValueTail(VALUE_CONSTANT, parse_scalar(fields[k + 1]))
        chains.append(ChainValues(prefix, tail))
    return CellFunction(tuple(chains))
