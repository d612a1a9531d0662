"""Norms on chain functions: L1, sup, and the L1+Linf interpolation norm.

The L1+Linf norm — the infimum of ||v1||_1 + ||v2||_inf over all
splittings v = v1 + v2 — is computed through the decreasing
rearrangement: sort the distinct moduli descending, weight each level
by the total measure attaining it, and integrate the resulting step
profile over the first unit of width.  The infimum definition is kept
alive as a brute-force threshold search and the two are checked against
each other rather than trusted.

Threshold splits clamp the modulus at tau and keep the phase; they
realise the infimum, which the test suite verifies instead of assuming.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .numeric import is_exact_scalar, modulus, to_cplx, to_exact
from .space import (
    CellFunction,
    ChainValues,
    FactorSpace,
    VALUE_CONSTANT,
    ValueTail,
    ZERO_TAIL,
    cell_weight,
    combine,
)
from .shift import apply_shift

CONTRACTION_SLACK = 1e-12


@dataclass(frozen=True)
class RearrangementProfile:
    """Step profile of |v|: (level, width) pairs, levels strictly decreasing.

    Widths are weights summed over the cells attaining a level; a nonzero
    constant value tail contributes the single infinite width.
    """

    steps: tuple  # of (level, width); width may be math.inf

    def total_width(self):
        return sum(w for _, w in self.steps) if self.steps else 0


@dataclass(frozen=True)
class SplitResult:
    tau: object
    w1: CellFunction
    w2: CellFunction
    cost: object  # ||w1||_1 + ||w2||_inf; may be math.inf


def _tail_weight_total_is_infinite(space: FactorSpace, j: int) -> bool:
    # Weight tails are positive and nondecreasing, so their sum always
    # diverges; kept as a function for clarity at call sites.
    return True


def norm_L1(space: FactorSpace, v: CellFunction):
    """Sum of weight * |value| over all cells; math.inf when it diverges."""
    if v.chain_count != space.chain_count:
        raise ValueError("function and space disagree on chain count")
    total = Fraction(0)
    for j in range(space.chain_count):
        cv = v.chains[j]
        if not cv.tail.is_zero() and _tail_weight_total_is_infinite(space, j):
            return math.inf
        for n, x in enumerate(cv.prefix):
            m = modulus(x)
            if m:
                total = total + cell_weight(space, (j, n)) * m
    return total if isinstance(total, Fraction) else float(total)


def norm_Linf(space: FactorSpace, v: CellFunction):
    """Sup of |value| over cells (every cell has positive weight)."""
    if v.chain_count != space.chain_count:
        raise ValueError("function and space disagree on chain count")
    best = Fraction(0)
    for cv in v.chains:
        for x in cv.prefix:
            m = modulus(x)
            if m > best:
                best = m
        if cv.tail.kind == VALUE_CONSTANT:
            m = modulus(cv.tail.value)
            if m > best:
                best = m
    return best


def rearrange(space: FactorSpace, v: CellFunction) -> RearrangementProfile:
    """Decreasing rearrangement of |v| against the cell weights."""
    if v.chain_count != space.chain_count:
        raise ValueError("function and space disagree on chain count")
    widths = {}
    for j in range(space.chain_count):
        cv = v.chains[j]
        for n, x in enumerate(cv.prefix):
            m = modulus(x)
            if m:
                widths[m] = widths.get(m, 0) + cell_weight(space, (j, n))
        if not cv.tail.is_zero():
            m = modulus(cv.tail.value)
            widths[m] = math.inf
    steps = tuple(sorted(widths.items(), key=lambda kv: kv[0], reverse=True))
    return RearrangementProfile(steps)


def norm_L1_plus_Linf(space: FactorSpace, v: CellFunction):
    """Integral of the rearrangement over the first unit of width.

    Exact (Fraction) whenever every modulus and weight involved is
    rational; equals the threshold-split infimum, which the tests verify
    by brute force.
    """
    profile = rearrange(space, v)
    remaining = Fraction(1)
    total = Fraction(0)
    for level, width in profile.steps:
        if remaining <= 0:
            break
        take = remaining if (width is math.inf or width >= remaining) else width
        total = total + level * take
        remaining = remaining - take
    return total


def _clamp_value(x, tau):
    """x clamped to modulus tau, phase preserved; exact where possible."""
    m = modulus(x)
    if m <= tau:
        return x
    if is_exact_scalar(x) and is_exact_scalar(tau):
        xe = to_exact(x)
        if xe.im == 0:
            return to_exact(tau) if xe.re > 0 else -to_exact(tau)
        if xe.re == 0:
            unit = to_exact(tau)
            from .numeric import ExactComplex

            return (
                ExactComplex(0, unit.re) if xe.im > 0 else ExactComplex(0, -unit.re)
            )
    z = to_cplx(x)
    return z * (float(tau) / abs(z))


def optimal_split(space: FactorSpace, w: CellFunction, tau) -> SplitResult:
    """Threshold split at tau: w2 = clamp(w, tau), w1 = w - w2."""
    if tau < 0:
        raise ValueError("tau must be >= 0")
    chains1 = []
    chains2 = []
    for cv in w.chains:
        p2 = tuple(_clamp_value(x, tau) for x in cv.prefix)
        if cv.tail.is_zero():
            t2 = ZERO_TAIL
            t1 = ZERO_TAIL
        else:
            c2 = _clamp_value(cv.tail.value, tau)
            t2 = ValueTail(VALUE_CONSTANT, c2)
            diff = _sub(cv.tail.value, c2)
            t1 = ZERO_TAIL if not to_exact(_as_exactable(diff)) else ValueTail(
                VALUE_CONSTANT, diff
            )
        p1 = tuple(_sub(x, y) for x, y in zip(cv.prefix, p2))
        chains2.append(ChainValues(p2, t2))
        chains1.append(ChainValues(p1, t1))
    w1 = CellFunction(tuple(chains1))
    w2 = CellFunction(tuple(chains2))
    l1 = norm_L1(space, w1)
    linf = norm_Linf(space, w2)
    cost = math.inf if l1 is math.inf else l1 + linf
    return SplitResult(tau, w1, w2, cost)


def _sub(x, y):
    if is_exact_scalar(x) and is_exact_scalar(y):
        return to_exact(x) - to_exact(y)
    return to_cplx(x) - to_cplx(y)


def _as_exactable(x):
    return x if not isinstance(x, complex) else to_exact(x)


def split_grid(space: FactorSpace, w: CellFunction) -> list:
    """Candidate thresholds: 0 plus every distinct modulus of w."""
    taus = {Fraction(0)}
    for cv in w.chains:
        for x in cv.prefix:
            taus.add(modulus(x))
        if not cv.tail.is_zero():
            taus.add(modulus(cv.tail.value))
    return sorted(taus)


def best_split(space: FactorSpace, w: CellFunction) -> SplitResult:
    """Cheapest threshold split over the modulus grid.

    The split cost is piecewise linear and convex in tau with its kinks
    exactly at the moduli, so the grid minimum is the global minimum.
    """
    best = None
    for tau in split_grid(space, w):
        cand = optimal_split(space, w, tau)
        if best is None or cand.cost < best.cost:
            best = cand
    return best


@dataclass(frozen=True)
class ContractionReport:
    operator: str
    samples: int
    worst_l1_ratio: float
    worst_linf_ratio: float
    failures: tuple
    passed: bool


def random_finite_function(
    space: FactorSpace, rng: random.Random, max_len: int = 12
) -> CellFunction:
    """Finite-support function with complex values in the unit box."""
    chains = []
    for _ in range(space.chain_count):
        length = rng.randint(0, max_len)
        prefix = tuple(
            complex(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(length)
        )
        chains.append(ChainValues(prefix, ZERO_TAIL))
    return CellFunction(tuple(chains))


def check_contraction(
    space: FactorSpace,
    operator: str = "shift",
    samples: int = 1000,
    seed: int = 0,
    partition=None,
) -> ContractionReport:
    """Sampled ||op v|| <= ||v|| checks in L1 and sup norm.

    operator 'shift' exercises the signed shift on the given space;
    'base' exercises the base-space operator through a partition (whose
    cell averaging makes the L1 side depend on weight monotonicity in
    exactly the same way).
    """
    rng = random.Random(seed)
    worst_l1 = 0.0
    worst_linf = 0.0
    failures = []
    for i in range(samples):
        v = random_finite_function(space, rng)
        if operator == "shift":
            before_l1 = float(norm_L1(space, v))
            before_inf = float(norm_Linf(space, v))
            out = apply_shift(space, v)
            after_l1 = float(norm_L1(space, out))
            after_inf = float(norm_Linf(space, out))
        elif operator == "base":
            if partition is None:
                raise ValueError("operator 'base' needs a partition")
            from .base import apply_base_operator, base_norm_L1, embed_step

            g = embed_step(partition, v)
            before_l1 = float(base_norm_L1(partition, g))
            before_inf = float(norm_Linf(space, v))
            out_sf = apply_base_operator(partition, g)
            after_l1 = float(base_norm_L1(partition, out_sf))
            after_inf = float(norm_Linf(space, out_sf.values))
        else:
            raise ValueError(f"unknown operator {operator!r}")
        if before_l1 > 0:
            worst_l1 = max(worst_l1, after_l1 / before_l1)
        if before_inf > 0:
            worst_linf = max(worst_linf, after_inf / before_inf)
        if (
            after_l1 > before_l1 * (1 + CONTRACTION_SLACK)
            or after_inf > before_inf * (1 + CONTRACTION_SLACK)
        ):
            failures.append((i, before_l1, after_l1, before_inf, after_inf))
    return ContractionReport(
        operator=operator,
        samples=samples,
        worst_l1_ratio=worst_l1,
        worst_linf_ratio=worst_linf,
        failures=tuple(failures),
        passed=not failures,
    )
