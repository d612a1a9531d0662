"""Running averages of shift iterates, exactly and at scale.

The object of study is

    A_N(v; j, n) = (1/N) * sum_{k=1..N} sigma(n, k) * v(j, n + k),

evaluated two ways: ``cesaro_naive`` walks every term ascending in k
(the slow oracle), while ``cesaro_block`` groups terms by floor_log3 of
the target cell, inside which the sign is constant, and reads each
block's value sum off prefix cumulative sums plus a closed-form tail
count.  Block evaluation costs O(prefix + log N), which is what makes
checkpoints near N = 3**20 routine.

Checkpoints are the indices N = 3**t - n - 1 where the sign blocks
align; the +-1/9 non-convergence certificates and all diameter
estimates are taken there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .numeric import (
    ComplexSum,
    ExactComplex,
    format_real,
    to_cplx,
    to_exact,
)
from .shift import floor_log3, next_power_of_3, sigma
from .space import CellFunction, CellIndex, chain_sup_modulus

#: slack applied to strict-inequality bound checks in float mode
BOUND_SLACK = 1e-12

_EXACT_ZERO = ExactComplex(Fraction(0), Fraction(0))
_HALF = Fraction(1, 2)
_NINTH = Fraction(1, 9)


class CheckpointError(ValueError):
    """Invalid checkpoint range for the requested start cell."""


@dataclass(frozen=True)
class Checkpoint:
    """One average index N = 3**t - n - 1; parity is (t - b) mod 2."""

    t: int
    N: int
    parity: int


@dataclass(frozen=True)
class CesaroReport:
    """Averages at a run of checkpoints for one start cell."""

    start: tuple
    entries: tuple  # of (t, N, value)
    re_over_z0_min: float
    re_over_z0_max: float


@dataclass(frozen=True)
class DiameterEstimate:
    """Max pairwise distance among checkpoint averages at n = 0.

    A certified lower bound for the diameter of the accumulation set;
    never an upper bound, since only finitely many N are inspected.
    """

    chain: int
    value: float
    t_min: int
    t_max: int


def _chain_data(v: CellFunction, j: int, exact: bool):
    """(prefix list, tail value, tail_is_zero) coerced for the mode."""
    if not 0 <= j < v.chain_count:
        raise ValueError(f"chain {j} not in function over {v.chain_count} chains")
    cv = v.chains[j]
    tail_zero = cv.tail.is_zero()
    if exact:
        prefix = [to_exact(x) for x in cv.prefix]
        tail = _EXACT_ZERO if tail_zero else to_exact(cv.tail.value)
    else:
        prefix = [to_cplx(x) for x in cv.prefix]
        tail = 0j if tail_zero else to_cplx(cv.tail.value)
    return prefix, tail, tail_zero


def cesaro_naive(v: CellFunction, idx: CellIndex, N: int, exact: bool = False):
    """Direct evaluation of A_N, term by term ascending in k.

    Float mode lays the signed terms out in ascending order and sums
    them with ``math.fsum``, which is error-free (strictly stronger than
    compensated summation); exact mode sums rational complex values
    outright.  The cumulative sign is tracked through power-of-3
    boundaries, never recomputed per term.
    """
    if N < 1:
        raise ValueError("cesaro_naive needs N >= 1")
    j, n = idx
    prefix, tail, tail_zero = _chain_data(v, j, exact)
    length = len(prefix)
    m = n + 1
    last = n + N
    s = sigma(n, 1)
    if exact:
        total = _EXACT_ZERO
        while m <= last:
            block_end = min(next_power_of_3(m + 1) - 1, last)
            if tail_zero and m >= length:
                break
            for mm in range(m, min(block_end, length - 1) + 1):
                total = total + prefix[mm] if s > 0 else total - prefix[mm]
            if not tail_zero and block_end >= length:
                cnt = block_end - max(m, length) + 1
                term = tail * cnt
                total = total + term if s > 0 else total - term
            m = block_end + 1
            s = -s
        return total / N
    terms = []
    while m <= last:
        block_end = min(next_power_of_3(m + 1) - 1, last)
        if tail_zero and m >= length:
            break
        hi = min(block_end, length - 1)
        if hi >= m:
            seg = prefix[m : hi + 1]
            terms.extend(seg if s > 0 else [-x for x in seg])
        if not tail_zero and block_end >= length:
            t = tail if s > 0 else -tail
            terms.extend([t] * (block_end - max(m, length) + 1))
        m = block_end + 1
        s = -s
    re = math.fsum(x.real for x in terms)
    im = math.fsum(x.imag for x in terms)
    return complex(re, im) / N


def cesaro_block(v: CellFunction, idx: CellIndex, N: int, exact: bool = False):
    """Blockwise evaluation of A_N: O(prefix + log N) arithmetic.

    Terms are grouped by d = floor_log3(n + k); within a block the sign
    is constant, the prefix part comes from cumulative sums and the tail
    part is count * constant.  Block reduction runs in ascending d with
    compensated accumulation, so results are reproducible bit for bit.
    """
    if N < 1:
        raise ValueError("cesaro_block needs N >= 1")
    j, n = idx
    prefix, tail, tail_zero = _chain_data(v, j, exact)
    length = len(prefix)
    zero = _EXACT_ZERO if exact else 0j
    cum = [zero]
    for x in prefix:
        cum.append(cum[-1] + x)

    def range_sum(lo: int, hi: int):
        # sum of v(j, m) over integer m in [lo, hi]
        out = zero
        if lo < length:
            out = out + (cum[min(hi + 1, length)] - cum[lo])
        if not tail_zero and hi >= length:
            cnt = hi - max(lo, length) + 1
            out = out + tail * cnt
        return out

    first = n + 1
    last = n + N
    d_lo = floor_log3(first)
    d_hi = floor_log3(last)
    s = sigma(n, 1)
    p = 3**d_lo
    if exact:
        total = _EXACT_ZERO
        for _ in range(d_lo, d_hi + 1):
            bs = range_sum(max(first, p), min(last, 3 * p - 1))
            total = total + bs if s > 0 else total - bs
            p *= 3
            s = -s
        return total / N
    acc = ComplexSum()
    for _ in range(d_lo, d_hi + 1):
        bs = range_sum(max(first, p), min(last, 3 * p - 1))
        acc.add(bs if s > 0 else -bs)
        p *= 3
        s = -s
    return acc.value() / N


def checkpoint_set(n: int, t_min: int, t_max: int) -> list:
    """Checkpoints N = 3**t - n - 1 for t in [t_min, t_max].

    Parity is tagged relative to b = floor_log3(max(n, 1)): parity 0
    checkpoints carry the lower (-1/9 side) certificate, parity 1 the
    upper one.
    """
    if t_min > t_max:
        raise CheckpointError("empty checkpoint range")
    if 3**t_min < n + 2:
        raise CheckpointError(
            f"3**t_min must be >= n + 2 (got t_min={t_min} for n={n})"
        )
    b = floor_log3(max(n, 1))
    return [
        Checkpoint(t, 3**t - n - 1, (t - b) % 2) for t in range(t_min, t_max + 1)
    ]


def re_over(a, z0, exact: bool):
    """Re(a / z0); exact Fraction in exact mode."""
    if exact:
        return (to_exact(a) / to_exact(z0)).re
    return (to_cplx(a) / to_cplx(z0)).real


def checkpoint_averages(
    v: CellFunction,
    j: int,
    n: int,
    t_min: int,
    t_max: int,
    z0=1,
    exact: bool = False,
) -> CesaroReport:
    """Block-evaluated averages at every checkpoint of the range."""
    entries = []
    ratios = []
    for cp in checkpoint_set(n, t_min, t_max):
        a = cesaro_block(v, (j, n), cp.N, exact=exact)
        entries.append((cp.t, cp.N, a))
        ratios.append(float(re_over(a, z0, exact)))
    return CesaroReport(
        start=(j, n),
        entries=tuple(entries),
        re_over_z0_min=min(ratios),
        re_over_z0_max=max(ratios),
    )


@dataclass(frozen=True)
class BoundRow:
    l: int
    side: str  # 'low' | 'high'
    t: int
    N: int
    value: object
    re_over_z0: object
    ok: bool


@dataclass(frozen=True)
class NonconvergenceReport:
    start: tuple
    rows: tuple
    precondition_violations: tuple
    passed: bool


def verify_nonconvergence_bounds(
    v: CellFunction,
    z0,
    j: int,
    n: int,
    l_max: int,
    exact: bool = False,
) -> NonconvergenceReport:
    """Certify the +-1/9 oscillation of Re(A_N / z0) at checkpoints.

    Requires Re(v(j, m)/z0) in [1/2, 1] for every m >= 1 on the chain
    (checked exactly on the prefix and the tail rule) and n >= 1.  For
    each l in 1..l_max the average at N = 3**(b+2l) - n - 1 must sit at
    or below -1/9 and the one at N = 3**(b+2l+1) - n - 1 at or above
    +1/9, with b = floor_log3(n).
    """
    if not to_exact(z0):
        raise ValueError("z0 must be nonzero")
    if n < 1:
        raise ValueError("bound certificates start from n >= 1")
    if l_max < 1:
        raise ValueError("l_max must be >= 1")
    cv = v.chains[j]
    zx = to_exact(z0)
    violations = []
    for m in range(1, len(cv.prefix)):
        r = (to_exact(cv.prefix[m]) / zx).re
        if not _HALF <= r <= 1:
            violations.append((m, cv.prefix[m]))
    tail_r = (to_exact(cv.tail.value) / zx).re
    if not _HALF <= tail_r <= 1:
        violations.append(("tail", cv.tail.value))
    b = floor_log3(n)
    rows = []
    ok_all = True
    for l in range(1, l_max + 1):
        for side, t in (("low", b + 2 * l), ("high", b + 2 * l + 1)):
            N = 3**t - n - 1
            a = cesaro_block(v, (j, n), N, exact=exact)
            r = re_over(a, z0, exact)
            if exact:
                ok = (r <= -_NINTH) if side == "low" else (r >= _NINTH)
            else:
                ok = (
                    r <= -1 / 9 + BOUND_SLACK
                    if side == "low"
                    else r >= 1 / 9 - BOUND_SLACK
                )
            ok_all = ok_all and ok
            rows.append(BoundRow(l, side, t, N, a, r, ok))
    return NonconvergenceReport(
        start=(j, n),
        rows=tuple(rows),
        precondition_violations=tuple(violations),
        passed=ok_all and not violations,
    )


def diameter_estimate(
    v: CellFunction, j: int, t_min: int = 4, t_max: int = 20, exact: bool = False
) -> DiameterEstimate:
    """Lower bound for the accumulation-set diameter at (j, 0).

    Max pairwise modulus distance among the checkpoint averages; grows
    monotonically with t_max and never overshoots the true diameter
    beyond numeric tolerance.
    """
    values = [
        to_cplx(cesaro_block(v, (j, 0), cp.N, exact=exact))
        for cp in checkpoint_set(0, t_min, t_max)
    ]
    best = 0.0
    for i in range(len(values)):
        for k in range(i + 1, len(values)):
            d = abs(values[i] - values[k])
            if d > best:
                best = d
    return DiameterEstimate(chain=j, value=best, t_min=t_min, t_max=t_max)


def boundedness_check(
    v: CellFunction, idx: CellIndex, N_set: Sequence, exact: bool = False
) -> bool:
    """|A_N| <= sup_m |v(j, m)| for every N in N_set (1e-12 relative slack)."""
    j, _ = idx
    sup = chain_sup_modulus(v, j)
    slack = 0 if exact else BOUND_SLACK * max(1.0, sup)
    for N in N_set:
        a = cesaro_block(v, idx, N, exact=exact)
        if abs(to_cplx(a)) > sup + slack:
            return False
    return True


# -- CSV emission -------------------------------------------------------------

CSV_HEADER = "chain,n,N,re,im,re_over_z0"


def series_csv_lines(
    v: CellFunction,
    j: int,
    n: int,
    t_min: int,
    t_max: int,
    z0=1,
    exact: bool = False,
    header: bool = True,
) -> list:
    """Checkpoint series for one start cell in the stable CSV schema."""
    lines = [CSV_HEADER] if header else []
    for cp in checkpoint_set(n, t_min, t_max):
        a = cesaro_block(v, (j, n), cp.N, exact=exact)
        if exact:
            ax = to_exact(a)
            re_s = format_real(ax.re, True)
            im_s = format_real(ax.im, True)
            ratio = format_real(re_over(a, z0, True), True)
        else:
            ac = to_cplx(a)
            re_s = format_real(ac.real, False)
            im_s = format_real(ac.imag, False)
            ratio = format_real(re_over(a, z0, False), False)
        lines.append(f"{j},{n},{cp.N},{re_s},{im_s},{ratio}")
    return lines
