"""Power-of-3 sign arithmetic and the signed left shift.

The operator studied by this package sends a chain function v to

    (Sv)(j, n) = cell_sign(n + 1) * v(j, n + 1),

where cell_sign is -1 exactly on the powers of 3 (1, 3, 9, ...; the
convention here is that 3**0 = 1 counts) and +1 elsewhere.  Composing k
steps multiplies v(j, n + k) by the cumulative sign sigma(n, k), which
has the closed form (-1)**(number of powers of 3 in (n, n + k]).

All integer work is exact: power-of-3 boundaries are where signs flip,
and a one-ulp logarithm error would invert the operator, so no floating
point logarithm appears anywhere below.
"""

from __future__ import annotations

from .space import (
    CellFunction,
    CellIndex,
    ChainValues,
    FactorSpace,
    SpaceError,
    VALUE_CONSTANT,
    VALUE_ZERO,
    ValueTail,
    ZERO_TAIL,
    cell_value,
)


def floor_log3(x: int) -> int:
    """Largest t with 3**t <= x, by exact integer accumulation."""
    if x < 1:
        raise ValueError("floor_log3 needs x >= 1")
    t = 0
    p = 3
    while p <= x:
        p *= 3
        t += 1
    return t


def is_power_of_3(m: int) -> bool:
    """True iff m = 3**t for some t >= 0 (so m = 1 qualifies)."""
    if m < 1:
        raise ValueError("is_power_of_3 needs m >= 1")
    while m % 3 == 0:
        m //= 3
    return m == 1


def next_power_of_3(x: int) -> int:
    """Smallest power of 3 that is >= x (>= 1)."""
    p = 1
    while p < x:
        p *= 3
    return p


def cell_sign(n: int) -> int:
    """-1 on cells whose index is a power of 3, +1 elsewhere (incl. n = 0)."""
    if n < 0:
        raise ValueError("cell index must be nonnegative")
    return -1 if n >= 1 and is_power_of_3(n) else 1


def sign_flip_count(n: int, m: int) -> int:
    """Number of powers of 3 in the half-open window (n, n + m].

    Closed form: floor_log3(n+m) - floor_log3(n) for n >= 1; for n = 0
    every power up to m is inside, which is floor_log3(m) + 1.
    """
    if n < 0 or m < 0:
        raise ValueError("sign_flip_count needs nonnegative arguments")
    if m == 0:
        return 0
    if n == 0:
        return floor_log3(m) + 1
    return floor_log3(n + m) - floor_log3(n)


def sigma(n: int, m: int) -> int:
    """Cumulative sign accumulated over m shift steps starting at cell n."""
    return -1 if sign_flip_count(n, m) & 1 else 1


def iterate_value(v: CellFunction, idx: CellIndex, k: int):
    """Value of the k-fold shifted function at (j, n), via the closed form.

    This is the canonical evaluator: O(log(n + k)) arithmetic, exact for
    every index, no representation horizon.
    """
    if k < 1:
        raise ValueError("iterate_value needs k >= 1")
    j, n = idx
    x = cell_value(v, (j, n + k))
    return x if sigma(n, k) > 0 else -x


def _shift_chain(cv: ChainValues, input_valid, min_horizon: int) -> tuple:
    """One chain of the shifted function; returns (ChainValues, valid_below)."""
    length = len(cv.prefix)
    if cv.tail.is_zero():
        prefix = tuple(
            -cv.prefix[n + 1] if cell_sign(n + 1) < 0 else cv.prefix[n + 1]
            for n in range(max(length - 1, 0))
        )
        return ChainValues(prefix, ZERO_TAIL), None
    # Nonzero constant tail: the true image keeps flipping sign at every
    # power of 3, which no finite prefix + constant tail can carry.
    # Materialise strictly past the next power-of-3 boundary so the
    # constant tail is pointwise correct up to the boundary after that,
    # and declare that horizon.
    target = max(length - 1, 1, min_horizon)
    materialise = next_power_of_3(target + 1) + 1
    if input_valid is not None:
        materialise = max(min(materialise, input_valid - 1), 0)
    prefix = []
    for n in range(materialise):
        x = cv.value(n + 1)
        prefix.append(-x if cell_sign(n + 1) < 0 else x)
    valid_below = next_power_of_3(materialise + 1) - 1
    return (
        ChainValues(tuple(prefix), ValueTail(VALUE_CONSTANT, cv.tail.value)),
        valid_below,
    )


def apply_shift(
    space: FactorSpace, v: CellFunction, min_horizon: int = 0
) -> CellFunction:
    """One application of the signed left shift, as a stored function.

    For zero tails the result is exact everywhere.  For nonzero constant
    tails the result carries ``valid_below``: indices at or beyond it
    must be evaluated through :func:`iterate_value` instead.  Passing
    ``min_horizon`` materialises a longer prefix so that the result (and
    hence chained applications, each of which loses one index) stays
    valid at least that far.
    """
    if v.chain_count != space.chain_count:
        raise SpaceError("function does not live over this space")
    chains = []
    horizons = []
    for cv in v.chains:
        shifted, h = _shift_chain(cv, v.valid_below, min_horizon)
        chains.append(shifted)
        if h is not None:
            horizons.append(h)
    if v.valid_below is not None:
        horizons.append(v.valid_below - 1)
    return CellFunction(tuple(chains), min(horizons) if horizons else None)
