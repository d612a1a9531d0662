"""Perturbation probes around the set of uniformly non-averaging functions.

The set of interest is G0 = {v : every chain's accumulation-set
diameter at cell 0 is bounded away from zero}.  Two quantitative facts
make it large, and both are checked here numerically rather than taken
on faith:

* openness — perturbing v0 by any w of small L1+Linf norm cannot
  destroy the margin: split w into a small-L1 part (whose running
  averages die out) and a small-sup part (which moves every average by
  less than its sup), and re-measure;
* density — any v1 with some near-converging chains moves into G0 by
  adding delta times the indicator of exactly those chains, whose own
  diameter is at least 2/9 per chain.

All diameters are checkpoint estimates, i.e. certified lower bounds.
Every inequality the probes assert is a lower-bound statement at the
same checkpoints, so estimates are sound for pass/fail decisions.
"""

from __future__ import annotations

import cmath
import random
from dataclasses import dataclass

from .cesaro import diameter_estimate
from .norms import best_split, norm_L1, norm_L1_plus_Linf, norm_Linf
from .space import (
    CellFunction,
    ChainValues,
    FactorSpace,
    VALUE_CONSTANT,
    ValueTail,
    combine,
    make_indicator,
    scale,
)

MARGIN_TOL = 1e-9


class NormTooLarge(ValueError):
    """The perturbation is not small enough for the openness argument."""


class SplitNotFound(ValueError):
    """No threshold on the grid split the perturbation as required."""


@dataclass(frozen=True)
class MarginReport:
    """Per-chain diameter estimates and their minimum."""

    per_chain: tuple  # of DiameterEstimate
    margin: float
    in_G0: bool


def margin(
    space: FactorSpace,
    v: CellFunction,
    t_min: int = 4,
    t_max: int = 20,
    threshold: float = MARGIN_TOL,
) -> MarginReport:
    """Minimum over chains of the checkpoint diameter estimate at n = 0."""
    if v.chain_count != space.chain_count:
        raise ValueError("function and space disagree on chain count")
    per_chain = tuple(
        diameter_estimate(v, j, t_min, t_max) for j in range(space.chain_count)
    )
    m = min(d.value for d in per_chain)
    return MarginReport(per_chain=per_chain, margin=m, in_G0=m > threshold)


@dataclass(frozen=True)
class OpennessReport:
    margin_before: float
    norm_w: float
    tau: object
    norm_w1_l1: float
    norm_w2_sup: float
    w1_vanishes: bool
    w2_diameters: tuple
    margin_after: float
    required: float
    passed: bool


def openness_probe(
    space: FactorSpace,
    v0: CellFunction,
    w: CellFunction,
    t_min: int = 4,
    t_max: int = 20,
    tol: float = MARGIN_TOL,
) -> OpennessReport:
    """Re-run the stability argument on concrete v0 and w.

    Requires margin(v0) = eps > 0 and ||w|| < eps/3 in L1+Linf.  Finds a
    threshold split w = w1 + w2 with ||w1||_1, ||w2||_sup < eps/3,
    certifies that w1 has vanishing chain tails, that each chain's
    diameter estimate for w2 stays below 2*eps/3, and that the margin of
    v0 + w stays above eps/3 - tol.
    """
    m0 = margin(space, v0, t_min, t_max)
    eps = m0.margin
    if eps <= 0:
        raise ValueError("openness needs a positive starting margin")
    nw = float(norm_L1_plus_Linf(space, w))
    if not nw < eps / 3:
        raise NormTooLarge(
            f"||w|| = {nw} is not below margin/3 = {eps / 3}"
        )
    split = best_split(space, w)
    l1 = float(norm_L1(space, split.w1))
    sup = float(norm_Linf(space, split.w2))
    if not (l1 < eps / 3 and sup < eps / 3):
        raise SplitNotFound(
            f"best threshold {split.tau} gives ||w1||_1 = {l1}, "
            f"||w2||_sup = {sup}; both must be below {eps / 3}"
        )
    w1_vanishes = all(cv.tail.is_zero() for cv in split.w1.chains)
    w2_diams = tuple(
        diameter_estimate(split.w2, j, t_min, t_max)
        for j in range(space.chain_count)
    )
    diam_ok = all(d.value <= 2 * eps / 3 + tol for d in w2_diams)
    m1 = margin(space, combine(v0, w), t_min, t_max)
    required = eps / 3 - tol
    passed = w1_vanishes and diam_ok and m1.margin >= required
    return OpennessReport(
        margin_before=eps,
        norm_w=nw,
        tau=split.tau,
        norm_w1_l1=l1,
        norm_w2_sup=sup,
        w1_vanishes=w1_vanishes,
        w2_diameters=w2_diams,
        margin_after=m1.margin,
        required=required,
        passed=passed,
    )


@dataclass(frozen=True)
class ChainSelection:
    """Chains whose diameter estimate sits below delta/9 for a given v1."""

    chains: tuple
    delta: float


@dataclass(frozen=True)
class DensityRow:
    chain: int
    selected: bool
    d_before: float
    d_after: float
    bound: float
    ok: bool


@dataclass(frozen=True)
class DensityReport:
    selection: ChainSelection
    rows: tuple
    margin_after: float
    required: float
    norm_perturbation: object
    vacuous: bool
    passed: bool


def density_probe(
    space: FactorSpace,
    v1: CellFunction,
    delta,
    t_min: int = 4,
    t_max: int = 20,
    tol: float = MARGIN_TOL,
) -> DensityReport:
    """Push v1 into G0 with the explicit indicator perturbation.

    Selects the chains where v1's diameter estimate is below delta/9,
    adds delta times their indicator, and certifies chain by chain that
    the combined diameter clears delta/9 (selected chains ride the
    indicator's 2/9-per-unit oscillation; unselected chains are simply
    unchanged).  The perturbation itself has L1+Linf norm exactly delta,
    so this witnesses G0 inside every ball of radius 2*delta.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    d1 = [
        diameter_estimate(v1, j, t_min, t_max).value
        for j in range(space.chain_count)
    ]
    selected = tuple(j for j, d in enumerate(d1) if d < float(delta) / 9)
    selection = ChainSelection(chains=selected, delta=float(delta))
    if not selected:
        # v1 already clears delta/9 on every chain: nothing to perturb.
        return DensityReport(
            selection=selection,
            rows=(),
            margin_after=min(d1),
            required=float(delta) / 9 - tol,
            norm_perturbation=0,
            vacuous=True,
            passed=True,
        )
    p = scale(make_indicator(space, selected), delta)
    norm_p = norm_L1_plus_Linf(space, p)
    perturbed = combine(v1, p)
    rows = []
    required = float(delta) / 9 - tol
    for j in range(space.chain_count):
        d_after = diameter_estimate(perturbed, j, t_min, t_max).value
        if j in selected:
            # indicator oscillation minus what v1 can cancel at the
            # same checkpoints
            bound = float(delta) * 2 / 9 - d1[j]
            ok = d_after >= bound - tol and bound >= required
        else:
            bound = required
            ok = d_after >= required
        rows.append(DensityRow(j, j in selected, d1[j], d_after, bound, ok))
    margin_after = min(r.d_after for r in rows)
    passed = all(r.ok for r in rows) and margin_after >= required
    return DensityReport(
        selection=selection,
        rows=tuple(rows),
        margin_after=margin_after,
        required=required,
        norm_perturbation=norm_p,
        vacuous=False,
        passed=passed,
    )


@dataclass(frozen=True)
class FiniteChainReport:
    samples: int
    included: int
    excluded: int
    counterexamples: tuple
    passed: bool


def finite_chain_margin_probe(
    space: FactorSpace,
    samples: int = 100,
    seed: int = 0,
    t_min: int = 4,
    t_max: int = 12,
    filter_eps: float = 1e-6,
    min_tail_modulus: float = 0.5,
    candidates=None,
) -> FiniteChainReport:
    """Sampled check that per-chain positivity already gives a margin.

    Over finitely many chains the infimum of positive diameters is
    positive, so any sampled v whose every chain clears the filter must
    have margin > 0.  Candidates failing the per-chain filter (for
    example a vanishing-tail chain whose averages die out) are excluded,
    not failed; genuine counterexamples are reported, never dismissed.
    Explicit ``candidates`` override the generator.
    """
    rng = random.Random(seed)
    if candidates is None:
        candidates = [
            _random_oscillating(space, rng, min_tail_modulus)
            for _ in range(samples)
        ]
    included = 0
    excluded = 0
    counterexamples = []
    for i, v in enumerate(candidates):
        diams = [
            diameter_estimate(v, j, t_min, t_max).value
            for j in range(space.chain_count)
        ]
        if any(d <= filter_eps for d in diams):
            excluded += 1
            continue
        included += 1
        if min(diams) <= 0:
            counterexamples.append((i, diams))
    return FiniteChainReport(
        samples=len(candidates),
        included=included,
        excluded=excluded,
        counterexamples=tuple(counterexamples),
        passed=not counterexamples,
    )


def _random_oscillating(
    space: FactorSpace, rng: random.Random, min_tail_modulus: float
) -> CellFunction:
    """Constant-tail candidate whose every chain keeps oscillating."""
    chains = []
    for _ in range(space.chain_count):
        length = rng.randint(0, 6)
        prefix = tuple(
            complex(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(length)
        )
        mod = rng.uniform(min_tail_modulus, 2.0)
        phase = rng.uniform(0, 2 * cmath.pi)
        tail = ValueTail(VALUE_CONSTANT, mod * cmath.exp(1j * phase))
        chains.append(ChainValues(prefix, tail))
    return CellFunction(tuple(chains))


# -- CSV emission --------------------------------------------------------------


def margin_csv_lines(report: MarginReport) -> list:
    """Per-chain rows plus the summary line the CLI contract promises."""
    lines = ["chain,diameter,t_min,t_max"]
    for d in report.per_chain:
        lines.append(f"{d.chain},{d.value:.17g},{d.t_min},{d.t_max}")
    verdict = "pass" if report.in_G0 else "fail"
    lines.append(f"margin,{report.margin:.17g},{verdict}")
    return lines
