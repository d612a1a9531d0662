"""Named verification suites behind the ``verify`` subcommand.

Each suite is a list of independent check groups; groups may be
evaluated by a thread pool, but results are always assembled in the
fixed submission order and no check prints anything itself, so the
report bytes do not depend on the worker count.  No wall-clock data
ever enters the report for the same reason.
"""

from __future__ import annotations

import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

from .cesaro import (
    boundedness_check,
    cesaro_naive,
    diameter_estimate,
    verify_nonconvergence_bounds,
)
from .norms import (
    best_split,
    check_contraction,
    norm_L1,
    norm_L1_plus_Linf,
    norm_Linf,
    random_finite_function,
)
from .residuality import (
    density_probe,
    finite_chain_margin_probe,
    margin,
    openness_probe,
)
from .scenario import Scenario
from .shift import floor_log3, iterate_value, sign_flip_count, sigma
from .space import (
    CellFunction,
    ChainValues,
    VALUE_CONSTANT,
    ValueTail,
    combine,
    make_indicator,
    scale,
    zero_function,
)

SUITE_NAMES = ("theorem1", "lemmas", "norms", "residuality", "all")

#: checkpoint range used by suite-internal diameter work (fast, stable)
_T_MIN, _T_MAX = 4, 14


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag} {self.name}" + (f"  {self.detail}" if self.detail else "")


def _fmt(x) -> str:
    return f"{float(x):.17g}"


# -- theorem1: oscillation certificates + contraction -------------------------


def _checks_bounds(sc: Scenario, space, v, z0) -> list:
    out = []
    for j, n in sc.start_cells:
        if n < 1:
            out.append(
                CheckResult(
                    f"theorem1.bounds.c{j}.n{n}",
                    True,
                    "start cell n = 0 carries no certificate; skipped",
                )
            )
            continue
        b = floor_log3(n)
        l_max = max((sc.t_max - b - 1) // 2, 1)
        rep = verify_nonconvergence_bounds(v, z0, j, n, l_max, exact=sc.exact)
        out.append(
            CheckResult(
                f"theorem1.precondition.c{j}.n{n}",
                not rep.precondition_violations,
                f"{len(rep.precondition_violations)} cells outside the half-strip",
            )
        )
        for row in rep.rows:
            rel = "<= -1/9" if row.side == "low" else ">= +1/9"
            out.append(
                CheckResult(
                    f"theorem1.bounds.c{j}.n{n}.l{row.l}.{row.side}",
                    row.ok,
                    f"N={row.N} re_over_z0={_fmt(row.re_over_z0)} {rel}",
                )
            )
    return out


def _checks_contraction(sc: Scenario, space, partition) -> list:
    out = []
    rep = check_contraction(space, "shift", samples=1000, seed=sc.seed)
    out.append(
        CheckResult(
            "theorem1.contraction.shift",
            rep.passed,
            f"worst L1 ratio {_fmt(rep.worst_l1_ratio)}, "
            f"worst sup ratio {_fmt(rep.worst_linf_ratio)}",
        )
    )
    if partition is not None:
        rep = check_contraction(
            space, "base", samples=200, seed=sc.seed + 1, partition=partition
        )
        out.append(
            CheckResult(
                "theorem1.contraction.base",
                rep.passed,
                f"worst L1 ratio {_fmt(rep.worst_l1_ratio)}, "
                f"worst sup ratio {_fmt(rep.worst_linf_ratio)}",
            )
        )
    return out


# -- lemmas: shift relation, start-cell independence, boundedness, transfer ---


def _checks_shift_relation(sc: Scenario, space, v) -> list:
    rng = random.Random(sc.seed + 2)
    bad = 0
    total = 0
    for _ in range(200):
        j = rng.randrange(space.chain_count)
        n = rng.randrange(0, 100)
        m = rng.randrange(n + 1, 101)
        k = rng.randrange(1, 1001)
        lhs = iterate_value(v, (j, m), k)
        rhs = iterate_value(v, (j, n), k + m - n)
        if sign_flip_count(n, m - n) & 1:
            rhs = -rhs
        total += 1
        if lhs != rhs:
            bad += 1
    return [
        CheckResult(
            "lemmas.shift_relation",
            bad == 0,
            f"{total - bad}/{total} sampled identities exact",
        )
    ]


def _checks_start_independence(sc: Scenario, space, v) -> list:
    # N * A_N at start m, sign-corrected, equals the window sum at start n.
    out = []
    rng = random.Random(sc.seed + 3)
    bad = 0
    for _ in range(25):
        j = rng.randrange(space.chain_count)
        n = rng.randrange(0, 40)
        m = rng.randrange(n + 1, 61)
        N = rng.randrange(1, 200)
        lhs = cesaro_naive(v, (j, m), N, exact=True) * N
        if sign_flip_count(n, m - n) & 1:
            lhs = -lhs
        rhs = None
        for k in range(1 + m - n, N + m - n + 1):
            term = iterate_value(v, (j, n), k)
            from .numeric import to_exact

            term = to_exact(term)
            rhs = term if rhs is None else rhs + term
        if lhs != rhs:
            bad += 1
    out.append(
        CheckResult(
            "lemmas.start_independence",
            bad == 0,
            f"{25 - bad}/25 exact window identities",
        )
    )
    return out


def _checks_boundedness(sc: Scenario, space, v) -> list:
    rng = random.Random(sc.seed + 4)
    ok = True
    for _ in range(100):
        j = rng.randrange(space.chain_count)
        n = rng.randrange(0, 50)
        N = rng.randrange(1, 100_000)
        if not boundedness_check(v, (j, n), [N]):
            ok = False
    return [CheckResult("lemmas.boundedness", ok, "100 sampled |A_N| <= sup |v|")]


def _checks_diameter_monotone(sc: Scenario, space, v) -> list:
    ok = True
    for j in range(space.chain_count):
        small = diameter_estimate(v, j, _T_MIN, 10).value
        large = diameter_estimate(v, j, _T_MIN, _T_MAX).value
        if small > large + 1e-15:
            ok = False
    return [
        CheckResult(
            "lemmas.diameter_monotone", ok, "estimates never shrink as t_max grows"
        )
    ]


def _checks_factorization(sc: Scenario, partition) -> list:
    from .base import verify_factorization

    rep = verify_factorization(partition, sc.f, k_max=50)
    return [
        CheckResult(
            "lemmas.factorization",
            rep.passed,
            f"{rep.checked} cell/iterate comparisons, "
            f"{len(rep.failures)} mismatches, "
            f"{len(rep.cesaro_failures)} average mismatches",
        )
    ]


# -- norms ---------------------------------------------------------------------


def _checks_norms(sc: Scenario, space, v) -> list:
    out = []
    rng = random.Random(sc.seed + 5)
    worst = 0.0
    for _ in range(30):
        w = random_finite_function(space, rng)
        analytic = float(norm_L1_plus_Linf(space, w))
        brute = float(best_split(space, w).cost)
        worst = max(worst, abs(analytic - brute))
    out.append(
        CheckResult(
            "norms.rearrangement_vs_split",
            worst <= 1e-9,
            f"worst gap {_fmt(worst)} over 30 samples",
        )
    )
    one = make_indicator(space, range(space.chain_count))
    n1 = norm_L1_plus_Linf(space, one)
    out.append(
        CheckResult(
            "norms.indicator_is_one", n1 == 1, f"L1+Linf norm = {_fmt(n1)}"
        )
    )
    tri_ok = True
    hom_ok = True
    for _ in range(30):
        a = random_finite_function(space, rng)
        b = random_finite_function(space, rng)
        na = float(norm_L1_plus_Linf(space, a))
        nb = float(norm_L1_plus_Linf(space, b))
        nsum = float(norm_L1_plus_Linf(space, combine(a, b)))
        if nsum > na + nb + 1e-9:
            tri_ok = False
        c = rng.uniform(-3, 3)
        if abs(float(norm_L1_plus_Linf(space, scale(a, c))) - abs(c) * na) > 1e-9:
            hom_ok = False
    out.append(CheckResult("norms.triangle", tri_ok, "30 sampled pairs"))
    out.append(CheckResult("norms.homogeneity", hom_ok, "30 sampled scalings"))
    dom_ok = True
    for _ in range(30):
        a = random_finite_function(space, rng)
        n_mix = float(norm_L1_plus_Linf(space, a))
        n1a = norm_L1(space, a)
        ninf = float(norm_Linf(space, a))
        if n1a is not None and float(n1a) < 1e30 and n_mix > float(n1a) + 1e-9:
            dom_ok = False
        if n_mix > ninf + 1e-9:
            dom_ok = False
    out.append(
        CheckResult("norms.dominated_by_both", dom_ok, "30 sampled functions")
    )
    return out


# -- residuality ----------------------------------------------------------------


def _checks_residuality(sc: Scenario, space) -> list:
    out = []
    one = make_indicator(space, range(space.chain_count))
    rep = margin(space, one, _T_MIN, _T_MAX)
    per_chain_ok = all(d.value >= 2 / 9 for d in rep.per_chain)
    out.append(
        CheckResult(
            "residuality.indicator_margin",
            per_chain_ok and rep.in_G0,
            f"margin {_fmt(rep.margin)} >= 2/9 on every chain",
        )
    )
    for delta in (1, 0.3, 0.01):
        drep = density_probe(space, zero_function(space), delta, _T_MIN, _T_MAX)
        out.append(
            CheckResult(
                f"residuality.density.delta_{delta}",
                drep.passed and drep.margin_after >= float(delta) / 9 - 1e-9,
                f"margin {_fmt(drep.margin_after)} >= delta/9 = {_fmt(delta / 9)}, "
                f"perturbation norm {_fmt(drep.norm_perturbation)}",
            )
        )
    eps = rep.margin
    rng = random.Random(sc.seed + 6)
    opens_ok = True
    worst_after = float("inf")
    for _ in range(20):
        w = _small_perturbation(space, rng, eps / 3 * 0.8)
        orep = openness_probe(space, one, w, _T_MIN, _T_MAX)
        worst_after = min(worst_after, orep.margin_after)
        if not orep.passed:
            opens_ok = False
    out.append(
        CheckResult(
            "residuality.openness",
            opens_ok,
            f"20 random perturbations, worst margin after {_fmt(worst_after)}",
        )
    )
    frep = finite_chain_margin_probe(space, samples=100, seed=sc.seed + 7)
    out.append(
        CheckResult(
            "residuality.finite_chain_margin",
            frep.passed,
            f"{frep.included} included, {frep.excluded} filtered, "
            f"{len(frep.counterexamples)} counterexamples",
        )
    )
    return out


def _small_perturbation(space, rng: random.Random, target_norm: float) -> CellFunction:
    """Random function rescaled so its L1+Linf norm is exactly target_norm."""
    chains = []
    for _ in range(space.chain_count):
        length = rng.randint(1, 6)
        prefix = tuple(
            complex(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(length)
        )
        if rng.random() < 0.5:
            tail = ValueTail(VALUE_CONSTANT, complex(rng.uniform(-0.2, 0.2), 0))
            chains.append(ChainValues(prefix, tail))
        else:
            from .space import ZERO_TAIL

            chains.append(ChainValues(prefix, ZERO_TAIL))
    w = CellFunction(tuple(chains))
    n = float(norm_L1_plus_Linf(space, w))
    if n == 0:
        return w
    return scale(w, target_norm / n)


# -- suite assembly -------------------------------------------------------------


def suite_groups(sc: Scenario, suite: str, space, v, z0, partition) -> list:
    """Ordered list of zero-argument callables producing check lists."""
    groups = []
    if suite in ("theorem1", "all"):
        groups.append(lambda: _checks_bounds(sc, space, v, z0))
        groups.append(lambda: _checks_contraction(sc, space, partition))
    if suite in ("lemmas", "all"):
        groups.append(lambda: _checks_shift_relation(sc, space, v))
        groups.append(lambda: _checks_start_independence(sc, space, v))
        groups.append(lambda: _checks_boundedness(sc, space, v))
        groups.append(lambda: _checks_diameter_monotone(sc, space, v))
        if partition is not None:
            groups.append(lambda: _checks_factorization(sc, partition))
    if suite in ("norms", "all"):
        groups.append(lambda: _checks_norms(sc, space, v))
    if suite in ("residuality", "all"):
        groups.append(lambda: _checks_residuality(sc, space))
    return groups


def run_suite(sc: Scenario, suite: str, threads: int = 1):
    """(report lines, failed count); the last line is the machine row."""
    if suite not in SUITE_NAMES:
        raise ValueError(f"unknown suite {suite!r}")
    space, v, z0, partition = sc.resolve()
    groups = suite_groups(sc, suite, space, v, z0, partition)
    if threads <= 1:
        results = [g() for g in groups]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda g: g(), groups))
    checks = [c for group in results for c in group]
    lines = [c.line() for c in checks]
    failed = sum(1 for c in checks if not c.passed)
    lines.append(f"{suite},{len(checks)},{len(checks) - failed},{failed}")
    return lines, failed
