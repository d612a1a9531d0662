"""Scenario files: flat key=value text with section headers.

A scenario pins down everything a run needs — the space, the function,
checkpoint range, probe parameters, seed, and arithmetic mode — so that
identical files produce byte-identical outputs.  The format is INI as
understood by :mod:`configparser`:

    [space]
    kind = factor            # or: base
    chains = 2

    [chain 0]
    weight_prefix = 1, 2, 4
    weight_tail = constant 4
    value_prefix = 1, 1/2
    value_tail = constant 1

    [run]
    start_cells = 0:1; 1:1
    t_min = 2
    t_max = 8
    z0 = 1
    seed = 7
    exact = false

Base-space scenarios replace the [chain i] sections with [base], [f],
[scan] and [partition] sections; see the shipped scenario files.
Scalars accept integers, p/q rationals, decimals and a+bj complex
literals.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .base import (
    BaseSpace,
    HalfStripScan,
    MotifSpec,
    Partition,
    PiecewiseFunction,
    build_partition,
    choose_z0,
    project_to_cells,
)
from .numeric import parse_scalar
from .space import (
    CellFunction,
    ChainValues,
    ChainWeights,
    FactorSpace,
    TAIL_CONSTANT,
    TAIL_GEOMETRIC,
    VALUE_CONSTANT,
    VALUE_ZERO,
    ValueTail,
    WeightTail,
    ZERO_TAIL,
)


class ScenarioError(ValueError):
    """Unusable scenario file; the message names the section and key."""


def _frac_token(tok: str, where: str) -> Fraction:
    try:
        val = parse_scalar(tok)
    except ValueError as exc:
        raise ScenarioError(f"{where}: bad number {tok!r}") from exc
    if isinstance(val, (int, Fraction)):
        return Fraction(val)
    if isinstance(val, float):
        return Fraction(val)
    raise ScenarioError(f"{where}: expected a real number, got {tok!r}")


def _scalar_list(raw: str, where: str) -> tuple:
    items = [s for s in (t.strip() for t in raw.split(",")) if s]
    try:
        return tuple(parse_scalar(s) for s in items)
    except ValueError as exc:
        raise ScenarioError(f"{where}: bad scalar list {raw!r}") from exc


def _pair_list(raw: str, where: str) -> tuple:
    out = []
    for chunk in (c.strip() for c in raw.split(";")):
        if not chunk:
            continue
        parts = chunk.split(":")
        if len(parts) != 2:
            raise ScenarioError(f"{where}: expected a:b pairs, got {chunk!r}")
        out.append((parts[0].strip(), parts[1].strip()))
    return tuple(out)


def _weight_tail(raw: str, where: str) -> WeightTail:
    parts = raw.split()
    if not parts:
        raise ScenarioError(f"{where}: missing weight tail")
    kind = parts[0].lower()
    if kind == TAIL_CONSTANT and len(parts) == 2:
        return WeightTail(TAIL_CONSTANT, _frac_token(parts[1], where))
    if kind == TAIL_GEOMETRIC and len(parts) == 3:
        return WeightTail(
            TAIL_GEOMETRIC, _frac_token(parts[1], where), _frac_token(parts[2], where)
        )
    raise ScenarioError(
        f"{where}: weight tail must be 'constant B' or 'geometric B R', "
        f"got {raw!r}"
    )


def _value_tail(raw: str, where: str) -> ValueTail:
    parts = raw.split(None, 1)
    if not parts:
        raise ScenarioError(f"{where}: missing value tail")
    kind = parts[0].lower()
    if kind == VALUE_ZERO and len(parts) == 1:
        return ZERO_TAIL
    if kind == VALUE_CONSTANT and len(parts) == 2:
        try:
            return ValueTail(VALUE_CONSTANT, parse_scalar(parts[1]))
        except ValueError as exc:
            raise ScenarioError(f"{where}: bad tail value {parts[1]!r}") from exc
    raise ScenarioError(
        f"{where}: value tail must be 'zero' or 'constant C', got {raw!r}"
    )


@dataclass(frozen=True)
class Scenario:
    """Fully parsed description of one deterministic run."""

    kind: str  # 'factor' | 'base'
    factor_space: Optional[FactorSpace]
    v: Optional[CellFunction]
    base_space: Optional[BaseSpace]
    f: Optional[PiecewiseFunction]
    epsilon: object
    directions: int
    radii: int
    partition_chains: int
    cell_measure: object
    schedule: str
    start_cells: tuple
    t_min: int
    t_max: int
    z0: object
    seed: int
    exact: bool

    def resolve(self):
        """(space, v, z0, partition) with the base reduction performed."""
        if self.kind == "factor":
            return self.factor_space, self.v, self.z0, None
        scan = choose_z0(self.f, self.epsilon, self.directions, self.radii)
        part = build_partition(
            self.f, scan, self.partition_chains, self.cell_measure, self.schedule
        )
        return part.factor_space(), project_to_cells(part, self.f), scan.z0, part

    def build_scan_and_partition(self) -> Partition:
        if self.kind != "base":
            raise ScenarioError("partition construction needs a base scenario")
        scan = choose_z0(self.f, self.epsilon, self.directions, self.radii)
        return build_partition(
            self.f, scan, self.partition_chains, self.cell_measure, self.schedule
        )


def _get(cfg, section: str, key: str, default=None, required: bool = False):
    if cfg.has_option(section, key):
        return cfg.get(section, key)
    if required:
        raise ScenarioError(f"[{section}] {key}: required key is missing")
    return default


def load_scenario_text(text: str) -> Scenario:
    cfg = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        cfg.read_string(text)
    except configparser.Error as exc:
        raise ScenarioError(f"config parse error: {exc}") from exc
    kind = _get(cfg, "space", "kind", required=True).strip().lower()
    if kind not in ("factor", "base"):
        raise ScenarioError(f"[space] kind must be 'factor' or 'base', got {kind!r}")

    factor_space = None
    v = None
    base_space = None
    f = None
    epsilon = parse_scalar(_get(cfg, "scan", "epsilon", "1/2"))
    directions = int(_get(cfg, "scan", "directions", "24"))
    radii = int(_get(cfg, "scan", "radii", "8"))
    partition_chains = int(_get(cfg, "partition", "chains", "1"))
    cell_measure = parse_scalar(_get(cfg, "partition", "cell_measure", "1"))
    schedule = _get(cfg, "partition", "schedule", "constant").strip().lower()

    if kind == "factor":
        chain_count = int(_get(cfg, "space", "chains", required=True))
        if chain_count < 1:
            raise ScenarioError("[space] chains must be >= 1")
        allow_decreasing = (
            _get(cfg, "space", "allow_decreasing_weights", "false").strip().lower()
            == "true"
        )
        weights = []
        values = []
        for j in range(chain_count):
            section = f"chain {j}"
            if not cfg.has_section(section):
                raise ScenarioError(f"missing [{section}] section")
            where = f"[{section}]"
            wp = _scalar_list(_get(cfg, section, "weight_prefix", ""), where)
            wt = _weight_tail(_get(cfg, section, "weight_tail", required=True), where)
            vp = _scalar_list(_get(cfg, section, "value_prefix", ""), where)
            vt = _value_tail(_get(cfg, section, "value_tail", required=True), where)
            weights.append(ChainWeights(wp, wt))
            values.append(ChainValues(vp, vt))
        try:
            factor_space = FactorSpace(
                tuple(weights), require_monotone=not allow_decreasing
            )
        except ValueError as exc:
            raise ScenarioError(f"[space]: {exc}") from exc
        v = CellFunction(tuple(values))
    else:
        where = "[base]"
        atoms = _scalar_list(_get(cfg, "base", "atoms", ""), where)
        seg_pairs = _pair_list(_get(cfg, "base", "segments", ""), where)
        segments = tuple(
            (_frac_token(a, where), _frac_token(b, where)) for a, b in seg_pairs
        )
        motif = None
        if cfg.has_option("base", "motif_period"):
            pat_pairs = _pair_list(
                _get(cfg, "base", "motif_pattern", required=True), where
            )
            motif = MotifSpec(
                start=_frac_token(_get(cfg, "base", "motif_start", "0"), where),
                period=_frac_token(
                    _get(cfg, "base", "motif_period", required=True), where
                ),
                pattern=tuple(
                    (_frac_token(a, where), _frac_token(b, where))
                    for a, b in pat_pairs
                ),
            )
        try:
            base_space = BaseSpace(
                atom_weights=tuple(_frac_token(str(a), where) for a in atoms),
                segments=segments,
                motif=motif,
            )
            f = PiecewiseFunction(
                space=base_space,
                atom_values=_scalar_list(_get(cfg, "f", "atom_values", ""), "[f]"),
                segment_values=_scalar_list(
                    _get(cfg, "f", "segment_values", ""), "[f]"
                ),
                motif_values=_scalar_list(_get(cfg, "f", "motif_values", ""), "[f]"),
            )
        except ValueError as exc:
            raise ScenarioError(f"[base]/[f]: {exc}") from exc

    start_raw = _pair_list(_get(cfg, "run", "start_cells", "0:1"), "[run]")
    start_cells = tuple((int(a), int(b)) for a, b in start_raw)
    t_min = int(_get(cfg, "run", "t_min", "2"))
    t_max = int(_get(cfg, "run", "t_max", "8"))
    z0 = parse_scalar(_get(cfg, "run", "z0", "1"))
    seed = int(_get(cfg, "run", "seed", "0"))
    if not 0 <= seed < 2**64:
        raise ScenarioError("[run] seed must fit in 64 bits")
    exact = _get(cfg, "run", "exact", "false").strip().lower() == "true"

    if t_min > t_max:
        raise ScenarioError("[run] empty checkpoint range (t_min > t_max)")
    for j, n in start_cells:
        if n < 0 or j < 0:
            raise ScenarioError("[run] start cells must be nonnegative")
        if 3**t_min < n + 2:
            raise ScenarioError(
                f"[run] t_min = {t_min} is invalid for start cell n = {n} "
                f"(3**t_min must be >= n + 2)"
            )
    if kind == "factor":
        for j, _ in start_cells:
            if j >= factor_space.chain_count:
                raise ScenarioError(f"[run] start chain {j} does not exist")
    return Scenario(
        kind=kind,
        factor_space=factor_space,
        v=v,
        base_space=base_space,
        f=f,
        epsilon=epsilon,
        directions=directions,
        radii=radii,
        partition_chains=partition_chains,
        cell_measure=cell_measure,
        schedule=schedule,
        start_cells=start_cells,
        t_min=t_min,
        t_max=t_max,
        z0=z0,
        seed=seed,
        exact=exact,
    )


def load_scenario(path) -> Scenario:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc}") from exc
    return load_scenario_text(text)
