"""Signed-shift averages on atomic chain spaces.

The package builds, over any sigma-finite base space with an infinite
half-strip level set, a weight-monotone chain partition and the
L1/Linf-contractive operator whose running averages provably oscillate
between the +-1/9 checkpoints forever; it evaluates those averages
exactly and at scale, and probes how stable the non-averaging behaviour
is under small perturbations in the L1+Linf norm.
"""

from .base import (
    BaseSpace,
    ComplementTooLarge,
    ConstructionError,
    HalfStripScan,
    InfiniteLevelSetRequired,
    MisalignedCellMeasure,
    MotifSpec,
    NoZ0Found,
    Partition,
    Piece,
    PiecewiseFunction,
    StepFunction,
    apply_base_operator,
    base_norm_L1,
    base_norm_Linf,
    build_partition,
    choose_z0,
    embed_step,
    measure_of_halfstrip,
    partition_to_lines,
    project_to_cells,
    verify_factorization,
)
from .cesaro import (
    BoundRow,
    CesaroReport,
    Checkpoint,
    CheckpointError,
    DiameterEstimate,
    NonconvergenceReport,
    boundedness_check,
    cesaro_block,
    cesaro_naive,
    checkpoint_averages,
    checkpoint_set,
    diameter_estimate,
    series_csv_lines,
    verify_nonconvergence_bounds,
)
from .norms import (
    ContractionReport,
    RearrangementProfile,
    SplitResult,
    best_split,
    check_contraction,
    norm_L1,
    norm_L1_plus_Linf,
    norm_Linf,
    optimal_split,
    rearrange,
)
from .numeric import CompensatedSum, ExactComplex, parse_scalar, to_cplx, to_exact
from .residuality import (
    ChainSelection,
    DensityReport,
    FiniteChainReport,
    MarginReport,
    NormTooLarge,
    OpennessReport,
    SplitNotFound,
    density_probe,
    finite_chain_margin_probe,
    margin,
    margin_csv_lines,
    openness_probe,
)
from .scenario import Scenario, ScenarioError, load_scenario, load_scenario_text
from .shift import (
    apply_shift,
    cell_sign,
    floor_log3,
    is_power_of_3,
    iterate_value,
    next_power_of_3,
    sigma,
    sign_flip_count,
)
from .space import (
    CellFunction,
    ChainMismatchError,
    ChainValues,
    ChainWeights,
    FactorSpace,
    SpaceError,
    ValueTail,
    WeightTail,
    cell_value,
    cell_weight,
    combine,
    constant_function,
    function_from_lines,
    function_from_prefixes,
    function_to_lines,
    make_indicator,
    scale,
    space_from_lines,
    space_to_lines,
    zero_function,
)

__version__ = "0.1.0"
