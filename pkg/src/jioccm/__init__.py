"""Reduced-rank constrained constant modulus beamforming by joint iterative
optimization of a transformation matrix and a reduced-rank filter."""

from .array_model import (
    ArrayConfig,
    SnapshotBlock,
    default_doas,
    generate_block,
    noise_power,
    normalize_steering,
    steering_matrix,
    steering_vector,
)
from .fullrank import FullRankState, ccm_closed_form, ccm_sg_step, cmv_sg_step, fullrank_output, init_fullrank
from .jio import (
    CmSample,
    DegenerateBasisError,
    JioState,
    closed_form_T,
    closed_form_w,
    cm_cost,
    equivalent_filter,
    forward,
    grad_T,
    grad_w,
    gram_schmidt,
    init_state,
    jio_step,
    project,
    update_T,
    update_w,
)
from .metrics import (
    ALGORITHMS,
    Scenario,
    SinrCurve,
    complexity_counts,
    mismatch_experiment,
    output_sinr,
    rank_sweep,
    run_ensemble,
    run_ensembles,
    steady_state_stats,
)

__version__ = "0.1.0"
