"""Early-stopping online indicators and their evaluation against an oracle.

The package works on epoch-indexed error curves (:class:`ErrorCurve`). It
provides the classical stopping rules (generalization loss, progress,
productivity quotient, uninterrupted progress, high noise ratio, overfitting
gain, maximum epoch count), the correlation-of-indicators rule that stops
when two rules agree within a training strip, the NEMESID score comparing
runs with the oracle stop, grid tuning, and a synthetic curve generator.
"""

from .correlate import (
    DEFAULT_POOL, Coi, ForkReport, coi_fires, coi_series, coi_trace, coi_value,
    fork_check, pearson, rankdata, spearman,
)
from .curves import (
    CurveFormatError, ErrorCurve, HeadSets, dump_curve, error_from_accuracy,
    head_accuracy, load_curve,
)
from .indicators import (
    Gl, Hnr, IndicatorTrace, Mne, Og, Oracle, P, Pq, RunOutcome, Up,
    evaluate_trace, format_indicator, gl_value, hnr_value, og_value, optimal_error,
    oracle_outcome, oracle_stop, p_value, parse_indicator, parse_pool, pq_value,
    run_indicator, stop_epoch, up_fires,
)
from .nemesid import Frame, FrameReport, build_frame, frame_report, mcdb, phi, run_cost
from .synth import CurveModel, SplitMix64, generate
from .tuner import KINDS, TuneGrid, TuneResult, grid_for, tune

__version__ = "0.1.0"
