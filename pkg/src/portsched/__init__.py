"""Time-sliced strategy schedules for algorithm portfolios, built from recorded evaluations."""

from .model import (
    INF,
    EvaluationMatrix,
    Observation,
    ParseError,
    PreSchedule,
    Schedule,
    Slice,
    Status,
    estimate_success_probability,
    load_matrix,
    schedule_success_probability,
    simulate_schedule,
    vbss_times,
)
from .greedy import (
    ExtensionMode,
    Journal,
    RegularizationParams,
    construct_greedy,
    construct_probabilistic,
    order_slices,
    pad_slices,
    replay_journal,
)

__version__ = "0.1.0"
