"""Online linear optimization over the unit ball with few hint queries."""

from .core import (
    InvalidCostError,
    InvalidHintError,
    InvalidInputError,
    InvalidParameterError,
    PrefixState,
    ProtocolViolationError,
    RoundRecord,
    ball_regularized_argmin,
    best_fixed_comparator,
    project_to_ball,
    query_cost_of_trace,
    regret_of_trace,
)

__version__ = "0.1.0"
