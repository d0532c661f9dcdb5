"""Shopping-aspect mining from query-click logs."""

from ._aspectmine import (
    ConfigError,
    ContractViolation,
    DataError,
    Graph,
    IoError,
    UndefinedMetricError,
    adjusted_rand,
    default_synthetic_spec,
    edge_weight,
    evaluate,
    evaluate_run,
    generate,
    matches_event,
    mine,
    normalize_query,
    sweep,
    version,
)

__version__ = version()

__all__ = [
    "ConfigError",
    "ContractViolation",
    "DataError",
    "Graph",
    "IoError",
    "UndefinedMetricError",
    "adjusted_rand",
    "default_synthetic_spec",
    "edge_weight",
    "evaluate",
    "evaluate_run",
    "generate",
    "matches_event",
    "mine",
    "normalize_query",
    "sweep",
    "version",
]
