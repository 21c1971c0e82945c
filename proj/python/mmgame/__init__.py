"""Multi-market minority game simulator."""

from ._core import (
    ConfigError,
    ConfigSyntaxError,
    GameConfig,
    InitKind,
    PayoffKind,
    TickRecord,
    TieBreak,
    ZeroDemandRule,
    __version__,
    content_hash,
    detect_split,
    emit_records,
    ensemble_run,
    estimate_critical_q,
    figure_dataset,
    figure_names,
    mu_histogram,
    parse_config,
    parse_records,
    predicted_irregular,
    predicted_occupancies,
    q_sweep,
    relaxation_time,
    run,
    series_stats,
)

__all__ = [
    "ConfigError",
    "ConfigSyntaxError",
    "GameConfig",
    "InitKind",
    "PayoffKind",
    "TickRecord",
    "TieBreak",
    "ZeroDemandRule",
    "__version__",
    "content_hash",
    "detect_split",
    "emit_records",
    "ensemble_run",
    "estimate_critical_q",
    "figure_dataset",
    "figure_names",
    "mu_histogram",
    "parse_config",
    "parse_records",
    "predicted_irregular",
    "predicted_occupancies",
    "q_sweep",
    "relaxation_time",
    "run",
    "series_stats",
]
