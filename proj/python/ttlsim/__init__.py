from ._ttlsim import (
    ConfigError,
    InfeasibleError,
    TraceParseError,
    ValidationError,
    audit_rarity,
    che_ttl_for_target,
    gamma_threshold,
    generate_trace,
    simulate,
    solve_full_filter_ttl,
    sweep,
    tune_ttl_bound,
    zipf_oracle,
)

__all__ = [
    "ConfigError",
    "InfeasibleError",
    "TraceParseError",
    "ValidationError",
    "audit_rarity",
    "che_ttl_for_target",
    "gamma_threshold",
    "generate_trace",
    "simulate",
    "solve_full_filter_ttl",
    "sweep",
    "tune_ttl_bound",
    "zipf_oracle",
]
