"""Probabilistic cross-identification across sky catalogs."""

from ._core import (
    Engine,
    EngineError,
    angular_distance_deg,
    best_position,
    cutoff_radius_arcsec,
    log_bayes_factor,
    logsinh,
    pair_log_bf,
    parse_query,
    write_demo,
    zone_of,
)

__all__ = [
    "Engine",
    "EngineError",
    "angular_distance_deg",
    "best_position",
    "cutoff_radius_arcsec",
    "log_bayes_factor",
    "logsinh",
    "pair_log_bf",
    "parse_query",
    "write_demo",
    "zone_of",
]
