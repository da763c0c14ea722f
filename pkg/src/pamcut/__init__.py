"""pamcut: Max-Cut via population annealing, with G-set record verification."""

from .codec import CodecError, decode_hex, encode_hex, hex_length, random_config
from .engine import (
    ConfigError,
    EngineConfig,
    Population,
    Replica,
    RunResult,
    anneal,
    choose_delta_beta,
    config_from_text,
    effective_sample_size,
    greedy_descent,
    init_population,
    metropolis_sweep,
    nonlocal_kick,
    resample,
    reweight,
)
from .graph import (
    Graph,
    GraphError,
    GsetParseError,
    as_spins,
    cut_from_energy,
    cut_value,
    flip_delta,
    ising_energy,
    parse_gset,
    serialize_gset,
)
from .records import (
    G63_PRIOR_BEST_CUT,
    G63_RECORD,
    G63_RECORD_HEX,
    SolutionRecord,
    VerificationReport,
    verify_record,
)

__version__ = "0.1.0"

__all__ = [
    "CodecError",
    "ConfigError",
    "EngineConfig",
    "G63_PRIOR_BEST_CUT",
    "G63_RECORD",
    "G63_RECORD_HEX",
    "Graph",
    "GraphError",
    "GsetParseError",
    "Population",
    "Replica",
    "RunResult",
    "SolutionRecord",
    "VerificationReport",
    "anneal",
    "as_spins",
    "choose_delta_beta",
    "config_from_text",
    "cut_from_energy",
    "cut_value",
    "decode_hex",
    "effective_sample_size",
    "encode_hex",
    "flip_delta",
    "greedy_descent",
    "hex_length",
    "init_population",
    "ising_energy",
    "metropolis_sweep",
    "nonlocal_kick",
    "parse_gset",
    "random_config",
    "resample",
    "reweight",
    "serialize_gset",
    "verify_record",
]
