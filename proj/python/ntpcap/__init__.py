from ._ntpcap import (
    NtpcapError,
    __version__,
    build_corpus,
    capacity_bounds,
    corpus_stats,
    experiment_param_count,
    interpolate,
    param_count,
    rank_agreement,
    run,
    tokenize,
    unique_context_count,
)

__all__ = [
    "NtpcapError",
    "__version__",
    "build_corpus",
    "capacity_bounds",
    "corpus_stats",
    "experiment_param_count",
    "interpolate",
    "param_count",
    "rank_agreement",
    "run",
    "tokenize",
    "unique_context_count",
]
