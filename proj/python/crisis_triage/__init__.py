"""Crisis-tweet triage toolkit.

Records are plain dicts in the corpus JSONL shape::

    {"id": "1", "text": "...", "created_at": "...", "labels": {"informative": true, "intent": ["need"]}}
"""

from ._core import (
    BackendError,
    DataError,
    Model,
    NormalizationConfig,
    Query,
    QueryError,
    TagMode,
    __version__,
    aggregate_annotations,
    analyze,
    cohens_kappa,
    deduplicate,
    evaluate,
    f1_scores,
    filter_tweets,
    format_percent,
    load_tweets,
    normalize,
    run_experiment,
    save_tweets,
    split,
    tokenize,
    train,
    train_size,
    triage,
)

TASKS = ("informative", "intent", "aid")

__all__ = [
    "BackendError",
    "DataError",
    "Model",
    "NormalizationConfig",
    "Query",
    "QueryError",
    "TagMode",
    "TASKS",
    "__version__",
    "aggregate_annotations",
    "analyze",
    "cohens_kappa",
    "deduplicate",
    "evaluate",
    "f1_scores",
    "filter_tweets",
    "format_percent",
    "load_tweets",
    "normalize",
    "run_experiment",
    "save_tweets",
    "split",
    "tokenize",
    "train",
    "train_size",
    "triage",
]
