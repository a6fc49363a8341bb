"""pqa: prediction-query answering over a model zoo and data lake."""

from .catalog import (
    Catalog,
    ColumnMeta,
    DatasetProfile,
    ModelCard,
    generate_model_name,
    parse_model_profile,
    render_dataset_profile,
    render_model_profile,
)
from .config import EngineConfig, load_config
from .embedding import HashNgramEncoder, cosine
from .engine import Engine
from .index import EntityRecord, RetrievalHit, VectorIndex
from .orchestrator import Orchestrator, Reply, Session
from .preprocess import Clause, Predicate, apply_filter, parse_filter
from .provider import ColumnSelection, Intent, RuleBasedProvider

__version__ = "0.1.0"

__all__ = [
    "Catalog",
    "Clause",
    "ColumnMeta",
    "ColumnSelection",
    "DatasetProfile",
    "Engine",
    "EngineConfig",
    "EntityRecord",
    "HashNgramEncoder",
    "Intent",
    "ModelCard",
    "Orchestrator",
    "Predicate",
    "Reply",
    "RetrievalHit",
    "RuleBasedProvider",
    "Session",
    "VectorIndex",
    "apply_filter",
    "cosine",
    "generate_model_name",
    "load_config",
    "parse_filter",
    "parse_model_profile",
    "render_dataset_profile",
    "render_model_profile",
    "__version__",
]
