"""Data lake and model zoo: datasets, model cards, and their profile texts.

Profiles are rendered from deterministic templates (same section structure a
curated card would have) because the profile text is what gets embedded and
retrieved: determinism makes retrieval reproducible and lets profiles be
parsed back for the model/dataset alignment check.

Disk layout under the engine data directory::

    datasets/<name>/raw.csv        original CSV, authoritative
    datasets/<name>/profile.txt    rendered dataset profile
    models/<name>/weights.bin      trained weights (ml_engine format)
    models/<name>/card.json        full card fields
    models/<name>/profile.txt      rendered model profile
    index/models.idx               vector index, one per entity kind
    index/datasets.idx
"""

from __future__ import annotations

import ast
import csv
import hashlib
import io
import json
import re
import threading
from dataclasses import dataclass, field, asdict
from datetime import datetime, timezone
from pathlib import Path

from .embedding import Encoder
from .errors import (
    CsvParseError,
    DuplicateName,
    EmptyDataset,
    ProfileFormatError,
    UnknownDataset,
    UnknownModel,
)
from .index import KIND_DATASET, KIND_MODEL, EntityRecord, VectorIndex

NUMERIC = "numeric"
CATEGORICAL = "categorical"

TASK_REGRESSION = "regression"
TASK_CLASSIFICATION = "binary_classification"
TASK_RECOMMENDATION = "recommendation"

# metric display labels used in rendered profiles, keyed by metric name
_METRIC_LABELS = {
    "mse": "Mean Squared Error (MSE)",
    "r2": "R² Score",
    "accuracy": "Accuracy",
    "precision": "Precision",
    "recall": "Recall",
}
_LABEL_TO_METRIC = {label: key for key, label in _METRIC_LABELS.items()}
_METRIC_ORDER = {
    TASK_REGRESSION: ("mse", "r2"),
    TASK_CLASSIFICATION: ("accuracy", "precision", "recall"),
    TASK_RECOMMENDATION: ("accuracy", "precision", "recall"),
}

_NAME_RE = re.compile(r"^[A-Za-z0-9_\-]+$")


@dataclass(frozen=True)
class ColumnMeta:
    name: str
    dtype: str  # "numeric" | "categorical"
    distinct_hint: int
    # distinct non-empty values, kept for categorical columns only; needed to
    # build one-hot encodings and to resolve filter clauses like "female"
    categories: tuple[str, ...] = ()


@dataclass(frozen=True)
class DatasetProfile:
    name: str
    columns: tuple[ColumnMeta, ...]
    row_count: int
    sample_rows: tuple[tuple[str, ...], ...]
    profile_text: str
    file_path: str


@dataclass
class ModelCard:
    name: str
    dataset_name: str
    task: str
    algorithm: str
    feature_order: tuple[str, ...] = ()
    target: str | None = None
    user_col: str | None = None
    item_col: str | None = None
    metrics: dict[str, float] = field(default_factory=dict)
    limitations: str = ""
    weights_path: str = ""
    created_at: str = ""
    training_rows: int | None = None
    profile_text: str = ""


@dataclass(frozen=True)
class ParsedProfile:
    """Fields recovered from a rendered model profile."""

    name: str
    dataset_name: str
    algorithm: str
    feature_order: tuple[str, ...]
    metrics: dict[str, float]
    user_col: str | None = None
    item_col: str | None = None


def infer_columns(header: list[str], rows: list[list[str]]) -> tuple[ColumnMeta, ...]:
    """Column metadata: numeric iff every non-empty cell parses as a real."""
    metas = []
    for j, name in enumerate(header):
        cells = [row[j] for row in rows]
        non_empty = [c for c in cells if c.strip() != ""]
        numeric = all(_is_real(c) for c in non_empty)
        distinct = sorted(set(non_empty))
        metas.append(
            ColumnMeta(
                name=name,
                dtype=NUMERIC if numeric else CATEGORICAL,
                distinct_hint=len(distinct),
                categories=() if numeric else tuple(distinct),
            )
        )
    return tuple(metas)


def _is_real(cell: str) -> bool:
    try:
        float(cell)
        return True
    except ValueError:
        return False


def parse_csv(text: str) -> tuple[list[str], list[list[str]]]:
    """Header + data rows from RFC-4180-style CSV text; raises on ragged rows."""
    reader = csv.reader(io.StringIO(text))
    try:
        rows = [row for row in reader if row]
    except csv.Error as exc:
        raise CsvParseError(f"malformed CSV: {exc}") from exc
    if not rows:
        raise CsvParseError("missing header row")
    header = [h.strip() for h in rows[0]]
    if any(h == "" for h in header):
        raise CsvParseError("header has empty column names")
    if len(set(header)) != len(header):
        raise CsvParseError("header has duplicate column names")
    data = rows[1:]
    for i, row in enumerate(data, start=2):
        if len(row) != len(header):
            raise CsvParseError(f"row {i} has {len(row)} cells, expected {len(header)}")
    if not data:
        raise EmptyDataset("CSV contains a header but no data rows")
    return header, [[cell.strip() for cell in row] for row in data]


def render_dataset_profile(name: str, columns: tuple[ColumnMeta, ...], sample_rows) -> str:
    col_list = "[" + ", ".join(f"'{c.name}'" for c in columns) + "]"
    sample_lines = "\n".join(", ".join(row) for row in sample_rows)
    domain = name.split("_")[0]
    return (
        f"Dataset Name: {name}\n"
        "\n"
        f"Overview: This dataset contains data structured in several columns: {col_list}. "
        "Below is a sample of the data to provide insight into the typical content and "
        "structure of the dataset:\n"
        f"{sample_lines}\n"
        "\n"
        f"Usage: This dataset is primarily used for building predictive models in the {domain} domain.\n"
    )


_TASK_PHRASES = {
    TASK_REGRESSION: ("predict", "a numerical estimate of"),
    TASK_CLASSIFICATION: ("classify", "the probability of"),
    TASK_RECOMMENDATION: ("recommend items for", "ranked recommendations for"),
}


def render_model_profile(card: ModelCard) -> str:
    if card.task == TASK_RECOMMENDATION:
        overview = (
            f"Model Overview: The {card.name} model is a binary-preference recommendation "
            f"system trained on the {card.dataset_name} dataset"
            + (f" ({card.training_rows} interactions)" if card.training_rows is not None else "")
            + f". It links users in column '{card.user_col}' with items in column "
            f"'{card.item_col}' to score how likely a user is to prefer an item."
        )
        intended = (
            "Intended Use: Suggesting items to known users based on their recorded "
            "interactions; scores rank candidate items."
        )
        features_line = (
            f"- Input Features: User IDs and Item IDs from columns "
            f"'{card.user_col}' and '{card.item_col}'"
        )
        output_line = "- Output: Probability scores indicating user preference"
    else:
        verb, _ = _TASK_PHRASES[card.task]
        overview = (
            f"Model Overview: The {card.name} model is trained on the {card.dataset_name} "
            f"dataset"
            + (f" ({card.training_rows} rows)" if card.training_rows is not None else "")
            + f" to {verb} {card.target} from the recorded input features."
        )
        intended = (
            f"Intended Use: Estimating {card.target} for new records that provide the "
            "same input features; reported test metrics below indicate expected quality."
        )
        features_line = "- Input Features: [" + ", ".join(f"'{f}'" for f in card.feature_order) + "]"
        output_line = f"- Output: Predicted value of {card.target}"

    metric_lines = "\n".join(
        f"- {_METRIC_LABELS[key]}: {card.metrics[key]:.6f}"
        for key in _METRIC_ORDER[card.task]
        if key in card.metrics
    )
    return (
        f"Model Name: {card.name}\n"
        "\n"
        f"Dataset Name: {card.dataset_name}\n"
        "\n"
        f"{overview}\n"
        "\n"
        f"{intended}\n"
        "\n"
        "Technical Details:\n"
        f"- Algorithm Type: {card.algorithm}\n"
        f"{features_line}\n"
        f"{output_line}\n"
        "\n"
        "Model Performance:\n"
        f"{metric_lines}\n"
        "\n"
        f"Limitations: {card.limitations}\n"
    )


_SECTION_HEADERS = (
    "Model Name:",
    "Dataset Name:",
    "Model Overview:",
    "Intended Use:",
    "Technical Details:",
    "Model Performance:",
    "Limitations:",
)


def parse_model_profile(text: str) -> ParsedProfile:
    """Recover card fields from a rendered model profile.

    Tolerates the section value on the same line as the header or on the
    following lines, so externally authored profiles with the same section
    structure parse too.
    """
    sections: dict[str, str] = {}
    current: str | None = None
    buf: list[str] = []
    for line in text.splitlines():
        stripped = line.strip()
        matched = next((h for h in _SECTION_HEADERS if stripped.startswith(h)), None)
        if matched:
            if current is not None:
                sections[current] = "\n".join(buf).strip()
            current = matched
            buf = [stripped[len(matched) :].strip()]
        else:
            buf.append(line)
    if current is not None:
        sections[current] = "\n".join(buf).strip()

    missing = [h for h in _SECTION_HEADERS if h not in sections]
    if missing:
        raise ProfileFormatError(f"profile missing required sections: {missing}")

    name = sections["Model Name:"].splitlines()[0].strip()
    dataset_name = sections["Dataset Name:"].splitlines()[0].strip()

    tech = sections["Technical Details:"]
    algo_match = re.search(r"Algorithm Type:\s*(.+)", tech)
    if not algo_match:
        raise ProfileFormatError("Technical Details lacks an Algorithm Type line")
    algorithm = algo_match.group(1).strip()

    feature_order: tuple[str, ...] = ()
    user_col = item_col = None
    rec_match = re.search(r"Input Features:.*columns\s+'([^']*)'\s+and\s+'([^']*)'", tech)
    list_match = re.search(r"Input Features:\s*(\[[^\]]*\])", tech, re.DOTALL)
    if rec_match:
        user_col, item_col = rec_match.group(1), rec_match.group(2)
    elif list_match:
        try:
            feature_order = tuple(ast.literal_eval(list_match.group(1)))
        except (ValueError, SyntaxError) as exc:
            raise ProfileFormatError(f"bad Input Features list: {exc}") from exc
    else:
        raise ProfileFormatError("Technical Details lacks an Input Features line")

    metrics: dict[str, float] = {}
    for label, value in re.findall(
        r"^\s*-?\s*([^:\n]+):\s*([-+0-9.eE]+)\s*,?\s*$", sections["Model Performance:"], re.MULTILINE
    ):
        key = _LABEL_TO_METRIC.get(label.strip())
        if key:
            metrics[key] = float(value)
    if not metrics:
        raise ProfileFormatError("Model Performance section lists no known metrics")

    return ParsedProfile(
        name=name,
        dataset_name=dataset_name,
        algorithm=algorithm,
        feature_order=feature_order,
        metrics=metrics,
        user_col=user_col,
        item_col=item_col,
    )


def _slug_tokens(text: str) -> list[str]:
    return [t for t in re.split(r"[^a-z0-9]+", text.lower()) if t]


def generate_model_name(task: str, target_or_item: str, existing_names: set[str]) -> str:
    """Filesystem-safe model name, <=30 chars, unique among ``existing_names``.

    Regression/classification names look like ``charges_linear_regression``;
    recommendation names concatenate without separators, like
    ``playlistrecommender``.  Whole trailing target words are dropped before
    characters are, so over-long targets degrade gracefully.
    """
    tokens = _slug_tokens(target_or_item) or ["model"]
    if task == TASK_RECOMMENDATION:
        suffix = "recommender"
        make = lambda toks: "".join(toks) + suffix
    elif task == TASK_CLASSIFICATION:
        suffix = "logistic_classifier"
        make = lambda toks: "_".join(toks + [suffix])
    else:
        suffix = "linear_regression"
        make = lambda toks: "_".join(toks + [suffix])

    name = make(tokens)
    while len(name) > 30 and len(tokens) > 1:
        tokens = tokens[:-1]
        name = make(tokens)
    if len(name) > 30:
        keep = 30 - len(name) + len(tokens[0])
        tokens = [tokens[0][: max(keep, 1)]]
        name = make(tokens)[:30]

    if name not in existing_names:
        return name
    base = name[:26]
    start = int.from_bytes(hashlib.blake2b(base.encode(), digest_size=2).digest(), "little") % 10000
    for probe in range(10000):
        candidate = f"{base}{(start + probe) % 10000:04d}"
        if candidate not in existing_names:
            return candidate
    raise DuplicateName(f"no free name for base {base!r}")


class Catalog:
    """Registered datasets and models plus their vector indices.

    One lock serializes mutations; a dataset/model registration updates the
    in-memory maps, the on-disk files, and the vector index before returning,
    so readers observe either all of a registration or none of it.
    """

    def __init__(self, data_dir: str | Path, encoder: Encoder):
        self.data_dir = Path(data_dir)
        self.encoder = encoder
        self._lock = threading.RLock()
        self._datasets: dict[str, DatasetProfile] = {}
        self._models: dict[str, ModelCard] = {}
        self.dataset_index = VectorIndex(encoder.dimension)
        self.model_index = VectorIndex(encoder.dimension)
        self._load_existing()

    # ------------------------------------------------------------------ paths

    def dataset_dir(self, name: str) -> Path:
        return self.data_dir / "datasets" / name

    def model_dir(self, name: str) -> Path:
        return self.data_dir / "models" / name

    @property
    def _dataset_index_path(self) -> Path:
        return self.data_dir / "index" / "datasets.idx"

    @property
    def _model_index_path(self) -> Path:
        return self.data_dir / "index" / "models.idx"

    # ---------------------------------------------------------------- loading

    def _load_existing(self) -> None:
        ds_root = self.data_dir / "datasets"
        if ds_root.is_dir():
            for sub in sorted(ds_root.iterdir()):
                raw = sub / "raw.csv"
                if raw.is_file():
                    profile = self._build_profile(raw.read_text(encoding="utf-8"), sub.name, raw)
                    self._datasets[profile.name] = profile
                    self._write_text(sub / "profile.txt", profile.profile_text)
        m_root = self.data_dir / "models"
        if m_root.is_dir():
            for sub in sorted(m_root.iterdir()):
                card_file = sub / "card.json"
                if card_file.is_file():
                    raw = json.loads(card_file.read_text(encoding="utf-8"))
                    raw["feature_order"] = tuple(raw.get("feature_order") or ())
                    card = ModelCard(**raw)
                    self._models[card.name] = card
        self.dataset_index = self._load_or_rebuild(self._dataset_index_path, KIND_DATASET)
        self.model_index = self._load_or_rebuild(self._model_index_path, KIND_MODEL)

    def _load_or_rebuild(self, path: Path, kind: str) -> VectorIndex:
        # a stored index from an older encoder dimension is stale: re-embed
        if path.is_file():
            loaded = VectorIndex.load(path)
            if loaded.dimension == self.encoder.dimension:
                return loaded
        self._rebuild_kind_index(kind)
        index = self.dataset_index if kind == KIND_DATASET else self.model_index
        if path.is_file():
            index.save(path)
        return index

    # -------------------------------------------------------------- datasets

    def ingest_dataset(self, csv_text: str, name: str) -> DatasetProfile:
        if not _NAME_RE.match(name or ""):
            raise CsvParseError(f"invalid dataset name {name!r}: use letters, digits, _ or -")
        with self._lock:
            if name in self._datasets:
                raise DuplicateName(f"dataset {name!r} already registered")
            target = self.dataset_dir(name) / "raw.csv"
            profile = self._build_profile(csv_text, name, target)
            self._write_text(target, csv_text)
            self._write_text(self.dataset_dir(name) / "profile.txt", profile.profile_text)
            self._datasets[name] = profile
            self.dataset_index.upsert(
                EntityRecord(name, KIND_DATASET, self.encoder.encode(profile.profile_text), profile.profile_text)
            )
            self.dataset_index.save(self._dataset_index_path)
            return profile

    def ingest_dataset_file(self, path: str | Path, name: str | None = None) -> DatasetProfile:
        path = Path(path)
        return self.ingest_dataset(path.read_text(encoding="utf-8"), name or path.stem)

    def _build_profile(self, csv_text: str, name: str, file_path: Path) -> DatasetProfile:
        header, rows = parse_csv(csv_text)
        columns = infer_columns(header, rows)
        samples = tuple(tuple(row) for row in rows[: min(10, len(rows))])
        text = render_dataset_profile(name, columns, samples)
        return DatasetProfile(
            name=name,
            columns=columns,
            row_count=len(rows),
            sample_rows=samples,
            profile_text=text,
            file_path=str(file_path),
        )

    def get_dataset(self, name: str) -> DatasetProfile:
        with self._lock:
            if name not in self._datasets:
                raise UnknownDataset(f"dataset {name!r} is not registered")
            return self._datasets[name]

    def list_datasets(self) -> list[DatasetProfile]:
        with self._lock:
            return [self._datasets[n] for n in sorted(self._datasets)]

    def dataset_rows(self, name: str) -> list[dict[str, str]]:
        """All data rows of a registered dataset as column-keyed dicts."""
        profile = self.get_dataset(name)
        header, rows = parse_csv(Path(profile.file_path).read_text(encoding="utf-8"))
        return [dict(zip(header, row)) for row in rows]

    # ---------------------------------------------------------------- models

    def register_model(self, card: ModelCard) -> ModelCard:
        with self._lock:
            if card.name in self._models:
                raise DuplicateName(f"model {card.name!r} already registered")
            if card.dataset_name not in self._datasets:
                raise UnknownDataset(f"model references unknown dataset {card.dataset_name!r}")
            self._validate_card(card)
            if not card.created_at:
                card.created_at = datetime.now(timezone.utc).isoformat(timespec="seconds")
            card.profile_text = render_model_profile(card)
            mdir = self.model_dir(card.name)
            self._write_text(mdir / "profile.txt", card.profile_text)
            self._write_text(mdir / "card.json", json.dumps(asdict(card), indent=2, ensure_ascii=False))
            self._models[card.name] = card
            self.model_index.upsert(
                EntityRecord(card.name, KIND_MODEL, self.encoder.encode(card.profile_text), card.profile_text)
            )
            self.model_index.save(self._model_index_path)
            return card

    @staticmethod
    def _validate_card(card: ModelCard) -> None:
        if card.task not in _METRIC_ORDER:
            raise ValueError(f"unknown task {card.task!r}")
        if card.task == TASK_RECOMMENDATION:
            if not (card.user_col and card.item_col):
                raise ValueError("recommendation card needs user_col and item_col")
        else:
            if not card.feature_order:
                raise ValueError("card needs a non-empty feature_order")
            if len(set(card.feature_order)) != len(card.feature_order):
                raise ValueError("feature_order has duplicates")
            if card.target in card.feature_order:
                raise ValueError("target must not appear in feature_order")
        expected = set(_METRIC_ORDER[card.task])
        if set(card.metrics) != expected:
            raise ValueError(f"task {card.task} requires metrics {sorted(expected)}")

    def get_model(self, name: str) -> ModelCard:
        with self._lock:
            if name not in self._models:
                raise UnknownModel(f"model {name!r} is not registered")
            return self._models[name]

    def list_models(self) -> list[ModelCard]:
        with self._lock:
            return [self._models[n] for n in sorted(self._models)]

    def model_names(self) -> set[str]:
        with self._lock:
            return set(self._models)

    # ----------------------------------------------------------------- index

    def rebuild_index(self) -> None:
        """Re-embed every profile and rewrite both index files."""
        with self._lock:
            self._rebuild_kind_index(KIND_DATASET)
            self._rebuild_kind_index(KIND_MODEL)
            self.dataset_index.save(self._dataset_index_path)
            self.model_index.save(self._model_index_path)

    def _rebuild_kind_index(self, kind: str) -> None:
        index = VectorIndex(self.encoder.dimension)
        if kind == KIND_DATASET:
            for profile in self._datasets.values():
                index.upsert(
                    EntityRecord(profile.name, kind, self.encoder.encode(profile.profile_text), profile.profile_text)
                )
            self.dataset_index = index
        else:
            for card in self._models.values():
                index.upsert(
                    EntityRecord(card.name, kind, self.encoder.encode(card.profile_text), card.profile_text)
                )
            self.model_index = index

    @staticmethod
    def _write_text(path: Path, text: str) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
