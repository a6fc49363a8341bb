"""Trainable models behind the engine: linear regression, logistic
classification, and a user-item preference recommender.

Everything is seeded and single-threaded: the same design matrix, seed, and
hyperparameters always produce bit-identical weights and metrics, which is
what makes on-the-spot training reproducible and testable.
"""

from __future__ import annotations

import io
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .catalog import CATEGORICAL, NUMERIC, ColumnMeta, TASK_CLASSIFICATION, TASK_RECOMMENDATION, TASK_REGRESSION
from .errors import (
    AllRowsDropped,
    ArityMismatch,
    FormatError,
    IoError,
    NonFiniteInput,
    SingleClass,
    SingularSystem,
    TooFewRows,
    UnknownUser,
    VocabTooSmall,
)

KIND_LINEAR = "linear_regression"
KIND_LOGISTIC = "logistic_classifier"
KIND_RECOMMENDER = "recommender"
ALGORITHM_NAMES = (KIND_LINEAR, KIND_LOGISTIC, KIND_RECOMMENDER)

# algorithm label recorded on model cards, keyed by trainer kind
ALGORITHM_LABELS = {
    KIND_LINEAR: "Linear Regression",
    KIND_LOGISTIC: "Logistic Regression",
    KIND_RECOMMENDER: "Mixed Collaborative Filtering with Neural Networks",
}
DEFAULT_ALGORITHM = {
    TASK_REGRESSION: KIND_LINEAR,
    TASK_CLASSIFICATION: KIND_LOGISTIC,
    TASK_RECOMMENDATION: KIND_RECOMMENDER,
}

WEIGHTS_MAGIC = b"PQAWTS1\n"


@dataclass
class TrainConfig:
    seed: int = 42
    test_fraction: float = 0.2
    ridge: float = 1e-8
    learning_rate: float = 0.1
    epochs: int = 500
    embed_dim: int = 16
    rec_learning_rate: float = 0.05
    rec_epochs: int = 20
    batch_size: int = 64

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "test_fraction": self.test_fraction,
            "ridge": self.ridge,
            "learning_rate": self.learning_rate,
            "epochs": self.epochs,
            "embed_dim": self.embed_dim,
            "rec_learning_rate": self.rec_learning_rate,
            "rec_epochs": self.rec_epochs,
            "batch_size": self.batch_size,
        }


@dataclass
class DesignMatrix:
    feature_names: tuple[str, ...]
    rows: np.ndarray  # N x F float64
    target: np.ndarray | None  # N float64, absent for recommendation
    dropped_rows: int = 0


@dataclass
class TrainedModel:
    kind: str
    feature_order: tuple[str, ...] = ()
    # linear/logistic: coef (F) + intercept; logistic also mean/std for scaling
    coef: np.ndarray | None = None
    intercept: float = 0.0
    feature_mean: np.ndarray | None = None
    feature_std: np.ndarray | None = None
    # recommender parameters
    user_vocab: tuple[str, ...] = ()
    item_vocab: tuple[str, ...] = ()
    user_embed: np.ndarray | None = None
    item_embed: np.ndarray | None = None
    interaction_w: np.ndarray | None = None
    interaction_b: float = 0.0
    observed: dict[str, tuple[str, ...]] = field(default_factory=dict)
    train_config: TrainConfig = field(default_factory=TrainConfig)


def encode_feature_names(columns: list[ColumnMeta] | tuple[ColumnMeta, ...]) -> list[str]:
    """Encoded design-matrix column names: numerics as-is (schema order),
    then one one-hot column per categorical value, values sorted ascending."""
    names = [c.name for c in columns if c.dtype == NUMERIC]
    for col in columns:
        if col.dtype == CATEGORICAL:
            names.extend(f"{col.name}_{v}" for v in sorted(col.categories))
    return names


def encode(rows: list[dict[str, str]], columns, selection) -> DesignMatrix:
    """Build the numeric design matrix selected by ``selection``.

    Rows whose required numeric cells do not parse are dropped and counted.
    """
    col_by_name = {c.name: c for c in columns}
    onehot: dict[str, tuple[str, str]] = {}  # encoded name -> (column, value)
    numeric_feats: list[str] = []
    for feat in selection.features:
        if feat in col_by_name and col_by_name[feat].dtype == NUMERIC:
            numeric_feats.append(feat)
            continue
        source = _onehot_source(feat, columns)
        if source is None:
            raise ValueError(f"selected feature {feat!r} matches no dataset column")
        onehot[feat] = source
    target_col = selection.target
    if target_col is not None and target_col not in col_by_name:
        raise ValueError(f"selected target {target_col!r} matches no dataset column")

    data = []
    target = []
    dropped = 0
    for row in rows:
        vec = []
        ok = True
        for feat in selection.features:
            if feat in onehot:
                col, value = onehot[feat]
                vec.append(1.0 if row.get(col, "") == value else 0.0)
            else:
                parsed = _parse_cell(row.get(feat, ""))
                if parsed is None:
                    ok = False
                    break
                vec.append(parsed)
        if ok and target_col is not None:
            parsed = _parse_cell(row.get(target_col, ""))
            if parsed is None:
                ok = False
            else:
                target.append(parsed)
        if ok:
            data.append(vec)
        else:
            dropped += 1
    if not data:
        raise AllRowsDropped("no rows with parseable values for the selected columns")
    return DesignMatrix(
        feature_names=tuple(selection.features),
        rows=np.asarray(data, dtype=np.float64),
        target=np.asarray(target, dtype=np.float64) if target_col is not None else None,
        dropped_rows=dropped,
    )


def _onehot_source(feat: str, columns) -> tuple[str, str] | None:
    """Resolve an encoded name like ``sex_female`` to (column, value)."""
    best = None
    for col in columns:
        if col.dtype == CATEGORICAL and feat.startswith(col.name + "_"):
            value = feat[len(col.name) + 1 :]
            if best is None or len(col.name) > len(best[0]):
                best = (col.name, value)
    return best


def _parse_cell(cell: str) -> float | None:
    try:
        value = float(cell)
    except (TypeError, ValueError):
        return None
    return value if np.isfinite(value) else None


def split_indices(n: int, cfg: TrainConfig) -> tuple[np.ndarray, np.ndarray]:
    """Seeded shuffle split: first ``test_fraction`` of the permutation is test."""
    rng = np.random.default_rng(cfg.seed)
    perm = rng.permutation(n)
    n_test = int(round(n * cfg.test_fraction))
    return perm[n_test:], perm[:n_test]


def train_linear_regression(m: DesignMatrix, cfg: TrainConfig | None = None) -> tuple[TrainedModel, dict[str, float]]:
    cfg = cfg or TrainConfig()
    X, y = m.rows, m.target
    if y is None:
        raise ValueError("design matrix has no target")
    train_idx, test_idx = split_indices(len(X), cfg)
    n_features = X.shape[1]
    if len(train_idx) < n_features + 1:
        raise TooFewRows(f"{len(train_idx)} training rows for {n_features} features")
    Xt = np.hstack([X[train_idx], np.ones((len(train_idx), 1))])
    gram = Xt.T @ Xt + cfg.ridge * np.eye(n_features + 1)
    try:
        w = np.linalg.solve(gram, Xt.T @ y[train_idx])
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(f"normal equations are singular: {exc}") from exc
    if not np.all(np.isfinite(w)):
        raise SingularSystem("normal equations produced non-finite weights")
    model = TrainedModel(
        kind=KIND_LINEAR,
        feature_order=m.feature_names,
        coef=w[:-1],
        intercept=float(w[-1]),
        train_config=cfg,
    )
    y_true = y[test_idx]
    y_hat = X[test_idx] @ model.coef + model.intercept
    return model, {"mse": _mse(y_true, y_hat), "r2": _r2(y_true, y_hat)}


def _mse(y: np.ndarray, y_hat: np.ndarray) -> float:
    return float(np.mean((y - y_hat) ** 2))


def _r2(y: np.ndarray, y_hat: np.ndarray) -> float:
    ss_tot = float(np.sum((y - np.mean(y)) ** 2))
    if ss_tot == 0.0:
        return 0.0  # constant target: coefficient of determination undefined
    return 1.0 - float(np.sum((y - y_hat) ** 2)) / ss_tot


def logistic_loss_grad(w: np.ndarray, X: np.ndarray, y: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean log-loss and its gradient for weights w over [X | 1]."""
    z = X @ w[:-1] + w[-1]
    p = _sigmoid(z)
    eps = 1e-12
    loss = float(-np.mean(y * np.log(p + eps) + (1 - y) * np.log(1 - p + eps)))
    err = p - y
    grad = np.concatenate([X.T @ err, [np.sum(err)]]) / len(y)
    return loss, grad


def _sigmoid(z) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    flat = np.ravel(z)
    out = np.empty_like(flat)
    pos = flat >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-flat[pos]))
    ez = np.exp(flat[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out.reshape(z.shape)


def train_logistic_classifier(m: DesignMatrix, cfg: TrainConfig | None = None) -> tuple[TrainedModel, dict[str, float]]:
    cfg = cfg or TrainConfig()
    X, y = m.rows, m.target
    if y is None:
        raise ValueError("design matrix has no target")
    if not set(np.unique(y)) <= {0.0, 1.0}:
        raise ValueError("logistic training requires a 0/1 target")
    train_idx, test_idx = split_indices(len(X), cfg)
    if len(train_idx) < 2:
        raise TooFewRows(f"{len(train_idx)} training rows")
    y_train = y[train_idx]
    if len(np.unique(y_train)) < 2:
        raise SingleClass("training split contains a single class")

    mean = X[train_idx].mean(axis=0)
    std = X[train_idx].std(axis=0)
    std = np.where(std == 0.0, 1.0, std)
    Xs = (X[train_idx] - mean) / std

    w = np.zeros(X.shape[1] + 1)
    for _ in range(cfg.epochs):
        _, grad = logistic_loss_grad(w, Xs, y_train)
        w -= cfg.learning_rate * grad

    model = TrainedModel(
        kind=KIND_LOGISTIC,
        feature_order=m.feature_names,
        coef=w[:-1],
        intercept=float(w[-1]),
        feature_mean=mean,
        feature_std=std,
        train_config=cfg,
    )
    Xs_test = (X[test_idx] - mean) / std
    p = _sigmoid(Xs_test @ model.coef + model.intercept)
    return model, _classification_metrics(y[test_idx], (p >= 0.5).astype(np.float64))


def _classification_metrics(y: np.ndarray, y_hat: np.ndarray) -> dict[str, float]:
    tp = float(np.sum((y_hat == 1) & (y == 1)))
    fp = float(np.sum((y_hat == 1) & (y == 0)))
    fn = float(np.sum((y_hat == 0) & (y == 1)))
    return {
        "accuracy": float(np.mean(y_hat == y)) if len(y) else 0.0,
        "precision": tp / (tp + fp) if (tp + fp) > 0 else 0.0,
        "recall": tp / (tp + fn) if (tp + fn) > 0 else 0.0,
    }


def recommender_score(model: TrainedModel, u_idx: int, i_idx: int) -> float:
    """sigmoid(w . (u * v) + b) for one user/item pair."""
    inter = model.user_embed[u_idx] * model.item_embed[i_idx]
    return float(_sigmoid(inter @ model.interaction_w + model.interaction_b))


def recommender_loss_grad(U, V, w, b, users, items, labels):
    """Summed binary cross-entropy over (user, item, label) samples and its
    gradients w.r.t. the touched embedding rows, w, and b.

    The batch loss is the sum (not mean) of per-sample cross-entropy, so one
    batch update is equivalent to accumulated per-sample SGD steps.
    """
    inter = U[users] * V[items]
    p = _sigmoid(inter @ w + b)
    eps = 1e-12
    loss = float(-np.sum(labels * np.log(p + eps) + (1 - labels) * np.log(1 - p + eps)))
    err = p - labels
    grad_w = inter.T @ err
    grad_b = float(np.sum(err))
    grad_U = np.zeros_like(U)
    grad_V = np.zeros_like(V)
    np.add.at(grad_U, users, err[:, None] * (w[None, :] * V[items]))
    np.add.at(grad_V, items, err[:, None] * (w[None, :] * U[users]))
    return loss, grad_U, grad_V, grad_w, grad_b


def train_recommender(pairs: list[tuple[str, str]], cfg: TrainConfig | None = None) -> tuple[TrainedModel, dict[str, float]]:
    cfg = cfg or TrainConfig()
    users = sorted({str(u) for u, _ in pairs})
    items = sorted({str(i) for _, i in pairs})
    if len(users) < 2 or len(items) < 2:
        raise VocabTooSmall(f"need >= 2 users and items, got {len(users)} users / {len(items)} items")
    u_of = {u: i for i, u in enumerate(users)}
    i_of = {v: i for i, v in enumerate(items)}
    observed: dict[str, set[str]] = {u: set() for u in users}
    for u, v in pairs:
        observed[str(u)].add(str(v))

    rng = np.random.default_rng(cfg.seed)
    samples: list[tuple[int, int, float]] = []
    for u, v in pairs:
        u, v = str(u), str(v)
        samples.append((u_of[u], i_of[v], 1.0))
        unobserved = [it for it in items if it not in observed[u]]
        if unobserved:
            neg = unobserved[int(rng.integers(len(unobserved)))]
            samples.append((u_of[u], i_of[neg], 0.0))

    # 0.3-scale init keeps early interaction scores informative; with tiny
    # init the bilinear gradients vanish and 20 epochs cannot recover
    d = cfg.embed_dim
    U = rng.normal(0.0, 0.3, size=(len(users), d))
    V = rng.normal(0.0, 0.3, size=(len(items), d))
    w = rng.normal(0.0, 0.3, size=d)
    b = 0.0

    n_test = int(round(len(samples) * cfg.test_fraction))
    perm = rng.permutation(len(samples))
    test_idx, train_idx = perm[:n_test], perm[n_test:]
    sample_u = np.asarray([s[0] for s in samples])
    sample_i = np.asarray([s[1] for s in samples])
    sample_y = np.asarray([s[2] for s in samples])

    for _ in range(cfg.rec_epochs):
        order = rng.permutation(train_idx)
        for start in range(0, len(order), cfg.batch_size):
            batch = order[start : start + cfg.batch_size]
            _, grad_U, grad_V, grad_w, grad_b = recommender_loss_grad(
                U, V, w, b, sample_u[batch], sample_i[batch], sample_y[batch]
            )
            U -= cfg.rec_learning_rate * grad_U
            V -= cfg.rec_learning_rate * grad_V
            w -= cfg.rec_learning_rate * grad_w
            b -= cfg.rec_learning_rate * grad_b

    model = TrainedModel(
        kind=KIND_RECOMMENDER,
        user_vocab=tuple(users),
        item_vocab=tuple(items),
        user_embed=U,
        item_embed=V,
        interaction_w=w,
        interaction_b=float(b),
        observed={u: tuple(sorted(v)) for u, v in observed.items()},
        train_config=cfg,
    )
    p_test = _sigmoid((U[sample_u[test_idx]] * V[sample_i[test_idx]]) @ w + b)
    return model, _classification_metrics(sample_y[test_idx], (p_test >= 0.5).astype(np.float64))


def predict(model: TrainedModel, features: list[float]) -> float:
    if model.kind not in (KIND_LINEAR, KIND_LOGISTIC):
        raise ArityMismatch(f"predict() does not apply to {model.kind} models")
    x = np.asarray(features, dtype=np.float64)
    if x.shape != (len(model.feature_order),):
        raise ArityMismatch(f"expected {len(model.feature_order)} features, got {x.shape}")
    if not np.all(np.isfinite(x)):
        raise NonFiniteInput("feature vector contains NaN or infinity")
    if model.kind == KIND_LINEAR:
        return float(x @ model.coef + model.intercept)
    xs = (x - model.feature_mean) / model.feature_std
    return float(_sigmoid(np.asarray(xs @ model.coef + model.intercept)))


def recommend(model: TrainedModel, user_id: str, k: int = 5) -> list[tuple[str, float]]:
    if model.kind != KIND_RECOMMENDER:
        raise ArityMismatch(f"recommend() does not apply to {model.kind} models")
    user_id = str(user_id)
    if user_id not in model.user_vocab:
        raise UnknownUser(f"user {user_id!r} is not in the training vocabulary")
    u_idx = model.user_vocab.index(user_id)
    seen = set(model.observed.get(user_id, ()))
    scored = [
        (item, recommender_score(model, u_idx, i_idx))
        for i_idx, item in enumerate(model.item_vocab)
        if item not in seen
    ]
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    return scored[:k]


# ------------------------------------------------------------------ weights io

def save_weights(model: TrainedModel, path: str | Path) -> None:
    """Versioned binary weights: magic, JSON metadata, float64 LE arrays."""
    arrays: list[tuple[str, np.ndarray]] = []
    for name in ("coef", "feature_mean", "feature_std", "user_embed", "item_embed", "interaction_w"):
        value = getattr(model, name)
        if value is not None:
            arrays.append((name, np.asarray(value, dtype=np.float64)))
    meta = {
        "kind": model.kind,
        "feature_order": list(model.feature_order),
        "intercept": model.intercept,
        "interaction_b": model.interaction_b,
        "user_vocab": list(model.user_vocab),
        "item_vocab": list(model.item_vocab),
        "observed": {u: list(v) for u, v in model.observed.items()},
        "train_config": model.train_config.to_dict(),
        "arrays": [{"name": name, "shape": list(arr.shape)} for name, arr in arrays],
    }
    meta_bytes = json.dumps(meta, ensure_ascii=False).encode("utf-8")
    buf = io.BytesIO()
    buf.write(WEIGHTS_MAGIC)
    buf.write(struct.pack("<I", len(meta_bytes)))
    buf.write(meta_bytes)
    for _, arr in arrays:
        buf.write(arr.astype("<f8").tobytes())
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(buf.getvalue())
    except OSError as exc:
        raise IoError(f"cannot write weights file {path}: {exc}") from exc


def load_weights(path: str | Path) -> TrainedModel:
    path = Path(path)
    try:
        blob = path.read_bytes()
    except OSError as exc:
        raise IoError(f"cannot read weights file {path}: {exc}") from exc
    if not blob.startswith(WEIGHTS_MAGIC):
        raise FormatError(f"{path}: bad weights magic")
    offset = len(WEIGHTS_MAGIC)
    if len(blob) < offset + 4:
        raise FormatError(f"{path}: truncated header")
    (meta_len,) = struct.unpack_from("<I", blob, offset)
    offset += 4
    if len(blob) < offset + meta_len:
        raise FormatError(f"{path}: truncated metadata")
    try:
        meta = json.loads(blob[offset : offset + meta_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: bad metadata: {exc}") from exc
    offset += meta_len
    fields: dict = {
        "kind": meta["kind"],
        "feature_order": tuple(meta["feature_order"]),
        "intercept": float(meta["intercept"]),
        "interaction_b": float(meta["interaction_b"]),
        "user_vocab": tuple(meta["user_vocab"]),
        "item_vocab": tuple(meta["item_vocab"]),
        "observed": {u: tuple(v) for u, v in meta["observed"].items()},
        "train_config": TrainConfig(**meta["train_config"]),
    }
    for entry in meta["arrays"]:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        nbytes = count * 8
        if len(blob) < offset + nbytes:
            raise FormatError(f"{path}: truncated array {entry['name']}")
        arr = np.frombuffer(blob[offset : offset + nbytes], dtype="<f8").reshape(shape).copy()
        fields[entry["name"]] = arr
        offset += nbytes
    return TrainedModel(**fields)
