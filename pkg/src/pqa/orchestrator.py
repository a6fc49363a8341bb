"""Chat-session state machine: route a message, retrieve candidates, confirm,
infer, or train on the spot.

Phases: ``await_query`` (nothing pending), ``candidate_shown`` (a model card
or train offer is on the table), ``await_algorithm`` (user asked to train and
must pick an algorithm), ``done`` (answered; a new query restarts the cycle).
Every (phase, intent) pair has exactly one outcome, and failures become
replies with a remediation hint instead of exceptions.
"""

from __future__ import annotations

import uuid
from dataclasses import dataclass, field

from . import ml_engine
from .catalog import (
    Catalog,
    DatasetProfile,
    ModelCard,
    TASK_CLASSIFICATION,
    TASK_RECOMMENDATION,
    TASK_REGRESSION,
    generate_model_name,
)
from .embedding import Encoder, cosine
from .errors import PqaError
from .index import KIND_DATASET, KIND_MODEL, RetrievalHit
from .ml_engine import (
    ALGORITHM_LABELS,
    ALGORITHM_NAMES,
    DEFAULT_ALGORITHM,
    KIND_LINEAR,
    KIND_LOGISTIC,
    KIND_RECOMMENDER,
    TrainConfig,
)
from .preprocess import Predicate, apply_filter, parse_filter
from .provider import Intent

PHASE_AWAIT_QUERY = "await_query"
PHASE_CANDIDATE_SHOWN = "candidate_shown"
PHASE_AWAIT_ALGORITHM = "await_algorithm"
PHASE_DONE = "done"

REPLY_ANSWER = "answer"
REPLY_CANDIDATE_CARD = "candidate_card"
REPLY_TRAIN_OFFER = "train_offer"
REPLY_ALGORITHM_MENU = "algorithm_menu"
REPLY_CLARIFICATION = "clarification"
REPLY_GUIDE = "guide"
REPLY_ERROR = "error"

_ALGORITHM_TASK = {
    KIND_LINEAR: TASK_REGRESSION,
    KIND_LOGISTIC: TASK_CLASSIFICATION,
    KIND_RECOMMENDER: TASK_RECOMMENDATION,
}

GUIDE_TEXT = (
    "Ask a prediction question in plain language, e.g. 'predict insurance charge "
    "for a 19 year old female non-smoker with a BMI of 27.9'. I search the model "
    "zoo and data lake for the best match; reply 'yes' to run the matched model, "
    "'new' to train a fresh one, or name an algorithm when asked. You can restrict "
    "the training data with clauses like 'only consider female data'."
)

CHAT_TEXT = (
    "I answer prediction queries by matching them to stored models and datasets, "
    "running inference, or training a new model on demand. Describe what you want "
    "to predict, or say 'help' for instructions."
)


@dataclass
class Session:
    id: str
    phase: str = PHASE_AWAIT_QUERY
    pending_query: str | None = None
    matched_model: ModelCard | None = None
    matched_dataset: DatasetProfile | None = None
    model_score: float | None = None
    dataset_score: float | None = None
    predicate: Predicate | None = None
    transcript: list[tuple[str, str]] = field(default_factory=list)


@dataclass
class Reply:
    text: str
    kind: str
    payload: dict | None = None


class Orchestrator:
    def __init__(
        self,
        catalog: Catalog,
        provider,
        encoder: Encoder,
        tau_model: float = 0.35,
        tau_dataset: float = 0.20,
        train_config: TrainConfig | None = None,
        recommend_k: int = 5,
    ):
        self.catalog = catalog
        self.provider = provider
        self.encoder = encoder
        self.tau_model = tau_model
        self.tau_dataset = tau_dataset
        self.train_config = train_config or TrainConfig()
        self.recommend_k = recommend_k

    def create_session(self) -> Session:
        return Session(id=uuid.uuid4().hex)

    # ------------------------------------------------------------- messaging

    def handle_message(self, session: Session, text: str) -> Reply:
        session.transcript.append(("user", text))
        try:
            reply = self._route(session, text)
        except PqaError as exc:
            reply = Reply(text=f"{exc.message}", kind=REPLY_ERROR, payload={"code": exc.code})
        session.transcript.append(("system", reply.text))
        return reply

    def _route(self, session: Session, text: str) -> Reply:
        intent = self.provider.classify_intent(text)
        if intent is Intent.GUIDE:
            return Reply(GUIDE_TEXT, REPLY_GUIDE)
        if intent is Intent.CHAT:
            return Reply(CHAT_TEXT, REPLY_CLARIFICATION)
        if intent is Intent.QUERY:
            return self._handle_query(session, text)
        if intent is Intent.CONFIRM:
            if session.phase == PHASE_CANDIDATE_SHOWN and session.matched_model is not None:
                return self._run_inference_reply(session)
            if session.phase == PHASE_CANDIDATE_SHOWN:
                return Reply(
                    "No stored model matched your query; reply 'new' to train one on "
                    f"dataset '{session.matched_dataset.name}'.",
                    REPLY_CLARIFICATION,
                )
            return Reply("There is nothing to confirm yet; send a prediction query first.", REPLY_CLARIFICATION)
        if intent is Intent.CHANGE:
            if session.phase == PHASE_CANDIDATE_SHOWN and session.matched_dataset is not None:
                return self._algorithm_menu(session)
            return Reply(
                "I can only train a new model once a query has matched a dataset.",
                REPLY_CLARIFICATION,
            )
        # selection
        if session.phase == PHASE_AWAIT_ALGORITHM or (
            session.phase == PHASE_CANDIDATE_SHOWN and session.matched_model is None
        ):
            return self._train_and_answer(session, self._algorithm_from(text))
        return Reply(
            "Pick an algorithm only after asking to train a model ('new').",
            REPLY_CLARIFICATION,
        )

    # -------------------------------------------------------------- retrieval

    def retrieve_candidates(
        self, query: str
    ) -> tuple[RetrievalHit | None, RetrievalHit | None, bool]:
        vec = self.encoder.encode(query)
        model_hits = self.catalog.model_index.top_k(vec, KIND_MODEL, 1)
        dataset_hits = self.catalog.dataset_index.top_k(vec, KIND_DATASET, 1)
        model_hit = model_hits[0] if model_hits and model_hits[0].score >= self.tau_model else None
        dataset_hit = (
            dataset_hits[0] if dataset_hits and dataset_hits[0].score >= self.tau_dataset else None
        )
        if model_hit is None:
            return None, dataset_hit, False
        card = self.catalog.get_model(model_hit.id)
        if dataset_hit is not None and dataset_hit.id == card.dataset_name:
            return model_hit, dataset_hit, True
        # the model's own training dataset is authoritative: swap it in
        record = self.catalog.dataset_index.get(card.dataset_name, KIND_DATASET)
        score = cosine(vec, record.embedding) if record is not None else 0.0
        return model_hit, RetrievalHit(card.dataset_name, KIND_DATASET, score), True

    def _handle_query(self, session: Session, text: str) -> Reply:
        session.pending_query = text
        session.matched_model = None
        session.matched_dataset = None
        session.predicate = None
        session.phase = PHASE_AWAIT_QUERY

        model_hit, dataset_hit, aligned = self.retrieve_candidates(text)
        if model_hit is None and dataset_hit is None:
            return Reply(
                "I could not match your query to any stored model or dataset. "
                "Try naming the quantity to predict and the data domain, or ingest a dataset first.",
                REPLY_CLARIFICATION,
            )

        dataset = self.catalog.get_dataset(dataset_hit.id)
        session.matched_dataset = dataset
        session.dataset_score = dataset_hit.score

        if self.provider.needs_preprocessing(text):
            session.predicate = parse_filter(text, dataset.columns)

        if model_hit is not None and aligned:
            card = self.catalog.get_model(model_hit.id)
            session.matched_model = card
            session.model_score = model_hit.score
            session.phase = PHASE_CANDIDATE_SHOWN
            metrics = ", ".join(f"{k}={v:.6f}" for k, v in sorted(card.metrics.items()))
            return Reply(
                f"Matched model '{card.name}' (score {model_hit.score:.3f}) trained on "
                f"dataset '{card.dataset_name}' with {card.algorithm}. Metrics: {metrics}. "
                "Reply 'yes' to run it, or 'new' to train a different model.",
                REPLY_CANDIDATE_CARD,
                payload={
                    "model": card.name,
                    "dataset": card.dataset_name,
                    "algorithm": card.algorithm,
                    "metrics": card.metrics,
                    "score": model_hit.score,
                    "profile_text": card.profile_text,
                },
            )

        session.phase = PHASE_CANDIDATE_SHOWN
        task = self._infer_task(text)
        return Reply(
            f"No stored model answers this query, but dataset '{dataset.name}' matches "
            f"(score {dataset_hit.score:.3f}). Reply 'new' to train a "
            f"{DEFAULT_ALGORITHM[task]} model on it.",
            REPLY_TRAIN_OFFER,
            payload={
                "dataset": dataset.name,
                "dataset_score": dataset_hit.score,
                "default_algorithm": DEFAULT_ALGORITHM[task],
            },
        )

    # -------------------------------------------------------------- inference

    def run_inference(self, session: Session) -> Reply:
        card = session.matched_model
        dataset = session.matched_dataset
        if card is None or dataset is None or card.dataset_name != dataset.name:
            return Reply("No aligned model/dataset pair to run.", REPLY_CLARIFICATION)
        model = ml_engine.load_weights(card.weights_path)
        query = session.pending_query or ""
        if card.task == TASK_RECOMMENDATION:
            user_id = self.provider.extract_user_id(query)
            items = ml_engine.recommend(model, user_id, self.recommend_k)
            listing = ", ".join(f"{item} ({score:.3f})" for item, score in items)
            return Reply(
                f"Top {len(items)} recommendations for user {user_id}: {listing}. "
                f"(model '{card.name}', accuracy {card.metrics.get('accuracy', 0.0):.3f})",
                REPLY_ANSWER,
                payload={
                    "user_id": user_id,
                    "recommendations": [[item, score] for item, score in items],
                    "metrics": card.metrics,
                    "model": card.name,
                },
            )
        values = self.provider.extract_feature_values(query, list(card.feature_order), list(dataset.columns))
        prediction = ml_engine.predict(model, values)
        if card.task == TASK_CLASSIFICATION:
            label = int(prediction >= 0.5)
            text = (
                f"Predicted {card.target}: {label} (probability {prediction:.4f}; "
                f"model '{card.name}', accuracy {card.metrics.get('accuracy', 0.0):.3f})"
            )
            payload = {
                "prediction": prediction,
                "label": label,
                "metrics": card.metrics,
                "model": card.name,
            }
        else:
            text = (
                f"Predicted {card.target}: {prediction:.4f} "
                f"(model '{card.name}', r2 {card.metrics.get('r2', 0.0):.4f})"
            )
            payload = {"prediction": prediction, "metrics": card.metrics, "model": card.name}
        return Reply(text, REPLY_ANSWER, payload=payload)

    def _run_inference_reply(self, session: Session) -> Reply:
        reply = self.run_inference(session)
        if reply.kind == REPLY_ANSWER:
            session.phase = PHASE_DONE
        return reply

    # --------------------------------------------------------------- training

    def _algorithm_menu(self, session: Session) -> Reply:
        task = self._infer_task(session.pending_query or "")
        default = DEFAULT_ALGORITHM[task]
        session.phase = PHASE_AWAIT_ALGORITHM
        listing = ", ".join(
            f"{name} (default)" if name == default else name for name in ALGORITHM_NAMES
        )
        return Reply(
            f"Which algorithm should I train on dataset '{session.matched_dataset.name}'? "
            f"Options: {listing}. Reply with the algorithm name.",
            REPLY_ALGORITHM_MENU,
            payload={"algorithms": list(ALGORITHM_NAMES), "default": default},
        )

    def _algorithm_from(self, text: str) -> str:
        lowered = text.lower()
        for name in ALGORITHM_NAMES:
            if name in lowered:
                return name
        if "regressionmodel" in lowered.replace(" ", ""):
            return KIND_LINEAR
        if "classificationmodel" in lowered.replace(" ", ""):
            return KIND_LOGISTIC
        if "recommendationmodel" in lowered.replace(" ", ""):
            return KIND_RECOMMENDER
        return lowered.strip()

    def _train_and_answer(self, session: Session, algorithm: str) -> Reply:
        if algorithm not in ALGORITHM_NAMES:
            return Reply(
                f"Unknown algorithm {algorithm!r}; valid choices: {', '.join(ALGORITHM_NAMES)}.",
                REPLY_ERROR,
                payload={"algorithms": list(ALGORITHM_NAMES)},
            )
        card = self.run_training(session, algorithm)
        session.matched_model = card
        session.phase = PHASE_CANDIDATE_SHOWN
        reply = self._run_inference_reply(session)
        if reply.kind == REPLY_ANSWER and reply.payload is not None:
            reply.payload["trained_model"] = card.name
        return reply

    def run_training(
        self, session: Session, algorithm: str, cfg: TrainConfig | None = None
    ) -> ModelCard:
        if session.matched_dataset is None:
            raise PqaError("no matched dataset to train on")
        if algorithm not in ALGORITHM_NAMES:
            raise PqaError(f"unknown algorithm {algorithm!r}")
        dataset = session.matched_dataset
        query = session.pending_query or ""
        task = _ALGORITHM_TASK[algorithm]
        rows = self.catalog.dataset_rows(dataset.name)
        if session.predicate:
            rows = apply_filter(rows, session.predicate)

        cfg = cfg or self.train_config
        if task == TASK_RECOMMENDATION:
            selection = self.provider.select_columns(
                query, [c.name for c in dataset.columns], task
            )
            pairs = [(row[selection.user_col], row[selection.item_col]) for row in rows]
            model, metrics = ml_engine.train_recommender(pairs, cfg)
            name_seed = selection.item_col
        else:
            encoded = ml_engine.encode_feature_names(dataset.columns)
            selection = self.provider.select_columns(query, encoded, task)
            matrix = ml_engine.encode(rows, dataset.columns, selection)
            if task == TASK_REGRESSION:
                model, metrics = ml_engine.train_linear_regression(matrix, cfg)
            else:
                model, metrics = ml_engine.train_logistic_classifier(matrix, cfg)
            name_seed = selection.target

        name = generate_model_name(task, name_seed, self.catalog.model_names())
        weights_path = self.catalog.model_dir(name) / "weights.bin"
        ml_engine.save_weights(model, weights_path)
        card = ModelCard(
            name=name,
            dataset_name=dataset.name,
            task=task,
            algorithm=ALGORITHM_LABELS[algorithm],
            feature_order=tuple(selection.features),
            target=selection.target,
            user_col=selection.user_col,
            item_col=selection.item_col,
            metrics={k: round(v, 6) for k, v in metrics.items()},
            limitations=_LIMITATIONS[algorithm],
            weights_path=str(weights_path),
            training_rows=len(rows),
        )
        return self.catalog.register_model(card)

    @staticmethod
    def _infer_task(query: str) -> str:
        lowered = query.lower()
        if "recommend" in lowered:
            return TASK_RECOMMENDATION
        if "classify" in lowered or "classification" in lowered or "whether" in lowered:
            return TASK_CLASSIFICATION
        return TASK_REGRESSION


_LIMITATIONS = {
    KIND_LINEAR: (
        "Assumes a linear relationship between inputs and the target; accuracy "
        "degrades under strong non-linearity, multicollinearity, or outliers."
    ),
    KIND_LOGISTIC: (
        "Assumes a linear decision boundary on standardized features; rare classes "
        "or non-linear structure reduce reliability."
    ),
    KIND_RECOMMENDER: (
        "Performance may degrade with sparse user-item interactions or limited "
        "diversity in the training data set."
    ),
}
