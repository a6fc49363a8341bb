"""Rule-based natural-language understanding behind one provider interface.

The orchestrator only ever consumes structured values (intents, column
selections, feature vectors), never free text, so a remote LLM provider can
be dropped in behind the same interface: it must emit the same structures and
is rejected in favor of the rules on malformed output.
"""

from __future__ import annotations

import json
import re
import urllib.request
from dataclasses import dataclass
from enum import Enum

from .catalog import CATEGORICAL, NUMERIC, ColumnMeta, TASK_RECOMMENDATION
from .errors import MissingFeature, NoTargetMatch, NoUserId
from .ml_engine import ALGORITHM_NAMES


class Intent(str, Enum):
    QUERY = "query"
    CONFIRM = "confirm"
    CHANGE = "change"
    SELECTION = "selection"
    GUIDE = "guide"
    CHAT = "chat"


@dataclass(frozen=True)
class ColumnSelection:
    task: str
    features: tuple[str, ...] = ()
    target: str | None = None
    user_col: str | None = None
    item_col: str | None = None


TASK_VERBS = ("predict", "recommend", "classify", "estimate", "forecast")

_AFFIRMATIONS = {"y", "yes", "yeah", "yep", "ok", "okay", "sure", "confirm"}
_MODEL_TYPE_TOKENS = {"regressionmodel", "classificationmodel", "recommendationmodel"} | set(
    ALGORITHM_NAMES
)
_HELP_TOKENS = {"help", "guide"}
_COMPARISONS = ("less than", "greater than", "more than", "at least", "at most", "fewer than")
_STOP_AFTER_VERB = {"for", "with", "based", "given", "using", "of", "from", "when", "where"}
_GENERIC_BINARY = {"yes", "no", "y", "n", "true", "false", "0", "1"}
_NEGATIONS = {"no", "non", "not", "without", "zero"}
# filler words carry no signal when scoring column-name matches
_FILLER = {"to", "the", "of", "a", "an", "in", "on", "for", "per", "and", "or"}

_NUM_RE = re.compile(r"^\d+(?:\.\d+)?$")
_WORD_RE = re.compile(r"[a-z0-9]+(?:\.[0-9]+)?")


def _tokenize(text: str) -> list[str]:
    """Positional tokens: lowercase words and numbers, hyphens split."""
    return _WORD_RE.findall(text.lower().replace("-", " "))


def _token_set(text: str) -> set[str]:
    """Token set for mention checks; hyphenated words also appear joined."""
    lowered = text.lower()
    tokens = set(_WORD_RE.findall(lowered.replace("-", " ")))
    tokens |= {m.group(0).replace("-", "") for m in re.finditer(r"[a-z0-9]+(?:-[a-z0-9]+)+", lowered)}
    return tokens


def _name_tokens(name: str) -> list[str]:
    return [t for t in re.split(r"[^a-z0-9]+", name.lower()) if t]


def _tokens_match(a: str, b: str) -> bool:
    if a == b:
        return True
    shorter, longer = (a, b) if len(a) <= len(b) else (b, a)
    return len(shorter) >= 4 and longer.startswith(shorter)


class RuleBasedProvider:
    """Deterministic provider; total over any input text."""

    # ------------------------------------------------------------- intents

    def classify_intent(self, message: str) -> Intent:
        lowered = message.strip().lower()
        tokens = _token_set(message)
        bare = lowered.strip(".?! ")
        if bare in _AFFIRMATIONS or "use matched" in lowered:
            return Intent.CONFIRM
        if "new" in tokens or "another model" in lowered or "different model" in lowered:
            return Intent.CHANGE
        if tokens & _MODEL_TYPE_TOKENS or any(a in lowered for a in ALGORITHM_NAMES):
            return Intent.SELECTION
        if tokens & _HELP_TOKENS or "how to use" in lowered:
            return Intent.GUIDE
        if any(verb in tokens for verb in TASK_VERBS):
            return Intent.QUERY
        return Intent.CHAT

    def needs_preprocessing(self, query: str) -> bool:
        lowered = query.lower()
        if "only consider" in lowered or "from the past" in lowered:
            return True
        verb_pos = min(
            (lowered.find(v) for v in TASK_VERBS if v in lowered), default=len(lowered)
        )
        head = lowered[:verb_pos]
        return any(cmp in head for cmp in _COMPARISONS)

    # ------------------------------------------------------- column mapping

    def select_columns(self, query: str, columns: list[str], task: str) -> ColumnSelection:
        if task == TASK_RECOMMENDATION:
            return self._select_recommendation_columns(query, columns)
        phrase = self._object_phrase(query)
        scored = []
        for pos, col in enumerate(columns):
            col_tokens = _name_tokens(col)
            score = sum(
                1 for tok in phrase if any(_tokens_match(tok, ct) for ct in col_tokens)
            )
            scored.append((score, pos, col))
        best_score, _, target = max(scored, key=lambda s: (s[0], -s[1]))
        if best_score == 0:
            raise NoTargetMatch(
                f"no column shares a token with the query phrase {' '.join(phrase)!r}"
            )
        features = tuple(c for c in columns if c != target)
        return ColumnSelection(task=task, features=features, target=target)

    def _select_recommendation_columns(self, query: str, columns: list[str]) -> ColumnSelection:
        tokens = _tokenize(query)
        item_phrase = self._object_phrase(query)
        # phrase after "based on" / "for" names the user side
        lowered = " ".join(tokens)
        user_phrase: list[str] = []
        for marker in ("based on ", "for "):
            idx = lowered.find(marker)
            if idx >= 0:
                user_phrase = lowered[idx + len(marker) :].split()[:4]
                break

        def overlap(phrase: list[str], col: str) -> int:
            col_tokens = _name_tokens(col)
            joined = "".join(col_tokens)
            score = 0
            for tok in phrase:
                stem = tok[:-1] if tok.endswith("s") and len(tok) > 3 else tok
                if any(_tokens_match(tok, ct) or _tokens_match(stem, ct) for ct in col_tokens):
                    score += 1
                elif len(stem) >= 4 and joined.startswith(stem):
                    score += 1
            return score

        item_scored = [(overlap(item_phrase, col), -pos, col) for pos, col in enumerate(columns)]
        item_score, _, item_col = max(item_scored)
        if item_score == 0:
            raise NoTargetMatch(f"no item column matches {' '.join(item_phrase)!r}")

        user_candidates = [c for c in columns if c != item_col]
        if not user_candidates:
            raise NoTargetMatch("no remaining column can identify users")

        def user_rank(pos_col: tuple[int, str]) -> tuple[int, int, int]:
            pos, col = pos_col
            col_tokens = _name_tokens(col)
            return (
                overlap(user_phrase, col),
                1 if "user" in col_tokens else 0,
                1 if "id" in col_tokens else 0,
            )

        ranked = sorted(
            enumerate(user_candidates), key=lambda pc: (user_rank(pc), -pc[0]), reverse=True
        )
        user_col = ranked[0][1]
        if sum(user_rank((0, user_col))) == 0:
            raise NoTargetMatch("no column identifies users for the recommendation")
        return ColumnSelection(task=TASK_RECOMMENDATION, user_col=user_col, item_col=item_col)

    @staticmethod
    def _object_phrase(query: str) -> list[str]:
        """Tokens naming the predicted quantity: after the task verb, before
        the first stop word or number."""
        tokens = _tokenize(query)
        start = 0
        for i, tok in enumerate(tokens):
            if tok in TASK_VERBS:
                start = i + 1
                break
        phrase = []
        for tok in tokens[start:]:
            if tok in _STOP_AFTER_VERB or _NUM_RE.match(tok):
                break
            phrase.append(tok)
        return phrase or tokens

    # ---------------------------------------------------- feature extraction

    def extract_feature_values(
        self, query: str, feature_order: list[str], columns: list[ColumnMeta]
    ) -> list[float]:
        tokens = _tokenize(query)
        token_set = _token_set(query)
        col_by_name = {c.name: c for c in columns}

        # classify each requested feature
        onehot_groups: dict[str, list[tuple[str, str]]] = {}  # column -> [(feature, value)]
        numeric_feats: list[str] = []
        direct_categorical: list[str] = []
        for feat in feature_order:
            meta = col_by_name.get(feat)
            if meta is not None and meta.dtype == NUMERIC:
                numeric_feats.append(feat)
                continue
            if meta is not None and meta.dtype == CATEGORICAL:
                direct_categorical.append(feat)
                continue
            source = self._onehot_of(feat, columns)
            if source is None:
                numeric_feats.append(feat)  # unknown name: treat as numeric mention
                continue
            onehot_groups.setdefault(source[0], []).append((feat, source[1]))

        values: dict[str, float] = {}

        for col, members in onehot_groups.items():
            chosen = self._choose_category(col, [v for _, v in members], tokens, token_set)
            for feat, value in members:
                values[feat] = 1.0 if value == chosen else 0.0

        for feat in direct_categorical:
            mentioned, negated = self._mention(feat, tokens, token_set)
            values[feat] = 1.0 if mentioned and not negated else 0.0

        numeric_values, missing = self._assign_numbers(numeric_feats, tokens)
        values.update(numeric_values)
        if missing:
            raise MissingFeature([f for f in feature_order if f in missing])
        return [values[f] for f in feature_order]

    @staticmethod
    def _onehot_of(feat: str, columns: list[ColumnMeta]) -> tuple[str, str] | None:
        best = None
        for col in columns:
            if col.dtype == CATEGORICAL and feat.startswith(col.name + "_"):
                if best is None or len(col.name) > len(best[0]):
                    best = (col.name, feat[len(col.name) + 1 :])
        return best

    def _choose_category(
        self, col: str, categories: list[str], tokens: list[str], token_set: set[str]
    ) -> str | None:
        lowered = {c.lower(): c for c in categories}
        specific = [c for c in lowered if c not in _GENERIC_BINARY]
        for cat in specific:
            cat_tokens = _name_tokens(cat)
            if cat_tokens and all(t in token_set for t in cat_tokens):
                if self._negated_before(cat_tokens[0], tokens) and len(categories) == 2:
                    other = next(c for c in lowered if c != cat)
                    return lowered[other]
                return lowered[cat]
        # yes/no-style column: a mention of the column name itself selects "yes"
        yes = next((lowered[c] for c in ("yes", "y", "true", "1") if c in lowered), None)
        if yes is not None:
            mentioned, _ = self._mention(col, tokens, token_set)
            if mentioned:
                return yes
        return None

    def _mention(self, name: str, tokens: list[str], token_set: set[str]) -> tuple[bool, bool]:
        """(mentioned, negated) for a column name in the query."""
        name_tokens = _name_tokens(name)
        if not name_tokens or not all(t in token_set for t in name_tokens):
            return False, False
        return True, self._negated_before(name_tokens[0], tokens)

    @staticmethod
    def _negated_before(token: str, tokens: list[str]) -> bool:
        for i, tok in enumerate(tokens):
            if tok == token and i > 0 and tokens[i - 1] in _NEGATIONS:
                return True
        return False

    def _assign_numbers(
        self, numeric_feats: list[str], tokens: list[str]
    ) -> tuple[dict[str, float], set[str]]:
        numbers = [(i, float(tok)) for i, tok in enumerate(tokens) if _NUM_RE.match(tok)]
        feat_tokens = {
            f: [t for t in _name_tokens(f) if t not in _FILLER] or _name_tokens(f)
            for f in numeric_feats
        }
        assigned: dict[str, float] = {}

        # explicit negations first: "no children" -> 0
        for i, tok in enumerate(tokens):
            if tok in _NEGATIONS and i + 1 < len(tokens):
                for feat, f_toks in feat_tokens.items():
                    if feat in assigned:
                        continue
                    if any(_tokens_match(tokens[i + 1], ft) for ft in f_toks):
                        assigned[feat] = 0.0

        for pos, value in numbers:
            best: tuple[float, float, int] | None = None  # (score, -distance, -schema pos)
            best_feat = None
            window = list(enumerate(tokens))[max(0, pos - 6) : pos + 5]
            for order, feat in enumerate(numeric_feats):
                if feat in assigned:
                    continue
                score = 0.0
                closest = None
                matched: set[str] = set()
                for w_pos, w_tok in window:
                    if w_pos == pos:
                        continue
                    for ft in feat_tokens[feat]:
                        if ft not in matched and _tokens_match(w_tok, ft):
                            matched.add(ft)
                            dist = abs(w_pos - pos)
                            closest = dist if closest is None else min(closest, dist)
                # "<n> year(s) old" counts as naming an age-like feature
                if "age" in feat_tokens[feat] and "age" not in matched:
                    after = tokens[pos + 1 : pos + 4]
                    if ("year" in after or "years" in after) and "old" in after:
                        matched.add("age")
                        closest = 1 if closest is None else min(closest, 1)
                score = len(matched)
                if score > 0:
                    key = (score, -(closest or 0), -order)
                    if best is None or key > best:
                        best = key
                        best_feat = feat
            if best_feat is not None:
                assigned[best_feat] = value

        missing = {f for f in numeric_feats if f not in assigned}
        return assigned, missing

    # ------------------------------------------------------------- user ids

    def extract_user_id(self, query: str) -> str:
        tokens = _tokenize(query)
        for i, tok in enumerate(tokens):
            if tok in ("id", "user") and i + 1 < len(tokens):
                nxt = tokens[i + 1]
                if nxt.isdigit():
                    return nxt
        standalone = [t for t in tokens if t.isdigit()]
        if len(standalone) == 1:
            return standalone[0]
        raise NoUserId("query names no user identifier")


class RemoteProvider:
    """Adapter for a remote structured-NLU endpoint.

    Posts one JSON document per operation and validates the reply; on any
    transport or validation failure the rule-based provider answers instead.
    Disabled unless configured with an endpoint.
    """

    def __init__(self, endpoint: str, token: str | None = None, timeout: float = 10.0):
        self.endpoint = endpoint
        self.token = token
        self.timeout = timeout
        self.fallback = RuleBasedProvider()

    def _call(self, op: str, payload: dict):
        body = json.dumps({"op": op, **payload}).encode("utf-8")
        request = urllib.request.Request(
            self.endpoint, data=body, headers={"Content-Type": "application/json"}
        )
        if self.token:
            request.add_header("Authorization", f"Bearer {self.token}")
        with urllib.request.urlopen(request, timeout=self.timeout) as response:
            return json.loads(response.read().decode("utf-8"))

    def classify_intent(self, message: str) -> Intent:
        try:
            reply = self._call("classify_intent", {"message": message})
            return Intent(reply["intent"])
        except Exception:
            return self.fallback.classify_intent(message)

    def needs_preprocessing(self, query: str) -> bool:
        try:
            reply = self._call("needs_preprocessing", {"query": query})
            if not isinstance(reply["needs_preprocessing"], bool):
                raise ValueError("non-boolean reply")
            return reply["needs_preprocessing"]
        except Exception:
            return self.fallback.needs_preprocessing(query)

    def select_columns(self, query: str, columns: list[str], task: str) -> ColumnSelection:
        try:
            reply = self._call("select_columns", {"query": query, "columns": columns, "task": task})
            if task == TASK_RECOMMENDATION:
                user_col, item_col = reply["user_col"], reply["item_col"]
                if user_col not in columns or item_col not in columns:
                    raise ValueError("selected columns not in schema")
                return ColumnSelection(task=task, user_col=user_col, item_col=item_col)
            target = reply["target"]
            features = tuple(reply["features"])
            if target not in columns or any(f not in columns for f in features):
                raise ValueError("selected columns not in schema")
            if len(set(features)) != len(features) or target in features:
                raise ValueError("invalid feature/target structure")
            return ColumnSelection(task=task, features=features, target=target)
        except Exception:
            return self.fallback.select_columns(query, columns, task)

    def extract_feature_values(self, query, feature_order, columns) -> list[float]:
        try:
            reply = self._call(
                "extract_feature_values", {"query": query, "features": list(feature_order)}
            )
            values = [float(v) for v in reply["values"]]
            if len(values) != len(feature_order):
                raise ValueError("value count mismatch")
            return values
        except Exception:
            return self.fallback.extract_feature_values(query, feature_order, columns)

    def extract_user_id(self, query: str) -> str:
        try:
            reply = self._call("extract_user_id", {"query": query})
            user_id = str(reply["user_id"])
            if not user_id:
                raise ValueError("empty user id")
            return user_id
        except Exception:
            return self.fallback.extract_user_id(query)
