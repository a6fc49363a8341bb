"""Exception hierarchy shared across the engine.

Every error carries a stable ``code`` string so the service layer can map it
to a JSON error body without string-matching messages.
"""


class PqaError(Exception):
    """Base class for all engine errors."""

    code = "error"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class EmptyText(PqaError):
    code = "empty_text"


class DimensionMismatch(PqaError):
    code = "dimension_mismatch"


class FormatError(PqaError):
    code = "format_error"


class IoError(PqaError):
    code = "io_error"


class DuplicateName(PqaError):
    code = "duplicate_name"


class UnknownDataset(PqaError):
    code = "unknown_dataset"


class UnknownModel(PqaError):
    code = "unknown_model"


class CsvParseError(PqaError):
    code = "csv_parse_error"


class EmptyDataset(PqaError):
    code = "empty_dataset"


class ProfileFormatError(PqaError):
    code = "profile_format_error"


class NoTargetMatch(PqaError):
    code = "no_target_match"


class MissingFeature(PqaError):
    code = "missing_feature"

    def __init__(self, names):
        self.names = list(names)
        super().__init__("missing feature values for: " + ", ".join(self.names))


class NoUserId(PqaError):
    code = "no_user_id"


class UnresolvedClause(PqaError):
    code = "unresolved_clause"

    def __init__(self, clause_text: str):
        self.clause_text = clause_text
        super().__init__(f"restriction clause matches no column: {clause_text!r}")


class EmptyResult(PqaError):
    code = "empty_result"


class SingularSystem(PqaError):
    code = "singular_system"


class TooFewRows(PqaError):
    code = "too_few_rows"


class SingleClass(PqaError):
    code = "single_class"


class VocabTooSmall(PqaError):
    code = "vocab_too_small"


class AllRowsDropped(PqaError):
    code = "all_rows_dropped"


class ArityMismatch(PqaError):
    code = "arity_mismatch"


class NonFiniteInput(PqaError):
    code = "non_finite_input"


class UnknownUser(PqaError):
    code = "unknown_user"


class UnknownSession(PqaError):
    code = "unknown_session"
