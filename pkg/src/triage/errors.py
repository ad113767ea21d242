"""Exception hierarchy shared by all triage modules."""


class TriageError(Exception):
    """Base class for data and model errors (CLI exit status 1)."""


class MissingColumn(TriageError):
    pass


class MalformedRow(TriageError):
    def __init__(self, row: int, message: str):
        super().__init__(f"row {row}: {message}")
        self.row = row


class NoUsableRecords(TriageError):
    pass


class BadK(TriageError, ValueError):
    pass


class EmptyVocabulary(TriageError):
    pass


class SelectionUnknownColumn(TriageError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class BadHyperparameter(TriageError, ValueError):
    pass


class NegativeFeatureForMultinomialNB(TriageError, ValueError):
    pass


class DegenerateData(TriageError, ValueError):
    pass


class SchemaMismatch(TriageError):
    pass


class LengthMismatch(TriageError, ValueError):
    pass


class VersionMismatch(TriageError):
    pass


class MissingRequiredField(TriageError):
    pass


class FoldError(TriageError):
    """A fit failure inside cross-validation, annotated with the fold index."""

    def __init__(self, fold: int, cause: Exception):
        super().__init__(f"fold {fold}: {cause}")
        self.fold = fold
        self.cause = cause


class SingleClassWarning(UserWarning):
    pass


class StratificationWarning(UserWarning):
    pass
