"""Exception types shared across the toolkit."""


class FokuszError(Exception):
    """Base class for all toolkit errors."""


class MalformedManifest(FokuszError):
    """Stimulus manifest CSV has a bad header or row."""


class DuplicateItem(FokuszError):
    """Two manifest rows share an item_id."""


class MalformedRecord(FokuszError):
    """A JSONL line could not be decoded into a record."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class MalformedLine(FokuszError):
    """A CoNLL-U line has the wrong arity or an unparseable index/head."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class OrphanRecord(FokuszError):
    """A coded record references a trial_id that is not in the trial set."""


class EmptyProfile(FokuszError):
    """A metric was requested on a profile with no categorised responses."""


class MissingCondition(FokuszError):
    """A per-run delta needs both focus conditions for the same source/run."""


class EmptyDataset(FokuszError):
    """An analysis was requested on a dataset with no usable records."""


class DegenerateTable(FokuszError):
    """Contingency table has an all-zero row or column (or zero total)."""


class TooFewGroups(FokuszError):
    """Kruskal-Wallis needs at least two non-empty groups."""


class AllDifferencesZero(FokuszError):
    """All paired differences are zero; the signed-rank test is undefined."""


class EffectTooSmall(FokuszError):
    """Required sample size exceeds the configured cap."""


class KTooLarge(FokuszError):
    """Requested more clusters than there are vectors."""


class RangeTooSmall(FokuszError):
    """Elbow selection needs at least three k values."""


class UnrealizableProfile(FokuszError):
    """Strategy profile puts mass on a category no word order realizes."""


class EndpointError(FokuszError):
    """A request failed after exhausting the retry policy."""


class AuthMissing(FokuszError):
    """No API key was supplied via argument or environment."""
