"""Exception hierarchy shared by every skipseq module."""


class SkipSeqError(Exception):
    """Base class for errors raised deliberately by skipseq."""


class ValidationError(SkipSeqError, ValueError):
    """An input violates a documented precondition.

    ``field`` names the offending input when there is a single culprit.
    """

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class UndefinedMeanError(ValidationError):
    """No respondent answered, so a conditional mean cannot be formed."""


class IngestError(ValidationError):
    """A microdata file cannot be parsed at all (bad header, duplicate ids)."""
