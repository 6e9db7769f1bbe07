"""Exception hierarchy shared across the toolkit."""


class LexlabError(Exception):
    """Base class for all toolkit errors."""


class ParseError(LexlabError):
    """A designation, title or numeral could not be parsed."""


class EmptyCorpus(LexlabError):
    """An operation that needs articles was given none."""


class DuplicateKey(LexlabError):
    """Two ingested articles collide on the same canonical key."""

    def __init__(self, key):
        self.key = key
        super().__init__(f"duplicate article key: {key}")


class EmptyQuery(LexlabError):
    """Query is empty (or empty after tokenization)."""


class NoData(LexlabError):
    """An aggregation was given zero records."""


class InsufficientCorpus(LexlabError):
    """Not enough non-gold articles to sample the requested distractors."""


class InsufficientDocs(LexlabError):
    """A charge has fewer single-charge documents than requested."""

    def __init__(self, charge: str, have: int, want: int):
        self.charge = charge
        super().__init__(f"charge {charge!r}: {have} single-charge docs, need {want}")


class OverlapError(LexlabError):
    """Gold and distractor article sets overlap."""


class BadExemplars(LexlabError):
    """In-context exemplars are missing, malformed or not exactly three."""


class MissingGold(LexlabError):
    """A prompt mode that embeds the gold verdict got a query without one."""


class MalformedBallot(LexlabError):
    """A ranking ballot violates the permutation/draw contract."""

    def __init__(self, question_id: str, reason: str):
        self.question_id = question_id
        super().__init__(f"ballot {question_id!r}: {reason}")


class DomainError(LexlabError):
    """Numeric argument outside the operation's domain."""


class BackendError(LexlabError):
    """Base class for language-model backend failures."""


class BackendUnavailable(BackendError):
    """Backend still failing after the configured retries."""


class AuthError(BackendError):
    """Authentication rejected; never retried."""


class CapabilityError(BackendError):
    """Backend does not support the requested capability."""


class MockMiss(BackendError):
    """Mock backend had no table entry and default policy is error."""
