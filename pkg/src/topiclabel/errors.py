"""Exception hierarchy shared across the package."""


class TopicLabelError(Exception):
    """Base class for all topiclabel errors."""


class EmptyWord(TopicLabelError):
    """A word normalized to the empty string."""


class EmptyTopic(TopicLabelError):
    """A topic was constructed without any words."""


class EmptyInput(TopicLabelError):
    """An embedding request contained no texts, or an empty text."""


class DimMismatch(TopicLabelError):
    """Vectors of differing dimension were combined, or a backend returned
    inconsistent dimensions for one model."""


class ZeroVector(TopicLabelError):
    """Cosine similarity is undefined for (near-)zero-norm vectors."""


class BackendUnavailable(TopicLabelError):
    """The embedding backend failed after retries or returned a malformed
    response."""


class NetworkError(TopicLabelError):
    """A knowledge-graph API request failed after retries."""


class RateLimited(TopicLabelError):
    """The knowledge-graph API kept answering 429 until backoff was
    exhausted."""


class CacheMiss(TopicLabelError):
    """Offline mode was requested but the query is not in the disk cache."""


class EmptySeeds(TopicLabelError):
    """Graph expansion was started without seed terms."""


class EmptyGraph(TopicLabelError):
    """A graph unexpectedly contains no candidate nodes."""


class EmptyTokens(TopicLabelError):
    """A token-level score was requested for an empty token list."""


class EmptyReferences(TopicLabelError):
    """Multi-reference selection requires at least one reference."""


class MissingReferences(TopicLabelError):
    """A topic entered evaluation without any gold references."""


class TopicMismatch(TopicLabelError):
    """A label result refers to a topic id absent from the dataset."""


class ParseError(TopicLabelError):
    """A dataset or interchange file failed to parse."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DuplicateTopicId(TopicLabelError):
    """Two topics in one dataset share an id."""


class EmptyDataset(TopicLabelError):
    """A dataset file produced no topics."""
