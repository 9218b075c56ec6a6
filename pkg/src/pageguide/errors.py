"""Engine error hierarchy.

Every error carries a stable machine ``code`` so the HTTP service can map
module errors onto (status, code) pairs without string matching.
"""

from __future__ import annotations


class PageGuideError(Exception):
    code = "error"


# --- snapshot store ---------------------------------------------------------

class MissingFile(PageGuideError):
    code = "missing_file"


class MalformedMeta(PageGuideError):
    code = "malformed_meta"


class UnparseableHtml(PageGuideError):
    code = "unparseable_html"


class BundleIoError(PageGuideError):
    code = "io_error"


class EmptySequence(PageGuideError):
    code = "empty_sequence"


# --- dom index --------------------------------------------------------------

class UnknownElementId(PageGuideError):
    """Signals a hallucinated citation/highlight index."""

    code = "unknown_element_id"


class NoSpanMatch(PageGuideError):
    """All matching tiers failed; caller falls back to whole-element highlight."""

    code = "no_span_match"


# --- llm gateway ------------------------------------------------------------

class GatewayError(PageGuideError):
    code = "gateway_error"


class ReplayMiss(GatewayError):
    code = "replay_miss"


class TransportError(GatewayError):
    code = "transport"


class UpstreamError(GatewayError):
    code = "upstream"

    def __init__(self, status: int, body_excerpt: str):
        super().__init__(f"upstream returned {status}: {body_excerpt}")
        self.status = status
        self.body_excerpt = body_excerpt


class MissingCredential(GatewayError):
    code = "missing_credential"


# --- intent router ----------------------------------------------------------

class ParseFailure(PageGuideError):
    code = "parse_failure"


# --- guide engine -----------------------------------------------------------

class InvalidState(PageGuideError):
    code = "invalid_state"


class MalformedStep(PageGuideError):
    code = "malformed_step"


class SequenceExhausted(PageGuideError):
    code = "sequence_exhausted"


class StepLimitExceeded(PageGuideError):
    code = "step_limit_exceeded"


# --- hide engine ------------------------------------------------------------

class MalformedHideResponse(PageGuideError):
    code = "malformed_hide_response"


class UnknownCandidate(PageGuideError):
    code = "unknown_candidate"


class AlreadyApplied(PageGuideError):
    code = "already_applied"


class StaleIndex(PageGuideError):
    code = "stale_index"


class UnknownMutation(PageGuideError):
    code = "unknown_mutation"


class InvalidCount(PageGuideError):
    code = "invalid_count"


# --- eval harness -----------------------------------------------------------

class EmptyDataset(PageGuideError):
    code = "empty_dataset"


class SchemaViolation(PageGuideError):
    code = "schema_violation"

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line
