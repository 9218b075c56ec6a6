"""Query routing: classify a user query into one of five handlers.

Model output is parsed leniently (code fences stripped, first balanced JSON
object extracted from surrounding prose). Anything unparseable falls back to
the find handler with confidence 0.0 — classification is total over
arbitrary model text.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from .errors import GatewayError, ParseFailure
from .gateway import ChatResponse, Gateway
from .prompts import routing_request

HANDLERS = ("find", "guide", "hide", "image_find", "pdf_find")
FALLBACK_REASON = "router fallback"


@dataclass(frozen=True)
class PageContext:
    page_title: str = ""
    content_type: str = ""


@dataclass(frozen=True)
class RouteDecision:
    handler: str
    confidence: float
    reason: str
    fallback_applied: bool = False


_FENCE_RE = re.compile(r"^\s*```[a-zA-Z0-9_-]*\s*\n?|\n?\s*```\s*$")


def strip_code_fences(raw: str) -> str:
    return _FENCE_RE.sub("", raw.strip())


def extract_json_object(raw: str) -> str:
    """Return the first balanced top-level JSON object embedded in raw text."""
    text = strip_code_fences(raw)
    start = text.find("{")
    if start < 0:
        raise ParseFailure("no JSON object found")
    depth = 0
    in_string = False
    escaped = False
    for i in range(start, len(text)):
        ch = text[i]
        if in_string:
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == '"':
                in_string = False
            continue
        if ch == '"':
            in_string = True
        elif ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
            if depth == 0:
                return text[start:i + 1]
    raise ParseFailure("unbalanced JSON object")


def parse_json_payload(raw: str) -> dict:
    import json

    try:
        payload = json.loads(extract_json_object(raw))
    except ValueError as exc:
        raise ParseFailure(f"invalid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise ParseFailure("top-level JSON value is not an object")
    return payload


def parse_route_response(raw: str) -> RouteDecision:
    payload = parse_json_payload(raw)
    handler = payload.get("handler")
    if not isinstance(handler, str) or handler not in HANDLERS:
        raise ParseFailure(f"handler {handler!r} not in {HANDLERS}")
    confidence = payload.get("confidence", 0.0)
    if isinstance(confidence, bool) or not isinstance(confidence, (int, float)):
        raise ParseFailure(f"confidence {confidence!r} is not a number")
    reason = payload.get("reason", "")
    if not isinstance(reason, str):
        raise ParseFailure("reason is not a string")
    return RouteDecision(
        handler=handler,
        confidence=min(1.0, max(0.0, float(confidence))),
        reason=reason,
    )


def classify(query: str, context: PageContext, gateway: Gateway) -> RouteDecision:
    """Route a query; malformed model output falls back to find, never raises."""
    if not query:
        raise ValueError("query must be non-empty")
    request = routing_request(query, context.page_title, context.content_type,
                              gateway.model)
    response: ChatResponse = gateway.complete(request)  # GatewayError propagates
    try:
        return parse_route_response(response.text)
    except ParseFailure:
        return RouteDecision(
            handler="find", confidence=0.0, reason=FALLBACK_REASON,
            fallback_applied=True,
        )


def derive_content_type(snapshot) -> str:
    """Coarse page kind from the snapshot's URL and tag statistics."""
    from .dom import iter_elements

    tags = {el.tag for el in iter_elements(snapshot.tree())}
    if "video" in tags:
        return "video"
    if "article" in tags:
        return "article"
    lowered = snapshot.url.lower()
    if any(hint in lowered for hint in ("/watch", "video", "youtu")):
        return "video"
    if any(hint in lowered for hint in ("/feed", "forum", "thread")):
        return "feed"
    return "page"


def context_for(snapshot) -> PageContext:
    return PageContext(page_title=snapshot.title,
                       content_type=derive_content_type(snapshot))


@dataclass(frozen=True)
class NotImplementedResult:
    handler: str
    message: str = ""

    def __post_init__(self) -> None:
        if not self.message:
            object.__setattr__(
                self, "message", f"handler {self.handler!r} is not implemented")


@dataclass
class DispatchBundle:
    """Everything a handler may need for one dispatched query."""
    query: str
    snapshot: object = None
    index: object = None
    sequence: Optional[list] = None
    history: list = field(default_factory=list)
    gateway: Optional[Gateway] = None


def dispatch(decision: RouteDecision, bundle: DispatchBundle):
    """Invoke the routed handler; the two stub handlers return a marker result."""
    from . import find as find_engine
    from . import guide as guide_engine
    from . import hide as hide_engine

    if decision.handler in ("image_find", "pdf_find"):
        return NotImplementedResult(handler=decision.handler)
    if decision.handler == "find":
        return find_engine.answer(
            bundle.query, bundle.index, bundle.history, bundle.gateway)
    if decision.handler == "guide":
        sequence = bundle.sequence or [bundle.snapshot]
        return guide_engine.start_session(bundle.query, sequence)
    if decision.handler == "hide":
        return hide_engine.propose(bundle.query, bundle.index, bundle.gateway)
    raise GatewayError(f"unroutable decision {decision.handler!r}")
