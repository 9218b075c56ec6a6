"""Grounded answers: parse inline ``[N:"exact phrase"]`` tokens out of model
text, resolve each to a span highlight inside the indexed element, and build
the side-panel answer plus highlight plan.

Plain bracketed integers like ``[1]`` are footnote markers, not citations —
the grammar requires the colon-quote form. Inside a phrase, ``\\"`` escapes a
quote and ``\\\\`` a backslash.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from .errors import NoSpanMatch, UnknownElementId
from .gateway import Gateway
from .indexing import ElementIndex, SpanMatch, find_text_span, resolve_element
from .prompts import find_request

PALETTE_SIZE = 8
# Fixed highlight palette (hex), indexed by color_slot.
PALETTE = (
    "#ffe066", "#a5d8ff", "#b2f2bb", "#ffc9c9",
    "#e599f7", "#ffd8a8", "#99e9f2", "#d8f5a2",
)

NOT_ON_PAGE_SENTINEL = "The information is not provided on this page."

ANCHOR_OPEN = "⟦{k}⟧"
ANCHOR_CLOSE = "⟦/{k}⟧"
WARNING_MARK = "⚠"

_CITATION_RE = re.compile(r'\[(\d+):"((?:\\.|[^"\\])*)"\]')
_MD_LINK_RE = re.compile(r"\[([^\]\[]+)\]\((https?://[^)\s]+)\)")


@dataclass(frozen=True)
class Citation:
    element_id: int
    phrase: str
    answer_offset: int
    raw_token: str = field(default="", compare=False)


@dataclass(frozen=True)
class ResolvedCitation:
    citation: Citation
    span: Optional[SpanMatch]  # None means whole-element highlight
    color_slot: int


@dataclass(frozen=True)
class PlanEntry:
    element_id: int
    span: Optional[SpanMatch]
    color_slot: int


@dataclass(frozen=True)
class HighlightPlan:
    entries: tuple[PlanEntry, ...]
    scroll_target: Optional[int]


@dataclass(frozen=True)
class GroundedAnswer:
    raw_text: str
    display_text: str
    citations: tuple[ResolvedCitation, ...]
    unresolved: tuple[Citation, ...]
    external_links: tuple[tuple[str, str], ...]
    not_on_page: bool
    plan: HighlightPlan


def _unescape_phrase(phrase: str) -> str:
    return re.sub(r'\\(["\\])', r"\1", phrase)


def parse_citations(raw_text: str) -> list[Citation]:
    """All citation tokens in textual order, with offsets into raw_text."""
    citations = []
    for m in _CITATION_RE.finditer(raw_text):
        element_id = int(m.group(1))
        phrase = _unescape_phrase(m.group(2))
        if element_id < 1 or not phrase:
            continue  # outside the grammar; passes through as plain text
        citations.append(Citation(
            element_id=element_id,
            phrase=phrase,
            answer_offset=m.start(),
            raw_token=m.group(0),
        ))
    return citations


def resolve_citations(
    citations: list[Citation], index: ElementIndex
) -> tuple[HighlightPlan, list[Citation]]:
    plan, unresolved, _ = _resolve_full(citations, index)
    return plan, unresolved


def _resolve_full(
    citations: list[Citation], index: ElementIndex
) -> tuple[HighlightPlan, list[Citation], list[ResolvedCitation]]:
    entries: list[PlanEntry] = []
    by_key: dict[tuple[int, str], PlanEntry] = {}
    unresolved: list[Citation] = []
    resolved: list[ResolvedCitation] = []
    for citation in citations:
        key = (citation.element_id, citation.phrase)
        entry = by_key.get(key)
        if entry is None:
            try:
                element = resolve_element(index, citation.element_id)
            except UnknownElementId:
                unresolved.append(citation)
                continue
            try:
                span: Optional[SpanMatch] = find_text_span(element, citation.phrase)
            except NoSpanMatch:
                span = None  # degrade to whole-element highlight
            entry = PlanEntry(
                element_id=citation.element_id,
                span=span,
                color_slot=len(entries) % PALETTE_SIZE,
            )
            entries.append(entry)
            by_key[key] = entry
        resolved.append(ResolvedCitation(
            citation=citation, span=entry.span, color_slot=entry.color_slot))
    plan = HighlightPlan(
        entries=tuple(entries),
        scroll_target=entries[0].element_id if entries else None,
    )
    return plan, unresolved, resolved


def render_display_text(raw_text: str,
                        resolved: list[ResolvedCitation],
                        unresolved: list[Citation]) -> str:
    """Replace citation tokens with numbered anchor markers.

    The k in ``⟦k⟧phrase⟦/k⟧`` is the 1-based position within the resolved
    citations list, which is how a rendering client maps an anchor back to
    its element id. Unresolved tokens render as the plain phrase behind a
    warning mark.
    """
    replacements: list[tuple[int, str, str]] = []
    for k, rc in enumerate(resolved, start=1):
        marker = (ANCHOR_OPEN.format(k=k) + rc.citation.phrase
                  + ANCHOR_CLOSE.format(k=k))
        replacements.append((rc.citation.answer_offset, rc.citation.raw_token, marker))
    for citation in unresolved:
        replacements.append((
            citation.answer_offset, citation.raw_token,
            WARNING_MARK + citation.phrase,
        ))
    replacements.sort(key=lambda item: item[0])
    parts: list[str] = []
    cursor = 0
    for offset, token, marker in replacements:
        parts.append(raw_text[cursor:offset])
        parts.append(marker)
        cursor = offset + len(token)
    parts.append(raw_text[cursor:])
    return "".join(parts)


def strip_anchor_markers(answer: "GroundedAnswer") -> str:
    """Inverse of render_display_text: put citation tokens back in place of
    their anchor/warning markers, reconstructing raw_text exactly."""
    markers: list[tuple[int, str, str]] = []
    for k, rc in enumerate(answer.citations, start=1):
        marker = (ANCHOR_OPEN.format(k=k) + rc.citation.phrase
                  + ANCHOR_CLOSE.format(k=k))
        markers.append((rc.citation.answer_offset, marker, rc.citation.raw_token))
    for citation in answer.unresolved:
        markers.append((citation.answer_offset, WARNING_MARK + citation.phrase,
                        citation.raw_token))
    markers.sort(key=lambda item: item[0])
    text = answer.display_text
    out: list[str] = []
    cursor = 0
    for _, marker, token in markers:
        at = text.find(marker, cursor)
        if at < 0:
            raise ValueError(f"anchor marker {marker!r} missing from display text")
        out.append(text[cursor:at])
        out.append(token)
        cursor = at + len(marker)
    out.append(text[cursor:])
    return "".join(out)


def extract_external_links(raw_text: str,
                           citations: list[Citation]) -> list[tuple[str, str]]:
    """Markdown links in the answer, excluding spans inside citation tokens."""
    occupied = [
        (c.answer_offset, c.answer_offset + len(c.raw_token)) for c in citations
    ]
    links = []
    for m in _MD_LINK_RE.finditer(raw_text):
        if any(start <= m.start() < end for start, end in occupied):
            continue
        links.append((m.group(1), m.group(2)))
    return links


def ground(raw_text: str, index: ElementIndex) -> GroundedAnswer:
    """Turn raw model text into a grounded answer against the given index."""
    citations = parse_citations(raw_text)
    plan, unresolved, resolved = _resolve_full(citations, index)
    return GroundedAnswer(
        raw_text=raw_text,
        display_text=render_display_text(raw_text, resolved, unresolved),
        citations=tuple(resolved),
        unresolved=tuple(unresolved),
        external_links=tuple(extract_external_links(raw_text, citations)),
        not_on_page=raw_text.lstrip().startswith(NOT_ON_PAGE_SENTINEL),
        plan=plan,
    )


def answer(query: str, index: ElementIndex,
           history: list[tuple[str, str]], gateway: Gateway) -> GroundedAnswer:
    if not query:
        raise ValueError("query must be non-empty")
    request = find_request(query, index, history, gateway.model)
    response = gateway.complete(request)
    return ground(response.text, index)
