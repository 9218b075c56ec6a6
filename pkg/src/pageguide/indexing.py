"""Set-of-marks element index over a snapshot, plus in-element span matching.

Every visible node that bears direct text or is interactive gets a unique
integer id, assigned in document order starting at 1. The serialized index
(one ``[id] (tag) text`` line per element) is the page representation that
goes into every model prompt; span matching resolves a quoted phrase back to
character offsets inside an indexed element's text.

Without a layout sidecar there is no real geometry, so elements get a
reading-order pseudo-box: (0, k*LINE_H, 0, LINE_H) for document-order
rank k (0-based).
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from . import dom
from .errors import NoSpanMatch, UnknownElementId
from .snapshots import LayoutBox, Snapshot

ELEM_CLIP = 120     # chars of element text kept in a serialized index line
LINE_H = 20         # px height of the reading-order pseudo-box
FUZZY_MIN = 0.8     # minimum token-set Jaccard for a fuzzy span match

# Subtrees that never contribute indexable content.
EXCLUDED_TAGS = frozenset({"script", "style", "template", "head"})

INTERACTIVE_TAGS = frozenset({"a", "button", "input", "select", "textarea"})

INTERACTIVE_ROLES = frozenset({
    "button", "link", "checkbox", "radio", "menuitem", "menuitemcheckbox",
    "menuitemradio", "option", "switch", "tab", "textbox", "searchbox",
    "combobox", "slider", "spinbutton",
})


@dataclass(frozen=True)
class IndexedElement:
    id: int
    text: str
    tag: str
    bbox: LayoutBox
    interactive: bool
    node_path: str


@dataclass(frozen=True)
class ElementIndex:
    elements: tuple[IndexedElement, ...]
    snapshot_ref: str

    @property
    def m(self) -> int:
        return len(self.elements)

    def resolve(self, element_id: int) -> IndexedElement:
        return resolve_element(self, element_id)


def _inline_style(el: dom.Element) -> dict[str, str]:
    style = el.attrs.get("style")
    if not style:
        return {}
    props: dict[str, str] = {}
    for decl in style.split(";"):
        name, sep, value = decl.partition(":")
        if sep:
            props[name.strip().lower()] = value.strip().lower()
    return props


def _hidden_here(el: dom.Element, path: str, layout: dict[str, LayoutBox] | None) -> bool:
    style = _inline_style(el)
    if style.get("display") == "none" or style.get("visibility") == "hidden":
        return True
    if "hidden" in el.attrs:
        return True
    if (el.attrs.get("aria-hidden") or "").strip().lower() == "true":
        return True
    if layout is not None:
        box = layout.get(path)
        if box is not None and (not box.visible or box.zero_area):
            return True
    return False


def _interactive(el: dom.Element) -> bool:
    if el.tag in INTERACTIVE_TAGS:
        return True
    role = (el.attrs.get("role") or "").strip().lower()
    if role in INTERACTIVE_ROLES:
        return True
    # Inline handler attributes (onclick etc.) mark clickable containers.
    return any(name.startswith("on") for name in el.attrs)


def build_index(snapshot: Snapshot) -> ElementIndex:
    """Index every visible text-bearing or interactive node, in document order."""
    tree = snapshot.tree()
    layout = snapshot.layout
    elements: list[IndexedElement] = []

    def walk(el: dom.Element) -> None:
        if el.tag in EXCLUDED_TAGS:
            return
        path = dom.node_path(tree, el)
        if _hidden_here(el, path, layout):
            return  # visibility inherits; prune the whole subtree
        text = el.direct_text()
        interactive = _interactive(el)
        if text or interactive:
            elem_id = len(elements) + 1
            box = layout.get(path) if layout is not None else None
            if box is None:
                rank = elem_id - 1
                box = LayoutBox(x=0, y=rank * LINE_H, w=0, h=LINE_H)
            elements.append(IndexedElement(
                id=elem_id, text=text, tag=el.tag, bbox=box,
                interactive=interactive, node_path=path,
            ))
        for child in el.child_elements():
            walk(child)

    for root in tree.root_elements():
        walk(root)
    return ElementIndex(elements=tuple(elements), snapshot_ref=snapshot.ref)


def serialize_index(index: ElementIndex, char_budget: int,
                    elem_clip: int = ELEM_CLIP) -> str:
    """Prompt-facing rendering: ``[id] (tag) text`` lines under a char budget.

    Output is cut at the last whole line that fits; a trailing
    ``…(T more elements)`` line reports anything dropped.
    """
    if char_budget < 0:
        raise ValueError("char_budget must be >= 0")
    lines: list[str] = []
    used = 0
    kept = 0
    for el in index.elements:
        text = el.text
        if len(text) > elem_clip:
            text = text[:elem_clip] + "…"
        line = f"[{el.id}] ({el.tag}) {text}".rstrip()
        cost = len(line) + (1 if lines else 0)
        if used + cost > char_budget:
            break
        lines.append(line)
        used += cost
        kept += 1
    remaining = index.m - kept
    if remaining > 0:
        lines.append(f"…({remaining} more elements)")
    return "\n".join(lines)


def resolve_element(index: ElementIndex, element_id: int) -> IndexedElement:
    if not isinstance(element_id, int) or element_id < 1 or element_id > index.m:
        raise UnknownElementId(f"element id {element_id} not in 1..{index.m}")
    return index.elements[element_id - 1]


# --- span matching ladder -----------------------------------------------------

@dataclass(frozen=True)
class SpanMatch:
    element_id: int
    start: int
    end: int
    tier: str  # exact | case-insensitive | whitespace-normalized | fuzzy
    score: float


def _collapse_with_map(text: str) -> tuple[str, list[int]]:
    """Whitespace-collapse text, keeping a map from collapsed to original offsets."""
    out: list[str] = []
    offsets: list[int] = []
    pending_space_at = -1
    for i, ch in enumerate(text):
        if ch.isspace():
            if out:
                pending_space_at = i if pending_space_at < 0 else pending_space_at
            continue
        if pending_space_at >= 0:
            out.append(" ")
            offsets.append(pending_space_at)
            pending_space_at = -1
        out.append(ch)
        offsets.append(i)
    return "".join(out), offsets


_TOKEN_RE = re.compile(r"\w+", re.UNICODE)


def _tokens_with_spans(text: str) -> list[tuple[str, int, int]]:
    return [(m.group(0).lower(), m.start(), m.end()) for m in _TOKEN_RE.finditer(text)]


def _best_fuzzy_window(text: str, phrase: str) -> tuple[float, int, int] | None:
    """Best contiguous token window by token-set Jaccard vs the phrase tokens.

    Ties break to the leftmost, then shortest, window. Returns
    (score, char_start, char_end) or None when either side has no tokens.
    """
    phrase_tokens = {m.group(0).lower() for m in _TOKEN_RE.finditer(phrase)}
    toks = _tokens_with_spans(text)
    if not phrase_tokens or not toks:
        return None
    n = len(toks)
    best: tuple[float, int, int] | None = None
    for i in range(n):
        counts: dict[str, int] = {}
        inter = 0
        distinct = 0
        for j in range(i, n):
            tok = toks[j][0]
            seen = counts.get(tok, 0)
            counts[tok] = seen + 1
            if seen == 0:
                distinct += 1
                if tok in phrase_tokens:
                    inter += 1
            union = distinct + len(phrase_tokens) - inter
            score = inter / union
            if best is None or score > best[0]:
                best = (score, toks[i][1], toks[j][2])
    return best


def find_text_span(element: IndexedElement, phrase: str,
                   fuzzy_min: float = FUZZY_MIN) -> SpanMatch:
    """Resolve a phrase to a character span via a four-tier ladder.

    Tiers, tried in order with the leftmost match winning within a tier:
    exact substring; case-insensitive; whitespace-collapsed on both sides;
    fuzzy best-window token-set Jaccard accepted at fuzzy_min or above.
    """
    if not phrase:
        raise ValueError("phrase must be non-empty")
    text = element.text

    pos = text.find(phrase)
    if pos >= 0:
        return SpanMatch(element.id, pos, pos + len(phrase), "exact", 1.0)

    # re.IGNORECASE keeps offsets in the original string even for characters
    # whose lowercase form changes length.
    m = re.search(re.escape(phrase), text, re.IGNORECASE)
    if m is not None:
        return SpanMatch(element.id, m.start(), m.end(), "case-insensitive", 1.0)

    collapsed, offsets = _collapse_with_map(text)
    collapsed_phrase = " ".join(phrase.split())
    if collapsed_phrase:
        pos = collapsed.find(collapsed_phrase)
        if pos >= 0:
            start = offsets[pos]
            end = offsets[pos + len(collapsed_phrase) - 1] + 1
            return SpanMatch(element.id, start, end, "whitespace-normalized", 1.0)

    best = _best_fuzzy_window(text, phrase)
    if best is not None and best[0] >= fuzzy_min:
        return SpanMatch(element.id, best[1], best[2], "fuzzy", best[0])

    raise NoSpanMatch(f"phrase {phrase!r} not found in element {element.id}")
