"""Lenient HTML document tree with stable node addressing.

Parsing is built on the stdlib tolerant tokenizer: malformed markup never
raises, stray end tags are ignored, and unclosed elements are closed
implicitly. The tree serializes deterministically, which is what lets hide
mutations and their undo be verified byte-for-byte at the document level.

A node path addresses one element as the chain of (tag, same-tag ordinal)
hops from the document root, e.g. ``html:0/body:0/p:1`` is the second ``p``
child of ``body``. Paths are stable across index rebuilds and are used as
gold-label keys and mutation-record keys.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from html.parser import HTMLParser
from typing import Iterator, Optional, Union

from .errors import UnparseableHtml

VOID_TAGS = frozenset({
    "area", "base", "br", "col", "embed", "hr", "img", "input",
    "link", "meta", "param", "source", "track", "wbr",
})

# Content of these tags is raw character data, never entity-escaped.
RAW_TEXT_TAGS = frozenset({"script", "style"})


@dataclass
class Text:
    data: str


@dataclass
class Comment:
    data: str


@dataclass
class Declaration:
    # e.g. "DOCTYPE html" (without the <! and >)
    data: str


@dataclass
class Element:
    tag: str
    attrs: dict[str, Optional[str]] = field(default_factory=dict)
    children: list["Node"] = field(default_factory=list)
    parent: Optional["Element"] = field(default=None, repr=False, compare=False)

    def child_elements(self) -> list["Element"]:
        return [c for c in self.children if isinstance(c, Element)]

    def direct_text(self) -> str:
        """Whitespace-collapsed text of this element's own text children."""
        raw = "".join(c.data for c in self.children if isinstance(c, Text))
        return " ".join(raw.split())


Node = Union[Element, Text, Comment, Declaration]


@dataclass
class Document:
    children: list[Node] = field(default_factory=list)

    def root_elements(self) -> list[Element]:
        return [c for c in self.children if isinstance(c, Element)]


class _TreeBuilder(HTMLParser):
    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.document = Document()
        self._stack: list[Element] = []

    def _append(self, node: Node) -> None:
        if self._stack:
            if isinstance(node, Element):
                node.parent = self._stack[-1]
            self._stack[-1].children.append(node)
        else:
            self.document.children.append(node)

    def handle_starttag(self, tag, attrs):
        el = Element(tag=tag, attrs={k: v for k, v in attrs})
        self._append(el)
        if tag not in VOID_TAGS:
            self._stack.append(el)

    def handle_startendtag(self, tag, attrs):
        self._append(Element(tag=tag, attrs={k: v for k, v in attrs}))

    def handle_endtag(self, tag):
        # Close the nearest matching open element; ignore stray end tags.
        for i in range(len(self._stack) - 1, -1, -1):
            if self._stack[i].tag == tag:
                del self._stack[i:]
                return

    def handle_data(self, data):
        if data:
            self._append(Text(data))

    def handle_comment(self, data):
        self._append(Comment(data))

    def handle_decl(self, decl):
        self._append(Declaration(decl))


def parse_html(html: str) -> Document:
    """Parse HTML leniently. Raises UnparseableHtml when no element survives."""
    builder = _TreeBuilder()
    builder.feed(html)
    builder.close()
    doc = builder.document
    if not _has_element(doc.children):
        raise UnparseableHtml("document contains no elements")
    return doc


def _has_element(children: list[Node]) -> bool:
    return any(isinstance(c, Element) for c in children)


# --- serialization ----------------------------------------------------------

def _escape_text(data: str) -> str:
    return data.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _escape_attr(value: str) -> str:
    return (
        value.replace("&", "&amp;")
        .replace('"', "&quot;")
        .replace("<", "&lt;")
        .replace(">", "&gt;")
    )


def serialize_node(node: Node, raw: bool = False) -> str:
    if isinstance(node, Text):
        return node.data if raw else _escape_text(node.data)
    if isinstance(node, Comment):
        return f"<!--{node.data}-->"
    if isinstance(node, Declaration):
        return f"<!{node.data}>"
    parts = [f"<{node.tag}"]
    for name, value in node.attrs.items():
        if value is None:
            parts.append(f" {name}")
        else:
            parts.append(f' {name}="{_escape_attr(value)}"')
    parts.append(">")
    if node.tag in VOID_TAGS:
        return "".join(parts)
    inner_raw = node.tag in RAW_TEXT_TAGS
    for child in node.children:
        parts.append(serialize_node(child, raw=inner_raw))
    parts.append(f"</{node.tag}>")
    return "".join(parts)


def serialize_document(doc: Document) -> str:
    return "".join(serialize_node(c) for c in doc.children)


def canonical_html(html: str) -> str:
    """Parse-then-serialize normal form; idempotent by construction."""
    return serialize_document(parse_html(html))


# --- traversal and node paths -----------------------------------------------

def iter_elements(doc: Document) -> Iterator[Element]:
    """Document (pre-)order walk over all elements."""
    stack: list[Element] = list(reversed(doc.root_elements()))
    while stack:
        el = stack.pop()
        yield el
        stack.extend(reversed(el.child_elements()))


def node_path(doc: Document, el: Element) -> str:
    """Path of (tag, same-tag ordinal) hops from the document root."""
    hops: list[str] = []
    current = el
    while True:
        parent = current.parent
        siblings = parent.child_elements() if parent is not None else doc.root_elements()
        ordinal = 0
        for sib in siblings:
            if sib is current:
                break
            if sib.tag == current.tag:
                ordinal += 1
        hops.append(f"{current.tag}:{ordinal}")
        if parent is None:
            break
        current = parent
    return "/".join(reversed(hops))


_HOP_RE = re.compile(r"^([^:/]+):(\d+)$")


def resolve_path(doc: Document, path: str) -> Optional[Element]:
    """Resolve a node path back to its element, or None if it does not exist."""
    scope = doc.root_elements()
    found: Optional[Element] = None
    for hop in path.split("/"):
        m = _HOP_RE.match(hop)
        if not m:
            return None
        tag, ordinal = m.group(1), int(m.group(2))
        seen = 0
        found = None
        for el in scope:
            if el.tag == tag:
                if seen == ordinal:
                    found = el
                    break
                seen += 1
        if found is None:
            return None
        scope = found.child_elements()
    return found
