"""Content hiding with a confirm-before-mutate gate.

The model proposes up to 15 candidates (each with a one-sentence reason and
a snippet); the user reviews the checked-by-default list; only an explicit
apply mutates the document — and the only mutation ever made is appending
``display:none`` to the confirmed nodes' inline style, which keeps
surrounding layout intact and makes the change fully reversible through the
mutation record.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Optional

from . import dom
from .errors import (
    AlreadyApplied,
    InvalidCount,
    MalformedHideResponse,
    ParseFailure,
    StaleIndex,
    UnknownCandidate,
    UnknownElementId,
    UnknownMutation,
)
from .gateway import Gateway
from .indexing import ElementIndex, resolve_element
from .prompts import hide_request
from .router import parse_json_payload
from .snapshots import Snapshot

MAX_CANDIDATES = 15
DEFAULT_EMPTY_MESSAGE = "No matching content found"


@dataclass(frozen=True)
class HideCandidate:
    element_id: int
    reason: str
    snippet: str
    rank: int
    checked: bool = True


@dataclass(frozen=True)
class HideProposal:
    candidates: tuple[HideCandidate, ...]
    message: str
    source_index_ref: str

    @property
    def ref(self) -> str:
        digest = hashlib.sha256()
        digest.update(self.source_index_ref.encode("utf-8"))
        for c in self.candidates:
            digest.update(f"\x1f{c.element_id}\x1f{c.reason}".encode("utf-8"))
        digest.update(b"\x1f" + self.message.encode("utf-8"))
        return "hp-" + digest.hexdigest()[:16]

    def candidate_ids(self) -> frozenset[int]:
        return frozenset(c.element_id for c in self.candidates)


@dataclass
class HideDecision:
    confirmed_ids: frozenset[int]
    proposal_ref: str
    applied: bool = False


# element_id -> (node_path, prior inline style, or None when the style
# attribute was absent before the mutation)
@dataclass(frozen=True)
class MutationRecord:
    entries: dict[int, tuple[str, Optional[str]]] = field(default_factory=dict)

    def element_ids(self) -> frozenset[int]:
        return frozenset(self.entries)


def propose(request: str, index: ElementIndex, gateway: Gateway) -> HideProposal:
    """Ask the model for hide candidates over the serialized index."""
    if not request:
        raise ValueError("request must be non-empty")
    chat = hide_request(request, index, gateway.model)
    response = gateway.complete(chat)
    return parse_proposal(response.text, index)


def parse_proposal(raw: str, index: ElementIndex) -> HideProposal:
    try:
        payload = parse_json_payload(raw)
    except ParseFailure as exc:
        raise MalformedHideResponse(str(exc)) from exc
    found = payload.get("found")
    if not isinstance(found, list):
        raise MalformedHideResponse('"found" must be an array')
    message = payload.get("message", "")
    if not isinstance(message, str):
        raise MalformedHideResponse('"message" must be a string')

    kept: list[HideCandidate] = []
    dropped = 0
    for item in found:
        if not isinstance(item, dict):
            raise MalformedHideResponse("candidate items must be objects")
        element_id = item.get("index")
        if isinstance(element_id, bool) or not isinstance(element_id, int):
            raise MalformedHideResponse(f"candidate index {element_id!r} is not an integer")
        try:
            resolve_element(index, element_id)
        except UnknownElementId:
            dropped += 1
            continue
        if len(kept) >= MAX_CANDIDATES:
            continue  # hard cap regardless of what the model returned
        kept.append(HideCandidate(
            element_id=element_id,
            reason=str(item.get("reason", "")),
            snippet=str(item.get("snippet", "")),
            rank=len(kept) + 1,
        ))
    if not message and not kept:
        message = DEFAULT_EMPTY_MESSAGE
    if dropped:
        suffix = f"[dropped {dropped} candidate(s) with unknown element ids]"
        message = f"{message} {suffix}".strip()
    return HideProposal(
        candidates=tuple(kept),
        message=message,
        source_index_ref=index.snapshot_ref,
    )


def review(proposal: HideProposal, unchecked_ids: set[int]) -> HideDecision:
    """Checked-by-default review: unchecking excludes an item from hiding."""
    ids = proposal.candidate_ids()
    unknown = set(unchecked_ids) - ids
    if unknown:
        raise UnknownCandidate(f"unchecked ids {sorted(unknown)} are not proposed")
    return HideDecision(
        confirmed_ids=ids - frozenset(unchecked_ids),
        proposal_ref=proposal.ref,
    )


def _append_display_none(prior: Optional[str]) -> str:
    if prior is None or not prior.strip():
        return "display:none"
    return prior.rstrip().rstrip(";") + ";display:none"


def apply(decision: HideDecision, snapshot: Snapshot,
          index: ElementIndex) -> tuple[Snapshot, MutationRecord]:
    """Apply ``display:none`` to every confirmed node; returns the mutated
    snapshot and the record needed to undo it."""
    if decision.applied:
        raise AlreadyApplied(f"decision {decision.proposal_ref} was already applied")
    if index.snapshot_ref != snapshot.ref:
        raise StaleIndex("index was not built from this snapshot")

    tree = dom.parse_html(snapshot.html)  # fresh tree; never mutate a cached one
    entries: dict[int, tuple[str, Optional[str]]] = {}
    for element_id in sorted(decision.confirmed_ids):
        indexed = resolve_element(index, element_id)
        node = dom.resolve_path(tree, indexed.node_path)
        if node is None:
            raise StaleIndex(f"node path {indexed.node_path} no longer resolves")
        prior = node.attrs["style"] if "style" in node.attrs else None
        entries[element_id] = (indexed.node_path, prior)
        node.attrs["style"] = _append_display_none(prior)

    mutated = Snapshot(
        html=dom.serialize_document(tree),
        url=snapshot.url,
        title=snapshot.title,
        captured_at=snapshot.captured_at,
        layout=snapshot.layout,
    )
    decision.applied = True
    return mutated, MutationRecord(entries=entries)


def restore(mutated: Snapshot, record: MutationRecord,
            ids: set[int]) -> Snapshot:
    """Put the recorded prior style back on each node (or drop the attribute
    where there was none)."""
    unknown = set(ids) - record.element_ids()
    if unknown:
        raise UnknownMutation(f"ids {sorted(unknown)} are not in the mutation record")
    tree = dom.parse_html(mutated.html)
    for element_id in sorted(ids):
        path, prior = record.entries[element_id]
        node = dom.resolve_path(tree, path)
        if node is None:
            raise UnknownMutation(f"node path {path} no longer resolves")
        if prior is None:
            node.attrs.pop("style", None)
        else:
            node.attrs["style"] = prior
    return Snapshot(
        html=dom.serialize_document(tree),
        url=mutated.url,
        title=mutated.title,
        captured_at=mutated.captured_at,
        layout=mutated.layout,
    )


def classify_difficulty(request_target_types: int) -> str:
    """1 target type is easy, 2 medium, 3 or more hard."""
    if request_target_types < 1:
        raise InvalidCount(f"target type count must be >= 1, got {request_target_types}")
    if request_target_types == 1:
        return "easy"
    if request_target_types == 2:
        return "medium"
    return "hard"
