"""Mixed-initiative guide sessions: one step at a time, user-confirmed.

The session is a small state machine (AwaitingStep → AwaitingUser →
AwaitingStep/Replanning → … → Completed/Stopped/Failed). Confirming a
non-final step advances the snapshot cursor, rebuilds the element index from
the new page, and checks whether the page actually changed; a click-wait
step followed by a byte-identical page is a divergence and triggers
re-planning from the new state. The user drives the pace: nothing advances
without an explicit confirm.

Page navigation is modeled as cursor movement over a snapshot source — a
prerecorded sequence offline, or live uploads staged by the HTTP service.
"""

from __future__ import annotations

import secrets
from dataclasses import dataclass, field
from typing import Optional, Protocol

from .errors import (
    EmptySequence,
    InvalidState,
    MalformedStep,
    ParseFailure,
    SequenceExhausted,
    StepLimitExceeded,
    UnknownElementId,
)
from .gateway import Gateway
from .indexing import ElementIndex, build_index, resolve_element
from .prompts import guide_correction_request, guide_request
from .router import parse_json_payload
from .snapshots import Snapshot

MAX_STEPS = 25

WAIT_FOR = ("click", "input", "scroll", "none")

AWAITING_STEP = "AwaitingStep"
AWAITING_USER = "AwaitingUser"
REPLANNING = "Replanning"
COMPLETED = "Completed"
STOPPED = "Stopped"
FAILED = "Failed"


@dataclass(frozen=True)
class GuideStep:
    step: int
    instruction: str
    highlight: Optional[tuple[int, str]]  # (element_id, element text)
    wait_for: str
    is_last: bool
    next_hint: str


@dataclass(frozen=True)
class DivergenceReport:
    expected_element: Optional[tuple[int, str]]
    found_in_new_index: bool
    url_changed: bool
    verdict: str  # consistent | diverged


class SnapshotSource(Protocol):
    def current(self) -> Snapshot: ...
    def has_next(self) -> bool: ...
    def advance(self) -> Snapshot: ...
    @property
    def cursor(self) -> int: ...


class SequenceSource:
    """Cursor over a prerecorded snapshot sequence."""

    def __init__(self, snapshots: list[Snapshot]):
        if not snapshots:
            raise EmptySequence("snapshot sequence is empty")
        self._snapshots = list(snapshots)
        self._cursor = 0

    def current(self) -> Snapshot:
        return self._snapshots[self._cursor]

    def has_next(self) -> bool:
        return self._cursor + 1 < len(self._snapshots)

    def advance(self) -> Snapshot:
        if not self.has_next():
            raise SequenceExhausted("no snapshot beyond the cursor")
        self._cursor += 1
        return self.current()

    @property
    def cursor(self) -> int:
        return self._cursor


class LiveSource:
    """Cursor fed one snapshot at a time by a live client (the HTTP service)."""

    def __init__(self, first: Snapshot):
        self._current = first
        self._staged: Optional[Snapshot] = None
        self._cursor = 0

    def stage(self, snapshot: Snapshot) -> None:
        self._staged = snapshot

    def current(self) -> Snapshot:
        return self._current

    def has_next(self) -> bool:
        return self._staged is not None

    def advance(self) -> Snapshot:
        if self._staged is None:
            raise SequenceExhausted("no fresh snapshot staged for this confirm")
        self._current, self._staged = self._staged, None
        self._cursor += 1
        return self._current

    @property
    def cursor(self) -> int:
        return self._cursor


@dataclass
class GuideSession:
    session_id: str
    query: str
    source: SnapshotSource
    index: ElementIndex
    state: str = AWAITING_STEP
    current_step: Optional[GuideStep] = None
    step_history: list[tuple[GuideStep, str]] = field(default_factory=list)
    last_divergence: Optional[DivergenceReport] = None
    max_steps: int = MAX_STEPS

    @property
    def snapshot_cursor(self) -> int:
        return self.source.cursor


def start_session(query: str, snapshot_sequence: list[Snapshot],
                  max_steps: int = MAX_STEPS) -> GuideSession:
    if not query:
        raise ValueError("query must be non-empty")
    source = SequenceSource(snapshot_sequence)
    return session_from_source(query, source, max_steps=max_steps)


def session_from_source(query: str, source: SnapshotSource,
                        max_steps: int = MAX_STEPS) -> GuideSession:
    return GuideSession(
        session_id=secrets.token_hex(16),
        query=query,
        source=source,
        index=build_index(source.current()),
        max_steps=max_steps,
    )


class _BadHighlight(ParseFailure):
    def __init__(self, bad_index: object):
        super().__init__(f"highlight index {bad_index!r} not in page index")
        self.bad_index = bad_index


def _parse_step(raw: str, index: ElementIndex, expected_step: int) -> GuideStep:
    payload = parse_json_payload(raw)
    instruction = payload.get("instruction")
    if not isinstance(instruction, str) or not instruction.strip():
        raise ParseFailure("step has no instruction")

    highlight: Optional[tuple[int, str]] = None
    raw_highlight = payload.get("highlight")
    if raw_highlight is not None:
        if not isinstance(raw_highlight, dict) or "index" not in raw_highlight:
            raise ParseFailure("highlight must be an object with an index")
        hid = raw_highlight["index"]
        if isinstance(hid, bool) or not isinstance(hid, int):
            raise _BadHighlight(hid)
        try:
            resolve_element(index, hid)
        except UnknownElementId:
            raise _BadHighlight(hid) from None
        highlight = (hid, str(raw_highlight.get("text", "")))

    wait_for = payload.get("waitFor")
    if wait_for is None:
        wait_for = "none"
    if not isinstance(wait_for, str) or wait_for not in WAIT_FOR:
        raise ParseFailure(f"waitFor {wait_for!r} not in {WAIT_FOR}")

    is_last = payload.get("isLastStep", False)
    if not isinstance(is_last, bool):
        raise ParseFailure("isLastStep must be a boolean")

    next_hint = payload.get("nextStepHint", "")
    if next_hint is None:
        next_hint = ""
    if not isinstance(next_hint, str):
        raise ParseFailure("nextStepHint must be a string")

    # Step numbering is owned by the session, not the model.
    return GuideStep(
        step=expected_step,
        instruction=instruction.strip(),
        highlight=highlight,
        wait_for=wait_for,
        is_last=is_last,
        next_hint=next_hint,
    )


def _previous_steps_summary(session: GuideSession) -> list[str]:
    lines = []
    for step, outcome in session.step_history:
        line = f"{step.step}. {step.instruction}"
        if outcome == "confirmed-diverged":
            line += " [page state diverged after this step]"
        lines.append(line)
    return lines


def next_step(session: GuideSession, gateway: Gateway) -> GuideStep:
    """Ask the model for the next step and stage it for user confirmation.

    A malformed response or a hallucinated highlight index gets one silent
    re-ask with a correction note; a second failure fails the session.
    """
    if session.state not in (AWAITING_STEP, REPLANNING):
        raise InvalidState(f"cannot produce a step while {session.state}")
    expected = len(session.step_history) + 1
    if expected > session.max_steps:
        session.state = FAILED
        raise StepLimitExceeded(f"plan exceeded {session.max_steps} steps")

    request = guide_request(
        session.query, session.index, expected,
        _previous_steps_summary(session), gateway.model,
    )
    response = gateway.complete(request)
    try:
        step = _parse_step(response.text, session.index, expected)
    except ParseFailure as first_error:
        bad_index = getattr(first_error, "bad_index", None)
        retry = guide_correction_request(request, response.text, bad_index)
        retry_response = gateway.complete(retry)
        try:
            step = _parse_step(retry_response.text, session.index, expected)
        except ParseFailure as second_error:
            session.state = FAILED
            raise MalformedStep(
                f"step {expected} unusable after re-ask: {second_error}"
            ) from second_error
    session.current_step = step
    session.state = AWAITING_USER
    return step


def confirm_step(session: GuideSession) -> DivergenceReport:
    """User pressed Next: record the step, re-read the page, check divergence."""
    if session.state != AWAITING_USER or session.current_step is None:
        raise InvalidState(f"no step awaiting confirmation (state {session.state})")
    step = session.current_step
    session.current_step = None

    if step.is_last:
        session.step_history.append((step, "confirmed"))
        session.state = COMPLETED
        report = DivergenceReport(
            expected_element=step.highlight,
            found_in_new_index=True,
            url_changed=False,
            verdict="consistent",
        )
        session.last_divergence = report
        return report

    old_url = session.source.current().url
    old_elements = session.index.elements
    if not session.source.has_next():
        session.step_history.append((step, "confirmed"))
        session.state = FAILED
        raise SequenceExhausted(
            f"step {step.step} confirmed but no further page state is available")
    new_snapshot = session.source.advance()
    session.index = build_index(new_snapshot)

    url_changed = new_snapshot.url != old_url
    found = False
    if step.highlight is not None:
        hid, htext = step.highlight
        found = any(
            el.id == hid and el.text == htext for el in session.index.elements)
    index_changed = session.index.elements != old_elements

    # A confirmed click is expected to change the page; an unchanged page
    # means the click went nowhere and the plan needs regenerating.
    if step.wait_for == "click":
        highlight_gone = step.highlight is not None and not found
        consistent = url_changed or highlight_gone or index_changed
    else:
        consistent = True

    verdict = "consistent" if consistent else "diverged"
    session.step_history.append(
        (step, "confirmed" if consistent else "confirmed-diverged"))
    session.state = AWAITING_STEP if consistent else REPLANNING
    report = DivergenceReport(
        expected_element=step.highlight,
        found_in_new_index=found,
        url_changed=url_changed,
        verdict=verdict,
    )
    session.last_divergence = report
    return report


def stop(session: GuideSession) -> GuideSession:
    """User pressed Stop: end the session, keeping confirmed steps in place."""
    if session.state in (COMPLETED, FAILED):
        raise InvalidState(f"cannot stop a {session.state} session")
    session.current_step = None
    session.state = STOPPED
    return session


def step_card(session: GuideSession) -> dict:
    """Presentation payload for the staged step."""
    if session.state != AWAITING_USER or session.current_step is None:
        raise InvalidState("no step is staged for presentation")
    step = session.current_step
    return {
        "step_no": step.step,
        "instruction": step.instruction,
        "hint": step.next_hint,
        "highlight": (
            {"element_id": step.highlight[0], "text": step.highlight[1]}
            if step.highlight else None
        ),
        # wait_for "none" marks an informational card: nothing on the page
        # is awaited before Next.
        "wait_for": step.wait_for,
        "controls": ["Finish" if step.is_last else "Next", "Stop"],
    }
