"""JSON-ready dict views of domain objects, shared by the CLI and the HTTP
service so both surfaces emit identical shapes."""

from __future__ import annotations

from .find import Citation, GroundedAnswer, HighlightPlan, ResolvedCitation
from .guide import DivergenceReport, GuideStep
from .hide import HideCandidate, HideProposal
from .indexing import IndexedElement, SpanMatch
from .router import RouteDecision
from .snapshots import LayoutBox


def layout_box(box: LayoutBox) -> dict:
    return {"x": box.x, "y": box.y, "w": box.w, "h": box.h,
            "visible": box.visible}


def indexed_element(el: IndexedElement) -> dict:
    return {
        "id": el.id, "text": el.text, "tag": el.tag,
        "bbox": layout_box(el.bbox), "interactive": el.interactive,
        "node_path": el.node_path,
    }


def span(match: SpanMatch | None) -> dict | None:
    if match is None:
        return None
    return {"start": match.start, "end": match.end, "tier": match.tier,
            "score": match.score}


def citation(c: Citation) -> dict:
    return {"element_id": c.element_id, "phrase": c.phrase,
            "answer_offset": c.answer_offset}


def resolved_citation(rc: ResolvedCitation) -> dict:
    return {**citation(rc.citation), "span": span(rc.span),
            "color_slot": rc.color_slot}


def highlight_plan(plan: HighlightPlan) -> dict:
    return {
        "entries": [
            {"element_id": e.element_id, "span": span(e.span),
             "color_slot": e.color_slot}
            for e in plan.entries
        ],
        "scroll_target": plan.scroll_target,
    }


def grounded_answer(answer: GroundedAnswer) -> dict:
    return {
        "display_text": answer.display_text,
        "highlight_plan": highlight_plan(answer.plan),
        "citations": [resolved_citation(rc) for rc in answer.citations],
        "unresolved": [citation(c) for c in answer.unresolved],
        "external_links": [{"label": label, "url": url}
                           for label, url in answer.external_links],
        "not_on_page": answer.not_on_page,
    }


def route_decision(decision: RouteDecision) -> dict:
    return {
        "handler": decision.handler,
        "confidence": decision.confidence,
        "reason": decision.reason,
        "fallback_applied": decision.fallback_applied,
    }


def guide_step(step: GuideStep) -> dict:
    return {
        "step": step.step,
        "instruction": step.instruction,
        "highlight": (
            {"element_id": step.highlight[0], "text": step.highlight[1]}
            if step.highlight else None
        ),
        "wait_for": step.wait_for,
        "is_last": step.is_last,
        "next_hint": step.next_hint,
    }


def divergence_report(report: DivergenceReport) -> dict:
    return {
        "expected_element": (
            {"element_id": report.expected_element[0],
             "text": report.expected_element[1]}
            if report.expected_element else None
        ),
        "found_in_new_index": report.found_in_new_index,
        "url_changed": report.url_changed,
        "verdict": report.verdict,
    }


def hide_candidate(c: HideCandidate) -> dict:
    return {"rank": c.rank, "element_id": c.element_id, "reason": c.reason,
            "snippet": c.snippet, "checked": c.checked}


def hide_proposal(proposal: HideProposal) -> dict:
    return {
        "proposal_ref": proposal.ref,
        "candidates": [hide_candidate(c) for c in proposal.candidates],
        "message": proposal.message,
        "source_index_ref": proposal.source_index_ref,
    }
