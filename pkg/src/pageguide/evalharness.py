"""Dataset loading and metric computation over recorded model transcripts.

Datasets are JSON Lines, one case per line; snapshot bundle references are
relative to the dataset file. Gold labels key elements by node path, never
by element id — ids depend on the indexer pass, paths do not.

All rate metrics are macro-averaged over cases. Set precision/recall/F1 and
token-level F1 are defined exactly once here and checked against brute-force
re-implementations in the acceptance suite.
"""

from __future__ import annotations

import hashlib
import json
import string
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import find as find_engine
from . import guide as guide_engine
from . import hide as hide_engine
from .errors import EmptyDataset, PageGuideError, SchemaViolation
from .gateway import Gateway
from .hide import classify_difficulty
from .indexing import build_index
from .router import PageContext, classify
from .snapshots import Snapshot, load_sequence, load_snapshot

DIFFICULTIES = ("easy", "medium", "hard")

# waitFor vocabulary vs. gold-trace action labels
WAIT_TO_ACTION = {"click": "click", "input": "type", "scroll": "scroll",
                  "none": "navigate"}


@dataclass(frozen=True)
class RouterCase:
    query: str
    gold_class: str  # find | guide | hide


@dataclass(frozen=True)
class FindCase:
    id: str
    bundle: Path
    query: str
    gold_answers: tuple[str, ...]
    gold_element_paths: frozenset[str]


@dataclass(frozen=True)
class HideCase:
    id: str
    bundle: Path
    request: str
    difficulty: str
    gold_target_paths: frozenset[str]


@dataclass(frozen=True)
class GuideCase:
    id: str
    sequence: Path
    query: str
    gold_trace: tuple[tuple[str, str], ...]  # (action, node_path)
    reference_length: int
    difficulty: str


@dataclass
class MetricReport:
    kind: str
    metrics: dict[str, float]
    breakdown: dict[str, dict[str, float]] = field(default_factory=dict)
    counts: dict[str, int] = field(default_factory=dict)
    confusion: dict[str, dict[str, int]] = field(default_factory=dict)
    provenance: dict[str, str] = field(default_factory=dict)
    per_case: list[dict] = field(default_factory=list)

    def to_json(self) -> str:
        payload = {
            "kind": self.kind,
            "metrics": self.metrics,
            "breakdown": self.breakdown,
            "counts": self.counts,
            "confusion": self.confusion,
            "provenance": self.provenance,
            "per_case": self.per_case,
        }
        return json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=2)


# --- metric primitives --------------------------------------------------------

def set_prf(predicted: set, gold: set) -> tuple[float, float, float]:
    """Set precision/recall/F1 with the 0-on-empty convention."""
    inter = len(set(predicted) & set(gold))
    precision = inter / len(predicted) if predicted else 0.0
    recall = inter / len(gold) if gold else 0.0
    f1 = (2 * precision * recall / (precision + recall)
          if precision + recall > 0 else 0.0)
    return precision, recall, f1


_PUNCT_TABLE = str.maketrans("", "", string.punctuation)


def normalize_tokens(text: str) -> list[str]:
    """Lowercase, strip punctuation characters, whitespace-split."""
    return text.lower().translate(_PUNCT_TABLE).split()


def token_f1(predicted: str, gold: str) -> float:
    """Token-level F1 over normalized token multisets; 1.0 when both empty."""
    pred = Counter(normalize_tokens(predicted))
    ref = Counter(normalize_tokens(gold))
    if not pred and not ref:
        return 1.0
    overlap = sum((pred & ref).values())
    if overlap == 0:
        return 0.0
    precision = overlap / sum(pred.values())
    recall = overlap / sum(ref.values())
    return 2 * precision * recall / (precision + recall)


def _contains_sublist(haystack: list[str], needle: list[str]) -> bool:
    if not needle:
        return True
    for i in range(len(haystack) - len(needle) + 1):
        if haystack[i:i + len(needle)] == needle:
            return True
    return False


def answer_contains_gold(stripped_answer: str, gold_answers) -> bool:
    """Normalized containment: any gold answer appears as a contiguous token
    run inside the citation-stripped answer."""
    answer_tokens = normalize_tokens(stripped_answer)
    return any(
        _contains_sublist(answer_tokens, normalize_tokens(g)) for g in gold_answers)


def strip_citations(raw_text: str) -> str:
    """Replace each citation token with its phrase, keeping answer content."""
    citations = find_engine.parse_citations(raw_text)
    parts = []
    cursor = 0
    for c in citations:
        parts.append(raw_text[cursor:c.answer_offset])
        parts.append(c.phrase)
        cursor = c.answer_offset + len(c.raw_token)
    parts.append(raw_text[cursor:])
    return "".join(parts)


# --- dataset loading ----------------------------------------------------------

def _case_lines(path: Path):
    if not path.is_file():
        raise SchemaViolation(f"dataset file not found: {path}")
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                yield lineno, json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaViolation(f"invalid JSON: {exc}", line=lineno) from exc


def _require(payload: dict, key: str, kind: type, lineno: int):
    value = payload.get(key)
    if not isinstance(value, kind) or (kind is not bool and isinstance(value, bool)):
        raise SchemaViolation(f"field {key!r} missing or not {kind.__name__}",
                              line=lineno)
    return value


def load_dataset(kind: str, path: Path | str):
    """Load and schema-validate a JSON Lines dataset of the given kind."""
    path = Path(path)
    base = path.parent
    loaders = {
        "router": _load_router_case,
        "find": _load_find_case,
        "hide": _load_hide_case,
        "guide": _load_guide_case,
    }
    if kind not in loaders:
        raise ValueError(f"unknown dataset kind {kind!r}")
    cases = [loaders[kind](payload, lineno, base)
             for lineno, payload in _case_lines(path)]
    return cases


def _load_router_case(payload: dict, lineno: int, base: Path) -> RouterCase:
    query = _require(payload, "query", str, lineno)
    gold = _require(payload, "gold", str, lineno)
    if gold not in ("find", "guide", "hide"):
        raise SchemaViolation(f"gold class {gold!r} not in find/guide/hide",
                              line=lineno)
    return RouterCase(query=query, gold_class=gold)


def _resolve_gold_paths(bundle: Path, paths, lineno: int) -> frozenset[str]:
    snapshot = load_snapshot(bundle)
    from . import dom
    tree = snapshot.tree()
    for p in paths:
        if not isinstance(p, str) or dom.resolve_path(tree, p) is None:
            raise SchemaViolation(f"gold path {p!r} does not resolve in {bundle}",
                                  line=lineno)
    return frozenset(paths)


def _load_find_case(payload: dict, lineno: int, base: Path) -> FindCase:
    case_id = _require(payload, "id", str, lineno)
    bundle = base / _require(payload, "bundle", str, lineno)
    query = _require(payload, "query", str, lineno)
    answers = _require(payload, "gold_answers", list, lineno)
    if not answers or not all(isinstance(a, str) for a in answers):
        raise SchemaViolation("gold_answers must be a non-empty string array",
                              line=lineno)
    paths = _require(payload, "gold_element_paths", list, lineno)
    return FindCase(
        id=case_id, bundle=bundle, query=query,
        gold_answers=tuple(answers),
        gold_element_paths=_resolve_gold_paths(bundle, paths, lineno),
    )


def _load_hide_case(payload: dict, lineno: int, base: Path) -> HideCase:
    case_id = _require(payload, "id", str, lineno)
    bundle = base / _require(payload, "bundle", str, lineno)
    request = _require(payload, "request", str, lineno)
    difficulty = _require(payload, "difficulty", str, lineno)
    target_types = _require(payload, "target_types", int, lineno)
    if classify_difficulty(target_types) != difficulty:
        raise SchemaViolation(
            f"difficulty {difficulty!r} inconsistent with {target_types} target types",
            line=lineno)
    paths = _require(payload, "gold_target_paths", list, lineno)
    return HideCase(
        id=case_id, bundle=bundle, request=request, difficulty=difficulty,
        gold_target_paths=_resolve_gold_paths(bundle, paths, lineno),
    )


def _load_guide_case(payload: dict, lineno: int, base: Path) -> GuideCase:
    case_id = _require(payload, "id", str, lineno)
    sequence = base / _require(payload, "sequence", str, lineno)
    query = _require(payload, "query", str, lineno)
    trace_raw = _require(payload, "gold_trace", list, lineno)
    trace = []
    for entry in trace_raw:
        if (not isinstance(entry, dict) or not isinstance(entry.get("action"), str)
                or not isinstance(entry.get("path"), str)):
            raise SchemaViolation("gold_trace entries need action and path",
                                  line=lineno)
        trace.append((entry["action"], entry["path"]))
    reference_length = _require(payload, "reference_length", int, lineno)
    if reference_length != len(trace):
        raise SchemaViolation(
            f"reference_length {reference_length} != {len(trace)} trace entries",
            line=lineno)
    difficulty = _require(payload, "difficulty", str, lineno)
    if difficulty not in DIFFICULTIES:
        raise SchemaViolation(f"difficulty {difficulty!r} unknown", line=lineno)
    return GuideCase(
        id=case_id, sequence=sequence, query=query, gold_trace=tuple(trace),
        reference_length=reference_length, difficulty=difficulty,
    )


# --- evaluation ---------------------------------------------------------------

def _provenance(gateway: Gateway) -> dict[str, str]:
    out = {"model": gateway.model, "mode": gateway.mode}
    store = gateway.store
    if store is not None and store.path is not None and store.path.exists():
        out["replay_sha256"] = hashlib.sha256(store.path.read_bytes()).hexdigest()
    return out


def _case_error(case_id: str, exc: Exception) -> PageGuideError:
    wrapped = type(exc) if isinstance(exc, PageGuideError) else PageGuideError
    try:
        return wrapped(f"case {case_id}: {exc}")
    except TypeError:
        return PageGuideError(f"case {case_id}: {exc}")


def eval_router(cases: list[RouterCase], gateway: Gateway) -> MetricReport:
    """Per-class routing accuracy plus (gold, predicted) confusion tallies."""
    if not cases:
        raise EmptyDataset("no router cases")
    per_class_total: Counter = Counter()
    per_class_correct: Counter = Counter()
    confusion: dict[str, Counter] = {}
    per_case = []
    for case in cases:
        try:
            decision = classify(case.query, PageContext(), gateway)
        except PageGuideError as exc:
            raise _case_error(f"query {case.query!r}", exc) from exc
        predicted = decision.handler
        per_class_total[case.gold_class] += 1
        if predicted == case.gold_class:
            per_class_correct[case.gold_class] += 1
        else:
            confusion.setdefault(case.gold_class, Counter())[predicted] += 1
        per_case.append({
            "query": case.query, "gold": case.gold_class, "predicted": predicted,
            "fallback": decision.fallback_applied,
        })
    total = sum(per_class_total.values())
    correct = sum(per_class_correct.values())
    breakdown = {
        cls: {"accuracy": per_class_correct[cls] / per_class_total[cls]}
        for cls in sorted(per_class_total)
    }
    return MetricReport(
        kind="router",
        metrics={"overall_accuracy": correct / total},
        breakdown=breakdown,
        counts={"total": total, "correct": correct,
                **{f"total_{cls}": n for cls, n in sorted(per_class_total.items())}},
        confusion={g: dict(sorted(c.items())) for g, c in sorted(confusion.items())},
        provenance=_provenance(gateway),
        per_case=per_case,
    )


def _mean(values: list[float]) -> float:
    return sum(values) / len(values) if values else 0.0


def eval_find(cases: list[FindCase], gateway: Gateway) -> MetricReport:
    """Span grounding P/R/F1 against gold element paths, answer correctness
    by normalized containment, and token-level answer/evidence F1."""
    if not cases:
        raise EmptyDataset("no find cases")
    rows = []
    per_case = []
    for case in cases:
        try:
            snapshot = load_snapshot(case.bundle)
            index = build_index(snapshot)
            answer = find_engine.answer(case.query, index, [], gateway)
        except PageGuideError as exc:
            raise _case_error(case.id, exc) from exc
        predicted_ids = {rc.citation.element_id for rc in answer.citations}
        predicted_paths = {index.resolve(eid).node_path for eid in predicted_ids}
        precision, recall, f1 = set_prf(predicted_paths, set(case.gold_element_paths))
        stripped = strip_citations(answer.raw_text)
        correct = answer_contains_gold(stripped, case.gold_answers)
        answer_f1 = max(token_f1(stripped, g) for g in case.gold_answers)
        evidence = " ".join(rc.citation.phrase for rc in answer.citations)
        evidence_f1 = max(token_f1(evidence, g) for g in case.gold_answers)
        rows.append((precision, recall, f1, float(correct), answer_f1, evidence_f1))
        per_case.append({
            "id": case.id, "precision": precision, "recall": recall, "f1": f1,
            "answer_correct": bool(correct), "answer_f1": answer_f1,
            "evidence_f1": evidence_f1, "not_on_page": answer.not_on_page,
        })
    metrics = {
        "precision": _mean([r[0] for r in rows]),
        "recall": _mean([r[1] for r in rows]),
        "f1": _mean([r[2] for r in rows]),
        "answer_correctness": _mean([r[3] for r in rows]),
        "answer_f1": _mean([r[4] for r in rows]),
        "evidence_f1": _mean([r[5] for r in rows]),
    }
    return MetricReport(
        kind="find", metrics=metrics, counts={"total": len(cases)},
        provenance=_provenance(gateway), per_case=per_case,
    )


def eval_hide(cases: list[HideCase], gateway: Gateway) -> MetricReport:
    """Hide P/R/F1 with proposals auto-confirmed in full; Avg is the mean of
    the three rates, overall and per difficulty."""
    if not cases:
        raise EmptyDataset("no hide cases")
    by_difficulty: dict[str, list[tuple[float, float, float]]] = {}
    per_case = []
    for case in cases:
        try:
            snapshot = load_snapshot(case.bundle)
            index = build_index(snapshot)
            proposal = hide_engine.propose(case.request, index, gateway)
        except PageGuideError as exc:
            raise _case_error(case.id, exc) from exc
        predicted_paths = {
            index.resolve(c.element_id).node_path for c in proposal.candidates}
        prf = set_prf(predicted_paths, set(case.gold_target_paths))
        by_difficulty.setdefault(case.difficulty, []).append(prf)
        per_case.append({
            "id": case.id, "difficulty": case.difficulty,
            "precision": prf[0], "recall": prf[1], "f1": prf[2],
            "proposed": len(proposal.candidates),
        })
    all_rows = [row for rows in by_difficulty.values() for row in rows]
    precision = _mean([r[0] for r in all_rows])
    recall = _mean([r[1] for r in all_rows])
    f1 = _mean([r[2] for r in all_rows])
    breakdown = {}
    for difficulty in DIFFICULTIES:
        rows = by_difficulty.get(difficulty)
        if not rows:
            continue
        d_p, d_r, d_f = (_mean([r[i] for r in rows]) for i in range(3))
        breakdown[difficulty] = {
            "precision": d_p, "recall": d_r, "f1": d_f,
            "avg": (d_p + d_r + d_f) / 3,
        }
    return MetricReport(
        kind="hide",
        metrics={"precision": precision, "recall": recall, "f1": f1,
                 "avg": (precision + recall + f1) / 3},
        breakdown=breakdown,
        counts={"total": len(cases),
                **{f"total_{d}": len(rows)
                   for d, rows in sorted(by_difficulty.items())}},
        provenance=_provenance(gateway),
        per_case=per_case,
    )


def run_guide_case(case: GuideCase, gateway: Gateway) -> tuple[bool, list[dict]]:
    """Replay one guide case with an always-Next confirmation script.

    Success requires reaching Completed within the step cap with every
    confirmed step matching the gold trace entry at its position, both by
    target node path and by action label.
    """
    snapshots = load_sequence(case.sequence)
    session = guide_engine.start_session(case.query, snapshots)
    executed: list[dict] = []
    try:
        while session.state in (guide_engine.AWAITING_STEP, guide_engine.REPLANNING):
            step = guide_engine.next_step(session, gateway)
            path = None
            if step.highlight is not None:
                path = session.index.resolve(step.highlight[0]).node_path
            executed.append({
                "step": step.step,
                "action": WAIT_TO_ACTION[step.wait_for],
                "path": path,
            })
            guide_engine.confirm_step(session)
    except PageGuideError as exc:
        from .errors import ReplayMiss
        if isinstance(exc, ReplayMiss):
            raise ReplayMiss(
                f"case {case.id} step {len(executed) + 1}: {exc}") from exc
        return False, executed  # engine-level failure counts as task failure
    if session.state != guide_engine.COMPLETED:
        return False, executed
    if len(executed) != len(case.gold_trace):
        return False, executed
    for done, (gold_action, gold_path) in zip(executed, case.gold_trace):
        if done["action"] != gold_action or done["path"] != gold_path:
            return False, executed
    return True, executed


def eval_guide(cases: list[GuideCase], gateway: Gateway) -> MetricReport:
    """Task success rate per difficulty split; Avg is the mean across splits."""
    if not cases:
        raise EmptyDataset("no guide cases")
    by_difficulty: dict[str, list[bool]] = {}
    per_case = []
    for case in cases:
        success, executed = run_guide_case(case, gateway)
        by_difficulty.setdefault(case.difficulty, []).append(success)
        per_case.append({
            "id": case.id, "difficulty": case.difficulty, "success": success,
            "steps": len(executed),
        })
    breakdown = {}
    split_rates = []
    for difficulty in DIFFICULTIES:
        outcomes = by_difficulty.get(difficulty)
        if not outcomes:
            continue
        rate = sum(outcomes) / len(outcomes)
        breakdown[difficulty] = {"success_rate": rate}
        split_rates.append(rate)
    overall = sum(sum(v) for v in by_difficulty.values()) / len(cases)
    return MetricReport(
        kind="guide",
        metrics={"success_rate": overall, "avg": _mean(split_rates)},
        breakdown=breakdown,
        counts={"total": len(cases),
                **{f"total_{d}": len(v)
                   for d, v in sorted(by_difficulty.items())}},
        provenance=_provenance(gateway),
        per_case=per_case,
    )
