import json

import pytest

from pageguide import guide
from pageguide.errors import (
    EmptySequence,
    InvalidState,
    MalformedStep,
    SequenceExhausted,
)
from pageguide.guide import (
    AWAITING_STEP,
    AWAITING_USER,
    COMPLETED,
    FAILED,
    REPLANNING,
    STOPPED,
    confirm_step,
    next_step,
    start_session,
    step_card,
    stop,
)

from conftest import ScriptedGateway, snap


VIDEO_PAGE = (
    "<html><body>"
    "<h1>Video title</h1>"
    "<p>Some description text</p>"
    "<p>More description</p>"
    "<p>Channel name</p>"
    "<button>⋮</button>"
    "<button>Share</button>"
    "<button>Save</button>"
    "</body></html>"
)
MENU_PAGE = (
    "<html><body>"
    "<h1>Video title</h1>"
    "<button>Report</button>"
    "<button>Not interested</button>"
    "</body></html>"
)

STEP1 = json.dumps({
    "step": 1,
    "instruction": "Click the three-dot menu (⋮) to see more options",
    "highlight": {"index": 5, "text": "⋮"},
    "waitFor": "click",
    "isLastStep": False,
    "nextStepHint": "The menu will open with Report option",
})
STEP2 = json.dumps({
    "step": 2,
    "instruction": "Now click 'Report' to report this video",
    "highlight": {"index": 2, "text": "Report"},
    "waitFor": "click",
    "isLastStep": True,
    "nextStepHint": "You'll see reporting options",
})


def report_video_sequence():
    return [
        snap(VIDEO_PAGE, url="https://v.test/watch?v=1"),
        snap(MENU_PAGE, url="https://v.test/watch?v=1&menu=1"),
    ]


def test_start_session():
    session = start_session("How do I report this video?", report_video_sequence())
    assert session.state == AWAITING_STEP
    assert session.snapshot_cursor == 0
    assert session.index.m == 7


def test_start_session_empty_sequence():
    with pytest.raises(EmptySequence):
        start_session("q", [])


def test_session_ids_unique():
    seq = report_video_sequence()
    ids = {start_session("q", seq).session_id for _ in range(100)}
    assert len(ids) == 100


def test_next_step_stages_step():
    session = start_session("How do I report this video?", report_video_sequence())
    step = next_step(session, ScriptedGateway([STEP1]))
    assert session.state == AWAITING_USER
    assert step.step == 1
    assert step.highlight == (5, "⋮")
    assert step.wait_for == "click"
    assert not step.is_last
    assert step.next_hint == "The menu will open with Report option"


def test_full_two_step_session():
    session = start_session("How do I report this video?", report_video_sequence())
    gw = ScriptedGateway([STEP1, STEP2])
    next_step(session, gw)
    report = confirm_step(session)
    assert report.verdict == "consistent"  # URL changed and index changed
    assert report.url_changed
    assert session.state == AWAITING_STEP
    step2 = next_step(session, gw)
    assert step2.is_last
    confirm_step(session)
    assert session.state == COMPLETED
    assert [s.step for s, _ in session.step_history] == [1, 2]


def test_confirm_last_step_skips_reread():
    session = start_session("q", report_video_sequence())
    last = json.dumps({
        "step": 1, "instruction": "Done already",
        "highlight": {"index": 1, "text": "Video title"},
        "waitFor": "click", "isLastStep": True, "nextStepHint": "",
    })
    next_step(session, ScriptedGateway([last]))
    cursor_before = session.snapshot_cursor
    confirm_step(session)
    assert session.state == COMPLETED
    assert session.snapshot_cursor == cursor_before


def test_identical_snapshot_after_click_diverges():
    page = snap(VIDEO_PAGE, url="https://v.test/watch?v=1")
    twin = snap(VIDEO_PAGE, url="https://v.test/watch?v=1")
    session = start_session("q", [page, twin])
    next_step(session, ScriptedGateway([STEP1]))
    report = confirm_step(session)
    assert report.verdict == "diverged"
    assert not report.url_changed
    assert session.state == REPLANNING


def test_replanning_uses_new_index():
    page = snap(VIDEO_PAGE, url="https://v.test/watch?v=1")
    twin = snap(VIDEO_PAGE, url="https://v.test/watch?v=1")
    follow = snap(MENU_PAGE, url="https://v.test/menu")
    session = start_session("q", [page, twin, follow])
    gw = ScriptedGateway([STEP1, STEP1.replace('"index": 5', '"index": 5')])
    next_step(session, gw)
    confirm_step(session)
    assert session.state == REPLANNING
    next_step(session, gw)
    # the prompt for the replanned step must carry the post-confirm index
    from pageguide.indexing import serialize_index
    from pageguide.prompts import PAGE_INDEX_BUDGET
    prompt_text = gw.requests[-1].messages[-1].content
    assert serialize_index(session.index, PAGE_INDEX_BUDGET) in prompt_text


def test_non_click_steps_never_diverge():
    page = snap(VIDEO_PAGE, url="https://v.test/a")
    twin = snap(VIDEO_PAGE, url="https://v.test/a")
    session = start_session("q", [page, twin])
    scroll_step = json.dumps({
        "step": 1, "instruction": "Scroll down to the description",
        "highlight": {"index": 2, "text": "Some description text"},
        "waitFor": "scroll", "isLastStep": False, "nextStepHint": "",
    })
    next_step(session, ScriptedGateway([scroll_step]))
    report = confirm_step(session)
    assert report.verdict == "consistent"
    assert session.state == AWAITING_STEP


def test_bad_highlight_retries_once_then_fails():
    session = start_session("q", report_video_sequence())
    bad = STEP1.replace('"index": 5', '"index": 999')
    gw = ScriptedGateway([bad, bad])
    with pytest.raises(MalformedStep):
        next_step(session, gw)
    assert session.state == FAILED
    assert len(gw.requests) == 2
    # the re-ask appends the prior response and a correction note
    assert gw.requests[1].messages[-2].content == bad
    assert "999" in gw.requests[1].messages[-1].content


def test_bad_highlight_recovers_on_retry():
    session = start_session("q", report_video_sequence())
    bad = STEP1.replace('"index": 5', '"index": 999')
    gw = ScriptedGateway([bad, STEP1])
    step = next_step(session, gw)
    assert step.highlight == (5, "⋮")
    assert session.state == AWAITING_USER


def test_malformed_json_retries_generic_note():
    session = start_session("q", report_video_sequence())
    gw = ScriptedGateway(["not json at all", STEP1])
    step = next_step(session, gw)
    assert step.step == 1
    assert "not a valid JSON" in gw.requests[1].messages[-1].content


def test_one_in_flight():
    session = start_session("q", report_video_sequence())
    gw = ScriptedGateway([STEP1])
    next_step(session, gw)
    with pytest.raises(InvalidState):
        next_step(session, gw)


def test_confirm_without_step():
    session = start_session("q", report_video_sequence())
    with pytest.raises(InvalidState):
        confirm_step(session)


def test_sequence_exhausted_fails_session():
    session = start_session("q", [snap(VIDEO_PAGE, url="https://v.test/a")])
    next_step(session, ScriptedGateway([STEP1]))  # non-final step
    with pytest.raises(SequenceExhausted):
        confirm_step(session)
    assert session.state == FAILED


def test_stop_preserves_history():
    session = start_session("q", report_video_sequence())
    gw = ScriptedGateway([STEP1])
    next_step(session, gw)
    confirm_step(session)
    stop(session)
    assert session.state == STOPPED
    assert len(session.step_history) == 1


def test_stop_fresh_session():
    session = start_session("q", report_video_sequence())
    stop(session)
    assert session.state == STOPPED
    assert session.step_history == []


def test_stop_completed_session_rejected():
    session = start_session("q", report_video_sequence())
    last = STEP1.replace('"isLastStep": false', '"isLastStep": true')
    next_step(session, ScriptedGateway([last]))
    confirm_step(session)
    with pytest.raises(InvalidState):
        stop(session)


def test_step_card():
    session = start_session("q", report_video_sequence())
    next_step(session, ScriptedGateway([STEP1]))
    card = step_card(session)
    assert card == {
        "step_no": 1,
        "instruction": "Click the three-dot menu (⋮) to see more options",
        "hint": "The menu will open with Report option",
        "highlight": {"element_id": 5, "text": "⋮"},
        "wait_for": "click",
        "controls": ["Next", "Stop"],
    }


def test_step_card_finish_label_on_last_step():
    session = start_session("q", report_video_sequence())
    last = STEP1.replace('"isLastStep": false', '"isLastStep": true')
    next_step(session, ScriptedGateway([last]))
    assert step_card(session)["controls"] == ["Finish", "Stop"]


def test_step_card_without_staged_step():
    session = start_session("q", report_video_sequence())
    with pytest.raises(InvalidState):
        step_card(session)


def test_reread_rebuilds_index():
    session = start_session("q", report_video_sequence())
    ref_before = session.index.snapshot_ref
    next_step(session, ScriptedGateway([STEP1]))
    confirm_step(session)
    assert session.index.snapshot_ref != ref_before
    assert session.index.m == 3


def test_step_numbers_monotone():
    seq = [snap(VIDEO_PAGE, url=f"https://v.test/{i}") for i in range(4)]
    session = start_session("q", seq)
    steps = []
    for i in range(3):
        is_last = i == 2
        text = json.dumps({
            "step": 99, "instruction": f"do thing {i}",
            "highlight": {"index": 1, "text": "Video title"},
            "waitFor": "click", "isLastStep": is_last, "nextStepHint": "",
        })
        step = next_step(session, ScriptedGateway([text]))
        steps.append(step.step)
        confirm_step(session)
    assert steps == [1, 2, 3]  # session numbering, not the model's


def test_wait_for_null_becomes_none():
    session = start_session("q", report_video_sequence())
    informational = json.dumps({
        "step": 1, "instruction": "Read the description",
        "highlight": {"index": 2, "text": "Some description text"},
        "waitFor": None, "isLastStep": False, "nextStepHint": "",
    })
    step = next_step(session, ScriptedGateway([informational]))
    assert step.wait_for == "none"
