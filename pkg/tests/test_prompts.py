from pageguide.gateway import ChatMessage
from pageguide.indexing import build_index
from pageguide.prompts import (
    FIND_PROMPT,
    GUIDE_PROMPT,
    HIDE_PROMPT,
    HISTORY_MAX_TURNS,
    ROUTING_PROMPT,
    find_request,
    guide_request,
    hide_request,
    page_content,
    routing_request,
)

from conftest import snap


def two_index():
    return build_index(snap("<html><body><p>hi</p><button>Go</button></body></html>"))


def test_routing_prompt_markers():
    assert '"find" - For questions, information lookup' in ROUTING_PROMPT
    assert "(DEFAULT)" in ROUTING_PROMPT
    assert "Return JSON only:" in ROUTING_PROMPT
    for handler in ("guide", "hide", "image_find", "pdf_find", "find"):
        assert f'"{handler}"' in ROUTING_PROMPT


def test_routing_request_shape():
    request = routing_request("Hide the ads", "My Page", "feed", "m")
    assert request.messages[0].role == "system"
    assert request.messages[1].content == (
        'Query: "Hide the ads"\n'
        'Page context: page_title="My Page", content_type="feed"')


def test_find_prompt_markers():
    assert '[N:"text"]' in FIND_PROMPT
    assert "The information is not provided on this page." in FIND_PROMPT
    assert "NEVER reproduce existing footnote markers" in FIND_PROMPT
    assert "Chrome Text Fragments" in FIND_PROMPT


def test_find_request_embeds_content_and_index():
    index = two_index()
    request = find_request("who?", index, [], "m")
    system = request.messages[0].content
    assert "hi\nGo" in system                 # page content joined in order
    assert "[1] (p) hi" in system             # serialized index
    assert "{pageContent}" not in system
    assert request.messages[-1] == ChatMessage("user", "who?")


def test_find_request_history_capped():
    index = two_index()
    history = [(f"q{i}", f"a{i}") for i in range(10)]
    request = find_request("now", index, history, "m")
    # system + 6 capped turns * 2 + final user
    assert len(request.messages) == 1 + HISTORY_MAX_TURNS * 2 + 1
    assert request.messages[1].content == "q4"  # oldest retained turn


def test_guide_prompt_markers():
    assert "ONE STEP at a time" in GUIDE_PROMPT
    assert '"waitFor": "click" | "input" | "scroll" | null' in GUIDE_PROMPT
    assert '"isLastStep"' in GUIDE_PROMPT
    assert '"nextStepHint"' in GUIDE_PROMPT


def test_guide_request_sections():
    index = two_index()
    request = guide_request("change password", index, 2,
                            ["1. Click Settings"], "m")
    user = request.messages[1].content
    assert "PAGE INDEX:\n[1] (p) hi" in user
    assert "USER QUESTION: change password" in user
    assert "STEP NUMBER: 2" in user
    assert "PREVIOUS STEPS:\n1. Click Settings" in user


def test_guide_request_no_previous_steps():
    request = guide_request("q", two_index(), 1, [], "m")
    assert "PREVIOUS STEPS:\nNone" in request.messages[1].content


def test_hide_prompt_markers():
    assert "Return at most 15 items." in HIDE_PROMPT
    assert '{"index": N, "reason": "why this matches", "snippet": "text preview"}' in HIDE_PROMPT
    assert '{"found": [], "message": "No matching content found"}' in HIDE_PROMPT


def test_hide_request_sections():
    request = hide_request("hide ads", two_index(), "m")
    user = request.messages[1].content
    assert user.startswith("REQUEST: hide ads")
    assert "[2] (button) Go" in user


def test_page_content_budget():
    index = build_index(snap("<body><p>" + "x" * 50 + "</p></body>"))
    assert page_content(index, budget=10) == "x" * 10
