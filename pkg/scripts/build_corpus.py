#!/usr/bin/env python3
"""Regenerate the bundled sample data: snapshot corpus, datasets, and the
replay transcript that makes every pipeline and eval run offline.

Everything under data/ is derived from this script; run it after changing
page builders, prompts, or fixture responses:

    python3 scripts/build_corpus.py
"""

from __future__ import annotations

import json
import shutil
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from pageguide import dom, find as find_engine, guide as guide_engine
from pageguide import hide as hide_engine
from pageguide.evalharness import (
    eval_find, eval_guide, eval_hide, eval_router, load_dataset,
)
from pageguide.gateway import Gateway, TranscriptStore
from pageguide.indexing import build_index
from pageguide.router import PageContext, classify, context_for
from pageguide.snapshots import Snapshot, load_sequence, load_snapshot, save_snapshot

DATA = ROOT / "data"
SNAPSHOTS = DATA / "snapshots"
SEQUENCES = DATA / "sequences"
DATASETS = DATA / "datasets"
TRANSCRIPTS = DATA / "transcripts"

CAPTURED_AT = "2026-08-01T12:00:00Z"
MODEL = "google/gemini-3-flash-preview"


def write_bundle(name: str, html: str, url: str, title: str,
                 base: Path = SNAPSHOTS, layout=None) -> Snapshot:
    snapshot = Snapshot(
        html=dom.canonical_html(html), url=url, title=title,
        captured_at=CAPTURED_AT, layout=layout,
    )
    save_snapshot(snapshot, base / name)
    return load_snapshot(base / name)


def path_of(snapshot: Snapshot, predicate) -> str:
    index = build_index(snapshot)
    for el in index.elements:
        if predicate(el):
            return el.node_path
    raise AssertionError("no indexed element matched the predicate")


def id_of(snapshot: Snapshot, predicate) -> int:
    index = build_index(snapshot)
    for el in index.elements:
        if predicate(el):
            return el.id
    raise AssertionError("no indexed element matched the predicate")


# --- page builders -------------------------------------------------------------

def film_page_html() -> str:
    cast = [
        "Leonardo DiCaprio as Dom Cobb", "Joseph Gordon-Levitt as Arthur",
        "Elliot Page as Ariadne", "Tom Hardy as Eames",
        "Ken Watanabe as Saito", "Dileep Rao as Yusuf",
        "Cillian Murphy as Robert Fischer", "Tom Berenger as Peter Browning",
        "Marion Cotillard as Mal Cobb", "Michael Caine as Stephen Miles",
        "Pete Postlethwaite as Maurice Fischer", "Lukas Haas as Nash",
        "Talulah Riley as the blonde", "Nicolas Clerc as the bridge sub-con",
        "Coralie Dedykere as the bridge sub-con", "Silvie Laguna as the woman",
        "Virgile Bramly as the sub-con", "Jean-Michel Dagory as the sub-con",
        "Helena Cullinan as the penthouse party guest",
        "Mark Fleischmann as the penthouse party guest",
    ]
    production = [
        "Principal photography began in Tokyo on June 19, 2009.",
        "Filming moved to the United Kingdom in July 2009.",
        "The corridor fight took three weeks to complete.",
        "The rotating corridor set spanned one hundred feet.",
        "A freight train was built on a truck bed for the street chase.",
        "The snow fortress sequence was shot in Calgary.",
        "The crew used practical effects wherever possible.",
        "Over five hundred extras appeared in the crowded dream scenes.",
        "The hotel hallway rig rotated a full circle every few minutes.",
        "Wally Pfister served as the director of photography.",
        "The musical score was composed by Hans Zimmer.",
        "Editing was completed over six months.",
        "The film premiered on July 16, 2010, in London.",
        "The budget was estimated at one hundred sixty million dollars.",
        "Visual effects were led by Paul Franklin and his team.",
        "More than five hundred visual effects shots were produced.",
        "The sound design team recorded real city ambience.",
        "Costumes were designed by Jeffrey Kurland.",
        "The production visited six countries on four continents.",
        "Post-production wrapped in the early summer of 2010.",
    ]
    parts = [
        "<html><head><title>Inception - overview</title></head><body>",
        "<h1>Inception</h1>",
        "<p>A thief who steals corporate secrets through dream-sharing technology.</p>",
        "<h2>Cast</h2>",
    ]
    parts += [f"<p>{line}</p>" for line in cast]
    parts.append("<h2>Production</h2>")
    parts += [f"<p>{line}</p>" for line in production]
    parts.append(
        "<p>Directed by Christopher Nolan, the film blends a heist structure "
        "with dream logic.</p>")
    parts.append(
        "<p>Nolan wrote the screenplay over a decade while working on other "
        "projects.</p>")
    parts.append("</body></html>")
    return "".join(parts)


def video_page_html() -> str:
    return (
        "<html><head><title>How to bake bread - VideoShare</title></head><body>"
        "<h1>How to bake bread at home</h1>"
        "<p>A calm walkthrough of a simple no-knead loaf.</p>"
        "<p>Channel: Slow Kitchen</p>"
        "<button>Subscribe</button>"
        "<button>⋮</button>"
        "<button>Share</button>"
        "<button>Save</button>"
        "</body></html>"
    )


def video_menu_html() -> str:
    return (
        "<html><head><title>How to bake bread - VideoShare</title></head><body>"
        "<h1>How to bake bread at home</h1>"
        "<button>Report</button>"
        "<button>Not interested</button>"
        "<button>Add to queue</button>"
        "</body></html>"
    )


def feed_page_html() -> str:
    return (
        "<html><head><title>Threadline - your feed</title></head><body>"
        '<div class="banner"><p>We use cookies. Accept to continue.</p>'
        "<button>Accept all</button></div>"
        '<div class="post"><p>Morning run along the river, 10k done.</p></div>'
        '<div class="post"><p>Sponsored: SAVE 40% on UltraWidgets today only!</p></div>'
        '<div class="post"><p>Reading group meets Thursday at the library.</p></div>'
        '<div class="post"><p>Promoted: Try the new FizzCola flavor now.</p></div>'
        '<div class="post"><p>Lost cat near the market, please share.</p></div>'
        '<aside><p>Trending: #sourdough</p><p>Trending: #citybikes</p></aside>'
        '<div class="newsletter"><p>Join our newsletter for weekly picks!</p>'
        "<button>Sign up</button></div>"
        '<div class="chat"><button>Chat with support</button></div>'
        "</body></html>"
    )


def tech_feed_html() -> str:
    return (
        "<html><head><title>Channel - tech feed</title></head><body>"
        '<div class="post"><p>Microsoft announces a new surface laptop line.</p></div>'
        '<div class="post"><p>Open source maintainers discuss funding models.</p></div>'
        '<div class="post"><p>Amazon expands same-day delivery to more cities.</p></div>'
        '<div class="post"><p>A deep dive into database write amplification.</p></div>'
        '<div class="post"><p>Microsoft ships security patches for office.</p></div>'
        '<div class="post"><p>Interview: building keyboards from scratch.</p></div>'
        "</body></html>"
    )


def shop_page_html() -> str:
    return (
        "<html><head><title>Street Bites - menu</title></head><body>"
        "<h1>Today's menu</h1>"
        '<div class="item"><p>Grilled pineapple skewers with lime</p></div>'
        '<div class="item"><p>Classic margherita flatbread</p></div>'
        '<div class="item"><p>Pepper beef stir fry with rice</p></div>'
        '<div class="item"><p>Ginger chicken noodle bowl</p></div>'
        '<div class="item"><p>Plain butter croissant</p></div>'
        '<div class="item"><p>Tomato basil soup</p></div>'
        "</body></html>"
    )


def news_page_html() -> str:
    return (
        "<html><head><title>Daily Ledger - reading study</title></head><body>"
        "<h1>Highlight study results published</h1>"
        "<p>The study found reading speed doubled with highlights [1].</p>"
        "<p>Participants reported lower effort across all trials [2].</p>"
        '<div style="display:none"><p>Draft paragraph, do not publish.</p></div>'
        "<p hidden>Editor note: verify the quote.</p>"
        "<h2>Comments</h2>"
        '<div class="comment"><p>Great summary, thanks for sharing.</p></div>'
        '<div class="comment"><p>Link to the original paper please?</p></div>'
        '<div class="comment"><p>Our lab saw similar numbers.</p></div>'
        "</body></html>"
    )


def empty_page_html() -> str:
    return "<html><head><title>Blank</title></head><body></body></html>"


def deep_page_html() -> str:
    depth = 30
    opening = "".join(f'<div class="level-{i}">' for i in range(depth))
    closing = "</div>" * depth
    return (
        "<html><head><title>Nested document</title></head><body>"
        f"{opening}<p>The needle value is 7421.</p>{closing}"
        "<p>Shallow sibling paragraph.</p>"
        "</body></html>"
    )


def qa_page_html() -> str:
    return (
        "<html><head><title>Travel notes - canals</title></head><body>"
        "<h1>Canal towns worth visiting</h1>"
        "<p>Bruges keeps its medieval center intact.</p>"
        "<p>Annecy sits between mountains and a glacial lake.</p>"
        "<p>Giethoorn has more boats than cars.</p>"
        "</body></html>"
    )


def table_page_html() -> str:
    return (
        "<html><head><title>Phone X200 - specifications</title></head><body>"
        "<h1>Phone X200</h1>"
        "<table>"
        "<tr><td>Display</td><td>6.1 inch OLED</td></tr>"
        "<tr><td>Battery</td><td>5000 mAh</td></tr>"
        "<tr><td>Weight</td><td>182 grams</td></tr>"
        "</table>"
        "<p>Ships with a two-year warranty.</p>"
        "</body></html>"
    )


def longtext_page_html() -> str:
    long_line = (
        "This paragraph is deliberately long so that serialized index lines "
        "exercise the clipping marker: " + "lorem ipsum dolor sit amet " * 12
    ).strip()
    return (
        "<html><head><title>Long text sample</title></head><body>"
        f"<p>{long_line}</p><p>Short closing line.</p></body></html>"
    )


def profile_page_html() -> str:
    return (
        "<html><head><title>Account - profile</title></head><body>"
        "<h1>Your profile</h1>"
        "<p>Signed in as casey@example.test</p>"
        "<button>Settings</button>"
        "<button>Sign out</button>"
        "</body></html>"
    )


def settings_page_html() -> str:
    return (
        "<html><head><title>Account - settings</title></head><body>"
        "<h1>Settings</h1>"
        "<button>Profile details</button>"
        "<button>Security</button>"
        "<button>Notifications</button>"
        "</body></html>"
    )


def security_page_html() -> str:
    return (
        "<html><head><title>Account - security</title></head><body>"
        "<h1>Security</h1>"
        '<input type="password" placeholder="New password">'
        "<button>Update password</button>"
        "</body></html>"
    )


# --- transcript recording -------------------------------------------------------

class QueueTransport:
    """Record-mode transport fed with authored response texts."""

    def __init__(self):
        self.queue: list[str] = []

    def push(self, *texts: str) -> None:
        self.queue.extend(texts)

    def __call__(self, url, headers, payload, timeout):
        if not self.queue:
            raise AssertionError("transport queue exhausted; check call order")
        text = self.queue.pop(0)
        return 200, json.dumps({"choices": [{"message": {"content": text}}]})


def route_json(handler: str, confidence: float, reason: str) -> str:
    return json.dumps(
        {"handler": handler, "confidence": confidence, "reason": reason})


def step_json(step: int, instruction: str, index: int, text: str,
              wait_for, is_last: bool, hint: str) -> str:
    return json.dumps({
        "step": step, "instruction": instruction,
        "highlight": {"index": index, "text": text},
        "waitFor": wait_for, "isLastStep": is_last, "nextStepHint": hint,
    })


def hide_json(items: list[tuple[int, str, str]], message: str) -> str:
    return json.dumps({
        "found": [{"index": i, "reason": r, "snippet": s} for i, r, s in items],
        "message": message,
    })


ROUTER_QUERIES: list[tuple[str, str, str]] = [
    # (query, gold class, fixture-predicted class)
    ("What is the price of this product?", "find", "find"),
    ("Who directed this movie?", "find", "find"),
    ("Where is the login button?", "find", "find"),
    ("What is this page about?", "find", "find"),
    ("Show me the opening hours", "find", "find"),
    ("Find the warranty terms", "find", "find"),
    ("What year was the company founded?", "find", "find"),
    ("Which plan includes offline mode?", "find", "find"),
    ("Highlight the refund policy", "find", "find"),
    ("How many episodes are in season two?", "find", "find"),
    ("What does the author conclude?", "find", "find"),
    ("Find the contact email", "find", "find"),
    ("What is the battery capacity?", "find", "find"),
    ("Where does it mention shipping costs?", "find", "find"),
    ("Find me a route to the downloads section", "find", "guide"),  # misroute
    ("How do I report this video?", "guide", "guide"),
    ("How do I change my password?", "guide", "guide"),
    ("Help me delete my account", "guide", "guide"),
    ("Where can I find settings?", "guide", "guide"),
    ("How do I enable dark mode?", "guide", "guide"),
    ("Walk me through creating a playlist", "guide", "guide"),
    ("How do I apply a price filter?", "guide", "guide"),
    ("Show me how to upload a file here", "guide", "guide"),
    ("Hide the ads on this page", "hide", "hide"),
    ("Remove the cookie banner", "hide", "hide"),
    ("Get rid of this popup", "hide", "hide"),
    ("Hide recommended videos", "hide", "hide"),
    ("Remove distractions so I can read", "hide", "hide"),
    ("Hide comments", "hide", "hide"),
    ("I only want posts with good news on my feed.", "hide", "find"),  # misroute
]

ROUTER_REASONS = {
    "find": "Question about page content",
    "guide": "How-to question needing step-by-step guidance",
    "hide": "Request to hide content",
}


def main() -> None:
    if DATA.exists():
        shutil.rmtree(DATA)
    for directory in (SNAPSHOTS, SEQUENCES, DATASETS, TRANSCRIPTS):
        directory.mkdir(parents=True)

    # --- snapshot corpus -------------------------------------------------------
    film = write_bundle("film_page", film_page_html(),
                        "https://films.test/inception", "Inception - overview")
    video = write_bundle("video_page", video_page_html(),
                         "https://video.test/watch?v=42", "How to bake bread")
    feed = write_bundle("feed_page", feed_page_html(),
                        "https://threadline.test/feed", "Threadline - your feed")
    tech = write_bundle("tech_feed_page", tech_feed_html(),
                        "https://channel.test/feed", "Channel - tech feed")
    shop = write_bundle("shop_page", shop_page_html(),
                        "https://bites.test/menu", "Street Bites - menu")
    news = write_bundle("news_page", news_page_html(),
                        "https://ledger.test/reading-study", "Daily Ledger")
    write_bundle("empty_page", empty_page_html(),
                 "https://blank.test/", "Blank")
    deep = write_bundle("deep_page", deep_page_html(),
                        "https://nested.test/deep", "Nested document")
    qa = write_bundle("qa_page", qa_page_html(),
                      "https://travel.test/canals", "Travel notes - canals")
    write_bundle("longtext_page", longtext_page_html(),
                 "https://long.test/sample", "Long text sample")

    # table page gets a layout sidecar (with one invisible, one zero-area row)
    table_plain = Snapshot(
        html=dom.canonical_html(table_page_html()),
        url="https://phones.test/x200", title="Phone X200 - specifications",
        captured_at=CAPTURED_AT)
    table_index = build_index(table_plain)
    layout_entries = []
    for el in table_index.elements:
        layout_entries.append({
            "path": el.node_path, "x": 10.0, "y": 30.0 * el.id,
            "w": 400.0, "h": 24.0, "visible": True,
        })
    # mark the weight row invisible and give the warranty line zero height
    for entry in layout_entries:
        element = next(e for e in table_index.elements
                       if e.node_path == entry["path"])
        if "182 grams" in element.text:
            entry["visible"] = False
        if "Weight" == element.text:
            entry["h"] = 0.0
    (SNAPSHOTS / "table_page").mkdir()
    (SNAPSHOTS / "table_page" / "page.html").write_text(
        table_plain.html, encoding="utf-8")
    (SNAPSHOTS / "table_page" / "meta.json").write_text(json.dumps({
        "url": table_plain.url, "title": table_plain.title,
        "captured_at": CAPTURED_AT}, indent=2) + "\n", encoding="utf-8")
    (SNAPSHOTS / "table_page" / "layout.json").write_text(
        json.dumps(layout_entries, indent=2) + "\n", encoding="utf-8")
    table = load_snapshot(SNAPSHOTS / "table_page")

    # --- sequences ---------------------------------------------------------------
    def write_sequence(name: str, pages: list[tuple[str, str, str, str]]):
        base = SEQUENCES / name
        names = []
        for i, (html, url, title, label) in enumerate(pages):
            write_bundle(label or f"s{i}", html, url, title, base=base)
            names.append(label or f"s{i}")
        (base / "sequence.json").write_text(json.dumps(names) + "\n",
                                            encoding="utf-8")
        return base

    video_url = "https://video.test/watch?v=42"
    menu_url = "https://video.test/watch?v=42&menu=open"
    report_seq = write_sequence("report_video", [
        (video_page_html(), video_url, "How to bake bread", "s0"),
        (video_menu_html(), menu_url, "How to bake bread", "s1"),
    ])
    subscribe_seq = write_sequence("subscribe", [
        (video_page_html(), video_url, "How to bake bread", "s0"),
    ])
    password_seq = write_sequence("change_password", [
        (profile_page_html(), "https://account.test/profile", "Account", "s0"),
        (settings_page_html(), "https://account.test/settings", "Settings", "s1"),
        (security_page_html(), "https://account.test/security", "Security", "s2"),
    ])
    stuck_seq = write_sequence("stuck_menu", [
        (video_page_html(), video_url, "How to bake bread", "s0"),
        (video_page_html(), video_url, "How to bake bread", "s1"),
        (video_menu_html(), menu_url, "How to bake bread", "s2"),
    ])

    # --- spot checks the fixtures depend on ---------------------------------------
    film_index = build_index(film)
    director_id = id_of(film, lambda e: "Christopher Nolan" in e.text)
    assert director_id == 45, f"director paragraph landed at id {director_id}"
    dots_id = id_of(video, lambda e: e.text == "⋮")
    assert dots_id == 5, f"three-dot menu landed at id {dots_id}"

    # --- datasets -----------------------------------------------------------------
    router_file = DATASETS / "router_cases.jsonl"
    with router_file.open("w", encoding="utf-8") as fh:
        for query, gold, _ in ROUTER_QUERIES:
            fh.write(json.dumps({"query": query, "gold": gold}) + "\n")

    premiere_id = id_of(film, lambda e: "July 16, 2010" in e.text)
    study_id = id_of(news, lambda e: "reading speed doubled" in e.text)
    needle_id = id_of(deep, lambda e: "needle value" in e.text)
    battery_id = id_of(table, lambda e: e.text == "5000 mAh")

    find_cases = [
        {
            "id": "find-director", "bundle": "../snapshots/film_page",
            "query": "Who directed the film?",
            "gold_answers": ["Christopher Nolan"],
            "gold_element_paths": [film_index.resolve(director_id).node_path],
            "response": 'The film was directed by [45:"Christopher Nolan"].',
        },
        {
            "id": "find-premiere", "bundle": "../snapshots/film_page",
            "query": "When did the film premiere?",
            "gold_answers": ["July 16, 2010"],
            "gold_element_paths": [film_index.resolve(premiere_id).node_path],
            "response": (
                f'It premiered on [{premiere_id}:"July 16, 2010"] in London.'),
        },
        {
            "id": "find-study", "bundle": "../snapshots/news_page",
            "query": "What did the study find?",
            "gold_answers": ["reading speed doubled"],
            "gold_element_paths": [
                build_index(news).resolve(study_id).node_path],
            "response": (
                f'The study found that [{study_id}:"reading speed doubled"] '
                "when highlights were shown; the page's own [1] markers are "
                "footnotes, not citations."),
        },
        {
            "id": "find-not-on-page", "bundle": "../snapshots/qa_page",
            "query": "What is the tallest building in the world?",
            "gold_answers": ["Burj Khalifa"],
            "gold_element_paths": [],
            "response": (
                "The information is not provided on this page. However, the "
                "tallest building in the world is the [Burj Khalifa]"
                "(https://en.wikipedia.org/wiki/Burj_Khalifa#:~:text=tallest"
                "%20structure)."),
        },
        {
            "id": "find-needle", "bundle": "../snapshots/deep_page",
            "query": "What is the needle value?",
            "gold_answers": ["7421"],
            "gold_element_paths": [
                build_index(deep).resolve(needle_id).node_path],
            "response": f'The needle value is [{needle_id}:"7421"].',
        },
        {
            "id": "find-battery", "bundle": "../snapshots/table_page",
            "query": "What is the battery capacity?",
            "gold_answers": ["5000 mAh"],
            "gold_element_paths": [
                build_index(table).resolve(battery_id).node_path],
            "response": f'The battery capacity is [{battery_id}:"5000 mAh"].',
        },
    ]
    find_file = DATASETS / "find_cases.jsonl"
    with find_file.open("w", encoding="utf-8") as fh:
        for case in find_cases:
            row = {k: v for k, v in case.items() if k != "response"}
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")

    # hide cases: gold targets and authored proposals
    def paths_for(snapshot, substrings):
        index = build_index(snapshot)
        out = []
        for needle in substrings:
            matches = [e for e in index.elements if needle in e.text]
            assert matches, f"no element contains {needle!r}"
            out.append(matches[0])
        return out

    feed_ads = paths_for(feed, ["SAVE 40%", "FizzCola"])
    feed_banner = paths_for(feed, ["We use cookies"])
    feed_trending = paths_for(feed, ["#sourdough", "#citybikes"])
    feed_newsletter = paths_for(feed, ["Join our newsletter"])
    feed_chat = paths_for(feed, ["Chat with support"])
    news_comments = paths_for(news, ["Great summary", "original paper",
                                     "similar numbers"])
    tech_targets = paths_for(tech, ["Microsoft announces", "Amazon expands",
                                    "Microsoft ships"])
    shop_pineapple = paths_for(shop, ["pineapple"])
    shop_pepper = paths_for(shop, ["Pepper beef"])
    shop_ginger = paths_for(shop, ["Ginger chicken"])
    feed_regular = paths_for(feed, ["Morning run"])

    def hide_case(case_id, bundle, snapshot, request, types, gold_elements,
                  proposed_elements, message):
        difficulty = {1: "easy", 2: "medium"}.get(types, "hard")
        return {
            "row": {
                "id": case_id, "bundle": bundle, "request": request,
                "difficulty": difficulty, "target_types": types,
                "gold_target_paths": [e.node_path for e in gold_elements],
            },
            "response": hide_json(
                [(e.id, f"matches the request: {request}", e.text[:60])
                 for e in proposed_elements],
                message),
        }

    hide_cases = [
        hide_case("hide-ads", "../snapshots/feed_page", feed,
                  "Hide all advertisements on the page", 1,
                  feed_ads, feed_ads, "Found 2 sponsored posts"),
        hide_case("hide-banner", "../snapshots/feed_page", feed,
                  "Remove the cookie banner", 1,
                  feed_banner, feed_banner, "Found the cookie notice"),
        hide_case("hide-comments", "../snapshots/news_page", news,
                  "Hide the comments", 1,
                  news_comments, news_comments, "Found 3 comments"),
        hide_case("hide-trending", "../snapshots/feed_page", feed,
                  "Hide the trending sidebar", 1,
                  feed_trending, feed_trending[:1],
                  "Found one trending widget"),
        hide_case("hide-ms-amzn", "../snapshots/tech_feed_page", tech,
                  "Hide all posts that relate to Microsoft or Amazon", 2,
                  tech_targets, tech_targets, "Found 3 matching posts"),
        hide_case("hide-pineapple-ginger", "../snapshots/shop_page", shop,
                  "Hide all food items that contain pineapple or ginger", 2,
                  shop_pineapple + shop_ginger,
                  shop_pineapple + shop_ginger, "Found 2 matching items"),
        hide_case("hide-newsletter-chat", "../snapshots/feed_page", feed,
                  "Hide the newsletter prompt and the chat widget", 2,
                  feed_newsletter + feed_chat,
                  feed_newsletter + feed_chat, "Found both widgets"),
        hide_case("hide-three-foods", "../snapshots/shop_page", shop,
                  "Hide all food items that contain pineapple, pepper and ginger", 3,
                  shop_pineapple + shop_pepper + shop_ginger,
                  shop_pineapple + shop_pepper + shop_ginger,
                  "Found 3 matching items"),
        hide_case("hide-clutter", "../snapshots/feed_page", feed,
                  "Hide ads, the cookie banner and the newsletter popup", 3,
                  feed_ads + feed_banner + feed_newsletter,
                  feed_ads[:1] + feed_banner + feed_newsletter + feed_regular,
                  "Found likely clutter"),
    ]
    hide_file = DATASETS / "hide_cases.jsonl"
    with hide_file.open("w", encoding="utf-8") as fh:
        for case in hide_cases:
            fh.write(json.dumps(case["row"], ensure_ascii=False) + "\n")

    # guide cases with authored step responses
    report_pages = load_sequence(report_seq)
    password_pages = load_sequence(password_seq)
    stuck_pages = load_sequence(stuck_seq)

    def element(snapshot, text):
        index = build_index(snapshot)
        for el in index.elements:
            if el.text == text:
                return el
        raise AssertionError(f"element {text!r} not found")

    dots0 = element(report_pages[0], "⋮")
    report0 = element(report_pages[1], "Report")
    subscribe0 = element(report_pages[0], "Subscribe")
    settings0 = element(password_pages[0], "Settings")
    security1 = element(password_pages[1], "Security")
    password_input = [e for e in build_index(password_pages[2]).elements
                      if e.tag == "input"][0]
    stuck_dots0 = element(stuck_pages[0], "⋮")
    stuck_dots1 = element(stuck_pages[1], "⋮")
    stuck_report = element(stuck_pages[2], "Report")

    guide_cases = [
        {
            "row": {
                "id": "guide-report", "sequence": "../sequences/report_video",
                "query": "How do I report this video?",
                "gold_trace": [
                    {"action": "click", "path": dots0.node_path},
                    {"action": "click", "path": report0.node_path},
                ],
                "reference_length": 2, "difficulty": "easy",
            },
            "responses": [
                step_json(1, "Click the three-dot menu (⋮) to see more options",
                          dots0.id, "⋮", "click", False,
                          "The menu will open with Report option"),
                step_json(2, "Now click 'Report' to report this video",
                          report0.id, "Report", "click", True,
                          "You'll see reporting options"),
            ],
        },
        {
            "row": {
                "id": "guide-subscribe", "sequence": "../sequences/subscribe",
                "query": "How do I subscribe to this channel?",
                "gold_trace": [
                    {"action": "click", "path": subscribe0.node_path},
                ],
                "reference_length": 1, "difficulty": "easy",
            },
            "responses": [
                step_json(1, "Click the Subscribe button under the video",
                          subscribe0.id, "Subscribe", "click", True,
                          "You will be subscribed to the channel"),
            ],
        },
        {
            "row": {
                "id": "guide-password", "sequence": "../sequences/change_password",
                "query": "How do I change my password?",
                "gold_trace": [
                    {"action": "click", "path": settings0.node_path},
                    {"action": "click", "path": security1.node_path},
                    {"action": "type", "path": password_input.node_path},
                ],
                "reference_length": 3, "difficulty": "medium",
            },
            "responses": [
                step_json(1, "Click Settings to open your account settings",
                          settings0.id, "Settings", "click", False,
                          "You will be taken to account settings"),
                step_json(2, "Click Security to manage sign-in options",
                          security1.id, "Security", "click", False,
                          "The security page will open"),
                step_json(3, "Type your new password into the field",
                          password_input.id, "New password", "input", True,
                          "Your password will be updated"),
            ],
        },
        {
            "row": {
                "id": "guide-stuck-menu", "sequence": "../sequences/stuck_menu",
                "query": "How do I report this video when the menu is stuck?",
                "gold_trace": [
                    {"action": "click", "path": stuck_dots0.node_path},
                    {"action": "click", "path": stuck_dots1.node_path},
                    {"action": "click", "path": stuck_report.node_path},
                ],
                "reference_length": 3, "difficulty": "hard",
            },
            "responses": [
                step_json(1, "Click the three-dot menu (⋮) to see more options",
                          stuck_dots0.id, "⋮", "click", False,
                          "The menu should open"),
                step_json(2, "The menu did not open; click the three-dot menu again",
                          stuck_dots1.id, "⋮", "click", False,
                          "The menu will open this time"),
                step_json(3, "Now click 'Report' to report this video",
                          stuck_report.id, "Report", "click", True,
                          "You'll see reporting options"),
            ],
        },
    ]
    guide_file = DATASETS / "guide_cases.jsonl"
    with guide_file.open("w", encoding="utf-8") as fh:
        for case in guide_cases:
            fh.write(json.dumps(case["row"], ensure_ascii=False) + "\n")

    manifest = {
        "router": {
            "total": len(ROUTER_QUERIES),
            "by_class": {
                cls: sum(1 for _, g, _ in ROUTER_QUERIES if g == cls)
                for cls in ("find", "guide", "hide")
            },
        },
        "find": {"total": len(find_cases)},
        "hide": {
            "total": len(hide_cases),
            "by_difficulty": {
                d: sum(1 for c in hide_cases if c["row"]["difficulty"] == d)
                for d in ("easy", "medium", "hard")
            },
        },
        "guide": {
            "total": len(guide_cases),
            "by_difficulty": {
                d: sum(1 for c in guide_cases if c["row"]["difficulty"] == d)
                for d in ("easy", "medium", "hard")
            },
        },
    }
    (DATASETS / "manifest.json").write_text(
        json.dumps(manifest, indent=2) + "\n", encoding="utf-8")

    # --- record the transcript ------------------------------------------------------
    transport = QueueTransport()
    store = TranscriptStore(TRANSCRIPTS / "replay.transcript.jsonl")
    gateway = Gateway(mode="record", store=store, api_key="fixture",
                      model=MODEL, transport=transport)

    # router eval fixtures (empty page context, as the eval harness runs them)
    for query, _gold, predicted in ROUTER_QUERIES:
        transport.push(route_json(predicted, 0.9, ROUTER_REASONS[predicted]))
        classify(query, PageContext(), gateway)

    # find eval fixtures
    for case in find_cases:
        bundle = DATASETS / case["bundle"]
        snapshot = load_snapshot(bundle)
        transport.push(case["response"])
        find_engine.answer(case["query"], build_index(snapshot), [], gateway)

    # hide eval fixtures
    for case in hide_cases:
        bundle = DATASETS / case["row"]["bundle"]
        snapshot = load_snapshot(bundle)
        transport.push(case["response"])
        hide_engine.propose(case["row"]["request"], build_index(snapshot),
                            gateway)

    # guide eval fixtures: run the real session loop with always-Next
    for case in guide_cases:
        pages = load_sequence(DATASETS / case["row"]["sequence"])
        session = guide_engine.start_session(case["row"]["query"], pages)
        transport.push(*case["responses"])
        while session.state in (guide_engine.AWAITING_STEP,
                                guide_engine.REPLANNING):
            guide_engine.next_step(session, gateway)
            guide_engine.confirm_step(session)
        assert session.state == guide_engine.COMPLETED, (
            case["row"]["id"], session.state)

    # route demos with real page context (what the route CLI sends)
    for snapshot, query, predicted in [
        (film, "Who directed the film?", "find"),
        (feed, "Hide the ads on this page", "hide"),
        (video, "How do I report this video?", "guide"),
    ]:
        transport.push(route_json(predicted, 0.9, ROUTER_REASONS[predicted]))
        classify(query, context_for(snapshot), gateway)

    assert not transport.queue, "unconsumed fixture responses remain"

    # --- replay self-check ------------------------------------------------------------
    replay_gateway = Gateway(
        mode="replay",
        store=TranscriptStore(TRANSCRIPTS / "replay.transcript.jsonl"),
        model=MODEL)
    router_report = eval_router(load_dataset("router", router_file), replay_gateway)
    find_report = eval_find(load_dataset("find", find_file), replay_gateway)
    hide_report = eval_hide(load_dataset("hide", hide_file), replay_gateway)
    guide_report = eval_guide(load_dataset("guide", guide_file), replay_gateway)
    print("router accuracy:", round(router_report.metrics["overall_accuracy"], 4))
    print("find answer correctness:",
          round(find_report.metrics["answer_correctness"], 4))
    print("hide avg:", round(hide_report.metrics["avg"], 4))
    print("guide success:", round(guide_report.metrics["success_rate"], 4))
    print("bundles:", len(list(SNAPSHOTS.iterdir())),
          "| transcript lines:",
          len((TRANSCRIPTS / "replay.transcript.jsonl")
              .read_text().strip().splitlines()))


if __name__ == "__main__":
    main()
