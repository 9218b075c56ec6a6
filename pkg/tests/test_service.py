import json
import threading
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from pageguide import serialize
from pageguide.config import Config
from pageguide.errors import PageGuideError
from pageguide.gateway import Gateway, TranscriptStore
from pageguide.service import STATUS_BY_ERROR, create_app, status_for, write_handshake

from conftest import ScriptedGateway

DATA = Path(__file__).resolve().parents[1] / "data"
REPLAY = DATA / "transcripts" / "replay.transcript.jsonl"

SECRET = "test-secret"


def replay_gateway():
    return Gateway(mode="replay", store=TranscriptStore(REPLAY))


def client_for(gateway, config=None):
    app = create_app(gateway, config=config, secret=SECRET)
    client = TestClient(app)
    client.headers.update({"X-PageGuide-Secret": SECRET})
    return client


def upload(client, bundle_name):
    bundle = DATA / "snapshots" / bundle_name
    meta = json.loads((bundle / "meta.json").read_text())
    body = {"html": (bundle / "page.html").read_text(), **meta}
    layout = bundle / "layout.json"
    if layout.exists():
        body["layout"] = json.loads(layout.read_text())
    response = client.post("/v1/snapshot", json=body)
    assert response.status_code == 200, response.text
    return response.json()["snapshot_id"]


def test_secret_required():
    client = TestClient(create_app(replay_gateway(), secret=SECRET))
    response = client.post("/v1/route", json={"snapshot_id": "x", "query": "q"})
    assert response.status_code == 401


def test_snapshot_upload_and_no_dedup():
    client = client_for(replay_gateway())
    first = upload(client, "film_page")
    second = upload(client, "film_page")
    assert first != second  # identical bytes, distinct ids


def test_snapshot_size_cap():
    config = Config(max_body_bytes=1000)
    client = client_for(replay_gateway(), config=config)
    big = {"html": "<body><p>" + "x" * 2000 + "</p></body>",
           "url": "https://a.test/", "title": "A"}
    response = client.post("/v1/snapshot", json=big)
    assert response.status_code == 413


def test_snapshot_unparseable_html():
    client = client_for(replay_gateway())
    response = client.post("/v1/snapshot", json={
        "html": "no markup at all", "url": "https://a.test/", "title": "A"})
    assert response.status_code == 400


def test_route_matches_direct_call():
    from pageguide.router import classify, context_for
    from pageguide.snapshots import load_snapshot

    client = client_for(replay_gateway())
    sid = upload(client, "feed_page")
    response = client.post("/v1/route", json={
        "snapshot_id": sid, "query": "Hide the ads on this page"})
    assert response.status_code == 200

    snapshot = load_snapshot(DATA / "snapshots" / "feed_page")
    direct = classify("Hide the ads on this page", context_for(snapshot),
                      replay_gateway())
    assert response.json() == serialize.route_decision(direct)


def test_snapshot_index_endpoint():
    from pageguide.indexing import build_index
    from pageguide.snapshots import load_snapshot

    client = client_for(replay_gateway())
    sid = upload(client, "film_page")
    response = client.get(f"/v1/snapshot/{sid}/index")
    assert response.status_code == 200
    direct = build_index(load_snapshot(DATA / "snapshots" / "film_page"))
    assert response.json()["elements"] == [
        serialize.indexed_element(el) for el in direct.elements]
    assert response.json()["snapshot_ref"] == direct.snapshot_ref
    assert client.get("/v1/snapshot/ghost/index").status_code == 404


def test_route_unknown_snapshot():
    client = client_for(replay_gateway())
    response = client.post("/v1/route", json={"snapshot_id": "nope", "query": "q"})
    assert response.status_code == 404


def test_route_replay_miss_is_502():
    client = client_for(replay_gateway())
    sid = upload(client, "film_page")
    response = client.post("/v1/route", json={
        "snapshot_id": sid, "query": "a query that was never recorded"})
    assert response.status_code == 502
    assert response.json()["detail"]["code"] == "replay_miss"


def test_find_matches_direct_call():
    from pageguide.find import answer
    from pageguide.indexing import build_index
    from pageguide.snapshots import load_snapshot

    client = client_for(replay_gateway())
    sid = upload(client, "film_page")
    response = client.post("/v1/find", json={
        "snapshot_id": sid, "query": "Who directed the film?"})
    assert response.status_code == 200

    snapshot = load_snapshot(DATA / "snapshots" / "film_page")
    direct = answer("Who directed the film?", build_index(snapshot), [],
                    replay_gateway())
    assert response.json() == serialize.grounded_answer(direct)
    assert response.json()["highlight_plan"]["scroll_target"] == 45


def test_find_empty_query_400():
    client = client_for(replay_gateway())
    sid = upload(client, "film_page")
    response = client.post("/v1/find", json={"snapshot_id": sid, "query": ""})
    assert response.status_code == 400


def test_guide_prerecorded_session_lifecycle():
    client = client_for(replay_gateway())
    s0 = DATA / "sequences" / "report_video" / "s0"
    s1 = DATA / "sequences" / "report_video" / "s1"

    def upload_bundle(path):
        meta = json.loads((path / "meta.json").read_text())
        body = {"html": (path / "page.html").read_text(), **meta}
        response = client.post("/v1/snapshot", json=body)
        return response.json()["snapshot_id"]

    ids = [upload_bundle(s0), upload_bundle(s1)]
    start = client.post("/v1/guide/start", json={
        "query": "How do I report this video?", "snapshot_ids": ids})
    assert start.status_code == 200
    session_id = start.json()["session_id"]
    assert start.json()["state"] == "AwaitingStep"

    step = client.post(f"/v1/guide/{session_id}/next")
    assert step.status_code == 200
    assert step.json()["card"]["step_no"] == 1
    assert step.json()["state"] == "AwaitingUser"

    # one-in-flight: a second next while AwaitingUser is a state conflict
    again = client.post(f"/v1/guide/{session_id}/next")
    assert again.status_code == 409

    confirm = client.post(f"/v1/guide/{session_id}/confirm", json={})
    assert confirm.status_code == 200
    assert confirm.json()["divergence"]["verdict"] == "consistent"

    step2 = client.post(f"/v1/guide/{session_id}/next")
    assert step2.json()["step"]["is_last"]
    confirm2 = client.post(f"/v1/guide/{session_id}/confirm", json={})
    assert confirm2.json()["state"] == "Completed"


def test_guide_live_session_confirm_uploads_snapshot():
    client = client_for(replay_gateway())
    s0 = DATA / "sequences" / "report_video" / "s0"
    s1 = DATA / "sequences" / "report_video" / "s1"

    def upload_bundle(path):
        meta = json.loads((path / "meta.json").read_text())
        body = {"html": (path / "page.html").read_text(), **meta}
        return client.post("/v1/snapshot", json=body).json()["snapshot_id"]

    start = client.post("/v1/guide/start", json={
        "query": "How do I report this video?",
        "snapshot_id": upload_bundle(s0)})
    session_id = start.json()["session_id"]
    client.post(f"/v1/guide/{session_id}/next")
    # live confirm carries the fresh capture
    confirm = client.post(f"/v1/guide/{session_id}/confirm",
                          json={"snapshot_id": upload_bundle(s1)})
    assert confirm.status_code == 200
    assert confirm.json()["state"] == "AwaitingStep"


def test_guide_live_confirm_without_upload_exhausts():
    non_final = json.dumps({
        "step": 1, "instruction": "Click the menu",
        "highlight": {"index": 4, "text": "Subscribe"},
        "waitFor": "click", "isLastStep": False, "nextStepHint": "",
    })
    client = client_for(ScriptedGateway([non_final]))
    sid = upload(client, "video_page")
    start = client.post("/v1/guide/start", json={"query": "q", "snapshot_id": sid})
    session_id = start.json()["session_id"]
    client.post(f"/v1/guide/{session_id}/next")
    hollow = client.post(f"/v1/guide/{session_id}/confirm", json={})
    assert hollow.status_code == 409
    assert hollow.json()["detail"]["code"] == "sequence_exhausted"


def test_guide_unknown_session_404():
    client = client_for(replay_gateway())
    assert client.post("/v1/guide/nope/next").status_code == 404


def test_guide_stop():
    client = client_for(replay_gateway())
    sid = upload(client, "video_page")
    start = client.post("/v1/guide/start", json={
        "query": "How do I report this video?", "snapshot_id": sid})
    session_id = start.json()["session_id"]
    response = client.post(f"/v1/guide/{session_id}/stop")
    assert response.json()["state"] == "Stopped"


def test_hide_propose_apply_cycle():
    client = client_for(replay_gateway())
    sid = upload(client, "feed_page")
    propose = client.post("/v1/hide/propose", json={
        "snapshot_id": sid, "request": "Hide all advertisements on the page"})
    assert propose.status_code == 200
    candidates = propose.json()["candidates"]
    assert len(candidates) == 2
    assert all(c["checked"] for c in candidates)

    confirmed = [c["element_id"] for c in candidates][:1]  # uncheck one
    apply_response = client.post("/v1/hide/apply", json={
        "snapshot_id": sid, "confirmed_ids": confirmed})
    assert apply_response.status_code == 200
    directives = apply_response.json()["directives"]
    assert len(directives) == 1
    assert directives[0]["set_style"] == "display:none"

    again = client.post("/v1/hide/apply", json={
        "snapshot_id": sid, "confirmed_ids": confirmed})
    assert again.status_code == 409
    assert again.json()["detail"]["code"] == "already_applied"


def test_hide_apply_unknown_candidate():
    client = client_for(replay_gateway())
    sid = upload(client, "feed_page")
    client.post("/v1/hide/propose", json={
        "snapshot_id": sid, "request": "Hide all advertisements on the page"})
    response = client.post("/v1/hide/apply", json={
        "snapshot_id": sid, "confirmed_ids": [999]})
    assert response.status_code == 400
    assert response.json()["detail"]["code"] == "unknown_candidate"


def test_hide_propose_matches_direct_call():
    from pageguide.hide import propose as direct_propose
    from pageguide.indexing import build_index
    from pageguide.snapshots import load_snapshot

    client = client_for(replay_gateway())
    sid = upload(client, "feed_page")
    via_http = client.post("/v1/hide/propose", json={
        "snapshot_id": sid, "request": "Hide all advertisements on the page"})

    snapshot = load_snapshot(DATA / "snapshots" / "feed_page")
    direct = direct_propose("Hide all advertisements on the page",
                            build_index(snapshot), replay_gateway())
    assert via_http.json() == serialize.hide_proposal(direct)


def test_concurrent_guide_requests_one_success():
    slow_release = threading.Event()

    class SlowGateway(ScriptedGateway):
        def complete(self, request):
            slow_release.wait(timeout=5)
            return super().complete(request)

    step = json.dumps({
        "step": 1, "instruction": "Click Subscribe",
        "highlight": {"index": 4, "text": "Subscribe"},
        "waitFor": "click", "isLastStep": True, "nextStepHint": "",
    })
    client = client_for(SlowGateway([step]))
    sid = upload(client, "video_page")
    start = client.post("/v1/guide/start", json={"query": "q", "snapshot_id": sid})
    session_id = start.json()["session_id"]

    statuses = []
    lock = threading.Lock()

    def hit():
        response = client.post(f"/v1/guide/{session_id}/next")
        with lock:
            statuses.append(response.status_code)

    threads = [threading.Thread(target=hit) for _ in range(4)]
    for t in threads:
        t.start()
    import time
    time.sleep(0.3)  # let one request take the lock and sit in the gateway
    slow_release.set()
    for t in threads:
        t.join()
    assert sorted(statuses) == [200, 409, 409, 409]


def test_error_mapping_totality():
    import pageguide.errors as errors_module

    def subclasses(klass):
        out = set()
        for sub in klass.__subclasses__():
            out.add(sub)
            out |= subclasses(sub)
        return out

    for exc_type in subclasses(PageGuideError) | {PageGuideError}:
        if exc_type.__module__ != "pageguide.errors":
            continue  # test-local helpers subclass engine errors too
        try:
            instance = exc_type("x")
        except TypeError:
            instance = exc_type(500, "x")  # UpstreamError-style signature
        status = status_for(instance)
        assert 400 <= status <= 599
        assert isinstance(instance.code, str) and instance.code


def test_idle_session_expires():
    client = client_for(replay_gateway())
    sid = upload(client, "video_page")
    start = client.post("/v1/guide/start", json={
        "query": "How do I report this video?", "snapshot_id": sid})
    session_id = start.json()["session_id"]
    engine = client.app.state.engine
    engine.sessions[session_id].last_used -= 10_000  # well past the TTL
    response = client.post(f"/v1/guide/{session_id}/next")
    assert response.status_code == 404


def test_handshake_file(tmp_path):
    target = tmp_path / "nested" / "handshake.json"
    write_handshake(target, 8787, "s3cret")
    payload = json.loads(target.read_text())
    assert payload == {"port": 8787, "secret": "s3cret"}
