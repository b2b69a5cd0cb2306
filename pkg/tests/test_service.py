"""HTTP labeling service: endpoint contract, status codes, concurrency,
and the static UI mount."""
from __future__ import annotations

import json
import threading
from concurrent.futures import ThreadPoolExecutor

import httpx
import pytest

from needminer.labeling import LabelStore
from needminer.service import create_server


@pytest.fixture
def service(tmp_path):
    store = LabelStore(
        items=[(f"i{k:03d}", f"text {k}") for k in range(5)],
        votes_path=tmp_path / "votes.jsonl",
    )
    ui = tmp_path / "ui"
    ui.mkdir()
    (ui / "index.html").write_text("<!doctype html><title>labeler</title>", encoding="utf-8")
    (ui / "app.js").write_text("export {};", encoding="utf-8")
    (tmp_path / "secret.txt").write_text("outside the bundle", encoding="utf-8")

    server = create_server(store, host="127.0.0.1", port=0, ui_dir=ui)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    base = f"http://127.0.0.1:{server.server_address[1]}"
    with httpx.Client(base_url=base, timeout=5.0) as client:
        yield client, store
    server.shutdown()
    server.server_close()
    thread.join(timeout=5)


def post_vote(client: httpx.Client, item_id: str, labeler: str, has_need: bool) -> httpx.Response:
    return client.post("/api/votes", json={"item_id": item_id, "labeler": labeler, "has_need": has_need})


def test_next_item_returns_item_then_204_when_exhausted(service):
    client, _ = service
    response = client.get("/api/items/next", params={"labeler": "ann"})
    assert response.status_code == 200
    payload = response.json()
    assert payload == {"item_id": "i000", "text": "text 0"}

    for k in range(5):
        assert post_vote(client, f"i{k:03d}", "ann", False).status_code == 201
    assert client.get("/api/items/next", params={"labeler": "ann"}).status_code == 204


def test_next_item_requires_labeler_param(service):
    client, _ = service
    assert client.get("/api/items/next").status_code == 400


def test_vote_status_codes(service):
    client, _ = service
    created = post_vote(client, "i000", "ann", True)
    assert created.status_code == 201
    assert created.json() == {"verdict": "pending", "vote_count": 1}

    assert post_vote(client, "i000", "ann", True).status_code == 409
    assert post_vote(client, "i000", "ann", True).json()["error"] == "DuplicateVote"

    post_vote(client, "i000", "ben", True)
    final = post_vote(client, "i000", "cara", False)
    assert final.json() == {"verdict": "need", "vote_count": 3}

    full = post_vote(client, "i000", "dave", True)
    assert (full.status_code, full.json()["error"]) == (409, "ItemComplete")

    missing = post_vote(client, "nope", "ann", True)
    assert (missing.status_code, missing.json()["error"]) == (404, "UnknownItem")


def test_vote_validation_rejects_bad_bodies(service):
    client, _ = service
    bad = [
        {"item_id": "i000", "labeler": "ann"},                     # no has_need
        {"item_id": "i000", "labeler": "ann", "has_need": "yes"},  # not boolean
        {"item_id": "i000", "labeler": "", "has_need": True},      # empty labeler
    ]
    for payload in bad:
        assert client.post("/api/votes", json=payload).status_code == 400
    raw = client.post("/api/votes", content=b"not json",
                      headers={"Content-Type": "application/json"})
    assert raw.status_code == 400


def test_progress_endpoint_tracks_votes(service):
    client, _ = service
    post_vote(client, "i000", "ann", True)
    post_vote(client, "i001", "ann", False)
    post_vote(client, "i000", "ben", True)
    progress = client.get("/api/progress").json()
    assert progress["items_total"] == 5
    assert progress["completed"] == 0
    assert progress["pending"] == 5
    assert progress["votes_total"] == 3
    assert progress["per_labeler"] == {"ann": 2, "ben": 1}


def test_export_endpoint_streams_completed_items(service):
    client, _ = service
    assert client.get("/api/export").text == ""
    for labeler, flag in (("ann", True), ("ben", True), ("cara", False)):
        post_vote(client, "i002", labeler, flag)
    body = client.get("/api/export")
    assert body.headers["content-type"].startswith("application/x-ndjson")
    rows = [json.loads(line) for line in body.text.splitlines()]
    assert rows == [{"id": "i002", "text": "text 2", "verdict": "need"}]


def test_parallel_votes_on_one_item_never_exceed_capacity(service):
    client, _ = service
    labelers = [f"L{k}" for k in range(12)]
    with ThreadPoolExecutor(max_workers=12) as pool:
        responses = list(pool.map(lambda l: post_vote(client, "i003", l, True), labelers))
    codes = sorted(r.status_code for r in responses)
    assert codes.count(201) == 3
    assert codes.count(409) == 9
    progress = client.get("/api/progress").json()
    assert progress["votes_total"] == 3


def test_ui_bundle_served_with_content_types(service):
    client, _ = service
    index = client.get("/ui/")
    assert index.status_code == 200
    assert index.headers["content-type"].startswith("text/html")
    assert "labeler" in index.text
    assert client.get("/ui").status_code == 200
    assert client.get("/").status_code == 200
    script = client.get("/ui/app.js")
    assert script.headers["content-type"].startswith("text/javascript")


def test_ui_requests_cannot_escape_bundle_dir(service):
    client, _ = service
    for path in ("/ui/../secret.txt", "/ui/%2e%2e/secret.txt", "/ui/missing.js"):
        assert client.get(path).status_code == 404


def test_unknown_routes_are_404(service):
    client, _ = service
    assert client.get("/api/nope").status_code == 404
    assert client.post("/api/items/next").status_code == 404


def test_votes_persist_across_restart(service, tmp_path):
    client, store = service
    post_vote(client, "i000", "ann", True)
    replayed = LabelStore(
        items=[(f"i{k:03d}", f"text {k}") for k in range(5)],
        votes_path=tmp_path / "votes.jsonl",
    )
    assert replayed.aggregate("i000").vote_count == 1
