import json
import threading

import pytest

from meshqa.errors import (
    DeviceIncompatible,
    DuplicateVote,
    OutOfOrder,
    PlaybackIncomplete,
    SessionIncomplete,
)
from meshqa.stats import load_votes_jsonl, screen_golden
from meshqa.study import Playlist, PlaylistItem, StudyService, load_playlists, serve_http
from meshqa.study.service import _build_slots

GOOD_DEVICE = {"width": 1920, "height": 1080, "fullscreen": True}


def make_playlist(pid=0, n_items=30, n_training=5, strict=True):
    items = [
        PlaylistItem(f"p{pid}_t{i:02d}", f"ref{i}.mp4", f"dist{i}.mp4", model_id=f"m{i // 2}")
        for i in range(n_items)
    ]
    training = [
        PlaylistItem(f"p{pid}_train{i}", f"tr{i}.mp4", f"td{i}.mp4", expected_score=i + 1)
        for i in range(n_training)
    ]
    return Playlist(
        playlist_id=pid,
        items=items,
        training=training,
        golden_poor=PlaylistItem(f"p{pid}_gupoor", "gp_ref.mp4", "gp_dist.mp4"),
        golden_high=PlaylistItem(f"p{pid}_guhigh", "gh_ref.mp4", "gh_dist.mp4"),
        repeat_stimulus_id=items[3].stimulus_id,
        strict=strict,
    )


class FakeClock:
    def __init__(self, t0=1000.0):
        self.now = t0

    def __call__(self):
        return self.now

    def advance(self, seconds):
        self.now += seconds


def make_service(tmp_path, n_playlists=3, **kw):
    playlists = {i: make_playlist(i) for i in range(n_playlists)}
    clock = FakeClock()
    service = StudyService(
        playlists, str(tmp_path / "events.jsonl"), secret="hunter2", clock=clock, **kw
    )
    return service, clock


ATTENTIVE_SCORES = {"poor": 1, "high": 5, "rep1": 4, "rep2": 4, None: 3}


def run_full_session(service, clock):
    view = service.create_session(GOOD_DEVICE)
    service.start_rating(view["session_id"])
    roles = [s["golden_role"] for s in service.sessions[view["session_id"]].slots]
    for slot, item in enumerate(view["slots"]):
        clock.advance(9.0)
        score = ATTENTIVE_SCORES[roles[slot]]
        service.submit_vote(view["session_id"], slot, item["stimulus_id"], score, True, 500)
    return service.complete_session(view["session_id"])["code"], view


def test_device_gate():
    playlists = {0: make_playlist(0)}
    service = StudyService(playlists, "/tmp/_unused_events.jsonl", secret="x")
    with pytest.raises(DeviceIncompatible):
        service.create_session({"width": 1366, "height": 768, "fullscreen": True})
    with pytest.raises(DeviceIncompatible):
        service.create_session({"width": 1920, "height": 1080, "fullscreen": False})


def test_session_starts_in_training(tmp_path):
    service, _ = make_service(tmp_path)
    view = service.create_session(GOOD_DEVICE)
    assert view["state"] == "training"
    assert len(view["slots"]) == 33
    assert "golden_role" not in view["slots"][0]  # roles are invisible to clients


def test_assignment_prefers_least_loaded(tmp_path):
    service, clock = make_service(tmp_path, n_playlists=3)
    seen = [service.create_session(GOOD_DEVICE)["playlist_id"] for _ in range(6)]
    assert seen == [0, 1, 2, 0, 1, 2]


def test_assignment_balanced_after_completions(tmp_path):
    service, clock = make_service(tmp_path, n_playlists=3)
    counts = {0: 0, 1: 0, 2: 0}
    for _ in range(7):
        _, view = run_full_session(service, clock)
        counts[view["playlist_id"]] += 1
    assert max(counts.values()) - min(counts.values()) <= 1


def test_expired_sessions_release_slots(tmp_path):
    service, clock = make_service(tmp_path, n_playlists=2, session_ttl=60.0)
    a = service.create_session(GOOD_DEVICE)
    b = service.create_session(GOOD_DEVICE)
    assert {a["playlist_id"], b["playlist_id"]} == {0, 1}
    clock.advance(61.0)
    c = service.create_session(GOOD_DEVICE)
    assert c["playlist_id"] == 0  # both released; lowest id wins


def test_golden_slot_placement(tmp_path):
    service, _ = make_service(tmp_path)
    for trial in range(20):
        view = service.create_session(GOOD_DEVICE)
        session = service.sessions[view["session_id"]]
        roles = {s["golden_role"]: i for i, s in enumerate(session.slots) if s["golden_role"]}
        assert set(roles) == {"poor", "high", "rep1", "rep2"}
        gu_slots = sorted(roles[r] for r in ("poor", "high", "rep2"))
        assert gu_slots[0] != 0
        assert gu_slots[1] - gu_slots[0] >= 2 and gu_slots[2] - gu_slots[1] >= 2
        assert roles["rep1"] < roles["rep2"]
        rep_id = session.slots[roles["rep1"]]["stimulus_id"]
        assert session.slots[roles["rep2"]]["stimulus_id"] == rep_id


def test_vote_ordering_rules(tmp_path):
    service, clock = make_service(tmp_path)
    view = service.create_session(GOOD_DEVICE)
    sid = view["session_id"]
    with pytest.raises(OutOfOrder):  # still in training
        service.submit_vote(sid, 0, view["slots"][0]["stimulus_id"], 3, True)
    service.start_rating(sid)
    clock.advance(9.0)
    ack = service.submit_vote(sid, 0, view["slots"][0]["stimulus_id"], 4, True)
    assert ack == {"ok": True, "next_slot": 1}
    with pytest.raises(OutOfOrder):  # slot 2 while slot 1 pending
        service.submit_vote(sid, 2, view["slots"][2]["stimulus_id"], 3, True)
    with pytest.raises(DuplicateVote):  # slot 0 again
        service.submit_vote(sid, 0, view["slots"][0]["stimulus_id"], 3, True)
    with pytest.raises(OutOfOrder):  # right slot, wrong stimulus
        clock.advance(9.0)
        service.submit_vote(sid, 1, "nonsense", 3, True)


def test_playback_enforcement(tmp_path):
    service, clock = make_service(tmp_path)
    view = service.create_session(GOOD_DEVICE)
    sid = view["session_id"]
    service.start_rating(sid)
    clock.advance(9.0)
    with pytest.raises(PlaybackIncomplete):  # client admits incomplete playback
        service.submit_vote(sid, 0, view["slots"][0]["stimulus_id"], 3, False)
    service.submit_vote(sid, 0, view["slots"][0]["stimulus_id"], 3, True)
    clock.advance(3.0)  # too fast for the server-side 8 s check
    with pytest.raises(PlaybackIncomplete):
        service.submit_vote(sid, 1, view["slots"][1]["stimulus_id"], 3, True)


def test_completion_code_deterministic(tmp_path):
    service, clock = make_service(tmp_path)
    code, view = run_full_session(service, clock)
    assert len(code) == 12
    assert all(c in "0123456789abcdef" for c in code)
    again = service.complete_session(view["session_id"])
    assert again["code"] == code

    other = StudyService(
        {0: make_playlist(0)}, str(tmp_path.parent / "x.jsonl"), secret="different"
    )
    import hmac as hmac_mod
    import hashlib

    ours = hmac_mod.new(b"hunter2", view["session_id"].encode(), hashlib.sha256).hexdigest()[:12]
    assert code == ours


def test_incomplete_session_rejected(tmp_path):
    service, clock = make_service(tmp_path)
    view = service.create_session(GOOD_DEVICE)
    service.start_rating(view["session_id"])
    clock.advance(9.0)
    service.submit_vote(view["session_id"], 0, view["slots"][0]["stimulus_id"], 3, True)
    with pytest.raises(SessionIncomplete):
        service.complete_session(view["session_id"])


def test_export_round_trips_into_stats(tmp_path):
    service, clock = make_service(tmp_path, n_playlists=1)
    for _ in range(2):
        run_full_session(service, clock)
    lines = service.export_jsonl().strip().splitlines()
    assert len(lines) == 66  # 2 sessions x 33 votes
    record = json.loads(lines[0])
    assert set(record) == {
        "session_id", "playlist_id", "slot", "stimulus_id",
        "score", "golden_role", "latency_ms", "timestamp",
    }
    matrix = load_votes_jsonl(lines)
    assert len(matrix.participants()) == 2
    assert screen_golden(matrix) == set()  # the synthetic raters are attentive
    playlist_filtered = service.export_jsonl(playlist_id=99)
    assert playlist_filtered == ""


def test_crash_recovery_loses_no_acknowledged_vote(tmp_path):
    service, clock = make_service(tmp_path, n_playlists=1)
    view = service.create_session(GOOD_DEVICE)
    sid = view["session_id"]
    service.start_rating(sid)
    acked = []
    for slot in range(10):
        clock.advance(9.0)
        service.submit_vote(sid, slot, view["slots"][slot]["stimulus_id"], 2, True)
        acked.append(slot)
    # simulate a hard crash: drop the object without any shutdown path
    del service

    revived = StudyService(
        {0: make_playlist(0)}, str(tmp_path / "events.jsonl"), secret="hunter2",
        clock=clock,
    )
    records = list(revived.export_votes())
    assert [r["slot"] for r in records] == acked
    session = revived.sessions[sid]
    assert session.state == "rating"
    assert session.expected_slot == 10
    # the revived service accepts the next in-order vote
    clock.advance(9.0)
    ack = revived.submit_vote(sid, 10, view["slots"][10]["stimulus_id"], 3, True)
    assert ack["ok"]


def test_torn_tail_line_ignored(tmp_path):
    service, clock = make_service(tmp_path, n_playlists=1)
    view = service.create_session(GOOD_DEVICE)
    service.start_rating(view["session_id"])
    clock.advance(9.0)
    service.submit_vote(view["session_id"], 0, view["slots"][0]["stimulus_id"], 3, True)
    path = tmp_path / "events.jsonl"
    with open(path, "a", encoding="utf-8") as fh:
        fh.write('{"type": "vote", "session_id": "s000')  # torn write
    revived = StudyService({0: make_playlist(0)}, str(path), secret="hunter2", clock=clock)
    assert len(list(revived.export_votes())) == 1


def test_playlist_validation():
    with pytest.raises(ValueError):
        make_playlist(n_items=29)
    with pytest.raises(ValueError):
        make_playlist(n_training=4)
    items = [
        PlaylistItem(f"t{i}", "r.mp4", "d.mp4", model_id="same_model") for i in range(30)
    ]
    with pytest.raises(ValueError):
        Playlist(
            playlist_id=0,
            items=items,
            training=[PlaylistItem(f"tr{i}", "r", "d") for i in range(5)],
            golden_poor=PlaylistItem("gp", "r", "d"),
            golden_high=PlaylistItem("gh", "r", "d"),
            repeat_stimulus_id="t0",
        )


def test_load_playlists_dir(tmp_path):
    playlist = make_playlist(7)
    raw = {
        "id": 7,
        "items": [
            {"stimulus_id": i.stimulus_id, "ref_media": i.ref_media,
             "dist_media": i.dist_media, "model_id": i.model_id}
            for i in playlist.items
        ],
        "training": [
            {"stimulus_id": i.stimulus_id, "ref_media": i.ref_media,
             "dist_media": i.dist_media, "expected_score": i.expected_score}
            for i in playlist.training
        ],
        "golden": {
            "poor": {"stimulus_id": "gp", "ref_media": "r", "dist_media": "d"},
            "high": {"stimulus_id": "gh", "ref_media": "r", "dist_media": "d"},
            "repeat_stimulus_id": playlist.repeat_stimulus_id,
        },
    }
    (tmp_path / "playlist7.json").write_text(json.dumps(raw))
    loaded = load_playlists(tmp_path)
    assert list(loaded) == [7]
    assert loaded[7].repeat_stimulus_id == playlist.repeat_stimulus_id


def test_http_round_trip(tmp_path):
    import requests

    media = tmp_path / "media"
    media.mkdir()
    (media / "clip.mp4").write_bytes(b"notavideo")
    service, clock = make_service(tmp_path, n_playlists=1, min_view_seconds=0.0)
    server = serve_http(service, str(media), port=0)
    port = server.server_address[1]
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    base = f"http://127.0.0.1:{port}"
    try:
        r = requests.post(f"{base}/api/session", json={"device": GOOD_DEVICE})
        assert r.status_code == 200
        view = r.json()
        sid = view["session_id"]

        r = requests.post(
            f"{base}/api/session", json={"device": {"width": 800, "height": 600, "fullscreen": True}}
        )
        assert r.status_code == 403
        assert r.json()["error"] == "DeviceIncompatible"

        r = requests.get(f"{base}/api/playlist/0")
        assert r.status_code == 200
        assert len(r.json()["items"]) == 30
        assert len(r.json()["training"]) == 5

        assert requests.post(f"{base}/api/session/{sid}/start").status_code == 200
        for slot, item in enumerate(view["slots"]):
            r = requests.post(
                f"{base}/api/vote",
                json={
                    "session_id": sid,
                    "slot": slot,
                    "stimulus_id": item["stimulus_id"],
                    "score": 4,
                    "playback_complete": True,
                    "latency_ms": 1200,
                },
            )
            assert r.status_code == 200, r.text
        r = requests.post(f"{base}/api/session/{sid}/complete")
        assert r.status_code == 200
        assert len(r.json()["code"]) == 12

        r = requests.get(f"{base}/api/export?playlist=0")
        assert r.status_code == 200
        assert len(r.text.strip().splitlines()) == 33

        r = requests.get(f"{base}/media/clip.mp4")
        assert r.status_code == 200 and r.content == b"notavideo"
        assert "max-age" in r.headers.get("Cache-Control", "")
        assert requests.get(f"{base}/media/../events.jsonl").status_code in (404, 400)
    finally:
        server.shutdown()
