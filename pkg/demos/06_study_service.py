"""A complete rating-session round trip against the study service over HTTP.

Starts the service in-process, plays a scripted participant through device
check, training, 33 rated items and completion, then pulls the vote export
back into the stats toolchain.
"""

import json
import tempfile
import threading
import time

import requests

from meshqa.stats import load_votes_jsonl, mos_table
from meshqa.study import Playlist, PlaylistItem, StudyService, serve_http

playlist = Playlist(
    playlist_id=0,
    items=[
        PlaylistItem(f"stim{i:02d}", f"media/ref{i}.mp4", f"media/dist{i}.mp4",
                     model_id=f"model{i // 2}")
        for i in range(30)
    ],
    training=[
        PlaylistItem(f"train{i}", f"media/tr{i}.mp4", f"media/td{i}.mp4",
                     expected_score=i + 1)
        for i in range(5)
    ],
    golden_poor=PlaylistItem("gu_poor", "media/gp_r.mp4", "media/gp_d.mp4"),
    golden_high=PlaylistItem("gu_high", "media/gh_r.mp4", "media/gh_d.mp4"),
    repeat_stimulus_id="stim07",
)

store = tempfile.NamedTemporaryFile(suffix=".jsonl", delete=False)
service = StudyService({0: playlist}, store.name, secret="demo-secret",
                       min_view_seconds=0.0)  # no 8 s waits in a demo
server = serve_http(service, media_dir=None, port=0)
port = server.server_address[1]
threading.Thread(target=server.serve_forever, daemon=True).start()
base = f"http://127.0.0.1:{port}"
print(f"service listening on {base}")

# --- the participant ----------------------------------------------------------------

bad = requests.post(f"{base}/api/session",
                    json={"device": {"width": 1366, "height": 768, "fullscreen": True}})
print(f"small screen rejected: HTTP {bad.status_code} {bad.json()['error']}")

session = requests.post(
    f"{base}/api/session",
    json={"device": {"width": 1920, "height": 1080, "fullscreen": True}},
).json()
sid = session["session_id"]
print(f"session {sid}: playlist {session['playlist_id']}, "
      f"{len(session['slots'])} slots, state {session['state']}")

requests.post(f"{base}/api/session/{sid}/start")
for slot, item in enumerate(session["slots"]):
    ack = requests.post(f"{base}/api/vote", json={
        "session_id": sid,
        "slot": slot,
        "stimulus_id": item["stimulus_id"],
        "score": 3 + (slot % 3) - 1,
        "playback_complete": True,
        "latency_ms": 2500,
    })
    assert ack.status_code == 200, ack.text
code = requests.post(f"{base}/api/session/{sid}/complete").json()["code"]
print(f"completion code: {code}")

# --- operator side: export feeds the stats module -------------------------------------

export = requests.get(f"{base}/api/export?playlist=0").text
matrix = load_votes_jsonl(export.splitlines())
roles = [json.loads(line)["golden_role"] for line in export.splitlines()]
print(f"exported {len(export.splitlines())} votes "
      f"({sum(1 for r in roles if r)} golden-annotated)")
print(f"first MOS rows: {[(r.stimulus_id, r.mos) for r in mos_table(matrix)[:3]]}")

server.shutdown()
print("done.")
