"""Rating-session service: assignment, vote capture, recovery, export.

All mutations happen under one lock and reach the append-only store (flushed
and fsynced) before the caller sees an acknowledgment, so a crash never loses
an acknowledged vote. Golden-unit roles stay server-side; the payloads a
participant's client sees never distinguish them from test items.
"""

import hmac
import hashlib
import json
import mimetypes
import os
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlparse

import numpy as np

from ..errors import (
    DeviceIncompatible,
    DuplicateVote,
    OutOfOrder,
    PlaybackIncomplete,
    SessionIncomplete,
)
from .store import EventStore

MIN_WIDTH = 1920
MIN_HEIGHT = 1080
MIN_VIEW_SECONDS = 8.0
SESSION_TTL_SECONDS = 3600.0


class _Session:
    def __init__(self, session_id, playlist_id, slots, created_at):
        self.session_id = session_id
        self.playlist_id = playlist_id
        self.slots = slots  # [{stimulus_id, ref_media, dist_media, golden_role}]
        self.state = "training"
        self.expected_slot = 0
        self.slot_issued_at = created_at
        self.last_activity = created_at
        self.completion_code = None

    def public(self):
        return {
            "session_id": self.session_id,
            "playlist_id": self.playlist_id,
            "state": self.state,
            "expected_slot": self.expected_slot,
            "slots": [
                {k: s[k] for k in ("stimulus_id", "ref_media", "dist_media")}
                for s in self.slots
            ],
        }


def _build_slots(playlist, rng):
    """Shuffle test items and inject the three golden units.

    The injected slots are never first, never adjacent to each other, and the
    repeated showing lands after the designated test item's own slot.
    """
    perm = rng.permutation(len(playlist.items))
    base = []
    for idx in perm:
        item = playlist.items[int(idx)]
        role = "rep1" if item.stimulus_id == playlist.repeat_stimulus_id else None
        base.append(
            {
                "stimulus_id": item.stimulus_id,
                "ref_media": item.ref_media,
                "dist_media": item.dist_media,
                "golden_role": role,
            }
        )
    injected = [
        ("poor", playlist.golden_poor),
        ("high", playlist.golden_high),
        ("rep2", playlist.repeat_item),
    ]
    for _ in range(1000):
        seq = list(base)
        positions = {}
        order = rng.permutation(3)
        for k in order:
            role, item = injected[int(k)]
            pos = int(rng.integers(1, len(seq) + 1))
            seq.insert(
                pos,
                {
                    "stimulus_id": item.stimulus_id,
                    "ref_media": item.ref_media,
                    "dist_media": item.dist_media,
                    "golden_role": role,
                },
            )
        positions = {s["golden_role"]: i for i, s in enumerate(seq) if s["golden_role"]}
        gu_slots = sorted(positions[r] for r in ("poor", "high", "rep2"))
        if gu_slots[0] == 0:
            continue
        if gu_slots[1] - gu_slots[0] < 2 or gu_slots[2] - gu_slots[1] < 2:
            continue
        if positions["rep2"] <= positions["rep1"]:
            continue
        return seq
    raise RuntimeError("could not place golden units; playlist too short?")


class StudyService:
    def __init__(
        self,
        playlists,
        store_path,
        secret,
        clock=time.time,
        seed=0,
        min_view_seconds=MIN_VIEW_SECONDS,
        session_ttl=SESSION_TTL_SECONDS,
    ):
        self.playlists = dict(playlists)
        self.secret = secret
        self.clock = clock
        self.seed = seed
        self.min_view_seconds = min_view_seconds
        self.session_ttl = session_ttl
        self.store = EventStore(store_path)
        self.sessions = {}
        self.vote_records = []
        self._counter = 0
        self._lock = threading.Lock()
        self._replay()

    # --- recovery -------------------------------------------------------------

    def _replay(self):
        for event in self.store.replay():
            kind = event.get("type")
            if kind == "session_created":
                session = _Session(
                    event["session_id"],
                    event["playlist_id"],
                    event["slots"],
                    event["time"],
                )
                self.sessions[session.session_id] = session
                self._counter += 1
            elif kind == "session_started":
                session = self.sessions.get(event["session_id"])
                if session:
                    session.state = "rating"
                    session.slot_issued_at = event["time"]
                    session.last_activity = event["time"]
            elif kind == "vote":
                session = self.sessions.get(event["session_id"])
                if session:
                    session.expected_slot = event["slot"] + 1
                    session.slot_issued_at = event["time"]
                    session.last_activity = event["time"]
                self.vote_records.append(
                    {k: event[k] for k in _VOTE_FIELDS if k in event}
                )
            elif kind == "session_completed":
                session = self.sessions.get(event["session_id"])
                if session:
                    session.state = "complete"
                    session.completion_code = event["code"]
                    session.last_activity = event["time"]

    # --- helpers ----------------------------------------------------------------

    def _expired(self, session, now):
        return session.state != "complete" and now - session.last_activity > self.session_ttl

    def _assignment_counts(self, now):
        counts = {pid: 0 for pid in self.playlists}
        for session in self.sessions.values():
            if session.playlist_id in counts and not self._expired(session, now):
                counts[session.playlist_id] += 1
        return counts

    def _session(self, session_id):
        session = self.sessions.get(session_id)
        if session is None:
            raise KeyError(f"unknown session {session_id!r}")
        return session

    # --- operations ----------------------------------------------------------------

    def create_session(self, device_report):
        with self._lock:
            width = int(device_report.get("width", 0))
            height = int(device_report.get("height", 0))
            fullscreen = bool(device_report.get("fullscreen", False))
            if width < MIN_WIDTH or height < MIN_HEIGHT:
                raise DeviceIncompatible(
                    f"screen {width}x{height} is below {MIN_WIDTH}x{MIN_HEIGHT}"
                )
            if not fullscreen:
                raise DeviceIncompatible("fullscreen mode is required")
            now = self.clock()
            counts = self._assignment_counts(now)
            playlist_id = min(counts, key=lambda pid: (counts[pid], pid))
            playlist = self.playlists[playlist_id]
            session_id = f"s{self._counter:06d}"
            self._counter += 1
            rng = np.random.default_rng((self.seed, int(session_id[1:])))
            slots = _build_slots(playlist, rng)
            session = _Session(session_id, playlist_id, slots, now)
            self.store.append(
                {
                    "type": "session_created",
                    "session_id": session_id,
                    "playlist_id": playlist_id,
                    "slots": slots,
                    "device": {"width": width, "height": height, "fullscreen": fullscreen},
                    "time": now,
                }
            )
            self.sessions[session_id] = session
            return session.public()

    def start_rating(self, session_id):
        with self._lock:
            session = self._session(session_id)
            if session.state != "training":
                raise OutOfOrder(f"session is {session.state}, not training")
            now = self.clock()
            self.store.append({"type": "session_started", "session_id": session_id, "time": now})
            session.state = "rating"
            session.slot_issued_at = now
            session.last_activity = now
            return session.public()

    def submit_vote(self, session_id, slot, stimulus_id, score, playback_complete, latency_ms=0):
        with self._lock:
            session = self._session(session_id)
            if session.state != "rating":
                raise OutOfOrder(f"session is {session.state}, not rating")
            slot = int(slot)
            if slot < session.expected_slot:
                raise DuplicateVote(f"slot {slot} already voted")
            if slot > session.expected_slot:
                raise OutOfOrder(f"expected slot {session.expected_slot}, got {slot}")
            expected = session.slots[slot]
            if stimulus_id != expected["stimulus_id"]:
                raise OutOfOrder(
                    f"slot {slot} shows {expected['stimulus_id']!r}, not {stimulus_id!r}"
                )
            if not playback_complete:
                raise PlaybackIncomplete("client did not attest full playback")
            now = self.clock()
            if now - session.slot_issued_at < self.min_view_seconds:
                raise PlaybackIncomplete(
                    f"{now - session.slot_issued_at:.1f}s since item issue; "
                    f"need {self.min_view_seconds:.0f}s"
                )
            score = int(score)
            if not 1 <= score <= 5:
                raise ValueError(f"score {score} outside 1..5")
            record = {
                "session_id": session_id,
                "playlist_id": session.playlist_id,
                "slot": slot,
                "stimulus_id": stimulus_id,
                "score": score,
                "golden_role": expected["golden_role"],
                "latency_ms": int(latency_ms),
                "timestamp": now,
            }
            self.store.append(dict(record, type="vote", time=now, playback_complete=True))
            self.vote_records.append(record)
            session.expected_slot = slot + 1
            session.slot_issued_at = now
            session.last_activity = now
            next_slot = slot + 1 if slot + 1 < len(session.slots) else None
            return {"ok": True, "next_slot": next_slot}

    def complete_session(self, session_id):
        with self._lock:
            session = self._session(session_id)
            if session.state == "complete":
                return {"code": session.completion_code}
            if session.expected_slot < len(session.slots):
                missing = len(session.slots) - session.expected_slot
                raise SessionIncomplete(f"{missing} slot(s) still unrated")
            code = hmac.new(
                self.secret.encode("utf-8"), session_id.encode("utf-8"), hashlib.sha256
            ).hexdigest()[:12]
            now = self.clock()
            self.store.append(
                {"type": "session_completed", "session_id": session_id, "code": code, "time": now}
            )
            session.state = "complete"
            session.completion_code = code
            session.last_activity = now
            return {"code": code}

    def export_votes(self, playlist_id=None):
        with self._lock:
            records = list(self.vote_records)
        for record in records:
            if playlist_id is None or record["playlist_id"] == playlist_id:
                yield record

    def export_jsonl(self, playlist_id=None):
        return "".join(
            json.dumps(r, sort_keys=True) + "\n" for r in self.export_votes(playlist_id)
        )


_VOTE_FIELDS = (
    "session_id",
    "playlist_id",
    "slot",
    "stimulus_id",
    "score",
    "golden_role",
    "latency_ms",
    "timestamp",
)

_STATUS = {
    DeviceIncompatible: 403,
    OutOfOrder: 409,
    DuplicateVote: 409,
    PlaybackIncomplete: 409,
    SessionIncomplete: 409,
    KeyError: 404,
    ValueError: 400,
}


def make_handler(service, media_dir):
    class Handler(BaseHTTPRequestHandler):
        def log_message(self, *args):
            pass

        def _json(self, status, payload):
            body = json.dumps(payload).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def _error(self, exc):
            status = 500
            for klass, code in _STATUS.items():
                if isinstance(exc, klass):
                    status = code
                    break
            self._json(status, {"error": type(exc).__name__, "detail": str(exc)})

        def _body(self):
            length = int(self.headers.get("Content-Length", 0))
            if length == 0:
                return {}
            return json.loads(self.rfile.read(length))

        def do_POST(self):
            path = urlparse(self.path).path
            try:
                if path == "/api/session":
                    body = self._body()
                    self._json(200, service.create_session(body.get("device", body)))
                elif path.startswith("/api/session/") and path.endswith("/start"):
                    session_id = path.split("/")[3]
                    self._json(200, service.start_rating(session_id))
                elif path.startswith("/api/session/") and path.endswith("/complete"):
                    session_id = path.split("/")[3]
                    self._json(200, service.complete_session(session_id))
                elif path == "/api/vote":
                    body = self._body()
                    self._json(
                        200,
                        service.submit_vote(
                            body["session_id"],
                            body["slot"],
                            body["stimulus_id"],
                            body["score"],
                            body.get("playback_complete", False),
                            body.get("latency_ms", 0),
                        ),
                    )
                else:
                    self._json(404, {"error": "NotFound", "detail": path})
            except Exception as exc:  # mapped to HTTP statuses above
                self._error(exc)

        def do_GET(self):
            parsed = urlparse(self.path)
            path = parsed.path
            try:
                if path.startswith("/api/playlist/"):
                    playlist_id = int(path.rsplit("/", 1)[1])
                    playlist = service.playlists.get(playlist_id)
                    if playlist is None:
                        raise KeyError(f"unknown playlist {playlist_id}")
                    self._json(200, playlist.public())
                elif path == "/api/export":
                    query = parse_qs(parsed.query)
                    playlist_id = None
                    if "playlist" in query:
                        playlist_id = int(query["playlist"][0])
                    body = service.export_jsonl(playlist_id).encode("utf-8")
                    self.send_response(200)
                    self.send_header("Content-Type", "application/x-ndjson")
                    self.send_header("Content-Length", str(len(body)))
                    self.end_headers()
                    self.wfile.write(body)
                elif path.startswith("/media/"):
                    self._media(path[len("/media/") :])
                else:
                    self._json(404, {"error": "NotFound", "detail": path})
            except Exception as exc:
                self._error(exc)

        def _media(self, rel_path):
            if media_dir is None:
                raise KeyError("no media directory configured")
            full = os.path.realpath(os.path.join(media_dir, rel_path))
            root = os.path.realpath(media_dir)
            if not full.startswith(root + os.sep) or not os.path.isfile(full):
                raise KeyError(f"no media file {rel_path!r}")
            ctype = mimetypes.guess_type(full)[0] or "application/octet-stream"
            with open(full, "rb") as fh:
                body = fh.read()
            self.send_response(200)
            self.send_header("Content-Type", ctype)
            self.send_header("Content-Length", str(len(body)))
            self.send_header("Cache-Control", "public, max-age=86400, immutable")
            self.end_headers()
            self.wfile.write(body)

    return Handler


def serve_http(service, media_dir, port, host="127.0.0.1"):
    """Build the HTTP server; call serve_forever() (or run it in a thread)."""
    return ThreadingHTTPServer((host, port), make_handler(service, media_dir))
