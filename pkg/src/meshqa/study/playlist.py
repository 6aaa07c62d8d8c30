"""Playlist definitions: test items, training items, golden units."""

import json
import os
from dataclasses import dataclass, field

TEST_ITEMS = 30
TRAINING_ITEMS = 5
MAX_MODEL_REPEATS = 2


@dataclass(frozen=True)
class PlaylistItem:
    stimulus_id: str
    ref_media: str
    dist_media: str
    model_id: str = ""
    expected_score: int = 0  # training items only

    @staticmethod
    def from_dict(raw):
        return PlaylistItem(
            stimulus_id=str(raw["stimulus_id"]),
            ref_media=raw.get("ref_media", ""),
            dist_media=raw.get("dist_media", ""),
            model_id=str(raw.get("model_id", "")),
            expected_score=int(raw.get("expected_score", 0)),
        )

    def public(self):
        return {
            "stimulus_id": self.stimulus_id,
            "ref_media": self.ref_media,
            "dist_media": self.dist_media,
        }


@dataclass
class Playlist:
    """Test items plus golden units: a very poor stimulus, a very high one,
    and one designated test item that is shown a second time."""

    playlist_id: int
    items: list
    training: list
    golden_poor: PlaylistItem
    golden_high: PlaylistItem
    repeat_stimulus_id: str
    strict: bool = field(default=True, compare=False)

    def __post_init__(self):
        if self.strict:
            if len(self.items) != TEST_ITEMS:
                raise ValueError(
                    f"playlist {self.playlist_id} has {len(self.items)} test items, needs {TEST_ITEMS}"
                )
            if len(self.training) != TRAINING_ITEMS:
                raise ValueError(
                    f"playlist {self.playlist_id} has {len(self.training)} training items, needs {TRAINING_ITEMS}"
                )
        ids = [item.stimulus_id for item in self.items]
        if len(set(ids)) != len(ids):
            raise ValueError(f"playlist {self.playlist_id} repeats a stimulus id")
        if self.repeat_stimulus_id not in ids:
            raise ValueError(
                f"repeat stimulus {self.repeat_stimulus_id!r} is not a test item"
            )
        counts = {}
        for item in self.items:
            if item.model_id:
                counts[item.model_id] = counts.get(item.model_id, 0) + 1
        over = {m: c for m, c in counts.items() if c > MAX_MODEL_REPEATS}
        if over:
            raise ValueError(f"source models repeated more than twice: {over}")

    @property
    def repeat_item(self):
        return next(i for i in self.items if i.stimulus_id == self.repeat_stimulus_id)

    def public(self):
        return {
            "playlist_id": self.playlist_id,
            "training": [
                dict(item.public(), expected_score=item.expected_score)
                for item in self.training
            ],
            "items": [item.public() for item in self.items],
        }

    @staticmethod
    def from_dict(raw, strict=True):
        golden = raw["golden"]
        return Playlist(
            playlist_id=int(raw["id"]),
            items=[PlaylistItem.from_dict(i) for i in raw["items"]],
            training=[PlaylistItem.from_dict(i) for i in raw["training"]],
            golden_poor=PlaylistItem.from_dict(golden["poor"]),
            golden_high=PlaylistItem.from_dict(golden["high"]),
            repeat_stimulus_id=str(golden["repeat_stimulus_id"]),
            strict=strict,
        )


def load_playlists(directory, strict=True):
    """Read every *.json playlist in a directory, keyed by id."""
    playlists = {}
    for name in sorted(os.listdir(directory)):
        if not name.endswith(".json"):
            continue
        with open(os.path.join(directory, name), "r", encoding="utf-8") as fh:
            playlist = Playlist.from_dict(json.load(fh), strict=strict)
        if playlist.playlist_id in playlists:
            raise ValueError(f"duplicate playlist id {playlist.playlist_id}")
        playlists[playlist.playlist_id] = playlist
    if not playlists:
        raise ValueError(f"no playlist files found in {directory}")
    return playlists
