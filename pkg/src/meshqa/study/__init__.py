from .playlist import Playlist, PlaylistItem, load_playlists
from .store import EventStore
from .service import StudyService, serve_http

__all__ = [
    "Playlist",
    "PlaylistItem",
    "load_playlists",
    "EventStore",
    "StudyService",
    "serve_http",
]
