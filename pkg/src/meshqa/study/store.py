"""Append-only JSON-lines event store with write-ahead acknowledgment.

Every mutation is one JSON object per line, flushed and fsynced before the
caller acknowledges anything to a client; recovery replays the file.
"""

import json
import os


class EventStore:
    def __init__(self, path):
        self.path = path
        self._fh = None

    def replay(self):
        if not os.path.exists(self.path):
            return []
        events = []
        with open(self.path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                try:
                    events.append(json.loads(line))
                except json.JSONDecodeError:
                    break  # torn tail write from a crash: ignore the remainder
        return events

    def append(self, event):
        if self._fh is None:
            self._fh = open(self.path, "a", encoding="utf-8")
        self._fh.write(json.dumps(event, sort_keys=True) + "\n")
        self._fh.flush()
        os.fsync(self._fh.fileno())

    def close(self):
        if self._fh is not None:
            self._fh.close()
            self._fh = None
