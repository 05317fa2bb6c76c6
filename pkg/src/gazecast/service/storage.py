"""Atomic, immutable session persistence."""

from __future__ import annotations

import os
import re
import uuid
from pathlib import Path

_ID_PATTERN = re.compile(r"^[A-Za-z0-9_-]{1,64}$")


class SessionExistsError(Exception):
    """Stored sessions are immutable; re-upload with the same id is rejected."""


class InvalidSessionIdError(Exception):
    pass


class SessionStore:
    """One JSON document per session, written via temp-file + rename.

    A crashed write never leaves a partial session behind: the rename is
    the commit point.
    """

    def __init__(self, directory):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    def _path(self, session_id):
        if not _ID_PATTERN.match(session_id):
            raise InvalidSessionIdError(f"invalid session id {session_id!r}")
        return self.directory / f"{session_id}.json"

    def new_id(self):
        return uuid.uuid4().hex

    def exists(self, session_id):
        return self._path(session_id).exists()

    def save(self, session_id, raw):
        path = self._path(session_id)
        if path.exists():
            raise SessionExistsError(session_id)
        tmp = path.with_suffix(".json.tmp")
        try:
            with open(tmp, "wb") as handle:
                handle.write(raw)
                handle.flush()
                os.fsync(handle.fileno())
            os.replace(tmp, path)
        except OSError:
            tmp.unlink(missing_ok=True)
            raise
        return session_id

    def load(self, session_id):
        path = self._path(session_id)
        if not path.exists():
            raise KeyError(session_id)
        return path.read_bytes()

    def list_ids(self):
        return sorted(p.stem for p in self.directory.glob("*.json"))
