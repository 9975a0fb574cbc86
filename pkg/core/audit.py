"""
Structured run log — records experiment, trial, sweep and verify events to a
JSON-lines file under the output directory.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from core.models import RunEntry, RunEvent

LOG_NAME = "run_log.jsonl"


class RunLogger:
    """Append-only run trail stored as newline-delimited JSON.  `log_dir=None` keeps it in memory."""

    def __init__(self, log_dir: str | Path | None = None):
        self._file: Path | None = None
        if log_dir is not None:
            directory = Path(log_dir)
            directory.mkdir(parents=True, exist_ok=True)
            self._file = directory / LOG_NAME
        self._entries: list[RunEntry] = []

    @property
    def path(self) -> Path | None:
        return self._file

    # ── write ──────────────────────────────────────────────────────

    def log(
        self,
        event: RunEvent | str,
        algo: str = "",
        env: str = "",
        trial: int | None = None,
        details: dict[str, Any] | None = None,
        error: str | None = None,
        duration_ms: int | None = None,
    ) -> RunEntry:
        entry = RunEntry(
            event=event.value if isinstance(event, RunEvent) else str(event),
            algo=algo,
            env=env,
            trial=trial,
            details=dict(details or {}),
            error=error,
            duration_ms=duration_ms,
        )
        self._entries.append(entry)
        self._persist(entry)
        return entry

    def _persist(self, entry: RunEntry) -> None:
        if self._file is None:
            return
        with open(self._file, "a", encoding="utf-8") as f:
            f.write(json.dumps(entry.to_dict(), ensure_ascii=False) + "\n")

    def count(self, event: RunEvent | str | None = None) -> int:
        if event is None:
            return len(self._entries)
        name = event.value if isinstance(event, RunEvent) else str(event)
        return sum(1 for e in self._entries if e.event == name)
