"""Utterance records and the JSON-lines manifest format.

A manifest holds one JSON object per line with the post-VAD utterance
fields; scored manifests add optional ``scores`` and ``verdicts`` blocks.
The format is text so fixtures stay hand-editable, and writers emit records
sorted by utterance id with sorted keys, which makes reruns byte-identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Optional, TextIO, Union

CHANNELS = ("caller", "agent")


class ManifestError(ValueError):
    """Malformed manifest line or duplicate/inconsistent ids."""


@dataclass(frozen=True)
class UtteranceRecord:
    utterance_id: str
    call_id: str
    channel: str
    speaker_id: str
    duration_seconds: float
    transcript: tuple[str, ...]

    def __post_init__(self):
        if self.channel not in CHANNELS:
            raise ManifestError(f"channel must be one of {CHANNELS}, got {self.channel!r}")
        if self.duration_seconds <= 0:
            raise ManifestError(f"duration must be positive, got {self.duration_seconds}")

    def with_transcript(self, tokens: Iterable[str]) -> "UtteranceRecord":
        return UtteranceRecord(
            utterance_id=self.utterance_id,
            call_id=self.call_id,
            channel=self.channel,
            speaker_id=self.speaker_id,
            duration_seconds=self.duration_seconds,
            transcript=tuple(tokens),
        )


@dataclass(frozen=True)
class ManifestEntry:
    """A record plus whatever scoring/filtering metadata has been attached."""

    record: UtteranceRecord
    scores: Optional[dict] = None
    verdicts: Optional[dict] = None


def _record_from_obj(obj: dict, lineno: int) -> UtteranceRecord:
    try:
        transcript = obj["transcript"]
        if isinstance(transcript, str):
            tokens = tuple(transcript.lower().split())
        else:
            tokens = tuple(str(t) for t in transcript)
        return UtteranceRecord(
            utterance_id=str(obj["utterance_id"]),
            call_id=str(obj["call_id"]),
            channel=str(obj["channel"]),
            speaker_id=str(obj["speaker_id"]),
            duration_seconds=float(obj["duration_seconds"]),
            transcript=tokens,
        )
    except KeyError as exc:
        raise ManifestError(f"line {lineno}: missing field {exc}") from exc


def read_manifest(source: Union[str, TextIO]) -> list[ManifestEntry]:
    """Parse a manifest document; rejects duplicate utterance ids."""
    text = source if isinstance(source, str) else source.read()
    entries: list[ManifestEntry] = []
    seen: set[str] = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ManifestError(f"line {lineno}: invalid JSON: {exc}") from exc
        record = _record_from_obj(obj, lineno)
        if record.utterance_id in seen:
            raise ManifestError(f"line {lineno}: duplicate utterance id {record.utterance_id!r}")
        seen.add(record.utterance_id)
        entries.append(
            ManifestEntry(record=record, scores=obj.get("scores"), verdicts=obj.get("verdicts"))
        )
    return entries


def entry_to_obj(entry: ManifestEntry) -> dict:
    record = entry.record
    obj = {
        "utterance_id": record.utterance_id,
        "call_id": record.call_id,
        "channel": record.channel,
        "speaker_id": record.speaker_id,
        "duration_seconds": record.duration_seconds,
        "transcript": " ".join(record.transcript),
    }
    if entry.scores is not None:
        obj["scores"] = entry.scores
    if entry.verdicts is not None:
        obj["verdicts"] = entry.verdicts
    return obj


def write_manifest(entries: Iterable[ManifestEntry], out: Optional[TextIO] = None) -> str:
    """Serialize entries sorted by utterance id, one JSON object per line."""
    ordered = sorted(entries, key=lambda e: e.record.utterance_id)
    lines = [json.dumps(entry_to_obj(e), sort_keys=True) for e in ordered]
    document = "\n".join(lines) + ("\n" if lines else "")
    if out is not None:
        out.write(document)
    return document
