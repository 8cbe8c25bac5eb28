"""HTTP curation service: review mined mistranscription candidates.

Curators page through pending candidates (frequency-ranked per channel),
accept one with a corrective replacement, or dismiss it as noise. Accepted
corrections append to the tab-separated rule store immediately, so a restart
replays an identical rule set; dismissals persist in a sidecar journal keyed
by mining-snapshot id, which lets a candidate resurface when a fresh
snapshot mines it again.

Endpoints (JSON bodies, errors carry {code, message}):

  GET  /candidates?channel=&page=&page_size=
  POST /candidates/{id}/accept   {"replacement": "...", "scope": "..."}
  POST /candidates/{id}/dismiss  {"note": "..."}
  GET  /rules/export
  GET  /stats
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import transforms

PENDING = "pending"
ACCEPTED = "accepted"
DISMISSED = "dismissed"


class CurationError(Exception):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message


@dataclass
class CurationItem:
    item_id: str
    channel: str
    candidate: transforms.Candidate
    status: str = PENDING
    correction: Optional[tuple[str, ...]] = None
    curator_note: str = ""


def load_snapshot(path: str) -> tuple[str, list[tuple[str, transforms.Candidate]]]:
    """Read a mining snapshot file; its id is a content hash."""
    with open(path, encoding="utf-8") as handle:
        text = handle.read()
    snapshot_id = hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]
    data = json.loads(text)
    candidates = []
    for obj in data["candidates"]:
        candidates.append(
            (
                obj["channel"],
                transforms.Candidate(
                    tokens=tuple(obj["tokens"]),
                    frequency=int(obj["frequency"]),
                    kind=obj.get("kind", transforms.KIND_FULL),
                    sample_utterance_ids=tuple(obj.get("sample_utterance_ids", ())),
                ),
            )
        )
    return snapshot_id, candidates


def write_snapshot(path: str, candidates: list[tuple[str, transforms.Candidate]]) -> None:
    data = {
        "candidates": [
            {
                "channel": channel,
                "tokens": list(c.tokens),
                "frequency": c.frequency,
                "kind": c.kind,
                "sample_utterance_ids": list(c.sample_utterance_ids),
            }
            for channel, c in candidates
        ]
    }
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(data, handle, indent=2, sort_keys=True)
        handle.write("\n")


class CurationStore:
    """All curation state and mutations; a single lock serializes writers."""

    def __init__(
        self,
        snapshot_id: str,
        candidates: list[tuple[str, transforms.Candidate]],
        rule_store_path: str,
        dismissals_path: Optional[str] = None,
    ):
        self.snapshot_id = snapshot_id
        self.rule_store_path = rule_store_path
        self.dismissals_path = dismissals_path
        self._lock = threading.Lock()
        self.rules: list[transforms.TransformRule] = []
        if os.path.exists(rule_store_path):
            with open(rule_store_path, encoding="utf-8") as handle:
                self.rules = transforms.read_rule_store(handle.read())

        ranked = sorted(candidates, key=lambda pair: (-pair[1].frequency, pair[0], pair[1].tokens))
        self.items: dict[str, CurationItem] = {}
        for index, (channel, candidate) in enumerate(ranked):
            item_id = f"c{index:04d}"
            self.items[item_id] = CurationItem(item_id=item_id, channel=channel, candidate=candidate)

        # Replay durable state: accepted patterns from the rule store,
        # dismissals from this snapshot's journal entries.
        known_patterns = {(r.channel_scope, r.pattern) for r in self.rules}
        for item in self.items.values():
            if any(pattern == item.candidate.tokens for _, pattern in known_patterns):
                item.status = ACCEPTED
                for rule in self.rules:
                    if rule.pattern == item.candidate.tokens:
                        item.correction = rule.replacement
                        break
        if dismissals_path and os.path.exists(dismissals_path):
            with open(dismissals_path, encoding="utf-8") as handle:
                for line in handle.read().splitlines():
                    if not line.strip():
                        continue
                    snap, item_id, note = line.split("\t", 2)
                    if snap == self.snapshot_id and item_id in self.items:
                        item = self.items[item_id]
                        if item.status == PENDING:
                            item.status = DISMISSED
                            item.curator_note = note

    def list_candidates(self, channel: Optional[str], page: int, page_size: int) -> dict:
        if page < 1 or page_size < 1:
            raise CurationError(400, "invalid_page", "page and page_size must be >= 1")
        if channel is not None and channel not in ("caller", "agent"):
            raise CurationError(400, "invalid_channel", f"unknown channel {channel!r}")
        pending = [
            item
            for item in self.items.values()
            if item.status == PENDING and (channel is None or item.channel == channel)
        ]
        pending.sort(key=lambda item: (-item.candidate.frequency, item.channel, item.candidate.tokens))
        start = (page - 1) * page_size
        return {
            "items": [self._item_json(item) for item in pending[start:start + page_size]],
            "page": page,
            "page_size": page_size,
            "total": len(pending),
        }

    @staticmethod
    def _item_json(item: CurationItem) -> dict:
        return {
            "id": item.item_id,
            "channel": item.channel,
            "pattern": " ".join(item.candidate.tokens),
            "tokens": list(item.candidate.tokens),
            "frequency": item.candidate.frequency,
            "kind": item.candidate.kind,
            "sample_utterance_ids": list(item.candidate.sample_utterance_ids),
            "status": item.status,
            "correction": " ".join(item.correction) if item.correction else None,
        }

    def _get_pending(self, item_id: str) -> CurationItem:
        item = self.items.get(item_id)
        if item is None:
            raise CurationError(404, "unknown_candidate", f"no candidate with id {item_id!r}")
        if item.status != PENDING:
            raise CurationError(409, "already_resolved", f"candidate {item_id} is {item.status}")
        return item

    def submit_correction(self, item_id: str, replacement: str, scope: str) -> dict:
        with self._lock:
            item = self._get_pending(item_id)
            tokens = tuple(replacement.lower().split())
            if not tokens:
                raise CurationError(400, "empty_replacement", "replacement must be non-empty")
            if tokens == item.candidate.tokens:
                raise CurationError(400, "replacement_equals_pattern", "replacement must differ from the pattern")
            if scope not in transforms.SCOPES:
                raise CurationError(400, "invalid_scope", f"scope must be one of {transforms.SCOPES}")
            duplicate = any(
                rule.pattern == item.candidate.tokens and rule.channel_scope == scope
                for rule in self.rules
            )
            if duplicate:
                raise CurationError(409, "duplicate_rule", "a rule for this pattern and scope already exists")
            try:
                rule = transforms.TransformRule(
                    pattern=item.candidate.tokens,
                    replacement=tokens,
                    channel_scope=scope,
                    provenance="curated",
                    created_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
                )
            except transforms.RuleError as exc:
                raise CurationError(400, "invalid_rule", str(exc)) from exc
            transforms.append_rule(self.rule_store_path, rule)
            self.rules.append(rule)
            item.status = ACCEPTED
            item.correction = tokens
            return {
                "rule": {
                    "pattern": " ".join(rule.pattern),
                    "replacement": " ".join(rule.replacement),
                    "channel_scope": rule.channel_scope,
                    "provenance": rule.provenance,
                },
                "candidate": self._item_json(item),
            }

    def dismiss(self, item_id: str, note: str) -> dict:
        with self._lock:
            item = self._get_pending(item_id)
            item.status = DISMISSED
            item.curator_note = note
            if self.dismissals_path:
                with open(self.dismissals_path, "a", encoding="utf-8") as handle:
                    handle.write(f"{self.snapshot_id}\t{item_id}\t{note}\n")
            return {"id": item_id, "status": DISMISSED}

    def export_state(self) -> dict:
        accepted_rules = [r for r in self.rules if r.provenance == "curated"]
        targets = transforms.export_targets(accepted_rules) if accepted_rules else []
        store_text = "".join(transforms.format_rule_line(r) + "\n" for r in self.rules)
        return {
            "rule_store": store_text,
            "lm_additions": [" ".join(t) for t in targets],
        }

    def stats(self) -> dict:
        by_status = {PENDING: 0, ACCEPTED: 0, DISMISSED: 0}
        for item in self.items.values():
            by_status[item.status] += 1
        return {
            "snapshot_id": self.snapshot_id,
            "pending": by_status[PENDING],
            "accepted": by_status[ACCEPTED],
            "dismissed": by_status[DISMISSED],
            "rules": len(self.rules),
        }


class AcceptBody(BaseModel):
    replacement: str
    scope: str = "both"


class DismissBody(BaseModel):
    note: str = ""


def create_app(store: CurationStore) -> FastAPI:
    app = FastAPI(title="corpusmill curation")
    # Internal single-tenant tool; the browser UI may be served from
    # another local port.
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.exception_handler(CurationError)
    async def _curation_error(_request: Request, exc: CurationError):
        return JSONResponse(status_code=exc.status, content={"code": exc.code, "message": exc.message})

    @app.get("/candidates")
    def list_candidates(channel: Optional[str] = None, page: int = 1, page_size: int = 20):
        return store.list_candidates(channel, page, page_size)

    @app.post("/candidates/{item_id}/accept")
    def accept(item_id: str, body: AcceptBody):
        return store.submit_correction(item_id, body.replacement, body.scope)

    @app.post("/candidates/{item_id}/dismiss")
    def dismiss(item_id: str, body: DismissBody):
        return store.dismiss(item_id, body.note)

    @app.get("/rules/export")
    def export():
        return store.export_state()

    @app.get("/stats")
    def stats():
        return store.stats()

    return app


def build_app(snapshot_path: str, rule_store_path: str, dismissals_path: Optional[str] = None) -> FastAPI:
    snapshot_id, candidates = load_snapshot(snapshot_path)
    store = CurationStore(snapshot_id, candidates, rule_store_path, dismissals_path)
    return create_app(store)
