"""Mistranscription mining and corrective text transforms.

Systemic decoder mistakes ("rest you" for "press two") show up as
high-frequency full utterances or n-gram substructures. This module counts
those candidates, applies curated pattern -> replacement rules channel-scoped
across transcripts, and exports the unique replacement texts, which double
as ground-truth lines for language-model training.

Rule application is a single left-to-right pass, longest match wins, no
rescanning of replaced spans, so rule sets cannot recurse or diverge.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, TextIO, Union

from .records import UtteranceRecord

SCOPES = ("caller", "agent", "both")
PROVENANCES = ("manual", "curated")

KIND_FULL = "full_utterance"
KIND_SUB = "substructure"

MAX_SAMPLE_IDS = 5


class RuleError(ValueError):
    """Invalid rule definition or malformed rule-store line."""


@dataclass
class TransformRule:
    pattern: tuple[str, ...]
    replacement: tuple[str, ...]
    channel_scope: str = "both"
    provenance: str = "manual"
    hit_count: int = 0
    created_at: str = ""

    def __post_init__(self):
        self.pattern = tuple(self.pattern)
        self.replacement = tuple(self.replacement)
        if not self.pattern:
            raise RuleError("rule pattern must be non-empty")
        if self.pattern == self.replacement:
            raise RuleError(f"rule pattern equals its replacement: {' '.join(self.pattern)!r}")
        if self.channel_scope not in SCOPES:
            raise RuleError(f"channel_scope must be one of {SCOPES}, got {self.channel_scope!r}")
        if self.provenance not in PROVENANCES:
            raise RuleError(f"provenance must be one of {PROVENANCES}, got {self.provenance!r}")

    def applies_to(self, channel: str) -> bool:
        return self.channel_scope == "both" or self.channel_scope == channel


@dataclass(frozen=True)
class Candidate:
    tokens: tuple[str, ...]
    frequency: int
    kind: str
    sample_utterance_ids: tuple[str, ...] = ()


def mine_candidates(
    corpus: Iterable[UtteranceRecord],
    n_range: tuple[int, int] = (2, 5),
    min_count: int = 2,
    channel: str = "both",
) -> list[Candidate]:
    """Rank full utterances and n-gram substructures by prevalence.

    Substructure counts include every containing context, so "a grey day"
    accumulates hits from both "you have a grey day" and "it is a grey day".
    Sorted by frequency descending, then kind, then token order.
    """
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    lo, hi = n_range
    if lo < 1 or hi < lo:
        raise ValueError(f"invalid n_range {n_range}")

    full_counts: Counter = Counter()
    sub_counts: Counter = Counter()
    samples: dict[tuple[str, tuple[str, ...]], list[str]] = defaultdict(list)
    for record in corpus:
        if channel != "both" and record.channel != channel:
            continue
        tokens = tuple(record.transcript)
        if not tokens:
            continue
        full_counts[tokens] += 1
        if len(samples[(KIND_FULL, tokens)]) < MAX_SAMPLE_IDS:
            samples[(KIND_FULL, tokens)].append(record.utterance_id)
        for n in range(lo, hi + 1):
            for start in range(0, len(tokens) - n + 1):
                gram = tokens[start:start + n]
                sub_counts[gram] += 1
                if len(samples[(KIND_SUB, gram)]) < MAX_SAMPLE_IDS:
                    samples[(KIND_SUB, gram)].append(record.utterance_id)

    candidates = [
        Candidate(tokens=t, frequency=c, kind=KIND_FULL, sample_utterance_ids=tuple(samples[(KIND_FULL, t)]))
        for t, c in full_counts.items()
        if c >= min_count
    ]
    candidates += [
        Candidate(tokens=t, frequency=c, kind=KIND_SUB, sample_utterance_ids=tuple(samples[(KIND_SUB, t)]))
        for t, c in sub_counts.items()
        if c >= min_count
    ]
    candidates.sort(key=lambda cand: (-cand.frequency, cand.kind, cand.tokens))
    return candidates


def apply_rules(
    tokens: Sequence[str],
    rules: Sequence[TransformRule],
    channel: str,
) -> tuple[str, ...]:
    """Apply the in-scope rules in one left-to-right pass.

    At each position the longest matching pattern wins (rule-list order
    breaks length ties); scanning resumes after the replacement, and each
    application increments the rule's hit_count.
    """
    if channel not in ("caller", "agent"):
        raise ValueError(f"channel must be 'caller' or 'agent', got {channel!r}")
    active = [r for r in rules if r.applies_to(channel)]
    if not active:
        return tuple(tokens)
    out: list[str] = []
    i = 0
    n = len(tokens)
    while i < n:
        best: Optional[TransformRule] = None
        for rule in active:
            plen = len(rule.pattern)
            if plen <= n - i and (best is None or plen > len(best.pattern)):
                if tuple(tokens[i:i + plen]) == rule.pattern:
                    best = rule
        if best is None:
            out.append(tokens[i])
            i += 1
        else:
            out.extend(best.replacement)
            i += len(best.pattern)
            best.hit_count += 1
    return tuple(out)


def export_targets(rules: Sequence[TransformRule]) -> list[tuple[str, ...]]:
    """Unique replacement texts, sorted, ready to append to LM ground truth."""
    return sorted({rule.replacement for rule in rules})


def lm_growth_percent(target_count: int, corpus_line_count: int) -> float:
    """How much the exported targets grow an existing LM text corpus."""
    if corpus_line_count <= 0:
        raise ValueError("corpus_line_count must be positive")
    return 100.0 * target_count / corpus_line_count


def parse_rule_line(line: str, lineno: int = 0) -> TransformRule:
    fields = line.rstrip("\n").split("\t")
    if len(fields) != 5:
        raise RuleError(f"rule line {lineno}: expected 5 tab-separated fields, got {len(fields)}")
    scope, pattern, replacement, provenance, created_at = fields
    return TransformRule(
        pattern=tuple(pattern.split()),
        replacement=tuple(replacement.split()),
        channel_scope=scope,
        provenance=provenance,
        created_at=created_at,
    )


def format_rule_line(rule: TransformRule) -> str:
    return "\t".join(
        (
            rule.channel_scope,
            " ".join(rule.pattern),
            " ".join(rule.replacement),
            rule.provenance,
            rule.created_at,
        )
    )


def read_rule_store(source: Union[str, TextIO]) -> list[TransformRule]:
    """Load the append-only rule store (tab-separated, one rule per line)."""
    text = source if isinstance(source, str) else source.read()
    rules = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if line.strip():
            rules.append(parse_rule_line(line, lineno))
    return rules


def append_rule(path, rule: TransformRule) -> None:
    with open(path, "a", encoding="utf-8") as handle:
        handle.write(format_rule_line(rule) + "\n")
