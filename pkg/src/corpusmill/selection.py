"""Utterance scoring and the selection filters for AM and LM corpora.

Every utterance is scored once (MBR risk from its lattice, perplexity from
the language model) and then passed through three stateless filters:
degenerate removal (too short, repetitive, or implausibly high perplexity),
acoustic-model selection (risk + perplexity + minimum length), and the
tighter perplexity band used for language-model text.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from . import lattice as lattice_mod
from . import lm as lm_mod
from .records import UtteranceRecord

REASON_TOO_SHORT = "too_short"
REASON_REPETITION = "repetition"
REASON_HIGH_PERPLEXITY = "high_perplexity"
REASON_MBR = "mbr_above_threshold"
REASON_PPL_BAND = "ppl_outside_band"


@dataclass(frozen=True)
class Thresholds:
    """Filter thresholds; defaults follow the pipeline's standard run."""

    mbr_max: float = 0.1
    am_ppl_max: float = 500.0
    lm_ppl_min: float = 40.0
    lm_ppl_max: float = 80.0
    min_tokens: int = 3
    repetition_max: float = 0.6
    degenerate_ppl_max: float = 1000.0

    def __post_init__(self):
        if self.lm_ppl_min > self.lm_ppl_max:
            raise ValueError("lm_ppl_min must not exceed lm_ppl_max")
        if not 0 < self.repetition_max <= 1:
            raise ValueError("repetition_max must be in (0, 1]")
        for name in ("mbr_max", "am_ppl_max", "lm_ppl_min", "min_tokens", "degenerate_ppl_max"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")


@dataclass(frozen=True)
class ScoredUtterance:
    record: UtteranceRecord
    mbr_risk: float
    lattice_confidence: Optional[float]
    ppl: float
    token_count: int


@dataclass(frozen=True)
class FilterVerdict:
    accepted: bool
    reasons: frozenset[str] = frozenset()

    def __post_init__(self):
        if self.accepted != (not self.reasons):
            raise ValueError("accepted must mean an empty reason set")


def _verdict(reasons: set[str]) -> FilterVerdict:
    return FilterVerdict(accepted=not reasons, reasons=frozenset(reasons))


def score_utterance(
    record: UtteranceRecord,
    lat: lattice_mod.Lattice,
    model: lm_mod.NGramModel,
    n: int = lattice_mod.DEFAULT_NBEST,
    acoustic_scale: float = lattice_mod.DEFAULT_ACOUSTIC_SCALE,
) -> ScoredUtterance:
    """Join the lattice and LM signals for one utterance."""
    if lat.utterance_id != record.utterance_id:
        raise ValueError(
            f"lattice id {lat.utterance_id!r} does not match record id {record.utterance_id!r}"
        )
    decoded = lattice_mod.mbr_decode(lat, n=n, acoustic_scale=acoustic_scale)
    confidence = lattice_mod.lattice_confidence(lat, acoustic_scale=acoustic_scale)
    score = lm_mod.perplexity(model, record.transcript, utterance_id=record.utterance_id)
    return ScoredUtterance(
        record=record,
        mbr_risk=decoded.risk,
        lattice_confidence=confidence,
        ppl=score.ppl,
        token_count=len(record.transcript),
    )


def repetition_ratio(tokens: Sequence[str]) -> float:
    """Share of the utterance taken by its most frequent token."""
    if not tokens:
        raise ValueError("repetition_ratio requires a non-empty token sequence")
    top = max(sum(1 for t in tokens if t == u) for u in set(tokens))
    return top / len(tokens)


def is_degenerate(scored: ScoredUtterance, thresholds: Thresholds) -> FilterVerdict:
    """Degenerate-utterance screen: rejects hold music, noise, and the like.

    The verdict is accepted when the utterance is NOT degenerate; reasons
    accumulate so a rejection is fully explainable from the stored scores.
    """
    reasons: set[str] = set()
    if scored.token_count < thresholds.min_tokens:
        reasons.add(REASON_TOO_SHORT)
    if scored.token_count > 0 and repetition_ratio(scored.record.transcript) > thresholds.repetition_max:
        reasons.add(REASON_REPETITION)
    if scored.ppl > thresholds.degenerate_ppl_max:
        reasons.add(REASON_HIGH_PERPLEXITY)
    return _verdict(reasons)


def filter_am(scored: ScoredUtterance, thresholds: Thresholds) -> FilterVerdict:
    """Acoustic-model corpus filter; expects a non-degenerate utterance."""
    reasons: set[str] = set()
    if scored.mbr_risk > thresholds.mbr_max:
        reasons.add(REASON_MBR)
    if scored.ppl > thresholds.am_ppl_max:
        reasons.add(REASON_HIGH_PERPLEXITY)
    if scored.token_count < thresholds.min_tokens:
        reasons.add(REASON_TOO_SHORT)
    return _verdict(reasons)


def filter_lm(scored: ScoredUtterance, thresholds: Thresholds) -> FilterVerdict:
    """Language-model text filter: the tight perplexity band."""
    reasons: set[str] = set()
    if not thresholds.lm_ppl_min <= scored.ppl <= thresholds.lm_ppl_max:
        reasons.add(REASON_PPL_BAND)
    return _verdict(reasons)
