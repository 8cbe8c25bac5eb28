"""corpusmill: semi-supervised speech-corpus construction toolkit.

Scores automatically transcribed utterances (MBR risk from decoder lattices,
Kneser-Ney perplexity), corrects systemic mistranscriptions with curated
transforms, filters the result into acoustic-model and language-model
training corpora, and simulates the distributed re-decoding fleet.
"""

__version__ = "0.1.0"

from .lattice import (
    Lattice,
    MbrResult,
    WeightedPath,
    lattice_confidence,
    mbr_decode,
    mbr_risk,
    nbest_paths,
    parse_lattice,
    path_posteriors,
    serialize_lattice,
)
from .lm import NGramModel, PerplexityScore, perplexity, prob, read_arpa, train_model, write_arpa
from .metrics import Alignment, BucketStats, align, bucket_stats, correlate, wer
from .records import ManifestEntry, UtteranceRecord, read_manifest, write_manifest
from .selection import (
    FilterVerdict,
    ScoredUtterance,
    Thresholds,
    filter_am,
    filter_lm,
    is_degenerate,
    repetition_ratio,
    score_utterance,
)
from .transforms import Candidate, TransformRule, apply_rules, export_targets, mine_candidates

__all__ = [
    "Alignment",
    "BucketStats",
    "Candidate",
    "FilterVerdict",
    "Lattice",
    "ManifestEntry",
    "MbrResult",
    "NGramModel",
    "PerplexityScore",
    "ScoredUtterance",
    "Thresholds",
    "TransformRule",
    "UtteranceRecord",
    "WeightedPath",
    "align",
    "apply_rules",
    "bucket_stats",
    "correlate",
    "export_targets",
    "filter_am",
    "filter_lm",
    "is_degenerate",
    "lattice_confidence",
    "mbr_decode",
    "mbr_risk",
    "mine_candidates",
    "nbest_paths",
    "parse_lattice",
    "path_posteriors",
    "perplexity",
    "prob",
    "read_arpa",
    "read_manifest",
    "repetition_ratio",
    "score_utterance",
    "serialize_lattice",
    "train_model",
    "wer",
    "write_arpa",
    "write_manifest",
]
