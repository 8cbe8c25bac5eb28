"""One iteration of the semi-supervised corpus loop, driven by a config file.

The iteration reads a manifest and its lattices, applies the curated
transforms, scores every utterance (MBR risk plus perplexity of the
corrected text), removes degenerates, and emits four artifacts into the
output directory:

  am_manifest.jsonl   corrected, AM-filtered utterances with scores/verdicts
  lm_text.txt         corrected transcripts inside the tight perplexity band
  lm_additions.txt    unique transform targets to append to LM ground truth
  report.json/.txt    stage counts, corpus totals, optional risk/WER tables

Outputs are written in utterance-id order with no timestamps, so a rerun on
identical inputs is byte-identical.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Optional, Sequence

import yaml

from . import lattice as lattice_mod
from . import lm as lm_mod
from . import metrics, selection, transforms
from .records import ManifestEntry, read_manifest, write_manifest

AM_MANIFEST = "am_manifest.jsonl"
LM_TEXT = "lm_text.txt"
LM_ADDITIONS = "lm_additions.txt"
REPORT_JSON = "report.json"
REPORT_TEXT = "report.txt"

DEFAULT_RISK_BUCKETS = (0.0, 0.1)


class ConfigError(ValueError):
    """Missing files or malformed pipeline configuration."""


@dataclass(frozen=True)
class PipelineConfig:
    manifest: str
    lattices: str
    output_dir: str
    arpa: Optional[str] = None
    lm_train_corpus: Optional[str] = None
    lm_order: int = lm_mod.DEFAULT_ORDER
    lm_vocab_cap: Optional[int] = lm_mod.DEFAULT_VOCAB_CAP
    lm_discount: object = "auto"
    nbest: int = lattice_mod.DEFAULT_NBEST
    acoustic_scale: float = lattice_mod.DEFAULT_ACOUSTIC_SCALE
    thresholds: selection.Thresholds = field(default_factory=selection.Thresholds)
    rules: Optional[str] = None
    lm_corpus: Optional[str] = None  # existing LM ground-truth text, for growth reporting
    references: Optional[str] = None  # manifest of reference transcripts, enables WER tables
    risk_buckets: tuple[float, ...] = DEFAULT_RISK_BUCKETS
    sim: dict = field(default_factory=dict)


def load_config(path: str) -> PipelineConfig:
    try:
        with open(path, encoding="utf-8") as handle:
            raw = yaml.safe_load(handle)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"config file is not valid YAML: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping")

    base = os.path.dirname(os.path.abspath(path))

    def resolve(p: Optional[str]) -> Optional[str]:
        if p is None:
            return None
        return p if os.path.isabs(p) else os.path.join(base, p)

    for key in ("manifest", "lattices", "output_dir"):
        if key not in raw:
            raise ConfigError(f"config is missing required key {key!r}")

    lm_section = raw.get("lm", {}) or {}
    scoring = raw.get("scoring", {}) or {}
    thresholds_section = raw.get("thresholds", {}) or {}
    try:
        thresholds = selection.Thresholds(**thresholds_section)
    except TypeError as exc:
        raise ConfigError(f"bad thresholds section: {exc}") from exc

    return PipelineConfig(
        manifest=resolve(raw["manifest"]),
        lattices=resolve(raw["lattices"]),
        output_dir=resolve(raw["output_dir"]),
        arpa=resolve(lm_section.get("arpa")),
        lm_train_corpus=resolve(lm_section.get("train_corpus")),
        lm_order=int(lm_section.get("order", lm_mod.DEFAULT_ORDER)),
        lm_vocab_cap=lm_section.get("vocab_cap", lm_mod.DEFAULT_VOCAB_CAP),
        lm_discount=lm_section.get("discount", "auto"),
        nbest=int(scoring.get("nbest", lattice_mod.DEFAULT_NBEST)),
        acoustic_scale=float(scoring.get("acoustic_scale", lattice_mod.DEFAULT_ACOUSTIC_SCALE)),
        thresholds=thresholds,
        rules=resolve(raw.get("rules")),
        lm_corpus=resolve(raw.get("lm_corpus")),
        references=resolve(raw.get("references")),
        risk_buckets=tuple(raw.get("risk_buckets", DEFAULT_RISK_BUCKETS)),
        sim=raw.get("sim", {}) or {},
    )


@dataclass(frozen=True)
class CorpusTotals:
    utterances: int
    hours: float
    speakers: int
    conversations: int
    words: int

    def as_dict(self) -> dict:
        return {
            "utterances": self.utterances,
            "hours": self.hours,
            "speakers": self.speakers,
            "conversations": self.conversations,
            "words": self.words,
        }


def corpus_stats(entries: Sequence[ManifestEntry]) -> CorpusTotals:
    """Corpus totals in the comparison-table schema."""
    records = [e.record for e in entries]
    return CorpusTotals(
        utterances=len(records),
        hours=sum(r.duration_seconds for r in records) / 3600.0,
        speakers=len({r.speaker_id for r in records}),
        conversations=len({r.call_id for r in records}),
        words=sum(len(r.transcript) for r in records),
    )


@dataclass(frozen=True)
class IterationReport:
    ingested: int
    degenerate_removed: int
    am_rejected: int
    am_accepted: int
    lm_accepted: int
    rules_applied: int
    transform_hits: int
    lm_growth_percent: Optional[float]
    am_totals: CorpusTotals
    risk_wer_table: Optional[dict] = None

    def as_dict(self) -> dict:
        data = {
            "counts": {
                "ingested": self.ingested,
                "degenerate_removed": self.degenerate_removed,
                "am_rejected": self.am_rejected,
                "am_accepted": self.am_accepted,
                "lm_accepted": self.lm_accepted,
                "rules_applied": self.rules_applied,
                "transform_hits": self.transform_hits,
            },
            "am_totals": self.am_totals.as_dict(),
        }
        if self.lm_growth_percent is not None:
            data["lm_growth_percent"] = self.lm_growth_percent
        if self.risk_wer_table is not None:
            data["risk_wer_table"] = self.risk_wer_table
        return data

    def render(self) -> str:
        counts = self.as_dict()["counts"]
        lines = ["iteration counts"]
        lines += [f"  {key:<20} {value}" for key, value in counts.items()]
        lines.append("am corpus totals")
        for key, value in self.am_totals.as_dict().items():
            rendered = f"{value:.3f}" if isinstance(value, float) else str(value)
            lines.append(f"  {key:<20} {rendered}")
        if self.lm_growth_percent is not None:
            lines.append(f"lm text growth      {self.lm_growth_percent:.1f}%")
        return "\n".join(lines)


def load_lattices(path: str) -> dict[str, lattice_mod.Lattice]:
    """Index lattices by utterance id from a file or a directory of .lat files."""
    paths: list[str]
    if os.path.isdir(path):
        paths = sorted(
            os.path.join(path, name) for name in os.listdir(path) if name.endswith(".lat")
        )
    else:
        paths = [path]
    index: dict[str, lattice_mod.Lattice] = {}
    for file_path in paths:
        with open(file_path, encoding="utf-8") as handle:
            for lat in lattice_mod.iter_lattices(handle.read()):
                if lat.utterance_id in index:
                    raise ConfigError(f"duplicate lattice for utterance {lat.utterance_id!r}")
                index[lat.utterance_id] = lat
    return index


def _load_model(config: PipelineConfig) -> lm_mod.NGramModel:
    if config.arpa:
        with open(config.arpa, encoding="utf-8") as handle:
            return lm_mod.read_arpa(handle.read())
    if config.lm_train_corpus:
        with open(config.lm_train_corpus, encoding="utf-8") as handle:
            corpus = lm_mod.load_corpus(handle.read())
        return lm_mod.train_model(
            corpus, order=config.lm_order, vocab_cap=config.lm_vocab_cap, discount=config.lm_discount
        )
    raise ConfigError("config needs either lm.arpa or lm.train_corpus")


def risk_wer_table(
    pairs: Sequence[tuple[float, float]],
    buckets: Sequence[float] = DEFAULT_RISK_BUCKETS,
) -> dict:
    """Bucketed WER statistics: one column per risk cap, plus the complement
    of the widest bucket."""
    table: dict = {"buckets": {}}
    for cap in buckets:
        values = [wer for risk, wer in pairs if risk <= cap]
        if values:
            table["buckets"][f"risk<={cap}"] = metrics.bucket_stats(values).as_rows()
    widest = max(buckets)
    rest = [wer for risk, wer in pairs if risk > widest]
    if rest:
        table["complement"] = metrics.bucket_stats(rest).as_rows()
    return table


def run_iteration(config: PipelineConfig) -> IterationReport:
    entries = _read_file_manifest(config.manifest)
    lattices = load_lattices(config.lattices)
    model = _load_model(config)
    rules = []
    if config.rules and os.path.exists(config.rules):
        with open(config.rules, encoding="utf-8") as handle:
            rules = transforms.read_rule_store(handle.read())

    missing = [e.record.utterance_id for e in entries if e.record.utterance_id not in lattices]
    if missing:
        raise ConfigError(f"no lattice for utterances: {missing[:5]}")

    references: dict[str, tuple[str, ...]] = {}
    if config.references:
        for entry in _read_file_manifest(config.references):
            references[entry.record.utterance_id] = entry.record.transcript

    ordered = sorted(entries, key=lambda e: e.record.utterance_id)
    for rule in rules:
        rule.hit_count = 0

    am_entries: list[ManifestEntry] = []
    lm_lines: list[str] = []
    degenerate_removed = am_rejected = am_accepted = lm_accepted = 0
    risk_wer_pairs: list[tuple[float, float]] = []

    for entry in ordered:
        record = entry.record
        corrected = transforms.apply_rules(record.transcript, rules, record.channel)
        record = record.with_transcript(corrected)
        scored = selection.score_utterance(
            record,
            lattices[record.utterance_id],
            model,
            n=config.nbest,
            acoustic_scale=config.acoustic_scale,
        )
        if record.utterance_id in references:
            risk_wer_pairs.append(
                (scored.mbr_risk, metrics.wer(references[record.utterance_id], record.transcript))
            )
        scores = {
            "mbr_risk": scored.mbr_risk,
            "lattice_confidence": scored.lattice_confidence,
            "ppl": scored.ppl,
            "token_count": scored.token_count,
        }
        degenerate = selection.is_degenerate(scored, config.thresholds)
        if not degenerate.accepted:
            degenerate_removed += 1
            continue
        am_verdict = selection.filter_am(scored, config.thresholds)
        lm_verdict = selection.filter_lm(scored, config.thresholds)
        if lm_verdict.accepted:
            lm_accepted += 1
            lm_lines.append(" ".join(record.transcript))
        if am_verdict.accepted:
            am_accepted += 1
            am_entries.append(
                ManifestEntry(
                    record=record,
                    scores=scores,
                    verdicts={"degenerate": [], "am": [], "lm": sorted(lm_verdict.reasons)},
                )
            )
        else:
            am_rejected += 1

    targets = transforms.export_targets(rules)
    growth: Optional[float] = None
    if config.lm_corpus:
        with open(config.lm_corpus, encoding="utf-8") as handle:
            corpus_lines = [line for line in handle.read().splitlines() if line.strip()]
        growth = transforms.lm_growth_percent(len(targets), len(corpus_lines))

    table = risk_wer_table(risk_wer_pairs, config.risk_buckets) if risk_wer_pairs else None
    report = IterationReport(
        ingested=len(ordered),
        degenerate_removed=degenerate_removed,
        am_rejected=am_rejected,
        am_accepted=am_accepted,
        lm_accepted=lm_accepted,
        rules_applied=sum(1 for rule in rules if rule.hit_count > 0),
        transform_hits=sum(rule.hit_count for rule in rules),
        lm_growth_percent=growth,
        am_totals=corpus_stats(am_entries),
        risk_wer_table=table,
    )

    os.makedirs(config.output_dir, exist_ok=True)
    with open(os.path.join(config.output_dir, AM_MANIFEST), "w", encoding="utf-8") as handle:
        write_manifest(am_entries, handle)
    with open(os.path.join(config.output_dir, LM_TEXT), "w", encoding="utf-8") as handle:
        handle.write("".join(line + "\n" for line in lm_lines))
    with open(os.path.join(config.output_dir, LM_ADDITIONS), "w", encoding="utf-8") as handle:
        handle.write("".join(" ".join(t) + "\n" for t in targets))
    with open(os.path.join(config.output_dir, REPORT_JSON), "w", encoding="utf-8") as handle:
        json.dump(report.as_dict(), handle, indent=2, sort_keys=True)
        handle.write("\n")
    with open(os.path.join(config.output_dir, REPORT_TEXT), "w", encoding="utf-8") as handle:
        handle.write(report.render() + "\n")
    return report


def _read_file_manifest(path: str) -> list[ManifestEntry]:
    try:
        with open(path, encoding="utf-8") as handle:
            return read_manifest(handle.read())
    except FileNotFoundError as exc:
        raise ConfigError(f"manifest not found: {path}") from exc


def score_manifest(config: PipelineConfig) -> list[selection.ScoredUtterance]:
    """Score every utterance without filtering; used by the CLI 'score' command."""
    entries = _read_file_manifest(config.manifest)
    lattices = load_lattices(config.lattices)
    model = _load_model(config)
    scored = []
    for entry in sorted(entries, key=lambda e: e.record.utterance_id):
        record = entry.record
        if record.utterance_id not in lattices:
            raise ConfigError(f"no lattice for utterance {record.utterance_id!r}")
        scored.append(
            selection.score_utterance(
                record,
                lattices[record.utterance_id],
                model,
                n=config.nbest,
                acoustic_scale=config.acoustic_scale,
            )
        )
    return scored


def filter_manifest(config: PipelineConfig) -> list[ManifestEntry]:
    """Score and attach all three verdicts to every utterance (no outputs)."""
    results = []
    for scored in score_manifest(config):
        degenerate = selection.is_degenerate(scored, config.thresholds)
        verdicts = {"degenerate": sorted(degenerate.reasons)}
        if degenerate.accepted:
            verdicts["am"] = sorted(selection.filter_am(scored, config.thresholds).reasons)
            verdicts["lm"] = sorted(selection.filter_lm(scored, config.thresholds).reasons)
        results.append(
            ManifestEntry(
                record=scored.record,
                scores={
                    "mbr_risk": scored.mbr_risk,
                    "lattice_confidence": scored.lattice_confidence,
                    "ppl": scored.ppl,
                    "token_count": scored.token_count,
                },
                verdicts=verdicts,
            )
        )
    return results
