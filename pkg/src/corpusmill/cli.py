"""Command-line driver for the corpus pipeline.

Every subcommand exits 0 on success; failures print one machine-readable
JSON error line to stderr and exit nonzero.
"""

from __future__ import annotations

import json
import sys
from typing import Optional

import click

from . import __version__
from . import fleetsim, lm as lm_mod, pipeline, transforms
from .records import read_manifest


def _fail(code: str, message: str) -> None:
    click.echo(json.dumps({"error": {"code": code, "message": message}}), err=True)
    sys.exit(1)


def _guard(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except FileNotFoundError as exc:
        _fail("missing_file", str(exc))
    except (pipeline.ConfigError, ValueError) as exc:
        _fail("invalid_input", str(exc))
    except fleetsim.SimulationError as exc:
        _fail("simulation_failed", str(exc))


@click.group()
@click.version_option(version=__version__, prog_name="corpusmill")
def main():
    """Semi-supervised speech-corpus construction toolkit."""


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("-o", "--output", type=click.Path(), default=None, help="Write scored manifest here instead of stdout.")
def score(config_path: str, output: Optional[str]):
    """Score a manifest: MBR risk, lattice confidence, and perplexity."""
    config = _guard(pipeline.load_config, config_path)
    scored = _guard(pipeline.score_manifest, config)
    lines = []
    for s in scored:
        lines.append(
            json.dumps(
                {
                    "utterance_id": s.record.utterance_id,
                    "mbr_risk": s.mbr_risk,
                    "lattice_confidence": s.lattice_confidence,
                    "ppl": s.ppl,
                    "token_count": s.token_count,
                },
                sort_keys=True,
            )
        )
    text = "\n".join(lines) + ("\n" if lines else "")
    if output:
        with open(output, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        click.echo(text, nl=False)


@main.command("filter")
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("-o", "--output", type=click.Path(), default=None)
def filter_cmd(config_path: str, output: Optional[str]):
    """Emit the manifest with scores and all filter verdicts attached."""
    config = _guard(pipeline.load_config, config_path)
    entries = _guard(pipeline.filter_manifest, config)
    from .records import write_manifest

    text = write_manifest(entries)
    if output:
        with open(output, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        click.echo(text, nl=False)


@main.group("transforms")
def transforms_group():
    """Mine, apply, and export corrective transforms."""


@transforms_group.command("mine")
@click.option("--manifest", "manifest_path", required=True, type=click.Path())
@click.option("--channel", type=click.Choice(["caller", "agent", "both"]), default="both")
@click.option("--min-count", type=int, default=2)
@click.option("--ngram-min", type=int, default=2)
@click.option("--ngram-max", type=int, default=5)
@click.option("-o", "--output", type=click.Path(), required=True, help="Snapshot JSON for the curation service.")
def transforms_mine(manifest_path, channel, min_count, ngram_min, ngram_max, output):
    """Count high-prevalence full utterances and n-gram substructures."""
    from .curation import write_snapshot

    with open(manifest_path, encoding="utf-8") as handle:
        entries = _guard(read_manifest, handle.read())
    records = [e.record for e in entries]
    channels = ["caller", "agent"] if channel == "both" else [channel]
    mined: list = []
    for chan in channels:
        candidates = _guard(
            transforms.mine_candidates,
            records,
            n_range=(ngram_min, ngram_max),
            min_count=min_count,
            channel=chan,
        )
        mined.extend((chan, c) for c in candidates)
    write_snapshot(output, mined)
    click.echo(f"mined {len(mined)} candidates -> {output}")


@transforms_group.command("apply")
@click.option("--manifest", "manifest_path", required=True, type=click.Path())
@click.option("--rules", "rules_path", required=True, type=click.Path())
@click.option("-o", "--output", type=click.Path(), required=True)
def transforms_apply(manifest_path, rules_path, output):
    """Rewrite manifest transcripts through the rule store."""
    from .records import ManifestEntry, write_manifest

    with open(manifest_path, encoding="utf-8") as handle:
        entries = _guard(read_manifest, handle.read())
    with open(rules_path, encoding="utf-8") as handle:
        rules = _guard(transforms.read_rule_store, handle.read())
    rewritten = []
    for entry in entries:
        corrected = transforms.apply_rules(entry.record.transcript, rules, entry.record.channel)
        rewritten.append(ManifestEntry(record=entry.record.with_transcript(corrected)))
    with open(output, "w", encoding="utf-8") as handle:
        write_manifest(rewritten, handle)
    hits = sum(rule.hit_count for rule in rules)
    click.echo(f"applied rules with {hits} replacements -> {output}")


@transforms_group.command("export")
@click.option("--rules", "rules_path", required=True, type=click.Path())
@click.option("--lm-corpus", "lm_corpus_path", type=click.Path(), default=None)
@click.option("-o", "--output", type=click.Path(), default=None)
def transforms_export(rules_path, lm_corpus_path, output):
    """Export unique transform targets as LM ground-truth lines."""
    with open(rules_path, encoding="utf-8") as handle:
        rules = _guard(transforms.read_rule_store, handle.read())
    targets = transforms.export_targets(rules)
    text = "".join(" ".join(t) + "\n" for t in targets)
    if output:
        with open(output, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        click.echo(text, nl=False)
    if lm_corpus_path:
        with open(lm_corpus_path, encoding="utf-8") as handle:
            lines = [line for line in handle.read().splitlines() if line.strip()]
        growth = transforms.lm_growth_percent(len(targets), len(lines))
        click.echo(f"lm text growth: {growth:.1f}%", err=True)


@main.group("lm")
def lm_group():
    """Train and query Kneser-Ney n-gram models."""


@lm_group.command("train")
@click.option("--corpus", "corpus_path", required=True, type=click.Path())
@click.option("--order", type=int, default=lm_mod.DEFAULT_ORDER)
@click.option("--vocab-cap", type=int, default=lm_mod.DEFAULT_VOCAB_CAP)
@click.option("--discount", default="auto")
@click.option("-o", "--output", "arpa_path", required=True, type=click.Path())
def lm_train(corpus_path, order, vocab_cap, discount, arpa_path):
    """Train a model and write it as ARPA."""
    with open(corpus_path, encoding="utf-8") as handle:
        corpus = lm_mod.load_corpus(handle.read())
    discount_value = discount if discount == "auto" else float(discount)
    model = _guard(lm_mod.train_model, corpus, order=order, vocab_cap=vocab_cap, discount=discount_value)
    with open(arpa_path, "w", encoding="utf-8") as handle:
        lm_mod.write_arpa(model, handle)
    counts = model.ngram_counts()
    click.echo(" ".join(f"{k}-grams={v}" for k, v in counts.items()))


@lm_group.command("ppl")
@click.option("--arpa", "arpa_path", required=True, type=click.Path())
@click.option("--text", "text_path", required=True, type=click.Path())
def lm_ppl(arpa_path, text_path):
    """Per-line perplexity of a text file under an ARPA model."""
    with open(arpa_path, encoding="utf-8") as handle:
        model = _guard(lm_mod.read_arpa, handle.read())
    with open(text_path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle.read().splitlines(), start=1):
            if not line.strip():
                continue
            score = lm_mod.perplexity(model, line.lower().split(), utterance_id=str(lineno))
            click.echo(
                json.dumps(
                    {
                        "line": lineno,
                        "ppl": score.ppl,
                        "token_count": score.token_count,
                        "oov_count": score.oov_count,
                    },
                    sort_keys=True,
                )
            )


@lm_group.command("arpa")
@click.option("--arpa", "arpa_path", required=True, type=click.Path())
def lm_arpa(arpa_path):
    """Validate an ARPA file and print its n-gram counts."""
    with open(arpa_path, encoding="utf-8") as handle:
        model = _guard(lm_mod.read_arpa, handle.read())
    click.echo(" ".join(f"{k}-grams={v}" for k, v in model.ngram_counts().items()))


@main.command()
@click.option("--manifest", "manifest_path", required=True, type=click.Path())
def stats(manifest_path):
    """Corpus totals for a manifest."""
    with open(manifest_path, encoding="utf-8") as handle:
        entries = _guard(read_manifest, handle.read())
    totals = pipeline.corpus_stats(entries)
    for key, value in totals.as_dict().items():
        rendered = f"{value:.3f}" if isinstance(value, float) else str(value)
        click.echo(f"{key:<15} {rendered}")


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path())
def run(config_path):
    """Run one full iteration: correct, score, filter, emit corpora."""
    config = _guard(pipeline.load_config, config_path)
    report = _guard(pipeline.run_iteration, config)
    click.echo(report.render())


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path())
def sim(config_path):
    """Simulate the re-decoding fleet over the configured manifest."""
    config = _guard(pipeline.load_config, config_path)
    section = config.sim
    sim_config = _guard(
        fleetsim.SimConfig,
        worker_count=int(section.get("worker_count", 10)),
        visibility_timeout=float(section.get("visibility_timeout", 30.0)),
        interruption_rate=float(section.get("interruption_rate", 0.0)),
        processing_time_mean=float(section.get("processing_time_mean", 1.0)),
        processing_time_spread=float(section.get("processing_time_spread", 0.0)),
        rng_seed=int(section.get("rng_seed", 0)),
        max_sim_time=float(section.get("max_sim_time", 1e9)),
    )
    with open(config.manifest, encoding="utf-8") as handle:
        entries = _guard(read_manifest, handle.read())
    ids = [e.record.utterance_id for e in entries]
    report = _guard(fleetsim.run_simulation, sim_config, ids)
    click.echo(report.render())


@main.command()
@click.option("--snapshot", "snapshot_path", required=True, type=click.Path())
@click.option("--rule-store", "rule_store_path", required=True, type=click.Path())
@click.option("--dismissals", "dismissals_path", type=click.Path(), default=None)
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8070)
def serve(snapshot_path, rule_store_path, dismissals_path, host, port):
    """Serve the curation API over a mining snapshot."""
    import uvicorn

    from .curation import build_app

    app = _guard(build_app, snapshot_path, rule_store_path, dismissals_path)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
