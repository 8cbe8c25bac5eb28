"""Edit-distance alignment, WER, bucketed statistics, and correlation.

These are the evaluation primitives the rest of the toolkit leans on:
Levenshtein alignment backs both WER reporting and the expected-edit-distance
risk computed over lattices, and the bucketed statistics reproduce the
count/mean/percentile table layout used for risk-vs-WER reporting.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass
from typing import Optional, Sequence

Tokens = Sequence[str]

# Order matters: this is the row order of the rendered stats table.
STAT_ROWS = ("count", "mean", "std", "min", "25%", "50%", "75%", "90%", "95%", "max")

PERCENTILES = (25, 50, 75, 90, 95)


@dataclass(frozen=True)
class Alignment:
    """Minimal-cost word alignment between a reference and a hypothesis.

    ``pairs`` lists (ref_token, hyp_token) with ``None`` marking a gap:
    a ref gap is an insertion, a hyp gap is a deletion.
    """

    substitutions: int
    deletions: int
    insertions: int
    ref_length: int
    pairs: tuple[tuple[Optional[str], Optional[str]], ...]

    @property
    def edit_distance(self) -> int:
        return self.substitutions + self.deletions + self.insertions


@dataclass(frozen=True)
class BucketStats:
    count: int
    mean: float
    std: float
    min: float
    p25: float
    p50: float
    p75: float
    p90: float
    p95: float
    max: float

    def as_rows(self) -> list[tuple[str, float]]:
        return [
            ("count", float(self.count)),
            ("mean", self.mean),
            ("std", self.std),
            ("min", self.min),
            ("25%", self.p25),
            ("50%", self.p50),
            ("75%", self.p75),
            ("90%", self.p90),
            ("95%", self.p95),
            ("max", self.max),
        ]


def tokenize(text: str) -> tuple[str, ...]:
    """Lowercase, whitespace-split scoring tokenization.

    Bracketed tags such as ``[noise]`` survive as single tokens because they
    contain no whitespace.
    """
    return tuple(text.lower().split())


def align(ref: Tokens, hyp: Tokens) -> Alignment:
    """Minimal unit-cost alignment of ``hyp`` against ``ref``.

    Ties are broken preferring substitution over insertion over deletion,
    applied during the backtrace from the end of both sequences.
    """
    n, m = len(ref), len(hyp)
    # dp[i][j] = edit distance between ref[:i] and hyp[:j]
    dp = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        dp[i][0] = i
    for j in range(1, m + 1):
        dp[0][j] = j
    for i in range(1, n + 1):
        ref_tok = ref[i - 1]
        row = dp[i]
        prev = dp[i - 1]
        for j in range(1, m + 1):
            sub = prev[j - 1] + (0 if ref_tok == hyp[j - 1] else 1)
            ins = row[j - 1] + 1
            dele = prev[j] + 1
            row[j] = sub if sub <= ins and sub <= dele else (ins if ins <= dele else dele)

    pairs: list[tuple[Optional[str], Optional[str]]] = []
    subs = dels = inss = 0
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0 and dp[i][j] == dp[i - 1][j - 1] + (0 if ref[i - 1] == hyp[j - 1] else 1):
            if ref[i - 1] != hyp[j - 1]:
                subs += 1
            pairs.append((ref[i - 1], hyp[j - 1]))
            i, j = i - 1, j - 1
        elif j > 0 and dp[i][j] == dp[i][j - 1] + 1:
            inss += 1
            pairs.append((None, hyp[j - 1]))
            j -= 1
        else:
            dels += 1
            pairs.append((ref[i - 1], None))
            i -= 1
    pairs.reverse()
    return Alignment(
        substitutions=subs,
        deletions=dels,
        insertions=inss,
        ref_length=n,
        pairs=tuple(pairs),
    )


def edit_distance(a: Tokens, b: Tokens) -> int:
    """Plain Levenshtein distance over token sequences (no backtrace)."""
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, tok_a in enumerate(a, start=1):
        cur = [i]
        append = cur.append
        for j, tok_b in enumerate(b, start=1):
            if tok_a == tok_b:
                append(prev[j - 1])
            else:
                append(1 + min(prev[j - 1], prev[j], cur[-1]))
        prev = cur
    return prev[-1]


def wer(ref: Tokens, hyp: Tokens) -> float:
    """Word error rate as a percentage: 100 * (S + D + I) / |ref|.

    Not clamped at 100; insertion-heavy hypotheses can exceed it.
    """
    if len(ref) == 0:
        raise ValueError("WER is undefined for an empty reference")
    return 100.0 * edit_distance(ref, hyp) / len(ref)


def _nearest_rank(sorted_values: list[float], pct: int) -> float:
    rank = math.ceil(pct / 100 * len(sorted_values))
    return sorted_values[max(rank, 1) - 1]


def bucket_stats(values: Sequence[float]) -> BucketStats:
    """Descriptive statistics with nearest-rank percentiles.

    ``std`` is the population standard deviation.
    """
    if not values:
        raise ValueError("bucket_stats requires a non-empty value list")
    ordered = sorted(float(v) for v in values)
    pcts = {p: _nearest_rank(ordered, p) for p in PERCENTILES}
    return BucketStats(
        count=len(ordered),
        mean=statistics.fmean(ordered),
        std=statistics.pstdev(ordered),
        min=ordered[0],
        p25=pcts[25],
        p50=pcts[50],
        p75=pcts[75],
        p90=pcts[90],
        p95=pcts[95],
        max=ordered[-1],
    )


def render_stats_table(columns: dict[str, BucketStats], title: str = "WER Statistics") -> str:
    """Plain-text table, one column per bucket, rows in STAT_ROWS order."""
    names = list(columns)
    header = [title] + names
    rows = [header]
    by_name = {name: dict(stats.as_rows()) for name, stats in columns.items()}
    for row_label in STAT_ROWS:
        cells = [row_label]
        for name in names:
            value = by_name[name][row_label]
            cells.append(f"{int(value)}" if row_label == "count" else f"{value:.2f}")
        rows.append(cells)
    widths = [max(len(r[c]) for r in rows) for c in range(len(header))]
    lines = ["  ".join(cell.ljust(widths[c]) for c, cell in enumerate(row)).rstrip() for row in rows]
    return "\n".join(lines)


def _ranks(values: Sequence[float]) -> list[float]:
    # Average ranks for ties (fractional ranking), 1-based.
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j) / 2 + 1
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return ranks


def correlate(xs: Sequence[float], ys: Sequence[float]) -> tuple[float, float]:
    """(Pearson, Spearman) correlation coefficients.

    Raises on mismatched lengths, fewer than two points, or zero variance
    in either input.
    """
    if len(xs) != len(ys):
        raise ValueError("correlate requires equal-length inputs")
    if len(xs) < 2:
        raise ValueError("correlate requires at least two points")
    if statistics.pvariance(xs) == 0 or statistics.pvariance(ys) == 0:
        raise ValueError("correlate requires non-zero variance in both inputs")
    pearson = statistics.correlation(xs, ys)
    rank_x, rank_y = _ranks(xs), _ranks(ys)
    if statistics.pvariance(rank_x) == 0 or statistics.pvariance(rank_y) == 0:
        raise ValueError("spearman is undefined when one input is constant after ranking")
    spearman = statistics.correlation(rank_x, rank_y)
    return pearson, spearman


def relative_gain_percent(baseline: float, improved: float) -> float:
    """Relative reduction of an error metric, as a percentage."""
    if baseline == 0:
        raise ValueError("relative gain is undefined for a zero baseline")
    return 100.0 * (baseline - improved) / baseline
