import random
import statistics

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from corpusmill.metrics import (
    align,
    bucket_stats,
    correlate,
    edit_distance,
    relative_gain_percent,
    render_stats_table,
    tokenize,
    wer,
)

tokens = st.lists(st.sampled_from(["a", "b", "c", "day", "grey"]), max_size=8)


class TestAlign:
    def test_identical_sequences(self):
        result = align(("have", "fun"), ("have", "fun"))
        assert (result.substitutions, result.deletions, result.insertions) == (0, 0, 0)
        assert result.pairs == (("have", "have"), ("fun", "fun"))

    def test_single_substitution(self):
        # Word pair from the caller mistranscription set.
        result = align("have a great day".split(), "have a grey day".split())
        assert (result.substitutions, result.deletions, result.insertions) == (1, 0, 0)
        assert ("great", "grey") in result.pairs

    def test_empty_hypothesis_is_all_deletions(self):
        result = align(("x", "y", "z"), ())
        assert result.deletions == 3
        assert result.substitutions == result.insertions == 0
        assert all(hyp is None for _, hyp in result.pairs)

    def test_gap_counts_match_alignment_pairs(self):
        result = align("so i said no".split(), "i said oh no no".split())
        assert sum(1 for ref, _ in result.pairs if ref is None) == result.insertions
        assert sum(1 for _, hyp in result.pairs if hyp is None) == result.deletions
        assert result.edit_distance == oracles.dp_edit_distance(
            "so i said no".split(), "i said oh no no".split()
        )

    @given(tokens, tokens)
    @settings(max_examples=80)
    def test_alignment_cost_is_minimal(self, ref, hyp):
        result = align(ref, hyp)
        assert result.edit_distance == oracles.dp_edit_distance(ref, hyp)

    @given(tokens, tokens)
    @settings(max_examples=80)
    def test_symmetry_under_swap(self, ref, hyp):
        forward = align(ref, hyp)
        backward = align(hyp, ref)
        assert forward.edit_distance == backward.edit_distance
        assert forward.substitutions == backward.substitutions
        assert forward.deletions == backward.insertions
        assert forward.insertions == backward.deletions

    @given(tokens, tokens, tokens)
    @settings(max_examples=60)
    def test_triangle_inequality(self, a, b, c):
        assert edit_distance(a, c) <= edit_distance(a, b) + edit_distance(b, c)


class TestWer:
    def test_identical_is_zero(self):
        assert wer(("yes",), ("yes",)) == 0.0

    def test_grey_day_pair_is_25(self):
        assert wer("have a great day".split(), "have a grey day".split()) == 25.0

    def test_empty_hypothesis_is_100(self):
        assert wer("one two three four".split(), ()) == 100.0

    def test_empty_reference_rejected(self):
        with pytest.raises(ValueError):
            wer((), ("word",))

    def test_can_exceed_100(self):
        assert wer(("oh",), ("oh", "no", "no", "no")) == 300.0


class TestBucketStats:
    def test_constant_values(self):
        stats = bucket_stats([5, 5, 5])
        assert stats.count == 3
        assert stats.mean == 5 and stats.std == 0
        assert stats.min == stats.p25 == stats.p50 == stats.p95 == stats.max == 5

    def test_nearest_rank_percentiles(self):
        # rank(90%) = ceil(0.9 * 10) = 9 -> value 20; rank(50%) = 5 -> 0.
        values = [0, 0, 0, 0, 0, 0, 0, 6.25, 20, 100]
        stats = bucket_stats(values)
        assert stats.p50 == 0.0
        assert stats.p90 == 20.0
        assert stats.p95 == 100.0

    def test_singleton(self):
        stats = bucket_stats([7.0])
        assert stats.count == 1
        assert stats.min == stats.max == stats.mean == 7.0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            bucket_stats([])

    @given(st.lists(st.floats(0, 100), min_size=1, max_size=40))
    @settings(max_examples=60)
    def test_percentile_monotonicity(self, values):
        stats = bucket_stats(values)
        ordered = [stats.min, stats.p25, stats.p50, stats.p75, stats.p90, stats.p95, stats.max]
        assert ordered == sorted(ordered)
        assert stats.count == len(values)

    def test_render_row_order(self):
        table = render_stats_table({"risk<=0.1": bucket_stats([1.0, 2.0])})
        lines = table.splitlines()
        labels = [line.split()[0] for line in lines[1:]]
        assert labels == ["count", "mean", "std", "min", "25%", "50%", "75%", "90%", "95%", "max"]


class TestCorrelate:
    def test_perfect_positive(self):
        xs = [1.0, 2.0, 3.0, 4.0]
        pearson, spearman = correlate(xs, [2 * x for x in xs])
        assert pearson == pytest.approx(1.0)
        assert spearman == pytest.approx(1.0)

    def test_perfect_negative(self):
        xs = [1.0, 2.0, 3.0, 4.0]
        pearson, spearman = correlate(xs, [-x for x in xs])
        assert pearson == pytest.approx(-1.0)
        assert spearman == pytest.approx(-1.0)

    def test_matches_reference_implementation(self):
        rng = random.Random(7)
        xs = [rng.uniform(0, 1) for _ in range(200)]
        ys = [x * 50 + rng.gauss(0, 5) for x in xs]
        pearson, spearman = correlate(xs, ys)
        assert pearson == pytest.approx(oracles.pearson(xs, ys), abs=1e-9)
        assert spearman == pytest.approx(oracles.spearman(xs, ys), abs=1e-9)

    def test_matches_scipy(self):
        scipy_stats = pytest.importorskip("scipy.stats")
        rng = random.Random(13)
        xs = [rng.uniform(0, 10) for _ in range(150)]
        ys = [rng.uniform(0, 10) + 0.3 * x for x in xs]
        pearson, spearman = correlate(xs, ys)
        assert pearson == pytest.approx(scipy_stats.pearsonr(xs, ys)[0], abs=1e-9)
        assert spearman == pytest.approx(scipy_stats.spearmanr(xs, ys)[0], abs=1e-9)

    def test_degenerate_variance_rejected(self):
        with pytest.raises(ValueError):
            correlate([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            correlate([1.0, 2.0], [1.0])


def test_tokenize_keeps_bracketed_tags():
    assert tokenize("[noise] I I I") == ("[noise]", "i", "i", "i")


def test_correction_never_hurts_wer_when_replacement_matches_reference():
    # When a rule's replacement equals the span the reference actually
    # contains, applying it cannot raise WER against that reference.
    from corpusmill.transforms import TransformRule, apply_rules

    cases = [
        ("well have a great day sir", "well have a grey day sir", "have a grey day", "have a great day"),
        ("press two for billing", "rest you for billing", "rest you", "press two"),
        ("now in a few words please", "now and if you words please", "now and if you words", "now in a few words"),
    ]
    for ref_text, hyp_text, pattern, replacement in cases:
        ref = tuple(ref_text.split())
        hyp = tuple(hyp_text.split())
        rules = [TransformRule(tuple(pattern.split()), tuple(replacement.split()))]
        corrected = apply_rules(hyp, rules, "caller")
        assert wer(ref, corrected) <= wer(ref, hyp)


def test_relative_gain_matches_reported_rounding():
    agent = relative_gain_percent(22.1, 14.27)
    caller = relative_gain_percent(21.6, 17.5)
    assert round(agent) == 35
    assert round(caller) == 19
    assert agent == pytest.approx(35.4, abs=0.05)
