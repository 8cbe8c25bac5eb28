import io

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corpusmill.records import UtteranceRecord
from corpusmill.transforms import (
    Candidate,
    RuleError,
    TransformRule,
    apply_rules,
    export_targets,
    format_rule_line,
    lm_growth_percent,
    mine_candidates,
    parse_rule_line,
    read_rule_store,
)

# The curated caller-side and agent-side correction pairs exercised
# throughout the suite.
CALLER_PAIRS = [
    ("have a grey day", "have a great day"),
    ("yeah that be great", "yeah that'd be great"),
    ("okay think so much", "okay thanks so much"),
    ("b. e. as in boy", "b. as in boy"),
    ("a two one zero", "eight two one zero"),
    ("i don't have any count", "i don't have an account"),
]
AGENT_PAIRS = [
    ("horror leather increase", "for all other inquiries"),
    ("rest you", "press two"),
    ("oppressed you", "or press two"),
    ("arrest three", "press three"),
    ("um or cared", "customer care"),
    ("call back drone normal", "call back during normal"),
    ("for parts in excess serious", "for parts and accessories"),
    ("active eight", "activate"),
    ("chevy taco", "chevy tahoe"),
    ("now and if you words", "now in a few words"),
    ("retire fritcher jack", "free tire pressure check"),
]


def rule(pattern, replacement, scope="both"):
    return TransformRule(
        pattern=tuple(pattern.split()),
        replacement=tuple(replacement.split()),
        channel_scope=scope,
    )


def record(tokens, utterance_id, channel="caller"):
    return UtteranceRecord(
        utterance_id=utterance_id,
        call_id="c",
        channel=channel,
        speaker_id="s",
        duration_seconds=1.0,
        transcript=tuple(tokens.split()),
    )


ALL_RULES = [rule(p, r, "caller") for p, r in CALLER_PAIRS] + [
    rule(p, r, "agent") for p, r in AGENT_PAIRS
]


class TestRuleValidation:
    def test_pattern_must_differ_from_replacement(self):
        with pytest.raises(RuleError):
            rule("press two", "press two")

    def test_pattern_must_be_non_empty(self):
        with pytest.raises(RuleError):
            TransformRule(pattern=(), replacement=("x",))

    def test_bad_scope_rejected(self):
        with pytest.raises(RuleError):
            rule("a b", "c", scope="ivr")


class TestMineCandidates:
    def test_identical_full_utterances_counted(self):
        corpus = [record("press two", f"u{i}") for i in range(3)]
        candidates = mine_candidates(corpus, n_range=(2, 2), min_count=2)
        full = [c for c in candidates if c.kind == "full_utterance"]
        assert full[0].tokens == ("press", "two")
        assert full[0].frequency == 3

    def test_substructure_counted_across_contexts(self):
        corpus = [
            record("you have a grey day", "u1"),
            record("it is a grey day", "u2"),
        ]
        candidates = mine_candidates(corpus, n_range=(3, 3), min_count=2)
        subs = {c.tokens: c.frequency for c in candidates if c.kind == "substructure"}
        assert subs == {("a", "grey", "day"): 2}

    def test_empty_corpus(self):
        assert mine_candidates([], n_range=(2, 3), min_count=1) == []

    def test_channel_scoping(self):
        corpus = [record("rest you", "u1", "agent"), record("rest you", "u2", "caller")]
        agent_only = mine_candidates(corpus, n_range=(2, 2), min_count=1, channel="agent")
        assert all(
            c.frequency == 1 for c in agent_only
        ) and agent_only[0].sample_utterance_ids == ("u1",)

    def test_ranking_and_determinism(self):
        corpus = [
            record("press two", f"a{i}") for i in range(5)
        ] + [record("hold please", f"b{i}") for i in range(3)]
        first = mine_candidates(corpus, n_range=(2, 2), min_count=1)
        second = mine_candidates(list(corpus), n_range=(2, 2), min_count=1)
        assert first == second
        frequencies = [c.frequency for c in first]
        assert frequencies == sorted(frequencies, reverse=True)

    def test_min_count_validation(self):
        with pytest.raises(ValueError):
            mine_candidates([], n_range=(2, 2), min_count=0)


class TestApplyRules:
    def test_grey_day_correction(self):
        rules = [rule("have a grey day", "have a great day", "caller")]
        out = apply_rules("you have a grey day sir".split(), rules, "caller")
        assert out == tuple("you have a great day sir".split())
        assert rules[0].hit_count == 1

    def test_scope_isolation(self):
        rules = [rule("rest you", "press two", "agent")]
        tokens = tuple("rest you".split())
        assert apply_rules(tokens, rules, "caller") == tokens
        assert apply_rules(tokens, rules, "agent") == ("press", "two")
        assert rules[0].hit_count == 1

    def test_longest_match_wins(self):
        rules = [
            rule("b. e. as in boy", "b. as in boy"),
            rule("b. e.", "b."),
        ]
        out = apply_rules("b. e. as in boy".split(), rules, "caller")
        assert out == tuple("b. as in boy".split())

    def test_shorter_rule_fires_when_long_cannot(self):
        rules = [
            rule("b. e. as in boy", "b. as in boy"),
            rule("b. e.", "b."),
        ]
        out = apply_rules("b. e. as in zebra".split(), rules, "caller")
        assert out == tuple("b. as in zebra".split())

    def test_no_rescan_of_replacement(self):
        # Replacement contains another rule's pattern; a single pass must
        # not rewrite its own output.
        rules = [rule("x", "y z"), rule("y z", "boom")]
        assert apply_rules(("x",), rules, "caller") == ("y", "z")

    def test_every_paper_pair_converts(self):
        for pairs, channel in ((CALLER_PAIRS, "caller"), (AGENT_PAIRS, "agent")):
            for pattern, replacement in pairs:
                out = apply_rules(tuple(pattern.split()), ALL_RULES, channel)
                assert out == tuple(replacement.split()), pattern

    def test_idempotent_for_paper_rule_set(self):
        texts = [
            "well you have a grey day sir rest you",
            "oppressed you now and if you words",
            "i don't have any count but retire fritcher jack",
        ]
        for channel in ("caller", "agent"):
            for text in texts:
                once = apply_rules(tuple(text.split()), ALL_RULES, channel)
                twice = apply_rules(once, ALL_RULES, channel)
                assert twice == once

    def test_count_conservation(self):
        rules = [rule("uh", "um")]
        corpus = ["uh huh", "uh uh", "fine thanks"]
        spans = 0
        for text in corpus:
            out = apply_rules(tuple(text.split()), rules, "caller")
            spans += sum(1 for t in out if t == "um")
        assert rules[0].hit_count == spans == 3

    def test_tie_between_equal_length_rules_uses_list_order(self):
        rules = [rule("oh no", "one"), rule("oh no", "two")]
        assert apply_rules(("oh", "no"), rules, "caller") == ("one",)

    @given(st.lists(st.sampled_from(["a", "b", "c", "d"]), max_size=12))
    @settings(max_examples=60)
    def test_idempotence_under_safety(self, tokens):
        # No replacement contains any pattern as a contiguous subsequence.
        rules = [rule("a b", "x"), rule("c", "y d")]
        once = apply_rules(tuple(tokens), rules, "caller")
        assert apply_rules(once, rules, "caller") == once


class TestExport:
    def test_shared_replacement_deduplicated(self):
        rules = [rule("rest you", "press two"), rule("press to", "press two")]
        assert export_targets(rules) == [("press", "two")]

    def test_empty(self):
        assert export_targets([]) == []

    def test_growth_matches_thirty_percent_shape(self):
        # 6 distinct targets over a 20-line corpus -> 30%.
        rules = [rule(p, r, "caller") for p, r in CALLER_PAIRS]
        targets = export_targets(rules)
        assert len(targets) == 6
        assert lm_growth_percent(len(targets), 20) == pytest.approx(30.0)

    def test_growth_requires_positive_corpus(self):
        with pytest.raises(ValueError):
            lm_growth_percent(6, 0)


class TestRuleStore:
    def test_line_roundtrip(self):
        original = TransformRule(
            pattern=("rest", "you"),
            replacement=("press", "two"),
            channel_scope="agent",
            provenance="curated",
            created_at="2017-02-01T10:00:00",
        )
        line = format_rule_line(original)
        parsed = parse_rule_line(line)
        assert parsed.pattern == original.pattern
        assert parsed.replacement == original.replacement
        assert parsed.channel_scope == original.channel_scope
        assert parsed.provenance == original.provenance
        assert parsed.created_at == original.created_at

    def test_store_roundtrip(self):
        lines = "\n".join(format_rule_line(r) for r in ALL_RULES) + "\n"
        loaded = read_rule_store(io.StringIO(lines))
        assert [(r.pattern, r.replacement, r.channel_scope) for r in loaded] == [
            (r.pattern, r.replacement, r.channel_scope) for r in ALL_RULES
        ]

    def test_malformed_line_rejected(self):
        with pytest.raises(RuleError, match="5 tab-separated"):
            parse_rule_line("caller\tjust three\tfields")


def test_candidate_is_value_object():
    a = Candidate(tokens=("press", "two"), frequency=3, kind="full_utterance")
    b = Candidate(tokens=("press", "two"), frequency=3, kind="full_utterance")
    assert a == b
