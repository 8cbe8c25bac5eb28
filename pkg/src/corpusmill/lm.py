"""Interpolated Kneser-Ney backoff n-gram models with ARPA serialization.

Training uses a single absolute discount per order (given explicitly or
derived as n1/(n1 + 2*n2) from that order's count-of-counts) and
continuation counts for the lower orders; the continuation unigram is left
undiscounted. N-grams that begin with the sentence-start marker cannot occur
as continuations, so those histories fall back to raw counts, and zero-mass
entries (the start marker itself, an unseen unknown token) are stored at
log10 -99 by ARPA convention.

Probabilities and backoff weights are stored as log10 values, exactly as
they serialize; queries and perplexity are resolved through the standard
backoff chain.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, TextIO, Union

BOS = "<s>"
EOS = "</s>"
UNK = "<unk>"

LOG10_ZERO = -99.0

DEFAULT_ORDER = 5
DEFAULT_VOCAB_CAP = 125_000

NGram = tuple[str, ...]


class ArpaFormatError(ValueError):
    """Malformed ARPA document: bad header, count mismatch, or bad fields."""


@dataclass
class NGramModel:
    """Backoff n-gram model: log10 probabilities plus log10 backoff weights.

    ``probs`` maps every stored n-gram to its conditional log10 probability;
    ``backoffs`` maps the n-grams that occur as histories to their log10
    backoff weight. Missing backoff entries are implicitly 0.0 (weight 1).
    """

    order: int
    probs: dict[NGram, float]
    backoffs: dict[NGram, float] = field(default_factory=dict)
    vocab: frozenset[str] = frozenset()

    def __post_init__(self):
        if not self.vocab:
            self.vocab = frozenset(ng[0] for ng in self.probs if len(ng) == 1)

    def map_token(self, token: str) -> str:
        return token if token in self.vocab else UNK

    def logprob(self, word: str, history: Sequence[str] = ()) -> float:
        """log10 p(word | history) through the backoff chain.

        Out-of-vocabulary tokens map to the unknown token; if the model has
        no unknown token the query resolves to log10 -99 rather than failing.
        """
        w = self.map_token(word)
        h = tuple(self.map_token(t) for t in history)[max(0, len(history) - (self.order - 1)):]
        return self._lookup(h, w)

    def _lookup(self, history: NGram, word: str) -> float:
        stored = self.probs.get(history + (word,))
        if stored is not None:
            return stored
        if not history:
            return LOG10_ZERO
        return self.backoffs.get(history, 0.0) + self._lookup(history[1:], word)

    def ngram_counts(self) -> dict[int, int]:
        counts: dict[int, int] = {k: 0 for k in range(1, self.order + 1)}
        for ng in self.probs:
            counts[len(ng)] += 1
        return counts


@dataclass(frozen=True)
class PerplexityScore:
    utterance_id: str
    ppl: float
    token_count: int
    oov_count: int


def prob(model: NGramModel, word: str, history: Sequence[str] = ()) -> float:
    """log10 p(word | history); module-level alias of NGramModel.logprob."""
    return model.logprob(word, history)


def perplexity(model: NGramModel, tokens: Sequence[str], utterance_id: str = "") -> PerplexityScore:
    """Perplexity of ``tokens`` plus end-of-sentence.

    The start marker conditions the first word but is never scored, so
    len(tokens) + 1 events contribute to the mean; token_count reports the
    input length only.
    """
    sequence = [BOS, *tokens, EOS]
    total = 0.0
    oov = 0
    for i in range(1, len(sequence)):
        if sequence[i] != EOS and sequence[i] not in model.vocab:
            oov += 1
        total += model.logprob(sequence[i], sequence[:i])
    scored = len(tokens) + 1
    return PerplexityScore(
        utterance_id=utterance_id,
        ppl=10.0 ** (-total / scored),
        token_count=len(tokens),
        oov_count=oov,
    )


def _count_ngrams(sentences: list[list[str]], order: int):
    # counts[k][(history, word)] and contexts[k][(history, word)] for k-grams,
    # k = len(history) + 1. Context words feed continuation counts; sentence-
    # initial n-grams and maximal-order n-grams contribute raw counts only.
    counts: list[dict[NGram, Counter]] = [defaultdict(Counter) for _ in range(order)]
    contexts: list[dict[NGram, dict[str, set]]] = [
        defaultdict(lambda: defaultdict(set)) for _ in range(order)
    ]
    for sentence in sentences:
        words = [BOS, *sentence, EOS]
        for i in range(len(words)):
            for n in range(1, order + 1):
                if i + n > len(words):
                    break
                history = tuple(words[i:i + n - 1])
                word = words[i + n - 1]
                if n == 1 and word == BOS:
                    # The start marker is context only, never a predicted event.
                    continue
                counts[n - 1][history][word] += 1
                if i > 0 and n < order:
                    contexts[n - 1][history][word].add(words[i - 1])
    return counts, contexts


def _auto_discount(counter_by_history: dict[NGram, Counter]) -> float:
    stats = Counter()
    for words in counter_by_history.values():
        stats.update(words.values())
    n1, n2 = stats[1], stats[2]
    if n1 + 2 * n2 == 0:
        # No singletons or doubletons to estimate from; fall back to the
        # midpoint rather than disabling discounting.
        return 0.5
    return n1 / (n1 + 2 * n2)


def train_model(
    corpus: Iterable[Sequence[str]],
    order: int = DEFAULT_ORDER,
    vocab_cap: Optional[int] = DEFAULT_VOCAB_CAP,
    discount: Union[float, str] = "auto",
) -> NGramModel:
    """Train an interpolated Kneser-Ney model.

    ``vocab_cap`` keeps only that many most-frequent tokens (ties broken
    alphabetically); the rest train as the unknown token. ``discount`` is a
    single absolute discount in [0, 1) applied at every order above unigram
    (and at the unigram for order-1 models), or "auto" for the per-order
    count-of-counts estimate.
    """
    sentences = [list(s) for s in corpus]
    if not sentences:
        raise ValueError("training corpus is empty")
    if order < 1:
        raise ValueError("order must be >= 1")
    if discount != "auto" and not 0.0 <= float(discount) < 1.0:
        raise ValueError("discount must be in [0, 1) or 'auto'")

    freq = Counter(token for sentence in sentences for token in sentence)
    freq.pop(BOS, None)
    freq.pop(EOS, None)
    if vocab_cap is not None and len(freq) > vocab_cap:
        kept = {w for w, _ in sorted(freq.items(), key=lambda kv: (-kv[1], kv[0]))[:vocab_cap]}
        sentences = [[t if t in kept else UNK for t in s] for s in sentences]
    else:
        kept = set(freq)
    vocab = frozenset(kept | {BOS, EOS, UNK})

    counts, contexts = _count_ngrams(sentences, order)
    discounts = [0.0] * (order + 1)  # discounts[k] applies at order k
    for k in range(2 if order > 1 else 1, order + 1):
        discounts[k] = _auto_discount(counts[k - 1]) if discount == "auto" else float(discount)

    # Probabilities per level, bottom-up; each level interpolates with the
    # fully smoothed level below.
    level_probs: list[dict[NGram, float]] = [dict() for _ in range(order + 1)]
    backoff_weights: dict[NGram, float] = {}

    for k in range(1, order + 1):
        d = discounts[k]
        for history, raw in counts[k - 1].items():
            ctx = contexts[k - 1].get(history, {})
            continuation_total = sum(len(s) for s in ctx.values())
            if k < order and continuation_total > 0:
                eff = {w: len(ctx[w]) for w in raw}
                total = continuation_total
            else:
                eff = dict(raw)
                total = sum(raw.values())
            n_types = len(eff)
            interp_weight = d * n_types / total
            if k > 1:
                backoff_weights[history] = interp_weight
            for w, c in eff.items():
                p = max(c - d, 0.0) / total
                if k == 1 and order == 1:
                    # Order-1 model: redistribute discounted mass uniformly
                    # over the predictable vocabulary so it stays proper.
                    p += interp_weight / (len(vocab) - 1)
                elif k > 1:
                    p += interp_weight * level_probs[k - 1][history[1:] + (w,)]
                level_probs[k][history + (w,)] = p
            if k == 1 and order == 1 and interp_weight > 0:
                for w in vocab - {BOS} - set(eff):
                    level_probs[1][(w,)] = interp_weight / (len(vocab) - 1)

    probs: dict[NGram, float] = {}
    for k in range(1, order + 1):
        for ngram, p in level_probs[k].items():
            probs[ngram] = math.log10(p) if p > 0 else LOG10_ZERO
    for marker in (BOS, UNK):
        probs.setdefault((marker,), LOG10_ZERO)

    backoffs: dict[NGram, float] = {}
    for history, weight in backoff_weights.items():
        backoffs[history] = math.log10(weight) if weight > 0 else LOG10_ZERO

    return NGramModel(order=order, probs=probs, backoffs=backoffs, vocab=vocab)


def write_arpa(model: NGramModel, out: Optional[TextIO] = None) -> str:
    """Serialize to ARPA text with full-precision floats and sorted n-grams."""
    counts = model.ngram_counts()
    lines = ["\\data\\"]
    for k in range(1, model.order + 1):
        lines.append(f"ngram {k}={counts[k]}")
    for k in range(1, model.order + 1):
        lines.append("")
        lines.append(f"\\{k}-grams:")
        ngrams = sorted(ng for ng in model.probs if len(ng) == k)
        for ng in ngrams:
            row = f"{model.probs[ng]!r}\t{' '.join(ng)}"
            if ng in model.backoffs:
                row += f"\t{model.backoffs[ng]!r}"
            lines.append(row)
    lines.append("")
    lines.append("\\end\\")
    document = "\n".join(lines) + "\n"
    if out is not None:
        out.write(document)
    return document


def read_arpa(document: Union[str, TextIO]) -> NGramModel:
    """Parse an ARPA document into an NGramModel.

    Raises ArpaFormatError on a malformed header, a section whose n-gram
    count disagrees with the header, or non-numeric probability fields.
    """
    text = document if isinstance(document, str) else document.read()
    lines = [line.rstrip("\n") for line in text.splitlines()]
    idx = 0
    while idx < len(lines) and lines[idx].strip() != "\\data\\":
        if lines[idx].strip():
            raise ArpaFormatError(f"unexpected content before \\data\\: {lines[idx]!r}")
        idx += 1
    if idx == len(lines):
        raise ArpaFormatError("missing \\data\\ header")
    idx += 1

    declared: dict[int, int] = {}
    while idx < len(lines):
        line = lines[idx].strip()
        if not line:
            idx += 1
            continue
        if line.startswith("ngram "):
            try:
                k_text, count_text = line[len("ngram "):].split("=")
                declared[int(k_text)] = int(count_text)
            except ValueError as exc:
                raise ArpaFormatError(f"bad count line: {line!r}") from exc
            idx += 1
        else:
            break
    if not declared or sorted(declared) != list(range(1, max(declared) + 1)):
        raise ArpaFormatError(f"bad ngram count declarations: {declared}")
    order = max(declared)

    probs: dict[NGram, float] = {}
    backoffs: dict[NGram, float] = {}
    seen: dict[int, int] = {k: 0 for k in declared}
    current: Optional[int] = None
    ended = False
    for line in lines[idx:]:
        line = line.strip()
        if not line:
            continue
        if line == "\\end\\":
            ended = True
            break
        if line.startswith("\\") and line.endswith("-grams:"):
            try:
                current = int(line[1:-len("-grams:")])
            except ValueError as exc:
                raise ArpaFormatError(f"bad section header: {line!r}") from exc
            if current not in declared:
                raise ArpaFormatError(f"section \\{current}-grams: not declared in header")
            continue
        if current is None:
            raise ArpaFormatError(f"n-gram entry outside any section: {line!r}")
        fields = line.split()
        if len(fields) == current + 1:
            logp_text, tokens, bow_text = fields[0], fields[1:], None
        elif len(fields) == current + 2:
            logp_text, tokens, bow_text = fields[0], fields[1:-1], fields[-1]
        else:
            raise ArpaFormatError(f"entry with {len(fields)} fields in \\{current}-grams: {line!r}")
        try:
            logp = float(logp_text)
            bow = float(bow_text) if bow_text is not None else None
        except ValueError as exc:
            raise ArpaFormatError(f"non-numeric field in entry: {line!r}") from exc
        ngram = tuple(tokens)
        probs[ngram] = logp
        if bow is not None:
            backoffs[ngram] = bow
        seen[current] += 1
    if not ended:
        raise ArpaFormatError("missing \\end\\ marker")
    for k, expected in declared.items():
        if seen[k] != expected:
            raise ArpaFormatError(f"header declares {expected} {k}-grams, body has {seen[k]}")
    return NGramModel(order=order, probs=probs, backoffs=backoffs)


def load_corpus(text: str) -> list[list[str]]:
    """One utterance per line, whitespace-tokenized, lowercased."""
    return [line.lower().split() for line in text.splitlines() if line.strip()]
