"""Independent reference implementations used to derive expected test values.

Everything here is deliberately written from scratch (plain DP, exhaustive
DFS enumeration) rather than importing the library's own routines, so tests
that compare against these functions are dual-route checks.
"""

from __future__ import annotations

import math
import random


def dp_edit_distance(a, b):
    """Textbook full-matrix Levenshtein over token sequences."""
    n, m = len(a), len(b)
    table = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        table[i][0] = i
    for j in range(m + 1):
        table[0][j] = j
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            table[i][j] = min(
                table[i - 1][j - 1] + cost,
                table[i - 1][j] + 1,
                table[i][j - 1] + 1,
            )
    return table[n][m]


def enumerate_paths(lat, acoustic_scale):
    """All complete paths by DFS, as (tokens, combined_cost), sorted by
    (cost, tokens). Epsilon arcs contribute no token."""
    out = {}
    for arc in lat.arcs:
        out.setdefault(arc.from_state, []).append(arc)
    finals = dict(lat.finals)
    results = []

    def walk(state, tokens, cost):
        if state in finals:
            results.append((tokens, cost + finals[state]))
        for arc in out.get(state, []):
            next_tokens = tokens if arc.word == "<eps>" else tokens + (arc.word,)
            walk(arc.to_state, next_tokens, cost + arc.graph_cost + acoustic_scale * arc.acoustic_cost)

    walk(lat.start, (), 0.0)
    results.sort(key=lambda item: (item[1], item[0]))
    return results


def softmax_posteriors(costs):
    lowest = min(costs)
    weights = [math.exp(lowest - c) for c in costs]
    total = sum(weights)
    return [w / total for w in weights]


def exhaustive_mbr(lat, acoustic_scale):
    """Brute-force MBR: evaluate every path as a candidate against the full
    path posterior; ties keep the earlier (cheaper) candidate."""
    paths = enumerate_paths(lat, acoustic_scale)
    posteriors = softmax_posteriors([cost for _, cost in paths])
    best_tokens = None
    best_risk = None
    for tokens, _ in paths:
        risk = sum(
            p * dp_edit_distance(tokens, other)
            for (other, _), p in zip(paths, posteriors)
        ) / max(1, len(tokens))
        if best_risk is None or risk < best_risk:
            best_tokens, best_risk = tokens, risk
    return best_tokens, best_risk


def random_lattice_text(rng: random.Random, index: int, max_paths: int = 12) -> str:
    """A random small lattice in text form with at most max_paths paths.

    Alternates between a union-of-chains shape (exact path count) and a
    sausage shape (sampled widths whose product stays within the cap).
    """
    vocab = ["oh", "yes", "no", "call", "back", "hold", "press", "two", "ok", "<eps>"]
    lines = [f"UTT rand{index}"]
    if rng.random() < 0.5:
        n_paths = rng.randint(1, max_paths)
        state = 1
        for _ in range(n_paths):
            length = rng.randint(1, 4)
            prev = 0
            for j in range(length):
                nxt = 99 if j == length - 1 else state
                word = rng.choice(vocab)
                lines.append(
                    f"{prev} {nxt} {word} {rng.uniform(0, 3):.4f} {rng.uniform(0, 4):.4f}"
                )
                prev = nxt
                state += 1
        final = 99
    else:
        widths = []
        product = 1
        while len(widths) < rng.randint(1, 4):
            width = rng.randint(1, 3)
            if product * width > max_paths:
                break
            widths.append(width)
            product *= width
        if not widths:
            widths = [1]
        for layer, width in enumerate(widths):
            for _ in range(width):
                word = rng.choice(vocab)
                lines.append(
                    f"{layer} {layer + 1} {word} {rng.uniform(0, 3):.4f} {rng.uniform(0, 4):.4f}"
                )
        final = len(widths)
    lines.append(str(final))
    return "\n".join(lines) + "\n"


def pearson(xs, ys):
    n = len(xs)
    mx = sum(xs) / n
    my = sum(ys) / n
    cov = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    vx = sum((x - mx) ** 2 for x in xs)
    vy = sum((y - my) ** 2 for y in ys)
    return cov / math.sqrt(vx * vy)


def spearman(xs, ys):
    def rank(values):
        order = sorted(range(len(values)), key=lambda i: values[i])
        ranks = [0.0] * len(values)
        i = 0
        while i < len(order):
            j = i
            while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
                j += 1
            for k in range(i, j + 1):
                ranks[order[k]] = (i + j) / 2 + 1
            i = j + 1
        return ranks

    return pearson(rank(xs), rank(ys))
