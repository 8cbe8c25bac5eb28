"""Decoder word lattices: parsing, N-best extraction, and MBR decoding.

A lattice is a weighted DAG of word hypotheses with graph and acoustic costs
in negative-log units. From it we derive the two per-utterance confidence
signals used for data selection: the cost gap between the best and
second-best distinct word sequences, and the minimum-Bayes-risk score
(expected edit distance of the chosen hypothesis under the path posterior,
per hypothesis word).

Text format, one lattice per blank-line-terminated block::

    UTT <utterance_id>
    <from> <to> <word|<eps>> <graph_cost> <acoustic_cost>
    ...
    <state> [<final_cost>]

All operations are pure over immutable inputs.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

from .metrics import edit_distance

EPSILON = "<eps>"
DEFAULT_ACOUSTIC_SCALE = 0.1
DEFAULT_NBEST = 100

POSTERIOR_TOLERANCE = 1e-6


class LatticeError(ValueError):
    """Base class for lattice parsing and validation failures."""


class LatticeSyntaxError(LatticeError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class LatticeStructureError(LatticeError):
    """Cycle, connectivity, or no-complete-path violations."""


@dataclass(frozen=True)
class Arc:
    from_state: int
    to_state: int
    word: str
    graph_cost: float
    acoustic_cost: float

    def combined_cost(self, acoustic_scale: float) -> float:
        return self.graph_cost + acoustic_scale * self.acoustic_cost


@dataclass(frozen=True)
class Lattice:
    utterance_id: str
    start: int
    arcs: tuple[Arc, ...]
    finals: tuple[tuple[int, float], ...]  # (state, final_cost), sorted by state

    @property
    def states(self) -> tuple[int, ...]:
        seen = {self.start}
        for arc in self.arcs:
            seen.add(arc.from_state)
            seen.add(arc.to_state)
        for state, _ in self.finals:
            seen.add(state)
        return tuple(sorted(seen))

    def final_cost(self, state: int) -> Optional[float]:
        for s, cost in self.finals:
            if s == state:
                return cost
        return None


@dataclass(frozen=True)
class WeightedPath:
    tokens: tuple[str, ...]
    combined_cost: float
    posterior: Optional[float] = None


@dataclass(frozen=True)
class MbrResult:
    hypothesis: tuple[str, ...]
    risk: float


def parse_lattice(text: str) -> Lattice:
    """Parse a single-lattice document; see the module docstring for grammar."""
    lattices = list(iter_lattices(text))
    if len(lattices) != 1:
        raise LatticeError(f"expected exactly one lattice block, found {len(lattices)}")
    return lattices[0]


def iter_lattices(text: str) -> Iterator[Lattice]:
    """Yield every lattice block in a document, validating each."""
    block: list[tuple[int, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            if block:
                yield _parse_block(block)
                block = []
            continue
        block.append((lineno, line))
    if block:
        yield _parse_block(block)


def _parse_block(block: list[tuple[int, str]]) -> Lattice:
    lineno, header = block[0]
    fields = header.split()
    if len(fields) != 2 or fields[0] != "UTT":
        raise LatticeSyntaxError(f"expected 'UTT <utterance_id>', got {header!r}", lineno)
    utterance_id = fields[1]

    arcs: list[Arc] = []
    finals: dict[int, float] = {}
    start: Optional[int] = None
    for lineno, line in block[1:]:
        parts = line.split()
        try:
            if len(parts) == 5:
                arc = Arc(
                    from_state=int(parts[0]),
                    to_state=int(parts[1]),
                    word=parts[2],
                    graph_cost=float(parts[3]),
                    acoustic_cost=float(parts[4]),
                )
                arcs.append(arc)
                if start is None:
                    start = arc.from_state
            elif len(parts) in (1, 2):
                state = int(parts[0])
                cost = float(parts[1]) if len(parts) == 2 else 0.0
                if state in finals:
                    raise LatticeSyntaxError(f"duplicate final-state line for state {state}", lineno)
                if not math.isfinite(cost) or cost < 0:
                    raise LatticeSyntaxError("final cost must be finite and non-negative", lineno)
                finals[state] = cost
                if start is None:
                    start = state
            else:
                raise LatticeSyntaxError(f"expected arc or final-state line, got {line!r}", lineno)
        except ValueError as exc:
            if isinstance(exc, LatticeError):
                raise
            raise LatticeSyntaxError(str(exc), lineno) from exc
        if len(parts) == 5 and (
            not math.isfinite(arcs[-1].graph_cost)
            or not math.isfinite(arcs[-1].acoustic_cost)
            or arcs[-1].graph_cost < 0
            or arcs[-1].acoustic_cost < 0
        ):
            raise LatticeSyntaxError("arc costs must be finite and non-negative", lineno)

    if start is None:
        raise LatticeSyntaxError("lattice block has no arcs or final states", block[0][0])
    if not finals:
        raise LatticeStructureError(f"lattice {utterance_id!r}: no final states, no complete path")

    lat = Lattice(
        utterance_id=utterance_id,
        start=start,
        arcs=tuple(sorted(arcs, key=lambda a: (a.from_state, a.to_state, a.word, a.graph_cost, a.acoustic_cost))),
        finals=tuple(sorted(finals.items())),
    )
    _validate(lat)
    return lat


def _validate(lat: Lattice) -> None:
    states = lat.states
    out_arcs: dict[int, list[Arc]] = {s: [] for s in states}
    in_deg = {s: 0 for s in states}
    for arc in lat.arcs:
        out_arcs[arc.from_state].append(arc)
        in_deg[arc.to_state] += 1

    # Kahn's algorithm: leftovers mean a cycle.
    ready = [s for s in states if in_deg[s] == 0]
    visited = 0
    deg = dict(in_deg)
    while ready:
        state = ready.pop()
        visited += 1
        for arc in out_arcs[state]:
            deg[arc.to_state] -= 1
            if deg[arc.to_state] == 0:
                ready.append(arc.to_state)
    if visited != len(states):
        cyclic = sorted(s for s in states if deg[s] > 0)
        raise LatticeStructureError(f"lattice {lat.utterance_id!r}: cycle detected involving states {cyclic}")

    reachable = {lat.start}
    frontier = [lat.start]
    while frontier:
        state = frontier.pop()
        for arc in out_arcs[state]:
            if arc.to_state not in reachable:
                reachable.add(arc.to_state)
                frontier.append(arc.to_state)
    unreachable = sorted(set(states) - reachable)
    if unreachable:
        raise LatticeStructureError(
            f"lattice {lat.utterance_id!r}: states {unreachable} unreachable from start {lat.start}"
        )

    final_states = {s for s, _ in lat.finals}
    coreachable = set(final_states)
    in_arcs: dict[int, list[int]] = {s: [] for s in states}
    for arc in lat.arcs:
        in_arcs[arc.to_state].append(arc.from_state)
    frontier = list(final_states)
    while frontier:
        state = frontier.pop()
        for prev in in_arcs[state]:
            if prev not in coreachable:
                coreachable.add(prev)
                frontier.append(prev)
    stranded = sorted(set(states) - coreachable)
    if stranded:
        raise LatticeStructureError(
            f"lattice {lat.utterance_id!r}: states {stranded} cannot reach a final state"
        )


def serialize_lattice(lat: Lattice) -> str:
    """Canonical text form: arcs sorted by (from, to, word), finals by state."""
    lines = [f"UTT {lat.utterance_id}"]
    for arc in sorted(lat.arcs, key=lambda a: (a.from_state, a.to_state, a.word, a.graph_cost, a.acoustic_cost)):
        lines.append(f"{arc.from_state} {arc.to_state} {arc.word} {arc.graph_cost!r} {arc.acoustic_cost!r}")
    for state, cost in lat.finals:
        lines.append(f"{state}" if cost == 0.0 else f"{state} {cost!r}")
    return "\n".join(lines) + "\n"


def serialize_lattices(lats: Sequence[Lattice]) -> str:
    return "\n".join(serialize_lattice(lat) for lat in lats)


def _completion_costs(lat: Lattice, acoustic_scale: float) -> dict[int, float]:
    # Exact cheapest cost from each state to termination, by reverse
    # topological sweep; used as the A* heuristic for n-best search.
    states = lat.states
    out_arcs: dict[int, list[Arc]] = {s: [] for s in states}
    in_deg = {s: 0 for s in states}
    for arc in lat.arcs:
        out_arcs[arc.from_state].append(arc)
        in_deg[arc.to_state] += 1
    order: list[int] = []
    ready = [s for s in states if in_deg[s] == 0]
    deg = dict(in_deg)
    while ready:
        state = ready.pop()
        order.append(state)
        for arc in out_arcs[state]:
            deg[arc.to_state] -= 1
            if deg[arc.to_state] == 0:
                ready.append(arc.to_state)

    best: dict[int, float] = {}
    for state in reversed(order):
        cost = lat.final_cost(state)
        best_here = math.inf if cost is None else cost
        for arc in out_arcs[state]:
            via = arc.combined_cost(acoustic_scale) + best[arc.to_state]
            if via < best_here:
                best_here = via
        best[state] = best_here
    return best


def iter_paths(lat: Lattice, acoustic_scale: float = DEFAULT_ACOUSTIC_SCALE) -> Iterator[WeightedPath]:
    """Yield complete paths in ascending (combined_cost, tokens) order.

    A* over partial paths with the exact completion cost as heuristic, so
    completions pop from the frontier already globally ordered; epsilon
    words are dropped from the token sequences.
    """
    heuristic = _completion_costs(lat, acoustic_scale)
    out_arcs: dict[int, list[Arc]] = {s: [] for s in lat.states}
    for arc in lat.arcs:
        out_arcs[arc.from_state].append(arc)

    counter = 0
    # Entries: (priority_cost, tokens, seq, state, cost_so_far); state None marks a completion.
    frontier: list[tuple[float, tuple[str, ...], int, Optional[int], float]] = []
    heapq.heappush(frontier, (heuristic[lat.start], (), counter, lat.start, 0.0))
    while frontier:
        priority, tokens, _, state, cost = heapq.heappop(frontier)
        if state is None:
            yield WeightedPath(tokens=tokens, combined_cost=cost)
            continue
        final_cost = lat.final_cost(state)
        if final_cost is not None:
            counter += 1
            heapq.heappush(frontier, (cost + final_cost, tokens, counter, None, cost + final_cost))
        for arc in out_arcs[state]:
            next_cost = cost + arc.combined_cost(acoustic_scale)
            next_tokens = tokens if arc.word == EPSILON else tokens + (arc.word,)
            counter += 1
            heapq.heappush(
                frontier,
                (next_cost + heuristic[arc.to_state], next_tokens, counter, arc.to_state, next_cost),
            )


def nbest_paths(lat: Lattice, n: int, acoustic_scale: float = DEFAULT_ACOUSTIC_SCALE) -> list[WeightedPath]:
    """The n cheapest complete paths, ties broken by token order."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if acoustic_scale <= 0:
        raise ValueError("acoustic_scale must be > 0")
    paths = []
    for path in iter_paths(lat, acoustic_scale):
        paths.append(path)
        if len(paths) == n:
            break
    return paths


def path_posteriors(paths: Sequence[WeightedPath]) -> list[WeightedPath]:
    """Softmax of negated costs over the given path set, in log space."""
    if not paths:
        raise ValueError("path_posteriors requires a non-empty path list")
    lowest = min(p.combined_cost for p in paths)
    weights = [math.exp(lowest - p.combined_cost) for p in paths]
    total = sum(weights)
    return [
        WeightedPath(tokens=p.tokens, combined_cost=p.combined_cost, posterior=w / total)
        for p, w in zip(paths, weights)
    ]


def lattice_confidence(lat: Lattice, acoustic_scale: float = DEFAULT_ACOUSTIC_SCALE) -> Optional[float]:
    """Cost gap between the best and second-best distinct token sequences.

    None when the lattice holds fewer than two distinct sequences. Examined
    and rejected as a selection signal; kept for reporting.
    """
    best: Optional[WeightedPath] = None
    for path in iter_paths(lat, acoustic_scale):
        if best is None:
            best = path
        elif path.tokens != best.tokens:
            return path.combined_cost - best.combined_cost
    return None


def mbr_risk(hypothesis: Sequence[str], paths: Sequence[WeightedPath]) -> float:
    """Expected edit distance to the posterior-weighted paths, per hypothesis word.

    An empty hypothesis uses divisor 1.
    """
    if not paths:
        raise ValueError("mbr_risk requires a non-empty path list")
    total_posterior = sum(p.posterior if p.posterior is not None else math.nan for p in paths)
    if math.isnan(total_posterior) or abs(total_posterior - 1.0) > POSTERIOR_TOLERANCE:
        raise ValueError(f"path posteriors must be normalized (sum={total_posterior})")
    hyp = tuple(hypothesis)
    expected = 0.0
    for path in paths:
        assert path.posterior is not None
        if path.posterior == 0.0:
            continue
        expected += path.posterior * edit_distance(hyp, path.tokens)
    return expected / max(1, len(hyp))


def mbr_decode(
    lat: Lattice,
    n: int = DEFAULT_NBEST,
    acoustic_scale: float = DEFAULT_ACOUSTIC_SCALE,
) -> MbrResult:
    """Pick the n-best candidate with the lowest expected edit distance.

    Candidates and the posterior both come from the same n-best list, so with
    n at or above the lattice's path count this is exhaustive minimization.
    Ties go to the candidate appearing earlier in the n-best order, i.e. the
    lower combined cost.
    """
    candidates = path_posteriors(nbest_paths(lat, n, acoustic_scale))
    best_tokens = candidates[0].tokens
    best_risk = mbr_risk(best_tokens, candidates)
    for candidate in candidates[1:]:
        risk = mbr_risk(candidate.tokens, candidates)
        if risk < best_risk:
            best_tokens, best_risk = candidate.tokens, risk
    return MbrResult(hypothesis=best_tokens, risk=best_risk)
