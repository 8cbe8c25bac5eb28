"""Discrete-event simulation of the re-decoding fleet.

Models the queue-fed worker fleet at desk scale: an inventory of work items
(one per utterance) seeds a FIFO queue, workers pull items, and a delivered
item stays invisible until its visibility timeout expires. Interrupted or
overrunning deliveries time out and requeue, so delivery is at-least-once,
while the completion ledger records each item exactly once.

Time is logical, the event loop is single-threaded, and every random draw
comes from one seeded generator, so a (config, manifest, seed) triple fully
determines the run.
"""

from __future__ import annotations

import heapq
import random
from dataclasses import dataclass
from typing import Optional, Sequence

QUEUED = "queued"
IN_FLIGHT = "in_flight"
COMPLETED = "completed"

EVENT_DELIVER = "deliver"
EVENT_COMPLETE = "complete"
EVENT_INTERRUPT = "interrupt"
EVENT_TIMEOUT = "timeout"


class SimulationError(RuntimeError):
    """Raised when the run exceeds the non-termination guard."""


@dataclass
class WorkItem:
    item_id: str
    processing_cost: float
    deliveries: int = 0
    state: str = QUEUED

    def __post_init__(self):
        if self.processing_cost <= 0:
            raise ValueError(f"processing cost must be positive, got {self.processing_cost}")


@dataclass(frozen=True)
class SimConfig:
    worker_count: int = 10
    visibility_timeout: float = 30.0
    interruption_rate: float = 0.0
    processing_time_mean: float = 1.0
    processing_time_spread: float = 0.0  # uniform half-width as a fraction of the mean
    rng_seed: int = 0
    worker_speeds: Optional[tuple[float, ...]] = None
    max_sim_time: float = 1e9

    def __post_init__(self):
        if self.worker_count < 1:
            raise ValueError("worker_count must be >= 1")
        if self.visibility_timeout <= 0:
            raise ValueError("visibility_timeout must be positive")
        if not 0.0 <= self.interruption_rate < 1.0:
            raise ValueError("interruption_rate must be in [0, 1)")
        if self.worker_speeds is not None and len(self.worker_speeds) != self.worker_count:
            raise ValueError("worker_speeds length must equal worker_count")

    def speed(self, worker: int) -> float:
        return self.worker_speeds[worker] if self.worker_speeds else 1.0


@dataclass(frozen=True)
class SimReport:
    completed_count: int
    redelivery_count: int
    makespan: float
    worker_utilization: tuple[float, ...]

    def render(self) -> str:
        lines = [
            f"completed      {self.completed_count}",
            f"redeliveries   {self.redelivery_count}",
            f"makespan       {self.makespan:.4f}",
        ]
        for worker, util in enumerate(self.worker_utilization):
            lines.append(f"worker {worker:>3} utilization {util:.3f}")
        return "\n".join(lines)


def enqueue_inventory(
    manifest_ids: Sequence[str],
    config: SimConfig,
    rng: Optional[random.Random] = None,
) -> list[WorkItem]:
    """One queued item per utterance, FIFO, with costs drawn up front."""
    if not manifest_ids:
        raise ValueError("inventory manifest is empty")
    if len(set(manifest_ids)) != len(manifest_ids):
        dupes = sorted({i for i in manifest_ids if list(manifest_ids).count(i) > 1})
        raise ValueError(f"inventory manifest has duplicate ids: {dupes[:5]}")
    rng = rng or random.Random(config.rng_seed)
    items = []
    for item_id in manifest_ids:
        spread = config.processing_time_spread
        if spread > 0:
            cost = config.processing_time_mean * rng.uniform(1 - spread, 1 + spread)
        else:
            cost = config.processing_time_mean
        items.append(WorkItem(item_id=item_id, processing_cost=cost))
    return items


class FleetSimulation:
    """Event-driven state: call step() until done, or use run_simulation()."""

    def __init__(self, config: SimConfig, manifest_ids: Sequence[str]):
        self.config = config
        self.rng = random.Random(config.rng_seed)
        self.items = {item.item_id: item for item in enqueue_inventory(manifest_ids, config, self.rng)}
        self.queue: list[str] = [item_id for item_id in manifest_ids]
        self.clock = 0.0
        self.completed_order: list[str] = []  # the exactly-once ledger
        self.event_log: list[tuple[float, str, str, int]] = []
        self._events: list[tuple[float, int, str, str, int, int]] = []  # (time, seq, kind, item, worker, generation)
        self._seq = 0
        self._idle = list(range(config.worker_count))
        self._busy_since: dict[int, float] = {}
        self._busy_time = [0.0] * config.worker_count
        self._generation: dict[str, int] = {item_id: 0 for item_id in manifest_ids}
        self._dispatch()

    @property
    def done(self) -> bool:
        return len(self.completed_order) == len(self.items)

    def _push(self, time: float, kind: str, item_id: str, worker: int, generation: int) -> None:
        self._seq += 1
        heapq.heappush(self._events, (time, self._seq, kind, item_id, worker, generation))

    def _dispatch(self) -> None:
        # Pair queued items with idle workers; the delivery itself is an event.
        while self.queue and self._idle:
            item_id = self.queue.pop(0)
            item = self.items[item_id]
            if item.state == COMPLETED:
                continue  # completed while waiting for redelivery
            worker = self._idle.pop(0)
            self._push(self.clock, EVENT_DELIVER, item_id, worker, self._generation[item_id])

    def step(self) -> bool:
        """Process one event; returns False when no events remain."""
        if not self._events:
            return False
        time, _, kind, item_id, worker, generation = heapq.heappop(self._events)
        self.clock = time
        item = self.items[item_id]

        if kind == EVENT_DELIVER:
            item.deliveries += 1
            item.state = IN_FLIGHT
            self._generation[item_id] += 1
            gen = self._generation[item_id]
            duration = item.processing_cost / self.config.speed(worker)
            if self.config.interruption_rate > 0 and self.rng.random() < self.config.interruption_rate:
                abort_at = time + self.rng.uniform(0.0, duration)
                self._push(abort_at, EVENT_INTERRUPT, item_id, worker, gen)
            else:
                self._push(time + duration, EVENT_COMPLETE, item_id, worker, gen)
            self._push(time + self.config.visibility_timeout, EVENT_TIMEOUT, item_id, worker, gen)
            self._busy_since[worker] = time

        elif kind == EVENT_COMPLETE:
            if item.state != COMPLETED:
                item.state = COMPLETED
                self.completed_order.append(item_id)
            self._free(worker, time)

        elif kind == EVENT_INTERRUPT:
            # Worker aborts mid-task; the item stays invisible until its
            # visibility timeout requeues it.
            self._free(worker, time)

        elif kind == EVENT_TIMEOUT:
            if item.state == IN_FLIGHT and generation == self._generation[item_id]:
                item.state = QUEUED
                self.queue.append(item_id)
                self._dispatch()

        self.event_log.append((time, kind, item_id, worker))
        return True

    def _free(self, worker: int, time: float) -> None:
        self._busy_time[worker] += time - self._busy_since.pop(worker)
        self._idle.append(worker)
        self._idle.sort()
        self._dispatch()

    def report(self) -> SimReport:
        makespan = self.clock
        redeliveries = sum(item.deliveries - 1 for item in self.items.values())
        busy = list(self._busy_time)
        for worker, since in self._busy_since.items():
            # Duplicate deliveries may still be in flight at drain time.
            busy[worker] += max(0.0, makespan - since)
        utilization = tuple((b / makespan) if makespan > 0 else 0.0 for b in busy)
        return SimReport(
            completed_count=len(self.completed_order),
            redelivery_count=redeliveries,
            makespan=makespan,
            worker_utilization=utilization,
        )


def run_simulation(config: SimConfig, manifest_ids: Sequence[str]) -> SimReport:
    """Run to queue drain; deterministic for a fixed seed.

    Raises SimulationError if the clock passes config.max_sim_time first.
    """
    sim = FleetSimulation(config, manifest_ids)
    while not sim.done:
        if not sim.step():
            raise SimulationError(
                f"queue stalled with {len(sim.items) - len(sim.completed_order)} items incomplete"
            )
        if sim.clock > config.max_sim_time:
            raise SimulationError(f"simulation exceeded max_sim_time={config.max_sim_time}")
    return sim.report()
