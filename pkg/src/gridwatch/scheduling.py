"""Check scheduling: a time-ordered queue with one entry per target.

Initial checks are spread evenly across each (kind, interval) class to
avoid a thundering herd; SOFT problems re-check at the retry interval,
everything else at the normal interval.  All time comes from the
injectable clock, so the whole schedule can run on virtual time.
"""

from __future__ import annotations

import heapq
import random
from dataclasses import dataclass

from .config import Model
from .states import MonitorState, StateType, Target, UnknownTarget


@dataclass(frozen=True)
class ScheduledCheck:
    target: Target
    due_at: float
    kind: str = "normal"  # normal | retry | forced


@dataclass
class SchedulerPolicy:
    max_parallel_checks: int = 4
    check_timeout_s: float = 10.0
    jitter_fraction: float = 0.0

    def __post_init__(self) -> None:
        if self.max_parallel_checks < 1:
            raise ValueError("max_parallel_checks must be >= 1")
        if not 0.0 <= self.jitter_fraction <= 0.1:
            raise ValueError("jitter_fraction must be within [0, 0.1]")


def initial_offsets(n: int, interval_s: float) -> list[float]:
    """Evenly interleaved first-check offsets: i * interval / n."""
    if n < 1:
        raise ValueError("need at least one target")
    return [i * interval_s / n for i in range(n)]


class CheckQueue:
    """Min-heap of scheduled checks, at most one per target.

    Ties on due_at break by (host, service) lexicographic order.  Scheduling
    a target already queued replaces its entry.
    """

    def __init__(self) -> None:
        self._heap: list[tuple[float, tuple[str, str], int, ScheduledCheck]] = []
        self._current: dict[Target, ScheduledCheck] = {}
        self._seq = 0

    def __len__(self) -> int:
        return len(self._current)

    def __contains__(self, target: Target) -> bool:
        return target in self._current

    def schedule(self, check: ScheduledCheck) -> None:
        self._current[check.target] = check
        self._seq += 1
        heapq.heappush(self._heap, (check.due_at, check.target.sort_key, self._seq, check))

    def remove(self, target: Target) -> None:
        self._current.pop(target, None)

    def entry_for(self, target: Target) -> ScheduledCheck | None:
        return self._current.get(target)

    def _skim(self) -> None:
        while self._heap:
            check = self._heap[0][3]
            if self._current.get(check.target) is check:
                return
            heapq.heappop(self._heap)  # stale entry, superseded or removed

    def peek_due_at(self) -> float | None:
        self._skim()
        return self._heap[0][0] if self._heap else None

    def next_due(self, now: float) -> ScheduledCheck | None:
        """Pop the earliest entry with due_at <= now, if any."""
        self._skim()
        if not self._heap or self._heap[0][0] > now:
            return None
        check = heapq.heappop(self._heap)[3]
        del self._current[check.target]
        return check


def target_interval_s(model: Model, target: Target, retry: bool) -> float:
    """The (possibly retry) check interval configured for a target."""
    if target.is_host:
        host = model.hosts.get(target.host)
        if host is None:
            raise UnknownTarget(str(target))
        # hosts have no separate retry interval; they re-check at their
        # normal cadence even while SOFT
        return host.check_interval_s
    service = model.services.get((target.host, target.service or ""))
    if service is None:
        raise UnknownTarget(str(target))
    return service.retry_interval_s if retry else service.check_interval_s


def reschedule(
    target: Target,
    new_state: MonitorState,
    policy: SchedulerPolicy,
    model: Model,
    now: float,
    rng: random.Random | None = None,
) -> ScheduledCheck:
    """Next check for a target that just produced a result."""
    retrying = new_state.state_type is StateType.SOFT and new_state.is_problem
    interval = target_interval_s(model, target, retrying)
    due = now + interval
    if policy.jitter_fraction > 0 and rng is not None:
        due += rng.uniform(-policy.jitter_fraction, policy.jitter_fraction) * interval
    return ScheduledCheck(target=target, due_at=due,
                          kind="retry" if retrying else "normal")


def initial_schedule(
    model: Model,
    now: float,
    rng: random.Random | None = None,
    jitter_fraction: float = 0.0,
) -> list[ScheduledCheck]:
    """First-check schedule for every host and service.

    Targets are grouped by (kind, interval); within each class the offsets
    are i * interval / n, so a class of n targets spreads across one full
    interval.
    """
    classes: dict[tuple[str, float], list[Target]] = {}
    for name, host in model.hosts.items():
        classes.setdefault(("host", host.check_interval_s), []).append(Target(name))
    for (host_name, desc), svc in model.services.items():
        classes.setdefault(("service", svc.check_interval_s), []).append(
            Target(host_name, desc))
    checks: list[ScheduledCheck] = []
    for (_, interval), targets in classes.items():
        targets.sort(key=lambda t: t.sort_key)
        offsets = initial_offsets(len(targets), interval)
        for target, offset in zip(targets, offsets):
            due = now + offset
            if jitter_fraction > 0 and rng is not None:
                due += rng.uniform(-jitter_fraction, jitter_fraction) * interval
            checks.append(ScheduledCheck(target=target, due_at=max(now, due)))
    return checks
