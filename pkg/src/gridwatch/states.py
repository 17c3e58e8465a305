"""Service and host state machine with topology-aware reachability.

A problem is tentative (SOFT) until max_attempts consecutive non-OK results
confirm it (HARD); only HARD transitions produce notification candidates.
Failed hosts are split into DOWN (reachable from the monitor) and
UNREACHABLE (every path to them crosses another failed host).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Iterable, Mapping, Union

from .topology import TopologyGraph

if TYPE_CHECKING:
    from .plugins import PerfDatum


class StatusCode(enum.Enum):
    """Service status. Severity order: OK < WARNING < UNKNOWN < CRITICAL."""

    OK = "OK"
    WARNING = "WARNING"
    CRITICAL = "CRITICAL"
    UNKNOWN = "UNKNOWN"

    @property
    def severity(self) -> int:
        return _SEVERITY[self]

    @property
    def is_problem(self) -> bool:
        return self is not StatusCode.OK


_SEVERITY = {
    StatusCode.OK: 0,
    StatusCode.WARNING: 1,
    StatusCode.UNKNOWN: 2,
    StatusCode.CRITICAL: 3,
}


def worst_status(statuses: Iterable[StatusCode]) -> StatusCode:
    """Most severe status of a non-empty iterable (associative/commutative)."""
    return max(statuses, key=lambda s: s.severity)


class HostReachability(enum.Enum):
    UP = "UP"
    DOWN = "DOWN"
    UNREACHABLE = "UNREACHABLE"


class StateType(enum.Enum):
    SOFT = "SOFT"
    HARD = "HARD"


StateValue = Union[StatusCode, HostReachability]


@dataclass(frozen=True)
class Target:
    """A host or a (host, service) pair."""

    host: str
    service: str | None = None

    @property
    def is_host(self) -> bool:
        return self.service is None

    @property
    def sort_key(self) -> tuple[str, str]:
        return (self.host, self.service or "")

    def __str__(self) -> str:
        return self.host if self.service is None else f"{self.host}/{self.service}"

    @classmethod
    def parse(cls, text: str) -> "Target":
        host, sep, service = text.partition("/")
        return cls(host, service if sep else None)


@dataclass
class CheckResult:
    """Outcome of one check execution (plugin, built-in, or passive)."""

    target: Target
    status: StatusCode
    summary: str
    perfdata: list["PerfDatum"] = field(default_factory=list)
    started_at: float = 0.0
    finished_at: float = 0.0
    origin: str = "active"  # active | passive

    def __post_init__(self) -> None:
        if "\n" in self.summary or "\r" in self.summary:
            raise ValueError("summary must be a single line")
        if self.finished_at < self.started_at:
            raise ValueError("finished_at must be >= started_at")


@dataclass
class MonitorState:
    """Per-target retained state; this is what persists across restarts."""

    target: Target
    current_status: StateValue
    state_type: StateType = StateType.HARD
    attempt: int = 1
    last_check: float | None = None
    last_state_change: float | None = None
    notification_number: int = 0
    acknowledged: bool = False
    last_notification_at: float | None = None

    @property
    def ok_value(self) -> StateValue:
        return HostReachability.UP if self.target.is_host else StatusCode.OK

    @property
    def is_problem(self) -> bool:
        return self.current_status is not self.ok_value

    @property
    def is_hard_problem(self) -> bool:
        return self.is_problem and self.state_type is StateType.HARD

    @classmethod
    def fresh(cls, target: Target) -> "MonitorState":
        value = HostReachability.UP if target.is_host else StatusCode.OK
        return cls(target=target, current_status=value)


@dataclass(frozen=True)
class Downtime:
    """Scheduled maintenance window [start_at, end_at)."""

    id: int
    target: Target
    start_at: float
    end_at: float
    author: str = ""
    comment: str = ""

    def __post_init__(self) -> None:
        if self.end_at <= self.start_at:
            raise ValueError("downtime must end after it starts")

    def active_at(self, now: float) -> bool:
        return self.start_at <= now < self.end_at


# --- engine events -----------------------------------------------------------

@dataclass(frozen=True)
class StateChange:
    target: Target
    old: StateValue
    new: StateValue
    state_type: StateType


@dataclass(frozen=True)
class NotificationCandidate:
    target: Target
    reason: str  # problem | recovery


@dataclass(frozen=True)
class EventHandlerTrigger:
    target: Target
    old: StateValue
    new: StateValue


@dataclass(frozen=True)
class MetricSample:
    target: Target
    perfdata: tuple["PerfDatum", ...]


EngineEvent = Union[StateChange, NotificationCandidate, EventHandlerTrigger, MetricSample]


class TargetMismatch(Exception):
    pass


class UnknownHost(Exception):
    pass


class UnknownTarget(KeyError):
    pass


def _run_machine(
    state: MonitorState,
    ok: bool,
    problem_value: StateValue,
    at: float,
    max_attempts: int,
) -> tuple[MonitorState, bool, bool]:
    """Shared SOFT/HARD transition core.

    Returns (new_state, promoted_to_hard_problem, hard_recovery).
    """
    new = replace(state, last_check=at)
    promoted = False
    recovered = False
    if ok:
        if state.is_problem:
            recovered = state.state_type is StateType.HARD
            new.current_status = state.ok_value
            new.state_type = StateType.HARD
            new.attempt = 1
            new.notification_number = 0
            new.acknowledged = False
            new.last_state_change = at
        else:
            new.state_type = StateType.HARD
            new.attempt = 1
    else:
        if not state.is_problem:
            new.current_status = problem_value
            new.attempt = 1
            new.last_state_change = at
            if max_attempts <= 1:
                new.state_type = StateType.HARD
                promoted = True
            else:
                new.state_type = StateType.SOFT
        elif state.state_type is StateType.SOFT:
            new.attempt = min(state.attempt + 1, max_attempts)
            if new.current_status is not problem_value:
                new.current_status = problem_value
                new.last_state_change = at
            if new.attempt >= max_attempts:
                new.state_type = StateType.HARD
                promoted = True
        else:  # already a HARD problem; the value may still shift
            if new.current_status is not problem_value:
                new.current_status = problem_value
                new.last_state_change = at
    return new, promoted, recovered


def _change_events(old: MonitorState, new: MonitorState) -> list[EngineEvent]:
    events: list[EngineEvent] = []
    if new.current_status is not old.current_status:
        events.append(StateChange(new.target, old.current_status,
                                  new.current_status, new.state_type))
        events.append(EventHandlerTrigger(new.target, old.current_status,
                                          new.current_status))
    return events


def apply_service_result(
    state: MonitorState,
    result: CheckResult,
    max_attempts: int,
) -> tuple[MonitorState, list[EngineEvent]]:
    """Advance a service's state machine by one check result."""
    if result.target != state.target or state.target.is_host:
        raise TargetMismatch(f"result for {result.target} applied to {state.target}")
    if max_attempts < 1:
        raise ValueError("max_attempts must be >= 1")
    new, promoted, recovered = _run_machine(
        state, result.status is StatusCode.OK, result.status,
        result.finished_at, max_attempts,
    )
    events = _change_events(state, new)
    if promoted:
        events.append(NotificationCandidate(new.target, "problem"))
    if recovered:
        events.append(NotificationCandidate(new.target, "recovery"))
    if result.perfdata:
        events.append(MetricSample(new.target, tuple(result.perfdata)))
    return new, events


def classify_host(
    topology: TopologyGraph,
    own_check_failed: Mapping[str, bool],
    host: str,
) -> HostReachability:
    """UP if the host's own check passes; otherwise DOWN when the failure is
    adjacent to the monitor (no parents, or some parent classifies UP) and
    UNREACHABLE when every parent is itself failed.
    """
    if host not in topology:
        raise UnknownHost(host)
    memo: dict[str, HostReachability] = {}

    def classify(h: str) -> HostReachability:
        cached = memo.get(h)
        if cached is not None:
            return cached
        if not own_check_failed.get(h, False):
            value = HostReachability.UP
        else:
            parents = topology.parents(h)
            if not parents or any(classify(p) is HostReachability.UP for p in parents):
                value = HostReachability.DOWN
            else:
                value = HostReachability.UNREACHABLE
        memo[h] = value
        return value

    return classify(host)


def failure_map(
    states: Mapping[str, MonitorState],
    override_host: str | None = None,
    override_failed: bool | None = None,
) -> dict[str, bool]:
    """Current own-check-failed view of the host fleet: any non-UP value
    (SOFT or HARD) counts as a failed check; unknown hosts count as passing.
    """
    failed = {h: s.current_status is not HostReachability.UP for h, s in states.items()}
    if override_host is not None and override_failed is not None:
        failed[override_host] = override_failed
    return failed


def apply_host_result(
    state: MonitorState,
    result: CheckResult,
    topology: TopologyGraph,
    sibling_states: Mapping[str, MonitorState],
    max_attempts: int,
) -> tuple[MonitorState, list[EngineEvent]]:
    """Advance a host's state machine; the problem value comes from
    reachability classification, not from the raw check status.

    When the host confirms (or shifts) a HARD DOWN/UNREACHABLE, StateChange/
    EventHandlerTrigger events are also emitted for every already-failed
    descendant whose classification flips; the caller owns applying those to
    the descendants' stored states.
    """
    if result.target != state.target or not state.target.is_host:
        raise TargetMismatch(f"result for {result.target} applied to {state.target}")
    host = state.target.host
    if host not in topology:
        raise UnknownHost(host)
    if max_attempts < 1:
        raise ValueError("max_attempts must be >= 1")

    ok = result.status is StatusCode.OK
    failed = failure_map(sibling_states, override_host=host, override_failed=not ok)
    problem_value = classify_host(topology, failed, host) if not ok else HostReachability.UP
    new, promoted, recovered = _run_machine(state, ok, problem_value,
                                            result.finished_at, max_attempts)
    events = _change_events(state, new)
    if promoted:
        events.append(NotificationCandidate(new.target, "problem"))
    if recovered:
        events.append(NotificationCandidate(new.target, "recovery"))
    if result.perfdata:
        events.append(MetricSample(new.target, tuple(result.perfdata)))

    went_hard_problem = (
        new.state_type is StateType.HARD
        and new.current_status in (HostReachability.DOWN, HostReachability.UNREACHABLE)
        and (state.state_type, state.current_status) != (new.state_type, new.current_status)
    )
    if went_hard_problem:
        for d in topology.descendants(host):
            ds = sibling_states.get(d)
            if ds is None or ds.current_status is HostReachability.UP:
                continue
            reclassified = classify_host(topology, failed, d)
            if reclassified is not ds.current_status:
                events.append(StateChange(ds.target, ds.current_status,
                                          reclassified, ds.state_type))
                events.append(EventHandlerTrigger(ds.target, ds.current_status,
                                                  reclassified))
    return new, events


def is_suppressed(
    state: MonitorState,
    downtimes: Iterable[Downtime],
    now: float,
) -> bool:
    """True while acknowledged or inside a scheduled downtime for the target."""
    if state.acknowledged:
        return True
    return any(d.target == state.target and d.active_at(now) for d in downtimes)
