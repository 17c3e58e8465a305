from __future__ import annotations

import random

import pytest
from hypothesis import given, strategies as st

from gridwatch.scheduling import (
    CheckQueue,
    ScheduledCheck,
    SchedulerPolicy,
    UnknownTarget,
    initial_offsets,
    initial_schedule,
    reschedule,
)
from gridwatch.states import MonitorState, StateType, StatusCode, Target

from conftest import model_from


def test_initial_offsets_four_targets():
    assert initial_offsets(4, 60) == [0.0, 15.0, 30.0, 45.0]


def test_initial_offsets_single_target():
    assert initial_offsets(1, 60) == [0.0]


def test_initial_offsets_seven_targets_strictly_increasing():
    offsets = initial_offsets(7, 60)
    assert len(offsets) == 7
    assert all(a < b for a, b in zip(offsets, offsets[1:]))
    assert offsets[-1] < 60
    assert offsets == [i * 60 / 7 for i in range(7)]


@given(st.integers(min_value=1, max_value=500),
       st.floats(min_value=1, max_value=3600, allow_nan=False))
def test_initial_offsets_property(n, interval):
    offsets = initial_offsets(n, interval)
    assert len(offsets) == n
    assert offsets[0] == 0.0
    assert all(0 <= o < interval for o in offsets)


def test_queue_empty_returns_none():
    q = CheckQueue()
    assert q.next_due(100.0) is None


def test_queue_tie_break_lexicographic():
    q = CheckQueue()
    q.schedule(ScheduledCheck(Target("h", "B"), due_at=5.0))
    q.schedule(ScheduledCheck(Target("h", "A"), due_at=5.0))
    first = q.next_due(5.0)
    second = q.next_due(5.0)
    assert first.target.service == "A"
    assert second.target.service == "B"


def test_queue_not_due_yet():
    q = CheckQueue()
    q.schedule(ScheduledCheck(Target("h"), due_at=10.0))
    assert q.next_due(9.0) is None
    assert q.peek_due_at() == 10.0


def test_queue_uniqueness_replacement():
    q = CheckQueue()
    target = Target("h", "S")
    q.schedule(ScheduledCheck(target, due_at=100.0))
    q.schedule(ScheduledCheck(target, due_at=5.0, kind="forced"))
    assert len(q) == 1
    check = q.next_due(5.0)
    assert check.kind == "forced"
    assert q.next_due(1000.0) is None  # the stale entry is gone


def test_queue_overdue_pops_in_due_order():
    q = CheckQueue()
    q.schedule(ScheduledCheck(Target("b"), due_at=3.0))
    q.schedule(ScheduledCheck(Target("a"), due_at=7.0))
    q.schedule(ScheduledCheck(Target("c"), due_at=1.0))
    order = [q.next_due(100.0).target.host for _ in range(3)]
    assert order == ["c", "b", "a"]


SCHED_CONFIG = """
define site {
    site_name s
    latitude 0
    longitude 0
}
define host {
    host_name h1
    address 127.0.0.1
    site s
    check_command check_tcp!1
}
define service {
    host_name h1
    service_description S
    check_command check_tcp!2
    check_interval 60
    retry_interval 15
}
"""


def svc_target_state(status, state_type):
    return MonitorState(target=Target("h1", "S"), current_status=status,
                        state_type=state_type)


def test_reschedule_soft_problem_uses_retry_interval():
    model = model_from(SCHED_CONFIG)
    policy = SchedulerPolicy(jitter_fraction=0.1)
    rng = random.Random(1)
    state = svc_target_state(StatusCode.CRITICAL, StateType.SOFT)
    check = reschedule(Target("h1", "S"), state, policy, model, now=1000.0, rng=rng)
    assert check.kind == "retry"
    assert 1000.0 + 15 * 0.9 <= check.due_at <= 1000.0 + 15 * 1.1


def test_reschedule_hard_ok_exact_without_jitter():
    model = model_from(SCHED_CONFIG)
    policy = SchedulerPolicy(jitter_fraction=0.0)
    state = svc_target_state(StatusCode.OK, StateType.HARD)
    check = reschedule(Target("h1", "S"), state, policy, model, now=1000.0)
    assert check.due_at == 1060.0
    assert check.kind == "normal"


def test_reschedule_hard_problem_uses_check_interval():
    model = model_from(SCHED_CONFIG)
    policy = SchedulerPolicy(jitter_fraction=0.0)
    state = svc_target_state(StatusCode.CRITICAL, StateType.HARD)
    check = reschedule(Target("h1", "S"), state, policy, model, now=0.0)
    assert check.due_at == 60.0
    assert check.kind == "normal"


def test_reschedule_unknown_target():
    model = model_from(SCHED_CONFIG)
    with pytest.raises(UnknownTarget):
        reschedule(Target("nope"), svc_target_state(StatusCode.OK, StateType.HARD),
                   SchedulerPolicy(), model, now=0.0)


def test_initial_schedule_spreads_by_class():
    lines = [SCHED_CONFIG]
    for i in range(2, 5):
        lines.append(f"""
define service {{
    host_name h1
    service_description S{i}
    check_command check_tcp!2
    check_interval 60
    retry_interval 15
}}
""")
    model = model_from("".join(lines))
    checks = initial_schedule(model, now=0.0)
    services = sorted((c for c in checks if not c.target.is_host),
                      key=lambda c: c.due_at)
    assert [c.due_at for c in services] == [i * 60 / 4 for i in range(4)]
    hosts = [c for c in checks if c.target.is_host]
    assert [c.due_at for c in hosts] == [0.0]


def test_policy_validation():
    with pytest.raises(ValueError):
        SchedulerPolicy(max_parallel_checks=0)
    with pytest.raises(ValueError):
        SchedulerPolicy(jitter_fraction=0.5)


def test_determinism_with_zero_jitter():
    model = model_from(SCHED_CONFIG)

    def dispatch_log():
        q = CheckQueue()
        for check in initial_schedule(model, now=0.0):
            q.schedule(check)
        log = []
        now = 0.0
        policy = SchedulerPolicy(jitter_fraction=0.0)
        for _ in range(50):
            check = q.next_due(now)
            if check is None:
                now += 1.0
                continue
            log.append((now, str(check.target), check.kind))
            state = MonitorState.fresh(check.target)
            q.schedule(reschedule(check.target, state, policy, model, now))
        return log

    assert dispatch_log() == dispatch_log()
