from __future__ import annotations

import random
from dataclasses import replace

import pytest
from hypothesis import given, settings, strategies as st

from gridwatch.states import (
    CheckResult,
    Downtime,
    EventHandlerTrigger,
    HostReachability,
    MetricSample,
    MonitorState,
    NotificationCandidate,
    StateChange,
    StateType,
    StatusCode,
    Target,
    TargetMismatch,
    apply_host_result,
    apply_service_result,
    classify_host,
    is_suppressed,
    worst_status,
)
from gridwatch.topology import TopologyGraph

OK, WARN, CRIT, UNK = (StatusCode.OK, StatusCode.WARNING,
                       StatusCode.CRITICAL, StatusCode.UNKNOWN)
SOFT, HARD = StateType.SOFT, StateType.HARD
UP, DOWN, UNREACHABLE = (HostReachability.UP, HostReachability.DOWN,
                         HostReachability.UNREACHABLE)

SVC = Target("ce01", "CPU")


def svc_state(status=OK, state_type=HARD, attempt=1, **kw) -> MonitorState:
    return MonitorState(target=SVC, current_status=status, state_type=state_type,
                        attempt=attempt, **kw)


def svc_result(status, at=100.0, perfdata=()) -> CheckResult:
    return CheckResult(target=SVC, status=status, summary=f"{status.name} result",
                       perfdata=list(perfdata), started_at=at, finished_at=at)


# --- independent transition-table oracle --------------------------------------
#
# Coded straight from the stated rules, separately from the implementation:
# a non-OK result from OK starts a SOFT episode at attempt 1 (immediately
# HARD when max_attempts is 1); consecutive non-OK results increment the
# attempt and promote to HARD at max_attempts; an OK result ends the episode,
# notifying only if the problem had been confirmed HARD.

def oracle_transition(status, state_type, attempt, result_status, max_attempts):
    """-> (new_status, new_type, new_attempt, candidate_reasons)"""
    if result_status is OK:
        if status is OK:
            return (OK, HARD, 1, frozenset())
        if state_type is HARD:
            return (OK, HARD, 1, frozenset({"recovery"}))
        return (OK, HARD, 1, frozenset())
    if status is OK:
        if max_attempts == 1:
            return (result_status, HARD, 1, frozenset({"problem"}))
        return (result_status, SOFT, 1, frozenset())
    if state_type is SOFT:
        nxt = attempt + 1
        if nxt >= max_attempts:
            return (result_status, HARD, max_attempts, frozenset({"problem"}))
        return (result_status, SOFT, nxt, frozenset())
    return (result_status, HARD, attempt, frozenset())


def oracle_reachable_states(max_attempts):
    """Closure of (status, type, attempt) triples under the oracle itself."""
    seen = {(OK, HARD, 1)}
    frontier = [(OK, HARD, 1)]
    while frontier:
        status, state_type, attempt = frontier.pop()
        for result in StatusCode:
            ns, nt, na, _ = oracle_transition(status, state_type, attempt,
                                              result, max_attempts)
            if (ns, nt, na) not in seen:
                seen.add((ns, nt, na))
                frontier.append((ns, nt, na))
    return sorted(seen, key=lambda s: (s[0].name, s[1].name, s[2]))


@pytest.mark.parametrize("max_attempts", [1, 2, 3, 4, 5])
def test_service_machine_matches_oracle_exhaustively(max_attempts):
    for status, state_type, attempt in oracle_reachable_states(max_attempts):
        for result_status in StatusCode:
            state = svc_state(status, state_type, attempt)
            new, events = apply_service_result(state, svc_result(result_status),
                                               max_attempts)
            exp_status, exp_type, exp_attempt, exp_candidates = oracle_transition(
                status, state_type, attempt, result_status, max_attempts)
            got_candidates = frozenset(e.reason for e in events
                                       if isinstance(e, NotificationCandidate))
            context = (status, state_type, attempt, result_status, max_attempts)
            assert new.current_status is exp_status, context
            assert new.state_type is exp_type, context
            assert new.attempt == exp_attempt, context
            assert got_candidates == exp_candidates, context
            # StateChange/EventHandlerTrigger exactly on value changes
            changed = exp_status is not status
            assert any(isinstance(e, StateChange) for e in events) == changed
            assert any(isinstance(e, EventHandlerTrigger) for e in events) == changed


def test_first_critical_goes_soft_without_candidate():
    new, events = apply_service_result(svc_state(OK, HARD, 1), svc_result(CRIT), 3)
    assert (new.current_status, new.state_type, new.attempt) == (CRIT, SOFT, 1)
    kinds = [type(e) for e in events]
    assert StateChange in kinds and EventHandlerTrigger in kinds
    assert NotificationCandidate not in kinds


def test_promotion_to_hard_emits_problem_candidate():
    new, events = apply_service_result(svc_state(CRIT, SOFT, 2), svc_result(CRIT), 3)
    assert (new.current_status, new.state_type, new.attempt) == (CRIT, HARD, 3)
    assert NotificationCandidate(SVC, "problem") in events


def test_ok_on_ok_only_updates_last_check():
    state = svc_state(OK, HARD, 1, last_check=50.0)
    new, events = apply_service_result(state, svc_result(OK, at=100.0), 3)
    assert new == replace(state, last_check=100.0)
    assert events == []


def test_perfdata_emits_metric_sample():
    from gridwatch.plugins import PerfDatum
    datum = PerfDatum(label="load", value=0.5)
    new, events = apply_service_result(svc_state(), svc_result(OK, perfdata=[datum]), 3)
    assert MetricSample(SVC, (datum,)) in events


def test_recovery_resets_counters_and_ack():
    state = svc_state(CRIT, HARD, 3, notification_number=4, acknowledged=True,
                      last_notification_at=90.0)
    new, events = apply_service_result(state, svc_result(OK), 3)
    assert new.current_status is OK and new.state_type is HARD
    assert new.attempt == 1
    assert new.notification_number == 0
    assert new.acknowledged is False
    assert NotificationCandidate(SVC, "recovery") in events


def test_soft_recovery_has_no_candidate():
    new, events = apply_service_result(svc_state(WARN, SOFT, 1), svc_result(OK), 3)
    assert new.current_status is OK
    assert not any(isinstance(e, NotificationCandidate) for e in events)


def test_target_mismatch_raises():
    other = CheckResult(target=Target("ce01", "MEM"), status=OK, summary="x",
                        started_at=0, finished_at=0)
    with pytest.raises(TargetMismatch):
        apply_service_result(svc_state(), other, 3)


def test_status_severity_order():
    assert [s.name for s in sorted(StatusCode, key=lambda s: s.severity)] == \
        ["OK", "WARNING", "UNKNOWN", "CRITICAL"]
    assert worst_status([OK, WARN, CRIT, UNK]) is CRIT
    assert worst_status([OK, UNK, WARN]) is UNK


# --- reachability ---------------------------------------------------------------
#
# BFS oracle: breadth-first from the monitor (which reaches every parentless
# host); failed hosts reached through passing hosts are DOWN, every other
# failed host is UNREACHABLE.

def bfs_oracle(parents: dict[str, tuple[str, ...]], failed: dict[str, bool]):
    children: dict[str, list[str]] = {h: [] for h in parents}
    for h, ps in parents.items():
        for p in ps:
            children[p].append(h)
    down: set[str] = set()
    passing_reached: set[str] = set()
    frontier = [h for h, ps in parents.items() if not ps]
    while frontier:
        nxt = []
        for h in frontier:
            if h in down or h in passing_reached:
                continue
            if failed[h]:
                down.add(h)  # reached, but the path stops here
            else:
                passing_reached.add(h)
                nxt.extend(children[h])
        frontier = nxt
    out = {}
    for h in parents:
        if not failed[h]:
            out[h] = UP
        elif h in down:
            out[h] = DOWN
        else:
            out[h] = UNREACHABLE
    return out


def random_dag(rng: random.Random, max_hosts: int = 30):
    n = rng.randint(1, max_hosts)
    names = [f"h{i:02d}" for i in range(n)]
    parents: dict[str, tuple[str, ...]] = {}
    for i, name in enumerate(names):
        if i == 0 or rng.random() < 0.2:
            parents[name] = ()
        else:
            count = rng.randint(1, min(2, i))
            parents[name] = tuple(rng.sample(names[:i], count))
    return parents


def downward_closed_failures(rng: random.Random,
                             parents: dict[str, tuple[str, ...]]):
    """Failure sets a real network produces: everything below a failed host
    fails as well (the monitor cannot see through a dead router)."""
    children: dict[str, list[str]] = {h: [] for h in parents}
    for h, ps in parents.items():
        for p in ps:
            children[p].append(h)
    failed = {h: rng.random() < 0.3 for h in parents}
    frontier = [h for h, f in failed.items() if f]
    while frontier:
        h = frontier.pop()
        for c in children[h]:
            if not failed[c]:
                failed[c] = True
                frontier.append(c)
    return failed


def test_chain_root_down_descendants_unreachable():
    parents = {"root": (), "a": ("root",), "b": ("a",), "c": ("b",)}
    topo = TopologyGraph(parents)
    failed = {"root": True, "a": True, "b": True, "c": True}
    assert classify_host(topo, failed, "root") is DOWN
    for h in ("a", "b", "c"):
        assert classify_host(topo, failed, h) is UNREACHABLE
    assert bfs_oracle(parents, failed) == {"root": DOWN, "a": UNREACHABLE,
                                           "b": UNREACHABLE, "c": UNREACHABLE}


def test_diamond_one_up_parent_means_down():
    parents = {"p1": (), "p2": (), "child": ("p1", "p2")}
    topo = TopologyGraph(parents)
    failed = {"p1": False, "p2": True, "child": True}
    assert classify_host(topo, failed, "child") is DOWN
    assert bfs_oracle(parents, failed)["child"] is DOWN


def test_all_checks_pass_everything_up():
    parents = {"r": (), "a": ("r",)}
    topo = TopologyGraph(parents)
    failed = {"r": False, "a": False}
    assert classify_host(topo, failed, "r") is UP
    assert classify_host(topo, failed, "a") is UP


def test_parentless_host_never_unreachable():
    topo = TopologyGraph({"lonely": ()})
    assert classify_host(topo, {"lonely": True}, "lonely") is DOWN


def test_reachability_matches_bfs_oracle_on_random_dags():
    rng = random.Random(0xC0FFEE)
    for _ in range(300):
        parents = random_dag(rng)
        topo = TopologyGraph(parents)
        failed = downward_closed_failures(rng, parents)
        expected = bfs_oracle(parents, failed)
        for h in parents:
            assert classify_host(topo, failed, h) is expected[h], (parents, failed, h)


@settings(max_examples=200)
@given(st.integers(min_value=0, max_value=2**63 - 1))
def test_no_unreachable_root_property(seed):
    rng = random.Random(seed)
    parents = random_dag(rng, max_hosts=15)
    topo = TopologyGraph(parents)
    failed = {h: rng.random() < 0.5 for h in parents}
    for h, ps in parents.items():
        if not ps:
            assert classify_host(topo, failed, h) in (UP, DOWN)


# --- host results with descendant reclassification ------------------------------

def host_state(name, status=UP, state_type=HARD, attempt=1):
    return MonitorState(target=Target(name), current_status=status,
                        state_type=state_type, attempt=attempt)


def host_result(name, status, at=100.0):
    return CheckResult(target=Target(name), status=status, summary="ping",
                       started_at=at, finished_at=at)


def test_root_hard_down_reclassifies_failed_descendants():
    parents = {"root": (), "a": ("root",), "b": ("root",), "c": ("b",)}
    topo = TopologyGraph(parents)
    states = {
        "root": host_state("root", DOWN, SOFT, 1),
        "a": host_state("a", DOWN, SOFT, 1),   # failed earlier, thought DOWN
        "b": host_state("b", DOWN, HARD, 2),
        "c": host_state("c", DOWN, SOFT, 1),
    }
    new, events = apply_host_result(states["root"], host_result("root", CRIT),
                                    topo, states, max_attempts=2)
    assert new.current_status is DOWN and new.state_type is HARD
    flips = [e for e in events if isinstance(e, StateChange) and
             e.target != Target("root")]
    assert {e.target.host for e in flips} == {"a", "b", "c"}
    assert all(e.new is UNREACHABLE for e in flips)


def test_leaf_down_touches_nobody_else():
    parents = {"root": (), "leaf": ("root",)}
    topo = TopologyGraph(parents)
    states = {"root": host_state("root"), "leaf": host_state("leaf", DOWN, SOFT, 1)}
    new, events = apply_host_result(states["leaf"], host_result("leaf", CRIT),
                                    topo, states, max_attempts=2)
    assert new.current_status is DOWN and new.state_type is HARD
    assert all(e.target == Target("leaf") for e in events
               if isinstance(e, StateChange))


def test_recovery_does_not_force_descendants_up():
    parents = {"root": (), "a": ("root",)}
    topo = TopologyGraph(parents)
    states = {"root": host_state("root", DOWN, HARD, 2),
              "a": host_state("a", UNREACHABLE, HARD, 2)}
    new, events = apply_host_result(states["root"], host_result("root", OK),
                                    topo, states, max_attempts=2)
    assert new.current_status is UP
    assert not any(isinstance(e, StateChange) and e.target == Target("a")
                   for e in events)


def test_host_machine_uses_classification_for_problem_value():
    parents = {"root": (), "a": ("root",)}
    topo = TopologyGraph(parents)
    states = {"root": host_state("root", DOWN, HARD, 2), "a": host_state("a")}
    new, _ = apply_host_result(states["a"], host_result("a", CRIT),
                               topo, states, max_attempts=1)
    assert new.current_status is UNREACHABLE  # root already failed
    assert new.state_type is HARD


# --- suppression ----------------------------------------------------------------

def test_acknowledged_suppresses():
    state = svc_state(CRIT, HARD, 3, acknowledged=True)
    assert is_suppressed(state, [], now=0.0) is True


def test_downtime_window_is_half_open():
    state = svc_state(CRIT, HARD, 3)
    window = [Downtime(id=1, target=SVC, start_at=100.0, end_at=200.0)]
    assert is_suppressed(state, window, now=100.0) is True
    assert is_suppressed(state, window, now=150.0) is True
    assert is_suppressed(state, window, now=200.0) is False
    assert is_suppressed(state, window, now=99.9) is False


def test_no_ack_no_downtime_not_suppressed():
    assert is_suppressed(svc_state(CRIT, HARD, 3), [], now=0.0) is False


def test_downtime_for_other_target_ignored():
    other = Downtime(id=1, target=Target("ce01", "MEM"), start_at=0.0, end_at=1e9)
    assert is_suppressed(svc_state(CRIT, HARD, 3), [other], now=50.0) is False


# --- replay determinism -----------------------------------------------------------

def test_replay_determinism():
    rng = random.Random(7)
    statuses = [rng.choice(list(StatusCode)) for _ in range(200)]

    def run():
        state = MonitorState.fresh(SVC)
        log = []
        for i, status in enumerate(statuses):
            state, events = apply_service_result(
                state, svc_result(status, at=float(i)), 3)
            log.append((state.current_status, state.state_type, state.attempt,
                        tuple(type(e).__name__ for e in events)))
        return log

    assert run() == run()


def test_replay_converges_to_from_scratch_classification():
    """After every host reports its steady outcome twice, stored values
    equal a from-scratch classification of the final failure map."""
    rng = random.Random(0xBEEF)
    for _ in range(50):
        parents = random_dag(rng, max_hosts=12)
        topo = TopologyGraph(parents)
        failed = downward_closed_failures(rng, parents)
        states = {h: host_state(h) for h in parents}
        order = sorted(parents)
        rng.shuffle(order)
        for round_no in (0, 1):
            for h in order:
                status = CRIT if failed[h] else OK
                new, events = apply_host_result(
                    states[h], host_result(h, status, at=float(round_no)),
                    topo, states, max_attempts=1)
                states[h] = new
                for event in events:
                    if isinstance(event, StateChange) and event.target.host != h:
                        states[event.target.host] = replace(
                            states[event.target.host], current_status=event.new)
        for h in parents:
            expected = (classify_host(topo, failed, h) if failed[h]
                        else HostReachability.UP)
            assert states[h].current_status is expected, (parents, failed, h)
