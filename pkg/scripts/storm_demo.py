#!/usr/bin/env python3
"""Reachability-storm demo: kill one site's router and watch the engine
split DOWN from UNREACHABLE, paging exactly once.

Runs entirely on loopback at 60x virtual speed; takes a few seconds.
"""

from __future__ import annotations

import argparse
import tempfile
import time
from pathlib import Path

from gridwatch.clock import WallClock
from gridwatch.config import link_and_validate, parse_objects
from gridwatch.daemon import Daemon, MonitorOptions
from gridwatch.scheduling import SchedulerPolicy
from gridwatch.sim import (
    AgentFleet,
    Scenario,
    ScenarioEvent,
    SimNet,
    SimParams,
    render_monitor_config,
)
from gridwatch.states import HostReachability


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sites", type=int, default=6)
    parser.add_argument("--hosts", type=int, default=4)
    parser.add_argument("--speed", type=float, default=60.0)
    parser.add_argument("--base-port", type=int, default=27000)
    args = parser.parse_args()

    params = SimParams(sites=args.sites, hosts_per_site=args.hosts,
                       base_port=args.base_port, host_max_attempts=2,
                       service_max_attempts=2)
    scenario = Scenario(seed=1, params=params)
    fleet = scenario.fleet()
    model = link_and_validate(parse_objects(render_monitor_config(fleet)))
    router = next(h.name for h in fleet.hosts.values() if h.parent is None)
    children = model.topology.children(router)

    net = SimNet(fleet)
    agents = AgentFleet(net)
    agents.start()
    workdir = Path(tempfile.mkdtemp(prefix="gridwatch-demo-"))
    log_path = workdir / "notifications.log"
    daemon = Daemon(model, clock=WallClock(speed=args.speed, origin=0.0),
                    policy=SchedulerPolicy(max_parallel_checks=16,
                                           check_timeout_s=2.0),
                    options=MonitorOptions(notification_interval_s=3600),
                    notification_log=log_path)
    print(f"fleet: {len(fleet.hosts)} hosts, {len(model.services)} services, "
          f"{args.speed:g}x clock")
    daemon.start()
    try:
        while any(s.last_check is None
                  for s in daemon.monitor.states_view().values()):
            time.sleep(0.05)
        print(f"[v={daemon.clock.now():7.1f}] warm-up complete, all green")

        print(f"[v={daemon.clock.now():7.1f}] killing {router}")
        agents.apply_event(ScenarioEvent(daemon.clock.now(), "kill_listener",
                                         router, fleet.hosts[router].ping_port),
                           daemon.clock.now())

        def snapshot():
            states = daemon.monitor.states_view()
            down = sorted(t.host for t, s in states.items()
                          if t.is_host and s.current_status is HostReachability.DOWN)
            unreachable = sorted(
                t.host for t, s in states.items()
                if t.is_host and s.current_status is HostReachability.UNREACHABLE)
            return down, unreachable

        deadline = time.monotonic() + (150.0 / args.speed) + 3.0
        while time.monotonic() < deadline:
            down, unreachable = snapshot()
            if down == [router] and set(unreachable) == set(children):
                break
            time.sleep(0.05)
        down, unreachable = snapshot()
        print(f"[v={daemon.clock.now():7.1f}] DOWN:        {down}")
        print(f"[v={daemon.clock.now():7.1f}] UNREACHABLE: {unreachable}")
    finally:
        daemon.stop()
        agents.stop()

    print("\nnotification log:")
    if log_path.exists():
        for line in log_path.read_text().splitlines():
            print("   ", line)
    else:
        print("    (empty)")
    lines = log_path.read_text().splitlines() if log_path.exists() else []
    ok = down == [router] and set(unreachable) == set(children) and len(lines) == 1
    print(f"\n{'exactly one page for the router, as intended' if ok else 'UNEXPECTED OUTCOME'}")
    return 0 if ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
