#!/usr/bin/env python3
"""Launch a small daemon+simulator stack for the console conformance test.

Prints `READY <api_port>` once everything is up, then serves until killed.
One GRIS attribute starts at zero so a service is HARD CRITICAL from the
first check; the console test acknowledges it.
"""

from __future__ import annotations

import argparse
import sys
import time

from gridwatch.clock import WallClock
from gridwatch.config import link_and_validate, parse_objects
from gridwatch.daemon import Daemon, MonitorOptions
from gridwatch.scheduling import SchedulerPolicy
from gridwatch.sim import AgentFleet, Scenario, SimNet, SimParams, render_monitor_config


def start_agents(base_port: int, attempts: int = 8):
    """Bring the fleet up, walking the base port past any collisions left
    behind by a previous run still tearing down."""
    from gridwatch.sim import PortInUse
    for i in range(attempts):
        params = SimParams(sites=3, hosts_per_site=2,
                           base_port=base_port + i * 100,
                           host_check_interval_s=2.0, host_max_attempts=1,
                           service_check_interval_s=2.0,
                           service_retry_interval_s=1.0, service_max_attempts=1)
        scenario = Scenario(seed=5, params=params)
        fleet = scenario.fleet()
        net = SimNet(fleet)
        broken = next(h for h in fleet.hosts.values() if h.parent)
        net.gris_attrs[broken.name]["gluecestatefreecpus"] = 0.0
        agents = AgentFleet(net)
        try:
            agents.start()
            return fleet, net, agents, broken
        except PortInUse:
            agents.stop()
    raise SystemExit("no free port range found for the test fleet")


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--api-port", type=int, default=0)
    parser.add_argument("--base-port", type=int, default=33100)
    args = parser.parse_args()

    fleet, net, agents, broken = start_agents(args.base_port)

    model = link_and_validate(parse_objects(render_monitor_config(fleet)))
    daemon = Daemon(
        model,
        clock=WallClock(speed=1.0, origin=0.0),
        policy=SchedulerPolicy(max_parallel_checks=8, check_timeout_s=2.0),
        options=MonitorOptions(notification_interval_s=3600),
        api_port=args.api_port,
        tokens={"viewer-token": "viewer", "operator-token": "operator",
                "admin-token": "admin"},
    )
    daemon.api.start()
    daemon.start()
    print(f"READY {daemon.api.port}", flush=True)
    print(f"BROKEN {broken.name}", flush=True)
    try:
        while True:
            time.sleep(0.5)
    except KeyboardInterrupt:
        pass
    finally:
        daemon.stop()
        agents.stop()
    return 0


if __name__ == "__main__":
    sys.exit(main())
