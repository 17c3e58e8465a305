#!/usr/bin/env python3
"""Run the full stack for interactive use: simulated fleet + daemon + API.

Generates a fleet into --workdir (reusing it if present), serves the agents
and the status API, and prints the settings the ops console needs. Stop
with Ctrl-C.
"""

from __future__ import annotations

import argparse
import time
from pathlib import Path

from gridwatch.api import load_tokens
from gridwatch.clock import WallClock
from gridwatch.config import load_model
from gridwatch.daemon import Daemon, MonitorOptions
from gridwatch.scheduling import SchedulerPolicy
from gridwatch.sim import AgentFleet, SimNet, SimParams, generate, parse_scenario


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--workdir", default="./stack", metavar="DIR")
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--sites", type=int, default=8)
    parser.add_argument("--hosts", type=int, default=4)
    parser.add_argument("--base-port", type=int, default=26000)
    parser.add_argument("--port", type=int, default=8920, help="API port")
    parser.add_argument("--speed", type=float, default=10.0)
    args = parser.parse_args()

    workdir = Path(args.workdir)
    if not (workdir / "scenario.cfg").exists():
        params = SimParams(sites=args.sites, hosts_per_site=args.hosts,
                           base_port=args.base_port,
                           host_check_interval_s=30,
                           service_check_interval_s=30,
                           service_retry_interval_s=10)
        generate(args.seed, params, workdir)
        print(f"generated fleet in {workdir}/")
    scenario = parse_scenario((workdir / "scenario.cfg").read_text())
    model = load_model([workdir / "monitor.cfg"])
    tokens = load_tokens(workdir / "tokens.tsv")

    net = SimNet(scenario.fleet())
    agents = AgentFleet(net)
    agents.start()
    daemon = Daemon(
        model,
        clock=WallClock(speed=args.speed),
        policy=SchedulerPolicy(max_parallel_checks=8, check_timeout_s=3.0),
        options=MonitorOptions(notification_interval_s=600),
        state_file=workdir / "retention.dat",
        command_file=workdir / "commands",
        notification_log=workdir / "notifications.log",
        series_dir=workdir / "series",
        api_port=args.port,
        tokens=tokens,
    )
    daemon.api.start()
    daemon.start()
    print(f"API:     http://127.0.0.1:{args.port}")
    print("tokens:  viewer-token / operator-token / admin-token")
    print("console: cd frontend && npm run build && npm run serve, then open")
    print(f"         http://127.0.0.1:8930/?api=http://127.0.0.1:{args.port}"
          f"&token=operator-token")
    print(f"operator commands: append lines to {workdir}/commands or use the "
          f"console; Ctrl-C to stop")
    try:
        while True:
            time.sleep(1)
    except KeyboardInterrupt:
        pass
    finally:
        daemon.stop()
        agents.stop()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
