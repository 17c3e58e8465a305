"""Synthetic grid testbed: generated topologies, scripted failures, agents.

`generate` turns a seed plus shape parameters into a deterministic fleet:
per site one router host fronting N-1 grid hosts, each with TCP service
listeners, a mock GRIS (LDIF over TCP), and a metrics endpoint.  The same
fleet can run two ways:

  * AgentFleet: real loopback listeners for end-to-end runs.  Killing a
    host's ping listener takes the whole host down and, because the router
    is the only path in, closes every listener behind it too.
  * ScenarioDriver: no sockets at all; checks are evaluated synchronously
    against the fleet state on a manual clock, which makes whole runs
    bit-for-bit reproducible.

Scenario files reuse the monitor's block grammar with kinds {scenario,
event}.
"""

from __future__ import annotations

import argparse
import json
import random
import selectors
import socket
import sys
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

from . import plugins
from .clock import Clock, ManualClock, WallClock
from .config import Model, parse_objects
from .daemon import Monitor, MonitorOptions
from .notify import Notifier
from .scheduling import SchedulerPolicy, initial_schedule
from .series import SeriesStore
from .states import CheckResult, StatusCode, Target

SCENARIO_KINDS = frozenset({"scenario", "event"})

VO_POOL = ("atlas", "cms", "alice", "lhcb")
HOST_PREFIXES = ("ce", "se", "wn")

ACTIONS = frozenset({"kill_listener", "restore_listener", "set_metric",
                     "set_gris_attr", "degrade_latency"})

DEFAULT_GRIS_ATTRS = {
    "gluecestatefreecpus": 12.0,
    "gluecestatetotalcpus": 16.0,
    "gluesastatefreespace": 4000.0,
}
DEFAULT_AGENT_METRICS = {
    "cpu": 25.0,
    "mem": 40.0,
    "disk": 55.0,
    "processes": 120.0,
}


class InvalidParams(ValueError):
    pass


class PortInUse(OSError):
    def __init__(self, host: str, port: int):
        super().__init__(f"port {port} (host {host}) is already bound")
        self.host, self.port = host, port


@dataclass(frozen=True)
class SimParams:
    sites: int = 5
    hosts_per_site: int = 3  # router included
    base_port: int = 28000
    host_check_interval_s: float = 60.0
    host_max_attempts: int = 2
    service_check_interval_s: float = 60.0
    service_retry_interval_s: float = 15.0
    service_max_attempts: int = 2

    def validate(self) -> None:
        if self.sites < 1:
            raise InvalidParams("need at least one site")
        if self.hosts_per_site < 1:
            raise InvalidParams("need at least one host per site")
        if not 1024 <= self.base_port <= 60000:
            raise InvalidParams("base_port out of range")


@dataclass(frozen=True)
class ScenarioEvent:
    at_s: float
    action: str
    host: str = ""
    port: int = 0
    name: str = ""
    value: str = ""


@dataclass
class SimHost:
    name: str
    site: str
    parent: str | None
    ports: dict[str, int]  # role -> port; roles: ping, tcp, gris, agent

    @property
    def ping_port(self) -> int:
        return self.ports["ping"]


@dataclass
class FleetSpec:
    params: SimParams
    seed: int
    sites: dict[str, tuple[float, float, tuple[str, ...]]]  # name -> (lat, lon, vos)
    hosts: dict[str, SimHost]

    def listeners(self) -> list[tuple[str, int, str]]:
        out = []
        for host in self.hosts.values():
            for role, port in host.ports.items():
                out.append((host.name, port, role))
        return out

    def ancestors(self, host: str) -> list[str]:
        chain = []
        parent = self.hosts[host].parent
        while parent is not None:
            chain.append(parent)
            parent = self.hosts[parent].parent
        return chain


@dataclass
class Scenario:
    seed: int
    params: SimParams
    events: list[ScenarioEvent] = field(default_factory=list)

    def fleet(self) -> FleetSpec:
        return build_fleet(self.seed, self.params)


def build_fleet(seed: int, params: SimParams) -> FleetSpec:
    """Deterministic fleet layout: same seed, same bytes everywhere."""
    params.validate()
    rng = random.Random(seed)
    sites: dict[str, tuple[float, float, tuple[str, ...]]] = {}
    hosts: dict[str, SimHost] = {}
    next_port = params.base_port
    for s in range(1, params.sites + 1):
        site = f"site{s:02d}"
        lat = round(rng.uniform(-60.0, 70.0), 4)
        lon = round(rng.uniform(-170.0, 170.0), 4)
        vo_count = 1 + rng.randrange(2)
        vos = tuple(sorted(rng.sample(VO_POOL, vo_count)))
        sites[site] = (lat, lon, vos)
        router = f"rtr-{site}"
        hosts[router] = SimHost(router, site, None, {
            "ping": next_port, "tcp": next_port + 1, "agent": next_port + 2,
        })
        next_port += 3
        for c in range(params.hosts_per_site - 1):
            prefix = HOST_PREFIXES[c % len(HOST_PREFIXES)]
            name = f"{prefix}{c // len(HOST_PREFIXES) + 1:02d}-{site}"
            hosts[name] = SimHost(name, site, router, {
                "ping": next_port, "tcp": next_port + 1,
                "gris": next_port + 2, "agent": next_port + 3,
            })
            next_port += 4
    return FleetSpec(params=params, seed=seed, sites=sites, hosts=hosts)


def render_monitor_config(fleet: FleetSpec) -> str:
    """The monitoring configuration matching a generated fleet."""
    p = fleet.params
    lines: list[str] = ["# generated monitoring configuration", ""]

    def block(kind: str, attrs: dict[str, str]) -> None:
        lines.append(f"define {kind} {{")
        for key, value in attrs.items():
            lines.append(f"    {key}    {value}")
        lines.append("}")
        lines.append("")

    all_vos = sorted({vo for (_, _, vos) in fleet.sites.values() for vo in vos})
    for vo in all_vos:
        block("vo", {"vo_name": vo})
    for site, (lat, lon, vos) in fleet.sites.items():
        block("site", {"site_name": site, "latitude": str(lat),
                       "longitude": str(lon), "vos": ",".join(vos)})
    block("contact", {"contact_name": "ops"})  # log-only
    block("contactgroup", {"contactgroup_name": "oncall", "members": "ops"})

    def service(host: SimHost, desc: str, command: str, kind: str, vo: str) -> None:
        block("service", {
            "host_name": host.name,
            "service_description": desc,
            "check_command": command,
            "check_interval": f"{p.service_check_interval_s:g}",
            "retry_interval": f"{p.service_retry_interval_s:g}",
            "max_attempts": str(p.service_max_attempts),
            "contact_groups": "oncall",
            "vos": vo,
            "metric_kind": kind,
        })

    vo_cycle = 0
    for host in fleet.hosts.values():
        attrs = {
            "host_name": host.name,
            "address": "127.0.0.1",
            "site": host.site,
            "check_command": f"check_tcp!{host.ping_port}",
            "check_interval": f"{p.host_check_interval_s:g}",
            "max_attempts": str(p.host_max_attempts),
        }
        if host.parent is not None:
            attrs["parents"] = host.parent
        block("host", attrs)
        site_vos = fleet.sites[host.site][2]

        def next_vo() -> str:
            nonlocal vo_cycle
            vo = site_vos[vo_cycle % len(site_vos)]
            vo_cycle += 1
            return vo

        if host.parent is None:
            service(host, "NET", f"check_tcp!{host.ports['tcp']}",
                    "network_service", next_vo())
            service(host, "CPU", f"check_agent!{host.ports['agent']}!cpu!70!90",
                    "cpu", next_vo())
        else:
            service(host, "GATEKEEPER", f"check_tcp!{host.ports['tcp']}",
                    "grid_service", next_vo())
            service(host, "FREECPUS",
                    f"check_gris!{host.ports['gris']}!gluecestatefreecpus!5:!1:",
                    "info_service", next_vo())
            service(host, "CPU", f"check_agent!{host.ports['agent']}!cpu!70!90",
                    "cpu", next_vo())
            service(host, "MEM", f"check_agent!{host.ports['agent']}!mem!80!95",
                    "mem", next_vo())
    return "\n".join(lines)


def render_scenario_config(scenario: Scenario) -> str:
    p = scenario.params
    lines = ["# generated scenario", "", "define scenario {"]
    lines.append(f"    seed    {scenario.seed}")
    lines.append(f"    sites    {p.sites}")
    lines.append(f"    hosts_per_site    {p.hosts_per_site}")
    lines.append(f"    base_port    {p.base_port}")
    lines.append(f"    host_check_interval    {p.host_check_interval_s:g}")
    lines.append(f"    host_max_attempts    {p.host_max_attempts}")
    lines.append(f"    service_check_interval    {p.service_check_interval_s:g}")
    lines.append(f"    service_retry_interval    {p.service_retry_interval_s:g}")
    lines.append(f"    service_max_attempts    {p.service_max_attempts}")
    lines.append("}")
    lines.append("")
    for e in scenario.events:
        lines.append("define event {")
        lines.append(f"    at    {e.at_s:g}")
        lines.append(f"    action    {e.action}")
        if e.host:
            lines.append(f"    host    {e.host}")
        if e.port:
            lines.append(f"    port    {e.port}")
        if e.name:
            lines.append(f"    name    {e.name}")
        if e.value != "":
            lines.append(f"    value    {e.value}")
        lines.append("}")
        lines.append("")
    return "\n".join(lines)


def parse_scenario(text: str, filename: str = "<scenario>") -> Scenario:
    blocks = parse_objects(text, filename, allowed_kinds=SCENARIO_KINDS)
    head = next((b for b in blocks if b.kind == "scenario"), None)
    if head is None:
        raise InvalidParams("scenario file needs a 'define scenario' block")
    attrs = head.attributes
    params = SimParams(
        sites=int(attrs.get("sites", "5")),
        hosts_per_site=int(attrs.get("hosts_per_site", "3")),
        base_port=int(attrs.get("base_port", "28000")),
        host_check_interval_s=float(attrs.get("host_check_interval", "60")),
        host_max_attempts=int(attrs.get("host_max_attempts", "2")),
        service_check_interval_s=float(attrs.get("service_check_interval", "60")),
        service_retry_interval_s=float(attrs.get("service_retry_interval", "15")),
        service_max_attempts=int(attrs.get("service_max_attempts", "2")),
    )
    scenario = Scenario(seed=int(attrs.get("seed", "0")), params=params)
    fleet = scenario.fleet()
    for b in blocks:
        if b.kind != "event":
            continue
        event = ScenarioEvent(
            at_s=float(b.attributes["at"]),
            action=b.attributes["action"],
            host=b.attributes.get("host", ""),
            port=int(b.attributes.get("port", "0")),
            name=b.attributes.get("name", ""),
            value=b.attributes.get("value", ""),
        )
        if event.action not in ACTIONS:
            raise InvalidParams(f"unknown scenario action {event.action!r}")
        if event.host and event.host not in fleet.hosts:
            raise InvalidParams(f"scenario event targets unknown host {event.host!r}")
        if event.action in ("kill_listener", "restore_listener"):
            if event.port not in fleet.hosts[event.host].ports.values():
                raise InvalidParams(
                    f"host {event.host} has no listener on port {event.port}")
        scenario.events.append(event)
    scenario.events.sort(key=lambda e: e.at_s)
    return scenario


def generate(seed: int, params: SimParams, out_dir: str | Path) -> Scenario:
    """Write monitor.cfg, scenario.cfg, and tokens.tsv; deterministic."""
    params.validate()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    scenario = Scenario(seed=seed, params=params)
    fleet = scenario.fleet()
    (out / "monitor.cfg").write_text(render_monitor_config(fleet), encoding="utf-8")
    (out / "scenario.cfg").write_text(render_scenario_config(scenario), encoding="utf-8")
    (out / "tokens.tsv").write_text(
        "viewer-token\tviewer\noperator-token\toperator\nadmin-token\tadmin\n",
        encoding="utf-8")
    return scenario


# --- simulated network state ---------------------------------------------------

class SimNet:
    """Current truth of the simulated fleet, shared by both run modes.

    A killed ping listener means the whole host is down; hosts behind a
    down ancestor are unreachable from the monitor, so every listener of
    theirs refuses connections until the path is restored.
    """

    def __init__(self, fleet: FleetSpec):
        self.fleet = fleet
        self.killed: set[tuple[str, int]] = set()
        self.gris_attrs: dict[str, dict[str, float]] = {
            h: dict(DEFAULT_GRIS_ATTRS) for h in fleet.hosts}
        self.agent_metrics: dict[str, dict[str, float]] = {
            h: dict(DEFAULT_AGENT_METRICS) for h in fleet.hosts}
        self.latency_ms: dict[str, float] = {}
        self.event_log: list[dict] = []

    def host_down(self, host: str) -> bool:
        return (host, self.fleet.hosts[host].ping_port) in self.killed

    def host_reachable(self, host: str) -> bool:
        return not self.host_down(host) and not any(
            self.host_down(a) for a in self.fleet.ancestors(host))

    def listener_open(self, host: str, port: int) -> bool:
        return self.host_reachable(host) and (host, port) not in self.killed

    def gris_document(self, host: str) -> str:
        attrs = self.gris_attrs[host]
        lines = [f"dn: GlueCEUniqueID={host}"]
        for name in sorted(attrs):
            lines.append(f"{name}: {attrs[name]:g}")
        return "\n".join(lines) + "\n\n"

    def agent_document(self, host: str) -> str:
        metrics = self.agent_metrics[host]
        return "".join(f"{name} {metrics[name]:g}\n" for name in sorted(metrics))

    def apply_event(self, event: ScenarioEvent, at: float) -> None:
        if event.action == "kill_listener":
            self.killed.add((event.host, event.port))
        elif event.action == "restore_listener":
            self.killed.discard((event.host, event.port))
        elif event.action == "set_metric":
            self.agent_metrics[event.host][event.name] = float(event.value)
        elif event.action == "set_gris_attr":
            self.gris_attrs[event.host][event.name.lower()] = float(event.value)
        elif event.action == "degrade_latency":
            self.latency_ms[event.host] = float(event.value)
        else:
            raise InvalidParams(f"unknown action {event.action!r}")
        self.event_log.append({"t": at, "action": event.action, "host": event.host,
                               "port": event.port, "name": event.name,
                               "value": event.value})


# --- live agents (real loopback sockets) ---------------------------------------

class AgentFleet:
    """Real listeners mirroring SimNet: one selector thread accepts, tiny
    payloads are answered inline (or on a short-lived thread when latency
    is being simulated).  Binds loopback only."""

    def __init__(self, net: SimNet):
        self.net = net
        self._selector = selectors.DefaultSelector()
        self._sockets: dict[tuple[str, int], socket.socket] = {}
        self._roles: dict[tuple[str, int], str] = {}
        self._thread: threading.Thread | None = None
        self._running = threading.Event()
        self._lock = threading.Lock()
        for host, port, role in net.fleet.listeners():
            self._roles[(host, port)] = role

    def start(self) -> None:
        self.sync()
        self._running.set()
        self._thread = threading.Thread(target=self._serve, name="gridwatch-sim",
                                        daemon=True)
        self._thread.start()

    def stop(self) -> None:
        self._running.clear()
        if self._thread is not None:
            self._thread.join(timeout=5)
        with self._lock:
            for sock in self._sockets.values():
                try:
                    self._selector.unregister(sock)
                except (KeyError, ValueError):
                    pass
                sock.close()
            self._sockets.clear()
        self._selector.close()

    def _open(self, host: str, port: int) -> None:
        sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        try:
            sock.bind(("127.0.0.1", port))
        except OSError:
            sock.close()
            raise PortInUse(host, port) from None
        sock.listen(16)
        sock.setblocking(False)
        self._sockets[(host, port)] = sock
        self._selector.register(sock, selectors.EVENT_READ, (host, port))

    def _close(self, host: str, port: int) -> None:
        sock = self._sockets.pop((host, port), None)
        if sock is not None:
            try:
                self._selector.unregister(sock)
            except (KeyError, ValueError):
                pass
            sock.close()

    def sync(self) -> None:
        """Open/close real sockets to match the SimNet's effective state."""
        with self._lock:
            for (host, port), _role in self._roles.items():
                want_open = self.net.listener_open(host, port)
                is_open = (host, port) in self._sockets
                if want_open and not is_open:
                    self._open(host, port)
                elif not want_open and is_open:
                    self._close(host, port)

    def apply_event(self, event: ScenarioEvent, at: float) -> None:
        self.net.apply_event(event, at)
        self.sync()

    def _serve(self) -> None:
        while self._running.is_set():
            events = self._selector.select(timeout=0.05)
            for key, _ in events:
                host, port = key.data
                try:
                    conn, _addr = key.fileobj.accept()  # type: ignore[union-attr]
                except OSError:
                    continue
                self._answer(conn, host, port)

    def _answer(self, conn: socket.socket, host: str, port: int) -> None:
        role = self._roles[(host, port)]
        latency = self.net.latency_ms.get(host, 0.0)
        if role == "gris":
            payload = self.net.gris_document(host).encode("utf-8")
        elif role == "agent":
            payload = self.net.agent_document(host).encode("utf-8")
        else:
            payload = b""

        def finish() -> None:
            try:
                if latency > 0:
                    time.sleep(latency / 1000.0)
                if payload:
                    conn.sendall(payload)
            except OSError:
                pass
            finally:
                conn.close()

        if latency > 0:
            threading.Thread(target=finish, daemon=True).start()
        else:
            finish()


# --- deterministic in-process driver --------------------------------------------

def simulated_check(net: SimNet, model: Model, target: Target,
                    clock: Clock) -> CheckResult:
    """What the real check would return against the current SimNet state,
    computed without sockets (zero latency, fully deterministic)."""
    host_def = model.hosts[target.host]
    ref = host_def.check_command if target.is_host else \
        model.services[(target.host, target.service)].check_command
    now = clock.now()
    sim_host = net.fleet.hosts[target.host]

    def refused(prefix: str, port: int) -> CheckResult:
        return CheckResult(target=target, status=StatusCode.CRITICAL,
                           summary=f"{prefix} CRITICAL - connection refused on "
                                   f"127.0.0.1:{port}",
                           started_at=now, finished_at=now)

    if ref.name == "check_tcp":
        port = int(ref.args[0])
        if not net.listener_open(sim_host.name, port):
            return refused("TCP", port)
        return CheckResult(target=target, status=StatusCode.OK,
                           summary=f"TCP OK - 0.000s response on 127.0.0.1:{port}",
                           perfdata=[plugins.PerfDatum(label="time", value=0.0,
                                                       uom="s", min=0.0)],
                           started_at=now, finished_at=now)
    if ref.name == "check_gris":
        port = int(ref.args[0])
        if not net.listener_open(sim_host.name, port):
            return refused("GRIS", port)
        higher = (ref.args[4] != "lower") if len(ref.args) > 4 else True
        return plugins.evaluate_gris_document(
            target, net.gris_document(sim_host.name), ref.args[1],
            ref.args[2] if len(ref.args) > 2 else None,
            ref.args[3] if len(ref.args) > 3 else None,
            higher, now, clock)
    if ref.name == "check_agent":
        port = int(ref.args[0])
        if not net.listener_open(sim_host.name, port):
            return refused("AGENT", port)
        higher = (ref.args[4] == "higher") if len(ref.args) > 4 else False
        return plugins.evaluate_agent_document(
            target, net.agent_document(sim_host.name), ref.args[1],
            ref.args[2] if len(ref.args) > 2 else None,
            ref.args[3] if len(ref.args) > 3 else None,
            higher, now, clock)
    raise InvalidParams(f"simulated fleet cannot answer command {ref.name!r}")


class ScenarioDriver:
    """Deterministic replay: scenario events, scripted actions, and checks
    interleave on a manual clock through the same Monitor used live."""

    def __init__(
        self,
        scenario: Scenario,
        model: Model,
        options: MonitorOptions | None = None,
        notification_log: str | Path | None = None,
        policy: SchedulerPolicy | None = None,
        start_at: float = 0.0,
        net: SimNet | None = None,
    ):
        self.scenario = scenario
        self.model = model
        self.net = net or SimNet(scenario.fleet())
        self.clock = ManualClock(start_at)
        self.policy = policy or SchedulerPolicy(jitter_fraction=0.0)
        notifier = Notifier(model, notification_log)
        self.monitor = Monitor(model, self.clock, options, notifier, SeriesStore())
        self._pending_events = sorted(scenario.events, key=lambda e: e.at_s)
        self._actions: list[tuple[float, Callable[[], None]]] = []
        for check in initial_schedule(model, start_at):
            self.monitor.queue.schedule(check)

    def at(self, t: float, action: Callable[[], None]) -> None:
        """Schedule a scripted action (operator command, snapshot, ...)."""
        self._actions.append((t, action))
        self._actions.sort(key=lambda pair: pair[0])

    def _next_times(self) -> list[float]:
        times = []
        if self._pending_events:
            times.append(self._pending_events[0].at_s)
        if self._actions:
            times.append(self._actions[0][0])
        due = self.monitor.queue.peek_due_at()
        if due is not None:
            times.append(due)
        return times

    def run_until(self, t_end: float) -> None:
        while True:
            times = [t for t in self._next_times() if t <= t_end]
            if not times:
                break
            t = max(min(times), self.clock.now())
            if t > self.clock.now():
                self.clock.set(t)
            while self._pending_events and self._pending_events[0].at_s <= t:
                self.net.apply_event(self._pending_events.pop(0), t)
            while self._actions and self._actions[0][0] <= t:
                self._actions.pop(0)[1]()
            while True:
                check = self.monitor.queue.next_due(t)
                if check is None:
                    break
                result = simulated_check(self.net, self.model, check.target, self.clock)
                self.monitor.complete_active_check(result, self.policy)
        if self.clock.now() < t_end:
            self.clock.set(t_end)


# --- CLI --------------------------------------------------------------------------

def main(argv: Sequence[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="gridwatch-sim",
                                     description="synthetic grid testbed")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="emit a fleet config + scenario")
    gen.add_argument("--seed", type=int, default=42)
    gen.add_argument("--sites", type=int, default=5)
    gen.add_argument("--hosts", type=int, default=3,
                     help="hosts per site, router included")
    gen.add_argument("--base-port", type=int, default=28000)
    gen.add_argument("-o", "--out", required=True, metavar="DIR")

    run = sub.add_parser("run", help="serve a generated fleet's agents")
    run.add_argument("dir", metavar="DIR", help="directory holding scenario.cfg")
    run.add_argument("--speed", type=float, default=1.0)
    run.add_argument("--duration", type=float, default=None,
                     help="stop after N virtual seconds")
    run.add_argument("--event-log", default=None, metavar="PATH")

    args = parser.parse_args(argv)
    if args.command == "generate":
        try:
            params = SimParams(sites=args.sites, hosts_per_site=args.hosts,
                               base_port=args.base_port)
            generate(args.seed, params, args.out)
        except InvalidParams as e:
            print(f"invalid parameters: {e}", file=sys.stderr)
            return 1
        print(f"wrote monitor.cfg + scenario.cfg + tokens.tsv to {args.out}")
        return 0

    scenario_path = Path(args.dir) / "scenario.cfg"
    scenario = parse_scenario(scenario_path.read_text(encoding="utf-8"),
                              str(scenario_path))
    net = SimNet(scenario.fleet())
    fleet_agents = AgentFleet(net)
    try:
        fleet_agents.start()
    except PortInUse as e:
        print(f"cannot start agents: {e}", file=sys.stderr)
        return 1
    clock = WallClock(speed=args.speed, origin=0.0)
    pending = sorted(scenario.events, key=lambda e: e.at_s)
    print(f"agents up: {len(net.fleet.hosts)} hosts, "
          f"{len(net.fleet.listeners())} listeners; speed {args.speed:g}x")
    try:
        while pending or args.duration is not None:
            now = clock.now()
            if args.duration is not None and now >= args.duration:
                break
            while pending and pending[0].at_s <= now:
                event = pending.pop(0)
                fleet_agents.apply_event(event, now)
                print(f"[t={now:8.1f}] {event.action} {event.host}"
                      f"{':' + str(event.port) if event.port else ''} {event.name}"
                      f"{'=' + event.value if event.value else ''}")
            clock.sleep(0.5)
        if not pending and args.duration is None:
            while True:  # keep serving until interrupted
                time.sleep(3600)
    except KeyboardInterrupt:
        pass
    finally:
        fleet_agents.stop()
        if args.event_log:
            Path(args.event_log).write_text(
                "".join(json.dumps(e) + "\n" for e in net.event_log),
                encoding="utf-8")
    return 0


if __name__ == "__main__":
    sys.exit(main())
