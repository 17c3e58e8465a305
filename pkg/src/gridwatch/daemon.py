"""The monitoring daemon: one serialized state-application path.

Monitor is the single-writer core shared by the live daemon, the testbed
driver, and the tests: it owns the states, downtimes, check queue, metric
store, and notification decisions.  Daemon adds real execution around it
(worker pool, command file polling, retention cadence, HTTP API) on a
wall or accelerated clock.
"""

from __future__ import annotations

import argparse
import logging
import queue as queue_mod
import random
import sys
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Sequence

from . import api as api_mod
from . import plugins
from .clock import Clock, WallClock
from .config import ConfigError, Model, config_paths, load_model
from .notify import (
    DEFAULT_NOTIFICATION_INTERVAL_S,
    Notifier,
    effective_interval,
    select_contacts,
    should_send,
)
from .retention import (
    CommandError,
    CorruptSnapshot,
    ExternalCommand,
    IoFailure,
    NoProblem,
    RetentionSnapshot,
    UnknownDowntime,
    apply_command,
    parse_external_command,
    read_retention,
    tail_command_file,
    write_retention,
)
from .scheduling import CheckQueue, ScheduledCheck, SchedulerPolicy, initial_schedule, reschedule
from .series import SeriesStore
from .states import (
    CheckResult,
    Downtime,
    EngineEvent,
    HostReachability,
    MetricSample,
    MonitorState,
    NotificationCandidate,
    StateChange,
    StatusCode,
    Target,
    UnknownTarget,
    apply_host_result,
    apply_service_result,
    is_suppressed,
)

log = logging.getLogger("gridwatch")


@dataclass
class MonitorOptions:
    notification_interval_s: float = DEFAULT_NOTIFICATION_INTERVAL_S
    notify_unreachable: bool = False
    snapshot_interval_s: float = 60.0
    event_history_limit: int = 1000


class Monitor:
    """Engine facade; every mutation happens under one lock."""

    def __init__(
        self,
        model: Model,
        clock: Clock,
        options: MonitorOptions | None = None,
        notifier: Notifier | None = None,
        series: SeriesStore | None = None,
    ):
        self.model = model
        self.clock = clock
        self.options = options or MonitorOptions()
        self.notifier = notifier or Notifier(model)
        self.series = series or SeriesStore()
        self.queue = CheckQueue()
        self.lock = threading.RLock()
        self.states: dict[Target, MonitorState] = {}
        self.downtimes: list[Downtime] = []
        self.next_downtime_id = 1
        self.notifications_enabled = True
        self.events: list[tuple[float, EngineEvent]] = []
        for name in model.hosts:
            target = Target(name)
            self.states[target] = MonitorState.fresh(target)
        for host_name, desc in model.services:
            target = Target(host_name, desc)
            self.states[target] = MonitorState.fresh(target)

    # -- views -------------------------------------------------------------

    def states_view(self) -> dict[Target, MonitorState]:
        with self.lock:
            return {t: replace(s) for t, s in self.states.items()}

    def downtimes_view(self) -> list[Downtime]:
        with self.lock:
            return list(self.downtimes)

    def notification_history(self):
        with self.lock:
            return list(self.notifier.history)

    def _host_states(self) -> dict[str, MonitorState]:
        return {name: self.states[Target(name)] for name in self.model.hosts}

    # -- result application --------------------------------------------------

    def apply_check_result(self, result: CheckResult) -> list[EngineEvent]:
        """Run the state machine for one result, record metrics, and decide
        notifications.  Descendant reachability flips emitted by a host
        result are folded into the stored states here."""
        with self.lock:
            target = result.target
            state = self.states.get(target)
            if state is None:
                raise UnknownTarget(str(target))
            if target.is_host:
                host = self.model.hosts[target.host]
                new, events = apply_host_result(state, result, self.model.topology,
                                                self._host_states(), host.max_attempts)
            else:
                svc = self.model.services[(target.host, target.service)]
                new, events = apply_service_result(state, result, svc.max_attempts)
            self.states[target] = new
            now = result.finished_at
            for event in events:
                if isinstance(event, StateChange) and event.target != target:
                    other = self.states[event.target]
                    self.states[event.target] = replace(
                        other, current_status=event.new, last_state_change=now)
                elif isinstance(event, MetricSample):
                    for datum in event.perfdata:
                        self.series.record(target.host, target.service,
                                           datum.label, now, datum.value)
            self.events.extend((now, e) for e in events)
            if len(self.events) > self.options.event_history_limit:
                del self.events[:len(self.events) - self.options.event_history_limit]
            self._demand_upstream_checks(result)
            self._consider_notifications(state, self.states[target], events,
                                         result.summary, now)
            return events

    def _demand_upstream_checks(self, result: CheckResult) -> None:
        """A failure below a host that still looks UP means its state may be
        stale; recheck it right away so reachability classification (and the
        host-down notification gate) work from fresh truth."""
        if result.status is StatusCode.OK:
            return
        if result.target.is_host:
            upstream = self.model.topology.parents(result.target.host)
        else:
            upstream = (result.target.host,)
        now = self.clock.now()
        for host in upstream:
            target = Target(host)
            state = self.states[target]
            if state.current_status is not HostReachability.UP:
                continue
            if state.last_check is not None and state.last_check >= result.started_at:
                continue  # already verified since this failure began
            queued = self.queue.entry_for(target)
            if queued is not None and queued.due_at <= now:
                continue
            self.queue.schedule(ScheduledCheck(target=target, due_at=now,
                                               kind="forced"))

    def complete_active_check(self, result: CheckResult,
                              policy: SchedulerPolicy,
                              rng: random.Random | None = None) -> list[EngineEvent]:
        """Apply an active check's result and put the target back on the queue."""
        with self.lock:
            events = self.apply_check_result(result)
            target = result.target
            nxt = reschedule(target, self.states[target], policy, self.model,
                             self.clock.now(), rng)
            pending = target in self.queue
            if not pending:
                self.queue.schedule(nxt)
            return events

    # -- notification policy -------------------------------------------------

    def _default_groups(self, target: Target) -> tuple[str, ...]:
        if target.is_host:
            # hosts alert whoever watches their services
            groups: set[str] = set()
            for svc in self.model.services_of_host(target.host):
                groups.update(svc.contact_groups)
            return tuple(sorted(groups))
        svc = self.model.services[(target.host, target.service)]
        return svc.contact_groups

    def _notify(self, target: Target, reason: str, number: int, state_text: str,
                summary: str, now: float) -> None:
        contacts = select_contacts(target, number, self.model.escalations,
                                   self._default_groups(target),
                                   self.model.contact_groups)
        if not contacts:
            return
        self.notifier.dispatch(target, reason, number, contacts, state_text,
                               summary, now)
        state = self.states[target]
        if reason == "problem":
            self.states[target] = replace(state, notification_number=number,
                                          last_notification_at=now)

    def _consider_notifications(self, old: MonitorState, new: MonitorState,
                                events: Sequence[EngineEvent], summary: str,
                                now: float) -> None:
        if not self.notifications_enabled:
            return
        recovered = any(isinstance(e, NotificationCandidate) and e.reason == "recovery"
                        for e in events)
        if recovered:
            # query with the recovered status but the episode's pre-reset
            # counters: they still know who was alerted
            query = replace(new, notification_number=old.notification_number,
                            last_notification_at=old.last_notification_at,
                            acknowledged=old.acknowledged)
            suppressed = is_suppressed(query, self.downtimes, now)
            if should_send(query, suppressed, now,
                           self.options.notification_interval_s):
                self._notify(new.target, "recovery", old.notification_number,
                             new.current_status.name, summary, now)
            return
        if not new.is_hard_problem:
            return
        target = new.target
        if target.is_host:
            if not self.model.hosts[target.host].notify:
                return
            if (new.current_status is HostReachability.UNREACHABLE
                    and not self.options.notify_unreachable):
                return
        else:
            host_state = self.states[Target(target.host)]
            if host_state.current_status is not HostReachability.UP:
                return  # the host alert covers it; avoid a storm of service pages
        number = new.notification_number + 1
        interval = effective_interval(target, number, self.model.escalations,
                                      self.options.notification_interval_s)
        suppressed = is_suppressed(new, self.downtimes, now)
        if should_send(new, suppressed, now, interval):
            self._notify(target, "problem", number, new.current_status.name,
                         summary, now)

    # -- operator commands -----------------------------------------------------

    def acknowledge(self, target: Target, author: str = "", comment: str = "") -> None:
        with self.lock:
            state = self.states.get(target)
            if state is None:
                raise UnknownTarget(str(target))
            if not state.is_hard_problem:
                raise NoProblem(f"{target} has no HARD problem to acknowledge")
            self.states[target] = replace(state, acknowledged=True)

    def remove_acknowledgement(self, target: Target) -> None:
        with self.lock:
            state = self.states.get(target)
            if state is None:
                raise UnknownTarget(str(target))
            self.states[target] = replace(state, acknowledged=False)

    def schedule_downtime(self, target: Target, start_at: float, end_at: float,
                          author: str = "", comment: str = "") -> Downtime:
        with self.lock:
            if target not in self.states:
                raise UnknownTarget(str(target))
            try:
                downtime = Downtime(id=self.next_downtime_id, target=target,
                                    start_at=start_at, end_at=end_at,
                                    author=author, comment=comment)
            except ValueError as e:
                raise CommandError(str(e)) from None
            self.next_downtime_id += 1
            self.downtimes.append(downtime)
            return downtime

    def cancel_downtime(self, downtime_id: int) -> None:
        with self.lock:
            for i, d in enumerate(self.downtimes):
                if d.id == downtime_id:
                    del self.downtimes[i]
                    return
            raise UnknownDowntime(str(downtime_id))

    def set_notifications_enabled(self, enabled: bool) -> None:
        with self.lock:
            self.notifications_enabled = enabled

    def force_check(self, target: Target) -> None:
        with self.lock:
            if target not in self.states:
                raise UnknownTarget(str(target))
            self.queue.schedule(ScheduledCheck(target=target, due_at=self.clock.now(),
                                               kind="forced"))

    def submit_passive_result(self, target: Target, code: int, output: str) -> None:
        with self.lock:
            if target.is_host or (target.host, target.service) not in self.model.services:
                raise UnknownTarget(str(target))
            now = self.clock.now()
            summary, perfdata = plugins.parse_plugin_output(output)
            result = CheckResult(target=target, status=plugins.map_exit_code(code),
                                 summary=summary, perfdata=perfdata,
                                 started_at=now, finished_at=now, origin="passive")
            self.apply_check_result(result)

    def handle_command(self, cmd: ExternalCommand) -> None:
        with self.lock:
            apply_command(cmd, self)

    def handle_command_line(self, line: str) -> None:
        self.handle_command(parse_external_command(line))

    # -- persistence -------------------------------------------------------------

    def snapshot(self) -> RetentionSnapshot:
        with self.lock:
            return RetentionSnapshot(
                saved_at=self.clock.now(),
                states={t: replace(s) for t, s in self.states.items()},
                downtimes=list(self.downtimes),
                next_downtime_id=self.next_downtime_id,
                notifications=list(self.notifier.history),
                notifications_enabled=self.notifications_enabled,
            )

    def restore(self, snap: RetentionSnapshot) -> None:
        with self.lock:
            for target, state in snap.states.items():
                if target in self.states:
                    self.states[target] = replace(state)
            self.downtimes = list(snap.downtimes)
            self.next_downtime_id = snap.next_downtime_id
            self.notifier.history = list(snap.notifications)
            self.notifications_enabled = snap.notifications_enabled


# -- check execution -----------------------------------------------------------

MACRO_ARG_LIMIT = 9


def expand_check_macros(command_line: str, address: str, args: Sequence[str]) -> str:
    expanded = command_line.replace("$HOSTADDRESS$", address)
    for i in range(1, MACRO_ARG_LIMIT + 1):
        value = args[i - 1] if i <= len(args) else ""
        expanded = expanded.replace(f"$ARG{i}$", value)
    return expanded


def build_check(model: Model, target: Target, policy: SchedulerPolicy,
                clock: Clock | None = None) -> Callable[[], CheckResult]:
    """Bind a target's check_command to a no-argument callable.

    Built-ins take their address from the host definition:
      check_tcp!PORT        check_dns[!NAME[!EXPECTED]]
      check_gris!PORT!ATTR!WARN!CRIT[!higher|lower]
      check_agent!PORT!METRIC!WARN!CRIT[!higher|lower]
    anything else resolves through the command table and runs as a plugin.
    """
    host = model.hosts[target.host]
    ref = host.check_command if target.is_host else \
        model.services[(target.host, target.service)].check_command
    address = host.address
    timeout = policy.check_timeout_s
    name, args = ref.name, ref.args

    def arg(i: int, default: str | None = None) -> str:
        if i < len(args) and args[i] != "":
            return args[i]
        if default is None:
            raise ValueError(f"{name} missing argument {i + 1}")
        return default

    if name == "check_tcp":
        return lambda: plugins.check_tcp(target, address, int(arg(0)),
                                         timeout_s=float(arg(1, str(timeout))),
                                         clock=clock)
    if name == "check_dns":
        dns_name = arg(0, address)
        expected = arg(1, "") or None
        return lambda: plugins.check_dns(target, dns_name, expected, clock=clock)
    if name == "check_gris":
        higher = arg(4, "higher") != "lower"
        return lambda: plugins.check_gris(target, address, int(arg(0)), arg(1),
                                          arg(2, ""), arg(3, ""), higher,
                                          timeout_s=timeout, clock=clock)
    if name == "check_agent":
        higher = arg(4, "lower") == "higher"
        return lambda: plugins.check_agent(target, address, int(arg(0)), arg(1),
                                           arg(2, ""), arg(3, ""), higher,
                                           timeout_s=timeout, clock=clock)
    command = model.commands[name]
    command_line = expand_check_macros(command.command_line, address, args)
    return lambda: plugins.run_plugin(target, command_line, timeout_s=timeout,
                                      clock=clock)


@dataclass
class ExecutionSpan:
    """One check execution for the concurrency audit log."""

    target: Target
    started_wall: float
    finished_wall: float


class Daemon:
    """Live daemon: bounded worker pool, command file, retention, HTTP API."""

    def __init__(
        self,
        model: Model,
        clock: Clock | None = None,
        policy: SchedulerPolicy | None = None,
        options: MonitorOptions | None = None,
        state_file: str | Path | None = None,
        command_file: str | Path | None = None,
        notification_log: str | Path | None = None,
        series_dir: str | Path | None = None,
        api_port: int | None = None,
        tokens: dict[str, str] | None = None,
        rng: random.Random | None = None,
    ):
        self.clock = clock or WallClock()
        self.policy = policy or SchedulerPolicy()
        self.rng = rng or random.Random(0)
        notifier = Notifier(model, notification_log)
        series = SeriesStore(series_dir)
        self.monitor = Monitor(model, self.clock, options, notifier, series)
        self.state_file = Path(state_file) if state_file else None
        self.command_file = Path(command_file) if command_file else None
        self._command_offset = 0
        self._results: "queue_mod.Queue[CheckResult]" = queue_mod.Queue()
        self._executor = ThreadPoolExecutor(max_workers=self.policy.max_parallel_checks,
                                            thread_name_prefix="gridwatch-check")
        self._stop = threading.Event()
        self._thread: threading.Thread | None = None
        self._last_snapshot = self.clock.now()
        self.execution_log: list[ExecutionSpan] = []
        self._log_lock = threading.Lock()
        self.api: api_mod.StatusApiServer | None = None
        if api_port is not None:
            self.api = api_mod.StatusApiServer(self.monitor, tokens or {}, api_port)

        if self.state_file is not None and self.state_file.exists():
            try:
                snap, dropped = read_retention(self.state_file, model)
                self.monitor.restore(snap)
                if dropped:
                    log.warning("retention: dropped %d unknown targets", dropped)
            except CorruptSnapshot as e:
                log.warning("retention snapshot unusable (%s); starting fresh", e)
            except IoFailure as e:
                log.warning("retention snapshot unreadable (%s); starting fresh", e)

        for check in initial_schedule(model, self.clock.now(), self.rng,
                                      self.policy.jitter_fraction):
            self.monitor.queue.schedule(check)

    # -- execution ---------------------------------------------------------

    def _execute(self, check: ScheduledCheck) -> None:
        started = time.monotonic()
        try:
            thunk = build_check(self.monitor.model, check.target, self.policy, self.clock)
            result = thunk()
        except Exception as e:  # a check must never kill the daemon
            now = self.clock.now()
            result = CheckResult(target=check.target, status=StatusCode.UNKNOWN,
                                 summary=f"check raised: {e}", started_at=now,
                                 finished_at=now)
        with self._log_lock:
            self.execution_log.append(ExecutionSpan(check.target, started,
                                                    time.monotonic()))
        self._results.put(result)

    def _drain_commands(self) -> None:
        if self.command_file is None:
            return
        lines, self._command_offset = tail_command_file(self.command_file,
                                                        self._command_offset)
        for line in lines:
            try:
                self.monitor.handle_command_line(line)
            except (CommandError, UnknownTarget) as e:
                log.warning("command rejected: %s (%s)", line, e)

    def _drain_results(self) -> None:
        while True:
            try:
                result = self._results.get_nowait()
            except queue_mod.Empty:
                return
            self.monitor.complete_active_check(result, self.policy, self.rng)

    def loop_once(self) -> None:
        now = self.clock.now()
        self._drain_commands()
        self._drain_results()
        while True:
            check = self.monitor.queue.next_due(now)
            if check is None:
                break
            self._executor.submit(self._execute, check)
        if now - self._last_snapshot >= self.monitor.options.snapshot_interval_s:
            self.save_state()
            self._last_snapshot = now

    def save_state(self) -> None:
        if self.state_file is not None:
            write_retention(self.monitor.snapshot(), self.state_file)
        self.monitor.series.save_all()

    def run(self, duration_s: float | None = None) -> None:
        """Run the dispatch loop for `duration_s` virtual seconds (forever
        when None), then drain in-flight work."""
        deadline = None if duration_s is None else self.clock.now() + duration_s
        while not self._stop.is_set():
            if deadline is not None and self.clock.now() >= deadline:
                break
            self.loop_once()
            now = self.clock.now()
            next_due = self.monitor.queue.peek_due_at()
            delay = 0.25 if next_due is None else min(max(next_due - now, 0.01), 0.25)
            self.clock.sleep(delay)
        self._executor.shutdown(wait=True)
        self._drain_results()
        self.save_state()

    def start(self) -> None:
        if self.api is not None:
            self.api.start()
        self._thread = threading.Thread(target=self.run, name="gridwatch-loop",
                                        daemon=True)
        self._thread.start()

    def stop(self) -> None:
        self._stop.set()
        if self._thread is not None:
            self._thread.join(timeout=30)
        if self.api is not None:
            self.api.stop()

    def max_overlap(self) -> int:
        """Peak number of concurrently executing checks, from the audit log."""
        with self._log_lock:
            spans = list(self.execution_log)
        boundaries: list[tuple[float, int]] = []
        for span in spans:
            boundaries.append((span.started_wall, 1))
            boundaries.append((span.finished_wall, -1))
        boundaries.sort()
        peak = current = 0
        for _, delta in boundaries:
            current += delta
            peak = max(peak, current)
        return peak


def main(argv: Sequence[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="gridwatchd",
        description="grid operations monitoring daemon",
    )
    parser.add_argument("-c", "--config", action="append", required=True,
                        metavar="PATH", help="config file or directory of *.cfg")
    parser.add_argument("--verify", action="store_true",
                        help="parse and validate the configuration, then exit")
    parser.add_argument("--port", type=int, default=None, help="HTTP API port")
    parser.add_argument("--state-file", default=None, help="retention snapshot path")
    parser.add_argument("--command-pipe", default=None,
                        help="external command file (appended lines are polled)")
    parser.add_argument("--speed", type=float, default=1.0,
                        help="virtual clock speed factor")
    parser.add_argument("--token-file", default=None, help="API tokens (token<TAB>role)")
    parser.add_argument("--notification-log", default=None)
    parser.add_argument("--series-dir", default=None, help="metric history directory")
    parser.add_argument("--max-parallel", type=int, default=4)
    parser.add_argument("--check-timeout", type=float, default=10.0)
    parser.add_argument("--jitter", type=float, default=0.0)
    parser.add_argument("--notification-interval", type=float,
                        default=DEFAULT_NOTIFICATION_INTERVAL_S)
    parser.add_argument("--notify-unreachable", action="store_true")
    parser.add_argument("--duration", type=float, default=None,
                        help="run for N virtual seconds, then exit")
    args = parser.parse_args(argv)

    logging.basicConfig(level=logging.INFO,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    paths = [p for arg in args.config for p in config_paths(arg)]
    try:
        model = load_model(paths)
    except ConfigError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return 1
    if args.verify:
        print(f"configuration OK: {len(model.hosts)} hosts, "
              f"{len(model.services)} services, {len(model.sites)} sites")
        return 0

    tokens = api_mod.load_tokens(args.token_file) if args.token_file else {}
    daemon = Daemon(
        model,
        clock=WallClock(speed=args.speed),
        policy=SchedulerPolicy(max_parallel_checks=args.max_parallel,
                               check_timeout_s=args.check_timeout,
                               jitter_fraction=args.jitter),
        options=MonitorOptions(notification_interval_s=args.notification_interval,
                               notify_unreachable=args.notify_unreachable),
        state_file=args.state_file,
        command_file=args.command_pipe,
        notification_log=args.notification_log,
        series_dir=args.series_dir,
        api_port=args.port,
        tokens=tokens,
    )
    if daemon.api is not None:
        daemon.api.start()
        log.info("status API on port %d", daemon.api.port)
    try:
        daemon.run(args.duration)
    except KeyboardInterrupt:
        pass
    finally:
        daemon._stop.set()
        if daemon.api is not None:
            daemon.api.stop()
    return 0


if __name__ == "__main__":
    sys.exit(main())
