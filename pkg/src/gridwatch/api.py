"""HTTP status API: state listings, VO-filterable map rollups, history,
notifications, and the operator command endpoint.

Read endpoints serve JSON snapshots; POST /api/command re-uses the external
command parser and is applied on the serialized state path.  Authorization
is a static bearer-token file with three roles: viewer < operator < admin.
Mutations fail closed: no token, no change.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import TYPE_CHECKING, Iterable, Mapping
from urllib.parse import parse_qs, unquote, urlparse

from .config import MetricKind, Model
from .retention import (
    BadArity,
    BadTimestamp,
    CommandError,
    NoProblem,
    UnknownDowntime,
    UnknownVerb,
    parse_external_command,
)
from .series import EmptyWindow
from .states import (
    Downtime,
    MonitorState,
    StateType,
    StatusCode,
    Target,
    UnknownTarget,
    worst_status,
)

if TYPE_CHECKING:
    from .daemon import Monitor

ROLES = ("viewer", "operator", "admin")
ROLE_RANK = {role: i for i, role in enumerate(ROLES)}

DOT_COLOR = {
    StatusCode.OK: "green",
    StatusCode.WARNING: "yellow",
    StatusCode.CRITICAL: "red",
    StatusCode.UNKNOWN: "gray",
}

ADMIN_VERBS = frozenset({"ENABLE_NOTIFICATIONS", "DISABLE_NOTIFICATIONS"})


class UnknownSite(KeyError):
    pass


class UnknownVO(KeyError):
    pass


def effective_service_status(state: MonitorState) -> StatusCode:
    """Operator-facing status: SOFT episodes count at their previous HARD
    value, which by construction is always OK (SOFT only exists between an
    OK HARD state and the problem's confirmation)."""
    if state.state_type is StateType.HARD:
        assert isinstance(state.current_status, StatusCode)
        return state.current_status
    return StatusCode.OK


@dataclass
class SiteRollup:
    site_name: str
    latitude: float
    longitude: float
    vos: tuple[str, ...]
    worst_status: StatusCode
    dot_color: str
    counts: dict[StatusCode, int]
    any_acknowledged: bool
    any_downtime: bool

    def to_json(self) -> dict:
        return {
            "site_name": self.site_name,
            "latitude": self.latitude,
            "longitude": self.longitude,
            "vos": list(self.vos),
            "worst_status": self.worst_status.name,
            "dot_color": self.dot_color,
            "counts": {code.name: self.counts[code] for code in StatusCode},
            "any_acknowledged": self.any_acknowledged,
            "any_downtime": self.any_downtime,
        }


def site_rollup(
    model: Model,
    states: Mapping[Target, MonitorState],
    site: str,
    vo_filter: str | None = None,
    metric_filter: MetricKind | None = None,
    downtimes: Iterable[Downtime] = (),
    now: float = 0.0,
) -> SiteRollup:
    """Worst-of aggregation over the site's services, optionally narrowed to
    one VO and one metric kind.  Empty selections roll up as UNKNOWN with
    zero counts."""
    site_def = model.sites.get(site)
    if site_def is None:
        raise UnknownSite(site)
    if vo_filter is not None and vo_filter not in model.vos:
        raise UnknownVO(vo_filter)
    host_names = {h.host_name for h in model.hosts_of_site(site)}
    selected: list[MonitorState] = []
    for (host_name, desc), svc in model.services.items():
        if host_name not in host_names:
            continue
        if vo_filter is not None and vo_filter not in svc.vos:
            continue
        if metric_filter is not None and svc.metric_kind is not metric_filter:
            continue
        state = states.get(Target(host_name, desc))
        if state is not None:
            selected.append(state)
    counts = {code: 0 for code in StatusCode}
    for state in selected:
        counts[effective_service_status(state)] += 1
    if selected:
        worst = worst_status(effective_service_status(s) for s in selected)
    else:
        worst = StatusCode.UNKNOWN
    downtime_list = list(downtimes)
    return SiteRollup(
        site_name=site_def.site_name,
        latitude=site_def.latitude,
        longitude=site_def.longitude,
        vos=site_def.vos,
        worst_status=worst,
        dot_color=DOT_COLOR[worst],
        counts=counts,
        any_acknowledged=any(s.acknowledged for s in selected),
        any_downtime=any(
            d.target == s.target and d.active_at(now)
            for s in selected for d in downtime_list
        ),
    )


def load_tokens(path: str | Path) -> dict[str, str]:
    """Token file: one `token<TAB>role` per line; # comments allowed."""
    tokens: dict[str, str] = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        token, sep, role = line.partition("\t")
        if not sep:
            raise ValueError(f"token file line needs token<TAB>role: {raw!r}")
        role = role.strip()
        if role not in ROLE_RANK:
            raise ValueError(f"unknown role {role!r}")
        tokens[token.strip()] = role
    return tokens


def _state_json(state: MonitorState, downtimes: list[Downtime], now: float) -> dict:
    return {
        "status": state.current_status.name,
        "state_type": state.state_type.name,
        "attempt": state.attempt,
        "last_check": state.last_check,
        "last_state_change": state.last_state_change,
        "notification_number": state.notification_number,
        "acknowledged": state.acknowledged,
        "in_downtime": any(d.target == state.target and d.active_at(now)
                           for d in downtimes),
    }


class _ApiError(Exception):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status
        self.message = message


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server_version = "gridwatch"

    # populated by StatusApiServer
    monitor: "Monitor"
    tokens: dict[str, str]
    allow_origin: str = "*"

    def log_message(self, fmt: str, *args) -> None:  # quiet by default
        pass

    # -- plumbing ---------------------------------------------------------

    def _send(self, status: int, payload: dict | list) -> None:
        body = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self._cors_headers()
        self.end_headers()
        self.wfile.write(body)

    def _cors_headers(self) -> None:
        self.send_header("Access-Control-Allow-Origin", self.allow_origin)
        self.send_header("Access-Control-Allow-Headers", "Authorization, Content-Type")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")

    def _role(self) -> str:
        header = self.headers.get("Authorization", "")
        if not header.startswith("Bearer "):
            raise _ApiError(401, "missing bearer token")
        role = self.tokens.get(header[len("Bearer "):].strip())
        if role is None:
            raise _ApiError(401, "unknown token")
        return role

    def _require(self, role: str, minimum: str) -> None:
        if ROLE_RANK[role] < ROLE_RANK[minimum]:
            raise _ApiError(403, f"requires {minimum} role")

    def _query(self) -> dict[str, str]:
        qs = parse_qs(urlparse(self.path).query)
        return {k: v[0] for k, v in qs.items() if v}

    # -- HTTP methods ------------------------------------------------------

    def do_OPTIONS(self) -> None:  # CORS preflight, no auth required
        self.send_response(204)
        self._cors_headers()
        self.send_header("Content-Length", "0")
        self.end_headers()

    def do_GET(self) -> None:
        try:
            role = self._role()
            self._require(role, "viewer")
            if urlparse(self.path).path == "/api/whoami":
                self._send(200, {"role": role})
                return
            self._send(200, self._route_get())
        except _ApiError as e:
            self._send(e.status, {"error": e.message})

    def do_POST(self) -> None:
        # drain the body first: an early auth error must not leave unread
        # bytes to poison the next request on a kept-alive connection
        length = int(self.headers.get("Content-Length", "0") or 0)
        body = self.rfile.read(length) if length > 0 else b""
        try:
            role = self._role()
            parsed = urlparse(self.path)
            if parsed.path != "/api/command":
                raise _ApiError(404, "no such endpoint")
            self._require(role, "operator")
            line = body.decode("utf-8").strip()
            self._send(202, self._submit_command(line, role))
        except _ApiError as e:
            self._send(e.status, {"error": e.message})

    # -- routing -----------------------------------------------------------

    def _route_get(self) -> dict:
        mon = self.monitor
        parsed = urlparse(self.path)
        parts = [unquote(p) for p in parsed.path.split("/") if p]
        query = self._query()
        now = mon.clock.now()
        if parts[:2] == ["api", "status"] and len(parts) == 3:
            if parts[2] == "hosts":
                return self._hosts_payload(now)
            if parts[2] == "services":
                return self._services_payload(now)
        if parts[:2] == ["api", "map"] and len(parts) == 2:
            return self._map_payload(query, now)
        if parts[:2] == ["api", "site"] and len(parts) == 3:
            return self._site_payload(parts[2], now)
        if parts[:2] == ["api", "history"] and len(parts) == 5:
            return self._history_payload(parts[2], parts[3], parts[4], query)
        if parts[:2] == ["api", "notifications"] and len(parts) == 2:
            limit = int(query.get("limit", "100"))
            records = mon.notification_history()[-limit:]
            return {"notifications": [{
                "at": r.sent_at,
                "target": str(r.target),
                "reason": r.reason,
                "number": r.notification_number,
                "contacts": list(r.contacts),
                "result": r.transport_result,
            } for r in records]}
        raise _ApiError(404, "no such endpoint")

    def _hosts_payload(self, now: float) -> dict:
        mon = self.monitor
        states = mon.states_view()
        downtimes = mon.downtimes_view()
        hosts = []
        for name, host in mon.model.hosts.items():
            state = states.get(Target(name))
            if state is None:
                continue
            entry = {"host_name": name, "address": host.address, "site": host.site,
                     "parents": list(host.parents)}
            entry.update(_state_json(state, downtimes, now))
            hosts.append(entry)
        return {"hosts": hosts}

    def _services_payload(self, now: float) -> dict:
        mon = self.monitor
        states = mon.states_view()
        downtimes = mon.downtimes_view()
        services = []
        for (host_name, desc), svc in mon.model.services.items():
            state = states.get(Target(host_name, desc))
            if state is None:
                continue
            entry = {
                "host_name": host_name,
                "description": desc,
                "metric_kind": svc.metric_kind.value,
                "vos": list(svc.vos),
                "effective_status": effective_service_status(state).name,
            }
            entry.update(_state_json(state, downtimes, now))
            services.append(entry)
        return {"services": services}

    def _map_payload(self, query: dict[str, str], now: float) -> dict:
        mon = self.monitor
        vo = query.get("vo") or None
        metric = None
        if query.get("metric"):
            try:
                metric = MetricKind(query["metric"])
            except ValueError:
                raise _ApiError(400, f"unknown metric kind {query['metric']!r}") from None
        states = mon.states_view()
        downtimes = mon.downtimes_view()
        try:
            rollups = [
                site_rollup(mon.model, states, site, vo, metric, downtimes, now).to_json()
                for site in mon.model.sites
            ]
        except UnknownVO as e:
            raise _ApiError(404, f"unknown VO {e.args[0]!r}") from None
        return {"sites": rollups}

    def _site_payload(self, site: str, now: float) -> dict:
        mon = self.monitor
        if site not in mon.model.sites:
            raise _ApiError(404, f"unknown site {site!r}")
        states = mon.states_view()
        downtimes = mon.downtimes_view()
        rollup = site_rollup(mon.model, states, site, downtimes=downtimes, now=now)
        hosts = []
        services = []
        for host in mon.model.hosts_of_site(site):
            state = states.get(Target(host.host_name))
            if state is None:
                continue
            entry = {"host_name": host.host_name, "address": host.address,
                     "parents": list(host.parents)}
            entry.update(_state_json(state, downtimes, now))
            hosts.append(entry)
            for svc in mon.model.services_of_host(host.host_name):
                target = Target(host.host_name, svc.description)
                svc_state = states.get(target)
                if svc_state is None:
                    continue
                svc_entry = {
                    "host_name": host.host_name,
                    "description": svc.description,
                    "metric_kind": svc.metric_kind.value,
                    "vos": list(svc.vos),
                    "effective_status": effective_service_status(svc_state).name,
                    "perf_labels": mon.series.labels(host.host_name, svc.description),
                }
                svc_entry.update(_state_json(svc_state, downtimes, now))
                services.append(svc_entry)
        return {"site": rollup.to_json(), "hosts": hosts, "services": services}

    def _history_payload(self, host: str, service: str, label: str,
                         query: dict[str, str]) -> dict:
        mon = self.monitor
        db = mon.series.get(host, service or None, label)
        if db is None:
            raise _ApiError(404, "no such series")
        now = mon.clock.now()
        try:
            start = float(query.get("start", now - 3600.0))
            end = float(query.get("end", now))
            res = float(query["res"]) if "res" in query else None
        except ValueError:
            raise _ApiError(400, "bad start/end/res") from None
        try:
            points = db.fetch(start, end, res)
        except EmptyWindow:
            points = []
        return {"host": host, "service": service, "label": label,
                "points": [[t, v] for t, v in points]}

    def _submit_command(self, line: str, role: str) -> dict:
        try:
            cmd = parse_external_command(line)
        except (UnknownVerb, BadArity, BadTimestamp) as e:
            raise _ApiError(400, f"malformed command: {e}") from None
        if cmd.verb in ADMIN_VERBS:
            self._require(role, "admin")
        try:
            self.monitor.handle_command(cmd)
        except UnknownTarget as e:
            raise _ApiError(404, f"unknown target: {e}") from None
        except UnknownDowntime as e:
            raise _ApiError(404, f"unknown downtime: {e}") from None
        except NoProblem as e:
            raise _ApiError(409, str(e)) from None
        except CommandError as e:
            raise _ApiError(400, str(e)) from None
        return {"status": "accepted", "verb": cmd.verb}


class StatusApiServer:
    """Threaded HTTP server bound to loopback by default."""

    def __init__(
        self,
        monitor: "Monitor",
        tokens: dict[str, str],
        port: int = 0,
        bind: str = "127.0.0.1",
        allow_origin: str = "*",
    ):
        handler = type("BoundHandler", (_Handler,), {
            "monitor": monitor,
            "tokens": dict(tokens),
            "allow_origin": allow_origin,
        })
        self.httpd = ThreadingHTTPServer((bind, port), handler)
        self.httpd.daemon_threads = True
        self.port = self.httpd.server_address[1]
        self._thread: threading.Thread | None = None

    def start(self) -> None:
        self._thread = threading.Thread(target=self.httpd.serve_forever,
                                        name="gridwatch-api", daemon=True)
        self._thread.start()

    def stop(self) -> None:
        self.httpd.shutdown()
        self.httpd.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)
