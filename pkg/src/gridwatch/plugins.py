"""Plugin execution and the check protocol.

External plugins are plain executables: exit code 0/1/2 maps to
OK/WARNING/CRITICAL (anything else is UNKNOWN) and the first stdout line is
`SUMMARY | label=value[uom][;warn[;crit[;min[;max]]]] ...`.  Built-in checks
(check_tcp, check_dns, check_gris, check_agent) speak the same protocol
without spawning a process.  The GRIS information-service check reads a
full LDIF document over a plain TCP dump-and-close connection.
"""

from __future__ import annotations

import math
import re
import shlex
import socket
import subprocess
import time
from dataclasses import dataclass

from .clock import Clock
from .states import CheckResult, StatusCode, Target

DEFAULT_TIMEOUT_S = 10.0


def map_exit_code(code: int) -> StatusCode:
    if code == 0:
        return StatusCode.OK
    if code == 1:
        return StatusCode.WARNING
    if code == 2:
        return StatusCode.CRITICAL
    return StatusCode.UNKNOWN


class MalformedRange(ValueError):
    pass


class MalformedPerfDatum(ValueError):
    pass


@dataclass(frozen=True)
class ThresholdRange:
    """Monitoring-plugin threshold range.

    Alerts when the value falls outside [low, high]; `inverted` flips that
    to alert-inside.  low/high may be -inf/+inf.
    """

    low: float
    high: float
    inverted: bool = False

    def __post_init__(self) -> None:
        if self.low > self.high:
            raise MalformedRange(f"range low {self.low} above high {self.high}")

    def alerts(self, value: float) -> bool:
        inside = self.low <= value <= self.high
        return inside if self.inverted else not inside


_NUM_RE = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_RANGE_RE = re.compile(
    rf"^(?P<at>@)?(?:(?P<lo>~|{_NUM_RE}):)?(?P<hi>{_NUM_RE})?$"
)


def parse_range(text: str) -> ThresholdRange:
    """Grammar: [@]((~|num):)?num  or  num:

    "N" -> [0, N];  "N:" -> [N, inf);  "~:N" -> (-inf, N];  "A:B" -> [A, B];
    a leading "@" inverts the alert sense.
    """
    text = text.strip()
    if not text:
        raise MalformedRange("empty range")
    m = _RANGE_RE.match(text)
    if m is None:
        raise MalformedRange(f"cannot parse range {text!r}")
    lo_text, hi_text = m.group("lo"), m.group("hi")
    has_colon = ":" in text[1 if m.group("at") else 0:]
    if lo_text is None and hi_text is None:
        raise MalformedRange(f"cannot parse range {text!r}")
    if lo_text is None and has_colon:
        # bare "':N'" (empty low) is not in the grammar
        raise MalformedRange(f"cannot parse range {text!r}")
    if lo_text is None:
        low = 0.0
        high = float(hi_text)
    elif lo_text == "~":
        if hi_text is None:
            raise MalformedRange(f"cannot parse range {text!r}")
        low = -math.inf
        high = float(hi_text)
    else:
        low = float(lo_text)
        high = float(hi_text) if hi_text is not None else math.inf
    return ThresholdRange(low, high, inverted=bool(m.group("at")))


def eval_range(value: float, range_text: str) -> bool:
    """True when `value` should raise an alert under `range_text`."""
    return parse_range(range_text).alerts(value)


@dataclass
class PerfDatum:
    """One machine-readable metric sample from a plugin's output."""

    label: str
    value: float
    uom: str = ""
    warn: ThresholdRange | None = None
    crit: ThresholdRange | None = None
    min: float | None = None
    max: float | None = None

    def __post_init__(self) -> None:
        if not self.label:
            raise MalformedPerfDatum("empty perfdata label")
        if self.min is not None and self.max is not None and self.min > self.max:
            raise MalformedPerfDatum("perfdata min above max")


_PERF_TOKEN_RE = re.compile(r"(?:'[^']*'|[^\s'])+=[^\s]*|\S+")
_PERF_VALUE_RE = re.compile(rf"^(?P<num>{_NUM_RE})(?P<uom>[^\s;]*)$")


def _parse_perf_token(token: str) -> PerfDatum:
    if "=" not in token:
        raise MalformedPerfDatum(token)
    if token.startswith("'"):
        end = token.find("'", 1)
        if end < 0 or not token[end + 1:].startswith("="):
            raise MalformedPerfDatum(token)
        label = token[1:end]
        rest = token[end + 2:]
    else:
        label, rest = token.split("=", 1)
    if not label:
        raise MalformedPerfDatum(token)
    fields = rest.split(";")
    m = _PERF_VALUE_RE.match(fields[0])
    if m is None:
        raise MalformedPerfDatum(token)
    value = float(m.group("num"))
    uom = m.group("uom")

    def opt_range(i: int) -> ThresholdRange | None:
        if len(fields) <= i or not fields[i].strip():
            return None
        try:
            return parse_range(fields[i])
        except MalformedRange:
            raise MalformedPerfDatum(token) from None

    def opt_float(i: int) -> float | None:
        if len(fields) <= i or not fields[i].strip():
            return None
        try:
            return float(fields[i])
        except ValueError:
            raise MalformedPerfDatum(token) from None

    try:
        return PerfDatum(label=label, value=value, uom=uom,
                         warn=opt_range(1), crit=opt_range(2),
                         min=opt_float(3), max=opt_float(4))
    except MalformedPerfDatum:
        raise MalformedPerfDatum(token) from None


def parse_plugin_output(
    line: str,
    errors: list[str] | None = None,
) -> tuple[str, list[PerfDatum]]:
    """Split a plugin's first output line into (summary, perfdata).

    Malformed perfdata tokens are dropped; when `errors` is given each
    dropped token is appended to it.
    """
    summary, bar, perf_text = line.partition("|")
    summary = summary.strip()
    perfdata: list[PerfDatum] = []
    if bar:
        for token in _PERF_TOKEN_RE.findall(perf_text.strip()):
            try:
                perfdata.append(_parse_perf_token(token))
            except MalformedPerfDatum:
                if errors is not None:
                    errors.append(token)
    return summary, perfdata


def _stamp(clock: Clock | None) -> float:
    return clock.now() if clock is not None else time.time()


def _result(
    target: Target,
    status: StatusCode,
    summary: str,
    perfdata: list[PerfDatum],
    started_at: float,
    clock: Clock | None,
) -> CheckResult:
    return CheckResult(target=target, status=status, summary=summary,
                       perfdata=perfdata, started_at=started_at,
                       finished_at=max(started_at, _stamp(clock)))


def timeout_summary(timeout_s: float) -> str:
    return f"check timed out after {timeout_s:g}s"


def run_plugin(
    target: Target,
    command_line: str,
    timeout_s: float = DEFAULT_TIMEOUT_S,
    clock: Clock | None = None,
) -> CheckResult:
    """Execute an external plugin (macros already substituted).

    The timeout is wall-clock; a timed-out plugin is killed and reported
    CRITICAL.  Spawn failures come back as UNKNOWN rather than raising.
    """
    started = _stamp(clock)
    try:
        argv = shlex.split(command_line)
    except ValueError as e:
        return _result(target, StatusCode.UNKNOWN, f"unparseable command: {e}",
                       [], started, clock)
    if not argv:
        return _result(target, StatusCode.UNKNOWN, "empty command line", [], started, clock)
    try:
        proc = subprocess.run(argv, capture_output=True, text=True, timeout=timeout_s)
    except subprocess.TimeoutExpired:
        return _result(target, StatusCode.CRITICAL, timeout_summary(timeout_s),
                       [], started, clock)
    except OSError as e:
        return _result(target, StatusCode.UNKNOWN, f"spawn failure: {e}", [], started, clock)
    first_line = proc.stdout.splitlines()[0] if proc.stdout.splitlines() else ""
    summary, perfdata = parse_plugin_output(first_line)
    if not summary:
        summary = f"(no output; exit {proc.returncode})"
    return _result(target, map_exit_code(proc.returncode), summary, perfdata,
                   started, clock)


# --- built-in network checks --------------------------------------------------

def check_tcp(
    target: Target,
    address: str,
    port: int,
    timeout_s: float = DEFAULT_TIMEOUT_S,
    clock: Clock | None = None,
) -> CheckResult:
    started = _stamp(clock)
    t0 = time.monotonic()
    try:
        with socket.create_connection((address, port), timeout=timeout_s):
            elapsed = time.monotonic() - t0
    except socket.timeout:
        return _result(target, StatusCode.CRITICAL,
                       f"TCP CRITICAL - connection to {address}:{port} timed out",
                       [], started, clock)
    except ConnectionRefusedError:
        return _result(target, StatusCode.CRITICAL,
                       f"TCP CRITICAL - connection refused on {address}:{port}",
                       [], started, clock)
    except OSError as e:
        return _result(target, StatusCode.CRITICAL,
                       f"TCP CRITICAL - {address}:{port}: {e}", [], started, clock)
    perf = [PerfDatum(label="time", value=round(elapsed, 6), uom="s", min=0.0)]
    return _result(target, StatusCode.OK,
                   f"TCP OK - {elapsed:.3f}s response on {address}:{port}",
                   perf, started, clock)


def check_dns(
    target: Target,
    name: str,
    expected: str | None = None,
    clock: Clock | None = None,
) -> CheckResult:
    started = _stamp(clock)
    t0 = time.monotonic()
    try:
        infos = socket.getaddrinfo(name, None)
    except socket.gaierror as e:
        return _result(target, StatusCode.CRITICAL,
                       f"DNS CRITICAL - {name} does not resolve ({e})",
                       [], started, clock)
    elapsed = time.monotonic() - t0
    addresses = sorted({info[4][0] for info in infos})
    perf = [PerfDatum(label="time", value=round(elapsed, 6), uom="s", min=0.0)]
    if expected is not None and expected not in addresses:
        return _result(target, StatusCode.CRITICAL,
                       f"DNS CRITICAL - {name} resolves to {', '.join(addresses)},"
                       f" expected {expected}", perf, started, clock)
    return _result(target, StatusCode.OK,
                   f"DNS OK - {name} resolves to {addresses[0]}", perf, started, clock)


# --- LDIF and the GRIS information-service check ------------------------------

@dataclass
class LdifEntry:
    """One directory record: dn plus a case-folded attribute multimap."""

    dn: str
    attributes: dict[str, list[str]]

    def first(self, name: str) -> str | None:
        values = self.attributes.get(name.lower())
        return values[0] if values else None


class MissingDn(ValueError):
    def __init__(self, record_index: int):
        super().__init__(f"record {record_index} has no dn")
        self.record_index = record_index


class MalformedLdifLine(ValueError):
    def __init__(self, line_no: int, text: str):
        super().__init__(f"line {line_no}: cannot parse {text!r}")
        self.line_no = line_no


def parse_ldif(text: str) -> list[LdifEntry]:
    """Parse LDIF-shaped text: blank-line-separated records of `name: value`
    lines; a line starting with one space continues the previous value;
    attribute names fold to lower case.
    """
    entries: list[LdifEntry] = []
    record: list[tuple[str, str]] | None = None
    record_index = 0

    def flush() -> None:
        nonlocal record, record_index
        if record is None:
            return
        dn = None
        attrs: dict[str, list[str]] = {}
        for name, value in record:
            if name == "dn" and dn is None:
                dn = value
            else:
                attrs.setdefault(name, []).append(value)
        if dn is None:
            raise MissingDn(record_index)
        entries.append(LdifEntry(dn=dn, attributes=attrs))
        record = None
        record_index += 1

    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            flush()
            continue
        if line.startswith(" "):
            if not record:
                raise MalformedLdifLine(line_no, line)
            name, value = record[-1]
            record[-1] = (name, value + line[1:])
            continue
        name, sep, value = line.partition(":")
        if not sep or not name.strip() or " " in name.strip():
            raise MalformedLdifLine(line_no, line)
        if record is None:
            record = []
        record.append((name.strip().lower(), value.lstrip(" ")))
    flush()
    return entries


def _read_all(address: str, port: int, timeout_s: float) -> bytes:
    chunks: list[bytes] = []
    with socket.create_connection((address, port), timeout=timeout_s) as sock:
        sock.settimeout(timeout_s)
        while True:
            chunk = sock.recv(65536)
            if not chunk:
                break
            chunks.append(chunk)
    return b"".join(chunks)


def _directional_range(range_text: str, higher_is_better: bool) -> str:
    """With higher-is-better semantics a bare number N is shorthand for
    "N:" (alert when the value drops below N)."""
    text = range_text.strip()
    if higher_is_better and ":" not in text and not text.startswith("@"):
        return text + ":"
    return text


def _threshold_result(
    target: Target,
    label: str,
    value: float,
    warn: str | None,
    crit: str | None,
    higher_is_better: bool,
    prefix: str,
    started: float,
    clock: Clock | None,
) -> CheckResult:
    try:
        crit_range = (parse_range(_directional_range(crit, higher_is_better))
                      if crit else None)
        warn_range = (parse_range(_directional_range(warn, higher_is_better))
                      if warn else None)
    except MalformedRange as e:
        return _result(target, StatusCode.UNKNOWN, f"{prefix} UNKNOWN - bad range: {e}",
                       [], started, clock)
    perf = [PerfDatum(label=label, value=value, warn=warn_range, crit=crit_range)]
    if crit_range is not None and crit_range.alerts(value):
        status, word = StatusCode.CRITICAL, "CRITICAL"
    elif warn_range is not None and warn_range.alerts(value):
        status, word = StatusCode.WARNING, "WARNING"
    else:
        status, word = StatusCode.OK, "OK"
    return _result(target, status, f"{prefix} {word} - {label}={value:g}",
                   perf, started, clock)


def evaluate_gris_document(
    target: Target,
    text: str,
    attribute: str,
    warn: str | None,
    crit: str | None,
    higher_is_better: bool,
    started: float,
    clock: Clock | None = None,
) -> CheckResult:
    """Threshold the first numeric value of `attribute` across the entries
    of an LDIF document (shared by the socket check and the simulator)."""
    try:
        entries = parse_ldif(text)
    except ValueError as e:
        return _result(target, StatusCode.UNKNOWN,
                       f"GRIS UNKNOWN - bad LDIF: {e}", [], started, clock)
    wanted = attribute.lower()
    value: float | None = None
    for entry in entries:
        for candidate in entry.attributes.get(wanted, []):
            try:
                value = float(candidate)
                break
            except ValueError:
                continue
        if value is not None:
            break
    if value is None:
        return _result(target, StatusCode.UNKNOWN,
                       f"GRIS UNKNOWN - attribute {attribute} not found",
                       [], started, clock)
    return _threshold_result(target, wanted, value, warn, crit, higher_is_better,
                             "GRIS", started, clock)


def check_gris(
    target: Target,
    address: str,
    port: int,
    attribute: str,
    warn: str | None = None,
    crit: str | None = None,
    higher_is_better: bool = True,
    timeout_s: float = DEFAULT_TIMEOUT_S,
    clock: Clock | None = None,
) -> CheckResult:
    """Query a GRIS information endpoint (LDIF over TCP, dump-and-close) and
    threshold the first numeric value of `attribute` across its entries."""
    started = _stamp(clock)
    try:
        raw = _read_all(address, port, timeout_s)
    except OSError as e:
        return _result(target, StatusCode.CRITICAL,
                       f"GRIS CRITICAL - cannot query {address}:{port}: {e}",
                       [], started, clock)
    return evaluate_gris_document(target, raw.decode("utf-8", errors="replace"),
                                  attribute, warn, crit, higher_is_better,
                                  started, clock)


def evaluate_agent_document(
    target: Target,
    text: str,
    name: str,
    warn: str | None,
    crit: str | None,
    higher_is_better: bool,
    started: float,
    clock: Clock | None = None,
) -> CheckResult:
    """Threshold a named metric out of `name value` lines."""
    wanted = name.lower()
    value: float | None = None
    for line in text.splitlines():
        parts = line.split()
        if len(parts) >= 2 and parts[0].lower() == wanted:
            try:
                value = float(parts[1])
            except ValueError:
                pass
            break
    if value is None:
        return _result(target, StatusCode.UNKNOWN,
                       f"AGENT UNKNOWN - metric {name} not found", [], started, clock)
    return _threshold_result(target, wanted, value, warn, crit, higher_is_better,
                             "AGENT", started, clock)


def check_agent(
    target: Target,
    address: str,
    port: int,
    name: str,
    warn: str | None = None,
    crit: str | None = None,
    higher_is_better: bool = False,
    timeout_s: float = DEFAULT_TIMEOUT_S,
    clock: Clock | None = None,
) -> CheckResult:
    """Fetch `name value` lines from a host metrics endpoint and threshold
    the named metric (cpu, disk, mem, processes, ...)."""
    started = _stamp(clock)
    try:
        raw = _read_all(address, port, timeout_s)
    except OSError as e:
        return _result(target, StatusCode.CRITICAL,
                       f"AGENT CRITICAL - cannot query {address}:{port}: {e}",
                       [], started, clock)
    return evaluate_agent_document(target, raw.decode("utf-8", errors="replace"),
                                   name, warn, crit, higher_is_better, started, clock)
