"""State retention across restarts and the external command stream.

The snapshot is line-oriented text: one `section { key=value ... }` record
per line with percent-encoded values, closed by a CRC32 trailer so any
single-byte corruption is caught.  Commands arrive as single lines

    [unix_ts] VERB;arg1;arg2;...

through the command file and through POST /api/command, sharing one parser.
"""

from __future__ import annotations

import binascii
import os
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING
from urllib.parse import quote, unquote

from .config import Model
from .notify import NotificationRecord
from .states import (
    Downtime,
    HostReachability,
    MonitorState,
    StateType,
    StatusCode,
    Target,
)

if TYPE_CHECKING:  # the engine facade lives in daemon.py
    from .daemon import Monitor

FORMAT_VERSION = 1
HEADER = "gridwatch-retention"
HISTORY_TAIL = 1000


class RetentionError(Exception):
    pass


class IoFailure(RetentionError):
    pass


class CorruptSnapshot(RetentionError):
    pass


@dataclass
class RetentionSnapshot:
    format_version: int = FORMAT_VERSION
    saved_at: float = 0.0
    states: dict[Target, MonitorState] = field(default_factory=dict)
    downtimes: list[Downtime] = field(default_factory=list)
    next_downtime_id: int = 1
    notifications: list[NotificationRecord] = field(default_factory=list)
    notifications_enabled: bool = True


def _enc(value: str) -> str:
    return quote(value, safe="")


def _record(section: str, fields: dict[str, str]) -> str:
    body = " ".join(f"{k}={_enc(v)}" for k, v in fields.items())
    return f"{section} {{ {body} }}"


_RECORD_RE = re.compile(r"^(\w+) \{ (.*) \}$")


def _parse_record(line: str) -> tuple[str, dict[str, str]]:
    m = _RECORD_RE.match(line)
    if m is None:
        raise CorruptSnapshot(f"unparseable record: {line!r}")
    fields: dict[str, str] = {}
    body = m.group(2).strip()
    if body:
        for token in body.split(" "):
            key, sep, value = token.partition("=")
            if not sep:
                raise CorruptSnapshot(f"bad field {token!r}")
            fields[key] = unquote(value)
    return m.group(1), fields


def _opt(value: float | None) -> str:
    return "" if value is None else repr(value)


def _opt_parse(text: str) -> float | None:
    return None if text == "" else float(text)


def _state_fields(s: MonitorState) -> dict[str, str]:
    return {
        "target": str(s.target),
        "status": s.current_status.name,
        "type": s.state_type.name,
        "attempt": str(s.attempt),
        "last_check": _opt(s.last_check),
        "last_state_change": _opt(s.last_state_change),
        "notification_number": str(s.notification_number),
        "acknowledged": "1" if s.acknowledged else "0",
        "last_notification_at": _opt(s.last_notification_at),
    }


def _state_from(fields: dict[str, str]) -> MonitorState:
    target = Target.parse(fields["target"])
    value_enum = HostReachability if target.is_host else StatusCode
    return MonitorState(
        target=target,
        current_status=value_enum[fields["status"]],
        state_type=StateType[fields["type"]],
        attempt=int(fields["attempt"]),
        last_check=_opt_parse(fields["last_check"]),
        last_state_change=_opt_parse(fields["last_state_change"]),
        notification_number=int(fields["notification_number"]),
        acknowledged=fields["acknowledged"] == "1",
        last_notification_at=_opt_parse(fields["last_notification_at"]),
    )


def render_retention(snap: RetentionSnapshot) -> str:
    lines = [f"{HEADER} {snap.format_version}"]
    lines.append(_record("meta", {
        "saved_at": repr(snap.saved_at),
        "next_downtime_id": str(snap.next_downtime_id),
        "notifications_enabled": "1" if snap.notifications_enabled else "0",
    }))
    for target in sorted(snap.states, key=lambda t: t.sort_key):
        lines.append(_record("state", _state_fields(snap.states[target])))
    for d in snap.downtimes:
        lines.append(_record("downtime", {
            "id": str(d.id),
            "target": str(d.target),
            "start": repr(d.start_at),
            "end": repr(d.end_at),
            "author": d.author,
            "comment": d.comment,
        }))
    for n in snap.notifications[-HISTORY_TAIL:]:
        lines.append(_record("notification", {
            "target": str(n.target),
            "reason": n.reason,
            "number": str(n.notification_number),
            "contacts": ",".join(n.contacts),
            "sent_at": repr(n.sent_at),
            "result": n.transport_result,
        }))
    body = "\n".join(lines) + "\n"
    crc = binascii.crc32(body.encode("utf-8")) & 0xFFFFFFFF
    return body + f"crc {crc:08x}\n"


def write_retention(snap: RetentionSnapshot, path: str | Path) -> None:
    """Atomic write: temp file in the same directory, then rename."""
    path = Path(path)
    try:
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_text(render_retention(snap), encoding="utf-8")
        os.replace(tmp, path)
    except OSError as e:
        raise IoFailure(str(e)) from e


def parse_retention(text: str) -> RetentionSnapshot:
    lines = text.splitlines()
    if not lines:
        raise CorruptSnapshot("empty snapshot")
    if not lines[-1].startswith("crc "):
        raise CorruptSnapshot("missing crc trailer")
    body = "\n".join(lines[:-1]) + "\n"
    try:
        expected = int(lines[-1][4:], 16)
    except ValueError:
        raise CorruptSnapshot("bad crc trailer") from None
    actual = binascii.crc32(body.encode("utf-8")) & 0xFFFFFFFF
    if actual != expected:
        raise CorruptSnapshot(f"checksum mismatch: {actual:08x} != {expected:08x}")
    header = lines[0].split()
    if len(header) != 2 or header[0] != HEADER:
        raise CorruptSnapshot("bad header")
    snap = RetentionSnapshot(format_version=int(header[1]))
    for line in lines[1:-1]:
        try:
            section, fields = _parse_record(line)
            if section == "meta":
                snap.saved_at = float(fields["saved_at"])
                snap.next_downtime_id = int(fields["next_downtime_id"])
                snap.notifications_enabled = fields["notifications_enabled"] == "1"
            elif section == "state":
                state = _state_from(fields)
                snap.states[state.target] = state
            elif section == "downtime":
                snap.downtimes.append(Downtime(
                    id=int(fields["id"]),
                    target=Target.parse(fields["target"]),
                    start_at=float(fields["start"]),
                    end_at=float(fields["end"]),
                    author=fields["author"],
                    comment=fields["comment"],
                ))
            elif section == "notification":
                contacts = tuple(c for c in fields["contacts"].split(",") if c)
                snap.notifications.append(NotificationRecord(
                    target=Target.parse(fields["target"]),
                    reason=fields["reason"],
                    notification_number=int(fields["number"]),
                    contacts=contacts,
                    sent_at=float(fields["sent_at"]),
                    transport_result=fields["result"],
                ))
            else:
                raise CorruptSnapshot(f"unknown section {section!r}")
        except (KeyError, ValueError) as e:
            raise CorruptSnapshot(f"bad record {line!r}: {e}") from e
    return snap


def read_retention(path: str | Path, model: Model) -> tuple[RetentionSnapshot, int]:
    """Load a snapshot, dropping states whose targets left the configuration.

    Returns (snapshot, dropped_count).  Raises IoFailure / CorruptSnapshot.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise IoFailure(str(e)) from e
    snap = parse_retention(text)
    dropped = 0
    kept: dict[Target, MonitorState] = {}
    for target, state in snap.states.items():
        known = (target.host in model.hosts if target.is_host
                 else (target.host, target.service) in model.services)
        if known:
            kept[target] = state
        else:
            dropped += 1
    snap.states = kept
    snap.downtimes = [d for d in snap.downtimes
                      if (d.target.host in model.hosts if d.target.is_host
                          else (d.target.host, d.target.service) in model.services)]
    return snap, dropped


# --- external commands ---------------------------------------------------

class CommandError(Exception):
    pass


class UnknownVerb(CommandError):
    pass


class BadArity(CommandError):
    pass


class BadTimestamp(CommandError):
    pass


class NoProblem(CommandError):
    """Acknowledgement refused: the target is not in a HARD problem state."""


class UnknownDowntime(CommandError):
    pass


@dataclass(frozen=True)
class ExternalCommand:
    issued_at: float
    verb: str
    args: tuple[str, ...]


# verb -> (min_args, max_args, greedy_last); greedy_last folds any extra
# `;`-separated pieces into the final free-text argument
_VERBS: dict[str, tuple[int, int, bool]] = {
    "ACKNOWLEDGE_SVC_PROBLEM": (4, 4, True),
    "ACKNOWLEDGE_HOST_PROBLEM": (3, 3, True),
    "REMOVE_ACKNOWLEDGEMENT": (1, 2, False),
    "SCHEDULE_DOWNTIME": (5, 6, True),
    "CANCEL_DOWNTIME": (1, 1, False),
    "ENABLE_NOTIFICATIONS": (0, 0, False),
    "DISABLE_NOTIFICATIONS": (0, 0, False),
    "FORCE_CHECK": (1, 2, False),
    "PROCESS_SERVICE_CHECK_RESULT": (4, 4, True),
}

_COMMAND_RE = re.compile(r"^\[([^\]]+)\]\s+(.*)$")


def parse_external_command(line: str) -> ExternalCommand:
    """Parse `[unix_ts] VERB;arg1;arg2;...`."""
    m = _COMMAND_RE.match(line.strip())
    if m is None:
        raise BadTimestamp(f"missing [timestamp] prefix: {line!r}")
    try:
        issued_at = float(m.group(1))
    except ValueError:
        raise BadTimestamp(f"bad timestamp {m.group(1)!r}") from None
    rest = m.group(2)
    verb, _, tail = rest.partition(";")
    verb = verb.strip()
    if verb not in _VERBS:
        raise UnknownVerb(verb or "<empty>")
    min_args, max_args, greedy = _VERBS[verb]
    args = tuple(tail.split(";")) if tail != "" else ()
    if greedy and len(args) > max_args:
        head = args[:max_args - 1]
        args = head + (";".join(args[max_args - 1:]),)
    if not min_args <= len(args) <= max_args:
        raise BadArity(f"{verb} takes {min_args}..{max_args} args, got {len(args)}")
    return ExternalCommand(issued_at=issued_at, verb=verb, args=args)


def _target_of(args: tuple[str, ...], service_index: int | None) -> Target:
    if service_index is not None and len(args) > service_index:
        return Target(args[0], args[service_index])
    return Target(args[0])


def apply_command(cmd: ExternalCommand, mon: "Monitor") -> None:
    """Apply a parsed command to the engine facade.

    Raises UnknownTarget / NoProblem / UnknownDowntime; malformed numeric
    arguments raise BadArity.
    """
    verb, args = cmd.verb, cmd.args
    if verb == "ACKNOWLEDGE_SVC_PROBLEM":
        mon.acknowledge(Target(args[0], args[1]), author=args[2], comment=args[3])
    elif verb == "ACKNOWLEDGE_HOST_PROBLEM":
        mon.acknowledge(Target(args[0]), author=args[1], comment=args[2])
    elif verb == "REMOVE_ACKNOWLEDGEMENT":
        mon.remove_acknowledgement(_target_of(args, 1))
    elif verb == "SCHEDULE_DOWNTIME":
        has_service = len(args) == 6
        target = Target(args[0], args[1]) if has_service else Target(args[0])
        base = 2 if has_service else 1
        try:
            start = float(args[base])
            end = float(args[base + 1])
        except ValueError:
            raise BadArity(f"SCHEDULE_DOWNTIME: bad window {args[base:base + 2]}") from None
        mon.schedule_downtime(target, start, end,
                              author=args[base + 2], comment=args[base + 3])
    elif verb == "CANCEL_DOWNTIME":
        try:
            downtime_id = int(args[0])
        except ValueError:
            raise BadArity(f"CANCEL_DOWNTIME: bad id {args[0]!r}") from None
        mon.cancel_downtime(downtime_id)
    elif verb == "ENABLE_NOTIFICATIONS":
        mon.set_notifications_enabled(True)
    elif verb == "DISABLE_NOTIFICATIONS":
        mon.set_notifications_enabled(False)
    elif verb == "FORCE_CHECK":
        mon.force_check(_target_of(args, 1))
    elif verb == "PROCESS_SERVICE_CHECK_RESULT":
        try:
            code = int(args[2])
        except ValueError:
            raise BadArity(f"PROCESS_SERVICE_CHECK_RESULT: bad code {args[2]!r}") from None
        mon.submit_passive_result(Target(args[0], args[1]), code, args[3])
    else:  # pragma: no cover - the parser already rejects unknown verbs
        raise UnknownVerb(verb)


def tail_command_file(path: str | Path, offset: int) -> tuple[list[str], int]:
    """Read complete lines appended to the command file since `offset`.

    A plain appended-to file is used instead of a FIFO for portability; the
    daemon polls it.  Returns (lines, new_offset).
    """
    path = Path(path)
    if not path.exists():
        return [], offset
    size = path.stat().st_size
    if size < offset:  # truncated/rotated; start over
        offset = 0
    if size == offset:
        return [], offset
    with path.open("rb") as fh:
        fh.seek(offset)
        data = fh.read()
    # only consume whole lines; a partial trailing line stays for next poll
    last_newline = data.rfind(b"\n")
    if last_newline < 0:
        return [], offset
    consumed = data[:last_newline + 1]
    lines = [ln.strip() for ln in consumed.decode("utf-8", errors="replace").splitlines()
             if ln.strip()]
    return lines, offset + last_newline + 1
