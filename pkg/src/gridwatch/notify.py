"""Notification delivery: suppression filters, escalation routing, dispatch.

Only HARD states notify.  A problem re-notifies once per notification
interval until it recovers or is suppressed (acknowledged / in downtime);
escalation rules can redirect later notifications in an episode to other
contact groups and shorten the interval.  Transports are exec-only plus an
append-only log with one line per delivery attempt:

    ISO8601<TAB>target<TAB>reason<TAB>number<TAB>contact<TAB>result
"""

from __future__ import annotations

import shlex
import subprocess
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Sequence

from .config import ContactGroupDef, EscalationDef, Model
from .states import MonitorState, StateType, Target

DEFAULT_NOTIFICATION_INTERVAL_S = 3600.0


@dataclass(frozen=True)
class NotificationRecord:
    target: Target
    reason: str  # problem | recovery
    notification_number: int
    contacts: tuple[str, ...]
    sent_at: float
    transport_result: str  # "ok" or "failed(<detail>)"


def should_send(
    state: MonitorState,
    suppressed: bool,
    now: float,
    notification_interval_s: float,
) -> bool:
    """Gate one prospective notification for a HARD state.

    Recovery notifies only when somebody was alerted this episode; a problem
    notifies when nobody has been yet, or the interval has elapsed since the
    last one.
    """
    if state.state_type is not StateType.HARD:
        return False
    if suppressed:
        return False
    if not state.is_problem:
        return state.notification_number >= 1
    if state.notification_number == 0:
        return True
    if state.last_notification_at is None:
        return True
    return now - state.last_notification_at >= notification_interval_s


def _matching(
    target: Target,
    notification_number: int,
    escalations: Sequence[EscalationDef],
) -> list[EscalationDef]:
    return [e for e in escalations
            if e.matches(target.host, target.service, notification_number)]


def select_contacts(
    target: Target,
    notification_number: int,
    escalations: Sequence[EscalationDef],
    default_groups: Iterable[str],
    groups: dict[str, ContactGroupDef],
) -> tuple[str, ...]:
    """Contacts for notification N: the union of every matching escalation's
    groups, or the default groups when none match; groups expand to their
    members, deduplicated and sorted."""
    matched = _matching(target, notification_number, escalations)
    group_names: list[str] = []
    if matched:
        for e in matched:
            group_names.extend(e.contact_groups)
    else:
        group_names.extend(default_groups)
    members: set[str] = set()
    for name in group_names:
        group = groups.get(name)
        if group is not None:
            members.update(group.members)
    return tuple(sorted(members))


def effective_interval(
    target: Target,
    notification_number: int,
    escalations: Sequence[EscalationDef],
    base_interval_s: float,
) -> float:
    """Escalations may shorten the re-notification interval; when several
    match, the most urgent (minimum) wins."""
    overrides = [e.notification_interval_s
                 for e in _matching(target, notification_number, escalations)
                 if e.notification_interval_s is not None]
    return min([base_interval_s] + overrides)


def iso8601(t: float) -> str:
    return datetime.fromtimestamp(t, tz=timezone.utc).isoformat()


NOTIFY_MACROS = ("CONTACTNAME", "HOSTNAME", "SERVICEDESC", "SERVICESTATE",
                 "OUTPUT", "NOTIFICATIONNUMBER")


def expand_notify_macros(command_line: str, macros: dict[str, str]) -> str:
    for name, value in macros.items():
        command_line = command_line.replace(f"${name}$", value)
    return command_line


class Notifier:
    """Dispatches notifications and owns the append-only notification log."""

    def __init__(self, model: Model, log_path: str | Path | None = None,
                 history_limit: int = 1000):
        self.model = model
        self.log_path = Path(log_path) if log_path is not None else None
        self.history: list[NotificationRecord] = []
        self.history_limit = history_limit

    def _log_line(self, record: NotificationRecord, contact: str, result: str) -> str:
        return "\t".join([
            iso8601(record.sent_at),
            str(record.target),
            record.reason,
            str(record.notification_number),
            contact,
            result,
        ])

    def _append_log(self, lines: list[str]) -> None:
        if self.log_path is None:
            return
        with self.log_path.open("a", encoding="utf-8") as fh:
            for line in lines:
                fh.write(line + "\n")

    def _run_command(self, contact_name: str, command_line: str) -> str:
        try:
            proc = subprocess.run(shlex.split(command_line), capture_output=True,
                                  text=True, timeout=30)
        except (OSError, ValueError, subprocess.TimeoutExpired) as e:
            return f"failed({e})"
        if proc.returncode != 0:
            return f"failed(exit {proc.returncode})"
        return "ok"

    def dispatch(
        self,
        target: Target,
        reason: str,
        notification_number: int,
        contacts: Sequence[str],
        state_text: str,
        output: str,
        now: float,
    ) -> NotificationRecord:
        """Run each contact's notify command (log-only contacts skip the
        exec) and append one log line per attempt, success or failure."""
        lines: list[str] = []
        failures: list[str] = []
        for contact_name in sorted(contacts):
            contact = self.model.contacts.get(contact_name)
            result = "ok"
            if contact is not None and contact.notify_command:
                command = self.model.commands.get(contact.notify_command)
                command_line = command.command_line if command else contact.notify_command
                expanded = expand_notify_macros(command_line, {
                    "CONTACTNAME": contact_name,
                    "HOSTNAME": target.host,
                    "SERVICEDESC": target.service or "",
                    "SERVICESTATE": state_text,
                    "OUTPUT": output,
                    "NOTIFICATIONNUMBER": str(notification_number),
                })
                result = self._run_command(contact_name, expanded)
            if result != "ok":
                failures.append(f"{contact_name}: {result}")
            record_stub = NotificationRecord(target, reason, notification_number,
                                             tuple(contacts), now, result)
            lines.append(self._log_line(record_stub, contact_name, result))
        self._append_log(lines)
        transport = "ok" if not failures else f"failed({'; '.join(failures)})"
        record = NotificationRecord(target=target, reason=reason,
                                    notification_number=notification_number,
                                    contacts=tuple(sorted(contacts)), sent_at=now,
                                    transport_result=transport)
        self.history.append(record)
        if len(self.history) > self.history_limit:
            del self.history[:len(self.history) - self.history_limit]
        return record
