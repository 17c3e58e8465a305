"""Declarative object configuration: parsing and cross-reference validation.

Grammar (one or more .cfg files):

    # comment to end of line
    define <kind> {
        key   value with spaces
        other value
    }

Eight kinds: host, service, command, contact, contactgroup, escalation,
site, vo.  Attribute values run from the first whitespace after the key to
the end of the line.  `!` splits a service's check_command into the command
name and its arguments.  Templates/inheritance are not supported and
unknown attributes are hard errors.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .topology import TopologyGraph, find_cycle

KINDS = frozenset(
    {"host", "service", "command", "contact", "contactgroup", "escalation", "site", "vo"}
)

BUILTIN_COMMANDS = frozenset({"check_tcp", "check_dns", "check_gris", "check_agent"})

DEFAULT_CHECK_INTERVAL_S = 60.0
DEFAULT_RETRY_INTERVAL_S = 15.0
DEFAULT_MAX_ATTEMPTS = 3

_OPENER_RE = re.compile(r"^\s*define\s+(\w+)\s*\{\s*$")
_CLOSER_RE = re.compile(r"^\s*\}\s*$")


class ConfigError(Exception):
    """Base for all configuration problems."""


class UnknownKind(ConfigError):
    def __init__(self, kind: str, file: str, line: int):
        super().__init__(f"{file}:{line}: unknown object kind {kind!r}")
        self.kind, self.file, self.line = kind, file, line


class UnterminatedBlock(ConfigError):
    def __init__(self, kind: str, file: str, line: int):
        super().__init__(f"{file}:{line}: unterminated 'define {kind}' block")
        self.kind, self.file, self.line = kind, file, line


class DuplicateAttribute(ConfigError):
    def __init__(self, name: str, file: str, line: int):
        super().__init__(f"{file}:{line}: duplicate attribute {name!r}")
        self.name, self.file, self.line = name, file, line


class MalformedLine(ConfigError):
    def __init__(self, text: str, file: str, line: int):
        super().__init__(f"{file}:{line}: cannot parse line {text!r}")
        self.text, self.file, self.line = text, file, line


class UnknownAttribute(ConfigError):
    def __init__(self, kind: str, name: str, file: str, line: int):
        super().__init__(f"{file}:{line}: unknown attribute {name!r} in 'define {kind}'")
        self.kind, self.name, self.file, self.line = kind, name, file, line


class MissingRequiredAttribute(ConfigError):
    def __init__(self, kind: str, attr: str, where: str = ""):
        at = f" ({where})" if where else ""
        super().__init__(f"'define {kind}' is missing required attribute {attr!r}{at}")
        self.kind, self.attr = kind, attr


class DanglingReference(ConfigError):
    def __init__(self, kind: str, name: str, where: str = ""):
        at = f" referenced from {where}" if where else ""
        super().__init__(f"no {kind} named {name!r}{at}")
        self.kind, self.name = kind, name


class ParentCycle(ConfigError):
    def __init__(self, path: Sequence[str]):
        super().__init__(f"host parent cycle: {' -> '.join(path)}")
        self.path = list(path)


class DuplicateDefinition(ConfigError):
    def __init__(self, kind: str, name: str):
        super().__init__(f"duplicate {kind} definition {name!r}")
        self.kind, self.name = kind, name


class BadAttributeValue(ConfigError):
    def __init__(self, kind: str, attr: str, value: str, why: str):
        super().__init__(f"'define {kind}' attribute {attr}={value!r}: {why}")
        self.kind, self.attr, self.value = kind, attr, value


@dataclass
class ObjectBlock:
    """One raw `define kind { ... }` block, attributes in file order."""

    kind: str
    attributes: dict[str, str]
    source_file: str = "<config>"
    source_line: int = 0

    def get(self, name: str, default: str | None = None) -> str | None:
        return self.attributes.get(name, default)


class MetricKind(enum.Enum):
    CPU = "cpu"
    DISK = "disk"
    MEM = "mem"
    PROCESSES = "processes"
    NETWORK_SERVICE = "network_service"
    GRID_SERVICE = "grid_service"
    INFO_SERVICE = "info_service"
    OTHER = "other"


@dataclass(frozen=True)
class CommandRef:
    """A check_command reference: command name plus `!`-separated arguments."""

    name: str
    args: tuple[str, ...] = ()

    @classmethod
    def parse(cls, text: str) -> "CommandRef":
        parts = text.split("!")
        return cls(parts[0].strip(), tuple(p.strip() for p in parts[1:]))


@dataclass
class HostDef:
    host_name: str
    address: str
    site: str
    check_command: CommandRef
    parents: tuple[str, ...] = ()
    check_interval_s: float = DEFAULT_CHECK_INTERVAL_S
    max_attempts: int = DEFAULT_MAX_ATTEMPTS
    notify: bool = True


@dataclass
class ServiceDef:
    host_name: str
    description: str
    check_command: CommandRef
    check_interval_s: float = DEFAULT_CHECK_INTERVAL_S
    retry_interval_s: float = DEFAULT_RETRY_INTERVAL_S
    max_attempts: int = DEFAULT_MAX_ATTEMPTS
    contact_groups: tuple[str, ...] = ()
    vos: tuple[str, ...] = ()
    metric_kind: MetricKind = MetricKind.OTHER


@dataclass
class CommandDef:
    name: str
    command_line: str


@dataclass
class ContactDef:
    name: str
    notify_command: str | None = None  # None = log-only contact
    enabled: bool = True


@dataclass
class ContactGroupDef:
    name: str
    members: tuple[str, ...] = ()


@dataclass
class EscalationDef:
    """Redirects notifications n with first <= n <= last to other groups.

    last_notification == 0 means unbounded.  host/service patterns accept a
    literal `*` wildcard; a missing service pattern scopes the escalation to
    the host itself.
    """

    host_pattern: str
    service_pattern: str | None
    first_notification: int
    last_notification: int
    contact_groups: tuple[str, ...]
    notification_interval_s: float | None = None

    def matches(self, host: str, service: str | None, number: int) -> bool:
        if self.host_pattern != "*" and self.host_pattern != host:
            return False
        if service is None:
            if self.service_pattern is not None:
                return False
        else:
            if self.service_pattern is None:
                return False
            if self.service_pattern != "*" and self.service_pattern != service:
                return False
        if number < self.first_notification:
            return False
        return self.last_notification == 0 or number <= self.last_notification


@dataclass
class SiteDef:
    site_name: str
    latitude: float
    longitude: float
    vos: tuple[str, ...] = ()


@dataclass
class Model:
    """Fully linked configuration. Insertion order preserved everywhere."""

    hosts: dict[str, HostDef] = field(default_factory=dict)
    services: dict[tuple[str, str], ServiceDef] = field(default_factory=dict)
    commands: dict[str, CommandDef] = field(default_factory=dict)
    contacts: dict[str, ContactDef] = field(default_factory=dict)
    contact_groups: dict[str, ContactGroupDef] = field(default_factory=dict)
    escalations: list[EscalationDef] = field(default_factory=list)
    sites: dict[str, SiteDef] = field(default_factory=dict)
    vos: tuple[str, ...] = ()
    topology: TopologyGraph = field(default_factory=lambda: TopologyGraph({}))

    def services_of_host(self, host: str) -> list[ServiceDef]:
        return [s for (h, _), s in self.services.items() if h == host]

    def hosts_of_site(self, site: str) -> list[HostDef]:
        return [h for h in self.hosts.values() if h.site == site]


def _strip_comment(line: str) -> str:
    pos = line.find("#")
    return line if pos < 0 else line[:pos]


def parse_objects(
    text: str,
    filename: str = "<config>",
    allowed_kinds: frozenset[str] = KINDS,
) -> list[ObjectBlock]:
    """Split configuration source into raw ObjectBlocks.

    Comments (# to end of line) and blank lines are ignored.  Raises
    UnknownKind, UnterminatedBlock, DuplicateAttribute, MalformedLine.
    """
    blocks: list[ObjectBlock] = []
    current: ObjectBlock | None = None
    opened_at = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line.strip():
            continue
        if current is None:
            m = _OPENER_RE.match(line)
            if m is None:
                raise MalformedLine(raw.strip(), filename, lineno)
            kind = m.group(1)
            if kind not in allowed_kinds:
                raise UnknownKind(kind, filename, lineno)
            current = ObjectBlock(kind=kind, attributes={},
                                  source_file=filename, source_line=lineno)
            opened_at = lineno
        elif _CLOSER_RE.match(line):
            blocks.append(current)
            current = None
        else:
            parts = line.strip().split(None, 1)
            key = parts[0]
            value = parts[1].strip() if len(parts) > 1 else ""
            if key in current.attributes:
                raise DuplicateAttribute(key, filename, lineno)
            current.attributes[key] = value
    if current is not None:
        raise UnterminatedBlock(current.kind, filename, opened_at)
    return blocks


def parse_files(paths: Iterable[str | Path], allowed_kinds: frozenset[str] = KINDS) -> list[ObjectBlock]:
    blocks: list[ObjectBlock] = []
    for p in paths:
        p = Path(p)
        blocks.extend(parse_objects(p.read_text(encoding="utf-8"), str(p), allowed_kinds))
    return blocks


def config_paths(arg: str | Path) -> list[Path]:
    """Expand a CLI -c argument: a directory means all *.cfg inside, sorted."""
    p = Path(arg)
    if p.is_dir():
        return sorted(p.glob("*.cfg"))
    return [p]


# Known attributes per kind; anything else is a hard error (catches typos).
_KNOWN_ATTRS: dict[str, frozenset[str]] = {
    "host": frozenset({"host_name", "address", "parents", "site", "check_command",
                       "check_interval", "max_attempts", "notify"}),
    "service": frozenset({"host_name", "service_description", "check_command",
                          "check_interval", "retry_interval", "max_attempts",
                          "contact_groups", "vos", "metric_kind"}),
    "command": frozenset({"command_name", "command_line"}),
    "contact": frozenset({"contact_name", "notify_command", "enabled"}),
    "contactgroup": frozenset({"contactgroup_name", "members"}),
    "escalation": frozenset({"host_name", "service_description", "first_notification",
                             "last_notification", "contact_groups",
                             "notification_interval"}),
    "site": frozenset({"site_name", "latitude", "longitude", "vos"}),
    "vo": frozenset({"vo_name"}),
}


def _require(block: ObjectBlock, attr: str) -> str:
    value = block.attributes.get(attr, "").strip()
    if not value:
        raise MissingRequiredAttribute(block.kind, attr,
                                       f"{block.source_file}:{block.source_line}")
    return value


def _split_list(value: str) -> tuple[str, ...]:
    return tuple(x.strip() for x in value.split(",") if x.strip())


def _as_float(block: ObjectBlock, attr: str, value: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise BadAttributeValue(block.kind, attr, value, "not a number") from None


def _as_int(block: ObjectBlock, attr: str, value: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise BadAttributeValue(block.kind, attr, value, "not an integer") from None


def _as_bool(block: ObjectBlock, attr: str, value: str) -> bool:
    lowered = value.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise BadAttributeValue(block.kind, attr, value, "not a boolean")


def _positive(block: ObjectBlock, attr: str, value: float) -> float:
    if value <= 0:
        raise BadAttributeValue(block.kind, attr, str(value), "must be > 0")
    return value


def link_and_validate(blocks: list[ObjectBlock]) -> Model:
    """Resolve references, apply defaults, and verify every invariant.

    Raises DanglingReference, ParentCycle, MissingRequiredAttribute,
    DuplicateDefinition, UnknownAttribute, BadAttributeValue.
    """
    model = Model()

    for block in blocks:
        known = _KNOWN_ATTRS[block.kind]
        for name in block.attributes:
            if name not in known:
                raise UnknownAttribute(block.kind, name, block.source_file,
                                       block.source_line)

    vo_names: list[str] = []
    for block in blocks:
        if block.kind == "vo":
            name = _require(block, "vo_name")
            if name in vo_names:
                raise DuplicateDefinition("vo", name)
            vo_names.append(name)
    model.vos = tuple(vo_names)

    for block in blocks:
        if block.kind == "command":
            name = _require(block, "command_name")
            if name in model.commands:
                raise DuplicateDefinition("command", name)
            model.commands[name] = CommandDef(name, _require(block, "command_line"))

    for block in blocks:
        if block.kind == "contact":
            name = _require(block, "contact_name")
            if name in model.contacts:
                raise DuplicateDefinition("contact", name)
            notify_command = block.attributes.get("notify_command", "").strip() or None
            enabled = True
            if "enabled" in block.attributes:
                enabled = _as_bool(block, "enabled", block.attributes["enabled"])
            model.contacts[name] = ContactDef(name, notify_command, enabled)

    for block in blocks:
        if block.kind == "contactgroup":
            name = _require(block, "contactgroup_name")
            if name in model.contact_groups:
                raise DuplicateDefinition("contactgroup", name)
            members = _split_list(block.attributes.get("members", ""))
            for m in members:
                if m not in model.contacts:
                    raise DanglingReference("contact", m, f"contactgroup {name}")
            model.contact_groups[name] = ContactGroupDef(name, members)

    for block in blocks:
        if block.kind == "site":
            name = _require(block, "site_name")
            if name in model.sites:
                raise DuplicateDefinition("site", name)
            lat = _as_float(block, "latitude", _require(block, "latitude"))
            lon = _as_float(block, "longitude", _require(block, "longitude"))
            if not -90.0 <= lat <= 90.0:
                raise BadAttributeValue("site", "latitude", str(lat), "outside [-90, 90]")
            if not -180.0 <= lon <= 180.0:
                raise BadAttributeValue("site", "longitude", str(lon), "outside [-180, 180]")
            vos = _split_list(block.attributes.get("vos", ""))
            for v in vos:
                if v not in model.vos:
                    raise DanglingReference("vo", v, f"site {name}")
            model.sites[name] = SiteDef(name, lat, lon, vos)

    def check_command_ref(ref: CommandRef, where: str) -> None:
        if ref.name not in model.commands and ref.name not in BUILTIN_COMMANDS:
            raise DanglingReference("command", ref.name, where)

    for block in blocks:
        if block.kind == "host":
            name = _require(block, "host_name")
            if name in model.hosts:
                raise DuplicateDefinition("host", name)
            ref = CommandRef.parse(_require(block, "check_command"))
            check_command_ref(ref, f"host {name}")
            site = _require(block, "site")
            if site not in model.sites:
                raise DanglingReference("site", site, f"host {name}")
            interval = DEFAULT_CHECK_INTERVAL_S
            if "check_interval" in block.attributes:
                interval = _positive(block, "check_interval",
                                     _as_float(block, "check_interval",
                                               block.attributes["check_interval"]))
            attempts = DEFAULT_MAX_ATTEMPTS
            if "max_attempts" in block.attributes:
                attempts = _as_int(block, "max_attempts", block.attributes["max_attempts"])
                if attempts < 1:
                    raise BadAttributeValue("host", "max_attempts", str(attempts), "must be >= 1")
            notify = True
            if "notify" in block.attributes:
                notify = _as_bool(block, "notify", block.attributes["notify"])
            model.hosts[name] = HostDef(
                host_name=name,
                address=_require(block, "address"),
                site=site,
                check_command=ref,
                parents=_split_list(block.attributes.get("parents", "")),
                check_interval_s=interval,
                max_attempts=attempts,
                notify=notify,
            )

    for host in model.hosts.values():
        for p in host.parents:
            if p not in model.hosts:
                raise DanglingReference("host", p, f"host {host.host_name} parents")
    parent_map = {h.host_name: h.parents for h in model.hosts.values()}
    cycle = find_cycle(parent_map)
    if cycle is not None:
        raise ParentCycle(cycle)
    model.topology = TopologyGraph(parent_map)

    for block in blocks:
        if block.kind == "service":
            host_name = _require(block, "host_name")
            if host_name not in model.hosts:
                raise DanglingReference("host", host_name, "service definition")
            desc = _require(block, "service_description")
            key = (host_name, desc)
            if key in model.services:
                raise DuplicateDefinition("service", f"{host_name}/{desc}")
            ref = CommandRef.parse(_require(block, "check_command"))
            check_command_ref(ref, f"service {host_name}/{desc}")
            check_interval = DEFAULT_CHECK_INTERVAL_S
            if "check_interval" in block.attributes:
                check_interval = _positive(block, "check_interval",
                                           _as_float(block, "check_interval",
                                                     block.attributes["check_interval"]))
            retry_interval = min(DEFAULT_RETRY_INTERVAL_S, check_interval)
            if "retry_interval" in block.attributes:
                retry_interval = _positive(block, "retry_interval",
                                           _as_float(block, "retry_interval",
                                                     block.attributes["retry_interval"]))
            if retry_interval > check_interval:
                raise BadAttributeValue("service", "retry_interval", str(retry_interval),
                                        "must be <= check_interval")
            attempts = DEFAULT_MAX_ATTEMPTS
            if "max_attempts" in block.attributes:
                attempts = _as_int(block, "max_attempts", block.attributes["max_attempts"])
                if attempts < 1:
                    raise BadAttributeValue("service", "max_attempts", str(attempts),
                                            "must be >= 1")
            groups = _split_list(block.attributes.get("contact_groups", ""))
            for g in groups:
                if g not in model.contact_groups:
                    raise DanglingReference("contactgroup", g, f"service {host_name}/{desc}")
            vos = _split_list(block.attributes.get("vos", ""))
            for v in vos:
                if v not in model.vos:
                    raise DanglingReference("vo", v, f"service {host_name}/{desc}")
            kind_text = block.attributes.get("metric_kind", "other").strip() or "other"
            try:
                metric_kind = MetricKind(kind_text)
            except ValueError:
                raise BadAttributeValue("service", "metric_kind", kind_text,
                                        "not a known metric kind") from None
            model.services[key] = ServiceDef(
                host_name=host_name,
                description=desc,
                check_command=ref,
                check_interval_s=check_interval,
                retry_interval_s=retry_interval,
                max_attempts=attempts,
                contact_groups=groups,
                vos=vos,
                metric_kind=metric_kind,
            )

    for block in blocks:
        if block.kind == "escalation":
            host_pattern = _require(block, "host_name")
            if host_pattern != "*" and host_pattern not in model.hosts:
                raise DanglingReference("host", host_pattern, "escalation")
            service_pattern = block.attributes.get("service_description", "").strip() or None
            first = _as_int(block, "first_notification",
                            _require(block, "first_notification"))
            if first < 1:
                raise BadAttributeValue("escalation", "first_notification", str(first),
                                        "must be >= 1")
            last = 0
            if "last_notification" in block.attributes:
                last = _as_int(block, "last_notification",
                               block.attributes["last_notification"])
            if last != 0 and last < first:
                raise BadAttributeValue("escalation", "last_notification", str(last),
                                        "must be 0 or >= first_notification")
            groups = _split_list(_require(block, "contact_groups"))
            for g in groups:
                if g not in model.contact_groups:
                    raise DanglingReference("contactgroup", g, "escalation")
            interval = None
            if "notification_interval" in block.attributes:
                interval = _positive(block, "notification_interval",
                                     _as_float(block, "notification_interval",
                                               block.attributes["notification_interval"]))
            model.escalations.append(EscalationDef(
                host_pattern=host_pattern,
                service_pattern=service_pattern,
                first_notification=first,
                last_notification=last,
                contact_groups=groups,
                notification_interval_s=interval,
            ))

    return model


def load_model(paths: Iterable[str | Path]) -> Model:
    return link_and_validate(parse_files(paths))
