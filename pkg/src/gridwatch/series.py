"""Round-robin metric history.

Samples land in fixed-step primary buckets (the interval ending at
ceil(t/step)*step); completed buckets are consolidated into one or more
circular archives of AVERAGE/MIN/MAX rows.  Memory is constant in the
number of updates.  Unknown buckets are explicit gaps (NaN), never zeros.
"""

from __future__ import annotations

import enum
import math
import struct
from array import array
from dataclasses import dataclass
from pathlib import Path
from urllib.parse import quote

MAGIC = b"GWTS"
FORMAT_VERSION = 1

OUT_OF_ORDER = "out-of-order"


class Consolidation(enum.Enum):
    AVERAGE = 0
    MIN = 1
    MAX = 2


@dataclass(frozen=True)
class ArchiveSpec:
    consolidation: Consolidation
    steps_per_row: int
    rows: int

    def __post_init__(self) -> None:
        if self.steps_per_row < 1:
            raise InvalidSpec("steps_per_row must be >= 1")
        if self.rows < 1:
            raise InvalidSpec("rows must be >= 1")


class InvalidSpec(ValueError):
    pass


class EmptyWindow(ValueError):
    pass


class BadMagic(ValueError):
    pass


class VersionMismatch(ValueError):
    pass


class TruncatedFile(ValueError):
    pass


class _Archive:
    def __init__(self, spec: ArchiveSpec):
        self.spec = spec
        self.values = array("d", [math.nan]) * spec.rows
        self.cursor = 0
        # accumulator over the current consolidation group (volatile)
        self._count = 0
        self._sum = 0.0
        self._min = math.inf
        self._max = -math.inf

    def feed(self, bucket_index: int, value: float | None) -> None:
        """Add one completed primary bucket; flush a row at group boundaries.

        Bucket numbering starts at 1 (the interval ending at step seconds),
        so a group closes exactly when bucket_index is a multiple of
        steps_per_row.
        """
        if value is not None:
            self._count += 1
            self._sum += value
            self._min = min(self._min, value)
            self._max = max(self._max, value)
        if bucket_index % self.spec.steps_per_row == 0:
            self._flush()

    def _flush(self) -> None:
        if self._count == 0:
            row = math.nan
        elif self.spec.consolidation is Consolidation.AVERAGE:
            row = self._sum / self._count
        elif self.spec.consolidation is Consolidation.MIN:
            row = self._min
        else:
            row = self._max
        self.values[self.cursor] = row
        self.cursor = (self.cursor + 1) % self.spec.rows
        self._count = 0
        self._sum = 0.0
        self._min = math.inf
        self._max = -math.inf


def _bucket_index(t: float, step: float) -> int:
    """Index of the primary interval ((e-1)*step, e*step] containing t."""
    return math.ceil(t / step)


class SeriesDB:
    """One metric's multi-resolution history (one file per metric)."""

    def __init__(self, step_s: float, specs: list[ArchiveSpec] | tuple[ArchiveSpec, ...]):
        if step_s < 1:
            raise InvalidSpec("step must be >= 1 second")
        if not specs:
            raise InvalidSpec("at least one archive is required")
        self.step_s = float(step_s)
        self.origin_t: float | None = None
        self.last_t: float | None = None
        self.archives = [_Archive(s) for s in specs]
        self._open_e: int | None = None  # volatile current-bucket accumulator
        self._open_sum = 0.0
        self._open_count = 0

    # -- update path -----------------------------------------------------

    @property
    def _last_completed_e(self) -> int | None:
        if self.last_t is None:
            return None
        return math.floor(self.last_t / self.step_s)

    def _complete(self, e: int, value: float | None) -> None:
        for archive in self.archives:
            archive.feed(e, value)

    def _close_open_bucket(self) -> None:
        if self._open_e is not None:
            self._complete(self._open_e, self._open_sum / self._open_count)
            self._open_e = None
            self._open_sum = 0.0
            self._open_count = 0

    def update(self, t: float, value: float) -> str | None:
        """Accept one sample; returns None or a rejection reason.

        Samples may share a bucket (they average); samples for buckets that
        already completed are rejected as out-of-order.  Skipped buckets in
        between are filled with gap markers.
        """
        e = _bucket_index(t, self.step_s)
        lce = self._last_completed_e
        if lce is not None and e <= lce:
            return OUT_OF_ORDER
        if self._open_e is not None and e < self._open_e:
            return OUT_OF_ORDER
        if self.origin_t is None:
            self.origin_t = t
        if self._open_e is not None and e > self._open_e:
            open_e = self._open_e
            self._close_open_bucket()
            for gap_e in range(open_e + 1, e):
                self._complete(gap_e, None)
        elif self._open_e is None and lce is not None:
            for gap_e in range(lce + 1, e):
                self._complete(gap_e, None)
        if self._open_e is None:
            self._open_e = e
        self._open_sum += value
        self._open_count += 1
        self.last_t = max(self.last_t, t) if self.last_t is not None else t
        if t == e * self.step_s:
            # a sample exactly on the boundary closes its interval
            self._close_open_bucket()
        return None

    # -- fetch path --------------------------------------------------------

    def _first_e(self) -> int | None:
        if self.origin_t is None:
            return None
        return _bucket_index(self.origin_t, self.step_s)

    def _group_range(self, archive: _Archive) -> tuple[int, int] | None:
        """(oldest, newest) consolidated group indexes retained, or None."""
        lce = self._last_completed_e
        first_e = self._first_e()
        if lce is None or first_e is None:
            return None
        k = archive.spec.steps_per_row
        g_new = lce // k - 1
        g_first = (first_e - 1) // k
        if g_new < g_first:
            return None
        g_old = max(g_first, g_new - archive.spec.rows + 1)
        return g_old, g_new

    def _row_value(self, archive: _Archive, g: int) -> float:
        first_e = self._first_e()
        assert first_e is not None
        k = archive.spec.steps_per_row
        g_first = (first_e - 1) // k
        position = (g - g_first) % archive.spec.rows
        return archive.values[position]

    def archive_rows(self, index: int) -> list[tuple[float, float | None]]:
        """All retained rows of one archive, oldest first, as
        (row_end_time, value-or-None)."""
        archive = self.archives[index]
        rng = self._group_range(archive)
        if rng is None:
            return []
        g_old, g_new = rng
        span = archive.spec.steps_per_row * self.step_s
        return [((g + 1) * span, None if math.isnan(v) else v)
                for g in range(g_old, g_new + 1)
                for v in [self._row_value(archive, g)]]

    def fetch(
        self,
        start_t: float,
        end_t: float,
        want_resolution_s: float | None = None,
    ) -> list[tuple[float, float | None]]:
        """Rows intersecting [start_t, end_t) from the finest archive that
        covers the window (coarser than want_resolution_s when given);
        timestamps are row-end times and gaps come back as None.
        """
        if start_t >= end_t:
            raise EmptyWindow("start must precede end")
        candidates: list[tuple[float, _Archive, tuple[int, int]]] = []
        for archive in self.archives:
            span = archive.spec.steps_per_row * self.step_s
            if want_resolution_s is not None and span < want_resolution_s:
                continue
            rng = self._group_range(archive)
            if rng is None:
                continue
            candidates.append((span, archive, rng))
        candidates.sort(key=lambda c: c[0])

        chosen: tuple[float, _Archive, tuple[int, int]] | None = None
        for span, archive, (g_old, g_new) in candidates:
            if g_old * archive.spec.steps_per_row * self.step_s <= start_t:
                chosen = (span, archive, (g_old, g_new))
                break
        if chosen is None:
            # no full coverage; fall back to the coarsest overlapping archive
            for span, archive, (g_old, g_new) in reversed(candidates):
                covered_start = g_old * span
                covered_end = (g_new + 1) * span
                if covered_start < end_t and covered_end > start_t:
                    chosen = (span, archive, (g_old, g_new))
                    break
        if chosen is None:
            raise EmptyWindow("no archive overlaps the requested window")

        span, archive, (g_old, g_new) = chosen
        points: list[tuple[float, float | None]] = []
        for g in range(g_old, g_new + 1):
            row_start = g * span
            row_end = (g + 1) * span
            if row_start >= end_t or row_end <= start_t:
                continue
            value = self._row_value(archive, g)
            points.append((row_end, None if math.isnan(value) else value))
        if not points:
            raise EmptyWindow("no rows in the requested window")
        return points

    # -- persistence -------------------------------------------------------

    def save(self, path: str | Path) -> None:
        """Write the persisted portion of the DB (volatile accumulators for
        the open bucket and partial consolidation groups are not stored)."""
        out = bytearray()
        out += MAGIC
        out += struct.pack("<H", FORMAT_VERSION)
        out += struct.pack(
            "<dddI",
            self.step_s,
            math.nan if self.origin_t is None else self.origin_t,
            math.nan if self.last_t is None else self.last_t,
            len(self.archives),
        )
        for archive in self.archives:
            out += struct.pack("<BIII", archive.spec.consolidation.value,
                               archive.spec.steps_per_row, archive.spec.rows,
                               archive.cursor)
            out += struct.pack(f"<{archive.spec.rows}d", *archive.values)
        tmp = Path(str(path) + ".tmp")
        tmp.write_bytes(bytes(out))
        tmp.replace(path)

    @classmethod
    def load(cls, path: str | Path) -> "SeriesDB":
        data = Path(path).read_bytes()
        view = memoryview(data)
        offset = 0

        def take(n: int) -> memoryview:
            nonlocal offset
            if offset + n > len(view):
                raise TruncatedFile(f"{path}: expected {offset + n} bytes, have {len(view)}")
            chunk = view[offset:offset + n]
            offset += n
            return chunk

        if bytes(take(4)) != MAGIC:
            raise BadMagic(f"{path}: not a GWTS file")
        (version,) = struct.unpack("<H", take(2))
        if version != FORMAT_VERSION:
            raise VersionMismatch(f"{path}: format version {version}")
        step, origin, last, count = struct.unpack("<dddI", take(28))
        specs: list[ArchiveSpec] = []
        cursors: list[int] = []
        rows_data: list[array] = []
        for _ in range(count):
            cons, steps_per_row, rows, cursor = struct.unpack("<BIII", take(13))
            try:
                consolidation = Consolidation(cons)
            except ValueError:
                raise TruncatedFile(f"{path}: bad consolidation byte {cons}") from None
            specs.append(ArchiveSpec(consolidation, steps_per_row, rows))
            cursors.append(cursor)
            values = array("d")
            values.frombytes(bytes(take(rows * 8)))
            rows_data.append(values)
        if offset != len(view):
            raise TruncatedFile(f"{path}: {len(view) - offset} trailing bytes")
        db = cls(step, specs)
        db.origin_t = None if math.isnan(origin) else origin
        db.last_t = None if math.isnan(last) else last
        for archive, cursor, values in zip(db.archives, cursors, rows_data):
            archive.cursor = cursor % archive.spec.rows
            archive.values = values
        return db

    def content_equal(self, other: "SeriesDB") -> bool:
        """Equality over the persisted state (NaN gaps compare equal)."""
        if (self.step_s, self.origin_t, self.last_t) != (other.step_s, other.origin_t,
                                                         other.last_t):
            return False
        if len(self.archives) != len(other.archives):
            return False
        for a, b in zip(self.archives, other.archives):
            if a.spec != b.spec or a.cursor != b.cursor:
                return False
            for x, y in zip(a.values, b.values):
                if math.isnan(x) and math.isnan(y):
                    continue
                if x != y:
                    return False
        return True


DEFAULT_STEP_S = 10.0
# 10s for an hour, 1min for four hours, 5min for a day
DEFAULT_ARCHIVES = (
    ArchiveSpec(Consolidation.AVERAGE, 1, 360),
    ArchiveSpec(Consolidation.AVERAGE, 6, 240),
    ArchiveSpec(Consolidation.AVERAGE, 30, 288),
)


def create(step_s: float, specs: list[ArchiveSpec] | tuple[ArchiveSpec, ...]) -> SeriesDB:
    return SeriesDB(step_s, specs)


class SeriesStore:
    """One SeriesDB per (host, service, perfdata label), backed by a directory."""

    def __init__(
        self,
        directory: str | Path | None = None,
        step_s: float = DEFAULT_STEP_S,
        specs: tuple[ArchiveSpec, ...] = DEFAULT_ARCHIVES,
    ):
        self.directory = Path(directory) if directory is not None else None
        self.step_s = step_s
        self.specs = tuple(specs)
        self._series: dict[tuple[str, str, str], SeriesDB] = {}

    @staticmethod
    def _key_of(host: str, service: str | None, label: str) -> tuple[str, str, str]:
        return (host, service or "", label)

    def _path_of(self, key: tuple[str, str, str]) -> Path:
        assert self.directory is not None
        safe = "__".join(quote(part, safe="") for part in key)
        return self.directory / f"{safe}.gwts"

    def get(self, host: str, service: str | None, label: str) -> SeriesDB | None:
        key = self._key_of(host, service, label)
        db = self._series.get(key)
        if db is None and self.directory is not None:
            path = self._path_of(key)
            if path.exists():
                db = SeriesDB.load(path)
                self._series[key] = db
        return db

    def record(self, host: str, service: str | None, label: str,
               t: float, value: float) -> str | None:
        key = self._key_of(host, service, label)
        db = self.get(host, service, label)
        if db is None:
            db = SeriesDB(self.step_s, self.specs)
            self._series[key] = db
        return db.update(t, value)

    def labels(self, host: str, service: str | None) -> list[str]:
        prefix = (host, service or "")
        return sorted(label for (h, s, label) in self._series if (h, s) == prefix)

    def save_all(self) -> None:
        if self.directory is None:
            return
        self.directory.mkdir(parents=True, exist_ok=True)
        for key, db in self._series.items():
            db.save(self._path_of(key))
