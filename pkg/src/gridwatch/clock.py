"""Injectable time sources.

Every timestamp in the daemon flows through a Clock so that tests and the
testbed simulator can run virtual hours in wall-clock seconds.
"""

from __future__ import annotations

import time


class Clock:
    """Virtual time in seconds (epoch-like float)."""

    def now(self) -> float:
        raise NotImplementedError

    def sleep(self, seconds: float) -> None:
        """Block for `seconds` of virtual time."""
        raise NotImplementedError


class WallClock(Clock):
    """Real time, optionally accelerated: one wall second = `speed` virtual seconds."""

    def __init__(self, speed: float = 1.0, origin: float | None = None):
        if speed <= 0:
            raise ValueError("speed must be positive")
        self.speed = speed
        self.origin = time.time() if origin is None else origin
        self._wall0 = time.monotonic()

    def now(self) -> float:
        return self.origin + (time.monotonic() - self._wall0) * self.speed

    def sleep(self, seconds: float) -> None:
        if seconds > 0:
            time.sleep(seconds / self.speed)


class ManualClock(Clock):
    """Test clock; time moves only when told to."""

    def __init__(self, start: float = 0.0):
        self._t = float(start)

    def now(self) -> float:
        return self._t

    def sleep(self, seconds: float) -> None:
        if seconds > 0:
            self._t += seconds

    def advance(self, seconds: float) -> None:
        if seconds < 0:
            raise ValueError("cannot move backwards")
        self._t += seconds

    def set(self, t: float) -> None:
        if t < self._t:
            raise ValueError("cannot move backwards")
        self._t = float(t)
