"""Real-time pacing for interactive (bridge-driven) runs.

The loop sleeps most of each period and spins the last millisecond on the
monotonic clock, which keeps period jitter well under a millisecond even with
WebSocket traffic in the background thread. Headless runs skip pacing
entirely.
"""

from __future__ import annotations

import sys
import time
from typing import Callable

SPIN_WINDOW = 0.0012  # s busy-waited at the end of each period


class PacedLoop:
    def __init__(self, dt: float):
        self.dt = dt
        self.period_log: list[float] = []
        self._last: float | None = None
        self._next: float | None = None
        self._old_switch = None

    def __enter__(self) -> "PacedLoop":
        # Short GIL slices keep the bridge thread from delaying loop wakeups.
        self._old_switch = sys.getswitchinterval()
        sys.setswitchinterval(0.0002)
        self._next = time.monotonic() + self.dt
        return self

    def __exit__(self, *exc) -> None:
        if self._old_switch is not None:
            sys.setswitchinterval(self._old_switch)

    def wait(self) -> None:
        """Block until the next period boundary; records achieved periods."""
        target = self._next
        while True:
            now = time.monotonic()
            remaining = target - now
            if remaining <= 0.0:
                break
            if remaining > SPIN_WINDOW:
                time.sleep(remaining - SPIN_WINDOW)
            # else: spin
        now = time.monotonic()
        if self._last is not None:
            self.period_log.append(now - self._last)
        self._last = now
        # Fixed cadence; if we overran badly, rebase instead of bursting.
        self._next = target + self.dt
        if self._next < now - self.dt:
            self._next = now + self.dt


def run_paced(dt: float, tick: Callable[[], bool],
              publish: Callable[[], None] | None = None,
              should_stop: Callable[[], bool] | None = None) -> list[float]:
    """Run tick() at a fixed period until it returns False or should_stop()."""
    with PacedLoop(dt) as loop:
        while True:
            if should_stop is not None and should_stop():
                break
            if not tick():
                break
            if publish is not None:
                publish()
            loop.wait()
        return loop.period_log
