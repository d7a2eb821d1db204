"""Drive cycles: container, CSV round-trip, synthetic generation, gear rule.

A cycle is a 1 Hz speed trace.  Interval k spans [k, k+1) seconds and
carries the midpoint speed (v[k] + v[k+1]) / 2 and the accel
v[k+1] - v[k]; every consumer (transcription, DP, forward simulator)
uses the same convention so the methods stay comparable.

The synthetic generator is phase-based (stop, accel with tapering
push, cruise, decel) and fully determined by its seed.  Accelerations
stay within [-1.8, 1.4] m/s^2 so the eco-driving case remains feasible
inside its control box; speeds stay below 25 m/s and every 10 minutes
contains at least three complete stops.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .models import ConfigError, PowertrainParams

ACCEL_MAX = 1.4  # m/s^2, generator push ceiling
DECEL_MAX = 1.8  # m/s^2, generator braking ceiling
SPEED_MAX = 25.0  # m/s

# speed thresholds (m/s) above which the next gear becomes the rule choice
GEAR_UP_SPEEDS = np.array([3.0, 6.0, 9.5, 13.5, 18.0])


@dataclass
class DriveCycle:
    """1 Hz reference speed trace; dt is fixed at one second."""

    v: np.ndarray  # node speeds, length N+1
    dt: float = 1.0

    def __post_init__(self):
        self.v = np.asarray(self.v, dtype=float)
        if self.v.ndim != 1 or self.v.size < 2:
            raise ConfigError("cycle needs at least two 1 Hz samples")
        if np.any(self.v < 0):
            raise ConfigError("cycle speeds must be non-negative")
        if self.dt != 1.0:
            raise ConfigError("cycles are defined on a 1 Hz grid")

    @property
    def n_intervals(self) -> int:
        return self.v.size - 1

    @property
    def duration(self) -> float:
        return self.n_intervals * self.dt

    @property
    def t(self) -> np.ndarray:
        return np.arange(self.v.size) * self.dt

    def interval_speed(self) -> np.ndarray:
        return 0.5 * (self.v[:-1] + self.v[1:])

    def interval_accel(self) -> np.ndarray:
        return np.diff(self.v) / self.dt

    def distance(self) -> float:
        # trapezoid; exact for the piecewise-linear speed trace
        return float(np.sum(self.interval_speed()) * self.dt)

    def stop_count(self) -> int:
        """Complete stops: transitions from motion to standstill."""
        at_rest = self.v == 0.0
        return int(np.sum(at_rest[1:] & ~at_rest[:-1]))

    # ---- CSV ---------------------------------------------------------
    def save_csv(self, path):
        lines = ["t_s,v_mps"]
        for t, v in zip(self.t, self.v):
            lines.append(f"{t:.1f},{v:.4f}")
        with open(path, "w", newline="\n") as f:
            f.write("\n".join(lines) + "\n")

    @classmethod
    def load_csv(cls, path) -> "DriveCycle":
        try:
            with open(path) as f:
                header = f.readline().strip()
                if header != "t_s,v_mps":
                    raise ConfigError(f"bad cycle header {header!r}, want 't_s,v_mps'")
                rows = [line.strip().split(",") for line in f if line.strip()]
        except FileNotFoundError:
            raise ConfigError(f"cycle file not found: {path}")
        try:
            t = np.array([float(r[0]) for r in rows])
            v = np.array([float(r[1]) for r in rows])
        except (ValueError, IndexError):
            raise ConfigError(f"malformed cycle file: {path}")
        if t.size < 2 or not np.allclose(np.diff(t), 1.0, atol=1e-9):
            raise ConfigError("cycle samples must be uniform at 1 Hz")
        return cls(v)


def generate_cycle(seed: int, duration_s: float) -> DriveCycle:
    """Deterministic synthetic urban/arterial cycle."""
    if duration_s < 60:
        raise ConfigError("cycle duration must be at least 60 s")
    n = int(round(duration_s))
    rng = np.random.default_rng(seed)
    v = [0.0]

    def push(val):
        v.append(float(np.clip(val, 0.0, SPEED_MAX)))

    while len(v) < n + 1:
        # stop dwell
        for _ in range(rng.integers(4, 12)):
            push(0.0)
        # accelerate with push tapering toward high speed
        target = rng.uniform(7.0, 23.0)
        a_pk = rng.uniform(0.8, ACCEL_MAX)
        while v[-1] < target - 0.25 and len(v) < n + 1:
            a = min(a_pk * (1.0 - v[-1] / 27.0), target - v[-1])
            push(v[-1] + max(a, 0.15))
        # cruise
        for _ in range(rng.integers(8, 35)):
            push(v[-1])
        # brake to rest
        d_pk = rng.uniform(1.0, DECEL_MAX)
        while v[-1] > 0.0:
            push(max(v[-1] - d_pk, 0.0))

    arr = np.array(v[: n + 1])
    # force a feasible ramp-down to rest at the end
    arr[-1] = 0.0
    for i in range(n - 1, -1, -1):
        arr[i] = min(arr[i], arr[i + 1] + DECEL_MAX)
    return DriveCycle(arr)


def rule_gear_profile(cycle: DriveCycle, pt: PowertrainParams, t_dwell_s: float = 3.0) -> np.ndarray:
    """Speed-threshold gear schedule with dwell-respecting anticipation.

    Upshifts look three intervals ahead so a freshly selected gear stays
    inside shaft-speed limits for the whole hold window; decelerations
    coast in the current gear (braking is lug-exempt) and the gear drops
    to first at standstill.
    """
    v_mid = cycle.interval_speed()
    a = cycle.interval_accel()
    n = cycle.n_intervals
    hold = int(np.floor(t_dwell_s / cycle.dt))
    rule = 1 + np.searchsorted(GEAR_UP_SPEEDS, v_mid, side="right")

    gears = np.empty(n, dtype=int)
    current = 1
    since_shift = hold  # free to shift at the start
    for k in range(n):
        target = current
        if v_mid[k] < 0.5:
            target = 1
        elif a[k] < -0.3:
            target = current  # coast down in gear
        else:
            look = min(k + 3, n - 1)
            target = int(np.max(rule[k : look + 1]))
        if target != current and since_shift >= hold:
            current = target
            since_shift = 0
        else:
            since_shift += 1
        gears[k] = current
    return gears
