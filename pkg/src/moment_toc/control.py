"""Stair-step controls and their exact closed-form simulation.

Along a segment with control level e in {+1, 0, -1} and x1(t) = z + e*t the
increment of x_j over a duration tau is the polynomial

    sum_i binom(j-1, i) z**(j-1-i) e**i tau**(i+1) / (i+1),

so trajectories are propagated without any integration error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

DROP_DURATION = 1e-12
BALANCE_TOL = 1e-9


@dataclass(frozen=True)
class ControlSegment:
    level: int
    duration: float

    def __post_init__(self):
        if self.level not in (-1, 0, 1):
            raise ValueError(f"control level must be -1, 0 or +1, got {self.level}")
        if not self.duration > 0:
            raise ValueError(f"segment duration must be positive, got {self.duration}")


@dataclass(frozen=True)
class StairStepControl:
    segments: tuple[ControlSegment, ...]

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple[int, float]]) -> "StairStepControl":
        """Build from ``(level, duration)`` pairs, dropping negligible pieces
        and fusing equal neighbours."""
        segs: list[ControlSegment] = []
        for level, dur in pairs:
            if dur <= DROP_DURATION:
                continue
            if segs and segs[-1].level == level:
                segs[-1] = ControlSegment(level, segs[-1].duration + dur)
            else:
                segs.append(ControlSegment(int(level), float(dur)))
        return cls(tuple(segs))

    @property
    def total_time(self) -> float:
        return math.fsum(s.duration for s in self.segments)

    def negated(self) -> "StairStepControl":
        return StairStepControl(tuple(ControlSegment(-s.level, s.duration) for s in self.segments))

    def breakpoints(self) -> list[float]:
        out = [0.0]
        acc: list[float] = []
        for s in self.segments:
            acc.append(s.duration)
            out.append(math.fsum(acc))
        return out

    def level_at(self, t: float) -> int:
        """Level of the segment active at ``t`` (the last one at the end)."""
        if not self.segments:
            return 0
        bps = self.breakpoints()
        for i, s in enumerate(self.segments):
            if t < bps[i + 1]:
                return s.level
        return self.segments[-1].level

    def to_list(self) -> list[dict]:
        return [{"level": s.level, "duration": s.duration} for s in self.segments]

    @classmethod
    def from_list(cls, items: Sequence[dict]) -> "StairStepControl":
        return cls(tuple(ControlSegment(int(d["level"]), float(d["duration"])) for d in items))

    def conforms(self) -> bool:
        """Shape check: optional leading +1, then blocks of (0?, -1), then an
        optional 0 that must be followed by a closing +1."""
        levels = [s.level for s in self.segments]
        i = 0
        if levels[:1] == [1]:
            i = 1
        seen_down = False
        while i < len(levels):
            if levels[i] == 0 and i + 1 < len(levels) and levels[i + 1] == -1:
                i += 2
                seen_down = True
            elif levels[i] == -1:
                i += 1
                seen_down = True
            else:
                break
        if not seen_down:
            return False
        rest = levels[i:]
        return rest in ([], [1], [0, 1])


def synthesize_control(
    x1: float,
    a: float,
    b: float,
    interior_nodes: Sequence[float],
    weight_at_b: float = 0.0,
    interior_weights: Sequence[float] = (),
    weight_at_a: float = 0.0,
) -> StairStepControl:
    """Stair-step control realising an atomic solution of the moment problem.

    x1 rises from its initial value to ``b``, dwells ``weight_at_b``, then
    descends through the interior nodes dwelling at each for its weight,
    dwells ``weight_at_a`` at ``a`` and finally rises to the origin.
    """
    if len(interior_nodes) != len(interior_weights):
        raise ValueError("interior nodes and weights differ in length")
    levels = [b, *interior_nodes, a]
    drops = [levels[s] - levels[s + 1] for s in range(len(levels) - 1)]
    if any(not d > 0 for d in drops):
        raise ValueError("descending durations must be positive")
    rise_first, rise_last = b - x1, -a
    if rise_first < -BALANCE_TOL or rise_last < -BALANCE_TOL:
        raise ValueError("endpoints must satisfy a <= 0 and b >= x1")
    balance = x1 + rise_first + rise_last - math.fsum(drops)
    if abs(balance) > BALANCE_TOL * max(1.0, abs(b), abs(a)):
        raise ValueError(f"duration balance violated by {balance:.3e}")
    pairs: list[tuple[int, float]] = [(1, rise_first), (0, weight_at_b)]
    for s, drop in enumerate(drops):
        pairs.append((-1, drop))
        if s < len(interior_weights):
            pairs.append((0, interior_weights[s]))
    pairs += [(0, weight_at_a), (1, rise_last)]
    return StairStepControl.from_pairs(pairs)


def _increments(z: float, level: int, tau: float, n: int) -> list[float]:
    """Exact increments of x1..xn over one segment starting at x1 = z."""
    out = [level * tau]
    for j in range(2, n + 1):
        if level == 0:
            out.append(z ** (j - 1) * tau)
            continue
        # Horner in tau over the binomial expansion of (z + level*t)**(j-1)
        acc = 0.0
        for i in range(j - 1, -1, -1):
            coef = math.comb(j - 1, i) * z ** (j - 1 - i) * level**i / (i + 1)
            acc = acc * tau + coef
        out.append(acc * tau)
    return out


@dataclass
class Trajectory:
    breakpoints: list[float]
    states: list[tuple[float, ...]]
    samples: list[tuple[float, tuple[float, ...], int]] = field(default_factory=list)


def simulate_exact(x0: Sequence[float], u: StairStepControl) -> tuple[tuple[float, ...], Trajectory]:
    """Propagate segment by segment with compensated accumulation."""
    n = len(x0)
    parts: list[list[float]] = [[float(v)] for v in x0]
    states = [tuple(float(v) for v in x0)]
    z = float(x0[0])
    for seg in u.segments:
        inc = _increments(z, seg.level, seg.duration, n)
        for j in range(n):
            parts[j].append(inc[j])
        z = math.fsum(parts[0])
        states.append(tuple(math.fsum(p) for p in parts))
    return states[-1], Trajectory(u.breakpoints(), states)


def state_at(x0: Sequence[float], u: StairStepControl, t: float) -> tuple[float, ...]:
    n = len(x0)
    parts: list[list[float]] = [[float(v)] for v in x0]
    z = float(x0[0])
    start: list[float] = []
    for seg in u.segments:
        t0 = math.fsum(start)
        if t <= t0:
            break
        tau = min(seg.duration, t - t0)
        inc = _increments(z, seg.level, tau, n)
        for j in range(n):
            parts[j].append(inc[j])
        z = math.fsum(parts[0])
        start.append(seg.duration)
    return tuple(math.fsum(p) for p in parts)


def sample_trajectory(x0: Sequence[float], u: StairStepControl, m: int) -> Trajectory:
    """Exact states at ``m`` uniform times from 0 to the total time."""
    if m < 2:
        raise ValueError("need at least two samples")
    final, traj = simulate_exact(x0, u)
    total = u.total_time
    samples = []
    for i in range(m):
        t = (total * i) / (m - 1)
        x = final if i == m - 1 else state_at(x0, u, t)
        samples.append((t, x, u.level_at(t)))
    traj.samples = samples
    return traj
