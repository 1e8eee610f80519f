"""Independent checks: brute-force minimal time over stair-step families and
randomised moment round trips.

The grid search does not use any Hankel machinery. For every case family it
scans the switching levels (b, interior levels, a) on a grid; the dwell
times at the levels enter the final state linearly and are fitted by a small
non-negative least squares. Feasible points are confirmed by exact
simulation.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .casesolver import CaseDescriptor, enumerate_cases
from .control import StairStepControl, simulate_exact, synthesize_control
from .hausdorff import LemmaType, StepFunction, check_conditions, recover_nodes, recover_weights
from .moments import InitialState


@dataclass(frozen=True)
class GridSpec:
    """Grid of about ``points`` level tuples per case and pass.

    ``span`` bounds how far b may rise above x1 and a may drop below 0
    (default from the state's scale). Each refinement re-grids the region
    where the residual is within ``keep`` times the current tolerance, or
    ``zoom`` cells either side of the smallest residual if there is none.
    """

    points: int = 160_000
    refinements: int = 2
    span: float | None = None
    zoom: float = 4.0
    keep: float = 4.0
    tighten: bool = True

    def __post_init__(self):
        if self.points < 4:
            raise ValueError("grid needs at least 2 steps per parameter")
        if self.span is not None and not self.span > 0:
            raise ValueError("span must be positive")
        if self.refinements < 0:
            raise ValueError("refinements must be non-negative")
        if not self.zoom > 0:
            raise ValueError("zoom must be positive")
        if not self.keep >= 1:
            raise ValueError("keep must be at least 1")

    def steps(self, dim: int) -> int:
        return max(2, int(round(self.points ** (1.0 / max(dim, 1)))))


def default_span(x0: InitialState) -> float:
    """Heuristic level range: 1 + 2 * max_j (j |x_j|)**(1/j)."""
    return 1.0 + 2.0 * max((j * abs(x0[j])) ** (1.0 / j) for j in range(2, x0.n + 1))


@dataclass
class OracleResult:
    theta: float | None
    params: dict | None
    history: list[float | None] = field(default_factory=list)

    @property
    def feasible(self) -> bool:
        return self.theta is not None


def _ramp_integrals(u: np.ndarray, v: np.ndarray, n: int) -> np.ndarray:
    """``int x1**(j-1)`` along a unit-speed ramp from u to v, j = 2..n."""
    slope = np.where(v >= u, 1.0, -1.0)
    return np.stack([(v**j - u**j) / (j * slope) for j in range(2, n + 1)], axis=-1)


def _nnls_batch(mat: np.ndarray, rhs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Non-negative least squares for a batch of tiny systems by active-set
    enumeration; returns weights and max-norm residuals."""
    batch, _, m = mat.shape
    best_w = np.zeros((batch, m))
    best_r = np.max(np.abs(rhs), axis=1)
    for r in range(1, m + 1):
        for cols in itertools.combinations(range(m), r):
            sub = mat[:, :, cols]
            gram = np.einsum("bij,bik->bjk", sub, sub)
            proj = np.einsum("bij,bi->bj", sub, rhs)
            with np.errstate(all="ignore"):
                ok = np.abs(np.linalg.det(gram)) > 1e-300
                w = np.zeros((batch, r))
                w[ok] = np.linalg.solve(gram[ok], proj[ok][..., None])[..., 0]
                res = np.max(np.abs(np.einsum("bij,bj->bi", sub, w) - rhs), axis=1)
            better = ok & np.all(w >= 0, axis=1) & (res < best_r)
            full = np.zeros((int(better.sum()), m))
            full[:, list(cols)] = w[better]
            best_w[better] = full
            best_r[better] = res[better]
    return best_w, best_r


class _Family:
    """Stair-step controls of one case, parametrised by their levels."""

    def __init__(self, x0: InitialState, case: CaseDescriptor):
        self.x0, self.case = x0, case
        self.names = (["b"] if not case.b_fixed else []) + \
            [f"z{s}" for s in range(2, case.k + 1)] + (["a"] if not case.a_fixed else [])

    def levels(self, p: dict):
        b = p["b"] if "b" in p else self.x0.x1
        a = p["a"] if "a" in p else 0.0
        return [b] + [p[f"z{s}"] for s in range(2, self.case.k + 1)] + [a]

    def massed(self, lv: list) -> list:
        typ = self.case.type
        out = [lv[0]] if typ.mass_at_b else []
        out += lv[1:-1]
        if typ.mass_at_a:
            out.append(lv[-1])
        return out

    def evaluate(self, p: dict) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Times, residuals and fitted weights over arrays of levels;
        invalid level orderings get an infinite residual."""
        size = np.broadcast(*[np.asarray(v) for v in p.values()]).shape if p else (1,)
        lv = [np.broadcast_to(np.asarray(v, dtype=float), size).ravel() for v in self.levels(p)]
        x1, n = self.x0.x1, self.x0.n
        valid = np.ones(lv[0].shape, dtype=bool)
        for i in range(len(lv) - 1):
            valid &= lv[i] > lv[i + 1]
        valid &= (lv[0] >= x1) & (lv[-1] <= 0)
        for z in lv[1:-1]:
            valid &= z != 0
        path = [np.full_like(lv[0], x1)] + lv + [np.zeros_like(lv[0])]
        base = np.asarray([self.x0[j] for j in range(2, n + 1)], dtype=float)[None, :]
        for i in range(len(path) - 1):
            base = base + _ramp_integrals(path[i], path[i + 1], n)
        atoms = self.massed(lv)
        if atoms:
            mat = np.stack([np.stack([z ** (j - 1) for z in atoms], axis=-1)
                            for j in range(2, n + 1)], axis=1)
            w, res = _nnls_batch(mat, -base)
        else:
            w, res = np.zeros((len(lv[0]), 0)), np.max(np.abs(base), axis=1)
        time = (lv[0] - x1) + (lv[0] - lv[-1]) - lv[-1] + w.sum(axis=1)
        res = np.where(valid, res, np.inf)
        return time, res, w

    def control(self, p: dict, weights) -> StairStepControl:
        lv = [float(v) for v in self.levels(p)]
        typ = self.case.type
        i = int(typ.mass_at_b)
        w = [float(v) for v in weights]
        return synthesize_control(
            self.x0.x1, lv[-1], lv[0], lv[1:-1],
            weight_at_b=w[0] if typ.mass_at_b else 0.0,
            interior_weights=w[i:i + self.case.k - 1],
            weight_at_a=w[-1] if typ.mass_at_a else 0.0,
        )


def _box(family: _Family, span: float) -> dict[str, tuple[float, float]]:
    x1 = family.x0.x1
    lo = 0.0 if family.case.a_fixed else -span
    hi = x1 if family.case.b_fixed else x1 + span
    box = {}
    for name in family.names:
        if name == "b":
            box[name] = (x1, x1 + span)
        elif name == "a":
            box[name] = (-span, 0.0)
        else:
            box[name] = (lo, hi)
    return box


def _scan(family: _Family, box: dict, steps: int, feas_tol: float, keep_tol: float, zoom: float):
    """Best feasible point (min time, ties by parameters) as
    ``(time, residual, params, weights)`` and the box for the next pass.

    The next box is the bounding box, one cell wider, of the grid points
    with residual at most ``keep_tol``; a true zero between grid points can
    leave its neighbours above ``feas_tol``, so ``keep_tol`` is the larger.
    With no such point it is ``zoom`` cells around the smallest residual.
    """
    names = family.names
    axes = [np.linspace(lo, hi, steps) for lo, hi in (box[n] for n in names)]
    mesh = np.meshgrid(*axes, indexing="ij")
    p = {name: m.ravel() for name, m in zip(names, mesh)}
    time, res, w = family.evaluate(p)
    cells = {n: (box[n][1] - box[n][0]) / (steps - 1) for n in names}

    if not np.isfinite(res).any():
        return None, None
    best = None
    feas = np.flatnonzero(res <= feas_tol)
    if feas.size:
        # lexsort: last key is primary
        order = np.lexsort(tuple(p[k][feas] for k in reversed(names)) + (time[feas],))
        i = int(feas[order[0]])
        best = (float(time[i]), float(res[i]), {k: float(v[i]) for k, v in p.items()}, w[i])
    sel = np.flatnonzero(res <= keep_tol)
    if sel.size == 0:
        i = int(np.argmin(res))
        return best, {n: (p[n][i] - zoom * cells[n], p[n][i] + zoom * cells[n]) for n in names}
    nxt = {n: (float(p[n][sel].min()) - cells[n], float(p[n][sel].max()) + cells[n]) for n in names}
    return best, nxt


def grid_search_min_time(
    x0: InitialState,
    cases: Sequence[CaseDescriptor] | None = None,
    grid: GridSpec | None = None,
) -> OracleResult:
    """Approximate minimal time over the stair-step families of ``cases``.

    Each pass scans a grid box per case, keeps points whose final state is
    within ``feas_tol`` of the origin (confirmed by exact simulation) and
    re-grids the region that meets the next pass's tolerance. The tolerance starts at ``1e-2 * (1 + |x0|_inf)``;
    with ``tighten`` it drops 10x per pass and the returned value is the last
    pass's minimum, otherwise it stays fixed and the incumbent is carried
    over, making ``history`` non-increasing.
    """
    if x0.n > 5:
        raise ValueError("grid oracle is limited to n <= 5")
    grid = grid or GridSpec()
    cases = list(cases) if cases is not None else enumerate_cases(x0.n)
    span = grid.span or default_span(x0)
    feas_tol = 1e-2 * (1 + x0.norm_inf())
    families = [_Family(x0, c) for c in cases]
    boxes = [_box(f, span) for f in families]
    history: list[float | None] = []
    result = OracleResult(None, None, history)
    for _level in range(grid.refinements + 1):
        overall = None
        for i, fam in enumerate(families):
            steps = grid.steps(len(fam.names))
            feas, nxt = _scan(fam, boxes[i], steps, feas_tol, grid.keep * feas_tol, grid.zoom)
            if feas is not None:
                feas = _confirm(fam, feas, feas_tol)
            if feas is not None and (overall is None or feas[0] < overall[0]):
                overall = (feas[0], fam.case.id, feas[2], feas[3])
            if nxt is not None:
                boxes[i] = nxt
        if not grid.tighten and result.feasible and (overall is None or result.theta <= overall[0]):
            # fixed tolerance: keep the earlier incumbent so passes never worsen
            history.append(result.theta)
            continue
        history.append(overall[0] if overall else None)
        if overall:
            params = {"case": overall[1], **overall[2], "weights": [float(v) for v in overall[3]]}
            result = OracleResult(overall[0], params, history)
        else:
            result = OracleResult(None, None, history)
        if grid.tighten:
            feas_tol /= 10
    return result


def _confirm(fam: _Family, feas, feas_tol: float):
    time, res, p, w = feas
    try:
        u = fam.control(p, w)
    except ValueError:
        return None
    final, _ = simulate_exact(fam.x0.x0, u)
    if max(abs(v) for v in final) > feas_tol:
        return None
    return (u.total_time, res, p, w)


# ---------------------------------------------------------------- round trips

@dataclass
class RoundTrip:
    passed: bool
    detail: str
    step: StepFunction | None = None


def random_step_function(rng: np.random.Generator, typ: LemmaType, k: int) -> StepFunction:
    """Random valid step function of a type: ``k - 1`` interior nodes avoiding
    zero by 0.05, masses at the endpoints the type calls for, weights in
    [0.1, 10]."""
    while True:
        a = -rng.uniform(0.3, 2.5)
        b = rng.uniform(0.3, 2.5)
        inner = np.sort(rng.uniform(a, b, size=k - 1))[::-1]
        pts = [b, *inner, a]
        gaps_ok = all(pts[i] - pts[i + 1] > 0.05 for i in range(len(pts) - 1))
        if gaps_ok and all(abs(z) > 0.05 for z in inner):
            break
    nodes = ([b] if typ.mass_at_b else []) + list(inner) + ([a] if typ.mass_at_a else [])
    weights = list(rng.uniform(0.1, 10.0, size=len(nodes)))
    return StepFunction(tuple(float(z) for z in nodes), tuple(float(w) for w in weights), a, b)


def random_step_roundtrip(seed: int, typ: LemmaType, k: int, n: int, *, negate: bool = False) -> RoundTrip:
    """Moments of a random step function must pass the type's conditions and
    give back its nodes and weights (to 1e-6 relative). With ``negate`` one
    weight is flipped negative and the conditions must fail instead."""
    if not typ.admissible_k(n, k):
        raise ValueError(f"k={k} not admissible for type {typ.value}, n={n}")
    if typ is LemmaType.A and k == 1:
        raise ValueError("type A with k=1 is the zero measure, nothing to round-trip")
    rng = np.random.default_rng(seed)
    s = random_step_function(rng, typ, k)
    if negate:
        w = list(s.weights)
        w[int(rng.integers(len(w)))] *= -1
        s = StepFunction(s.nodes, tuple(w), s.a, s.b)
    c = s.moments(n)
    rep = check_conditions(c, typ, k, s.a, s.b)
    if negate:
        return RoundTrip(not rep.passed, "conditions failed as expected" if not rep.passed
                         else "conditions passed for a negative weight", s)
    if not rep.passed:
        return RoundTrip(False, f"conditions failed: {rep.failed()}", s)
    nodes = recover_nodes(c, typ, k, s.a, s.b)
    inner = list(s.interior)
    if len(nodes) != len(inner):
        return RoundTrip(False, f"recovered {len(nodes)} nodes, expected {len(inner)}", s)
    scale = max(abs(s.a), abs(s.b))
    for z, t in zip(nodes, inner):
        if abs(z - t) > 1e-6 * max(abs(t), scale):
            return RoundTrip(False, f"node {z} differs from {t}", s)
    w = recover_weights(c, typ, nodes, s.a, s.b)
    for x, y in zip(w, s.weights):
        if abs(x - y) > 1e-6 * max(abs(y), 1.0):
            return RoundTrip(False, f"weight {x} differs from {y}", s)
    return RoundTrip(True, "ok", s)


# ------------------------------------------------------- constructed instances

@dataclass
class ConstructedInstance:
    x0: tuple[float, ...]
    case: CaseDescriptor
    control: StairStepControl


def random_case_instance(rng: np.random.Generator, n: int, case: CaseDescriptor | None = None) -> ConstructedInstance:
    """Initial state steered to the origin by a random control of a case's
    shape, obtained by integrating the control backwards from the origin."""
    cases = enumerate_cases(n)
    case = case or cases[int(rng.integers(len(cases)))]
    typ, k = case.type, case.k
    x1 = float(rng.uniform(0.3, 2.0))
    while True:
        b = x1 if case.b_fixed else x1 + float(rng.uniform(0.2, 1.5))
        a = 0.0 if case.a_fixed else -float(rng.uniform(0.2, 1.5))
        inner = sorted(rng.uniform(a, b, size=k - 1), reverse=True)
        pts = [b, *inner, a]
        if all(pts[i] - pts[i + 1] > 0.1 for i in range(len(pts) - 1)) and \
                all(abs(z) > 0.1 for z in inner):
            break
    w_inner = [float(v) for v in rng.uniform(0.2, 3.0, size=k - 1)]
    wb = float(rng.uniform(0.2, 3.0)) if typ.mass_at_b else 0.0
    wa = float(rng.uniform(0.2, 3.0)) if typ.mass_at_a else 0.0
    u = synthesize_control(x1, a, b, [float(z) for z in inner], wb, w_inner, wa)
    probe, _ = simulate_exact((x1,) + (0.0,) * (n - 1), u)
    x0 = (x1,) + tuple(-v for v in probe[1:])
    return ConstructedInstance(x0, case, u)
