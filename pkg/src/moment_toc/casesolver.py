"""Case enumeration and candidate selection for the time-optimal problem.

For a generic initial state the optimal control realises one of nine cases,
each fixing the parity of n, the number k of descending blocks, the
representation type and which of a = 0, b = x1 hold. Every case is solved
independently: the endpoint equations (singular Hankel blocks of the driving
sequence for d >= 1), then the affine equation in theta (d = 0), then the
positivity conditions, node and weight recovery, control synthesis and an
exact simulation of the result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import flint
import numpy as np

from . import elimination as el
from .control import StairStepControl, simulate_exact, synthesize_control
from .hankel import TOL_PD, TOL_SING, MomentSequence, shift_sequence
from .hausdorff import (
    ConditionReport,
    InconsistentMoments,
    LemmaType,
    check_conditions,
    recover_nodes,
    recover_weights,
)
from .moments import InitialState, NonGeneric, moments_unchecked, normalize_initial_state
from .polyalg import MERGE_TOL, TOL_ROOT, det

TOL_SIM = 1e-8
ENDPOINT_SLACK = 1e-9
DEDUPE_TOL = 1e-7


@dataclass(frozen=True)
class CaseDescriptor:
    id: int
    odd: bool
    k: int
    type: LemmaType
    a_fixed: bool
    b_fixed: bool
    d_range: tuple[int, ...]

    @property
    def unknowns(self) -> int:
        return 2 - self.a_fixed - self.b_fixed


# id: (odd n, k as offset from m, type, a = 0, b = x1, largest d)
_TABLE = {
    1: (True, 1, LemmaType.A, True, True, 0),
    2: (False, 0, LemmaType.A, True, False, 1),
    3: (True, 0, LemmaType.C, True, False, 1),
    4: (False, 0, LemmaType.A, False, True, 1),
    5: (True, 0, LemmaType.A, False, False, 2),
    6: (False, -1, LemmaType.C, False, False, 2),
    7: (True, 0, LemmaType.D, False, True, 1),
    8: (False, -1, LemmaType.D, False, False, 2),
    9: (True, -1, LemmaType.B, False, False, 2),
}


def enumerate_cases(n: int) -> list[CaseDescriptor]:
    if n < 4:
        raise ValueError(f"n must be at least 4, got {n}")
    m = n // 2
    odd = bool(n % 2)
    out = []
    for cid, (c_odd, dk, typ, af, bf, dmax) in _TABLE.items():
        if c_odd == odd:
            out.append(CaseDescriptor(cid, odd, m + dk, typ, af, bf, tuple(range(dmax + 1))))
    return out


@dataclass(frozen=True)
class SolverConfig:
    tol_pd: float = TOL_PD
    tol_root: float = TOL_ROOT
    tol_sing: float = TOL_SING
    tol_sim: float = TOL_SIM


@dataclass
class CandidateSolution:
    case: CaseDescriptor
    a: float
    b: float
    theta: float | None = None
    nodes: list[float] = field(default_factory=list)
    weights: list[float] = field(default_factory=list)
    moments: MomentSequence | None = None
    report: ConditionReport | None = None
    control: StairStepControl | None = None
    residual: float | None = None
    reasons: list[str] = field(default_factory=list)

    @property
    def accepted(self) -> bool:
        return not self.reasons and self.control is not None

    @property
    def rejected_reason(self) -> str | None:
        return "; ".join(self.reasons) if self.reasons else None


@dataclass
class SolveReport:
    x0: tuple[float, ...]
    mirrored: bool
    candidates: list[CandidateSolution]
    degenerate_cases: list[int] = field(default_factory=list)

    @property
    def accepted(self) -> list[CandidateSolution]:
        return [c for c in self.candidates if c.accepted]

    @property
    def best(self) -> CandidateSolution | None:
        acc = self.accepted
        if not acc:
            return None
        # min() keeps the first of equal values, i.e. the lowest case id
        return min(acc, key=lambda c: c.theta)

    @property
    def co_optimal(self) -> list[CandidateSolution]:
        best = self.best
        if best is None:
            return []
        tol = 1e-9 * max(1.0, abs(best.theta))
        return [c for c in self.accepted if abs(c.theta - best.theta) <= tol]

    @property
    def verdict(self) -> str:
        if self.best is not None:
            return "optimal_found"
        if self.degenerate_cases:
            return "non_generic"
        return "not_controllable"


def _symbolic_moments(x0: InitialState, case: CaseDescriptor) -> list:
    """``[0, c_2, .., c_n]`` as exact polynomials in a, b (placeholder c_1)."""
    x1 = el.fq(x0.x1)
    a = el.CTX.from_dict({}) if case.a_fixed else el.GEN_A
    b = el.CTX.from_dict({(0, 0): x1}) if case.b_fixed else el.GEN_B
    out = [el.CTX.from_dict({})]
    for j in range(2, x0.n + 1):
        cj = -el.fq(x0[j]) + x1**j / j
        out.append(cj + b**j * flint.fmpq(-2, j) + a**j * flint.fmpq(2, j))
    return out


def _driver(seq: list, typ: LemmaType, a, b) -> list:
    return list(shift_sequence(MomentSequence(seq), typ.driver, a, b).c)


def endpoint_equations(x0: InitialState, case: CaseDescriptor) -> list:
    """The d >= 1 determinant equations of a case as exact polynomials in
    (a, b); the fixed endpoint is already substituted."""
    seq = _symbolic_moments(x0, case)
    a = el.CTX.from_dict({}) if case.a_fixed else el.GEN_A
    b = el.CTX.from_dict({(0, 0): el.fq(x0.x1)}) if case.b_fixed else el.GEN_B
    drv = _driver(seq, case.type, a, b)
    return [el.hankel_det_mpoly(drv, case.k, d) for d in case.d_range if d >= 1]


def solve_endpoints(x0: InitialState, case: CaseDescriptor) -> list[tuple[float, float]]:
    """Admissible (a, b) pairs; raises ``DegenerateSystem`` when the
    equations vanish identically or have a common factor."""
    x1 = x0.x1
    if case.a_fixed and case.b_fixed:
        return [(0.0, x1)]
    eqs = endpoint_equations(x0, case)
    if case.a_fixed:
        p = el.univariate(eqs[0], 1)
        return [(0.0, b) for b in el.real_roots_exact(p, x1 + ENDPOINT_SLACK, math.inf)]
    if case.b_fixed:
        p = el.univariate(eqs[0], 0)
        return [(a, x1) for a in el.real_roots_exact(p, -math.inf, -ENDPOINT_SLACK)]
    return el.solve_bivariate(
        eqs[0], eqs[1], (-math.inf, -ENDPOINT_SLACK), (x1 + ENDPOINT_SLACK, math.inf)
    )


class DegenerateTheta(ValueError):
    pass


def _theta_coefficients(typ: LemmaType, c2: Fraction, c3: Fraction, a: Fraction, b: Fraction):
    """``s_1 = alpha * c_1 + beta`` for the driving sequence."""
    if typ is LemmaType.A:
        return Fraction(1), Fraction(0)
    if typ is LemmaType.B:
        return -a * b, -c3 + (a + b) * c2
    if typ is LemmaType.C:
        return b, -c2
    return -a, c2


def solve_theta(x0: InitialState, case: CaseDescriptor, a: float, b: float) -> float:
    """Closed-form solution of the d = 0 equation, which is affine in c_1."""
    af, bf, x1 = Fraction(a), Fraction(b), Fraction(x0.x1)
    seq = [Fraction(0)] + [
        -Fraction(x0[j]) + (x1**j - 2 * bf**j + 2 * af**j) / j for j in range(2, x0.n + 1)
    ]
    drv = _driver(seq, case.type, af, bf)
    k = case.k
    alpha, beta = _theta_coefficients(case.type, seq[1], seq[2] if len(seq) > 2 else 0, af, bf)
    if k == 1:
        s1 = Fraction(0)
    else:
        drv[0] = Fraction(0)
        rest = det([[drv[i + j] for j in range(k)] for i in range(k)])
        block = [[drv[i + j + 2] for j in range(k - 1)] for i in range(k - 1)]
        cof = det(block)
        bound = math.prod(math.sqrt(sum(float(v) ** 2 for v in row)) for row in block)
        if cof == 0 or abs(float(cof)) <= 1e-13 * bound:
            raise DegenerateTheta("degenerate theta equation")
        s1 = -rest / cof
    if alpha == 0:
        raise DegenerateTheta("degenerate theta equation")
    c1 = (s1 - beta) / alpha
    return float(c1 - x1 + 2 * bf - 2 * af)


def _validate_nodes(nodes: list[float], k: int, a: float, b: float) -> list[str]:
    out = []
    if len(nodes) != k - 1:
        return [f"nodes:count({len(nodes)}!={k - 1})"]
    span = max(1.0, abs(a), abs(b))
    if any(not (a + ENDPOINT_SLACK * span < z < b - ENDPOINT_SLACK * span) for z in nodes):
        out.append("nodes:interval")
    if any(abs(z) <= ENDPOINT_SLACK * span for z in nodes):
        out.append("nodes:zero")
    if any(x - y <= MERGE_TOL * max(1.0, abs(x)) for x, y in zip(nodes, nodes[1:])):
        out.append("nodes:distinct")
    return out


def evaluate_candidate(
    x0: InitialState, case: CaseDescriptor, a: float, b: float, config: SolverConfig
) -> CandidateSolution:
    cand = CandidateSolution(case, a, b)
    try:
        theta = solve_theta(x0, case, a, b)
    except DegenerateTheta:
        cand.reasons.append("theta:degenerate")
        return cand
    cand.theta = theta
    if not theta > 0:
        cand.reasons.append("theta:nonpositive")
    c = moments_unchecked(x0, a, b, theta)
    cand.moments = c
    typ, k = case.type, case.k
    rep = check_conditions(c, typ, k, a, b, config.tol_pd)
    cand.report = rep
    labels = {"driver-d0": "2", "driver-d2": "2", "complement": "3"}
    for name in rep.failed():
        tag = f"condition:{typ.value}{labels[name]}"
        if tag not in cand.reasons:
            cand.reasons.append(tag)
    try:
        nodes = recover_nodes(c, typ, k, a, b, config.tol_root)
    except ValueError:
        cand.reasons.append("nodes:degenerate")
        return cand
    cand.nodes = nodes
    bad = _validate_nodes(nodes, k, a, b)
    if bad:
        cand.reasons += bad
        return cand
    try:
        weights = recover_weights(c, typ, nodes, a, b)
    except InconsistentMoments:
        cand.reasons.append("weights:inconsistent")
        return cand
    except np.linalg.LinAlgError:
        cand.reasons.append("weights:singular")
        return cand
    cand.weights = weights
    if any(not w > 0 for w in weights):
        cand.reasons.append("weights:nonpositive")
    if cand.reasons:
        return cand
    i = int(typ.mass_at_b)
    try:
        u = synthesize_control(
            x0.x1, a, b, nodes,
            weight_at_b=weights[0] if typ.mass_at_b else 0.0,
            interior_weights=weights[i:i + k - 1],
            weight_at_a=weights[-1] if typ.mass_at_a else 0.0,
        )
    except ValueError:
        cand.reasons.append("control:invalid")
        return cand
    final, _ = simulate_exact(x0.x0, u)
    cand.residual = max(abs(v) for v in final)
    if cand.residual > config.tol_sim * (1 + x0.norm_inf()):
        cand.reasons.append("residual")
    cand.control = u
    return cand


def _close(p: CandidateSolution, q: CandidateSolution) -> bool:
    return all(
        abs(x - y) <= DEDUPE_TOL * max(1.0, abs(x))
        for x, y in ((p.a, q.a), (p.b, q.b), (p.theta, q.theta))
    )


def dedupe_candidates(candidates: Sequence[CandidateSolution]) -> None:
    """Mark accepted candidates that repeat an earlier accepted one (within
    1e-7 in a, b and theta) as duplicates; the earlier case id is kept."""
    kept: list[CandidateSolution] = []
    for cand in candidates:
        if cand.accepted:
            dup = next((k for k in kept if _close(k, cand)), None)
            if dup is not None:
                cand.reasons.append(f"duplicate:case{dup.case.id}")
            else:
                kept.append(cand)


def solve(x0raw: Sequence[float], config: SolverConfig | None = None) -> SolveReport:
    """Run every case of the parity of n and collect all candidates.

    Raises ``NonGeneric`` when x1 = 0. When x1 < 0 the mirrored state is
    solved and the controls are negated back.
    """
    config = config or SolverConfig()
    x0, mirrored = normalize_initial_state(x0raw)
    candidates: list[CandidateSolution] = []
    degenerate = []
    for case in enumerate_cases(x0.n):
        try:
            pairs = solve_endpoints(x0, case)
        except el.DegenerateSystem:
            degenerate.append(case.id)
            continue
        for a, b in pairs:
            candidates.append(evaluate_candidate(x0, case, a, b, config))
    dedupe_candidates(candidates)
    if mirrored:
        for cand in candidates:
            if cand.control is not None:
                cand.control = cand.control.negated()
    return SolveReport(tuple(float(v) for v in x0raw), mirrored, candidates, degenerate)


__all__ = [
    "CaseDescriptor",
    "CandidateSolution",
    "NonGeneric",
    "SolveReport",
    "SolverConfig",
    "dedupe_candidates",
    "enumerate_cases",
    "evaluate_candidate",
    "endpoint_equations",
    "solve",
    "solve_endpoints",
    "solve_theta",
]
