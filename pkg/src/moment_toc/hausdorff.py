"""Truncated Hausdorff moment problem on [a, b] with finitely many atoms.

Four representation types are handled, differing in which endpoints carry
mass: A (none), B (both), C (b only), D (a only). For each type this module
checks solvability, recovers the interior nodes from a bordered Hankel
determinant and the weights from a Vandermonde system.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .hankel import (
    TOL_PD,
    MomentSequence,
    ShiftKind,
    hankel_matrix,
    is_nonnegative_definite,
    is_positive_definite,
    leading_minors,
    shift_sequence,
    singular_residual,
)
from .polyalg import TOL_ROOT, Polynomial, det, real_roots

WEIGHT_CONSISTENCY = 1e-6


class InconsistentMoments(ValueError):
    pass


class LemmaType(enum.Enum):
    A = "A"
    B = "B"
    C = "C"
    D = "D"

    @property
    def driver(self) -> ShiftKind:
        """Sequence whose Hankel blocks must be singular and which yields
        the interior nodes."""
        return {
            "A": ShiftKind.PLAIN,
            "B": ShiftKind.AB,
            "C": ShiftKind.B,
            "D": ShiftKind.A,
        }[self.value]

    @property
    def complement(self) -> ShiftKind:
        return {
            "A": ShiftKind.AB,
            "B": ShiftKind.PLAIN,
            "C": ShiftKind.A,
            "D": ShiftKind.B,
        }[self.value]

    def complement_size(self, k: int) -> int:
        return {"A": k - 1, "B": k + 1, "C": k, "D": k}[self.value]

    @property
    def mass_at_b(self) -> bool:
        return self in (LemmaType.B, LemmaType.C)

    @property
    def mass_at_a(self) -> bool:
        return self in (LemmaType.B, LemmaType.D)

    def atom_count(self, k: int) -> int:
        return k - 1 + self.mass_at_a + self.mass_at_b

    def max_d(self, n: int, k: int) -> int:
        return {"A": n + 1 - 2 * k, "B": n - 1 - 2 * k, "C": n - 2 * k, "D": n - 2 * k}[self.value]

    def admissible_k(self, n: int, k: int) -> bool:
        if k < 1:
            return False
        return {"A": 2 * k - 1 <= n, "B": 2 * k + 1 <= n}.get(self.value, 2 * k <= n)


@dataclass(frozen=True)
class StepFunction:
    """Atoms ``nodes`` (descending) with positive ``weights`` on ``[a, b]``."""

    nodes: tuple[float, ...]
    weights: tuple[float, ...]
    a: float
    b: float

    def __post_init__(self):
        if len(self.nodes) != len(self.weights):
            raise ValueError("nodes and weights differ in length")
        if any(x < y for x, y in zip(self.nodes, self.nodes[1:])):
            raise ValueError("nodes must be descending")
        if self.nodes and (self.nodes[0] > self.b or self.nodes[-1] < self.a):
            raise ValueError("nodes must lie in [a, b]")

    def moments(self, n: int) -> MomentSequence:
        z = np.asarray(self.nodes, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        return MomentSequence([float(np.dot(w, z**j)) for j in range(n)])

    @property
    def interior(self) -> tuple[float, ...]:
        return tuple(z for z in self.nodes if self.a < z < self.b)


def step_index(s: StepFunction) -> int:
    """Interior atoms count 2, atoms at a or b count 1."""
    return sum(1 if z in (s.a, s.b) else 2 for z in s.nodes)


@dataclass
class ConditionReport:
    """Outcome of the three solvability conditions of one type.

    ``singular_residuals`` maps d to the normalised determinant of the
    driving block (diagnostic only); ``minors`` holds the leading minors
    behind each of the three positivity tests.
    """

    singular_residuals: dict[int, float]
    pd_results: tuple[bool, bool, bool]
    minors: tuple[list[float], list[float], list[float]] = field(default=([], [], []))

    @property
    def passed(self) -> bool:
        return all(self.pd_results)

    def failed(self) -> list[str]:
        names = ("driver-d0", "driver-d2", "complement")
        return [n for n, ok in zip(names, self.pd_results) if not ok]


def _check_lengths(c: MomentSequence, typ: LemmaType, k: int) -> None:
    n = len(c)
    if n < 4:
        raise ValueError("need at least 4 moments")
    if not typ.admissible_k(n, k):
        raise ValueError(f"k={k} not admissible for type {typ.value} with n={n}")


def check_conditions(
    c: MomentSequence,
    typ: LemmaType,
    k: int,
    a: float,
    b: float,
    tol: float = TOL_PD,
) -> ConditionReport:
    _check_lengths(c, typ, k)
    drv = shift_sequence(c, typ.driver, a, b)
    comp = shift_sequence(c, typ.complement, a, b)
    # shifted entries are differences of terms of this size
    scale = max([1.0] + [abs(float(v)) for v in c.c]) * (1 + abs(a)) * (1 + abs(b))
    sing = {d: singular_residual(drv, k, d, scale) for d in range(typ.max_d(len(c), k) + 1)}
    m = k - 1
    kc = typ.complement_size(k)
    pd = (
        is_positive_definite(drv, m, 0, tol),
        is_positive_definite(drv, m, 2, tol),
        is_positive_definite(comp, kc, 0, tol),
    )
    minors = (
        leading_minors(drv, m, 0) if m else [],
        leading_minors(drv, m, 2) if m else [],
        leading_minors(comp, kc, 0) if kc else [],
    )
    return ConditionReport(sing, pd, minors)


def node_polynomial(drv: MomentSequence, k: int) -> Polynomial:
    """Bordered determinant with rows ``s_i..s_{i+k-1}`` (i < k) over the
    row ``1, z, .., z**(k-1)``, expanded along the last row."""
    top = [[float(v) for v in row] for row in
           [[drv.c[i + j] for j in range(k)] for i in range(k - 1)]]
    coeffs = []
    for j in range(k):
        minor = [row[:j] + row[j + 1:] for row in top]
        sign = -1.0 if (k - 1 + j) % 2 else 1.0
        coeffs.append(sign * float(det(minor)))
    return Polynomial(coeffs)


def recover_nodes(
    c: MomentSequence, typ: LemmaType, k: int, a: float, b: float, tol_root: float = TOL_ROOT
) -> list[float]:
    """Interior nodes as real roots of the bordered determinant, descending.

    Validation (interval, nonzero, distinct, count) is left to the caller.
    """
    if k == 1:
        return []
    drv = shift_sequence(c.as_floats(), typ.driver, a, b)
    if len(drv) < 2 * k - 2:
        raise ValueError("moment sequence too short for node recovery")
    p = node_polynomial(drv, k)
    scale = p.scale()
    if scale == 0 or abs(p.lead) <= 1e-13 * scale:
        raise ValueError("degenerate node polynomial")
    return sorted(real_roots(p, tol=tol_root), reverse=True)


def atoms_for(typ: LemmaType, nodes: Sequence[float], a: float, b: float) -> list[float]:
    """All atoms in positional order: b (if massed), interior descending, a."""
    out = [b] if typ.mass_at_b else []
    out += sorted(nodes, reverse=True)
    if typ.mass_at_a:
        out.append(a)
    return out


def recover_weights(
    c: MomentSequence,
    typ: LemmaType,
    nodes: Sequence[float],
    a: float,
    b: float,
    tol: float = WEIGHT_CONSISTENCY,
) -> list[float]:
    """Weights from the first ``m`` moment equations (``m`` atoms); the
    remaining equations are verified to ``tol * max(1, |c|_inf)``."""
    cf = np.asarray([float(v) for v in c.c])
    atoms = np.asarray(atoms_for(typ, nodes, a, b), dtype=float)
    m = len(atoms)
    if m == 0:
        raise ValueError("no atoms to weigh")
    if m > len(cf):
        raise ValueError("more atoms than moments")
    vander = np.vander(atoms, len(cf), increasing=True).T
    square = vander[:m]
    if np.linalg.cond(square) > 1e14:
        raise np.linalg.LinAlgError("singular weight system")
    w = np.linalg.solve(square, cf[:m])
    resid = np.max(np.abs(vander @ w - cf))
    if resid > tol * max(1.0, float(np.max(np.abs(cf)))):
        raise InconsistentMoments(f"inconsistent moments (residual {resid:.3e})")
    return [float(v) for v in w]


def general_solvability(c: MomentSequence, a: float, b: float, tol: float = TOL_PD) -> bool:
    """Solvability of the moment problem on [a, b] by non-negative
    definiteness of the two classical Hankel matrices."""
    n = len(c)
    if n < 2:
        raise ValueError("need at least 2 moments")
    cf = c.as_floats()
    m = n // 2
    if n % 2:
        first = hankel_matrix(cf, m + 1, 0)
        second = hankel_matrix(shift_sequence(cf, ShiftKind.AB, a, b), m, 0) if m else []
    else:
        first = hankel_matrix(shift_sequence(cf, ShiftKind.A, a, b), m, 0)
        second = hankel_matrix(shift_sequence(cf, ShiftKind.B, a, b), m, 0)
    return is_nonnegative_definite(np.asarray(first, dtype=float), tol) and \
        is_nonnegative_definite(np.asarray(second, dtype=float), tol)
