"""Moment sequences, their shifted variants and Hankel matrix tests."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .polyalg import det

TOL_PD = 1e-9
TOL_SING = 1e-7


class ShiftKind(enum.Enum):
    PLAIN = "plain"
    A = "a-shift"
    B = "b-shift"
    AB = "ab-shift"

    @property
    def shortening(self) -> int:
        return {"plain": 0, "a-shift": 1, "b-shift": 1, "ab-shift": 2}[self.value]


@dataclass(frozen=True)
class MomentSequence:
    """Numbers ``c_1..c_n`` (stored zero-based in ``c``).

    Entries are usually floats, but any ring elements work for the algebraic
    operations (exact Fractions, polynomials in the endpoints).
    """

    c: tuple

    def __init__(self, c: Sequence):
        object.__setattr__(self, "c", tuple(c))
        if not self.c:
            raise ValueError("empty moment sequence")
        for v in self.c:
            if isinstance(v, float) and not math.isfinite(v):
                raise ValueError("moment sequence entries must be finite")

    @property
    def n(self) -> int:
        return len(self.c)

    def __len__(self) -> int:
        return len(self.c)

    def __getitem__(self, j: int):
        """One-based access: ``seq[1]`` is ``c_1``."""
        if j < 1 or j > len(self.c):
            raise IndexError(f"moment index {j} outside 1..{len(self.c)}")
        return self.c[j - 1]

    def scaled(self, factor) -> "MomentSequence":
        return MomentSequence([factor * v for v in self.c])

    def as_floats(self) -> "MomentSequence":
        return MomentSequence([float(v) for v in self.c])


def shift_sequence(c: MomentSequence, kind: ShiftKind, a=0, b=0) -> MomentSequence:
    """Moments of ``(z-a) dσ``, ``(b-z) dσ`` or ``(z-a)(b-z) dσ``."""
    n = len(c)
    if n - kind.shortening < 1:
        raise ValueError(f"sequence of length {n} too short for {kind.value}")
    s = c.c
    if kind is ShiftKind.PLAIN:
        return c
    if kind is ShiftKind.A:
        return MomentSequence([s[j + 1] - a * s[j] for j in range(n - 1)])
    if kind is ShiftKind.B:
        return MomentSequence([-s[j + 1] + b * s[j] for j in range(n - 1)])
    return MomentSequence(
        [-s[j + 2] + (a + b) * s[j + 1] - a * b * s[j] for j in range(n - 2)]
    )


def hankel_matrix(c: MomentSequence, k: int, d: int = 0) -> list[list]:
    """The ``k x k`` matrix ``{c_{i+j-1+d}}``."""
    if k < 0 or d < 0:
        raise ValueError("k and d must be non-negative")
    if k and 2 * k - 1 + d > len(c):
        raise IndexError(
            f"Hankel block k={k}, d={d} needs {2 * k - 1 + d} moments, have {len(c)}"
        )
    return [[c.c[i + j + d] for j in range(k)] for i in range(k)]


def hankel_det(c: MomentSequence, k: int, d: int = 0):
    return det(hankel_matrix(c, k, d))


def _diag_scale(h: np.ndarray) -> float:
    diag = np.abs(np.diag(h))
    if np.any(diag == 0):
        return 0.0
    return float(np.exp(np.mean(np.log(diag))))


def leading_minors(c: MomentSequence, k: int, d: int = 0) -> list[float]:
    """Leading principal minors of the float Hankel block, smallest first."""
    h = [[float(v) for v in row] for row in hankel_matrix(c, k, d)]
    return [float(det([row[:i] for row in h[:i]])) for i in range(1, k + 1)]


def is_positive_definite(c: MomentSequence, k: int, d: int = 0, tol: float = TOL_PD) -> bool:
    """Sylvester's criterion on the pivots: every ratio of consecutive
    leading minors must exceed ``tol * s``, ``s`` being the geometric mean of
    the diagonal magnitudes.

    ``k = 0`` is the empty condition and returns True.
    """
    if k == 0:
        return True
    h = np.asarray(hankel_matrix(c, k, d), dtype=float)
    threshold = tol * _diag_scale(h)
    prev = 1.0
    for m in leading_minors(c, k, d):
        if not (prev > 0 and m / prev > threshold):
            return False
        prev = m
    return True


def is_nonnegative_definite(mat: np.ndarray, tol: float = TOL_PD) -> bool:
    """All eigenvalues of the symmetric ``mat`` at least ``-tol * scale``."""
    mat = np.asarray(mat, dtype=float)
    if mat.size == 0:
        return True
    scale = max(1.0, float(np.max(np.abs(mat))))
    return bool(np.min(np.linalg.eigvalsh(mat)) >= -tol * scale)


def singular_residual(c: MomentSequence, k: int, d: int = 0, scale: float = 0.0) -> float:
    """``|det|`` normalised by the product of the row norms (Hadamard bound).

    ``scale`` is a floor on the entry magnitude; without it a block whose
    entries all cancel to rounding noise normalises to 1.
    """
    h = np.asarray(hankel_matrix(c, k, d), dtype=float)
    if k == 0:
        return 0.0
    bound = max(float(np.prod(np.linalg.norm(h, axis=1))), scale**k)
    value = abs(float(hankel_det(c.as_floats(), k, d)))
    return value / bound if bound > 0 else value
