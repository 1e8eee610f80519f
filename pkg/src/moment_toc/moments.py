"""Moment sequences of the chain x1' = u, xj' = x1**(j-1) and their
polynomial forms in the endpoints a, b."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .hankel import MomentSequence
from .polyalg import PolyInTwoStages, Polynomial


class NonGeneric(ValueError):
    """Raised for initial states outside the generic setting (x1 = 0, ...)."""


@dataclass(frozen=True)
class InitialState:
    x0: tuple[float, ...]

    def __init__(self, x0: Sequence[float]):
        vals = tuple(float(v) for v in x0)
        if len(vals) < 4:
            raise ValueError(f"state dimension must be at least 4, got {len(vals)}")
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("initial state must be finite")
        object.__setattr__(self, "x0", vals)

    @property
    def n(self) -> int:
        return len(self.x0)

    @property
    def x1(self) -> float:
        return self.x0[0]

    def __getitem__(self, j: int) -> float:
        """One-based component access, ``state[1]`` is x1."""
        return self.x0[j - 1]

    def norm_inf(self) -> float:
        return max(abs(v) for v in self.x0)


@dataclass(frozen=True)
class EndpointPair:
    a: float
    b: float

    def check(self, x1: float) -> None:
        if self.a > 0 or self.b < x1:
            raise ValueError(f"need a <= 0 and b >= x1, got a={self.a}, b={self.b}, x1={x1}")


def mirror_state(x0: Sequence[float]) -> tuple[float, ...]:
    """Image of a state under u -> -u: x1 -> -x1 and xj -> (-1)**(j-1) xj
    for j >= 2 (so x2, x4, .. flip sign)."""
    return tuple(-v if (i == 0 or i % 2 == 1) else v for i, v in enumerate(x0))


def normalize_initial_state(x0raw: Sequence[float]) -> tuple[InitialState, bool]:
    """Return a state with x1 > 0 and whether it was mirrored.

    The optimal control of a mirrored problem is the negation of the
    original one.
    """
    vals = [float(v) for v in x0raw]
    if len(vals) < 4:
        raise ValueError(f"state dimension must be at least 4, got {len(vals)}")
    if vals[0] == 0:
        raise NonGeneric("x1 = 0 is not a generic initial state")
    if vals[0] > 0:
        return InitialState(vals), False
    return InitialState(mirror_state(vals)), True


def _moment_terms(x0: InitialState, a: float, b: float, j: int) -> list[float]:
    x1 = x0.x1
    return [-x0[j], x1**j / j, -2.0 * b**j / j, 2.0 * a**j / j]


def moments_unchecked(x0: InitialState, a: float, b: float, theta: float) -> MomentSequence:
    c = [math.fsum([theta, x0.x1, -2.0 * b, 2.0 * a])]
    c += [math.fsum(_moment_terms(x0, a, b, j)) for j in range(2, x0.n + 1)]
    return MomentSequence(c)


def assemble_moments(x0: InitialState, a: float, b: float, theta: float) -> MomentSequence:
    """``c_1 = theta + x1 - 2b + 2a`` and
    ``c_j = -x_j + (x1**j - 2 b**j + 2 a**j) / j`` for ``j >= 2``."""
    EndpointPair(a, b).check(x0.x1)
    if theta < 0:
        raise ValueError("theta must be non-negative")
    return moments_unchecked(x0, a, b, theta)


def exact_moment_tail(x0: InitialState, a, b) -> list[Fraction]:
    """``c_2..c_n`` in exact rational arithmetic for (exactly converted)
    float endpoints."""
    x1 = Fraction(x0.x1)
    a, b = Fraction(a), Fraction(b)
    return [
        -Fraction(x0[j]) + (x1**j - 2 * b**j + 2 * a**j) / j
        for j in range(2, x0.n + 1)
    ]


@dataclass(frozen=True)
class MomentPolynomials:
    """``c_2..c_n`` as exact polynomials in (a, b) (inner a, outer b) after
    a case's substitutions, and ``c_1 = theta + c1_offset(a, b)``."""

    cj_poly: tuple[PolyInTwoStages, ...]
    c1_offset: PolyInTwoStages
    a_fixed: bool
    b_fixed: bool

    def sequence(self, c1=None) -> MomentSequence:
        """The symbolic sequence; ``c_1`` defaults to zero, which is harmless
        for every block that starts at ``c_2``."""
        first = c1 if c1 is not None else PolyInTwoStages()
        return MomentSequence([first, *self.cj_poly])

    def evaluate(self, a: float, b: float, theta: float) -> MomentSequence:
        c1 = theta + float(self.c1_offset(a, b))
        return MomentSequence([c1] + [float(p(a, b)) for p in self.cj_poly])


def case_polynomials(x0: InitialState, case) -> MomentPolynomials:
    """Moment polynomials for a case; ``case`` needs ``a_fixed``/``b_fixed``."""
    x1 = Fraction(x0.x1)
    a = PolyInTwoStages([Polynomial([0])]) if case.a_fixed else PolyInTwoStages.inner_var()
    b = PolyInTwoStages([Polynomial([x1])]) if case.b_fixed else PolyInTwoStages.outer_var()
    cj = []
    for j in range(2, x0.n + 1):
        cj.append(-Fraction(x0[j]) + x1**j / j + b**j * Fraction(-2, j) + a**j * Fraction(2, j))
    offset = x1 - 2 * b + 2 * a
    return MomentPolynomials(tuple(cj), offset, case.a_fixed, case.b_fixed)
