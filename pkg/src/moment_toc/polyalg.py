"""Univariate polynomial arithmetic, real roots and Sylvester resultants.

Coefficients are stored in ascending order and may be floats, ints or
``fractions.Fraction``; arithmetic stays exact when the inputs are exact.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Number
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

TOL_ROOT = 1e-10
MERGE_TOL = 1e-7


class Polynomial:
    """Dense univariate polynomial, ``coeffs[i]`` multiplies ``z**i``."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        c = list(coeffs)
        while c and c[-1] == 0:
            c.pop()
        self.coeffs = tuple(c)

    @classmethod
    def constant(cls, value) -> "Polynomial":
        return cls([value])

    @classmethod
    def from_roots(cls, roots: Iterable, lead=1) -> "Polynomial":
        p = cls([lead])
        for r in roots:
            p = p * cls([-r, 1])
        return p

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def lead(self):
        return self.coeffs[-1] if self.coeffs else 0

    def __call__(self, x):
        acc = 0 * x if self.coeffs else 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __repr__(self) -> str:
        return f"Polynomial({list(self.coeffs)!r})"

    def __eq__(self, other) -> bool:
        if isinstance(other, Number):
            other = Polynomial([other])
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __neg__(self) -> "Polynomial":
        return Polynomial([-c for c in self.coeffs])

    def __add__(self, other) -> "Polynomial":
        other = _as_poly(other)
        if other is NotImplemented:
            return other
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] = out[i] + c
        return Polynomial(out)

    __radd__ = __add__

    def __sub__(self, other) -> "Polynomial":
        other = _as_poly(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> "Polynomial":
        return (-self) + other

    def __mul__(self, other) -> "Polynomial":
        if isinstance(other, Number):
            return Polynomial([c * other for c in self.coeffs])
        if not isinstance(other, Polynomial):
            return NotImplemented
        if not self.coeffs or not other.coeffs:
            return Polynomial()
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, x in enumerate(self.coeffs):
            if x == 0:
                continue
            for j, y in enumerate(other.coeffs):
                out[i + j] = out[i + j] + x * y
        return Polynomial(out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Polynomial":
        out = Polynomial([1])
        for _ in range(k):
            out = out * self
        return out

    def derivative(self) -> "Polynomial":
        return Polynomial([i * c for i, c in enumerate(self.coeffs)][1:])

    def divmod(self, other: "Polynomial") -> tuple["Polynomial", "Polynomial"]:
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = other.degree
        lead = other.lead
        if len(rem) - 1 < dq:
            return Polynomial(), Polynomial(rem)
        quot = [0] * (len(rem) - dq)
        for i in range(len(rem) - 1, dq - 1, -1):
            q = _div(rem[i], lead)
            quot[i - dq] = q
            if q == 0:
                continue
            for j, c in enumerate(other.coeffs):
                rem[i - dq + j] = rem[i - dq + j] - q * c
        return Polynomial(quot), Polynomial(rem[:dq])

    def exact_div(self, other: "Polynomial") -> "Polynomial":
        """Quotient of a division known to be exact (remainder discarded)."""
        return self.divmod(other)[0]

    def map(self, fn) -> "Polynomial":
        return Polynomial([fn(c) for c in self.coeffs])

    def to_float(self) -> "Polynomial":
        return self.map(float)

    def scale(self) -> float:
        return max((abs(float(c)) for c in self.coeffs), default=0.0)

    def compose_affine(self, shift, factor) -> "Polynomial":
        """Return ``p(factor*z + shift)``."""
        lin = Polynomial([shift, factor])
        acc = Polynomial()
        for c in reversed(self.coeffs):
            acc = acc * lin + c
        return acc


def _as_poly(x):
    if isinstance(x, Polynomial):
        return x
    if isinstance(x, Number):
        return Polynomial([x])
    return NotImplemented


def _div(x, y):
    if isinstance(x, int) and isinstance(y, int):
        return Fraction(x, y)
    return x / y


class PolyInTwoStages:
    """Polynomial in an outer variable whose coefficients are polynomials in
    an inner variable: ``p(u, v) = sum_j outer[j](u) * v**j``.

    Throughout the package the inner variable is ``a`` and the outer one ``b``.
    """

    __slots__ = ("outer",)

    def __init__(self, outer: Iterable[Polynomial] = ()):
        o = [_as_poly(c) for c in outer]
        while o and o[-1].is_zero():
            o.pop()
        self.outer = tuple(o)

    @classmethod
    def from_dict(cls, terms: dict[tuple[int, int], object]) -> "PolyInTwoStages":
        """Build from ``{(inner_power, outer_power): coeff}``."""
        if not terms:
            return cls()
        deg_outer = max(j for _, j in terms)
        rows: list[dict[int, object]] = [dict() for _ in range(deg_outer + 1)]
        for (i, j), c in terms.items():
            rows[j][i] = rows[j].get(i, 0) + c
        out = []
        for r in rows:
            if r:
                coeffs = [0] * (max(r) + 1)
                for i, c in r.items():
                    coeffs[i] = c
                out.append(Polynomial(coeffs))
            else:
                out.append(Polynomial())
        return cls(out)

    @classmethod
    def inner_var(cls) -> "PolyInTwoStages":
        return cls([Polynomial([0, 1])])

    @classmethod
    def outer_var(cls) -> "PolyInTwoStages":
        return cls([Polynomial(), Polynomial([1])])

    def to_dict(self) -> dict[tuple[int, int], object]:
        return {
            (i, j): c
            for j, p in enumerate(self.outer)
            for i, c in enumerate(p.coeffs)
            if c != 0
        }

    @property
    def degree_outer(self) -> int:
        return len(self.outer) - 1

    @property
    def degree_inner(self) -> int:
        return max((p.degree for p in self.outer), default=-1)

    @property
    def total_degree(self) -> int:
        return max((i + j for i, j in self.to_dict()), default=-1)

    def is_zero(self) -> bool:
        return not self.outer

    def __call__(self, inner, outer):
        acc = 0
        for p in reversed(self.outer):
            acc = acc * outer + p(inner)
        return acc

    def at_inner(self, inner) -> Polynomial:
        """Substitute a value for the inner variable, leaving a polynomial in
        the outer one."""
        return Polynomial([p(inner) for p in self.outer])

    def at_outer(self, outer) -> Polynomial:
        return self.swap().at_inner(outer)

    def swap(self) -> "PolyInTwoStages":
        return PolyInTwoStages.from_dict({(j, i): c for (i, j), c in self.to_dict().items()})

    def map(self, fn) -> "PolyInTwoStages":
        return PolyInTwoStages([p.map(fn) for p in self.outer])

    def __repr__(self) -> str:
        return f"PolyInTwoStages({list(self.outer)!r})"

    def __eq__(self, other) -> bool:
        other = _as_two_stage(other)
        if other is NotImplemented:
            return other
        return self.outer == other.outer

    def __hash__(self) -> int:
        return hash(self.outer)

    def __neg__(self) -> "PolyInTwoStages":
        return PolyInTwoStages([-p for p in self.outer])

    def __add__(self, other) -> "PolyInTwoStages":
        other = _as_two_stage(other)
        if other is NotImplemented:
            return other
        a, b = self.outer, other.outer
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for j, p in enumerate(b):
            out[j] = out[j] + p
        return PolyInTwoStages(out)

    __radd__ = __add__

    def __sub__(self, other) -> "PolyInTwoStages":
        other = _as_two_stage(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> "PolyInTwoStages":
        return (-self) + other

    def __mul__(self, other) -> "PolyInTwoStages":
        if isinstance(other, (Number, Polynomial)):
            return PolyInTwoStages([p * other for p in self.outer])
        if not isinstance(other, PolyInTwoStages):
            return NotImplemented
        if self.is_zero() or other.is_zero():
            return PolyInTwoStages()
        out = [Polynomial()] * (len(self.outer) + len(other.outer) - 1)
        for i, x in enumerate(self.outer):
            for j, y in enumerate(other.outer):
                out[i + j] = out[i + j] + x * y
        return PolyInTwoStages(out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "PolyInTwoStages":
        out = PolyInTwoStages([Polynomial([1])])
        for _ in range(k):
            out = out * self
        return out


def _as_two_stage(x):
    if isinstance(x, PolyInTwoStages):
        return x
    if isinstance(x, (Number, Polynomial)):
        return PolyInTwoStages([x])
    return NotImplemented


# ---------------------------------------------------------------- roots


class Root(NamedTuple):
    value: float
    multiplicity: int


def _newton_polish(c: np.ndarray, x: float, iters: int = 8) -> float:
    dc = npoly.polyder(c)
    fx = abs(npoly.polyval(x, c))
    for _ in range(iters):
        d = npoly.polyval(x, dc)
        if d == 0 or fx == 0:
            break
        x_new = x - npoly.polyval(x, c) / d
        f_new = abs(npoly.polyval(x_new, c))
        if not f_new < fx:
            break
        x, fx = x_new, f_new
    return x


def root_residual(p: Polynomial, x: float) -> float:
    """``|p(x)|`` normalised by ``max|coeff| * max(1,|x|)**deg``."""
    pf = p.to_float()
    s = pf.scale()
    if s == 0:
        return 0.0
    return abs(pf(x)) / (s * max(1.0, abs(x)) ** pf.degree)


def real_roots(
    p: Polynomial,
    interval: tuple[float, float] | None = None,
    *,
    tol: float = TOL_ROOT,
    with_multiplicity: bool = False,
) -> list:
    """Real roots of ``p`` in ascending order.

    Companion-matrix eigenvalues are Newton-polished on the real axis; a value
    is kept when its normalised residual (see :func:`root_residual`) is at most
    ``tol``. Roots closer than ``1e-7`` (relative) are merged and reported
    once, with the summed multiplicity when ``with_multiplicity`` is set.
    """
    if p.is_zero():
        raise ValueError("identically zero polynomial has no isolated roots")
    pf = p.to_float()
    if not all(math.isfinite(c) for c in pf.coeffs):
        raise ValueError("polynomial coefficients must be finite")
    if pf.degree < 1:
        return []

    coeffs = list(pf.coeffs)
    zero_mult = 0
    while coeffs[0] == 0:
        coeffs.pop(0)
        zero_mult += 1
    c = np.asarray(coeffs, dtype=float)
    c = c / np.max(np.abs(c))

    found: list[tuple[float, int]] = [(0.0, 1)] * zero_mult
    if len(c) > 1:
        eig = npoly.polyroots(c)
        for z in eig:
            x = float(z.real)
            if abs(z.imag) > 1e-4 * max(1.0, abs(x)):
                continue
            x = _newton_polish(c, x)
            if root_residual(pf, x) <= tol:
                found.append((x, 1))
            elif abs(z.imag) > 0:
                # near-multiple real roots can show up as a tight complex
                # pair whose polished real part still has a small residual
                if root_residual(pf, x) <= math.sqrt(tol):
                    found.append((x, 1))
    found.sort()

    merged: list[list] = []
    for x, m in found:
        if merged and abs(x - merged[-1][0]) < MERGE_TOL * max(1.0, abs(x)):
            tot = merged[-1][1] + m
            merged[-1][0] = (merged[-1][0] * merged[-1][1] + x * m) / tot
            merged[-1][1] = tot
        else:
            merged.append([x, m])

    out = []
    for x, m in merged:
        if interval is not None and not (interval[0] <= x <= interval[1]):
            continue
        out.append(Root(x, m) if with_multiplicity else x)
    return out


def common_roots(
    p: Polynomial,
    q: Polynomial,
    interval: tuple[float, float] | None = None,
    *,
    tol: float = 1e-8,
) -> list[float]:
    """Real values in ``interval`` where both ``p`` and ``q`` vanish.

    Candidates are the roots of the lower-degree polynomial; each is kept
    when the normalised residual of the other one is within ``tol``.
    """
    if p.is_zero() and q.is_zero():
        raise ValueError("both polynomials vanish identically")
    if p.is_zero():
        return real_roots(q, interval)
    if q.is_zero():
        return real_roots(p, interval)
    first, second = (p, q) if p.degree <= q.degree else (q, p)
    if first.degree < 1:
        return []
    out = []
    for r in real_roots(first, interval, tol=max(tol, TOL_ROOT)):
        if second.degree < 1:
            continue
        if root_residual(second, r) <= tol:
            out.append(r)
    return out


# ---------------------------------------------------------- determinants


def _is_zero(x) -> bool:
    if isinstance(x, (Polynomial, PolyInTwoStages)):
        return x.is_zero()
    return x == 0


def _pivot_key(x) -> float:
    if isinstance(x, Polynomial):
        return float(x.degree)
    return abs(float(x))


def _ring_div(x, y):
    if isinstance(x, Polynomial) or isinstance(y, Polynomial):
        return _as_poly(x).exact_div(_as_poly(y))
    return _div(x, y)


def det_bareiss(matrix: Sequence[Sequence]) -> object:
    """Fraction-free (Bareiss) determinant with row pivoting.

    Works over any integral domain whose elements support exact division:
    ints, Fractions, floats and :class:`Polynomial`.
    """
    a = [list(r) for r in matrix]
    n = len(a)
    if n == 0:
        return 1
    if any(len(r) != n for r in a):
        raise ValueError("matrix must be square")
    sign = 1
    prev = None
    for k in range(n - 1):
        best = None
        for i in range(k, n):
            if not _is_zero(a[i][k]) and (best is None or _pivot_key(a[i][k]) > _pivot_key(a[best][k])):
                best = i
        if best is None:
            return 0 * a[0][0]
        if best != k:
            a[k], a[best] = a[best], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = a[i][j] * a[k][k] - a[i][k] * a[k][j]
                a[i][j] = num if prev is None else _ring_div(num, prev)
        prev = a[k][k]
    return a[n - 1][n - 1] if sign > 0 else -a[n - 1][n - 1]


def det_laplace(matrix: Sequence[Sequence]) -> object:
    """Cofactor expansion; needs only ring operations (for small matrices
    with bivariate polynomial entries)."""
    n = len(matrix)
    if n == 0:
        return 1
    if n == 1:
        return matrix[0][0]
    if n == 2:
        return matrix[0][0] * matrix[1][1] - matrix[0][1] * matrix[1][0]
    total = None
    for j in range(n):
        if _is_zero(matrix[0][j]):
            continue
        minor = [row[:j] + row[j + 1:] for row in matrix[1:]]
        term = matrix[0][j] * det_laplace(minor)
        if j % 2:
            term = -term
        total = term if total is None else total + term
    return total if total is not None else 0 * matrix[0][0]


def det(matrix: Sequence[Sequence]) -> object:
    """Determinant, choosing the method by entry type and size."""
    n = len(matrix)
    if n == 0:
        return 1
    sample = matrix[0][0]
    if isinstance(sample, PolyInTwoStages):
        return det_laplace(matrix)
    if isinstance(sample, (float, np.floating)) and n > 8:
        return float(np.linalg.det(np.asarray(matrix, dtype=float)))
    return det_bareiss(matrix)


# ------------------------------------------------------------ resultants


def sylvester_matrix(p: Sequence, q: Sequence) -> list[list]:
    """Sylvester matrix of two coefficient lists (ascending order).

    Entries may be numbers or polynomials in a retained variable.
    """
    m, l = len(p) - 1, len(q) - 1
    size = m + l
    if size == 0:
        raise ValueError("both polynomials have degree 0")
    zero = 0 * p[0]
    rows = []
    for i in range(l):
        row = [zero] * size
        for t, c in enumerate(reversed(p)):
            row[i + t] = c
        rows.append(row)
    for i in range(m):
        row = [zero] * size
        for t, c in enumerate(reversed(q)):
            row[i + t] = c
        rows.append(row)
    return rows


def sylvester_resultant(p: PolyInTwoStages, q: PolyInTwoStages) -> Polynomial:
    """Resultant of ``p`` and ``q`` with respect to their outer variable.

    Returns a polynomial in the inner variable whose roots include every
    value at which ``p`` and ``q`` share a root in the outer variable.
    """
    if p.is_zero() or q.is_zero():
        raise ValueError("resultant with the zero polynomial")
    if p.degree_outer < 1 and q.degree_outer < 1:
        raise ValueError("both polynomials have degree 0 in the eliminated variable")
    m = sylvester_matrix(list(p.outer), list(q.outer))
    return _as_poly(det_bareiss(m))
