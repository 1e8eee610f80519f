"""Exact rational elimination for the endpoint equations.

The determinant equations have rational coefficients once the (float) initial
state is converted exactly, so they are assembled and eliminated in exact
arithmetic with python-flint. Real roots are isolated by flint's certified
complex root finder and then refined in floating point.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

import flint

from .polyalg import PolyInTwoStages, Polynomial

CTX = flint.fmpq_mpoly_ctx.get(("a", "b"), "lex")
GEN_A, GEN_B = CTX.gens()


class DegenerateSystem(ValueError):
    """The two endpoint equations share a common factor (a continuum of
    solutions) or one of them vanishes identically."""


def fq(x) -> flint.fmpq:
    f = Fraction(x)
    return flint.fmpq(f.numerator, f.denominator)


def to_fraction(q: flint.fmpq) -> Fraction:
    return Fraction(int(q.p), int(q.q))


def to_mpoly(p: PolyInTwoStages) -> flint.fmpq_mpoly:
    return CTX.from_dict({(i, j): fq(c) for (i, j), c in p.to_dict().items()})


def from_mpoly(m: flint.fmpq_mpoly) -> PolyInTwoStages:
    return PolyInTwoStages.from_dict({(e[0], e[1]): to_fraction(c) for e, c in m.to_dict().items()})


def degree_in(m: flint.fmpq_mpoly, var: int) -> int:
    d = m.to_dict()
    return max((e[var] for e in d), default=-1)


def univariate(m: flint.fmpq_mpoly, var: int) -> flint.fmpq_poly:
    """Coefficients of ``m`` in variable ``var`` (0 for a, 1 for b); the other
    variable must not occur."""
    d = m.to_dict()
    if any(e[1 - var] for e in d):
        raise ValueError("polynomial depends on both variables")
    deg = max((e[var] for e in d), default=0)
    co = [flint.fmpq(0)] * (deg + 1)
    for e, c in d.items():
        co[e[var]] = c
    return flint.fmpq_poly(co)


def to_polynomial(p: flint.fmpq_poly) -> Polynomial:
    return Polynomial([to_fraction(c) for c in p.coeffs()])


def split_in_b(m: flint.fmpq_mpoly) -> list[flint.fmpq_poly]:
    """``m`` as a list of polynomials in a, indexed by powers of b."""
    d = m.to_dict()
    degb = max(e[1] for e in d)
    dega = max(e[0] for e in d)
    rows = [[flint.fmpq(0)] * (dega + 1) for _ in range(degb + 1)]
    for e, c in d.items():
        rows[e[1]][e[0]] = c
    return [flint.fmpq_poly(r) for r in rows]


def _interpolate(pts: list, vals: list) -> flint.fmpq_poly:
    dd = list(vals)
    n = len(pts)
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            dd[i] = (dd[i] - dd[i - 1]) / (pts[i] - pts[i - j])
    x = flint.fmpq_poly([0, 1])
    poly = flint.fmpq_poly([dd[-1]])
    for i in range(n - 2, -1, -1):
        poly = poly * (x - pts[i]) + dd[i]
    return poly


def _node_order():
    i = 0
    while True:
        yield i
        if i:
            yield -i
        i += 1


def resultant_in_b(p: flint.fmpq_mpoly, q: flint.fmpq_mpoly) -> flint.fmpq_poly:
    """Resultant with respect to b, as a polynomial in a.

    Computed by specialising a at integer nodes (skipping nodes where a
    leading coefficient vanishes), taking univariate resultants and
    interpolating exactly; one extra node is used as a check.
    """
    ps, qs = split_in_b(p), split_in_b(q)
    if len(ps) == 1 and len(qs) == 1:
        raise ValueError("neither polynomial involves b")
    bound = p.total_degree() * q.total_degree() + 1
    pts, vals = [], []
    for t in _node_order():
        at = flint.fmpq(t)
        if ps[-1](at) == 0 or qs[-1](at) == 0:
            continue
        pp = flint.fmpq_poly([c(at) for c in ps])
        qq = flint.fmpq_poly([c(at) for c in qs])
        pts.append(at)
        vals.append(pp.resultant(qq))
        if len(pts) == bound + 1:
            break
    poly = _interpolate(pts[:-1], vals[:-1])
    if poly(pts[-1]) != vals[-1]:
        raise ArithmeticError("resultant interpolation failed its check node")
    return poly


def real_roots_exact(p: flint.fmpq_poly, lo: float = -math.inf, hi: float = math.inf) -> list[float]:
    """Real roots in the open interval ``(lo, hi)``, ascending."""
    if p == 0:
        raise DegenerateSystem("polynomial vanishes identically")
    if p.degree() < 1:
        return []
    out = []
    for r, _mult in p.complex_roots():
        if r.imag.contains(0):
            x = float(r.real.mid())
            if lo < x < hi:
                out.append(x)
    return sorted(out)


def _eval(m: flint.fmpq_mpoly, a: float, b: float) -> float:
    return float(m(fq(a), fq(b)))


def newton_polish(
    p: flint.fmpq_mpoly, q: flint.fmpq_mpoly, a: float, b: float, iters: int = 30
) -> tuple[float, float, float]:
    """Two-dimensional Newton refinement with exact residual evaluation.

    Returns the refined point and the final residual, each equation being
    normalised by the magnitude of its terms at the point.
    """
    pa, pb = p.derivative(0), p.derivative(1)
    qa, qb = q.derivative(0), q.derivative(1)
    best = (a, b, _scaled_residual(p, q, a, b))
    for _ in range(iters):
        f1, f2 = _eval(p, a, b), _eval(q, a, b)
        j11, j12, j21, j22 = _eval(pa, a, b), _eval(pb, a, b), _eval(qa, a, b), _eval(qb, a, b)
        detj = j11 * j22 - j12 * j21
        if detj == 0 or not math.isfinite(detj):
            break
        da = (f1 * j22 - f2 * j12) / detj
        db = (j11 * f2 - j21 * f1) / detj
        a, b = a - da, b - db
        res = _scaled_residual(p, q, a, b)
        if res < best[2]:
            best = (a, b, res)
        if abs(da) <= 1e-16 * max(1.0, abs(a)) and abs(db) <= 1e-16 * max(1.0, abs(b)):
            break
    return best


def term_scale(m: flint.fmpq_mpoly, a: float, b: float) -> float:
    return math.fsum(abs(float(c)) * abs(a) ** int(e[0]) * abs(b) ** int(e[1]) for e, c in m.to_dict().items())


def _scaled_residual(p, q, a, b) -> float:
    r = 0.0
    for m in (p, q):
        s = term_scale(m, a, b)
        v = abs(_eval(m, a, b))
        r = max(r, v / s if s > 0 else v)
    return r


def solve_bivariate(
    p: flint.fmpq_mpoly,
    q: flint.fmpq_mpoly,
    a_range: tuple[float, float],
    b_range: tuple[float, float],
    tol: float = 1e-10,
    dedupe: float = 1e-7,
) -> list[tuple[float, float]]:
    """All real common zeros of ``p`` and ``q`` with a, b in the open ranges.

    Elimination of b gives candidate a values; for each, b is taken from the
    common roots of ``p(a, .)`` and ``q(a, .)`` and the pair is polished by
    Newton's method on the original system.
    """
    if p == 0 or q == 0:
        raise DegenerateSystem("an endpoint equation vanishes identically")
    g = p.gcd(q)
    if g.total_degree() > 0:
        raise DegenerateSystem("endpoint equations share a common factor")
    if degree_in(p, 1) == 0 and degree_in(q, 1) == 0:
        raise DegenerateSystem("endpoint equations do not involve b")
    res = resultant_in_b(p, q)
    alo, ahi = a_range
    blo, bhi = b_range
    ps, qs = split_in_b(p), split_in_b(q)
    found: list[tuple[float, float]] = []
    for a in real_roots_exact(res, alo - 1e-6, ahi + 1e-6):
        at = fq(a)
        pb = flint.fmpq_poly([c(at) for c in ps])
        qb = flint.fmpq_poly([c(at) for c in qs])
        broots = _paired_roots(pb, qb)
        for b in broots:
            a2, b2, r = newton_polish(p, q, a, b)
            if r > tol:
                continue
            if not (alo < a2 < ahi and blo < b2 < bhi):
                continue
            if any(abs(a2 - x) <= dedupe * max(1, abs(x)) and abs(b2 - y) <= dedupe * max(1, abs(y))
                   for x, y in found):
                continue
            found.append((a2, b2))
    return sorted(found)


def _paired_roots(pb: flint.fmpq_poly, qb: flint.fmpq_poly, rel: float = 1e-4) -> list[float]:
    """Approximate common real roots of two univariate polynomials whose
    coefficients are only approximately those of a system with a common
    root."""
    if pb.degree() < 1 and qb.degree() < 1:
        return []
    if pb.degree() < 1:
        return real_roots_exact(qb)
    if qb.degree() < 1:
        return real_roots_exact(pb)
    rp, rq = real_roots_exact(pb), real_roots_exact(qb)
    out = []
    for x in rp:
        if not rq:
            break
        y = min(rq, key=lambda v: abs(v - x))
        if abs(x - y) <= rel * max(1.0, abs(x)):
            out.append(0.5 * (x + y))
    return out


def hankel_det_mpoly(entries: Sequence[flint.fmpq_mpoly], k: int, d: int) -> flint.fmpq_mpoly:
    """Determinant of the ``k x k`` Hankel block ``entries[i+j+d]``."""
    mat = [[entries[i + j + d] for j in range(k)] for i in range(k)]
    return _det_expand(mat)


def _det_expand(mat):
    n = len(mat)
    if n == 0:
        return CTX.from_dict({(0, 0): 1})
    if n == 1:
        return mat[0][0]
    total = CTX.from_dict({})
    for j in range(n):
        if mat[0][j] == 0:
            continue
        minor = [row[:j] + row[j + 1:] for row in mat[1:]]
        term = mat[0][j] * _det_expand(minor)
        total = total - term if j % 2 else total + term
    return total
