from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from moment_toc.hankel import (
    MomentSequence,
    ShiftKind,
    hankel_det,
    hankel_matrix,
    is_positive_definite,
    shift_sequence,
)
from moment_toc.hausdorff import StepFunction
from moment_toc.polyalg import PolyInTwoStages

finite = st.floats(-10, 10).filter(lambda v: v == 0 or abs(v) > 1e-6)


def test_sequence_validation():
    with pytest.raises(ValueError):
        MomentSequence([])
    with pytest.raises(ValueError):
        MomentSequence([1.0, float("nan")])
    c = MomentSequence([1, 2, 3, 4])
    assert c[1] == 1 and c[4] == 4 and c.n == 4


def test_a_shift_with_zero_a_drops_first():
    c = MomentSequence([1.0, 2.0, 3.0, 4.0, 5.0])
    assert shift_sequence(c, ShiftKind.A, 0.0, 7.0).c == (2.0, 3.0, 4.0, 5.0)


def test_shift_lengths_and_short_input():
    c = MomentSequence([1.0, 2.0, 3.0, 4.0])
    assert len(shift_sequence(c, ShiftKind.A, 1, 2)) == 3
    assert len(shift_sequence(c, ShiftKind.AB, 1, 2)) == 2
    with pytest.raises(ValueError):
        shift_sequence(MomentSequence([1.0, 2.0]), ShiftKind.AB, 1, 2)


def test_symbolic_a_shift_case8():
    # x0 = (1, 2, -3, 1/2) with both endpoints symbolic
    x = [1, 2, -3, Fraction(1, 2)]
    A, B = PolyInTwoStages.inner_var(), PolyInTwoStages.outer_var()
    c = [PolyInTwoStages()] + [
        -Fraction(x[j - 1]) + Fraction(1, j) - B**j * Fraction(2, j) + A**j * Fraction(2, j)
        for j in range(2, 5)
    ]
    ca = shift_sequence(MomentSequence(c), ShiftKind.A, A, B)
    expected = PolyInTwoStages.from_dict({
        (3, 0): Fraction(-1, 3), (0, 3): Fraction(-2, 3), (1, 2): 1,
        (1, 0): Fraction(3, 2), (0, 0): Fraction(10, 3),
    })
    assert ca[2] == expected


@given(st.lists(finite, min_size=6, max_size=9), finite, finite)
@settings(max_examples=200)
def test_ab_shift_is_both_compositions(c, a, b):
    seq = MomentSequence(c)
    ab = shift_sequence(seq, ShiftKind.AB, a, b).c
    ab1 = shift_sequence(shift_sequence(seq, ShiftKind.B, a, b), ShiftKind.A, a, b).c
    ab2 = shift_sequence(shift_sequence(seq, ShiftKind.A, a, b), ShiftKind.B, a, b).c
    scale = max(1.0, max(abs(v) for v in c)) * max(1.0, abs(a), abs(b)) ** 2
    for x, y, z in zip(ab, ab1, ab2):
        assert abs(x - y) <= 1e-12 * scale and abs(x - z) <= 1e-12 * scale


def test_hankel_det_small_cases():
    c = MomentSequence([3.0, 1.0, 2.0, 5.0])
    assert hankel_det(c, 1, 0) == 3.0
    assert hankel_det(c, 2, 0) == pytest.approx(3 * 2 - 1)
    with pytest.raises(IndexError):
        hankel_matrix(c, 3, 0)


def test_case4_determinant_polynomial():
    x = [1, -2, -6, 2]
    A = PolyInTwoStages.inner_var()
    c = [PolyInTwoStages()] + [
        -Fraction(x[j - 1]) + Fraction(1, j) - Fraction(2, j) + A**j * Fraction(2, j)
        for j in range(2, 5)
    ]
    d = hankel_det(MomentSequence(c), 2, 1)
    expected = PolyInTwoStages.from_dict({
        (6, 0): Fraction(1, 18), (4, 0): Fraction(3, 4), (3, 0): Fraction(-68, 9),
        (2, 0): Fraction(-9, 4), (0, 0): Fraction(-2555, 72),
    })
    assert d == expected


def test_two_node_moments_give_singular_3x3():
    s = StepFunction((1.5, -0.7), (2.0, 3.0), -1.0, 2.0)
    c = s.moments(5)
    scale = max(abs(v) for v in c.c) ** 3
    assert abs(hankel_det(c, 3, 0)) <= 1e-10 * scale


def test_pd_empty_and_case4_scalars():
    c = MomentSequence([7.01356, 4.26776, 2.59693, 1.0])
    assert is_positive_definite(c, 0, 0)
    assert is_positive_definite(c, 1, 0)
    assert is_positive_definite(c, 1, 2)


def test_three_node_step_function_pd():
    s = StepFunction((1.2, 0.4, -0.9), (1.0, 2.5, 0.7), -1.0, 1.5)
    c = s.moments(5)
    assert is_positive_definite(c, 2, 0)
    assert is_positive_definite(c, 2, 2)


@given(st.lists(finite, min_size=7, max_size=7), st.floats(0.1, 5), st.integers(1, 3))
@settings(max_examples=100)
def test_det_homogeneous(c, lam, k):
    seq = MomentSequence(c)
    d0 = hankel_det(seq, k, 0)
    d1 = hankel_det(seq.scaled(lam), k, 0)
    scale = np.prod([max(1e-300, np.linalg.norm(r)) for r in np.asarray(hankel_matrix(seq, k, 0))])
    assert abs(d1 - lam**k * d0) <= 1e-12 * lam**k * max(scale, 1e-300) + 1e-300


@given(st.lists(finite, min_size=5, max_size=5), st.floats(1e-12, 1e-2))
def test_pd_monotone_in_tol(c, tol):
    seq = MomentSequence(c)
    if is_positive_definite(seq, 2, 0, tol):
        assert is_positive_definite(seq, 2, 0, tol / 10)
