import numpy as np
import pytest

from moment_toc.hankel import MomentSequence, shift_sequence, ShiftKind
from moment_toc.hausdorff import (
    InconsistentMoments,
    LemmaType,
    StepFunction,
    check_conditions,
    general_solvability,
    node_polynomial,
    recover_nodes,
    recover_weights,
    step_index,
)
from moment_toc.moments import InitialState, moments_unchecked
from moment_toc.oracle import random_step_function, random_step_roundtrip

from conftest import EXAMPLE_A, EXAMPLE_C

CASE4_A = (-1.663657498144912, 1.0, 11.340870646178251)


def test_type_metadata():
    assert LemmaType.A.driver is ShiftKind.PLAIN and LemmaType.A.complement is ShiftKind.AB
    assert LemmaType.B.mass_at_a and LemmaType.B.mass_at_b
    assert LemmaType.C.mass_at_b and not LemmaType.C.mass_at_a
    assert LemmaType.D.mass_at_a and not LemmaType.D.mass_at_b
    assert LemmaType.B.admissible_k(5, 2) and not LemmaType.B.admissible_k(4, 2)


def test_case4_conditions_pass():
    a, b, theta = CASE4_A
    c = moments_unchecked(InitialState(EXAMPLE_A), a, b, theta)
    rep = check_conditions(c, LemmaType.A, 2, a, b)
    assert rep.passed
    assert rep.minors[0][0] == pytest.approx(7.01356, abs=1e-5)
    assert rep.minors[1][0] == pytest.approx(2.59693, abs=1e-5)
    assert rep.minors[2][0] == pytest.approx(6.23889, abs=1e-5)


def test_case4_attempt_for_example_c_fails_third_condition():
    a, b = -1.581265113279624, 1.0
    x = InitialState(EXAMPLE_C)
    # theta from the d = 0 equation makes the 2x2 block singular
    c0 = moments_unchecked(x, a, b, 0.0)
    theta = c0[2] ** 2 / c0[3] - c0[1]
    rep = check_conditions(moments_unchecked(x, a, b, theta), LemmaType.A, 2, a, b)
    assert not rep.passed and "complement" in rep.failed()
    assert rep.minors[2][0] == pytest.approx(-0.03103, abs=1e-4)


def test_node_from_linear_equation():
    a, b, theta = CASE4_A
    c = moments_unchecked(InitialState(EXAMPLE_A), a, b, theta)
    assert recover_nodes(c, LemmaType.A, 2, a, b) == pytest.approx([0.608501], abs=1e-6)
    assert recover_weights(c, LemmaType.A, [0.6085010919107314], a, b) == pytest.approx([7.01356], abs=1e-5)


def test_dirac_mass():
    z0, w = 0.7, 1.3
    c = MomentSequence([w * z0**j for j in range(4)])
    assert recover_nodes(c, LemmaType.A, 2, -1, 2) == pytest.approx([z0])
    assert recover_weights(MomentSequence([2, 2, 2, 2]), LemmaType.A, [1.0], 0, 3) == pytest.approx([2])


def test_k1_has_no_nodes():
    c = MomentSequence([1.0, 2.0, 3.0, 4.0])
    assert recover_nodes(c, LemmaType.D, 1, -1, 2) == []


def test_type_d_single_mass_case8():
    a, b, theta = -0.7182944286164039, 1.2408012611877477, 6.431570828262579
    c = moments_unchecked(InitialState(EXAMPLE_C), a, b, theta)
    assert recover_weights(c, LemmaType.D, [], a, b) == pytest.approx([3.51338], abs=1e-5)


def test_inconsistent_moments_detected():
    with pytest.raises(InconsistentMoments):
        recover_weights(MomentSequence([2, 2, 2, 3]), LemmaType.A, [1.0], 0, 3)


def test_degenerate_node_polynomial():
    c = MomentSequence([0.0, 0.0, 0.0, 1.0, 1.0])
    with pytest.raises(ValueError, match="degenerate"):
        recover_nodes(c, LemmaType.A, 2, -1, 2)


@pytest.mark.parametrize("typ,k", [(LemmaType.A, 2), (LemmaType.A, 3), (LemmaType.B, 1), (LemmaType.B, 2),
                                   (LemmaType.C, 2), (LemmaType.D, 2)])
@pytest.mark.parametrize("seed", range(5))
def test_roundtrip_each_type(typ, k, seed):
    n = 2 * k + 1 if typ is LemmaType.B else 2 * k
    res = random_step_roundtrip(seed, typ, k, max(n, 4))
    assert res.passed, res.detail


@pytest.mark.parametrize("seed", range(5))
def test_three_interior_nodes_precise(seed):
    rng = np.random.default_rng(seed)
    s = random_step_function(rng, LemmaType.A, 4)
    c = s.moments(8)
    nodes = recover_nodes(c, LemmaType.A, 4, s.a, s.b)
    for z, t in zip(nodes, s.nodes):
        assert z == pytest.approx(t, rel=1e-8)


@pytest.mark.parametrize("typ", list(LemmaType))
def test_negative_weight_breaks_conditions(typ):
    k = 2
    n = 5 if typ is LemmaType.B else 4
    assert random_step_roundtrip(11, typ, k, n, negate=True).passed


def test_type_b_matches_type_a_on_shifted_sequence():
    rng = np.random.default_rng(4)
    s = random_step_function(rng, LemmaType.B, 2)
    c = s.moments(7)
    rb = check_conditions(c, LemmaType.B, 2, s.a, s.b)
    cab = shift_sequence(c, ShiftKind.AB, s.a, s.b)
    ra = check_conditions(cab, LemmaType.A, 2, s.a, s.b)
    assert rb.pd_results[:2] == ra.pd_results[:2]
    assert rb.passed


def test_general_solvability():
    assert general_solvability(MomentSequence([0.0] * 5), -1, 2)
    a, b = -1.0, 2.0
    for n in (4, 5):
        uni = MomentSequence([(b**j - a**j) / j for j in range(1, n + 1)])
        assert general_solvability(uni, a, b)
        bumped = list(uni.c)
        bumped[1] = b * bumped[0] + 0.5
        assert not general_solvability(MomentSequence(bumped), a, b)


def test_step_index():
    assert step_index(StepFunction((0.5,), (1.0,), -1, 1)) == 2
    assert step_index(StepFunction((1.0, 0.5, 0.2, -1.0), (1, 1, 1, 1), -1.0, 1.0)) == 2 * 2 + 2
    rng = np.random.default_rng(0)
    s = random_step_function(rng, LemmaType.C, 3)
    assert step_index(s) == 2 * len(s.interior) + 1


def test_node_polynomial_degree():
    s = StepFunction((1.0, 0.2, -0.5), (1.0, 2.0, 3.0), -1.0, 1.5)
    assert node_polynomial(s.moments(6), 4).degree == 3
