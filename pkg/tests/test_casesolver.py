import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import EXAMPLE_A, EXAMPLE_B, EXAMPLE_B_OUT, EXAMPLE_C
from moment_toc.casesolver import (
    CandidateSolution,
    NonGeneric,
    dedupe_candidates,
    enumerate_cases,
    solve,
    solve_endpoints,
    solve_theta,
)
from moment_toc.control import StairStepControl, simulate_exact
from moment_toc.hausdorff import LemmaType, atoms_for
from moment_toc.moments import InitialState, mirror_state, moments_unchecked
from moment_toc.oracle import random_case_instance


def _case(n, cid):
    return next(c for c in enumerate_cases(n) if c.id == cid)


@pytest.mark.parametrize("n,ids,ks", [
    (4, [2, 4, 6, 8], [2, 2, 1, 1]),
    (5, [1, 3, 5, 7, 9], [3, 2, 2, 2, 1]),
    (7, [1, 3, 5, 7, 9], [4, 3, 3, 3, 2]),
    (6, [2, 4, 6, 8], [3, 3, 2, 2]),
])
def test_enumerate_cases(n, ids, ks):
    cases = enumerate_cases(n)
    assert [c.id for c in cases] == ids
    assert [c.k for c in cases] == ks


def test_case_table_metadata():
    t = {c.id: c for c in enumerate_cases(5) + enumerate_cases(4)}
    assert [t[i].type.value for i in range(1, 10)] == list("AACAACDDB")
    assert t[1].d_range == (0,)
    assert all(t[i].d_range == (0, 1) for i in (2, 3, 4, 7))
    assert all(t[i].d_range == (0, 1, 2) for i in (5, 6, 8, 9))
    assert t[1].a_fixed and t[1].b_fixed
    assert t[2].a_fixed and not t[2].b_fixed and t[4].b_fixed and not t[4].a_fixed
    for c in t.values():
        n = 5 if c.odd else 4
        assert max(c.d_range) == c.type.max_d(n, c.k)
    with pytest.raises(ValueError):
        enumerate_cases(3)


def test_case1_endpoints():
    x = InitialState([0.7, 1, 2, 3, 4])
    assert solve_endpoints(x, _case(5, 1)) == [(0.0, 0.7)]


def test_case4_unique_negative_root():
    pairs = solve_endpoints(InitialState(EXAMPLE_A), _case(4, 4))
    assert len(pairs) == 1
    assert pairs[0][0] == pytest.approx(-1.66366, abs=1e-5) and pairs[0][1] == 1.0


def test_case8_two_pairs():
    pairs = solve_endpoints(InitialState(EXAMPLE_C), _case(4, 8))
    assert len(pairs) == 2
    assert pairs[0] == pytest.approx((-2.26126, 1.12296), abs=1e-5)
    assert pairs[1] == pytest.approx((-0.718294, 1.240801), abs=1e-6)


@pytest.mark.parametrize("seed", range(4))
def test_forward_constructed_case2(seed):
    rng = np.random.default_rng(seed)
    inst = random_case_instance(rng, 4, _case(4, 2))
    b_true = inst.control.segments[0].duration + inst.x0[0]
    pairs = solve_endpoints(InitialState(inst.x0), _case(4, 2))
    assert any(abs(b - b_true) <= 1e-6 for _, b in pairs)


def test_theta_example_values():
    x = InitialState(EXAMPLE_A)
    a = solve_endpoints(x, _case(4, 4))[0][0]
    assert solve_theta(x, _case(4, 4), a, 1.0) == pytest.approx(11.34087, abs=1e-5)
    xc = InitialState(EXAMPLE_C)
    (a1, b1), (a2, b2) = solve_endpoints(xc, _case(4, 8))
    assert solve_theta(xc, _case(4, 8), a1, b1) == pytest.approx(4.728202, abs=1e-6)
    assert solve_theta(xc, _case(4, 8), a2, b2) == pytest.approx(6.43157, abs=1e-5)


def test_theta_single_mass_inversion():
    # Case 8 (k = 1): c1 equals the single weight
    rng = np.random.default_rng(1)
    inst = random_case_instance(rng, 4, _case(4, 8))
    x = InitialState(inst.x0)
    segs = inst.control.segments
    b = inst.x0[0] + segs[0].duration
    a = -segs[-1].duration
    sigma = segs[2].duration
    assert solve_theta(x, _case(4, 8), a, b) == pytest.approx(sigma - x.x1 + 2 * b - 2 * a, rel=1e-12)


def test_solve_example_a():
    rep = solve(EXAMPLE_A)
    assert rep.verdict == "optimal_found"
    assert rep.best.case.id == 4
    assert rep.best.theta == pytest.approx(11.34087, abs=1e-5)
    assert len(rep.accepted) == 1


def test_solve_example_c():
    rep = solve(EXAMPLE_C)
    assert rep.best.case.id == 8
    assert rep.best.theta == pytest.approx(6.43157, abs=1e-5)
    c4 = [c for c in rep.candidates if c.case.id == 4]
    assert c4 and not c4[0].accepted and "condition:A3" in c4[0].reasons
    c8 = sorted((c for c in rep.candidates if c.case.id == 8), key=lambda c: c.a)
    assert "condition:D3" in c8[0].reasons
    assert c8[0].report.minors[2][0] == pytest.approx(-3.52041, abs=1e-4)


def test_solve_example_b_pair():
    rep = solve(EXAMPLE_B)
    assert rep.best.theta == pytest.approx(1907.10809, rel=1e-5)
    assert solve(EXAMPLE_B_OUT).verdict == "not_controllable"


def test_non_generic():
    with pytest.raises(NonGeneric):
        solve([0, 1, 1, 1])


def _check_accepted_invariants(x0, rep):
    state = InitialState(x0 if x0[0] > 0 else mirror_state(x0))
    for cand in rep.accepted:
        c = moments_unchecked(state, cand.a, cand.b, cand.theta)
        atoms = atoms_for(cand.case.type, cand.nodes, cand.a, cand.b)
        scale = max(1.0, max(abs(v) for v in c.c))
        for j in range(1, state.n + 1):
            s = math.fsum(w * z ** (j - 1) for w, z in zip(cand.weights, atoms))
            assert abs(s - c[j]) <= 1e-8 * scale
        for r in cand.report.singular_residuals.values():
            assert r <= 1e-7
        assert cand.theta >= 2 * cand.b - 2 * cand.a - state.x1 - 1e-12
        final, _ = simulate_exact(x0, cand.control)
        assert max(map(abs, final)) <= 1e-8 * (1 + max(map(abs, x0)))


@pytest.mark.parametrize("seed", range(12))
def test_accepted_candidate_invariants(seed):
    rng = np.random.default_rng(seed)
    inst = random_case_instance(rng, 4 + seed % 2)
    rep = solve(inst.x0)
    assert rep.verdict == "optimal_found"
    assert rep.best.theta <= inst.control.total_time + 1e-6
    _check_accepted_invariants(inst.x0, rep)


@pytest.mark.parametrize("seed", range(6))
def test_mirror_invariance(seed):
    rng = np.random.default_rng(50 + seed)
    inst = random_case_instance(rng, 4 + seed % 2)
    r1 = solve(inst.x0)
    r2 = solve(mirror_state(inst.x0))
    assert r2.mirrored and not r1.mirrored
    assert r2.best.theta == pytest.approx(r1.best.theta, rel=1e-9)
    assert r2.best.control == r1.best.control.negated()
    _check_accepted_invariants(mirror_state(inst.x0), r2)


def test_best_not_above_any_accepted():
    for x0 in (EXAMPLE_A, EXAMPLE_C, (1.0, -8.0, -28.4649, -1.8792)):
        rep = solve(x0)
        assert all(rep.best.theta <= c.theta for c in rep.accepted)
        assert rep.co_optimal[0] is rep.best


def test_dedupe_keeps_first():
    u = StairStepControl.from_pairs([(-1, 1.0), (1, 1.0)])
    cases = enumerate_cases(4)
    c2 = CandidateSolution(cases[0], 0.0, 1.0 + 1e-9, 3.0, control=u)
    c4 = CandidateSolution(cases[1], -1e-9, 1.0, 3.0, control=u)
    other = CandidateSolution(cases[2], -0.5, 1.5, 3.0, control=u)
    dedupe_candidates([c2, c4, other])
    assert c2.accepted and other.accepted
    assert not c4.accepted and c4.reasons == ["duplicate:case2"]


def test_report_ordering_is_by_case():
    rep = solve(EXAMPLE_C)
    ids = [c.case.id for c in rep.candidates]
    assert ids == sorted(ids)
