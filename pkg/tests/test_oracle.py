import numpy as np
import pytest

from conftest import EXAMPLE_A, EXAMPLE_B_OUT
from moment_toc.casesolver import enumerate_cases, solve
from moment_toc.control import simulate_exact
from moment_toc.hausdorff import LemmaType
from moment_toc.moments import InitialState
from moment_toc.oracle import (
    GridSpec,
    _nnls_batch,
    grid_search_min_time,
    random_case_instance,
    random_step_roundtrip,
)


@pytest.mark.parametrize("kw", [dict(points=1), dict(span=0.0), dict(refinements=-1), dict(zoom=0)])
def test_gridspec_validation(kw):
    with pytest.raises(ValueError):
        GridSpec(**kw)


def test_gridspec_steps():
    assert GridSpec(points=160_000).steps(2) == 400
    assert GridSpec(points=160_000).steps(4) == 20
    assert GridSpec(points=4).steps(3) == 2


def test_nnls_batch_matches_known_solution():
    mat = np.array([[[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]] * 2)
    rhs = np.array([[1.0, 2.0, 3.0], [-1.0, 2.0, 1.0]])
    w, r = _nnls_batch(mat, rhs)
    assert w[0] == pytest.approx([1.0, 2.0]) and r[0] == pytest.approx(0.0, abs=1e-12)
    assert w[1][0] == 0.0 and w[1][1] > 0


def test_oracle_brackets_example_a():
    theta = solve(EXAMPLE_A).best.theta
    res = grid_search_min_time(InitialState(EXAMPLE_A))
    assert res.feasible
    assert theta * (1 - 1e-3) <= res.theta <= theta * (1 + 5e-2)
    final, _ = simulate_exact(EXAMPLE_A, _control_from(res))
    assert max(map(abs, final)) <= 1e-2 * 7 / 100


def _control_from(res):
    from moment_toc.oracle import _Family
    case = next(c for c in enumerate_cases(4) if c.id == res.params["case"])
    fam = _Family(InitialState(EXAMPLE_A), case)
    p = {k: res.params[k] for k in fam.names}
    return fam.control(p, res.params["weights"])


def test_oracle_constructed_instance():
    rng = np.random.default_rng(7)
    inst = random_case_instance(rng, 4, enumerate_cases(4)[0])
    res = grid_search_min_time(InitialState(inst.x0))
    assert res.feasible
    assert res.theta <= inst.control.total_time * (1 + 1e-2)


def test_oracle_infeasible_variant():
    res = grid_search_min_time(InitialState(EXAMPLE_B_OUT), grid=GridSpec(points=40_000))
    assert not res.feasible
    assert res.history[-1] is None


def test_history_monotone_without_tightening():
    res = grid_search_min_time(InitialState(EXAMPLE_A), grid=GridSpec(points=40_000, tighten=False))
    h = [v for v in res.history if v is not None]
    assert h and all(x >= y for x, y in zip(h, h[1:]))


def test_oracle_rejects_large_n():
    with pytest.raises(ValueError):
        grid_search_min_time(InitialState([1, 0, 0, 0, 0, 0]))


@pytest.mark.parametrize("typ,k,n", [(LemmaType.A, 2, 4), (LemmaType.B, 1, 4), (LemmaType.C, 2, 5),
                                     (LemmaType.D, 1, 4), (LemmaType.A, 3, 6)])
def test_roundtrip(typ, k, n):
    for seed in range(10):
        rt = random_step_roundtrip(seed, typ, k, n)
        assert rt.passed, rt.detail


@pytest.mark.parametrize("typ", list(LemmaType))
def test_roundtrip_negated(typ):
    k = 1 if typ in (LemmaType.B, LemmaType.D) else 2
    for seed in range(10):
        rt = random_step_roundtrip(seed, typ, k, 4 if typ is not LemmaType.C else 5, negate=True)
        assert rt.passed, rt.detail


def test_roundtrip_inadmissible():
    with pytest.raises(ValueError):
        random_step_roundtrip(0, LemmaType.A, 5, 4)


def test_constructed_instance_reaches_origin():
    rng = np.random.default_rng(3)
    for n in (4, 5, 6):
        inst = random_case_instance(rng, n)
        final, _ = simulate_exact(inst.x0, inst.control)
        assert max(map(abs, final)) <= 1e-12 * (1 + max(map(abs, inst.x0)))
