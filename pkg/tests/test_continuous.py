import math

import numpy as np
import pytest

from trirev import continuous as c
from trirev import discrete as d
from trirev.continuous import (BallSlack, BandSlack, QuadratureSpec, SlackFunction, cont_add_family,
                               cont_add_single, cont_add_transformed, cont_margin_check,
                               cont_mult_family, cont_mult_single, cont_mult_transformed,
                               integrate_scalar, integrate_vec)
from trirev.errors import ContractViolation, ConvergenceFailure, HypothesisViolation
from trirev.functionals import Functional, FunctionalFamily
from trirev.spaces import INF, cmod, lp
from trirev.transformers import BallHypothesis, BandHypothesis

SP = lp(2, 2)
S2 = math.sqrt(2)
E1 = Functional.from_inner(SP, [1, 0])
E12 = FunctionalFamily.from_vectors(SP, [[1, 0], [0, 1]])


def test_integrate_polynomial():
    f = c.polynomial(SP, [[0, 0], [1, 0], [0, 1]], 0.0, 1.0)
    assert np.allclose(integrate_vec(f), [0.5, 1 / 3], atol=1e-14)


def test_integrate_constant():
    f = c.constant(lp(3, 3, "complex"), [1, 2j, -1], -1.0, 2.5)
    assert np.allclose(integrate_vec(f), 3.5 * np.array([1, 2j, -1]), atol=1e-13)


def test_integrate_phase():
    f = c.complex_phase(cmod(2), 0.0, math.pi)
    assert abs(integrate_vec(f)[0] - 2j) < 1e-13


def test_simpson_rule_agrees():
    q = QuadratureSpec(rule="simpson", panels=64, refinement=8)
    f = c.circular(SP, 0.0, 1.0)
    assert np.allclose(integrate_vec(f, q), [math.sin(1), 1 - math.cos(1)], atol=1e-10)


def test_quadrature_spec_validation():
    with pytest.raises(ContractViolation):
        QuadratureSpec(rule="trapezoid")
    with pytest.raises(ContractViolation):
        QuadratureSpec(order=1)
    with pytest.raises(ContractViolation):
        QuadratureSpec(panels=0)


def test_convergence_failure():
    # an oscillation far beyond the 16 panels and zero doublings allowed
    f = c.circular(SP, 0.0, 1.0, omega=400.0)
    with pytest.raises(ConvergenceFailure):
        integrate_vec(f, QuadratureSpec(refinement=0))


def test_piecewise_breakpoints_are_panel_edges():
    f = c.piecewise_constant(SP, [[1, 0], [0, 1], [2, 2]])
    assert f.breakpoints == (1.0, 2.0)
    edges = f.panel_edges(16)
    assert {1.0, 2.0} <= set(edges.tolist())
    assert np.allclose(integrate_vec(f), [3, 3], atol=1e-14)


def test_margin_check_examples():
    assert cont_margin_check(c.constant(SP, [1, 0]), E1, 1.0) == []
    arc = c.circular(SP, -math.pi / 4, math.pi / 4)
    assert cont_margin_check(arc, E1, math.cos(math.pi / 4)) == []
    bad = cont_margin_check(arc, E1, 0.9)
    assert bad and all(abs(t) > 0.4 and k == 1 for t, k in bad)


def test_mult_single_constant_equality():
    res = cont_mult_single(c.constant(SP, [1, 0], 0.5, 3.0), E1, 1.0)
    assert math.isclose(res.lhs, 2.5) and math.isclose(res.rhs, 2.5) and res.equality.holds
    assert res.equality.note == c.QUAD_NOTE


def test_karamata():
    f = c.complex_phase(cmod(2), -math.pi / 3, math.pi / 3)
    res = cont_mult_single(f, Functional(cmod(2), [1]), 0.5)
    assert abs(res.lhs - math.pi / 3) <= 1e-9 and abs(res.rhs - math.sqrt(3)) <= 1e-9
    assert res.passed and res.hypothesis_ok


def test_mult_single_circular():
    f = c.circular(SP, -math.pi / 4, math.pi / 4)
    res = cont_mult_single(f, E1, math.cos(math.pi / 4))
    assert abs(res.lhs - math.cos(math.pi / 4) * math.pi / 2) <= 1e-12
    assert abs(res.rhs - S2) <= 1e-12


def test_mult_single_needs_unit():
    with pytest.raises(HypothesisViolation):
        cont_mult_single(c.constant(SP, [1, 0]), Functional.from_inner(SP, [2, 0]), 0.5)


def test_mult_family_examples():
    f = c.constant(SP, [1, 1])
    res = cont_mult_family(f, E12, [1 / S2, 1 / S2])
    assert math.isclose(res.lhs, S2) and math.isclose(res.rhs, S2) and res.equality.holds
    cp = cont_mult_family(f, E12, [1 / S2, 1 / S2], p=2)
    assert math.isclose(cp.lhs, 1.0) and math.isclose(cp.rhs, 1.0, rel_tol=1e-9)
    assert cp.equality.holds
    one = cont_mult_family(c.circular(SP, -0.5, 0.5), FunctionalFamily.of(E1), [math.cos(0.5)])
    single = cont_mult_single(c.circular(SP, -0.5, 0.5), E1, math.cos(0.5))
    assert math.isclose(one.lhs * math.cos(0.5), single.lhs) and math.isclose(one.rhs * math.cos(0.5), single.rhs)


def test_mult_transformed_ball():
    f = c.constant(SP, [1, 0.5])
    res = cont_mult_transformed(f, [BallHypothesis(SP, [1, 0], 0.5)])
    assert abs(res.lhs - math.sqrt(0.75) * math.sqrt(1.25)) <= 1e-12
    assert abs(res.rhs - math.sqrt(1.25)) <= 1e-12 and res.passed and res.hypothesis_ok
    eq = cont_mult_transformed(c.constant(SP, [1, 0]), [BallHypothesis(SP, [1, 0], 0.0)])
    assert eq.equality.holds and math.isclose(eq.lhs, eq.rhs)


def test_mult_transformed_band():
    res = cont_mult_transformed(c.constant(SP, [2.5, 0]), [BandHypothesis(SP, [1, 0], 1.0, 4.0)])
    assert math.isclose(res.lhs, 2.0) and math.isclose(res.rhs, 2.5) and res.hypothesis_ok


def test_mult_transformed_reports_geometry():
    res = cont_mult_transformed(c.constant(SP, [1, 0.7]), [BallHypothesis(SP, [1, 0], 0.5)])
    assert res.margin_violations


def test_add_single_arc_equality():
    t = math.pi / 3
    f = c.circular(SP, -t, t)
    k = SlackFunction(lambda ts, X, seg: 1 - np.cos(ts), 1)
    res = cont_add_single(f, E1, k)
    want = 2 * t - math.sqrt(3)
    assert abs(res.lhs - want) <= 1e-8 and abs(res.rhs - want) <= 1e-8
    assert res.equality.holds


def test_add_single_trivial_and_strict():
    f = c.constant(SP, [1, 0])
    res = cont_add_single(f, E1, SlackFunction.constant([0.0]))
    assert res.lhs == pytest.approx(0, abs=1e-15) and res.rhs == 0
    arc = c.circular(SP, -0.5, 0.5)
    res = cont_add_single(arc, E1, SlackFunction.constant([0.2]))
    assert res.passed and not res.equality.holds
    assert math.isclose(res.rhs - res.lhs, 0.2 - (1 - 2 * math.sin(0.5)))


def test_add_single_slack_violation():
    arc = c.circular(SP, -1.0, 1.0)
    res = cont_add_single(arc, E1, SlackFunction.constant([0.1]))
    assert res.margin_violations


def test_add_family_examples():
    f = c.constant(SP, [1, 1])
    res = cont_add_family(f, E12, SlackFunction.constant([S2 - 1, S2 - 1]))
    assert math.isclose(res.lhs, S2) and math.isclose(res.rhs, S2) and res.equality.holds
    col = cont_add_family(c.constant(SP, [2, 0]), FunctionalFamily.of(E1), SlackFunction.constant([0.0]))
    assert math.isclose(col.lhs, col.rhs) and col.equality.holds
    for p in (2.0, INF):
        cp = cont_add_family(f, E12, SlackFunction.constant([S2 - 1, S2 - 1]), p=p)
        assert cp.passed


def test_add_transformed_ball_corollary():
    t = math.pi / 4
    f = c.circular(SP, -t, t)
    r = lambda ts: np.sqrt((np.cos(ts) - 1) ** 2 + np.sin(ts) ** 2)
    res = cont_add_transformed(f, [BallSlack(np.array([1.0, 0]), r)])
    # oracle: ‖∫f‖ = 2 sin t and ∫½r² = ∫(1 − cos s)ds = 2t − 2 sin t
    assert abs(res.rhs - 2 * t) <= 1e-12 and abs(res.lhs - 2 * t) <= 1e-12
    assert res.passed and res.hypothesis_ok


def test_add_transformed_band():
    f = c.constant(SP, [2, 0.5])
    lo, up = (lambda ts: np.full(len(ts), 1.0)), (lambda ts: np.full(len(ts), 3.0))
    res = cont_add_transformed(f, [BandSlack(np.array([1.0, 0]), lo, up)])
    assert math.isclose(res.rhs, math.hypot(2, 0.5) + 0.25) and res.passed and res.hypothesis_ok


def test_add_transformed_needs_unit_centers():
    f = c.constant(SP, [2, 0])
    with pytest.raises(HypothesisViolation):
        cont_add_transformed(f, [BallSlack(np.array([2.0, 0]), lambda ts: np.zeros(len(ts)))])


@pytest.mark.parametrize("tid,p", [("CONT_MULT_SINGLE", None), ("CONT_MULT_FAMILY", None),
                                   ("CONT_MULT_CINF", None), ("CONT_MULT_CP", 2.0),
                                   ("CONT_ADD_SINGLE", None), ("CONT_ADD_FAMILY", None)])
def test_equality_constructors(tid, p):
    sp = lp(2, 3, "complex")
    m = 1 if tid.endswith("SINGLE") else 2
    fam = FunctionalFamily.from_vectors(sp, [[1, 0, 0], [0.6, 0.8j, 0]][:m])
    inst = c.cont_equality_instance(tid, {"family": fam, "rho": 0.8, "n": 3, "p": p})
    res = c.cont_check(tid, inst, p=p)
    assert res.hypothesis_ok and res.equality.holds and abs(res.lhs - res.rhs) <= 1e-8


def test_discrete_continuous_pairs():
    sp = lp(2, 3, "complex")
    fam = FunctionalFamily.from_vectors(sp, [[1, 0, 0], [0.6, 0.8j, 0]])
    inst = d.equality_instance("MULT_SUMFUNC", {"family": fam, "rho": 0.6, "n": 4})
    f = c.piecewise_constant(sp, inst.vectors)
    a, b = d.mult_sumfunc(inst), cont_mult_family(f, fam, inst.hypothesis.r)
    assert abs(a.lhs - b.lhs) <= 1e-12 * a.lhs and abs(a.rhs - b.rhs) <= 1e-12 * a.rhs
    M = np.full((4, 2), 0.3)
    da = d.add_family(d.DiscreteInstance(sp, inst.vectors, fam, d.Slack(M)))
    cb = cont_add_family(f, fam, SlackFunction.piecewise_constant(M))
    assert abs(da.lhs - cb.lhs) <= 1e-12 * da.lhs and abs(da.rhs - cb.rhs) <= 1e-12 * da.rhs


def test_kinked_norm_is_integrated_exactly():
    # ‖(t, 1 − t)‖_1 on [0, 2] has a kink at t = 1; ∫ = 1 + 2
    f = c.polynomial(lp(1, 2), [[0, 1], [1, -1]], 0.0, 2.0)
    assert abs(integrate_scalar(f, lambda ts, X: np.abs(X).sum(axis=1)) - 3.0) <= 1e-12
