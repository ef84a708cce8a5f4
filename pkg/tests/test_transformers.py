import math

import numpy as np
import pytest

from trirev.errors import ContractViolation, HypothesisViolation, UnsupportedStructure
from trirev.spaces import lp
from trirev.transformers import (BallHypothesis, BandHypothesis, ball_equality_witness,
                                 ball_to_margin, ball_to_slack, band_to_margin, band_to_slack)

SP = lp(2, 2)


def _ball_points(center, radius, k=10_000, seed=0):
    """Uniform points of a real ℓ2 ball, plus its boundary circle (the worst case)."""
    rng = np.random.default_rng(seed)
    c = np.asarray(center, dtype=float)
    d = c.size
    g = rng.standard_normal((k, d))
    g /= np.linalg.norm(g, axis=1)[:, None]
    rad = radius * rng.uniform(size=k) ** (1 / d)
    th = np.linspace(0, 2 * np.pi, 4096)
    rim = c + radius * np.stack([np.cos(th), np.sin(th)], axis=1)
    return np.vstack([c + rad[:, None] * g, rim])


def _margin_holds(X, e, r):
    return np.all(X @ e - r * np.linalg.norm(X, axis=1) >= -1e-12)


def _slack_holds(X, e, s):
    return np.all(np.linalg.norm(X, axis=1) * np.linalg.norm(e) - X @ e <= s + 1e-12)


def test_ball_to_margin_example():
    r = ball_to_margin(BallHypothesis(SP, [1, 0], 0.6))
    assert math.isclose(r, 0.8, rel_tol=1e-14)
    assert _margin_holds(_ball_points([1, 0], 0.6), np.array([1.0, 0]), r)


def test_ball_to_margin_trivial_and_error():
    assert ball_to_margin(BallHypothesis(SP, [3, 4], 0.0)) == 5.0
    with pytest.raises(HypothesisViolation):
        ball_to_margin(BallHypothesis(SP, [1, 0], 1.0))


@pytest.mark.parametrize("m,M,want", [(2.0, 2.0, 1.0), (1.0, 4.0, 0.8), (1.0, 9.0, 0.6)])
def test_band_to_margin(m, M, want):
    h = BandHypothesis(SP, [1, 0], m, M)
    r = band_to_margin(h)
    assert math.isclose(r, want, rel_tol=1e-14)
    b = h.as_ball()
    assert _margin_holds(_ball_points(b.center.real, b.radius), np.array([1.0, 0]), r)


def test_band_needs_positive_lower():
    with pytest.raises(ContractViolation):
        BandHypothesis(SP, [1, 0], 0.0, 1.0)
    with pytest.raises(ContractViolation):
        BandHypothesis(SP, [1, 0], 2.0, 1.0)


@pytest.mark.parametrize("rad,want", [(0.5, 0.125), (0.0, 0.0), (1.0, 0.5)])
def test_ball_to_slack(rad, want):
    assert ball_to_slack(rad) == want
    if rad > 0:
        assert _slack_holds(_ball_points([0, 1], rad), np.array([0, 1.0]), want)


def test_ball_to_slack_negative():
    with pytest.raises(ContractViolation):
        ball_to_slack(-0.1)


@pytest.mark.parametrize("m,M,y,want", [(2.0, 2.0, [1, 0], 0.0), (1.0, 3.0, [1, 0], 0.25),
                                        (1.0, 2.0, [2, 0], 1 / 3)])
def test_band_to_slack(m, M, y, want):
    h = BandHypothesis(SP, y, m, M)
    s = band_to_slack(h)
    assert math.isclose(s, want, rel_tol=1e-14, abs_tol=0)
    b = h.as_ball()
    if b.radius > 0:
        assert _slack_holds(_ball_points(b.center.real, b.radius), np.array(y, float), s)


def test_band_ball_form_matches_inner_product_form():
    h = BandHypothesis(SP, [0.6, 0.8], 1.0, 3.0)
    y = np.array([0.6, 0.8])
    X = _ball_points(h.as_ball().center.real, h.as_ball().radius, 2000, seed=4)
    inside = h.contains(X)
    # Re<My − x, x − my> ≥ 0
    ip = np.einsum("ij,ij->i", 3.0 * y - X, X - 1.0 * y)
    assert np.all(ip[inside] >= -1e-12)


def test_equality_witness():
    x = ball_equality_witness(SP, [1, 0], 0.6)
    assert np.allclose(x, [0.64, 0.48], atol=1e-15) or np.allclose(x, [0.64, -0.48], atol=1e-15)
    nx = np.linalg.norm(x)
    assert abs(np.linalg.norm(x - [1, 0]) - 0.6) <= 1e-12
    assert abs(nx ** 2 + 0.36 - 1.0) <= 1e-12
    assert abs(x[0].real - nx * math.sqrt(1 - 0.36)) <= 1e-12


def test_monotonicity():
    rs = [ball_to_margin(BallHypothesis(SP, [2, 0], t)) for t in np.linspace(0, 1.99, 50)]
    assert all(a > b for a, b in zip(rs, rs[1:]))
    for M in (1.0, 1.5, 3.0, 10.0):
        r = band_to_margin(BandHypothesis(SP, [0, 2], 1.0, M))
        assert r <= 2.0 and ((r == 2.0) == (M == 1.0))


def test_lemmas_only_on_hilbert():
    with pytest.raises(UnsupportedStructure):
        BallHypothesis(lp(3, 2), [1, 0], 0.5)
    with pytest.raises(UnsupportedStructure):
        BandHypothesis(lp(1, 2), [1, 0], 1, 2)
