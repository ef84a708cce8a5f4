import math

import numpy as np
import pytest

from trirev.errors import ContractViolation, UnsupportedStructure
from trirev.spaces import (INF, Tolerance, cmod, dual_exponent, exponent, inner, lp, norm,
                           sip_lp)


def test_cmod_inf_of_one_plus_i():
    assert norm(cmod(INF), [1 + 1j]) == 1.0


@pytest.mark.parametrize("p", [1, 1.5, 2, 3, 7.25])
def test_cmod_2p_of_one_plus_i(p):
    assert math.isclose(norm(cmod(2 * p), [1 + 1j]), 2 ** (1 / (2 * p)), rel_tol=1e-14)


def test_zero_and_l1():
    for sp in (lp(1, 3), lp(INF, 2, "complex"), cmod(3)):
        assert norm(sp, np.zeros(sp.dim)) == 0.0
    assert norm(lp(1, 2), [3, -4]) == 7.0


def test_cmod_is_a_real_lp_plane():
    z = 0.3 - 1.7j
    for s in (1.0, 2.5, 4.0):
        assert math.isclose(norm(cmod(s), [z]), (abs(z.real) ** s + abs(z.imag) ** s) ** (1 / s))
    assert norm(cmod(INF), [z]) == 1.7


def test_dimension_mismatch():
    with pytest.raises(ContractViolation):
        norm(lp(2, 3), [1, 2])


def test_nonfinite_rejected():
    with pytest.raises(ContractViolation):
        norm(lp(2, 2), [np.nan, 0])
    with pytest.raises(ContractViolation):
        norm(lp(2, 2), [np.inf, 0])


def test_complex_entry_in_real_space():
    with pytest.raises(ContractViolation):
        norm(lp(2, 1), [1j])


def test_cmod_needs_dim_one_complex():
    from trirev.spaces import CMod, SpaceSpec
    with pytest.raises(ContractViolation):
        SpaceSpec(2, "complex", CMod(2))
    with pytest.raises(ContractViolation):
        SpaceSpec(1, "real", CMod(2))


def test_exponent_parsing():
    assert exponent("inf") is INF and exponent(math.inf) is INF
    assert exponent("2.5") == 2.5
    for bad in (0.5, "x", -1, float("nan")):
        with pytest.raises(ContractViolation):
            exponent(bad)
    assert dual_exponent(1) is INF and dual_exponent(INF) == 1.0 and dual_exponent(3) == 1.5


def test_inner_examples():
    sp = lp(2, 2)
    assert inner(sp, [1, 0], [0, 1]) == 0
    assert math.isclose(inner(sp, [0.6, 0.8], [0.6, 0.8]).real, 1.0)
    assert inner(lp(2, 1, "complex"), [1j], [1]) == 1j
    # conj on the second slot
    assert inner(lp(2, 1, "complex"), [1], [1j]) == -1j


def test_inner_needs_hilbert():
    with pytest.raises(UnsupportedStructure):
        inner(lp(3, 2), [1, 0], [0, 1])
    with pytest.raises(UnsupportedStructure):
        inner(cmod(2), [1], [1])


def test_sip_p2_is_inner():
    sp = lp(2, 3, "complex")
    x, y = [1 + 2j, -1, 0.5j], [0.3, 2 - 1j, 1j]
    assert np.isclose(sip_lp(sp, x, y), inner(sp, x, y))


def test_sip_p3_generates_norm():
    sp = lp(3, 2)
    x = [1, -2]
    # independent: ‖(1,-2)‖_3 = 9^{1/3}
    assert math.isclose(sip_lp(sp, x, x).real, 9 ** (2 / 3), rel_tol=1e-13)


def test_sip_zero_cases():
    sp = lp(1.5, 3)
    assert sip_lp(sp, [0, 0, 0], [1, 2, 3]) == 0
    assert sip_lp(sp, [1, 2, 3], [0, 0, 0]) == 0
    # y_j = 0 with p < 2 contributes nothing
    assert np.isclose(sip_lp(sp, [5, 1, 0], [0, 1, 0]), 1.0)


@pytest.mark.parametrize("p", [1, INF])
def test_sip_not_unique_at_endpoints(p):
    with pytest.raises(UnsupportedStructure):
        sip_lp(lp(p, 2), [1, 0], [1, 1])


def test_tolerance_policy():
    t = Tolerance(1e-9, 1e-7)
    assert t.leq(1.0 + 5e-8, 1.0)
    assert not t.leq(1.0 + 2e-7, 1.0)
    assert t.excess(2.0, 1.0) > 0 > t.excess(1.0, 2.0)
    assert t.close(1e-10, 0.0)
    with pytest.raises(ContractViolation):
        Tolerance(0, 1e-7)
