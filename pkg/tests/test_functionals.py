import math

import numpy as np
import pytest

from trirev.errors import ContractViolation
from trirev.functionals import (Functional, FunctionalFamily, SearchConfig, apply, family_cap,
                                family_constant, family_objective, gram_eigen, op_norm,
                                power_iteration, sphere_search)
from trirev.gen import random_family
from trirev.rng import stream
from trirev.spaces import INF, cmod, lp, norm


def _circle(p, k=200_000):
    """Dense sample of the unit sphere of cmod(p); k divisible by 8 keeps the diagonals."""
    th = np.linspace(0, 2 * np.pi, k, endpoint=False)
    z = np.cos(th) + 1j * np.sin(th)
    if p is INF:
        return z / np.maximum(np.abs(z.real), np.abs(z.imag))
    return z / (np.abs(z.real) ** p + np.abs(z.imag) ** p) ** (1 / p)


def test_apply_examples():
    sp = lp(2, 2)
    assert apply(Functional(sp, [1, 0]), [0.6, 0.8]) == 0.6
    assert apply(Functional(cmod(2), [2]), [1 + 1j]) == 2 + 2j
    assert apply(Functional(sp, [0, 0]), [3, -7]) == 0


def test_apply_is_conjugate_free():
    sp = lp(2, 2, "complex")
    F = Functional(sp, [1j, 2])
    assert F([1j, 0]) == -1
    assert Functional.from_inner(sp, [1j, 0])([1j, 0]) == 1


def test_apply_dimension_mismatch():
    with pytest.raises(ContractViolation):
        apply(Functional(lp(2, 2), [1, 0]), [1, 0, 0])


@pytest.mark.parametrize("a", [3.0, 3j, -1.8 + 2.4j])
def test_cmod1_closed_form(a):
    assert math.isclose(op_norm(Functional(cmod(1), [a])).value, abs(a), rel_tol=1e-12)


def test_cmod_inf_closed_form():
    d = np.exp(0.4j)
    assert math.isclose(op_norm(Functional(cmod(INF), [d])).value, math.sqrt(2), rel_tol=1e-12)


def test_cmod_2p_closed_form():
    assert math.isclose(op_norm(Functional(cmod(4), [1])).value, 2 ** 0.25, rel_tol=1e-12)


@pytest.mark.parametrize("s", [1.0, 1.5, 2.0, 3.0, 4.0, 6.0, INF])
def test_cmod_norm_against_dense_circle(s):
    # |F(z)| = |a||z| maximized over the unit circle of the p-modulus
    a = 0.7 - 1.1j
    brute = float(np.max(np.abs(a * _circle(s))))
    assert math.isclose(op_norm(Functional(cmod(s), [a])).value, brute, rel_tol=1e-9)


def test_lp_dual_norm():
    assert op_norm(Functional(lp(2, 2), [3, 4])).value == 5.0
    assert op_norm(Functional(lp(1, 3), [1, -5, 2])).value == 5.0
    assert op_norm(Functional(lp(INF, 3), [1, -5, 2])).value == 8.0


def test_lp2_norm_by_grid():
    th = np.linspace(0, 2 * np.pi, 100_001)
    grid = float(np.max(np.abs(3 * np.cos(th) + 4 * np.sin(th))))
    assert abs(op_norm(Functional(lp(2, 2), [3, 4])).value - grid) < 1e-6


def test_certificate_attains_norm():
    for sp, rep in [(lp(3, 3), [1, -2, 0.5]), (lp(1.5, 2, "complex"), [1j, 2 - 1j]),
                    (cmod(4), [0.5 + 1j]), (cmod(INF), [1 - 2j])]:
        F = Functional(sp, rep)
        est = op_norm(F)
        x = est.certificate
        assert math.isclose(abs(F(x)) / norm(sp, x), est.value, rel_tol=1e-10)


def test_gram_oracles():
    sp = lp(2, 2)
    I = FunctionalFamily.from_vectors(sp, [[1, 0], [0, 1]])
    assert math.isclose(gram_eigen(I).value, 1.0, rel_tol=1e-13)
    D = FunctionalFamily.from_vectors(sp, [[1, 0], [1, 0]])
    assert math.isclose(gram_eigen(D).value, math.sqrt(2), rel_tol=1e-13)


def test_gram_eigen_vs_numpy_eigvalsh():
    rng = np.random.default_rng(3)
    for _ in range(20):
        n, m = rng.integers(1, 9, size=2)
        E = rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))
        fam = FunctionalFamily.from_vectors(lp(2, int(n), "complex"), E)
        oracle = math.sqrt(np.linalg.eigvalsh(E.conj() @ E.T).max())
        assert math.isclose(gram_eigen(fam).value, oracle, rel_tol=1e-9)


def test_power_iteration_diagonal():
    lam, v = power_iteration(np.diag([1.0, 4.0, 2.0]), np.ones(3))
    assert math.isclose(lam, 4.0, rel_tol=1e-12) and abs(abs(v[1]) - 1) < 1e-6


def test_family_constant_single_member():
    rng = stream(5, "single")
    for sp in (lp(2, 3), lp(3, 2, "complex"), lp(INF, 3), cmod(4)):
        F = random_family(sp, rng, 1, unit=False)[0]
        for p in (1.0, 2.0, INF):
            c = family_constant(FunctionalFamily.of(F), p).value
            assert math.isclose(c, op_norm(F).value, rel_tol=1e-6)


def test_cinf_orthonormal_by_grid():
    sp = lp(2, 2)
    fam = FunctionalFamily.from_vectors(sp, [[1, 0], [0, 1]])
    th = np.linspace(0, 2 * np.pi, 100_001)
    grid = float(np.max(np.maximum(np.abs(np.cos(th)), np.abs(np.sin(th)))))
    assert math.isclose(family_constant(fam, INF).value, grid, rel_tol=1e-9)


def test_cp_vs_dense_grid_lp3():
    # m=2 in the real plane with the l3 norm: brute-force sup over a dense circle
    sp = lp(3, 2)
    fam = FunctionalFamily.from_representers(sp, [[1.0, 0.3], [-0.2, 0.9]])
    th = np.linspace(0, 2 * np.pi, 400_001)
    X = np.stack([np.cos(th), np.sin(th)], axis=1)
    X /= (np.abs(X) ** 3).sum(axis=1, keepdims=True) ** (1 / 3)
    V = np.abs(X @ fam.matrix.T.real)
    for p, agg in ((1.0, V.sum(1)), (2.0, np.sqrt((V ** 2).sum(1))), (INF, V.max(1))):
        est = family_constant(fam, p).value
        assert abs(est - agg.max()) <= 1e-6 * agg.max()


def test_estimate_is_capped_and_certified():
    rng = stream(11, "caps")
    for sp in (lp(1, 3), lp(3, 4, "complex"), lp(INF, 2)):
        fam = random_family(sp, rng, 3, unit=False)
        for p in (1.0, 3.0, INF):
            est = family_constant(fam, p)
            assert est.value <= family_cap(fam, p) + 1e-9
            assert math.isclose(min(family_objective(fam, p, est.certificate), est.cap), est.value)


def test_search_is_deterministic():
    fam = random_family(lp(3, 4, "complex"), stream(1, "det"), 3)
    cfg = SearchConfig(starts=8, iters=100, seed=9)
    a, b = sphere_search(fam, 2.5, cfg), sphere_search(fam, 2.5, cfg)
    assert a.value == b.value and np.array_equal(a.certificate, b.certificate)


def test_family_validation():
    with pytest.raises(ContractViolation):
        FunctionalFamily(())
    with pytest.raises(ContractViolation):
        FunctionalFamily((Functional(lp(2, 2), [1, 0]), Functional(lp(2, 3), [1, 0, 0])))
    with pytest.raises(ContractViolation):
        SearchConfig(starts=0)


def test_orthogonality_flags():
    sp = lp(2, 3)
    on = FunctionalFamily.from_vectors(sp, np.eye(3)[:2])
    og = FunctionalFamily.from_vectors(sp, [[2, 0, 0], [0, 1, 0]])
    no = FunctionalFamily.from_vectors(sp, [[1, 1, 0], [0, 1, 0]])
    assert on.orthonormal and on.orthogonal
    assert og.orthogonal and not og.orthonormal
    assert not no.orthogonal
    assert not FunctionalFamily.from_representers(lp(3, 3), np.eye(3)[:2]).orthogonal
