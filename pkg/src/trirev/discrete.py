"""Finite-sum reverse triangle inequalities: checks, equality diagnostics, constructors."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .errors import (ConstructionFailure, ContractViolation, DegenerateInstance,
                     HypothesisViolation)
from .functionals import (DEFAULT_SEARCH, Functional, FunctionalFamily, SearchConfig,
                          family_constant, family_norms, local_ascent, op_norm, re_maximizer)
from .spaces import (CMod, DEFAULT_TOL, INF, Field, Lp, SpaceSpec, Tolerance, as_vectors,
                     exponent, exponent_label, lp_norm_abs, norms)


class TheoremId(str, enum.Enum):
    DM_SINGLE = "DM_SINGLE"
    DM_FAMILY = "DM_FAMILY"
    MULT_SUMFUNC = "MULT_SUMFUNC"
    MULT_CINF = "MULT_CINF"
    MULT_CP = "MULT_CP"
    ADD_SINGLE = "ADD_SINGLE"
    ADD_FAMILY = "ADD_FAMILY"
    ADD_CINF = "ADD_CINF"
    ADD_CP = "ADD_CP"


MULTIPLICATIVE = {TheoremId.DM_SINGLE, TheoremId.DM_FAMILY, TheoremId.MULT_SUMFUNC,
                  TheoremId.MULT_CINF, TheoremId.MULT_CP}


@dataclass(frozen=True)
class Margin:
    """Re F_k(x) ≥ r_k ‖x‖."""

    r: tuple

    def __post_init__(self):
        r = tuple(float(v) for v in np.atleast_1d(self.r))
        if not r or any(not (math.isfinite(v) and v >= 0) for v in r):
            raise ContractViolation("margins must be finite and nonnegative")
        object.__setattr__(self, "r", r)


@dataclass(frozen=True, eq=False)
class Slack:
    """‖x_i‖ − Re F_k(x_i) ≤ M_ik, stored as an (n, m) matrix."""

    M: np.ndarray

    def __post_init__(self):
        M = np.array(self.M, dtype=float)
        if M.ndim == 1:
            M = M.reshape(-1, 1)
        if M.ndim != 2 or not np.all(np.isfinite(M)) or np.any(M < 0):
            raise ContractViolation("slack entries must be finite and nonnegative")
        M.setflags(write=False)
        object.__setattr__(self, "M", M)


Hypothesis = Union[Margin, Slack]


@dataclass(frozen=True, eq=False)
class DiscreteInstance:
    space: SpaceSpec
    vectors: np.ndarray
    family: FunctionalFamily
    hypothesis: Hypothesis

    def __post_init__(self):
        xs = as_vectors(self.space, self.vectors).copy()
        xs.setflags(write=False)
        object.__setattr__(self, "vectors", xs)
        fam = FunctionalFamily.of(self.family)
        object.__setattr__(self, "family", fam)
        if fam.space != self.space:
            raise ContractViolation("family and vectors live in different spaces")
        h = self.hypothesis
        if isinstance(h, Margin):
            if len(h.r) != fam.m:
                raise ContractViolation(f"{len(h.r)} margins for {fam.m} functionals")
        elif isinstance(h, Slack):
            if h.M.shape != (xs.shape[0], fam.m):
                raise ContractViolation(f"slack shape {h.M.shape} != ({xs.shape[0]}, {fam.m})")
        else:
            raise ContractViolation("hypothesis must be Margin or Slack")

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    def total(self) -> np.ndarray:
        return self.vectors.sum(axis=0)

    def scaled(self, lam: float) -> "DiscreteInstance":
        h = self.hypothesis
        if isinstance(h, Slack):
            h = Slack(h.M * lam)
        return DiscreteInstance(self.space, self.vectors * lam, self.family, h)


@dataclass
class EqualityDiagnosis:
    conditions: dict
    gap: float
    note: str = ""

    @property
    def holds(self) -> bool:
        return bool(self.conditions) and all(self.conditions.values())


@dataclass
class CheckResult:
    theorem_id: str
    lhs: float
    rhs: float
    passed: bool
    margin_violations: list
    equality: EqualityDiagnosis
    extras: dict = field(default_factory=dict)
    tol: Tolerance = DEFAULT_TOL

    @property
    def hypothesis_ok(self) -> bool:
        return not self.margin_violations

    @property
    def excess(self) -> float:
        return self.tol.excess(self.lhs, self.rhs)


def _result(tid, lhs, rhs, viol, conds, tol, extras, note=""):
    lhs, rhs = float(lhs), float(rhs)
    diag = EqualityDiagnosis({k: bool(v) for k, v in conds.items()}, abs(lhs - rhs), note)
    return CheckResult(str(tid.value if isinstance(tid, enum.Enum) else tid), lhs, rhs,
                       tol.leq(lhs, rhs), viol, diag, extras, tol)


# ---- hypothesis checks -------------------------------------------------------

def margin_violations(space, xs, fam: FunctionalFamily, r, tol: Tolerance = DEFAULT_TOL):
    """1-based (i, k) with Re F_k(x_i) < r_k‖x_i‖ beyond tolerance."""
    nx = norms(space, xs)
    re = fam.values_many(xs).real
    out = []
    for i in range(len(nx)):
        for k, rk in enumerate(r):
            if not tol.leq(rk * nx[i], re[i, k]):
                out.append((i + 1, k + 1))
    return out


def check_margin(inst: DiscreteInstance, tol: Tolerance = DEFAULT_TOL) -> list:
    if not isinstance(inst.hypothesis, Margin):
        raise ContractViolation("check_margin needs a Margin hypothesis")
    return margin_violations(inst.space, inst.vectors, inst.family, inst.hypothesis.r, tol)


def deficits(space, xs, fam: FunctionalFamily) -> np.ndarray:
    """(n, m) matrix of ‖x_i‖ − Re F_k(x_i)."""
    return norms(space, xs)[:, None] - fam.values_many(xs).real


def check_slack(inst: DiscreteInstance, tol: Tolerance = DEFAULT_TOL) -> list:
    if not isinstance(inst.hypothesis, Slack):
        raise ContractViolation("check_slack needs a Slack hypothesis")
    d = deficits(inst.space, inst.vectors, inst.family)
    M = inst.hypothesis.M
    return [(i + 1, k + 1) for i in range(d.shape[0]) for k in range(d.shape[1])
            if not tol.leq(d[i, k], M[i, k])]


def _require_unit(F: Functional, tol: Tolerance, what="functional"):
    v = op_norm(F).value
    if not tol.close(v, 1.0):
        raise HypothesisViolation(f"{what} must have unit norm, has {v!r}")


def _need(inst, kind):
    if not isinstance(inst.hypothesis, kind):
        raise ContractViolation(f"this theorem needs a {kind.__name__} hypothesis")


def _strict_center(F: Functional, space: SpaceSpec):
    """The e with F = [·, e] when the space is strictly convex and F is unit."""
    if not (space.strictly_convex and not space.is_cmod):
        return None
    c = F.riesz_center()
    if c is None:
        c = op_norm(F).certificate
    return c


# ---- multiplicative theorems --------------------------------------------------

def dm_single(inst: DiscreteInstance, which: str = "norm", tol: Tolerance = DEFAULT_TOL) -> CheckResult:
    """r Σ‖x_i‖ ≤ ‖Σ x_i‖ for a unit functional with Re F(x_i) ≥ r‖x_i‖.

    ``which='sip'`` takes F = [·, e] on lp(p), 1<p<inf, and adds the
    strict-convexity equality condition Σx = r(Σ‖x‖)e.
    """
    _need(inst, Margin)
    fam = inst.family
    if fam.m != 1:
        raise ContractViolation("dm_single needs exactly one functional")
    F = fam[0]
    sp = inst.space
    if which not in ("norm", "sip"):
        raise ContractViolation("which must be 'norm' or 'sip'")
    if which == "sip":
        if F.center is None or sp.is_cmod or not sp.strictly_convex:
            raise ContractViolation("sip form needs F = [·, e] on lp(p), 1<p<inf")
    _require_unit(F, tol)
    r = inst.hypothesis.r[0]
    viol = check_margin(inst, tol)
    nx = norms(sp, inst.vectors)
    S = inst.total()
    nS = float(norms(sp, S[None])[0])
    tot = float(nx.sum())
    FS = F(S)
    lhs, rhs = r * tot, nS
    conds = {
        "value_equals_margin_total": tol.close(FS, r * tot),
        "value_equals_norm_of_sum": tol.close(FS, nS),
    }
    e = _strict_center(F, sp)
    if e is not None:
        conds["sum_is_scaled_center"] = tol.close_vec(S, r * tot * e)
    return _result(TheoremId.DM_SINGLE, lhs, rhs, viol, conds, tol,
                   {"form": which, "margin": r})


def dm_family(inst: DiscreteInstance, tol: Tolerance = DEFAULT_TOL,
              search: SearchConfig = DEFAULT_SEARCH) -> CheckResult:
    """(Σr_k²/c)^{1/2} Σ‖x_i‖ ≤ ‖Σx_i‖ with c = sup Σ|F_k x|²/‖x‖²."""
    _need(inst, Margin)
    fam = inst.family
    for F in fam:
        _require_unit(F, tol, "every family member")
    r = np.array(inst.hypothesis.r)
    est = family_constant(fam, 2.0, search)
    c = est.value ** 2
    viol = check_margin(inst, tol)
    sp = inst.space
    tot = float(norms(sp, inst.vectors).sum())
    S = inst.total()
    nS = float(norms(sp, S[None])[0])
    FS = fam.values(S)
    lhs = math.sqrt(float((r ** 2).sum()) / c) * tot if c > 0 else 0.0
    conds = {
        "each_value_equals_margin_total": all(tol.close(FS[k], r[k] * tot) for k in range(fam.m)),
        "square_sum_attains_constant": tol.close(float((np.abs(FS) ** 2).sum()), c * nS * nS),
    }
    extras = {"c": c, "c_method": est.method}
    if sp.is_hilbert and fam.orthonormal:
        E = fam.centers()
        conds["sum_is_weighted_center_sum"] = tol.close_vec(S, tot * (r[:, None] * E).sum(axis=0))
        extras["orthonormal_lhs"] = math.sqrt(float((r ** 2).sum())) * tot
    return _result(TheoremId.DM_FAMILY, lhs, nS, viol, conds, tol, extras)


def mult_sumfunc(inst: DiscreteInstance, tol: Tolerance = DEFAULT_TOL) -> CheckResult:
    """Σ‖x_i‖ ≤ (‖ΣF_k‖/Σr_k) ‖Σx_i‖."""
    _need(inst, Margin)
    fam = inst.family
    r = np.array(inst.hypothesis.r)
    rs = float(r.sum())
    if not rs > 0:
        raise ContractViolation("need Σ r_k > 0")
    sp = inst.space
    Fs = fam.sum_functional()
    K = op_norm(Fs).value
    viol = check_margin(inst, tol)
    tot = float(norms(sp, inst.vectors).sum())
    S = inst.total()
    nS = float(norms(sp, S[None])[0])
    FsS = Fs(S)
    coarse = float(family_norms(fam).sum()) / rs * nS
    conds = {
        "sum_value_equals_margin_total": tol.close(FsS, rs * tot),
        "sum_value_equals_norm_product": tol.close(FsS, K * nS),
    }
    if sp.is_hilbert:
        E = np.conj(Fs.representer)
        ne2 = float(np.vdot(E, E).real)
        if ne2 > 0:
            conds["sum_is_scaled_center_sum"] = tol.close_vec(S, rs / ne2 * tot * E)
    return _result(TheoremId.MULT_SUMFUNC, tot, K / rs * nS, viol, conds, tol,
                   {"coarse_rhs": coarse, "sum_norm": K})


def mult_cp(inst: DiscreteInstance, p, tol: Tolerance = DEFAULT_TOL,
            search: SearchConfig = DEFAULT_SEARCH) -> CheckResult:
    """Σ‖x_i‖/‖Σx_i‖ ≤ c_inf/max r_k, or c_p/(Σr_k^p)^{1/p}."""
    _need(inst, Margin)
    p = exponent(p)
    fam = inst.family
    r = np.array(inst.hypothesis.r)
    if not r.max() > 0:
        raise ContractViolation("need some r_k > 0")
    sp = inst.space
    S = inst.total()
    nS = float(norms(sp, S[None])[0])
    tot = float(norms(sp, inst.vectors).sum())
    if not nS > 1e-300 or nS <= 1e-14 * max(tot, 1e-300):
        raise DegenerateInstance("Σx_i is numerically zero")
    est = family_constant(fam, p, search)
    c = est.value
    viol = check_margin(inst, tol)
    reFS = fam.values(S).real
    Fn = family_norms(fam)
    lhs = tot / nS
    conds = {"each_real_value_equals_margin_total":
             all(tol.close(reFS[k], r[k] * tot) for k in range(fam.m))}
    if p is INF:
        tid = TheoremId.MULT_CINF
        rhs = c / float(r.max())
        coarse = float(Fn.max()) / float(r.max())
        conds["max_real_value_attains_constant"] = tol.close(float(reFS.max()), c * nS)
    else:
        tid = TheoremId.MULT_CP
        rhs = c / float((r ** p).sum()) ** (1.0 / p)
        coarse = (float((Fn ** p).sum()) / float((r ** p).sum())) ** (1.0 / p)
        pos = np.maximum(reFS, 0.0)
        conds["power_sum_attains_constant"] = tol.close(
            float((pos ** p).sum()) ** (1.0 / p), c * nS)
    return _result(tid, lhs, rhs, viol, conds, tol,
                   {"p": exponent_label(p), "c": c, "c_method": est.method, "c_cap": est.cap,
                    "coarse_rhs": coarse})


# ---- additive theorems --------------------------------------------------------

def add_single(inst: DiscreteInstance, tol: Tolerance = DEFAULT_TOL) -> CheckResult:
    """Σ‖x_i‖ − ‖Σx_i‖ ≤ Σk_i when |F(x)| ≤ ‖x‖ and ‖x_i‖ − Re F(x_i) ≤ k_i."""
    _need(inst, Slack)
    fam = inst.family
    if fam.m != 1:
        raise ContractViolation("add_single needs exactly one functional")
    F = fam[0]
    sp = inst.space
    nF = op_norm(F).value
    if not tol.leq(nF, 1.0):
        raise HypothesisViolation(f"|F(x)| ≤ ‖x‖ fails: ‖F‖ = {nF!r}")
    nx = norms(sp, inst.vectors)
    Fx = fam.values_many(inst.vectors)[:, 0]
    if not all(tol.leq(abs(Fx[i]), nx[i]) for i in range(inst.n)):
        raise HypothesisViolation("|F(x_i)| ≤ ‖x_i‖ fails on the instance")
    viol = check_slack(inst, tol)
    k = inst.hypothesis.M[:, 0]
    tot = float(nx.sum())
    S = inst.total()
    nS = float(norms(sp, S[None])[0])
    ks = float(k.sum())
    FS = F(S)
    conds = {
        "value_equals_norm_of_sum": tol.close(FS, nS),
        "value_equals_norm_total_minus_slack": tol.close(FS, tot - ks),
    }
    e = _strict_center(F, sp) if tol.close(nF, 1.0) else None
    if e is not None:
        conds["norm_total_dominates_slack"] = tol.leq(ks, tot)
        conds["sum_is_scaled_center"] = tol.close_vec(S, (tot - ks) * e)
    return _result(TheoremId.ADD_SINGLE, tot - nS, ks, viol, conds, tol, {"functional_norm": nF})


def add_family(inst: DiscreteInstance, tol: Tolerance = DEFAULT_TOL) -> CheckResult:
    """Σ‖x_i‖ ≤ ‖(1/m)ΣF_k‖ ‖Σx_i‖ + (1/m)ΣΣM_ik."""
    _need(inst, Slack)
    fam = inst.family
    sp = inst.space
    m = fam.m
    avg = fam.mean_functional()
    A = op_norm(avg).value
    viol = check_slack(inst, tol)
    M = inst.hypothesis.M
    mbar = float(M.sum()) / m
    tot = float(norms(sp, inst.vectors).sum())
    S = inst.total()
    nS = float(norms(sp, S[None])[0])
    aS = avg(S)
    conds = {
        "mean_value_attains_norm": tol.close(aS, A * nS),
        "mean_value_equals_norm_total_minus_slack": tol.close(aS, tot - mbar),
    }
    extras = {"mean_norm": A, "slack_mean": mbar}
    Fn = family_norms(fam)
    if np.all(np.abs(Fn - 1.0) <= 1e-12):
        extras["unit_norm_rhs"] = nS + mbar
    if sp.is_hilbert:
        E = np.conj(fam.matrix).sum(axis=0)
        ne2 = float(np.vdot(E, E).real)
        conds["norm_total_dominates_slack"] = tol.leq(mbar, tot)
        if ne2 > 0:
            conds["sum_is_scaled_center_sum"] = tol.close_vec(S, m * (tot - mbar) / ne2 * E)
        if fam.orthogonal:
            extras["orthogonal_rhs"] = math.sqrt(float((Fn ** 2).sum())) / m * nS + mbar
        if fam.orthonormal:
            extras["orthonormal_rhs"] = nS / math.sqrt(m) + mbar
    return _result(TheoremId.ADD_FAMILY, tot, A * nS + mbar, viol, conds, tol, extras)


def add_cp(inst: DiscreteInstance, p, tol: Tolerance = DEFAULT_TOL,
           search: SearchConfig = DEFAULT_SEARCH) -> CheckResult:
    """Σ‖x_i‖ ≤ c_inf‖Σx‖ + (1/m)ΣΣM, or m^{-1/p} c_p‖Σx‖ + (1/m)ΣΣM."""
    _need(inst, Slack)
    p = exponent(p)
    fam = inst.family
    sp = inst.space
    m = fam.m
    est = family_constant(fam, p, search)
    c = est.value
    viol = check_slack(inst, tol)
    mbar = float(inst.hypothesis.M.sum()) / m
    tot = float(norms(sp, inst.vectors).sum())
    S = inst.total()
    nS = float(norms(sp, S[None])[0])
    Fn = family_norms(fam)
    if p is INF:
        tid = TheoremId.ADD_CINF
        rhs = c * nS + mbar
        coarse = float(Fn.max()) * nS + mbar
    else:
        tid = TheoremId.ADD_CP
        rhs = m ** (-1.0 / p) * c * nS + mbar
        coarse = (float((Fn ** p).sum()) / m) ** (1.0 / p) * nS + mbar
    return _result(tid, tot, rhs, viol, {}, tol,
                   {"p": exponent_label(p), "c": c, "c_method": est.method, "coarse_rhs": coarse},
                   note="no equality characterization")


def check(tid, inst: DiscreteInstance, p=None, tol: Tolerance = DEFAULT_TOL,
          search: SearchConfig = DEFAULT_SEARCH, which: str = "norm") -> CheckResult:
    """Dispatch on the theorem id."""
    tid = TheoremId(tid)
    if tid is TheoremId.DM_SINGLE:
        return dm_single(inst, which, tol)
    if tid is TheoremId.DM_FAMILY:
        return dm_family(inst, tol, search)
    if tid is TheoremId.MULT_SUMFUNC:
        return mult_sumfunc(inst, tol)
    if tid is TheoremId.MULT_CINF:
        return mult_cp(inst, INF, tol, search)
    if tid is TheoremId.MULT_CP:
        return mult_cp(inst, 2.0 if p is None else p, tol, search)
    if tid is TheoremId.ADD_SINGLE:
        return add_single(inst, tol)
    if tid is TheoremId.ADD_FAMILY:
        return add_family(inst, tol)
    if tid is TheoremId.ADD_CINF:
        return add_cp(inst, INF, tol, search)
    return add_cp(inst, 2.0 if p is None else p, tol, search)


# ---- equality constructors -----------------------------------------------------

def _real_coords(space: SpaceSpec, x: np.ndarray) -> np.ndarray:
    if space.field is Field.REAL:
        return x.real.copy()
    return np.concatenate([x.real, x.imag])


def _from_real_coords(space: SpaceSpec, v: np.ndarray) -> np.ndarray:
    if space.field is Field.REAL:
        return v.astype(np.complex128)
    n = space.dim
    return v[:n] + 1j * v[n:]


def kernel_direction(space: SpaceSpec, funcs, xhat) -> Optional[np.ndarray]:
    """A nonzero v with Re F(v) = 0 for every F in ``funcs``, not parallel to xhat.

    Built from the coordinate vector with the largest projection onto the common
    real kernel, so simple instances get simple directions.
    """
    d = space.dim if space.field is Field.REAL else 2 * space.dim
    rows = [_real_coords(space, np.conj(F.representer)) for F in funcs]
    # Re(a·x) = <(Re a, −Im a), (Re x, Im x)>, i.e. real coords of conj(a)
    C = np.array(rows).reshape(len(rows), d)
    xh = _real_coords(space, np.asarray(xhat, dtype=np.complex128))
    if np.allclose(C @ xh, 0.0):
        C = np.vstack([C, xh])  # keep v off the line through xhat
    _, sv, Vt = np.linalg.svd(C)
    rank = int(np.sum(sv > 1e-12 * max(1.0, sv.max() if sv.size else 1.0)))
    N = Vt[rank:]
    if N.shape[0] == 0:
        return None
    P = N.T @ N
    best = int(np.argmax(np.linalg.norm(P, axis=0)))
    v = P[:, best]
    v = np.where(np.abs(v) < 1e-15, 0.0, v)
    return _from_real_coords(space, v / np.linalg.norm(v))


def _unit_offset(space: SpaceSpec, base: np.ndarray, v: np.ndarray) -> float:
    """t ≥ 0 with ‖base + t v‖ = 1, where ‖base‖ ≤ 1."""
    f = lambda t: float(norms(space, (base + t * v)[None])[0])
    if f(0.0) >= 1.0:
        return 0.0
    hi = 1.0
    while f(hi) < 1.0:
        hi *= 2.0
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) < 1.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-17 * hi:
            break
    return 0.5 * (lo + hi)


def mirrored_vectors(space: SpaceSpec, xhat, v, rho: float, n: int, scale: float = 1.0) -> np.ndarray:
    """Vectors ρx̂ ± t v of unit norm, weighted so the v-components cancel in the sum.

    With ρ = 1 (or no kernel direction) the vectors are positive multiples of x̂.
    """
    xhat = np.asarray(xhat, dtype=np.complex128)
    if n < 1:
        raise ContractViolation("need n ≥ 1")
    if rho >= 1.0 or v is None:
        if rho < 1.0:
            raise ConstructionFailure("no kernel direction to mirror around")
        return np.array([scale * (1.0 + 0.5 * i) * xhat for i in range(n)])
    if n == 1:
        raise ConstructionFailure("a single vector cannot be tight with margin below 1")
    base = rho * xhat
    tp = _unit_offset(space, base, v)
    tm = _unit_offset(space, base, -v)
    up, um = base + tp * v, base - tm * v
    tau = max(tp, tm)
    wp, wm = tm / tau, tp / tau  # wp·tp = wm·tm
    out = []
    j = 0
    rest = n
    if n % 2 == 1:
        s = scale
        out += [2 * s * wp * up, s * wm * um, s * wm * um]
        rest -= 3
        j += 1
    while rest > 0:
        s = scale * (1.0 + 0.5 * j)
        out += [s * wp * up, s * wm * um]
        rest -= 2
        j += 1
    return np.array(out)


def _aligned(space: SpaceSpec, x: np.ndarray, vals: np.ndarray) -> np.ndarray:
    """Rotate x (phase on complex lp, sign otherwise) so the largest |F_k(x)| is real positive."""
    k = int(np.argmax(np.abs(vals)))
    z = vals[k]
    if z == 0:
        return x
    if space.real_mode:
        return x * (1.0 if z.real >= 0 else -1.0)
    return x * (abs(z) / z)


def _margins_from(fam, xhat, rho, tol):
    re = fam.values(xhat).real
    if np.any(re < -tol.abs):
        raise ConstructionFailure(f"derived margins {re.tolist()} include negative values")
    r = tuple(float(rho * max(v, 0.0)) for v in re)
    if not max(r) > 0:
        raise ConstructionFailure("derived margins are all zero; the bound is vacuous")
    return r


def _certify(tid, inst, p, tol, search):
    res = check(tid, inst, p=p, tol=tol, search=search)
    if not (res.hypothesis_ok and res.equality.holds and tol.close(res.lhs, res.rhs)):
        raise ConstructionFailure(f"{TheoremId(tid).value}: parameters admit no equality instance",
                                  diagnosis=res)
    return inst


def equality_instance(theorem_id, params: dict) -> DiscreteInstance:
    """Build an instance attaining the bound of ``theorem_id``.

    params: ``family`` (FunctionalFamily, Functional or list), optional ``r``/``rho``
    (shrink factor in (0, 1]; mirrored pairs when below 1), ``n``, ``scale``,
    ``p`` (for the c_p forms), ``tol``, ``search``.
    """
    tid = TheoremId(theorem_id)
    if "family" not in params:
        raise ContractViolation("params need a 'family'")
    fam = FunctionalFamily.of(params["family"])
    sp = fam.space
    tol = params.get("tol", DEFAULT_TOL)
    search = params.get("search", DEFAULT_SEARCH)
    rho = float(params.get("rho", params.get("r", 1.0)))
    n = int(params.get("n", 2 if rho < 1 else 1))
    scale = float(params.get("scale", 1.0))
    p = params.get("p")
    if not 0.0 <= rho <= 1.0:
        raise ConstructionFailure(f"shrink factor {rho} outside [0, 1]")

    if tid in (TheoremId.ADD_CINF, TheoremId.ADD_CP):
        raise ConstructionFailure(f"{tid.value} has no equality characterization")

    if tid in (TheoremId.DM_SINGLE, TheoremId.ADD_SINGLE):
        if fam.m != 1:
            raise ContractViolation(f"{tid.value} needs one functional")
        F = fam[0]
        xhat = re_maximizer(F)
        if not tol.close(F(xhat), 1.0):
            raise ConstructionFailure("the functional does not attain a unit real value on the sphere")
        v = kernel_direction(sp, [F], xhat)
        xs = mirrored_vectors(sp, xhat, v, rho, n, scale)
        if tid is TheoremId.DM_SINGLE:
            inst = DiscreteInstance(sp, xs, fam, Margin((rho,)))
        else:
            inst = DiscreteInstance(sp, xs, fam, Slack(np.maximum(deficits(sp, xs, fam), 0.0)))
        return _certify(tid, inst, None, tol, search)

    if tid in (TheoremId.MULT_SUMFUNC, TheoremId.ADD_FAMILY):
        G = fam.sum_functional() if tid is TheoremId.MULT_SUMFUNC else fam.mean_functional()
        xhat = re_maximizer(G)
        if not tol.close(G(xhat), op_norm(G).value):
            raise ConstructionFailure("the summed functional does not attain its norm at a real value")
        if tid is TheoremId.MULT_SUMFUNC:
            r = _margins_from(fam, xhat, rho, tol)
            v = kernel_direction(sp, list(fam), xhat)
            xs = mirrored_vectors(sp, xhat, v, rho, n, scale)
            inst = DiscreteInstance(sp, xs, fam, Margin(r))
        else:
            v = kernel_direction(sp, [G], xhat)
            xs = mirrored_vectors(sp, xhat, v, rho, n, scale)
            d = deficits(sp, xs, fam)
            if np.any(d < -tol.abs):
                raise ConstructionFailure("exact deficits are negative; members exceed unit norm")
            inst = DiscreteInstance(sp, xs, fam, Slack(np.maximum(d, 0.0)))
        return _certify(tid, inst, None, tol, search)

    # DM_FAMILY, MULT_CP, MULT_CINF: start from the certificate of the family constant
    if tid is TheoremId.DM_FAMILY:
        q = 2.0
    elif tid is TheoremId.MULT_CINF:
        q = INF
    else:
        q = exponent(2.0 if p is None else p)
    est = family_constant(fam, q, search)
    xhat = _aligned(sp, est.certificate, fam.values(est.certificate))
    if np.any(fam.values(xhat).real < -tol.abs):
        # ties can hand back a maximizer with mixed signs; climb from the members' common axis instead
        axis = sum(re_maximizer(F) for F in fam)
        if np.any(axis):
            loc = local_ascent(fam, q, axis, search)
            if tol.close(loc.value, est.value):
                xhat = _aligned(sp, loc.certificate, fam.values(loc.certificate))
    r = _margins_from(fam, xhat, rho, tol)
    v = kernel_direction(sp, list(fam), xhat)
    xs = mirrored_vectors(sp, xhat, v, rho, n, scale)
    inst = DiscreteInstance(sp, xs, fam, Margin(r))
    return _certify(tid, inst, q, tol, search)


# ---- serialization ------------------------------------------------------------

def pairs(a) -> list:
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim == 0:
        return [float(a.real), float(a.imag)]
    return [pairs(x) for x in a]


def unpairs(obj) -> np.ndarray:
    a = np.asarray(obj, dtype=float)
    return a[..., 0] + 1j * a[..., 1]


def space_to_json(sp: SpaceSpec) -> dict:
    return {"norm": "cmod" if sp.is_cmod else "lp", "p": exponent_label(sp.norm.p),
            "dim": sp.dim, "field": sp.field.value}


def space_from_json(d: dict) -> SpaceSpec:
    sel = CMod if d["norm"] == "cmod" else Lp
    return SpaceSpec(int(d["dim"]), Field(d["field"]), sel(exponent(d["p"])))


def instance_to_json(inst: DiscreteInstance) -> dict:
    h = inst.hypothesis
    out = {
        "space": space_to_json(inst.space),
        "vectors": pairs(inst.vectors),
        "representers": pairs(inst.family.matrix),
        "centers": [None if F.center is None else pairs(F.center) for F in inst.family],
    }
    if isinstance(h, Margin):
        out["margin"] = list(h.r)
    else:
        out["slack"] = h.M.tolist()
    return out


def instance_from_json(d: dict) -> DiscreteInstance:
    sp = space_from_json(d["space"])
    reps = unpairs(d["representers"])
    cs = d.get("centers") or [None] * len(reps)
    fam = FunctionalFamily(tuple(
        Functional(sp, r, None if c is None else unpairs(c)) for r, c in zip(reps, cs)))
    h = Margin(tuple(d["margin"])) if "margin" in d else Slack(np.array(d["slack"]))
    return DiscreteInstance(sp, unpairs(d["vectors"]), fam, h)
