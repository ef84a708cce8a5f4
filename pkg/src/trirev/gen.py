"""Seeded generation of hypothesis-clean instances, and sharpness search."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from . import continuous as cnt
from . import discrete as dsc
from .discrete import DiscreteInstance, Margin, Slack, TheoremId
from .errors import ConstructionFailure, ContractViolation, UnsupportedStructure
from .functionals import Functional, FunctionalFamily, op_norm, re_maximizer
from .rng import random_vector, stream
from .spaces import (DEFAULT_TOL, Field, SpaceSpec, Tolerance, as_vector, as_vectors, lp,
                     norms)
from .transformers import BallHypothesis, BandHypothesis, ball_to_margin, band_to_margin

REJECTION_BUDGET = 100_000


@dataclass(frozen=True)
class GenConfig:
    seed: int = 0
    n: int = 3
    dim: int = 2
    field: str = "real"
    space: Optional[SpaceSpec] = None
    scale: tuple = (0.5, 2.0)

    def __post_init__(self):
        if self.n < 1:
            raise ContractViolation("n must be at least 1")
        lo, hi = self.scale
        if not (0 < lo <= hi):
            raise ContractViolation("scale range needs 0 < s_min <= s_max")

    @property
    def spec(self) -> SpaceSpec:
        return self.space if self.space is not None else lp(2, self.dim, self.field)


def _unit(space, v):
    nv = float(norms(space, v[None])[0])
    if nv == 0:
        raise ConstructionFailure("zero direction")
    return v / nv


def _orth_unit(space, rng, xhat):
    """Random unit vector (space norm) real-orthogonal to xhat in the Euclidean picture."""
    for _ in range(100):
        w = random_vector(rng, space.dim, space.field is Field.REAL)
        w = w - np.vdot(xhat, w).real / np.vdot(xhat, xhat).real * xhat
        if np.linalg.norm(w) > 1e-8:
            return _unit(space, w)
    raise ConstructionFailure("could not draw an orthogonal direction")


def _margins_ok(space, fam, r, x, tol=None):
    nx = float(norms(space, x[None])[0])
    re = fam.values(x).real
    if tol is None:
        return all(re[k] >= r[k] * nx for k in range(fam.m))
    return all(tol.leq(r[k] * nx, re[k]) for k in range(fam.m))


def cone_axis(fam: FunctionalFamily) -> np.ndarray:
    """Unit x̂₀ along the sum of the members' unit real maximizers."""
    x0 = sum(re_maximizer(F) for F in fam)
    return _unit(fam.space, np.asarray(x0))


def feasible_margins(fam: FunctionalFamily, rng, shrink=(0.3, 0.95)) -> tuple:
    """Margins r_k = u_k·Re F_k(x̂₀), u_k uniform in ``shrink``; x̂₀ certifies them."""
    xh = cone_axis(fam)
    re = fam.values(xh).real
    if np.any(re <= 0):
        raise ConstructionFailure("the cone axis does not lie in every half-space")
    u = rng.uniform(shrink[0], shrink[1], size=fam.m)
    return tuple(float(v) for v in u * re)


def gen_margin(cfg: GenConfig, family, r_k, tol: Tolerance = DEFAULT_TOL) -> DiscreteInstance:
    """n vectors s·(cos α·x̂₀ + sin α·w) satisfying Re F_k(x) ≥ r_k‖x‖."""
    sp = cfg.spec
    fam = _family_in(sp, family)
    r = Margin(r_k).r
    if len(r) != fam.m:
        raise ContractViolation("one margin per functional")
    xh = cone_axis(fam)
    if not _margins_ok(sp, fam, r, xh, tol):
        raise ConstructionFailure("margins infeasible: the cone axis violates them")
    xs = []
    for i in range(cfg.n):
        rng = stream(cfg.seed, "margin", i)
        s = float(rng.uniform(*cfg.scale))
        w = _orth_unit(sp, rng, xh) if sp.dim * (1 if sp.field is Field.REAL else 2) > 1 else None
        alpha = float(rng.uniform(0.0, 0.5 * math.pi))
        x = s * xh
        if w is not None:
            for _ in range(80):
                cand = s * (math.cos(alpha) * xh + math.sin(alpha) * w)
                if _margins_ok(sp, fam, r, cand):
                    x = cand
                    break
                alpha *= 0.7
        xs.append(x)
    inst = DiscreteInstance(sp, np.array(xs), fam, Margin(r))
    if dsc.check_margin(inst, tol):
        raise ConstructionFailure("generated vectors violate the margins")
    return inst


def gen_slack(cfg: GenConfig, family, inflate=(0.0, 0.5), add=(0.0, 0.2)) -> DiscreteInstance:
    """Random vectors with slacks M_ik = (1+u)·deficit + v ≥ the exact deficits."""
    sp = cfg.spec
    fam = _family_in(sp, family)
    xs, Ms = [], []
    try:
        xh = cone_axis(fam)
    except ConstructionFailure:
        xh = re_maximizer(fam[0])  # the unit maximizers cancel; any unit vector will do
    for i in range(cfg.n):
        rng = stream(cfg.seed, "slack", i)
        s = float(rng.uniform(*cfg.scale))
        w = random_vector(rng, sp.dim, sp.field is Field.REAL)
        # mix the cone axis with a random direction so deficits range from 0 upward
        y = xh + float(rng.uniform(0.0, 2.0)) * _unit(sp, w)
        x = s * _unit(sp, y) if np.any(y) else s * xh
        d = np.maximum(dsc.deficits(sp, x[None], fam)[0], 0.0)
        M = (1.0 + rng.uniform(*inflate, size=fam.m)) * d + rng.uniform(*add, size=fam.m)
        xs.append(x)
        Ms.append(M)
    return DiscreteInstance(sp, np.array(xs), fam, Slack(np.array(Ms)))


def _family_in(sp, family) -> FunctionalFamily:
    if isinstance(family, (FunctionalFamily, Functional)):
        fam = FunctionalFamily.of(family)
    else:
        fam = FunctionalFamily.from_vectors(sp, family)
    if fam.space != sp:
        raise ContractViolation("family lives in another space")
    return fam


def sample_ball(space: SpaceSpec, rng, center, radius: float, count: int) -> np.ndarray:
    """``count`` points uniform in the ℓ2 ball (direction x radius^(1/d) law)."""
    c = as_vector(space, center)
    real = space.field is Field.REAL
    d = space.dim if real else 2 * space.dim
    G = rng.standard_normal((count, space.dim)).astype(np.complex128)
    if not real:
        G = G + 1j * rng.standard_normal((count, space.dim))
    G /= np.linalg.norm(G, axis=1)[:, None]
    rad = radius * rng.uniform(0.0, 1.0, size=count) ** (1.0 / d)
    return c + rad[:, None] * G


def gen_ball(cfg: GenConfig, centers, radii) -> DiscreteInstance:
    """Points in the intersection of balls ‖x − e_k‖ ≤ ρ_k, with the induced margins."""
    sp = cfg.spec
    if not sp.is_hilbert:
        raise UnsupportedStructure("ball generation needs lp(2)")
    E = as_vectors(sp, centers)
    rho = np.atleast_1d(np.asarray(radii, dtype=float))
    if rho.size != E.shape[0] or np.any(rho < 0):
        raise ContractViolation("one nonnegative radius per center")
    hyps = [BallHypothesis(sp, e, float(p)) for e, p in zip(E, rho)]
    margins = [ball_to_margin(h) for h in hyps]
    xs = _sample_balls(cfg, sp, E, rho, "ball")
    return DiscreteInstance(sp, xs, FunctionalFamily.from_vectors(sp, E), Margin(margins))


def _sample_balls(cfg, sp, E, rho, tag) -> np.ndarray:
    mid = E.mean(axis=0)
    if np.any(norms(sp, mid - E) > rho * (1 + 1e-12) + 1e-15):
        raise ConstructionFailure("balls do not share the centers' average; treated as disjoint")
    k0 = int(np.argmin(rho))
    xs = []
    for i in range(cfg.n):
        rng = stream(cfg.seed, tag, i)
        if rho[k0] == 0:
            xs.append(E[k0].copy())
            continue
        done = 0
        while True:
            pts = sample_ball(sp, rng, E[k0], float(rho[k0]), 256)
            ok = np.ones(len(pts), dtype=bool)
            for e, p in zip(E, rho):
                ok &= norms(sp, pts - e) <= p
            if ok.any():
                xs.append(pts[int(np.argmax(ok))])
                break
            done += len(pts)
            if done >= REJECTION_BUDGET:
                raise ConstructionFailure(f"ball rejection sampling exhausted {REJECTION_BUDGET} draws")
    return np.array(xs)


def gen_band(cfg: GenConfig, directions, lower, upper) -> DiscreteInstance:
    """Points with ‖x − (m_k+M_k)/2·y_k‖ ≤ ½(M_k−m_k)‖y_k‖, with the induced margins."""
    sp = cfg.spec
    Y = as_vectors(sp, directions)
    lo = np.atleast_1d(np.asarray(lower, dtype=float))
    up = np.atleast_1d(np.asarray(upper, dtype=float))
    hyps = [BandHypothesis(sp, y, float(a), float(b)) for y, a, b in zip(Y, lo, up)]
    balls = [h.as_ball() for h in hyps]
    E = np.array([b.center for b in balls])
    rho = np.array([b.radius for b in balls])
    xs = _sample_balls(cfg, sp, E, rho, "band")
    margins = [band_to_margin(h) for h in hyps]
    return DiscreteInstance(sp, xs, FunctionalFamily.from_vectors(sp, Y), Margin(margins))


def gen_path(inst: DiscreteInstance, a: float = 0.0, b: float = 1.0) -> cnt.PathFunction:
    """Bézier path through the instance's vectors as control points.

    It stays in their convex hull, hence inside any convex hypothesis set they share.
    """
    return cnt.bezier(inst.space, inst.vectors, a, b)


def random_family(space: SpaceSpec, rng, m: int, unit: bool = True) -> FunctionalFamily:
    """m functionals: ⟨·, e⟩ on lp(2), [·, e] on other smooth lp(p), raw representers otherwise."""
    members = []
    for _ in range(m):
        e = random_vector(rng, space.dim, space.field is Field.REAL)
        size = 1.0 if unit else float(rng.uniform(0.5, 2.0))
        if space.is_hilbert:
            F = Functional.from_inner(space, size * _unit(space, e))
        elif space.strictly_convex and not space.is_cmod:
            F = Functional.from_sip(space, size * _unit(space, e))
        else:
            F = Functional(space, e)
            F = Functional(space, size * e / op_norm(F).value)
        members.append(F)
    return FunctionalFamily(tuple(members))


# ---- sharpness search ---------------------------------------------------------------

@dataclass
class SharpnessResult:
    theorem_id: str
    best_ratio: float
    bound: float
    witness: DiscreteInstance
    evaluations: int
    tol: Tolerance = DEFAULT_TOL

    @property
    def exceeded(self) -> bool:
        return not self.tol.leq(self.best_ratio, self.bound)


SHARPNESS_DEFAULTS = {
    TheoremId.MULT_SUMFUNC: {"vectors": [[1.0, 0.0], [0.0, 1.0]], "r": [2 ** -0.5, 2 ** -0.5]},
    TheoremId.DM_SINGLE: {"vectors": [[1.0, 0.0]], "r": [0.6]},
}


def _ratio_of(tid, res) -> float:
    if res.rhs > 0:
        return res.lhs / res.rhs
    return 0.0 if res.lhs <= 0 else math.inf


def sharpness_search(theorem_id, params: Optional[dict] = None, budget: int = 10_000, seed: int = 0,
                     tol: Tolerance = DEFAULT_TOL) -> SharpnessResult:
    """Multistart hill-climb on lhs/rhs over hypothesis-clean instances.

    Margin theorems project each trial vector back into the cone by bisection
    toward x̂₀; slack theorems take the exact deficits as slacks, which is the
    tightest admissible choice.  Ratios are bounded by 1.
    """
    tid = TheoremId(theorem_id)
    params = dict(SHARPNESS_DEFAULTS.get(tid, {}), **(params or {}))
    if "family" in params:
        fam = FunctionalFamily.of(params["family"])
        sp = fam.space
    else:
        V = np.asarray(params["vectors"], dtype=np.complex128)
        sp = params.get("space") or lp(2, V.shape[1], params.get("field", "real"))
        fam = FunctionalFamily.from_vectors(sp, V)
    n = int(params.get("n", 2))
    p = params.get("p")
    search = params.get("search", dsc.DEFAULT_SEARCH)
    slack_kind = tid not in dsc.MULTIPLICATIVE
    if slack_kind:
        r = None
    else:
        r = Margin(params.get("r", feasible_margins(fam, stream(seed, "sharp-r")))).r
    cfg = GenConfig(seed=seed, n=n, space=sp)
    xh = cone_axis(fam)

    def build(xs):
        if slack_kind:
            return DiscreteInstance(sp, xs, fam, Slack(np.maximum(dsc.deficits(sp, xs, fam), 0.0)))
        return DiscreteInstance(sp, xs, fam, Margin(r))

    Fmat = fam.matrix.T
    if sp.is_hilbert:
        def nrm(Y):
            return np.sqrt((Y.real ** 2 + Y.imag ** 2).sum(axis=1))
    else:
        def nrm(Y):
            return norms(sp, Y)
    rr = np.asarray(r if r is not None else [], dtype=float)

    def gap(Y):
        return ((Y @ Fmat).real - nrm(Y)[:, None] * rr).min(axis=1)

    def project(x):
        if slack_kind or gap(x[None])[0] >= 0:
            return x
        # the margin gap is concave along the segment to the axis ray; bracket its root
        anchor = float(norms(sp, x[None])[0]) * xh
        lo, hi = 0.0, 1.0
        for _ in range(5):
            lam = np.linspace(lo, hi, 17)
            ok = gap((1 - lam)[:, None] * x + lam[:, None] * anchor) >= 0
            j = int(np.argmax(ok)) if ok.any() else 16
            hi, lo = lam[j], lam[max(j - 1, 0)]
        y = (1 - hi) * x + hi * anchor
        return y if _margins_ok(sp, fam, r, y, tol) else anchor

    def seed_instance(k):
        c = GenConfig(seed=int(stream(seed, "sharp-start", k).integers(0, 2 ** 62)), n=n, space=sp)
        return gen_slack(c, fam) if slack_kind else gen_margin(c, fam, r, tol)

    first = build(np.array([project(x) for x in seed_instance(0).vectors]))
    res0 = dsc.check(tid, first, p=p, tol=tol, search=search)
    best_inst, best = first, _ratio_of(tid, res0)
    if budget <= 0:
        return SharpnessResult(tid.value, best, 1.0, best_inst, 0, tol)
    # lhs and rhs are affine in (Σ‖x‖, ‖Σx‖, ΣM) with family constants, so read
    # those constants off one full check and evaluate the ratio directly
    tot0 = float(norms(sp, first.vectors).sum())
    nS0 = float(norms(sp, first.total()[None])[0])
    if slack_kind:
        Msum0 = float(first.hypothesis.M.sum())
        A = 0.0 if tid is TheoremId.ADD_SINGLE else (res0.rhs - Msum0 / fam.m) / nS0
    else:
        gamma = best * nS0 / tot0

    def fast(Xc):
        nx = nrm(Xc)
        tot = float(nx.sum())
        nS = float(nrm(Xc.sum(axis=0)[None])[0])
        if not slack_kind:
            return gamma * tot / nS if nS > 0 else -math.inf
        d = np.maximum(nx[:, None] - (Xc @ Fmat).real, 0.0)
        if tid is TheoremId.ADD_SINGLE:
            ks = float(d.sum())
            return (tot - nS) / ks if ks > 0 else -math.inf
        return tot / (A * nS + float(d.sum()) / fam.m)

    evals = 0
    starts = max(1, min(8, budget // 500))
    per = budget // starts
    real = sp.field is Field.REAL
    for s in range(starts):
        rng = stream(seed, "sharp", s)
        X = np.array([project(x) for x in seed_instance(s).vectors])
        cur = fast(X)
        evals += 1
        step = 0.3
        for _ in range(per - 1):
            if evals >= budget:
                break
            Y = X.copy()
            i = int(rng.integers(n))
            if rng.uniform() < 0.5:
                j = int(rng.integers(sp.dim))
                dz = rng.standard_normal() + (0 if real else 1j * rng.standard_normal())
                Y[i, j] += step * dz
            else:
                Y[i] += step * random_vector(rng, sp.dim, real)
            Y[i] = project(Y[i])
            if not np.any(Y[i]):
                continue
            evals += 1
            val = fast(Y)
            if val > cur:
                X, cur = Y, val
                step = min(step * 1.3, 1.0)
            else:
                step = max(step * 0.85, 1e-7)
        if cur > best:
            cand = build(X)
            try:
                full = _ratio_of(tid, dsc.check(tid, cand, p=p, tol=tol, search=search))
            except dsc.DegenerateInstance:
                continue
            if full > best:
                best, best_inst = full, cand
    return SharpnessResult(tid.value, float(best), 1.0, best_inst, evals, tol)
