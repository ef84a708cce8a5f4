"""Suite orchestration and JSON reports."""
from __future__ import annotations

import datetime as _dt
import functools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from . import __version__
from . import continuous as cnt
from . import discrete as dsc
from . import gen
from ._backend import BACKEND
from .discrete import Margin, Slack, TheoremId
from .errors import (ConfigError, ConstructionFailure, ConvergenceFailure, DegenerateInstance,
                     HypothesisViolation, TrirevError)
from .functionals import (Functional, FunctionalFamily, SearchConfig, family_cap, family_constant,
                          gram_eigen, op_norm, sphere_search)
from .rng import random_vector, stream
from .spaces import INF, Field, Tolerance, cmod, lp, norms
from .transformers import (BallHypothesis, BandHypothesis, ball_equality_witness, ball_to_margin,
                           ball_to_slack, band_to_margin, band_to_slack)

SUITES = ("discrete", "continuous", "complex_scalars", "constants", "sharpness")


@dataclass(frozen=True)
class SuiteConfig:
    suites: tuple = SUITES
    trials: int = 200
    seed: int = 42
    tol_abs: float = 1e-9
    tol_rel: float = 1e-7
    quad: cnt.QuadratureSpec = cnt.DEFAULT_QUAD
    out: Optional[str] = None
    jobs: int = 1
    sharpness_budget: int = 10_000

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not (self.tol_abs > 0 and self.tol_rel > 0):
            raise ConfigError("tolerances must be positive")
        bad = [s for s in self.suites if s not in SUITES]
        if bad:
            raise ConfigError(f"unknown suites {bad}")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        if self.sharpness_budget < 0:
            raise ConfigError("sharpness budget must be >= 0")

    @property
    def tol(self) -> Tolerance:
        return Tolerance(self.tol_abs, self.tol_rel)


@dataclass
class Record:
    theorem_id: str
    suite: str
    trials: int = 0
    hypothesis_rejections: int = 0
    violations: list = field(default_factory=list)
    max_violation: Optional[float] = None
    equality_cases_checked: int = 0
    equality_max_gap: float = 0.0
    errors: list = field(default_factory=list)
    extras: dict = field(default_factory=dict)

    def ok(self) -> bool:
        return not self.violations and not self.errors

    def to_json(self) -> dict:
        return {
            "theorem_id": self.theorem_id,
            "suite": self.suite,
            "trials": self.trials,
            "hypothesis_rejections": self.hypothesis_rejections,
            "violations": self.violations,
            "max_violation": self.max_violation,
            "equality_cases_checked": self.equality_cases_checked,
            "equality_max_gap": self.equality_max_gap,
            "errors": self.errors,
            "extras": _clean(self.extras),
        }


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return dsc.pairs(obj)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj if obj is None or isinstance(obj, str) else str(obj)


class _Acc:
    """Per-record accumulator; trial results arrive in trial order."""

    def __init__(self, tid: str, suite: str, tol: Tolerance):
        self.rec = Record(tid, suite)
        self.tol = tol

    def bound(self, trial: int, res, witness: Callable = None):
        self.rec.trials += 1
        if not res.hypothesis_ok:
            self.rec.hypothesis_rejections += 1
            return
        ex = float(res.excess)
        mv = self.rec.max_violation
        self.rec.max_violation = ex if mv is None else max(mv, ex)
        if not res.passed:
            self.rec.violations.append({"trial": trial, "lhs": res.lhs, "rhs": res.rhs, "excess": ex,
                                        "witness": _clean(witness()) if witness else None})

    def numeric(self, trial: int, value: float, limit: float, label: str, witness=None):
        """A scalar check passing when value ≤ limit (gaps, disagreements)."""
        self.rec.trials += 1
        ex = float(value - limit)
        mv = self.rec.max_violation
        self.rec.max_violation = ex if mv is None else max(mv, ex)
        if ex > 0:
            self.rec.violations.append({"trial": trial, "check": label, "value": float(value),
                                        "limit": float(limit), "excess": ex,
                                        "witness": _clean(witness() if callable(witness) else witness)})

    def equality(self, res, limit: float = 1e-8):
        self.rec.equality_cases_checked += 1
        gap = abs(res.lhs - res.rhs)
        self.rec.equality_max_gap = max(self.rec.equality_max_gap, float(gap))
        if not (res.equality.holds and gap <= limit):
            self.rec.errors.append({"stage": "equality", "type": "EqualityNotAttained",
                                    "message": f"gap {gap!r}, conditions {res.equality.conditions}"})

    def error(self, trial, exc: Exception, stage: str = "trial"):
        self.rec.errors.append({"stage": stage, "trial": trial, "type": type(exc).__name__,
                                "message": str(exc)})


# ---- discrete suite -------------------------------------------------------------------

_SHAPES = [(d, f) for f in ("real", "complex") for d in (2, 3, 5)]
_NORMS = (2.0, 3.0, 1.0, INF)
_C_BASED = {TheoremId.DM_FAMILY, TheoremId.MULT_CINF, TheoremId.MULT_CP, TheoremId.ADD_CINF,
            TheoremId.ADD_CP}
_SINGLE = {TheoremId.DM_SINGLE, TheoremId.ADD_SINGLE}

DISCRETE_TASKS = [
    (TheoremId.DM_SINGLE, None), (TheoremId.DM_FAMILY, None), (TheoremId.MULT_SUMFUNC, None),
    (TheoremId.MULT_CINF, None), (TheoremId.MULT_CP, 1.0), (TheoremId.MULT_CP, 2.0),
    (TheoremId.MULT_CP, 3.0), (TheoremId.ADD_SINGLE, None), (TheoremId.ADD_FAMILY, None),
    (TheoremId.ADD_CINF, None), (TheoremId.ADD_CP, 1.0), (TheoremId.ADD_CP, 2.0),
    (TheoremId.ADD_CP, 3.0),
]
POOL_SIZE = 4


def _label(tid, p=None) -> str:
    tid = getattr(tid, "value", tid)
    return tid if p is None else f"{tid}[p={p:g}]"


def _trial_space(tid, t: int):
    dim, fld = _SHAPES[t % len(_SHAPES)]
    pn = 2.0 if tid in _C_BASED else _NORMS[(t // len(_SHAPES)) % len(_NORMS)]
    return lp(pn, dim, fld)


@functools.lru_cache(maxsize=512)
def _pool(seed, label, sp, m) -> tuple:
    """Families whose cone axis lies strictly inside every half-space."""
    out = []
    for j in range(POOL_SIZE):
        for attempt in range(200):
            fam = gen.random_family(sp, stream(seed, "pool", label, sp.label(), m, j, attempt), m)
            try:
                xh = gen.cone_axis(fam)
            except ConstructionFailure:
                continue
            if np.all(fam.values(xh).real > 0.05):
                out.append(fam)
                break
    if not out:
        raise ConstructionFailure(f"no feasible family pool for {sp.label()}, m={m}")
    return tuple(out)


def _discrete_record(cfg: SuiteConfig, tid: TheoremId, p) -> Record:
    label = _label(tid, p)
    acc = _Acc(label, "discrete", cfg.tol)
    pools = {}
    for t in range(cfg.trials):
        rng = stream(cfg.seed, "discrete", label, t)
        sp = _trial_space(tid, t)
        m = 1 if tid in _SINGLE else int(rng.integers(1, 4))
        n = int(rng.integers(2, 7))
        try:
            key = (sp, m)
            if key not in pools:
                pools[key] = _pool(cfg.seed, label, sp, m)
            fam = pools[key][int(rng.integers(len(pools[key])))]
            gcfg = gen.GenConfig(seed=int(rng.integers(0, 2 ** 62)), n=n, space=sp)
            if tid in dsc.MULTIPLICATIVE:
                inst = gen.gen_margin(gcfg, fam, gen.feasible_margins(fam, rng), cfg.tol)
            else:
                inst = gen.gen_slack(gcfg, fam)
            res = dsc.check(tid, inst, p=p, tol=cfg.tol)
            acc.bound(t, res, lambda inst=inst: dsc.instance_to_json(inst))
        except (DegenerateInstance, HypothesisViolation) as e:
            acc.rec.trials += 1
            acc.rec.hypothesis_rejections += 1
        except TrirevError as e:
            acc.error(t, e)
    if tid not in (TheoremId.ADD_CINF, TheoremId.ADD_CP):
        _discrete_equality(cfg, tid, p, acc)
    else:
        acc.rec.extras["equality"] = "no equality characterization"
    return acc.rec


def _discrete_equality(cfg, tid, p, acc):
    """One equality instance per field in dim 3 (lp(2)) and one on lp(3) for the margin-free forms."""
    spaces = [lp(2, 3, "real"), lp(2, 3, "complex")]
    if tid not in _C_BASED:
        spaces.append(lp(3, 3, "complex"))
    for sp in spaces:
        m = 1 if tid in _SINGLE else 2
        rng = stream(cfg.seed, "equality", _label(tid, p), sp.label())
        last = None
        for attempt in range(8):
            fam = (FunctionalFamily.from_representers(sp, np.eye(3)[:m]) if attempt == 7
                   else _pool(cfg.seed, "eq" + str(attempt), sp, m)[0])
            params = {"family": fam, "rho": float(rng.uniform(0.5, 0.95)), "n": int(rng.integers(2, 5)),
                      "p": p, "tol": cfg.tol}
            try:
                inst = dsc.equality_instance(tid, params)
            except ConstructionFailure as e:
                last = e
                continue
            acc.equality(dsc.check(tid, inst, p=p, tol=cfg.tol))
            last = None
            break
        if last is not None:
            acc.error(None, last, "equality")


# ---- continuous suite ----------------------------------------------------------------

_CATALOG = ("constant", "circular", "complex_phase", "polynomial", "piecewise")


def _arc_in_cone(sp, fam, r, xh, w, theta):
    """Largest θ' ≤ θ (halving) whose arc endpoints x̂ ± tan θ' w lie in the cone."""
    for _ in range(40):
        ok = all(gen._margins_ok(sp, fam, r, xh + s * math.tan(theta) * w) for s in (-1.0, 1.0))
        if ok:
            return theta
        theta *= 0.5
    return 0.0


def _margin_path(sp, fam, r, rng, kind, gcfg):
    inst = gen.gen_margin(gcfg, fam, r)
    xh = gen.cone_axis(fam)
    s = float(rng.uniform(0.5, 2.0))
    if kind == "constant":
        return cnt.constant(sp, inst.vectors[0], 0.0, float(rng.uniform(0.5, 2.0)))
    if kind == "circular":
        w = gen._orth_unit(sp, rng, xh)
        th = _arc_in_cone(sp, fam, r, xh, w, float(rng.uniform(0.2, 1.2)))
        return cnt.circular(sp, -th, th, 1.0, xh, w, scale=s)
    if kind == "complex_phase":
        th = _arc_in_cone(sp, fam, r, xh, 1j * xh, float(rng.uniform(0.2, 1.2)))
        return cnt.complex_phase(sp, -th, th, 1.0, s * xh)
    if kind == "polynomial":
        return gen.gen_path(inst, 0.0, float(rng.uniform(0.5, 2.0)))
    # piecewise: a constant piece, then a Bézier piece
    c = cnt.constant(sp, inst.vectors[0], 0.0, 1.0)
    b = cnt.bezier(sp, inst.vectors, 1.0, 2.0)
    return cnt.piecewise([c, b])


def _free_path(sp, rng, kind):
    real = sp.field is Field.REAL
    u = random_vector(rng, sp.dim, real)
    w = random_vector(rng, sp.dim, real)
    if kind == "constant":
        return cnt.constant(sp, u, 0.0, 1.0)
    if kind == "circular":
        return cnt.circular(sp, 0.0, float(rng.uniform(0.5, 3.0)), float(rng.uniform(0.5, 2.0)), u, w)
    if kind == "complex_phase":
        return cnt.complex_phase(sp, 0.0, float(rng.uniform(0.5, 3.0)), float(rng.uniform(0.5, 2.0)), u)
    if kind == "polynomial":
        return cnt.polynomial(sp, [u, w, random_vector(rng, sp.dim, real)], -1.0, 1.0)
    return cnt.piecewise([cnt.constant(sp, u, 0.0, 0.5), cnt.polynomial(sp, [w, u], 0.5, 1.5)])


def _path_json(f: cnt.PathFunction) -> dict:
    return {"space": dsc.space_to_json(f.space), "a": f.a, "b": f.b, "catalog_id": f.catalog_id,
            "params": _clean(f.params)}


CONT_TASKS = [
    ("CONT_MULT_SINGLE", None), ("CONT_MULT_FAMILY", None), ("CONT_MULT_CINF", INF),
    ("CONT_MULT_CP", 2.0), ("CONT_MULT_BALL", None), ("CONT_MULT_BAND", None),
    ("CONT_ADD_SINGLE", None), ("CONT_ADD_FAMILY", None), ("CONT_ADD_CINF", INF),
    ("CONT_ADD_CP", 2.0), ("CONT_ADD_BALL", None), ("CONT_ADD_BAND", None),
]


def _cont_kind(t, sp):
    kind = _CATALOG[t % len(_CATALOG)]
    if kind == "complex_phase" and sp.field is Field.REAL:
        kind = "circular"
    return kind


def _cont_record(cfg: SuiteConfig, name: str, p) -> Record:
    acc = _Acc(name, "continuous", cfg.tol)
    q = cfg.quad
    for t in range(cfg.trials):
        rng = stream(cfg.seed, "continuous", name, t)
        dim, fld = _SHAPES[t % len(_SHAPES)]
        try:
            if name.endswith(("BALL", "BAND")):
                sp = lp(2, dim, fld)
                res, f = _transformed_trial(sp, name, rng, q, cfg.tol, t)
            else:
                pn = 2.0 if p is not None else _NORMS[(t // len(_SHAPES)) % len(_NORMS)]
                sp = lp(pn, dim, fld)
                single = "SINGLE" in name
                m = 1 if single else int(rng.integers(1, 4))
                pool = _pool(cfg.seed, name, sp, m)
                fam = pool[int(rng.integers(len(pool)))]
                kind = _cont_kind(t, sp)
                gcfg = gen.GenConfig(seed=int(rng.integers(0, 2 ** 62)), n=int(rng.integers(2, 5)), space=sp)
                if "MULT" in name:
                    r = gen.feasible_margins(fam, rng)
                    f = _margin_path(sp, fam, r, rng, kind, gcfg)
                    res = (cnt.cont_mult_single(f, fam, r[0], q, cfg.tol) if single
                           else cnt.cont_mult_family(f, fam, r, q, p, cfg.tol))
                else:
                    f = _free_path(sp, rng, kind)
                    k = cnt.SlackFunction.exact_deficit(sp, fam, float(rng.uniform(0, 0.5)),
                                                        float(rng.uniform(0, 0.2)))
                    res = (cnt.cont_add_single(f, fam, k, q, cfg.tol) if single
                           else cnt.cont_add_family(f, fam, k, q, p, cfg.tol))
            acc.bound(t, res, lambda f=f: _path_json(f))
        except (DegenerateInstance, HypothesisViolation):
            acc.rec.trials += 1
            acc.rec.hypothesis_rejections += 1
        except TrirevError as e:
            acc.error(t, e)
    _cont_equality(cfg, name, acc)
    return acc.rec


def _transformed_trial(sp, name, rng, q, tol, t):
    m = int(rng.integers(1, 3))
    real = sp.field is Field.REAL
    gcfg = gen.GenConfig(seed=int(rng.integers(0, 2 ** 62)), n=int(rng.integers(2, 5)), space=sp)
    for attempt in range(50):
        base = gen._unit(sp, random_vector(rng, sp.dim, real))
        # members near a common unit direction so the sets intersect
        dirs = [gen._unit(sp, base + 0.2 * gen._unit(sp, random_vector(rng, sp.dim, real))) for _ in range(m)]
        try:
            if name == "CONT_MULT_BALL":
                rho = [float(rng.uniform(0.25, 0.6)) for _ in dirs]
                f = gen.gen_path(gen.gen_ball(gcfg, dirs, rho))
                hs = [BallHypothesis(sp, e, r) for e, r in zip(dirs, rho)]
                return cnt.cont_mult_transformed(f, hs, q, tol), f
            if name == "CONT_MULT_BAND":
                lo = [float(rng.uniform(0.8, 1.0)) for _ in dirs]
                up = [float(rng.uniform(1.3, 1.8)) for _ in dirs]
                f = gen.gen_path(gen.gen_band(gcfg, dirs, lo, up))
                hs = [BandHypothesis(sp, y, a, b) for y, a, b in zip(dirs, lo, up)]
                return cnt.cont_mult_transformed(f, hs, q, tol), f
            inst = gen.gen_margin(gcfg, FunctionalFamily.from_vectors(sp, dirs), [0.9] * m)
            break
        except ConstructionFailure:
            if attempt == 49:
                raise
    f = gen.gen_path(inst)
    grow, pad = float(rng.uniform(0.0, 0.5)), float(rng.uniform(0.0, 0.05))
    if name == "CONT_ADD_BALL":
        hs = [cnt.BallSlack(e, lambda ts, e=e: (1 + grow) * norms(sp, f.values(ts) - e) + pad)
              for e in dirs]
    else:
        hs = []
        for y in dirs:
            def mid(ts, y=y):
                return (f.values(ts) @ np.conj(y)).real

            def half(ts, y=y):
                # smooth upper envelope of the distance to the axis, so quadrature stays spectral
                X = f.values(ts)
                d2 = norms(sp, X - mid(ts)[:, None] * y) ** 2 + (pad * norms(sp, X)) ** 2
                return (1 + grow) * np.sqrt(d2 + 1e-4 * norms(sp, X) ** 2)
            hs.append(cnt.BandSlack(y, lambda ts, mid=mid, half=half: mid(ts) - half(ts),
                                    lambda ts, mid=mid, half=half: mid(ts) + half(ts)))
    return cnt.cont_add_transformed(f, hs, q, tol), f


def _cont_equality(cfg, name, acc):
    q = cfg.quad
    try:
        if name == "CONT_MULT_SINGLE":
            sp = lp(2, 2)
            f = cnt.constant(sp, [1.0, 0.0], 0.0, 2.0)
            acc.equality(cnt.cont_mult_single(f, Functional.from_inner(sp, [1, 0]), 1.0, q, cfg.tol))
        elif name in ("CONT_MULT_FAMILY", "CONT_ADD_FAMILY", "CONT_ADD_SINGLE"):
            for sp in (lp(2, 3, "complex"), lp(3, 3, "real")):
                m = 1 if name == "CONT_ADD_SINGLE" else 2
                fam = _pool(cfg.seed, "ceq", sp, m)[0]
                inst = cnt.cont_equality_instance(name, {"family": fam, "rho": 0.8, "n": 3})
                acc.equality(cnt.cont_check(name, inst, q, tol=cfg.tol))
        elif name == "CONT_MULT_CP":
            sp = lp(2, 2)
            fam = FunctionalFamily.from_vectors(sp, [[1, 0], [0, 1]])
            f = cnt.constant(sp, [1.0, 1.0])
            acc.equality(cnt.cont_mult_family(f, fam, [2 ** -0.5] * 2, q, 2.0, cfg.tol))
        elif name == "CONT_MULT_CINF":
            sp = lp(2, 3, "complex")
            fam = _pool(cfg.seed, "ceq", sp, 2)[0]
            inst = cnt.cont_equality_instance(name, {"family": fam, "rho": 0.8, "n": 3})
            acc.equality(cnt.cont_check(name, inst, q, tol=cfg.tol))
        elif name == "CONT_MULT_BALL":
            sp = lp(2, 2)
            f = cnt.constant(sp, [1.0, 0.0])
            acc.equality(cnt.cont_mult_transformed(f, [BallHypothesis(sp, [1, 0], 0.0)], q, cfg.tol))
        else:
            acc.rec.extras["equality"] = "not constructed"
    except TrirevError as e:
        acc.error(None, e, "equality")


def _anchor_records(cfg: SuiteConfig) -> list:
    q, tol = cfg.quad, cfg.tol
    out = []

    # integral reverse for the modulus: f = e^{it} on [−θ, θ], r = cos θ
    acc = _Acc("KARAMATA", "continuous", tol)
    sp = cmod(2)
    F = Functional(sp, np.array([1.0]))
    for t in range(cfg.trials):
        th = math.pi / 3 if t == 0 else float(stream(cfg.seed, "karamata", t).uniform(0.05, 1.5))
        res = cnt.cont_mult_single(cnt.complex_phase(sp, -th, th), F, math.cos(th), q, tol)
        acc.bound(t, res)
        gap = max(abs(res.lhs - 2 * th * math.cos(th)), abs(res.rhs - 2 * math.sin(th)))
        acc.rec.max_violation = max(acc.rec.max_violation, gap - 1e-9)
        if gap > 1e-9:
            acc.rec.violations.append({"trial": t, "check": "closed_form", "value": gap, "limit": 1e-9})
        if t == 0:
            acc.rec.extras["anchor"] = {"lhs": res.lhs, "rhs": res.rhs}
    out.append(acc.rec)

    # piecewise-constant paths against the discrete checks
    acc = _Acc("DISCRETE_CONTINUOUS", "continuous", tol)
    pairs = [(TheoremId.DM_SINGLE, "CONT_MULT_SINGLE"), (TheoremId.MULT_SUMFUNC, "CONT_MULT_FAMILY"),
             (TheoremId.MULT_CP, "CONT_MULT_CP"), (TheoremId.ADD_SINGLE, "CONT_ADD_SINGLE"),
             (TheoremId.ADD_FAMILY, "CONT_ADD_FAMILY")]
    for t in range(cfg.trials):
        tid, ctid = pairs[t % len(pairs)]
        rng = stream(cfg.seed, "consistency", t)
        dim, fld = _SHAPES[t % len(_SHAPES)]
        sp = lp(2.0 if tid is TheoremId.MULT_CP else _NORMS[t % len(_NORMS)], dim, fld)
        try:
            m = 1 if tid in _SINGLE else int(rng.integers(1, 4))
            pool = _pool(cfg.seed, "consistency", sp, m)
            fam = pool[int(rng.integers(len(pool)))]
            gcfg = gen.GenConfig(seed=int(rng.integers(0, 2 ** 62)), n=int(rng.integers(1, 6)), space=sp)
            if tid in dsc.MULTIPLICATIVE:
                inst = gen.gen_margin(gcfg, fam, gen.feasible_margins(fam, rng))
                h = inst.hypothesis
            else:
                inst = gen.gen_slack(gcfg, fam)
                h = cnt.SlackFunction.piecewise_constant(inst.hypothesis.M)
            d = dsc.check(tid, inst, p=2.0, tol=tol)
            c = cnt.cont_check(ctid, cnt.ContinuousInstance(cnt.piecewise_constant(sp, inst.vectors), fam, h),
                               q, p=2.0, tol=tol)
            # the single-functional multiplicative form scales by r on both sides identically
            scale = max(1.0, abs(d.lhs), abs(d.rhs))
            diff = max(abs(d.lhs - c.lhs), abs(d.rhs - c.rhs)) / scale
            acc.numeric(t, diff, 1e-12, f"{tid.value}~{ctid}", lambda inst=inst: dsc.instance_to_json(inst))
        except (DegenerateInstance, HypothesisViolation):
            acc.rec.trials += 1
            acc.rec.hypothesis_rejections += 1
        except TrirevError as e:
            acc.error(t, e)
    out.append(acc.rec)

    # panel doubling moves every reported value by less than 1e-9
    acc = _Acc("QUADRATURE_REFINEMENT", "continuous", tol)
    q2 = replace(q, panels=2 * q.panels)
    for t in range(cfg.trials):
        rng = stream(cfg.seed, "refine", t)
        dim, fld = _SHAPES[t % len(_SHAPES)]
        sp = lp(_NORMS[t % len(_NORMS)], dim, fld)
        kind = _cont_kind(t, sp)
        try:
            fam = _pool(cfg.seed, "refine", sp, 1)[0]
            f = _free_path(sp, rng, kind)
            k = cnt.SlackFunction.exact_deficit(sp, fam, 0.1, 0.01)
            vals = []
            for qq in (q, q2):
                res = cnt.cont_add_single(f, fam, k, qq, tol)
                vals.append((res.lhs, res.rhs, cnt.quadrature(f, lambda nd: nd.X, qq)[0]))
            diff = max(abs(vals[0][0] - vals[1][0]), abs(vals[0][1] - vals[1][1]),
                       float(np.abs(vals[0][2] - vals[1][2]).max()))
            acc.numeric(t, diff, 1e-9, kind, lambda f=f: _path_json(f))
        except TrirevError as e:
            acc.error(t, e)
    out.append(acc.rec)
    return out


# ---- complex scalars ---------------------------------------------------------------------

_CMOD_S = (1.0, 2.0, 4.0, 6.0, INF)


def _mod(s, z):
    z = np.asarray(z, dtype=np.complex128)
    a, b = np.abs(z.real), np.abs(z.imag)
    if s is INF:
        return np.maximum(a, b)
    return (a ** s + b ** s) ** (1.0 / s)


def _factor(s):
    if s is INF:
        return math.sqrt(2.0)
    return 1.0 if s == 1.0 else 2.0 ** (0.5 - 1.0 / s)


def _slabel(s):
    return "INF" if s is INF else f"{s:g}"


def _cmod_records(cfg: SuiteConfig) -> list:
    tol = cfg.tol
    recs = []
    for s in _CMOD_S:
        sp = cmod(s)
        fac = _factor(s)

        # reverse with the margin hypothesis r_k|x|_s ≤ Re a_k·Re x − Im a_k·Im x
        acc = _Acc(f"CMOD{_slabel(s)}_MULT_SUMFUNC", "complex_scalars", tol)
        for t in range(cfg.trials):
            rng = stream(cfg.seed, "cmod-mult", _slabel(s), t)
            m = int(rng.integers(1, 4))
            ph = float(rng.uniform(-math.pi, math.pi))
            a = [complex(rng.uniform(0.5, 2.0) * np.exp(1j * (ph + rng.uniform(-0.4, 0.4)))) for _ in range(m)]
            fam = FunctionalFamily(tuple(Functional(sp, np.array([ak])) for ak in a))
            try:
                gcfg = gen.GenConfig(seed=int(rng.integers(0, 2 ** 62)), n=int(rng.integers(2, 6)), space=sp)
                inst = gen.gen_margin(gcfg, fam, gen.feasible_margins(fam, rng), tol)
                res = dsc.mult_sumfunc(inst, tol)
                acc.bound(t, res, lambda inst=inst: dsc.instance_to_json(inst))
                x = inst.vectors[:, 0]
                r = np.array(inst.hypothesis.r)
                lhs = float(_mod(s, x).sum())
                rhs = fac * abs(sum(a)) / float(r.sum()) * float(_mod(s, x.sum()))
                hyp = min(float((ak.real * x.real - ak.imag * x.imag - rk * _mod(s, x)).min())
                          for ak, rk in zip(a, r))
                acc.rec.extras["formula_gap"] = max(acc.rec.extras.get("formula_gap", 0.0),
                                                    abs(lhs - res.lhs) / max(1, lhs), abs(rhs - res.rhs) / max(1, rhs))
                if hyp < -tol.abs or lhs > rhs + tol.allowance(lhs, rhs):
                    acc.rec.violations.append({"trial": t, "check": "explicit_formula", "lhs": lhs, "rhs": rhs})
            except TrirevError as e:
                acc.error(t, e)
        try:
            # equality needs common phase ω with Σa·z₀ real for the norming z₀ of the s-modulus
            om = {1.0: 1.0, 2.0: np.exp(0.3j)}.get(s, (1 - 1j) / math.sqrt(2))
            fam = FunctionalFamily((Functional(sp, np.array([1.0 * om])), Functional(sp, np.array([0.6 * om]))))
            acc.equality(dsc.mult_sumfunc(dsc.equality_instance(TheoremId.MULT_SUMFUNC,
                                                                {"family": fam, "rho": 0.7, "n": 2}), tol))
        except TrirevError as e:
            acc.error(None, e, "equality")
        recs.append(acc.rec)

        # additive reverse with slacks M_jk
        acc = _Acc(f"CMOD{_slabel(s)}_ADD_FAMILY", "complex_scalars", tol)
        for t in range(cfg.trials):
            rng = stream(cfg.seed, "cmod-add", _slabel(s), t)
            m = int(rng.integers(1, 4))
            a = [complex(rng.uniform(0.3, 1.5) * np.exp(1j * rng.uniform(-math.pi, math.pi))) for _ in range(m)]
            fam = FunctionalFamily(tuple(Functional(sp, np.array([ak])) for ak in a))
            try:
                gcfg = gen.GenConfig(seed=int(rng.integers(0, 2 ** 62)), n=int(rng.integers(2, 6)), space=sp)
                inst = gen.gen_slack(gcfg, fam)
                res = dsc.add_family(inst, tol)
                acc.bound(t, res, lambda inst=inst: dsc.instance_to_json(inst))
                x = inst.vectors[:, 0]
                M = inst.hypothesis.M
                lhs = float(_mod(s, x).sum())
                rhs = fac * abs(sum(a)) / m * float(_mod(s, x.sum())) + float(M.sum()) / m
                acc.rec.extras["formula_gap"] = max(acc.rec.extras.get("formula_gap", 0.0),
                                                    abs(lhs - res.lhs) / max(1, lhs), abs(rhs - res.rhs) / max(1, rhs))
                if lhs > rhs + tol.allowance(lhs, rhs):
                    acc.rec.violations.append({"trial": t, "check": "explicit_formula", "lhs": lhs, "rhs": rhs})
            except TrirevError as e:
                acc.error(t, e)
        recs.append(acc.rec)

        # integral forms with a unit functional F(z) = c z, |c| = 1/factor
        for kind in ("CONT_MULT_SINGLE", "CONT_ADD_SINGLE"):
            acc = _Acc(f"CMOD{_slabel(s)}_{kind}", "complex_scalars", tol)
            for t in range(cfg.trials):
                rng = stream(cfg.seed, "cmod-cont", kind, _slabel(s), t)
                c = complex(np.exp(1j * rng.uniform(-math.pi, math.pi)) / fac)
                F = Functional(sp, np.array([c]))
                fam = FunctionalFamily((F,))
                try:
                    if kind == "CONT_MULT_SINGLE":
                        r = gen.feasible_margins(fam, rng)
                        gcfg = gen.GenConfig(seed=int(rng.integers(0, 2 ** 62)), n=3, space=sp)
                        f = _margin_path(sp, fam, r, rng, ("polynomial", "complex_phase", "circular")[t % 3], gcfg)
                        res = cnt.cont_mult_single(f, F, r[0], cfg.quad, tol)
                        lhs = r[0] * cnt.integrate_scalar(f, lambda ts, X: _mod(s, X[:, 0]), cfg.quad).real
                        rhs = float(_mod(s, cnt.integrate_vec(f, cfg.quad)[0]))
                    else:
                        f = _free_path(sp, rng, ("polynomial", "complex_phase", "piecewise")[t % 3])
                        k = cnt.SlackFunction.exact_deficit(sp, fam, float(rng.uniform(0, 0.3)), 0.0)
                        res = cnt.cont_add_single(f, F, k, cfg.quad, tol)
                        lhs = (cnt.integrate_scalar(f, lambda ts, X: _mod(s, X[:, 0]), cfg.quad).real
                               - float(_mod(s, cnt.integrate_vec(f, cfg.quad)[0])))
                        rhs = res.rhs
                    acc.bound(t, res, lambda f=f: _path_json(f))
                    acc.rec.extras["formula_gap"] = max(acc.rec.extras.get("formula_gap", 0.0),
                                                        abs(lhs - res.lhs), abs(rhs - res.rhs))
                    if lhs > rhs + tol.allowance(lhs, rhs):
                        acc.rec.violations.append({"trial": t, "check": "explicit_formula", "lhs": lhs, "rhs": rhs})
                except (DegenerateInstance, HypothesisViolation):
                    acc.rec.trials += 1
                    acc.rec.hypothesis_rejections += 1
                except TrirevError as e:
                    acc.error(t, e)
            recs.append(acc.rec)
    return recs


# ---- constants ---------------------------------------------------------------------------

def _constants_records(cfg: SuiteConfig) -> list:
    tol = cfg.tol
    indep = SearchConfig(seeded_starts=False)
    agree = _Acc("C2_GRAM_VS_SPHERE", "constants", tol)
    caps = _Acc("CP_CAPS", "constants", tol)
    unit = _Acc("C2_UNIT_RANGE", "constants", tol)
    for t in range(cfg.trials):
        rng = stream(cfg.seed, "constants", t)
        dim = int(rng.integers(1, 9))
        m = int(rng.integers(1, 9))
        sp = lp(2, dim, "complex" if t % 2 else "real")
        fam = gen.random_family(sp, rng, m, unit=bool(t % 3 != 2))
        g = gram_eigen(fam).value
        s = sphere_search(fam, 2.0, indep).value
        agree.numeric(t, abs(g - s) / max(g, 1e-300), 1e-6, "relative_gap",
                      lambda fam=fam: dsc.pairs(fam.matrix))
        for p in (1.0, 3.0, INF):
            est = family_constant(fam, p)
            caps.numeric(t, est.value - family_cap(fam, p), 1e-9, f"cap[p={p}]",
                         lambda fam=fam: dsc.pairs(fam.matrix))
        if t % 3 != 2:
            c2 = g * g
            unit.numeric(t, max(1 - 1e-9 - c2, c2 - m - 1e-9), 0.0, "range",
                         lambda fam=fam: dsc.pairs(fam.matrix))
    opn = _Acc("CMOD_OPNORM", "constants", tol)
    for t in range(cfg.trials):
        rng = stream(cfg.seed, "cmod-norm", t)
        a = complex(rng.standard_normal() + 1j * rng.standard_normal())
        s = _CMOD_S[t % len(_CMOD_S)]
        F = Functional(cmod(s), np.array([a]))
        exact = _factor(s) * abs(a)
        rel = abs(op_norm(F).value - exact) / exact
        srch = abs(sphere_search(FunctionalFamily((F,)), 2.0, indep).value - exact) / exact
        opn.numeric(t, max(rel - 1e-12, srch - 1e-6), 0.0, f"cmod({_slabel(s)})")
    return [agree.rec, caps.rec, unit.rec, opn.rec]


# ---- sharpness ----------------------------------------------------------------------------

SHARP_TASKS = (TheoremId.MULT_SUMFUNC, TheoremId.DM_SINGLE)


def _sharp_record(cfg: SuiteConfig, tid: TheoremId) -> Record:
    acc = _Acc(f"SHARP_{tid.value}", "sharpness", cfg.tol)
    res = gen.sharpness_search(tid, None, cfg.sharpness_budget, seed=cfg.seed, tol=cfg.tol)
    acc.rec.trials = 1
    acc.rec.max_violation = float(cfg.tol.excess(res.best_ratio, res.bound))
    acc.rec.extras = {"best_ratio": res.best_ratio, "bound": res.bound, "evaluations": res.evaluations,
                      "gap_to_bound": res.bound - res.best_ratio}
    if res.exceeded:
        acc.rec.violations.append({"trial": 0, "lhs": res.best_ratio, "rhs": res.bound,
                                   "excess": acc.rec.max_violation,
                                   "witness": dsc.instance_to_json(res.witness)})
    return acc.rec


# ---- transformer soundness --------------------------------------------------------------

def transformer_soundness(seed: int, configs: int = 20, points: int = 10_000, tol: Tolerance = None) -> Record:
    """Sampled points of random balls and bands against the derived margins and slacks."""
    tol = tol or Tolerance()
    acc = _Acc("TRANSFORMERS", "discrete", tol)
    for c in range(configs):
        rng = stream(seed, "transformers", c)
        dim, fld = _SHAPES[c % len(_SHAPES)]
        sp = lp(2, dim, fld)
        y = gen._unit(sp, random_vector(rng, dim, fld == "real"))
        if c % 2 == 0:
            a = float(rng.uniform(0.5, 3.0)) * y
            rad = float(rng.uniform(0.05, 0.95)) * float(norms(sp, a[None])[0])
            h = BallHypothesis(sp, a, rad)
            xs = gen.sample_ball(sp, rng, a, rad, points)
            r = ball_to_margin(h)
            ms = (xs @ np.conj(a)).real - r * norms(sp, xs)
            # slack form with a unit center: ‖x‖ − Re⟨x, e⟩ ≤ ½ r² when ‖x − e‖ ≤ r
            rad1 = float(rng.uniform(0.05, 0.95))
            x1 = gen.sample_ball(sp, rng, y, rad1, points)
            sl = ball_to_slack(rad1) - (norms(sp, x1) - (x1 @ np.conj(y)).real)
        else:
            lo = float(rng.uniform(0.2, 2.0))
            up = lo * float(rng.uniform(1.0, 4.0))
            yy = float(rng.uniform(0.5, 2.0)) * y
            h = BandHypothesis(sp, yy, lo, up)
            b = h.as_ball()
            xs = gen.sample_ball(sp, rng, b.center, b.radius, points)
            ms = (xs @ np.conj(yy)).real - band_to_margin(h) * norms(sp, xs)
            hu = BandHypothesis(sp, y, lo, up)
            bu = hu.as_ball()
            x1 = gen.sample_ball(sp, rng, bu.center, bu.radius, points)
            sl = band_to_slack(hu) - (norms(sp, x1) - (x1 @ np.conj(y)).real)
        worst = float(min(ms.min(), sl.min()))
        acc.numeric(c, -worst, tol.abs, "margin_and_slack")
    w = ball_equality_witness(lp(2, 2), [1.0, 0.0], 0.6)
    acc.rec.extras["equality_witness"] = dsc.pairs(w)
    return acc.rec


# ---- orchestration ------------------------------------------------------------------------

def _tasks(cfg: SuiteConfig) -> list:
    tasks = []
    if "discrete" in cfg.suites:
        tasks += [lambda tid=tid, p=p: [_discrete_record(cfg, tid, p)] for tid, p in DISCRETE_TASKS]
        tasks.append(lambda: [transformer_soundness(cfg.seed, 20, 2_000, cfg.tol)])
    if "continuous" in cfg.suites:
        tasks += [lambda n=n, p=p: [_cont_record(cfg, n, p)] for n, p in CONT_TASKS]
        tasks.append(lambda: _anchor_records(cfg))
    if "complex_scalars" in cfg.suites:
        tasks.append(lambda: _cmod_records(cfg))
    if "constants" in cfg.suites:
        tasks.append(lambda: _constants_records(cfg))
    if "sharpness" in cfg.suites:
        tasks += [lambda tid=tid: [_sharp_record(cfg, tid)] for tid in SHARP_TASKS]
    return tasks


def run_suite(cfg: SuiteConfig) -> dict:
    """Run the selected suites; the result is fully determined by ``cfg``."""
    tasks = _tasks(cfg)
    if cfg.jobs > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as ex:
            chunks = list(ex.map(lambda f: f(), tasks))
    else:
        chunks = [f() for f in tasks]
    records = [r for ch in chunks for r in ch]
    nviol = sum(len(r.violations) for r in records)
    nerr = sum(len(r.errors) for r in records)
    return {
        "envelope": {"generated_at": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
                     "tool": "trirev"},
        "environment": {
            "seed": cfg.seed,
            "tolerances": {"abs": cfg.tol_abs, "rel": cfg.tol_rel},
            "version": __version__,
            "backend": BACKEND,
            "suites": list(cfg.suites),
            "trials": cfg.trials,
            "quadrature": {"rule": cfg.quad.rule, "order": cfg.quad.order, "panels": cfg.quad.panels,
                           "refinement": cfg.quad.refinement},
            "sharpness_budget": cfg.sharpness_budget,
        },
        "records": [r.to_json() for r in records],
        "summary": {"records": len(records), "violations": nviol, "errors": nerr,
                    "passed": nviol == 0 and nerr == 0},
    }


def exit_code(report: dict) -> int:
    s = report["summary"]
    if s["violations"]:
        return 2
    if s["errors"]:
        return 3
    return 0


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, allow_nan=False) + "\n"


def strip_envelope(report: dict) -> dict:
    return {k: v for k, v in report.items() if k != "envelope"}
