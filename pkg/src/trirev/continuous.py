"""Integral (Bochner) reverse inequalities evaluated by composite quadrature."""
from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from . import discrete as dsc
from .discrete import CheckResult, Margin, _result, _strict_center
from .errors import ContractViolation, ConvergenceFailure, HypothesisViolation, UnsupportedStructure
from .functionals import (DEFAULT_SEARCH, Functional, FunctionalFamily, SearchConfig,
                          family_constant, family_norms, op_norm, re_maximizer)
from .spaces import (DEFAULT_TOL, INF, Field, SpaceSpec, Tolerance, as_vector, as_vectors,
                     exponent, exponent_label, norms)
from .transformers import (BallHypothesis, BandHypothesis, ball_to_margin, band_to_margin)


class ContTheoremId(str, enum.Enum):
    CONT_MULT_SINGLE = "CONT_MULT_SINGLE"
    CONT_MULT_FAMILY = "CONT_MULT_FAMILY"
    CONT_MULT_CINF = "CONT_MULT_CINF"
    CONT_MULT_CP = "CONT_MULT_CP"
    CONT_MULT_BALL = "CONT_MULT_BALL"
    CONT_MULT_BAND = "CONT_MULT_BAND"
    CONT_ADD_SINGLE = "CONT_ADD_SINGLE"
    CONT_ADD_FAMILY = "CONT_ADD_FAMILY"
    CONT_ADD_CINF = "CONT_ADD_CINF"
    CONT_ADD_CP = "CONT_ADD_CP"
    CONT_ADD_BALL = "CONT_ADD_BALL"
    CONT_ADD_BAND = "CONT_ADD_BAND"


QUAD_NOTE = "conditions certified within quadrature tolerance"


@dataclass(frozen=True)
class QuadratureSpec:
    rule: str = "gauss_legendre"  # or "simpson"
    order: int = 8
    panels: int = 16
    refinement: int = 6
    conv_abs: float = 1e-11
    conv_rel: float = 1e-11

    def __post_init__(self):
        if self.rule not in ("gauss_legendre", "simpson"):
            raise ContractViolation(f"unknown quadrature rule {self.rule!r}")
        if self.order < 2 or self.panels < 1 or self.refinement < 0:
            raise ContractViolation("need order >= 2, panels >= 1, refinement >= 0")


DEFAULT_QUAD = QuadratureSpec()


@functools.lru_cache(maxsize=64)
def _reference_rule(rule: str, order: int):
    if rule == "simpson":
        return np.array([-1.0, 0.0, 1.0]), np.array([1.0, 4.0, 1.0]) / 3.0
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


# ---- paths --------------------------------------------------------------------

@dataclass(frozen=True)
class Segment:
    lo: float
    hi: float
    fn: Callable  # vectorized t -> (N, dim)


@dataclass(frozen=True, eq=False)
class PathFunction:
    """An evaluable path t -> f(t) on [a, b], possibly piecewise."""

    space: SpaceSpec
    a: float
    b: float
    segments: tuple
    catalog_id: Optional[str] = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b) and self.a < self.b):
            raise ContractViolation("path domain must be a finite interval with a < b")
        segs = tuple(self.segments)
        if not segs or segs[0].lo != self.a or segs[-1].hi != self.b:
            raise ContractViolation("segments must cover [a, b]")
        for s0, s1 in zip(segs, segs[1:]):
            if s0.hi != s1.lo:
                raise ContractViolation("segments must be contiguous")
        object.__setattr__(self, "segments", segs)

    @property
    def breakpoints(self) -> tuple:
        return tuple(s.hi for s in self.segments[:-1])

    def segment_index(self, ts) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        his = np.array([s.hi for s in self.segments[:-1]])
        return np.searchsorted(his, ts, side="right")

    def _eval_seg(self, k: int, ts) -> np.ndarray:
        X = np.asarray(self.segments[k].fn(np.asarray(ts, dtype=float)), dtype=np.complex128)
        X = X.reshape(len(ts), self.space.dim)
        if not np.all(np.isfinite(X)):
            raise ContractViolation("path produced non-finite values")
        if self.space.field is Field.REAL and np.any(X.imag != 0):
            raise ContractViolation("complex path values in a real-field space")
        return X

    def values(self, ts, seg=None) -> np.ndarray:
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        seg = self.segment_index(ts) if seg is None else np.asarray(seg)
        out = np.empty((ts.size, self.space.dim), dtype=np.complex128)
        for k in np.unique(seg):
            mask = seg == k
            out[mask] = self._eval_seg(int(k), ts[mask])
        return out

    def __call__(self, t) -> np.ndarray:
        return self.values([t])[0]

    @functools.cached_property
    def kinks(self) -> tuple:
        """Interior points where ‖f(t)‖ may fail to be smooth."""
        found = []
        for k, s in enumerate(self.segments):
            found += _kinks_on(self.space, lambda ts, k=k: self._eval_seg(k, ts), s.lo, s.hi)
        return tuple(sorted(found))

    @functools.cached_property
    def graded(self) -> tuple:
        """Edges clustered geometrically around near-zero minima of ‖f(t)‖.

        Near such a point the norm looks like sqrt((t−t0)² + δ²), smooth but with
        curvature on the small scale δ that uniform panels resolve slowly.
        """
        L = self.b - self.a
        out = []
        for k, s in enumerate(self.segments):
            fn = lambda ts, k=k: self._eval_seg(k, ts)
            ts = np.linspace(s.lo, s.hi, 2049)
            nv = np.linalg.norm(fn(ts), axis=1)
            top = nv.max()
            if top == 0:
                continue
            for i in range(1, len(ts) - 1):
                if not (nv[i] <= nv[i - 1] and nv[i] <= nv[i + 1] and nv[i] < 0.05 * top):
                    continue
                lo, hi = ts[i - 1], ts[i + 1]
                g = lambda t: float(np.linalg.norm(fn(np.array([t]))[0]))
                for _ in range(100):  # golden section on the bracketed minimum
                    m1, m2 = hi - 0.618 * (hi - lo), lo + 0.618 * (hi - lo)
                    if g(m1) < g(m2):
                        hi = m2
                    else:
                        lo = m1
                t0 = 0.5 * (lo + hi)
                h = 1e-6 * L
                slope = np.linalg.norm(fn(np.array([t0 + h]))[0] - fn(np.array([t0 - h]))[0]) / (2 * h)
                delta = g(t0) / slope if slope > 0 else 0.0
                floor = max(delta / 8, 1e-12 * L)
                off = L / 16
                while off > floor:
                    out += [t0 - off, t0 + off]
                    off *= 0.5
                out.append(t0)
        return tuple(t for t in out if self.a < t < self.b)

    def panel_edges(self, panels: int) -> np.ndarray:
        base = np.linspace(self.a, self.b, panels + 1)
        extra = np.array(self.breakpoints + self.kinks + self.graded, dtype=float)
        edges = np.union1d(base, extra)
        # drop slivers produced by near-coincident kinks and grid points
        keep = np.concatenate([[True], np.diff(edges) > 1e-13 * (self.b - self.a)])
        edges = edges[keep]
        edges[-1] = self.b
        return edges


def _indicators(space: SpaceSpec, X: np.ndarray) -> np.ndarray:
    """Columns whose sign changes locate kinks of the norm along a path."""
    p = space.norm.p
    if space.is_cmod:
        z = X[:, 0]
        cols = [z.real, z.imag]
        if p is INF:
            cols += [z.real + z.imag, z.real - z.imag]
        return np.stack(cols, axis=1)
    if p == 2.0:
        return np.zeros((X.shape[0], 0))
    if p is INF:
        a2 = np.abs(X) ** 2
        n = X.shape[1]
        cols = [a2[:, j] - a2[:, l] for j in range(n) for l in range(j + 1, n)]
        if space.field is Field.REAL:
            cols += [X[:, j].real for j in range(n)]
        return np.stack(cols, axis=1) if cols else np.zeros((X.shape[0], 0))
    if space.field is Field.REAL:
        return X.real
    return np.concatenate([X.real, X.imag], axis=1)


def _kinks_on(space, fn, lo, hi, grid=2048):
    ts = np.linspace(lo, hi, grid + 1)
    Y = _indicators(space, fn(ts))
    if Y.shape[1] == 0:
        return []
    scale = max(1.0, float(np.abs(Y).max()))
    Y = np.where(np.abs(Y) <= 1e-14 * scale, 0.0, Y)
    roots = []
    for c in range(Y.shape[1]):
        y = Y[:, c]
        sg = np.sign(y)
        for i in np.flatnonzero(sg[:-1] * sg[1:] < 0):
            a, b = ts[i], ts[i + 1]
            fa = y[i]
            for _ in range(80):
                mid = 0.5 * (a + b)
                fm = _indicators(space, fn(np.array([mid])))[0, c]
                if fm == 0:
                    a = b = mid
                    break
                if (fm > 0) == (fa > 0):
                    a, fa = mid, fm
                else:
                    b = mid
                if b - a <= 1e-15 * max(1.0, abs(mid)):
                    break
            roots.append(0.5 * (a + b))
        # exact zeros on interior grid points where the sign flips across
        for i in np.flatnonzero(sg == 0):
            if 0 < i < grid and sg[i - 1] * sg[i + 1] < 0:
                roots.append(float(ts[i]))
    return [r for r in roots if lo < r < hi]


def _single(space, a, b, fn, catalog_id, params) -> PathFunction:
    return PathFunction(space, float(a), float(b), (Segment(float(a), float(b), fn),),
                        catalog_id, params)


def constant(space: SpaceSpec, v, a: float = 0.0, b: float = 1.0) -> PathFunction:
    v = as_vector(space, v)
    return _single(space, a, b, lambda ts: np.tile(v, (len(ts), 1)), "constant", {"v": v})


def circular(space: SpaceSpec, a: float, b: float, omega: float = 1.0, u=None, w=None,
             scale: float = 1.0) -> PathFunction:
    """scale·(cos ωt·u + sin ωt·w); defaults u = e_1, w = e_2."""
    if u is None or w is None:
        if space.dim < 2:
            raise ContractViolation("circular path needs dim >= 2 or explicit u, w")
        I = np.eye(space.dim)
        u, w = I[0], I[1]
    u, w = as_vector(space, u), as_vector(space, w)
    fn = lambda ts: scale * (np.cos(omega * ts)[:, None] * u + np.sin(omega * ts)[:, None] * w)
    return _single(space, a, b, fn, "circular", {"omega": omega, "u": u, "w": w, "scale": scale})


def complex_phase(space: SpaceSpec, a: float, b: float, omega: float = 1.0, v=None) -> PathFunction:
    """e^{iωt}·v on a complex space; default v = e_1."""
    if space.field is not Field.COMPLEX:
        raise UnsupportedStructure("complex_phase needs a complex-field space")
    if v is None:
        v = np.eye(space.dim)[0]
    v = as_vector(space, v)
    fn = lambda ts: np.exp(1j * omega * ts)[:, None] * v
    return _single(space, a, b, fn, "complex_phase", {"omega": omega, "v": v})


def polynomial(space: SpaceSpec, coeffs, a: float, b: float) -> PathFunction:
    """Σ_j c_j t^j with coefficient vectors c_j."""
    C = as_vectors(space, coeffs)

    def fn(ts):
        out = np.zeros((len(ts), space.dim), dtype=np.complex128)
        for c in C[::-1]:
            out = out * ts[:, None] + c
        return out

    return _single(space, a, b, fn, "polynomial", {"coeffs": C})


def bezier(space: SpaceSpec, control, a: float, b: float) -> PathFunction:
    """Polynomial path in Bernstein form; it stays inside the convex hull of ``control``."""
    P = as_vectors(space, control)
    deg = P.shape[0] - 1
    binom = np.array([math.comb(deg, j) for j in range(deg + 1)], dtype=float)

    def fn(ts):
        s = (ts - a) / (b - a)
        j = np.arange(deg + 1)
        B = binom * s[:, None] ** j * (1.0 - s[:, None]) ** (deg - j)
        return B @ P

    return _single(space, a, b, fn, "polynomial", {"control": P})


def piecewise(pieces: Sequence[PathFunction]) -> PathFunction:
    pieces = list(pieces)
    if not pieces:
        raise ContractViolation("piecewise path needs pieces")
    sp = pieces[0].space
    segs = []
    for pc in pieces:
        if pc.space != sp:
            raise ContractViolation("pieces must share one space")
        segs += list(pc.segments)
    return PathFunction(sp, pieces[0].a, pieces[-1].b, tuple(segs), "piecewise",
                        {"pieces": [pc.catalog_id for pc in pieces]})


def piecewise_constant(space: SpaceSpec, values, a: float = 0.0, b: Optional[float] = None) -> PathFunction:
    """x_1, ..., x_n on consecutive subintervals of equal length (default [0, n])."""
    V = as_vectors(space, values)
    n = V.shape[0]
    b = float(n) if b is None else float(b)
    edges = np.linspace(a, b, n + 1)
    edges[0], edges[-1] = a, b
    return piecewise([constant(space, V[i], edges[i], edges[i + 1]) for i in range(n)])


# ---- slack functions --------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SlackFunction:
    """Nonnegative slack M_k(t); fn(ts, X, seg) -> (N, m) where X = f(ts)."""

    fn: Callable
    m: int
    label: str = "custom"

    def evaluate(self, ts, X, seg) -> np.ndarray:
        M = np.asarray(self.fn(ts, X, seg), dtype=float).reshape(len(ts), self.m)
        if not np.all(np.isfinite(M)):
            raise ContractViolation("slack function produced non-finite values")
        return M

    @classmethod
    def constant(cls, values) -> "SlackFunction":
        v = np.atleast_1d(np.asarray(values, dtype=float))
        if np.any(v < 0):
            raise ContractViolation("slack must be nonnegative")
        return cls(lambda ts, X, seg: np.tile(v, (len(ts), 1)), len(v), "constant")

    @classmethod
    def of_time(cls, fn: Callable, m: int = 1) -> "SlackFunction":
        return cls(lambda ts, X, seg: fn(ts), m, "time")

    @classmethod
    def exact_deficit(cls, space, family, inflate: float = 0.0, add: float = 0.0) -> "SlackFunction":
        """(1 + inflate)·max(‖f(t)‖ − Re F_k(f(t)), 0) + add."""
        fam = FunctionalFamily.of(family)

        def fn(ts, X, seg):
            d = norms(space, X)[:, None] - fam.values_many(X).real
            return (1.0 + inflate) * np.maximum(d, 0.0) + add

        return cls(fn, fam.m, "exact_deficit")

    @classmethod
    def piecewise_constant(cls, M) -> "SlackFunction":
        """Row i applies on the i-th piece of a piecewise path."""
        M = np.atleast_2d(np.asarray(M, dtype=float))
        return cls(lambda ts, X, seg: M[np.asarray(seg)], M.shape[1], "piecewise_constant")


# ---- quadrature ------------------------------------------------------------------------

@dataclass
class Nodes:
    ts: np.ndarray
    weights: np.ndarray
    seg: np.ndarray
    X: np.ndarray
    panels: int


def _nodes(f: PathFunction, q: QuadratureSpec, panels: int) -> Nodes:
    xr, wr = _reference_rule(q.rule, q.order)
    edges = f.panel_edges(panels)
    lo, hi = edges[:-1], edges[1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    ts = (mid[:, None] + half[:, None] * xr[None, :]).ravel()
    w = (half[:, None] * wr[None, :]).ravel()
    seg = np.repeat(f.segment_index(mid), len(xr))
    return Nodes(ts, w, seg, f.values(ts, seg), len(lo))


def _weighted_sum(w: np.ndarray, V: np.ndarray) -> np.ndarray:
    return (w[:, None] * V).sum(axis=0)


def quadrature(f: PathFunction, columns: Callable, q: QuadratureSpec = DEFAULT_QUAD):
    """Integrate columns(nodes) -> (N, d) with panel doubling until it settles.

    Returns (integral, nodes) at the accepted level.
    """
    prev = None
    for lev in range(q.refinement + 1):
        nd = _nodes(f, q, q.panels * 2 ** lev)
        V = columns(nd)
        I = _weighted_sum(nd.weights, V)
        if prev is not None:
            d = np.abs(I - prev)
            allow = q.conv_abs + q.conv_rel * np.maximum(np.abs(I), np.abs(prev))
            if np.all(d <= allow):
                return I, nd
        prev = I
    raise ConvergenceFailure(
        f"quadrature did not settle after {q.refinement} doublings of {q.panels} panels")


def integrate_vec(f: PathFunction, q: QuadratureSpec = DEFAULT_QUAD) -> np.ndarray:
    I, _ = quadrature(f, lambda nd: nd.X, q)
    return I


def integrate_scalar(f: PathFunction, g: Callable, q: QuadratureSpec = DEFAULT_QUAD) -> float:
    """∫ g(t, f(t)) dt for a scalar-valued g; complex only when g is."""
    I, _ = quadrature(f, lambda nd: np.asarray(g(nd.ts, nd.X))[:, None], q)
    return complex(I[0]) if np.iscomplexobj(I) else float(I[0])


@dataclass
class _Integrals:
    If: np.ndarray
    Inorm: float
    IM: Optional[np.ndarray]
    nodes: Nodes
    nx: np.ndarray
    FX: Optional[np.ndarray]
    Mv: Optional[np.ndarray]


def _integrals(f: PathFunction, fam: Optional[FunctionalFamily], slack: Optional[SlackFunction],
               q: QuadratureSpec) -> _Integrals:
    d = f.space.dim
    cache = {}

    def columns(nd):
        nx = norms(f.space, nd.X)
        cols = [nd.X, nx[:, None].astype(np.complex128)]
        Mv = None
        if slack is not None:
            Mv = slack.evaluate(nd.ts, nd.X, nd.seg)
            cols.append(Mv.astype(np.complex128))
        cache["nx"], cache["Mv"] = nx, Mv
        return np.concatenate(cols, axis=1)

    I, nd = quadrature(f, columns, q)
    IM = I[d + 1:].real if slack is not None else None
    FX = fam.values_many(nd.X) if fam is not None else None
    return _Integrals(I[:d], float(I[d].real), IM, nd, cache["nx"], FX, cache["Mv"])


def _node_margin_violations(J: _Integrals, r, tol):
    out = []
    worst = math.inf
    re = J.FX.real
    for k, rk in enumerate(r):
        lhs = rk * J.nx
        gaps = re[:, k] - lhs
        worst = min(worst, float(gaps.min()))
        for i in np.flatnonzero([not tol.leq(lhs[i], re[i, k]) for i in range(len(lhs))]):
            out.append((float(J.nodes.ts[i]), k + 1))
    return out, worst


def _node_slack_violations(J: _Integrals, tol):
    out = []
    d = J.nx[:, None] - J.FX.real
    gaps = J.Mv - d
    if np.any(J.Mv < -tol.abs):
        raise ContractViolation("slack function is negative at some node")
    for i, k in zip(*np.nonzero(gaps < 0)):
        if not tol.leq(d[i, k], J.Mv[i, k]):
            out.append((float(J.nodes.ts[i]), int(k) + 1))
    return out, float(gaps.min())


def cont_margin_check(f: PathFunction, F_or_family, r, q: QuadratureSpec = DEFAULT_QUAD,
                      tol: Tolerance = DEFAULT_TOL) -> list:
    """Failing (t, k) among the quadrature nodes of the base grid."""
    fam = FunctionalFamily.of(F_or_family)
    r = tuple(np.atleast_1d(np.asarray(r, dtype=float)))
    if len(r) != fam.m:
        raise ContractViolation("one margin per functional")
    nd = _nodes(f, q, q.panels)
    J = _Integrals(None, 0.0, None, nd, norms(f.space, nd.X), fam.values_many(nd.X), None)
    return _node_margin_violations(J, r, tol)[0]


def _norm(space, v):
    return float(norms(space, np.asarray(v)[None])[0])


# ---- multiplicative ---------------------------------------------------------------------

def cont_mult_single(f: PathFunction, F: Functional, r: float, q: QuadratureSpec = DEFAULT_QUAD,
                     tol: Tolerance = DEFAULT_TOL) -> CheckResult:
    """r∫‖f‖ ≤ ‖∫f‖ for unit F with r‖f(t)‖ ≤ Re F(f(t))."""
    fam = FunctionalFamily.of(F)
    if fam.m != 1:
        raise ContractViolation("cont_mult_single needs one functional")
    F = fam[0]
    nF = op_norm(F).value
    if not tol.close(nF, 1.0):
        raise HypothesisViolation(f"functional must have unit norm, has {nF!r}")
    J = _integrals(f, fam, None, q)
    viol, worst = _node_margin_violations(J, (r,), tol)
    nI = _norm(f.space, J.If)
    FI = F(J.If)
    conds = {
        "value_equals_margin_integral": tol.close(FI, r * J.Inorm),
        "value_equals_norm_of_integral": tol.close(FI, nI),
    }
    e = _strict_center(F, f.space)
    if e is not None:
        conds["integral_is_scaled_center"] = tol.close_vec(J.If, r * J.Inorm * e)
    extras = {"nodes": int(J.nodes.ts.size), "panels": J.nodes.panels, "worst_margin": worst,
              "K": (1.0 / r) if r > 0 else None}
    return _result(ContTheoremId.CONT_MULT_SINGLE, r * J.Inorm, nI, viol, conds, tol, extras, QUAD_NOTE)


def cont_mult_family(f: PathFunction, family, r_k, q: QuadratureSpec = DEFAULT_QUAD, p=None,
                     tol: Tolerance = DEFAULT_TOL, search: SearchConfig = DEFAULT_SEARCH) -> CheckResult:
    """∫‖f‖ ≤ (‖ΣF_k‖/Σr_k)‖∫f‖; with ``p`` the ratio form against c_p or c_inf."""
    fam = FunctionalFamily.of(family)
    r = np.atleast_1d(np.asarray(r_k, dtype=float))
    if r.size != fam.m or np.any(r < 0):
        raise ContractViolation("one nonnegative margin per functional")
    sp = f.space
    J = _integrals(f, fam, None, q)
    viol, worst = _node_margin_violations(J, tuple(r), tol)
    nI = _norm(sp, J.If)
    extras = {"nodes": int(J.nodes.ts.size), "panels": J.nodes.panels, "worst_margin": worst,
              "norm_of_integral": nI}
    Fn = family_norms(fam)
    if p is None:
        rs = float(r.sum())
        if not rs > 0:
            raise ContractViolation("need Σ r_k > 0")
        Fs = fam.sum_functional()
        K = op_norm(Fs).value
        FsI = Fs(J.If)
        conds = {
            "sum_value_equals_margin_integral": tol.close(FsI, rs * J.Inorm),
            "sum_value_equals_norm_product": tol.close(FsI, K * nI),
        }
        extras["coarse_rhs"] = float(Fn.sum()) / rs * nI
        if sp.is_hilbert:
            E = np.conj(Fs.representer)
            ne2 = float(np.vdot(E, E).real)
            if ne2 > 0:
                conds["integral_is_scaled_center_sum"] = tol.close_vec(J.If, rs * J.Inorm / ne2 * E)
            if fam.orthogonal:
                extras["orthogonal_rhs"] = math.sqrt(float((Fn ** 2).sum())) / rs * nI
            if fam.orthonormal:
                extras["orthonormal_rhs"] = math.sqrt(fam.m) / rs * nI
        return _result(ContTheoremId.CONT_MULT_FAMILY, J.Inorm, K / rs * nI, viol, conds, tol,
                       extras, QUAD_NOTE)
    p = exponent(p)
    if not r.max() > 0:
        raise ContractViolation("need some r_k > 0")
    if not nI > 1e-14 * max(J.Inorm, 1e-300):
        raise dsc.DegenerateInstance("∫f is numerically zero")
    est = family_constant(fam, p, search)
    c = est.value
    reFI = fam.values(J.If).real
    conds = {"each_real_value_equals_margin_integral":
             all(tol.close(reFI[k], r[k] * J.Inorm) for k in range(fam.m))}
    extras.update({"p": exponent_label(p), "c": c, "c_method": est.method})
    if p is INF:
        tid = ContTheoremId.CONT_MULT_CINF
        rhs = c / float(r.max())
        extras["coarse_rhs"] = float(Fn.max()) / float(r.max())
        conds["max_real_value_attains_constant"] = tol.close(float(reFI.max()), c * nI)
    else:
        tid = ContTheoremId.CONT_MULT_CP
        rhs = c / float((r ** p).sum()) ** (1.0 / p)
        extras["coarse_rhs"] = (float((Fn ** p).sum()) / float((r ** p).sum())) ** (1.0 / p)
        conds["power_sum_attains_constant"] = tol.close(
            float((np.maximum(reFI, 0.0) ** p).sum()) ** (1.0 / p), c * nI)
    return _result(tid, J.Inorm / nI, rhs, viol, conds, tol, extras, QUAD_NOTE)


def cont_mult_transformed(f: PathFunction, hypotheses: Sequence[Union[BallHypothesis, BandHypothesis]],
                          q: QuadratureSpec = DEFAULT_QUAD, tol: Tolerance = DEFAULT_TOL) -> CheckResult:
    """Ball or band hypotheses around centers e_k, turned into margins, then the family bound."""
    hs = list(hypotheses)
    if not hs:
        raise ContractViolation("need at least one hypothesis")
    sp = f.space
    if not sp.is_hilbert:
        raise UnsupportedStructure("transformed corollaries need lp(2)")
    is_ball = isinstance(hs[0], BallHypothesis)
    if any(isinstance(h, BallHypothesis) != is_ball for h in hs):
        raise ContractViolation("mix of ball and band hypotheses")
    if is_ball:
        r = [ball_to_margin(h) for h in hs]
        centers = [h.center for h in hs]
        tid = ContTheoremId.CONT_MULT_BALL
    else:
        r = [band_to_margin(h) for h in hs]
        centers = [h.direction for h in hs]
        tid = ContTheoremId.CONT_MULT_BAND
    fam = FunctionalFamily.from_vectors(sp, centers)
    res = cont_mult_family(f, fam, r, q, tol=tol)
    nd = _nodes(f, q, res.extras["panels"])
    geo = []
    for k, h in enumerate(hs):
        inside = h.contains(nd.X, slack=0.0)
        ball = h if is_ball else h.as_ball()
        dist = norms(sp, nd.X - ball.center)
        for i in np.flatnonzero(~inside):
            if not tol.leq(dist[i], ball.radius):
                geo.append((float(nd.ts[i]), k + 1))
    # report as (Σr_k/‖Σe_k‖)∫‖f‖ ≤ ‖∫f‖, the form the margins enter naturally
    nI = res.extras["norm_of_integral"]
    res.extras["family_form"] = {"lhs": res.lhs, "rhs": res.rhs}
    if res.rhs > 0:
        res.lhs = res.lhs * nI / res.rhs
        res.rhs = nI
        res.passed = tol.leq(res.lhs, res.rhs)
        res.equality.gap = abs(res.lhs - res.rhs)
    res.theorem_id = tid.value
    res.margin_violations = geo + res.margin_violations
    res.extras["margins"] = list(map(float, r))
    return res


# ---- additive ------------------------------------------------------------------------------

def cont_add_single(f: PathFunction, F: Functional, k: SlackFunction, q: QuadratureSpec = DEFAULT_QUAD,
                    tol: Tolerance = DEFAULT_TOL) -> CheckResult:
    """∫‖f‖ − ‖∫f‖ ≤ ∫k for unit F with ‖f(t)‖ − Re F(f(t)) ≤ k(t)."""
    fam = FunctionalFamily.of(F)
    if fam.m != 1 or k.m != 1:
        raise ContractViolation("cont_add_single needs one functional and one slack")
    F = fam[0]
    nF = op_norm(F).value
    if not tol.close(nF, 1.0):
        raise HypothesisViolation(f"functional must have unit norm, has {nF!r}")
    J = _integrals(f, fam, k, q)
    viol, worst = _node_slack_violations(J, tol)
    nI = _norm(f.space, J.If)
    Ik = float(J.IM[0])
    FI = F(J.If)
    conds = {
        "value_equals_norm_of_integral": tol.close(FI, nI),
        "value_equals_norm_integral_minus_slack": tol.close(FI, J.Inorm - Ik),
    }
    e = _strict_center(F, f.space)
    if e is not None:
        conds["norm_integral_dominates_slack"] = tol.leq(Ik, J.Inorm)
        conds["integral_is_scaled_center"] = tol.close_vec(J.If, (J.Inorm - Ik) * e)
    extras = {"nodes": int(J.nodes.ts.size), "panels": J.nodes.panels, "worst_slack": worst}
    return _result(ContTheoremId.CONT_ADD_SINGLE, J.Inorm - nI, Ik, viol, conds, tol, extras, QUAD_NOTE)


def cont_add_family(f: PathFunction, family, M_k: SlackFunction, q: QuadratureSpec = DEFAULT_QUAD,
                    p=None, tol: Tolerance = DEFAULT_TOL,
                    search: SearchConfig = DEFAULT_SEARCH) -> CheckResult:
    """∫‖f‖ ≤ ‖(1/m)ΣF_k‖‖∫f‖ + (1/m)Σ∫M_k; with ``p`` the c_p / c_inf forms."""
    fam = FunctionalFamily.of(family)
    if M_k.m != fam.m:
        raise ContractViolation("one slack function per functional")
    sp = f.space
    m = fam.m
    J = _integrals(f, fam, M_k, q)
    viol, worst = _node_slack_violations(J, tol)
    nI = _norm(sp, J.If)
    mbar = float(J.IM.sum()) / m
    extras = {"nodes": int(J.nodes.ts.size), "panels": J.nodes.panels, "worst_slack": worst,
              "slack_mean": mbar}
    Fn = family_norms(fam)
    if p is None:
        avg = fam.mean_functional()
        A = op_norm(avg).value
        aI = avg(J.If)
        conds = {
            "mean_value_attains_norm": tol.close(aI, A * nI),
            "mean_value_equals_norm_integral_minus_slack": tol.close(aI, J.Inorm - mbar),
        }
        if np.all(np.abs(Fn - 1.0) <= 1e-12):
            extras["unit_norm_rhs"] = nI + mbar
        if sp.is_hilbert:
            E = np.conj(fam.matrix).sum(axis=0)
            ne2 = float(np.vdot(E, E).real)
            conds["norm_integral_dominates_slack"] = tol.leq(mbar, J.Inorm)
            if ne2 > 0:
                conds["integral_is_scaled_center_sum"] = tol.close_vec(
                    J.If, m * (J.Inorm - mbar) / ne2 * E)
            if fam.orthogonal:
                extras["orthogonal_rhs"] = math.sqrt(float((Fn ** 2).sum())) / m * nI + mbar
            if fam.orthonormal:
                extras["orthonormal_rhs"] = nI / math.sqrt(m) + mbar
        return _result(ContTheoremId.CONT_ADD_FAMILY, J.Inorm, A * nI + mbar, viol, conds, tol,
                       extras, QUAD_NOTE)
    p = exponent(p)
    est = family_constant(fam, p, search)
    c = est.value
    extras.update({"p": exponent_label(p), "c": c, "c_method": est.method})
    if p is INF:
        tid = ContTheoremId.CONT_ADD_CINF
        rhs = c * nI + mbar
        extras["coarse_rhs"] = float(Fn.max()) * nI + mbar
    else:
        tid = ContTheoremId.CONT_ADD_CP
        rhs = m ** (-1.0 / p) * c * nI + mbar
        extras["coarse_rhs"] = (float((Fn ** p).sum()) / m) ** (1.0 / p) * nI + mbar
    return _result(tid, J.Inorm, rhs, viol, {}, tol, extras, "no equality characterization")


@dataclass(frozen=True, eq=False)
class BallSlack:
    """Time-varying ball ‖f(t) − e‖ ≤ radius(t) around a unit center."""

    center: np.ndarray
    radius: Callable  # ts -> (N,)


@dataclass(frozen=True, eq=False)
class BandSlack:
    """Time-varying band with bounds lower(t) ≤ upper(t) along a unit direction."""

    direction: np.ndarray
    lower: Callable
    upper: Callable


def cont_add_transformed(f: PathFunction, hypotheses: Sequence[Union[BallSlack, BandSlack]],
                         q: QuadratureSpec = DEFAULT_QUAD, tol: Tolerance = DEFAULT_TOL) -> CheckResult:
    """Pointwise ball/band slacks ½r_k(t)² or ¼(M−μ)²/(M+μ), then the additive family bound."""
    hs = list(hypotheses)
    sp = f.space
    if not sp.is_hilbert:
        raise UnsupportedStructure("transformed corollaries need lp(2)")
    is_ball = isinstance(hs[0], BallSlack)
    if any(isinstance(h, BallSlack) != is_ball for h in hs):
        raise ContractViolation("mix of ball and band hypotheses")
    centers = [as_vector(sp, h.center if is_ball else h.direction) for h in hs]
    for c in centers:
        if not tol.close(_norm(sp, c), 1.0):
            raise HypothesisViolation("slack corollaries need unit-norm centers")
    fam = FunctionalFamily.from_vectors(sp, centers)

    if is_ball:
        def fn(ts, X, seg):
            return np.stack([0.5 * np.asarray(h.radius(ts), dtype=float) ** 2 for h in hs], axis=1)
        tid = ContTheoremId.CONT_ADD_BALL
    else:
        def fn(ts, X, seg):
            cols = []
            for h in hs:
                lo = np.asarray(h.lower(ts), dtype=float)
                up = np.asarray(h.upper(ts), dtype=float)
                cols.append(0.25 * (up - lo) ** 2 / (up + lo))
            return np.stack(cols, axis=1)
        tid = ContTheoremId.CONT_ADD_BAND
    res = cont_add_family(f, fam, SlackFunction(fn, len(hs), tid.value.lower()), q, tol=tol)
    nd = _nodes(f, q, res.extras["panels"])
    geo = []
    for k, h in enumerate(hs):
        if is_ball:
            rad = np.asarray(h.radius(nd.ts), dtype=float)
            cen = np.tile(centers[k], (nd.ts.size, 1))
        else:
            lo = np.asarray(h.lower(nd.ts), dtype=float)
            up = np.asarray(h.upper(nd.ts), dtype=float)
            if np.any(lo <= 0) or np.any(up < lo):
                raise ContractViolation("band needs 0 < lower <= upper")
            rad = 0.5 * (up - lo)
            cen = (0.5 * (up + lo))[:, None] * centers[k]
        dist = norms(sp, nd.X - cen)
        for i in range(nd.ts.size):
            if not tol.leq(dist[i], rad[i]):
                geo.append((float(nd.ts[i]), k + 1))
    res.theorem_id = tid.value
    res.margin_violations = geo + res.margin_violations
    return res


# ---- instances, dispatch and equality paths ------------------------------------------------

@dataclass(frozen=True, eq=False)
class ContinuousInstance:
    path: PathFunction
    family: FunctionalFamily
    hypothesis: Union[Margin, SlackFunction]


def cont_check(tid, inst: ContinuousInstance, q: QuadratureSpec = DEFAULT_QUAD, p=None,
               tol: Tolerance = DEFAULT_TOL, search: SearchConfig = DEFAULT_SEARCH) -> CheckResult:
    tid = ContTheoremId(tid)
    h = inst.hypothesis
    if tid is ContTheoremId.CONT_MULT_SINGLE:
        return cont_mult_single(inst.path, inst.family, h.r[0], q, tol)
    if tid is ContTheoremId.CONT_MULT_FAMILY:
        return cont_mult_family(inst.path, inst.family, h.r, q, None, tol, search)
    if tid is ContTheoremId.CONT_MULT_CINF:
        return cont_mult_family(inst.path, inst.family, h.r, q, INF, tol, search)
    if tid is ContTheoremId.CONT_MULT_CP:
        return cont_mult_family(inst.path, inst.family, h.r, q, 2.0 if p is None else p, tol, search)
    if tid is ContTheoremId.CONT_ADD_SINGLE:
        return cont_add_single(inst.path, inst.family, h, q, tol)
    if tid is ContTheoremId.CONT_ADD_FAMILY:
        return cont_add_family(inst.path, inst.family, h, q, None, tol, search)
    if tid is ContTheoremId.CONT_ADD_CINF:
        return cont_add_family(inst.path, inst.family, h, q, INF, tol, search)
    if tid is ContTheoremId.CONT_ADD_CP:
        return cont_add_family(inst.path, inst.family, h, q, 2.0 if p is None else p, tol, search)
    raise ContractViolation(f"{tid.value} is checked through its transformed entry point")


def cont_equality_instance(theorem_id, params: dict) -> ContinuousInstance:
    """Paths attaining the integral bounds.

    The multiplicative forms and CONT_ADD_FAMILY use piecewise-constant paths through
    the discrete equality vectors; CONT_ADD_SINGLE uses the arc cos t·x̂ + sin t·v on
    [−θ, θ] (``theta``) with the exact deficit as slack.
    """
    tid = ContTheoremId(theorem_id)
    via = {ContTheoremId.CONT_MULT_SINGLE: dsc.TheoremId.DM_SINGLE,
           ContTheoremId.CONT_MULT_FAMILY: dsc.TheoremId.MULT_SUMFUNC,
           ContTheoremId.CONT_MULT_CINF: dsc.TheoremId.MULT_CINF,
           ContTheoremId.CONT_MULT_CP: dsc.TheoremId.MULT_CP}
    if tid in via:
        inst = dsc.equality_instance(via[tid], params)
        return ContinuousInstance(piecewise_constant(inst.space, inst.vectors), inst.family,
                                  inst.hypothesis)
    if tid is ContTheoremId.CONT_ADD_FAMILY:
        inst = dsc.equality_instance(dsc.TheoremId.ADD_FAMILY, params)
        return ContinuousInstance(piecewise_constant(inst.space, inst.vectors), inst.family,
                                  SlackFunction.piecewise_constant(inst.hypothesis.M))
    if tid is ContTheoremId.CONT_ADD_SINGLE:
        fam = FunctionalFamily.of(params["family"])
        F = fam[0]
        sp = fam.space
        tol = params.get("tol", DEFAULT_TOL)
        xhat = re_maximizer(F)
        if not tol.close(F(xhat), 1.0):
            raise dsc.ConstructionFailure("the functional does not attain a unit real value")
        v = dsc.kernel_direction(sp, [F], xhat)
        if v is None:
            raise dsc.ConstructionFailure("no direction in the real kernel of F")
        theta = float(params.get("theta", math.pi / 3))
        path = circular(sp, -theta, theta, 1.0, xhat, v, float(params.get("scale", 1.0)))
        return ContinuousInstance(path, fam, SlackFunction.exact_deficit(sp, fam))
    raise dsc.ConstructionFailure(f"no equality constructor for {tid.value}")
