"""Linear functionals, operator norms and the family constants c_p, c_inf.

A functional acts by F(x) = Σ_j a_j x_j with no conjugation, so the Hilbert
functional <·, e> has representer conj(e).  On cmod spaces F(z) = a z.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _backend
from ._kernels_py import _lmo
from .errors import ContractViolation, UnsupportedStructure
from .rng import random_vector, stream, tie_seed
from .spaces import (INF, Exponent, SpaceSpec, as_vector, as_vectors, dual_exponent, exponent,
                     lp_norm_abs, norm, norms, sip_weights)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.complex128, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Functional:
    space: SpaceSpec
    representer: np.ndarray
    center: Optional[np.ndarray] = None  # e with F = <·,e> or F = [·,e], when known

    def __post_init__(self):
        object.__setattr__(self, "representer", _frozen(as_vector(self.space, self.representer)))
        if self.center is not None:
            object.__setattr__(self, "center", _frozen(as_vector(self.space, self.center)))

    @classmethod
    def from_inner(cls, space: SpaceSpec, e) -> "Functional":
        """x -> <x, e> on lp(2)."""
        if not space.is_hilbert:
            raise UnsupportedStructure(f"no inner product on {space.label()}")
        e = as_vector(space, e)
        return cls(space, np.conj(e), center=e)

    @classmethod
    def from_sip(cls, space: SpaceSpec, e) -> "Functional":
        """x -> [x, e], the semi-inner product functional on lp(p), 1<p<inf."""
        return cls(space, sip_weights(space, e), center=e)

    def __call__(self, x) -> complex:
        return apply(self, x)

    @property
    def key(self):
        return (self.space, self.representer.tobytes())

    def riesz_center(self) -> Optional[np.ndarray]:
        if self.center is not None:
            return self.center
        if self.space.is_hilbert:
            return np.conj(self.representer)
        return None

    def __repr__(self):
        return f"Functional({self.space.label()}, {np.round(self.representer, 6).tolist()})"


def apply(F: Functional, x) -> complex:
    x = as_vector(F.space, x)
    return complex(np.sum(F.representer * x))


def apply_many(F: Functional, xs) -> np.ndarray:
    return np.asarray(xs, dtype=np.complex128) @ F.representer


@dataclass(frozen=True, eq=False)
class FunctionalFamily:
    members: tuple

    def __post_init__(self):
        members = tuple(self.members)
        if not members:
            raise ContractViolation("a functional family must be nonempty")
        sp = members[0].space
        if any(F.space != sp for F in members):
            raise ContractViolation("family members must share one space")
        object.__setattr__(self, "members", members)
        mat = np.stack([F.representer for F in members])
        mat.setflags(write=False)
        object.__setattr__(self, "_matrix", mat)

    @classmethod
    def from_vectors(cls, space: SpaceSpec, vectors) -> "FunctionalFamily":
        """Hilbert family x -> <x, e_k>."""
        vs = as_vectors(space, vectors)
        return cls(tuple(Functional.from_inner(space, v) for v in vs))

    @classmethod
    def from_representers(cls, space: SpaceSpec, reps) -> "FunctionalFamily":
        rs = as_vectors(space, reps)
        return cls(tuple(Functional(space, r) for r in rs))

    @classmethod
    def of(cls, F) -> "FunctionalFamily":
        if isinstance(F, FunctionalFamily):
            return F
        if isinstance(F, Functional):
            return cls((F,))
        return cls(tuple(F))

    @property
    def space(self) -> SpaceSpec:
        return self.members[0].space

    @property
    def m(self) -> int:
        return len(self.members)

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def key(self):
        return (self.space, self._matrix.tobytes())

    def values(self, x) -> np.ndarray:
        """(F_1(x), ..., F_m(x))."""
        return self._matrix @ as_vector(self.space, x)

    def values_many(self, xs) -> np.ndarray:
        """(n, m) array of F_k(x_i)."""
        return np.asarray(xs, dtype=np.complex128) @ self._matrix.T

    def sum_functional(self) -> Functional:
        return Functional(self.space, self._matrix.sum(axis=0))

    def mean_functional(self) -> Functional:
        return Functional(self.space, self._matrix.sum(axis=0) / self.m)

    def centers(self) -> Optional[np.ndarray]:
        cs = [F.riesz_center() for F in self.members]
        if any(c is None for c in cs):
            return None
        return np.stack(cs)

    def _gram(self):
        if not self.space.is_hilbert:
            return None
        E = np.conj(self._matrix)
        return E @ np.conj(E).T

    @functools.cached_property
    def orthogonal(self) -> bool:
        G = self._gram()
        if G is None:
            return False
        d = np.sqrt(np.abs(np.diag(G)))
        off = np.abs(G - np.diag(np.diag(G)))
        return bool(np.all(off <= 1e-12 * np.maximum(1.0, np.outer(d, d))))

    @functools.cached_property
    def orthonormal(self) -> bool:
        if not self.orthogonal:
            return False
        G = self._gram()
        return bool(np.all(np.abs(np.diag(G).real - 1.0) <= 1e-12))

    def __len__(self):
        return self.m

    def __iter__(self):
        return iter(self.members)

    def __getitem__(self, k):
        return self.members[k]


@dataclass(frozen=True)
class ConstantEstimate:
    value: float
    method: str  # closed_form | gram_eigen | sphere_search
    certificate: np.ndarray = field(compare=False)
    cap: Optional[float] = None


@dataclass(frozen=True)
class SearchConfig:
    starts: int = 64
    iters: int = 500
    polish_iters: int = 200
    seed: int = 0
    seeded_starts: bool = True  # also start from each member's norming vector

    def __post_init__(self):
        if self.starts < 1 or self.iters < 0 or self.polish_iters < 0:
            raise ContractViolation("bad search configuration")


DEFAULT_SEARCH = SearchConfig()


# ---- helpers on the "real picture" of a space -------------------------------

def _real_picture(space: SpaceSpec, A: np.ndarray):
    """Kernel data: representer rows, real/complex mode and the ℓ^p exponent.

    cmod is handed to the kernel as real R^2 with representer (a, i a).
    """
    if space.is_cmod:
        A2 = np.concatenate([A, 1j * A], axis=1)
        return A2, True, space.norm.p
    return A, space.real_mode, space.norm.p


def _from_picture(space: SpaceSpec, x: np.ndarray) -> np.ndarray:
    if space.is_cmod:
        return np.array([x[0].real + 1j * x[1].real])
    return x


def _to_picture(space: SpaceSpec, x: np.ndarray) -> np.ndarray:
    if space.is_cmod:
        return np.array([x[0].real, x[0].imag], dtype=np.complex128)
    return x


def _unit_maximizer(G: np.ndarray, p: Exponent) -> np.ndarray:
    y = _lmo(G.reshape(1, -1), p is INF, 0.0 if p is INF else float(p))[0]
    return y / lp_norm_abs(np.abs(y), p)


def re_maximizer(F: Functional) -> np.ndarray:
    """Unit vector maximizing Re F over the unit ball (zero functional: any unit vector)."""
    A, real_mode, p = _real_picture(F.space, F.representer.reshape(1, -1))
    G = np.conj(A[0])
    if real_mode:
        G = G.real.astype(np.complex128)
    if not np.any(G):
        x = np.zeros(F.space.dim, dtype=np.complex128)
        x[0] = 1.0
        return x
    return _from_picture(F.space, _unit_maximizer(G, p))


def op_norm(F: Functional) -> ConstantEstimate:
    sp = F.space
    a = F.representer
    if sp.is_cmod:
        s = sp.norm.p
        amp = abs(a[0])
        if s is INF:
            factor, z0 = math.sqrt(2.0), 1 + 1j
        elif s >= 2.0:
            factor, z0 = 2.0 ** (0.5 - 1.0 / s), (1 + 1j) / 2.0 ** (1.0 / s)
        else:
            factor, z0 = 1.0, 1.0 + 0j
        value = amp * factor
        return ConstantEstimate(value, "closed_form", np.array([z0]), cap=value)
    value = float(lp_norm_abs(np.abs(a), dual_exponent(sp.norm.p)))
    return ConstantEstimate(value, "closed_form", re_maximizer(F), cap=value)


def family_objective(fam: FunctionalFamily, p: Exponent, x) -> float:
    """(Σ|F_k x|^p)^{1/p} / ‖x‖, or the max form at p = INF."""
    x = as_vector(fam.space, x)
    nx = norm(fam.space, x)
    if nx == 0:
        return 0.0
    return float(lp_norm_abs(np.abs(fam.values(x)), exponent(p))) / nx


def family_cap(fam: FunctionalFamily, p: Exponent) -> float:
    ns = np.array([op_norm(F).value for F in fam])
    return float(lp_norm_abs(ns, exponent(p)))


def power_iteration(G: np.ndarray, v0: np.ndarray, max_iter: int = 1000, rtol: float = 1e-13):
    v = v0 / np.linalg.norm(v0)
    lam = float(np.vdot(v, G @ v).real)
    for _ in range(max_iter):
        w = G @ v
        nw = np.linalg.norm(w)
        if nw == 0:
            return 0.0, v
        v = w / nw
        new = float(np.vdot(v, G @ v).real)
        done = abs(new - lam) <= rtol * abs(new)
        lam = new
        if done:
            break
    return lam, v


def gram_eigen(fam: FunctionalFamily) -> ConstantEstimate:
    """c_2 on lp(2) as the square root of the top eigenvalue of A A^H."""
    if not fam.space.is_hilbert:
        raise UnsupportedStructure("gram_eigen needs an lp(2) space")
    A = fam.matrix
    G = A @ np.conj(A).T
    m = fam.m
    # all-ones first; basis starts cover the case where it is orthogonal to the top eigenvector
    starts = [np.ones(m, dtype=np.complex128)] + [np.eye(m, dtype=np.complex128)[k] for k in range(m)]
    best_lam, best_v = -1.0, None
    for v0 in starts:
        lam, v = power_iteration(G, v0)
        if lam > best_lam:
            best_lam, best_v = lam, v
    x = np.conj(A).T @ best_v
    if fam.space.real_mode:
        x = x.real.astype(np.complex128)
    nx = np.linalg.norm(x)
    if nx == 0:
        x = np.zeros(fam.space.dim, dtype=np.complex128)
        x[0] = 1.0
    else:
        x = x / nx
    cap = family_cap(fam, 2.0)
    value = min(family_objective(fam, 2.0, x), cap)
    return ConstantEstimate(value, "gram_eigen", x, cap=cap)


def sphere_search(fam: FunctionalFamily, p, search: SearchConfig = DEFAULT_SEARCH) -> ConstantEstimate:
    p = exponent(p)
    sp = fam.space
    A, real_mode, np_ = _real_picture(sp, fam.matrix)
    n = A.shape[1]
    starts, seeds = [], []
    for k in range(search.starts):
        rng = stream(search.seed, "sphere", k)
        starts.append(random_vector(rng, n, real_mode))
        seeds.append(tie_seed(rng))
    if search.seeded_starts:
        for j, F in enumerate(fam):
            rng = stream(search.seed, "sphere-seeded", j)
            starts.append(_to_picture(sp, re_maximizer(F)))
            seeds.append(tie_seed(rng))
            starts.append(_to_picture(sp, op_norm(F).certificate))
            seeds.append(tie_seed(rng))
    S = np.array(starts, dtype=np.complex128)
    vals, X = _backend.sphere_search(
        A, bool(real_mode), np_ is INF, 0.0 if np_ is INF else float(np_),
        p is INF, 0.0 if p is INF else float(p), S, seeds, search.iters, search.polish_iters)
    best = int(np.argmax(vals))
    x = _from_picture(sp, X[best])
    cap = family_cap(fam, p)
    value = min(family_objective(fam, p, x), cap)
    return ConstantEstimate(value, "sphere_search", x, cap=cap)


def local_ascent(fam: FunctionalFamily, p, x0, search: SearchConfig = DEFAULT_SEARCH) -> ConstantEstimate:
    """The sphere-search kernel run from the single start x0."""
    p = exponent(p)
    sp = fam.space
    A, real_mode, np_ = _real_picture(sp, fam.matrix)
    S = np.array([_to_picture(sp, as_vector(sp, x0))], dtype=np.complex128)
    seeds = [tie_seed(stream(search.seed, "local", 0))]
    vals, X = _backend.sphere_search(
        A, bool(real_mode), np_ is INF, 0.0 if np_ is INF else float(np_),
        p is INF, 0.0 if p is INF else float(p), S, seeds, search.iters, search.polish_iters)
    x = _from_picture(sp, X[0])
    cap = family_cap(fam, p)
    return ConstantEstimate(min(family_objective(fam, p, x), cap), "sphere_search", x, cap=cap)


@functools.lru_cache(maxsize=4096)
def _cached_constant(key, fam_ref, p, search):
    fam = fam_ref()
    if fam.m == 1:
        est = op_norm(fam[0])
        return ConstantEstimate(est.value, est.method, est.certificate, cap=est.value)
    if fam.space.is_hilbert and p == 2.0:
        return gram_eigen(fam)
    return sphere_search(fam, p, search)


class _Ref:
    """Carries the family through lru_cache without taking part in the key."""

    def __init__(self, fam):
        self.fam = fam

    def __call__(self):
        return self.fam

    def __hash__(self):
        return 0

    def __eq__(self, other):
        return isinstance(other, _Ref)


def family_constant(fam, p, search: SearchConfig = DEFAULT_SEARCH) -> ConstantEstimate:
    """Certified lower estimate of c_p (or c_inf) with its analytic cap."""
    fam = FunctionalFamily.of(fam)
    p = exponent(p)
    return _cached_constant(fam.key, _Ref(fam), p, search)


def family_norms(fam: FunctionalFamily) -> np.ndarray:
    return np.array([op_norm(F).value for F in fam])


def unit_representers(space: SpaceSpec, reps: Sequence) -> list:
    """Scale each representer so the functional has norm one."""
    out = []
    for r in reps:
        F = Functional(space, r)
        v = op_norm(F).value
        if v == 0:
            raise ContractViolation("cannot normalize the zero functional")
        out.append(np.asarray(r, dtype=np.complex128) / v)
    return out
