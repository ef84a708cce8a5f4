"""Scalar fields, finite-dimensional normed spaces, inner and semi-inner products.

Vectors are numpy ``complex128`` arrays.  In real-field spaces the imaginary
parts are zero and checked to stay zero.  The exponent ``INF`` is a dedicated
singleton; ``math.inf`` is converted to it at the boundary.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import ContractViolation, UnsupportedStructure


class Field(str, enum.Enum):
    REAL = "real"
    COMPLEX = "complex"


class Infinity:
    """The exponent p = infinity."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __str__(self):
        return "inf"

    def __reduce__(self):
        return (Infinity, ())

    def __hash__(self):
        return hash("trirev.INF")

    def __eq__(self, other):
        return other is self


INF = Infinity()
Exponent = Union[float, Infinity]


def exponent(p) -> Exponent:
    """Normalize an exponent: numbers >= 1, ``INF``, ``math.inf`` or the string 'inf'."""
    if p is INF:
        return INF
    if isinstance(p, str):
        s = p.strip().lower()
        if s in ("inf", "infinity", "oo"):
            return INF
        try:
            p = float(s)
        except ValueError:
            raise ContractViolation(f"bad exponent {p!r}") from None
    try:
        v = float(p)
    except (TypeError, ValueError):
        raise ContractViolation(f"bad exponent {p!r}") from None
    if math.isinf(v) and v > 0:
        return INF
    if not math.isfinite(v) or v < 1.0:
        raise ContractViolation(f"exponent must be >= 1 or INF, got {p!r}")
    return v


def is_inf(p) -> bool:
    return p is INF


def dual_exponent(p: Exponent) -> Exponent:
    p = exponent(p)
    if p is INF:
        return 1.0
    if p == 1.0:
        return INF
    return p / (p - 1.0)


def exponent_label(p: Exponent) -> str:
    return "inf" if p is INF else repr(float(p))


@dataclass(frozen=True)
class Lp:
    p: Exponent

    def __post_init__(self):
        object.__setattr__(self, "p", exponent(self.p))


@dataclass(frozen=True)
class CMod:
    """The p-modulus on C viewed as a real Banach space."""

    p: Exponent

    def __post_init__(self):
        object.__setattr__(self, "p", exponent(self.p))


@dataclass(frozen=True)
class SpaceSpec:
    dim: int
    field: Field
    norm: Union[Lp, CMod]

    def __post_init__(self):
        object.__setattr__(self, "field", Field(self.field))
        if not isinstance(self.norm, (Lp, CMod)):
            raise ContractViolation(f"unknown norm selector {self.norm!r}")
        if int(self.dim) != self.dim or self.dim < 1:
            raise ContractViolation(f"dimension must be a positive integer, got {self.dim!r}")
        object.__setattr__(self, "dim", int(self.dim))
        if isinstance(self.norm, CMod) and (self.dim != 1 or self.field is not Field.COMPLEX):
            raise ContractViolation("cmod spaces need dim=1 and the complex field")

    @property
    def is_cmod(self) -> bool:
        return isinstance(self.norm, CMod)

    @property
    def p(self) -> Exponent:
        return self.norm.p

    @property
    def is_hilbert(self) -> bool:
        return isinstance(self.norm, Lp) and self.norm.p == 2.0

    @property
    def strictly_convex(self) -> bool:
        """lp(p) with 1 < p < inf; cmod(p) likewise (a real lp(p) plane)."""
        p = self.norm.p
        return p is not INF and p > 1.0

    @property
    def real_mode(self) -> bool:
        """True when the scalars acting on the space are real.

        cmod spaces are real Banach spaces even though their points are complex.
        """
        return self.field is Field.REAL or self.is_cmod

    def label(self) -> str:
        kind = "cmod" if self.is_cmod else "lp"
        return f"{kind}({exponent_label(self.norm.p)}) {self.field.value} dim {self.dim}"


def lp(p, dim: int, field="real") -> SpaceSpec:
    return SpaceSpec(dim, Field(field), Lp(p))


def cmod(p) -> SpaceSpec:
    return SpaceSpec(1, Field.COMPLEX, CMod(p))


def _check_finite(a: np.ndarray):
    if not np.all(np.isfinite(a)):
        raise ContractViolation("vectors must have finite entries")


def as_vector(space: SpaceSpec, x) -> np.ndarray:
    """Validate and convert ``x`` to a complex vector of the space."""
    a = np.asarray(x, dtype=np.complex128)
    if a.ndim == 0:
        a = a.reshape(1)
    if a.ndim != 1 or a.shape[0] != space.dim:
        raise ContractViolation(f"expected a vector of length {space.dim}, got shape {a.shape}")
    _check_finite(a)
    if space.field is Field.REAL and np.any(a.imag != 0):
        raise ContractViolation("complex entries in a real-field space")
    return a


def as_vectors(space: SpaceSpec, xs) -> np.ndarray:
    """Validate a nonempty stack of vectors, returned as an (n, dim) array."""
    a = np.asarray(xs, dtype=np.complex128)
    if a.ndim == 1 and space.dim == 1:
        a = a.reshape(-1, 1)
    if a.ndim != 2 or a.shape[1] != space.dim or a.shape[0] == 0:
        raise ContractViolation(f"expected (n, {space.dim}) vectors, got shape {a.shape}")
    _check_finite(a)
    if space.field is Field.REAL and np.any(a.imag != 0):
        raise ContractViolation("complex entries in a real-field space")
    return a


def lp_norm_abs(a: np.ndarray, p: Exponent) -> np.ndarray:
    """ℓ^p norm along the last axis of a nonnegative array."""
    if p is INF:
        return a.max(axis=-1)
    if p == 1.0:
        return a.sum(axis=-1)
    scale = a.max(axis=-1, keepdims=True)
    safe = np.where(scale > 0, scale, 1.0)
    if p == 2.0:
        s = np.sqrt(((a / safe) ** 2).sum(axis=-1))
    else:
        s = ((a / safe) ** p).sum(axis=-1) ** (1.0 / p)
    return s * scale[..., 0]


def real_pairs(z: np.ndarray) -> np.ndarray:
    """Stack (Re, Im) along a new last axis."""
    return np.stack([z.real, z.imag], axis=-1)


def _norm_array(space: SpaceSpec, a: np.ndarray) -> np.ndarray:
    if space.is_cmod:
        return lp_norm_abs(np.abs(real_pairs(a[..., 0])), space.norm.p)
    return lp_norm_abs(np.abs(a), space.norm.p)


def norm(space: SpaceSpec, x) -> float:
    """Norm of a single vector."""
    return float(_norm_array(space, as_vector(space, x)))


def norms(space: SpaceSpec, xs) -> np.ndarray:
    """Row-wise norms of an (n, dim) stack."""
    a = np.asarray(xs, dtype=np.complex128)
    if a.ndim != 2 or a.shape[1] != space.dim:
        raise ContractViolation(f"expected (n, {space.dim}) vectors, got shape {a.shape}")
    return _norm_array(space, a)


def inner(space: SpaceSpec, x, y) -> complex:
    """Hermitian inner product Σ x_j conj(y_j), linear in the first slot."""
    if not space.is_hilbert:
        raise UnsupportedStructure(f"no inner product on {space.label()}")
    x = as_vector(space, x)
    y = as_vector(space, y)
    return complex(np.sum(x * np.conj(y)))


def sip_weights(space: SpaceSpec, y) -> np.ndarray:
    """Coefficients w with sip_lp(x, y) = Σ_j x_j w_j."""
    if space.is_cmod or space.norm.p is INF or space.norm.p == 1.0:
        raise UnsupportedStructure(
            f"semi-inner product is not unique on {space.label()}; only lp(p), 1<p<inf")
    y = as_vector(space, y)
    p = space.norm.p
    ny = norm(space, y)
    if ny == 0.0:
        return np.zeros_like(y)
    ay = np.abs(y)
    w = np.zeros_like(y)
    nz = ay > 0
    # |y_j|^{p-2} conj(y_j), with 0 at y_j = 0, normalized by ‖y‖^{p-2}
    w[nz] = (ay[nz] / ny) ** (p - 2.0) * np.conj(y[nz])
    return w


def sip_lp(space: SpaceSpec, x, y) -> complex:
    """Semi-inner product generating the ℓ^p norm: ‖y‖^{2-p} Σ x_j |y_j|^{p-2} conj(y_j)."""
    w = sip_weights(space, y)
    x = as_vector(space, x)
    return complex(np.sum(x * w))


@dataclass(frozen=True)
class Tolerance:
    """Absolute-plus-relative tolerance for inequalities and equalities."""

    abs: float = 1e-9
    rel: float = 1e-7

    def __post_init__(self):
        if not (self.abs > 0 and self.rel > 0):
            raise ContractViolation("tolerances must be positive")

    def allowance(self, a, b) -> float:
        return self.abs + self.rel * max(abs(a), abs(b))

    def leq(self, lhs, rhs) -> bool:
        return lhs <= rhs + self.allowance(lhs, rhs)

    def excess(self, lhs, rhs) -> float:
        """Positive exactly when ``lhs <= rhs`` fails under this tolerance."""
        return float(lhs - rhs - self.allowance(lhs, rhs))

    def close(self, a, b) -> bool:
        return abs(a - b) <= self.allowance(a, b)

    def close_vec(self, x, y) -> bool:
        x = np.asarray(x)
        y = np.asarray(y)
        d = float(np.linalg.norm(x - y))
        return d <= self.allowance(float(np.linalg.norm(x)), float(np.linalg.norm(y)))


DEFAULT_TOL = Tolerance()
