"""The contour integral F(xi, a), its companion G, and the Fresnel integral.

F(xi, a) is the integral of e(p^2/2a) / (e(p - xi) - 1) along the line
xi + e^{i pi/4} R, passed on the right of the pole at p = xi by a small
anticlockwise half circle.  Splitting the kernel as

    1/(e(z) - 1) = 1/(2 pi i z) + g(z)

leaves a Fresnel-type term carrying the pole, which has the closed form
e(1/8) f(xi/sqrt(a)), plus an integral of the entire-near-zero function g
times a Gaussian.  Only that second piece is done by quadrature.

Values outside the strip |xi| <= 1/2 are obtained by unit shifts, each of
which contributes an exact e(.) term.  Those terms are kept symbolically
(exact rational phase, complex coefficient) so a caller can fold further
quadratic phases in without rounding large arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import DomainError, QuadratureError
from .numeric import (Q, DEFAULT_CONFIG, E_EIGHTH, E_MINUS_EIGHTH, PrecisionConfig,
                      as_fraction, frac0, unit_exp, unit_exp_array)

EPS = np.finfo(float).eps

# F(0) = e(-1/8)/2
FRESNEL_ZERO = 0.5 * E_MINUS_EIGHTH


@dataclass(frozen=True)
class FresnelValue:
    value: complex
    err_estimate: float = 1e-15


@dataclass(frozen=True)
class SpecialValue:
    """A complex value with an absolute error bound.

    Internally the value is free + sum(coef * e(phase)); phases are exact
    rationals so products with further unit exponentials stay exact.
    """

    free: complex
    terms: Tuple[Tuple[Q, complex], ...] = ()
    err_estimate: float = 0.0

    @property
    def value(self) -> complex:
        return self.free + sum(c * unit_exp(ph) for ph, c in self.terms)

    def __complex__(self):
        return self.value

    def rotated(self, phase) -> "SpecialValue":
        """Multiply by e(phase), adding phase exactly to every symbolic term."""
        phase = as_fraction(phase)
        terms = tuple((frac0(ph + phase), c) for ph, c in self.terms)
        return SpecialValue(self.free * unit_exp(phase), terms,
                            self.err_estimate + 2 * EPS * abs(self.free))

    def scaled(self, k: complex) -> "SpecialValue":
        terms = tuple((ph, c * k) for ph, c in self.terms)
        return SpecialValue(self.free * k, terms, self.err_estimate * abs(k))

    def conj(self) -> "SpecialValue":
        terms = tuple((frac0(-ph), c.conjugate()) for ph, c in self.terms)
        return SpecialValue(self.free.conjugate(), terms, self.err_estimate)

    def __add__(self, other: "SpecialValue") -> "SpecialValue":
        return SpecialValue(self.free + other.free, self.terms + other.terms,
                            self.err_estimate + other.err_estimate)

    def __neg__(self):
        return self.scaled(-1.0)

    def __sub__(self, other):
        return self + (-other)

    @property
    def rounding(self) -> float:
        """Bound on the rounding incurred when the symbolic terms are evaluated."""
        return 4 * EPS * (abs(self.free) + sum(abs(c) for _, c in self.terms))


def c_of_a(a) -> complex:
    """c(a) = e(-1/8) a^(-1/2)."""
    return E_MINUS_EIGHTH / math.sqrt(float(a))


def _check_a(a):
    if not (0 < a < 1):
        raise DomainError(f"a must lie in (0, 1), got {a}")


# ---------------------------------------------------------------------------
# Fresnel integral F(t) = int_{-inf}^t e(-tau^2/2) dtau

_GL_X, _GL_W = np.polynomial.legendre.leggauss(20)
_PANELS = 9
_SERIES_CUT = 4.5


def _tail_series(t: np.ndarray) -> np.ndarray:
    """R(t) with int_t^inf e(-tau^2/2) dtau = e(-t^2/2) R(t), for t >= 4.5.

    The asymptotic series is summed until its terms stop shrinking or drop
    below 1e-18; at t >= 4.5 that happens long before divergence sets in.
    """
    z = 1.0 / (2j * np.pi * t * t)
    term = np.ones_like(z)
    total = np.ones_like(z)
    for k in range(1, 60):
        term = term * (-(2 * k - 1)) * z
        total = total + term
        if np.max(np.abs(term)) < 1e-18:
            break
    return total / (2j * np.pi * t)


def _fresnel_parts(t):
    """Split F(t) = c0 + e(-t^2/2) h for an array of t."""
    t = np.asarray(t, dtype=float)
    c0 = np.zeros(t.shape, dtype=complex)
    h = np.zeros(t.shape, dtype=complex)
    inner = np.abs(t) <= _SERIES_CUT
    if np.any(inner):
        ti = t[inner]
        step = ti / _PANELS
        # nodes of _PANELS equal Gauss-Legendre panels on [0, t]
        left = step[:, None] * np.arange(_PANELS)[None, :]
        x = left[:, :, None] + step[:, None, None] * (_GL_X[None, None, :] + 1) / 2
        vals = unit_exp_array(-0.5 * x * x)
        c0[inner] = FRESNEL_ZERO + (step / 2) * np.sum(vals * _GL_W, axis=(1, 2))
    hi = t > _SERIES_CUT
    if np.any(hi):
        c0[hi] = E_MINUS_EIGHTH
        h[hi] = -_tail_series(t[hi])
    lo = t < -_SERIES_CUT
    if np.any(lo):
        h[lo] = _tail_series(-t[lo])
    return c0, h


def _half_square_turns(t) -> Q:
    t = as_fraction(t)
    return frac0(t * t / 2)


def fresnel_F(t) -> FresnelValue:
    """F(t) = int_{-inf}^t e(-tau^2/2) dtau, absolute error ~1e-15."""
    if not math.isfinite(float(t)):
        raise DomainError("t must be finite")
    c0, h = _fresnel_parts(np.array([float(t)]))
    c0, h = complex(c0[0]), complex(h[0])
    if h != 0:
        c0 += unit_exp(-_half_square_turns(t)) * h
    return FresnelValue(c0)


def special_f(t, half_square=None) -> complex:
    """f(t) = e(t^2/2) F(t).

    The large-|t| branch is assembled as e(t^2/2) c0 + h so the oscillating
    factor cancels analytically instead of numerically.  half_square, if
    given, is the exact value of t^2/2 (used when t itself is a rounded
    quotient).
    """
    if not math.isfinite(float(t)):
        raise DomainError("t must be finite")
    c0, h = _fresnel_parts(np.array([float(t)]))
    c0, h = complex(c0[0]), complex(h[0])
    if c0 == 0:
        return h
    if half_square is None:
        half_square = _half_square_turns(t)
    return unit_exp(half_square) * c0 + h


def fresnel_F_array(t) -> np.ndarray:
    """Vectorised F(t) (phases rounded in float, fine for |t| up to ~1e3)."""
    t = np.asarray(t, dtype=float)
    c0, h = _fresnel_parts(t)
    return c0 + unit_exp_array(np.mod(-0.5 * t * t, 1.0)) * h


# ---------------------------------------------------------------------------
# the analytic remainder kernel g(z) = 1/(e(z) - 1) - 1/(2 pi i z)

# B_{2k}/(2k)! for k = 1..7
_BERN = (1 / 12, -1 / 720, 1 / 30240, -1 / 1209600, 1 / 47900160,
         -691 / 1307674368000, 1 / 74724249600)


def g_kernel(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    w = 2j * np.pi * z
    out = np.empty_like(w)
    small = np.abs(w) < 0.5
    ws = w[small]
    w2 = ws * ws
    acc = np.zeros_like(ws)
    for c in reversed(_BERN):
        acc = acc * w2 + c
    out[small] = -0.5 + ws * acc
    wl = w[~small]
    out[~small] = 1.0 / np.expm1(wl) - 1.0 / wl
    return out


# ---------------------------------------------------------------------------
# quadrature of the regular part

_S_MAX = 3.7     # exp(-pi s^2) < 1e-18 beyond this


def _initial_step(x: np.ndarray, a: np.ndarray) -> float:
    # With d the distance from the real axis to the nearest pole, the error is
    # ~exp(pi d^2 - 2 pi d / h) while 1/h < d, and the Gaussian aliasing
    # exp(-pi / h^2) once the poles are farther out than that.
    d = (1.0 - np.abs(x)) / np.sqrt(2 * a)
    h = np.where(d >= 3.4, 0.3, 2 * np.pi * d / (36 + np.pi * d * d))
    return float(np.min(np.minimum(0.3, h)))


def _trapezoid(x: np.ndarray, a: np.ndarray, h: float, offset: bool):
    m = int(math.ceil(_S_MAX / h))
    s = h * np.arange(-m, m + 1)
    if offset:
        s = s[:-1] + h / 2
    z = (E_EIGHTH * np.sqrt(a))[:, None] * s[None, :] - x[:, None]
    vals = g_kernel(z) * np.exp(-np.pi * s * s)[None, :]
    return vals.sum(axis=1) * h, np.abs(vals).sum(axis=1) * h


def regular_part(x, a, tol: float, h: float = None, max_halvings: int = 12):
    """sqrt(a) * int g(e^{i pi/4} sqrt(a) s - x) exp(-pi s^2) ds by the trapezoid rule.

    x and a may be arrays (evaluated together on one grid).  The integrand is
    analytic in the strip |Im s| < (1 - |x|)/sqrt(2a), so the rule converges
    geometrically.  The step is halved, reusing the old nodes, until two
    successive values agree to tol.  Returns (value, err_estimate, final step).
    """
    if max_halvings < 1:
        raise DomainError("max_halvings must be >= 1")
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    a = np.broadcast_to(np.asarray(a, dtype=float), x.shape)
    if h is None:
        h = _initial_step(x, a)
    ra = np.sqrt(a)
    total, mag = _trapezoid(x, a, h, False)
    for _ in range(max_halvings):
        mid, mag_mid = _trapezoid(x, a, h, True)
        refined = 0.5 * (total + mid)
        mag = 0.5 * (mag + mag_mid)
        h /= 2
        err = (np.abs(refined - total) + 32 * EPS * mag) * ra
        total = refined
        if np.all(err <= tol):
            if scalar:
                return complex(total[0] * ra[0]), float(err[0]), h
            return total * ra, err, h
    raise QuadratureError(f"trapezoid rule did not reach {tol:g} (worst error {np.max(err):.2e})")


# ---------------------------------------------------------------------------
# F(xi, a)

def calF_many(xis, as_, cfg: PrecisionConfig = DEFAULT_CONFIG):
    """F(xi, a) for a batch of arguments, sharing one quadrature grid."""
    xqs = [as_fraction(v) for v in xis]
    aqs = [as_fraction(v) for v in as_]
    for aq in aqs:
        _check_a(aq)
    ks = [int(math.floor(xq + Q(1, 2))) for xq in xqs]
    xs = [xq - k for xq, k in zip(xqs, ks)]        # in [-1/2, 1/2)
    xf = np.array([float(v) for v in xs])
    af = np.array([float(v) for v in aqs])
    c0, h = _fresnel_parts(xf / np.sqrt(af))
    reg, err, _ = regular_part(xf, af, cfg.quad_tolerance)
    out = []
    for i, (xq, aq, k, x) in enumerate(zip(xqs, aqs, ks, xs)):
        f = complex(h[i])
        if c0[i] != 0:
            f += unit_exp(frac0(x * x / (2 * aq))) * complex(c0[i])
        free = E_EIGHTH * (f + complex(reg[i]))
        terms = []
        if k > 0:
            for j in range(k):
                terms.append((frac0((xq - j) ** 2 / (2 * aq)), 1.0 + 0j))
        elif k < 0:
            for j in range(1, -k + 1):
                terms.append((frac0((xq + j) ** 2 / (2 * aq)), -1.0 + 0j))
        e = float(err[i]) + 1e-15 + 4 * EPS * (len(terms) + abs(free))
        out.append(SpecialValue(free, tuple(terms), e))
    return out


def calF(xi, a, cfg: PrecisionConfig = DEFAULT_CONFIG) -> SpecialValue:
    """F(xi, a) for real xi and 0 < a < 1.

    xi and a may be floats or exact rationals.  For |xi| > 1/2 the shift
    relation F(xi) - F(xi - 1) = e(xi^2/2a) moves the argument into the strip;
    the collected e(.) terms are returned with exact phases.
    """
    _check_a(a)
    return calF_many([xi], [a], cfg)[0]


def calG(xi, a, cfg: PrecisionConfig = DEFAULT_CONFIG) -> SpecialValue:
    """G(xi, a) = c(a) e(-xi^2/2a) F(xi, a)."""
    xq, aq = as_fraction(xi), as_fraction(a)
    F = calF(xq, aq, cfg)
    return F.rotated(-xq * xq / (2 * aq)).scaled(c_of_a(aq))


def asymptotic_calF(xi, a) -> complex:
    """Leading small-a behaviour e(1/8) f(xi/sqrt(a)); error O(sqrt(a)) in the strip."""
    _check_a(a)
    if abs(xi) > 0.5:
        raise DomainError(f"asymptotic form needs |xi| <= 1/2, got {xi}")
    return E_EIGHTH * special_f(float(xi) / math.sqrt(float(a)))
