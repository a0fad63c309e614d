"""Exact-convention primitives: the unit-circle exponential, fractional parts,
and phase reduction for quadratic phases.

Phases are always measured in turns. A real input is reduced mod 1 before it
is turned into a point on the circle, so no multiple of pi is ever rounded
into the argument.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Union

import numpy as np
from gmpy2 import mpq as Q

from .errors import DomainError, PrecisionError

# exact rationals are gmpy2.mpq throughout (Fraction is accepted on input)
Real = Union[float, int, Fraction, Q]

TWO_PI = 2.0 * math.pi
# 2 pi - TWO_PI; without it every angle carries the same relative bias,
# which adds up coherently over long sums
TWO_PI_LO = 2.4492935982947064e-16

_HALF = Q(1, 2)

# Largest float below one; frac() of a tiny negative float rounds up to 1.0.
_BELOW_ONE = math.nextafter(1.0, 0.0)


@dataclass(frozen=True)
class PrecisionConfig:
    """Numerical knobs.

    working_bits is the width of the fixed-point grid the quadratic phase
    constants are rounded to (exact when a/2 and b are dyadic with at most
    that many fractional bits). quad_tolerance is the absolute error target
    for the special-function quadrature. max_depth bounds the renormalization
    cascade.
    """

    working_bits: int = 64
    quad_tolerance: float = 1e-10
    max_depth: int = 64

    def __post_init__(self):
        if self.working_bits < 53:
            raise DomainError(f"working_bits must be >= 53, got {self.working_bits}")
        if not (0.0 < self.quad_tolerance <= 1e-6):
            raise DomainError(f"quad_tolerance must lie in (0, 1e-6], got {self.quad_tolerance}")
        if self.max_depth < 1:
            raise DomainError("max_depth must be positive")


DEFAULT_CONFIG = PrecisionConfig()


@dataclass(frozen=True)
class Params:
    """A point (a, b) with 0 < a < 1 and -1/2 < b <= 1/2.

    Both coordinates may be floats or exact rationals; floats are treated as
    the dyadic rationals they represent.
    """

    a: Real
    b: Real

    def __post_init__(self):
        if not (0 < self.a < 1):
            raise DomainError(f"a must lie in (0, 1), got {self.a}")
        if not (-0.5 < self.b <= 0.5):
            raise DomainError(f"b must lie in (-1/2, 1/2], got {self.b}")

    @property
    def exact(self) -> tuple:
        return as_fraction(self.a), as_fraction(self.b)


def as_fraction(x: Real) -> Q:
    """The exact rational value of x (floats are dyadic rationals)."""
    if isinstance(x, type(Q())):
        return x
    if isinstance(x, (bool, np.bool_)):
        raise DomainError(f"cannot convert {x!r} to an exact rational")
    if isinstance(x, (int, np.integer)):
        return Q(int(x))
    if isinstance(x, Rational):
        return Q(int(x.numerator), int(x.denominator))
    if isinstance(x, (float, np.floating)):
        if not math.isfinite(x):
            raise DomainError(f"non-finite input {x}")
        return Q(float(x))
    raise DomainError(f"cannot convert {x!r} to an exact rational")


# ---------------------------------------------------------------------------
# fractional parts

def int_part(x: Real) -> int:
    return int(math.floor(x))


def frac(x: Real) -> Real:
    """Fractional part in [0, 1)."""
    if isinstance(x, Rational):
        return x - math.floor(x)
    r = x - math.floor(x)
    return _BELOW_ONE if r >= 1.0 else r


def frac0(x: Real) -> Real:
    """Centred fractional part in (-1/2, 1/2]; the half-turn maps to +1/2."""
    if isinstance(x, Rational):
        return x - math.ceil(x - _HALF)
    if -0.5 < x <= 0.5:
        return x
    r = x - math.floor(x)
    return r - 1.0 if r > 0.5 else r


def turns(q: Real) -> float:
    """frac0 of q rounded once to a float (exact reduction for rationals)."""
    return float(frac0(q))


# ---------------------------------------------------------------------------
# the unit-circle exponential

_EXACT_POINTS = {0.0: 1 + 0j, 0.25: 1j, 0.5: -1 + 0j, -0.25: -1j}


def unit_exp(z) -> complex:
    """e(z) = exp(2 pi i z), with z in turns.

    Real arguments (floats or exact rationals) are reduced mod 1 first, so the
    result has modulus one up to a rounding of the final cos/sin.
    """
    if isinstance(z, complex):
        scale = math.exp(-TWO_PI * z.imag)
        return scale * unit_exp(z.real)
    r = float(frac0(z))
    hit = _EXACT_POINTS.get(r)
    if hit is not None:
        return hit
    ang = TWO_PI * r
    lo = TWO_PI_LO * r
    c, s = math.cos(ang), math.sin(ang)
    return complex(c - s * lo, s + c * lo)


def unit_exp_array(phases: np.ndarray) -> np.ndarray:
    """Vectorized e(x) for real phases in turns."""
    phases = np.asarray(phases, dtype=float)
    r = phases - np.round(phases)
    ang = TWO_PI * r
    lo = TWO_PI_LO * r
    c, s = np.cos(ang), np.sin(ang)
    out = np.empty(r.shape, dtype=complex)
    out.real = c - s * lo
    out.imag = s + c * lo
    return out


E_EIGHTH = complex(math.sqrt(0.5), math.sqrt(0.5))     # e(1/8)
E_MINUS_EIGHTH = E_EIGHTH.conjugate()                   # e(-1/8)


# ---------------------------------------------------------------------------
# quadratic phases

def quadratic_phase(n: int, a: Real, b: Real) -> Q:
    """Exact value of (-a n^2/2 + n b) mod 1 in (-1/2, 1/2]."""
    return frac0(-as_fraction(a) * n * n / 2 + as_fraction(b) * n)


@dataclass(frozen=True)
class _FixedPoint:
    bits: int
    half_a: int     # round(a/2 * 2^bits) mod 2^bits
    b: int          # round(b * 2^bits) mod 2^bits
    lo_a: float     # a/2 * 2^bits - round(a/2 * 2^bits), in [-1/2, 1/2]
    lo_b: float
    exact: bool


def _fixed_point(a: Real, b: Real, bits: int) -> _FixedPoint:
    scale = 1 << bits
    ha = as_fraction(a) / 2 * scale
    bb = as_fraction(b) * scale
    ha_i, bb_i = int(round(ha)), int(round(bb))
    exact = ha == ha_i and bb == bb_i
    return _FixedPoint(bits, ha_i % scale, bb_i % scale, float(ha - ha_i), float(bb - bb_i), exact)


def phase_error_bound(n_max: int, a: Real, b: Real, cfg: PrecisionConfig = DEFAULT_CONFIG) -> float:
    """Worst-case absolute phase error (turns) of reduced_phase for n < n_max.

    The constants are split into a part on the 2^-working_bits grid, handled
    exactly, and a remainder below half a grid step whose contribution is
    added in double precision.  Zero for inputs that fit the grid.
    """
    fp = _fixed_point(a, b, cfg.working_bits)
    if fp.exact:
        return 0.0
    return math.ldexp(float(n_max) * n_max + n_max, -cfg.working_bits - 52) + 2.0 ** -53


# Phase errors beyond this make the summands meaningless for a 1e-6 target.
_MAX_PHASE_ERROR = 2.0 ** -24


def _check_budget(n_max: int, a: Real, b: Real, cfg: PrecisionConfig):
    err = phase_error_bound(n_max, a, b, cfg)
    if err > _MAX_PHASE_ERROR:
        raise PrecisionError(
            f"phase reduction at {cfg.working_bits} bits loses accuracy for n up to {n_max} "
            f"(bound {err:.2e} turns); raise working_bits"
        )


def reduced_phase(n: int, a: Real, b: Real, cfg: PrecisionConfig = DEFAULT_CONFIG) -> float:
    """(-a n^2/2 + n b) mod 1, returned in (-1/2, 1/2].

    a/2 and b are rounded to the 2^-working_bits grid and the grid part of the
    phase is formed in exact integer arithmetic; the sub-grid remainder is
    added in floating point.  Exact for dyadic inputs that fit the grid
    (every float a >= 2^-11 at 64 bits); see phase_error_bound otherwise.
    """
    if n < 0 or n > 2 ** 63:
        raise DomainError(f"n must lie in [0, 2^63], got {n}")
    _check_budget(n + 1, a, b, cfg)
    fp = _fixed_point(a, b, cfg.working_bits)
    scale = 1 << fp.bits
    v = (fp.b * n - fp.half_a * n * n) % scale
    r = math.ldexp(float(v), -fp.bits)
    if not fp.exact:
        nf = float(n)
        r += math.ldexp(fp.lo_b * nf - fp.lo_a * nf * nf, -fp.bits)
    return float(frac0(r))


def phase_block(start: int, stop: int, a: Real, b: Real,
                cfg: PrecisionConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Phases (turns, in [-1/2, 1/2]) of the summands n = start, ..., stop-1.

    Uses wrapping uint64 arithmetic when working_bits <= 64, which is exact
    mod 2^64 and therefore mod 2^working_bits; wider grids fall back to
    Python integers.  The exact grid value is rounded to nearest once; a
    truncating conversion would bias every phase the same way.
    """
    if stop <= start:
        return np.empty(0)
    if start < 0 or stop - 1 > 2 ** 63:
        raise DomainError("summation index out of range")
    _check_budget(stop, a, b, cfg)
    fp = _fixed_point(a, b, cfg.working_bits)
    if fp.bits <= 64:
        n = np.arange(start, stop, dtype=np.uint64) if stop < 2 ** 63 else \
            np.array([start + k for k in range(stop - start)], dtype=np.uint64)
        with np.errstate(over="ignore"):
            v = np.uint64(fp.b) * n - np.uint64(fp.half_a) * (n * n)
            if fp.bits < 64:
                v <<= np.uint64(64 - fp.bits)
        # two's complement view: the centred residue, rounded once to float
        out = np.ldexp(v.view(np.int64).astype(np.float64), -64)
    else:
        scale = 1 << fp.bits
        n = np.arange(start, stop, dtype=object)
        v = (fp.b * n - fp.half_a * (n * n)) % scale
        v = np.where(v >= scale // 2, v - scale, v)
        out = np.ldexp(v.astype(np.float64), -fp.bits)
    if not fp.exact:
        nf = np.arange(start, stop, dtype=np.float64)
        out = out + np.ldexp(fp.lo_b * nf - fp.lo_a * nf * nf, -fp.bits)
        out -= np.round(out)
    return out


def snap_dyadic(x: Real, bits: int = 63) -> Q:
    """Nearest rational on the 2^-bits grid.

    With bits <= 63 the phase constants a/2 and b fit the default 64-bit
    fixed-point grid, keeping every summand phase exact on the fast path.
    """
    return Q(int(round(as_fraction(x) * (1 << bits))), 1 << bits)
