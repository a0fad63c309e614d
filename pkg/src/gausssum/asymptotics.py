"""Fresnel asymptotics of S(N, a, b) at the last cascade level, and the
growth of max |S(N)/sqrt(N)| over a level block N^-(L) <= N <= N^+(L).

Let L = L(N) and xi = a_L N_L (the last level has N_{L+1} = 0, so xi < 1).
Replacing F(., a_L) in the level-L term by its small-a_L limit gives, with
A = sqrt(a_L),

    xi - b_L <= 1/2:
        e(theta_{L+1}) / sqrt(a_0...a_L) * conj^L [ F((xi - b_L)/A) - F(-b_L/A) ]
    xi - b_L >= 1/2:
        e(theta_{L+1}) / sqrt(a_0...a_L) * conj^L [ (e(-1/8) - F(-b_L/A))
              + e((b_L - xi + 1/2)/a_L) (e(-1/8) - F((1 - xi + b_L)/A)) ]

where F is the Fresnel integral.  The second form comes from reflecting
x = xi - b_L to 1 - x; the quadratic phases combine into the exact phase
(b_L - xi + 1/2)/a_L.  The error is O(sqrt(a_L)) inside the bracket plus
the earlier levels, O((a_0...a_{L-1})^(-1/2)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .errors import DomainError
from .numeric import (DEFAULT_CONFIG, E_MINUS_EIGHTH, Params, PrecisionConfig, Q, as_fraction,
                      frac0, phase_block, unit_exp, unit_exp_array)
from .renorm import (EIGHTH, _cascade, gauss_orbit, min_N_reaching, n_bounds, renorm_sum,
                     xi_values)
from .special import fresnel_F

HALF = Q(1, 2)


@dataclass(frozen=True)
class AsymptoticValue:
    value: complex
    regime: str          # "below-half" or "above-half"
    err_order: float     # sqrt(a_L)/sqrt(a_0...a_L) + 1/sqrt(a_0...a_{L-1})
    L: int
    xi: Q
    a_L: Q
    b_L: Q
    bracket: complex     # the Fresnel bracket before phase, scale and conjugation


@dataclass(frozen=True)
class LastLevel:
    L: int
    a: Q
    b: Q
    N_L: int
    xi: Q
    theta_next: Q        # theta_{L+1}
    prod: Q              # a_0 ... a_L


def last_level(N: int, p: Params, cfg: PrecisionConfig = DEFAULT_CONFIG) -> LastLevel:
    a, b = p.exact
    steps, tail = _cascade(N, a, b, cfg.max_depth)
    if tail is not None:
        raise DomainError("the expansion of a terminates before N_{L+1} = 0")
    st = steps[-1]
    prod = Q(1)
    for s in steps:
        prod *= s.a
    theta = frac0(st.theta + (-1) ** st.l * (EIGHTH + st.b * st.b / (2 * st.a)))
    return LastLevel(st.l, st.a, st.b, st.N, st.a * st.N, theta, prod)


def fresnel_bracket(xi, aL, bL, regime: Optional[str] = None) -> complex:
    """The integral factor of the leading term (see module docstring)."""
    A = math.sqrt(float(aL))
    x = xi - bL
    if regime is None:
        regime = "below-half" if x <= HALF else "above-half"
    lower = fresnel_F(float(-bL) / A).value
    if regime == "below-half":
        return fresnel_F(float(x) / A).value - lower
    tail = E_MINUS_EIGHTH - fresnel_F(float(1 - x) / A).value
    return (E_MINUS_EIGHTH - lower) + unit_exp((bL - xi + HALF) / aL) * tail


def asymptotic_sum(N: int, p: Params, cfg: PrecisionConfig = DEFAULT_CONFIG,
                   regime: Optional[str] = None) -> AsymptoticValue:
    """Leading Fresnel term of S(N, a, b) at its last level.

    regime may force either branch (both are valid approximations near the
    seam xi - b_L = 1/2); by default it follows the sign of xi - b_L - 1/2.
    """
    if N < 1:
        raise DomainError("N must be >= 1")
    lv = last_level(N, p, cfg)
    auto = "below-half" if lv.xi - lv.b <= HALF else "above-half"
    regime = regime or auto
    br = fresnel_bracket(lv.xi, lv.a, lv.b, regime)
    if lv.L % 2:
        br_c = br.conjugate()
    else:
        br_c = br
    scale = 1.0 / math.sqrt(float(lv.prod))
    val = unit_exp(lv.theta_next) * br_c * scale
    prev = math.sqrt(float(lv.prod / lv.a))
    err = math.sqrt(float(lv.a)) * scale + 1.0 / prev
    return AsymptoticValue(val, regime, err, lv.L, lv.xi, lv.a, lv.b, br)


@dataclass(frozen=True)
class NormalizedMag:
    exact: float          # |S(N)|/sqrt(N)
    predicted: float      # |bracket| / sqrt(xi)
    xi: Q
    a_L: Q
    L: int


def normalized_mag(N: int, p: Params, cfg: PrecisionConfig = DEFAULT_CONFIG) -> NormalizedMag:
    """|S(N, a, b)|/sqrt(N) and its leading-term prediction |bracket|/sqrt(xi).

    The prediction uses 1/sqrt(a_0...a_L N) = (1 + O(a_L/xi))/sqrt(xi) with
    |O(a_L/xi)| <= 4 a_L/xi.
    """
    s = renorm_sum(N, p, cfg)
    av = asymptotic_sum(N, p, cfg)
    pred = abs(av.bracket) / math.sqrt(float(av.xi))
    return NormalizedMag(abs(s) / math.sqrt(N), pred, av.xi, av.a_L, av.L)


# ---------------------------------------------------------------------------
# M(L, a, b) = max over the level block of |S(N)/sqrt(N)|

@dataclass
class GrowthBound:
    L: int
    M: float
    key: float                  # sqrt|b_L| + a_L^(1/4)
    bound_upper: float          # C / key
    bound_lower: Optional[float]
    C: float
    N_argmax: int
    N_minus: int
    N_plus: Optional[int]
    a_L: float
    b_L: float
    exhausted: bool = False     # structured scan: M is a lower estimate of the true max
    n_evaluated: int = 0


def _scan_block(start: int, count: int, s0: complex, a, b, cfg) -> tuple[float, int]:
    """max over N in (start, start+count] of |S(N)|/sqrt(N) given s0 = S(start)."""
    best, arg = abs(s0) / math.sqrt(start), start
    for lo in range(start, start + count, 1 << 18):
        hi = min(lo + (1 << 18), start + count)
        z = unit_exp_array(phase_block(lo, hi, a, b, cfg))
        path = s0 + np.cumsum(z)
        Ns = np.arange(lo + 1, hi + 1, dtype=float)
        r = np.abs(path) / np.sqrt(Ns)
        i = int(np.argmax(r))
        if r[i] > best:
            best, arg = float(r[i]), lo + 1 + i
        s0 = complex(path[-1])
    return best, arg


def M_of_L(L: int, p: Params, cfg: PrecisionConfig = DEFAULT_CONFIG, scan_budget: int = 1 << 20,
           C: float = 8.0, c_key: float = 0.1, grid: int = 48, block: int = 256) -> GrowthBound:
    """M(L, a, b) by exact scan or, for long blocks, a structured scan.

    The structured scan visits evenly spaced and geometrically spaced values
    of xi = k a_L, the points xi0 = a_L/(2|b_L|) and sqrt(a_L) where the
    maximum is expected, and scans `block` consecutive N after each.
    """
    a, b = p.exact
    lo, hi = n_bounds(L, a)
    # level-L parameters
    steps, _ = _cascade(lo, a, b, max(cfg.max_depth, L + 1))
    aL, bL = steps[L].a, steps[L].b
    key = math.sqrt(abs(float(bL))) + float(aL) ** 0.25
    n_eval = 0
    if hi is not None and hi - lo + 1 <= scan_budget:
        s0 = renorm_sum(lo, p, cfg)
        M, arg = _scan_block(lo, hi - lo, s0, a, b, cfg)
        exhausted = False
        n_eval = hi - lo + 1
    else:
        exhausted = True
        xv = xi_values(L, a, budget=grid)
        starts = {N for N, _ in xv.points}
        # geometric grid in xi, plus the designated points
        targets = list(np.geomspace(float(aL), 1.0, grid, endpoint=False))
        targets.append(math.sqrt(float(aL)))
        if bL != 0:
            targets.append(float(aL) / (2 * abs(float(bL))))
        orbit = gauss_orbit(a, L)
        for t in targets:
            k = int(round(t / float(aL)))
            for kk in (k - 1, k, k + 1):
                if kk >= 1 and kk * aL < 1:
                    N = min_N_reaching(L, kk, orbit)
                    if N is not None and (hi is None or N <= hi):
                        starts.add(N)
        M, arg = 0.0, lo
        for N in sorted(starts):
            cnt = block if hi is None else min(block, hi - N)
            s0 = renorm_sum(N, p, cfg)
            m, ar = _scan_block(N, cnt, s0, a, b, cfg)
            n_eval += cnt + 1
            if m > M:
                M, arg = m, ar
    lower = 1.0 / (C * key) if key <= c_key else None
    return GrowthBound(L, M, key, C / key, lower, C, arg, lo, hi, float(aL), float(bL),
                       exhausted, n_eval)


# ---------------------------------------------------------------------------
# parameters with a prescribed level-L pair (a_L, b_L)

def constructed_params(prefix, aL, bL, rng: Optional[np.random.Generator] = None) -> Params:
    """(a, b) whose cascade has a_l = 1/(k_l + a_{l+1}) for the partial
    quotients k_l = prefix[l] and ends with (a_L, b_L), L = len(prefix).

    b is pulled back through b_l = a_l (k_l/2 - b_{l+1} + m) with the integer
    m chosen (at random if rng is given) among those giving b_l in (-1/2, 1/2].
    """
    aL, bL = as_fraction(aL), as_fraction(bL)
    if not (0 < aL < 1):
        raise DomainError("a_L must lie in (0, 1)")
    if not (-HALF < bL <= HALF):
        raise DomainError("b_L must lie in (-1/2, 1/2]")
    a, b = aL, bL
    for k in reversed(list(prefix)):
        k = int(k)
        if k < 1:
            raise DomainError("partial quotients must be >= 1")
        a = 1 / (k + a)
        # b_l = a (k/2 - b + m) in (-1/2, 1/2]  <=>  m in (-1/(2a) - k/2 + b, 1/(2a) - k/2 + b]
        lo = int(math.floor(-1 / (2 * a) - Q(k, 2) + b)) + 1
        hi = int(math.floor(1 / (2 * a) - Q(k, 2) + b))
        ms = [m for m in range(lo, hi + 1) if -HALF < a * (Q(k, 2) - b + m) <= HALF]
        m = ms[int(rng.integers(len(ms)))] if rng is not None else min(ms, key=abs)
        b = a * (Q(k, 2) - b + m)
    return Params(a, b)
