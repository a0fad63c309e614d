"""Orbits of b in the set B_a = {(ma + n)/2}_0 ((m, n) not both odd), and the
map T on X = [0, 3] that codes them.

For b in B_a the fibre orbit is b_j = (n_j a_j - [n_j a_j] - eps_j)/2 with
integers n_{j+1} = [a_j n_j] + eps_j and eps_j in {0, 1}.  The raw value
(n a - [n a] - eps)/2 lies in [-1/2, 1/2); when it equals -1/2 the fibre map
sees +1/2 instead and n_{j+1} is lowered by 2.  Once n_j lies in
{-1, 0, 1} it stays there and b_j lives in {0, 1/2, -a_j/2} (the first such
value may be +a_j/2).  The transitions are

    b          b1 ([1/a] even)   b1 ([1/a] odd)
    0          0                 1/2
    1/2        -a1/2             -a1/2
    +-a/2      1/2               0

T on X = [0, 3] follows the Gauss map in the fractional part and stores the
b value in the integer part: (0,1) <-> 0, (1,2) <-> -a/2, (2,3) <-> 1/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy import special as sps
from scipy import stats

from ..errors import DomainError, PrecisionError
from ..numeric import Q, as_fraction, frac0

LN2 = math.log(2.0)
HALF = Q(1, 2)


# ---------------------------------------------------------------------------
# B_a orbits

@dataclass
class BaOrbit:
    a: Q
    m: int
    n: int
    j0: Optional[int]                  # first j with n_j in {-1, 0, 1}
    n_seq: List[int]
    eps_seq: List[int]
    b_exact: List[Q]
    b_float: List[float]
    max_float_gap: float               # max |b_float - b_exact| before each reset
    settled: bool                      # b_j in {0, 1/2, -a_j/2} for all j > j0
    table_ok: bool                     # transitions after j0 follow the table
    reason: str = ""


def b_from_integers(n: int, eps: int, a: Q) -> Q:
    x = n * a
    return frac0((x - math.floor(x) - eps) / 2)


def table_image(b: Q, a: Q, a1: Q) -> Optional[Q]:
    """Image of b in {0, 1/2, +-a/2} under the transition table (None otherwise)."""
    even = math.floor(1 / a) % 2 == 0
    if b == 0:
        return Q(0) if even else HALF
    if b == HALF:
        return -a1 / 2
    if b == a / 2 or b == -a / 2:
        return HALF if even else Q(0)
    return None


def _in_set(b: Q, a: Q, allow_plus: bool) -> bool:
    return b == 0 or b == HALF or b == -a / 2 or (allow_plus and b == a / 2)


def ba_orbit(a, m: int, n: int, jmax: int = 200, orbit: Optional[List[Q]] = None) -> BaOrbit:
    """Track b_0 = {(m a + n)/2}_0 along the exact Gauss orbit of a.

    A floating b_j is advanced by the fibre map and at each step eps_j is
    chosen as the candidate (n_j a_j - [n_j a_j] - eps)/2 nearest to it
    (mod 1); the float is then reset to the exact value.
    """
    if m % 2 and n % 2:
        raise DomainError(f"(m, n) = ({m}, {n}) are both odd")
    a = as_fraction(a)
    if not (0 < a < 1):
        raise DomainError(f"a must lie in (0, 1), got {a}")
    if orbit is None:
        orbit = [a]
    while len(orbit) < jmax + 2 and orbit[-1] != 0:
        x = 1 / orbit[-1]
        orbit.append(x - math.floor(x))
    nj = m
    eps = (n + math.floor(m * a)) % 2
    b = b_from_integers(nj, eps, a)
    bf = float(b)
    n_seq, eps_seq, bex, bfl = [nj], [eps], [b], [bf]
    gap = 0.0
    reason = ""
    for j in range(min(jmax, len(orbit) - 2)):
        aj, a1 = orbit[j], orbit[j + 1]
        if a1 == 0:
            reason = "expansion of a terminated"
            break
        # float fibre step
        inv = 1.0 / float(aj)
        y = -bf * inv + 0.5 * math.floor(1 / aj)
        bf = y - math.ceil(y - 0.5)
        nn = math.floor(aj * nj) + eps
        if (aj * nj) == math.floor(aj * nj) and eps == 1:
            # raw value -1/2 is stored as +1/2, and -b/a moves by 1/a = k + a1
            nn -= 2
        cands = [b_from_integers(nn, e, a1) for e in (0, 1)]
        dist = [abs(((bf - float(c)) + 0.5) % 1.0 - 0.5) for c in cands]
        e = int(dist[1] < dist[0])
        if dist[e] >= 0.25:
            raise PrecisionError(f"cannot resolve eps at step {j + 1} (distance {dist[e]:.3g})")
        gap = max(gap, float(dist[e]))
        nj, eps, b = nn, e, cands[e]
        bf = float(b)
        n_seq.append(nj)
        eps_seq.append(eps)
        bex.append(b)
        bfl.append(bf)
    j0 = next((j for j, v in enumerate(n_seq) if v in (-1, 0, 1)), None)
    settled = table_ok = False
    if j0 is not None:
        settled = all(_in_set(bex[j], orbit[j], allow_plus=(j == j0)) for j in range(j0, len(bex)))
        table_ok = all(table_image(bex[j], orbit[j], orbit[j + 1]) == bex[j + 1]
                       for j in range(j0, len(bex) - 1))
        settled = settled and all(n_seq[j] in (-1, 0, 1) for j in range(j0, len(n_seq)))
    elif not reason:
        reason = f"no n_j in {{-1, 0, 1}} within {jmax} steps"
    return BaOrbit(a, m, n, j0, n_seq, eps_seq, bex, bfl, gap, settled, table_ok, reason)


# ---------------------------------------------------------------------------
# the map on [0, 3]

_OFFSET_EVEN = (0, 2, 1)   # offset added to {1/t} by interval, [1/t] even
_OFFSET_ODD = (2, 0, 1)


def tilde_map(x):
    """T(x) for x in (0, 3] minus the seams {1, 2}.  Exact for rationals."""
    if isinstance(x, np.ndarray):
        return _tilde_array(x)
    if not (0 < x <= 3) or x == 1 or x == 2:
        raise DomainError(f"x={x} outside the domain (0, 3] \\ {{1, 2}}")
    i = min(int(math.floor(x)), 2)
    t = x - i
    y = 1 / t
    k = math.floor(y)
    off = _OFFSET_EVEN[i] if k % 2 == 0 else _OFFSET_ODD[i]
    return (y - k) + off


def _tilde_array(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any((x <= 0) | (x > 3) | (x == 1) | (x == 2)):
        raise DomainError("points outside (0, 3] \\ {1, 2}")
    i = np.minimum(np.floor(x), 2).astype(np.int64)
    y = 1.0 / (x - i)
    k = np.floor(y)
    even = (k % 2) == 0
    off = np.where(even, np.take(_OFFSET_EVEN, i), np.take(_OFFSET_ODD, i))
    return (y - k) + off


def code(x) -> tuple:
    """(a, b) coded by x: a = frac part, b from the integer part."""
    i = min(int(math.floor(x)), 2)
    a = x - i
    return a, (Q(0), -a / 2, HALF)[i]


def nu_cdf(x):
    x = np.asarray(x, dtype=float)
    i = np.clip(np.floor(x), 0, 2)
    return (i + np.log2(1 + x - i)) / 3


def sample_nu(rng: np.random.Generator, size: int) -> np.ndarray:
    i = rng.integers(0, 3, size)
    t = np.exp2(rng.random(size)) - 1.0
    bad = t <= 0
    while np.any(bad):
        t[bad] = np.exp2(rng.random(int(bad.sum()))) - 1.0
        bad = t <= 0
    return i + t


def _parity_tail(t: np.ndarray, r: int, J: int) -> np.ndarray:
    """sum_{j > J} [1/(2j+r+t) - 1/(2j+r+t+1)] in closed form."""
    return 0.5 * (sps.digamma(J + 1 + (r + t + 1) / 2) - sps.digamma(J + 1 + (r + t) / 2))


def parity_operator_one(t, parity: str, tol: float = 1e-10, k_explicit: int = 4000,
                        closed_tail: bool = True, k_max: int = 10 ** 7) -> np.ndarray:
    """(P_e 1)(t) or (P_o 1)(t): sum over even or odd k of (1+t)/((k+t)(k+t+1)).

    The first k_explicit terms are summed directly.  With closed_tail the rest
    is added via digamma; otherwise terms are summed until the integral bound
    (1+t)/(2 k) on the tail is below tol, failing past k_max.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    r = 0 if parity == "even" else 1
    if parity not in ("even", "odd"):
        raise DomainError("parity must be 'even' or 'odd'")
    if not closed_tail:
        k_explicit = int(math.ceil(2.0 / (2 * tol)))
        if k_explicit > k_max:
            raise PrecisionError(f"series truncation needs {k_explicit} > {k_max} terms")
    # k = 2j + r for j >= j_start
    j_start = 1 if r == 0 else 0
    J = k_explicit // 2
    js = np.arange(j_start, J + 1, dtype=float)
    k = 2 * js[None, :] + r + t[:, None]
    s = np.sum(1.0 / k - 1.0 / (k + 1), axis=1)
    if closed_tail:
        s = s + _parity_tail(t, r, J)
    return (1 + t) * s


def p1_on_X(grid: np.ndarray, **kw) -> np.ndarray:
    """(P 1_X)(y) on X, summing preimage branches by source interval.

    Target (0,1): even k from [0,1] and odd k from (1,2).
    Target (1,2): every k from (2,3).
    Target (2,3): odd k from [0,1] and even k from (1,2).
    """
    y = np.asarray(grid, dtype=float)
    t = y - np.minimum(np.floor(y), 2)
    # each target interval receives one even-k and one odd-k family of branches
    return parity_operator_one(t, "even", **kw) + parity_operator_one(t, "odd", **kw)


@dataclass
class InvarianceReport:
    samples: int
    ks: float
    ks_pvalue: float
    p1_max_dev: float
    grid_points: int
    lags: List[int]
    correlation: List[float]           # |P2(0, m) - P^2| / P
    noise: float                        # one sd of the estimate at a lag
    decay_rate: Optional[float]         # fitted 1/C in exp(-m/C)


def correlation_decay(x: np.ndarray, lags: int = 20, threshold: float = 0.1):
    """|P(E_0 and E_m) - P(E_0)P(E_m)| / P(E_0) for E_l = {a_l < threshold, b_l = 0}."""
    ev = []
    for _ in range(lags + 1):
        ev.append((x < threshold) & (x > 0))
        x = _tilde_array(x)
        bad = (x <= 0) | (x == 1) | (x == 2)
        if np.any(bad):
            x = x.copy()
            x[bad] = 0.5
    ev = np.array(ev, dtype=float)
    p = ev.mean(axis=1)
    corr = [abs(float((ev[0] * ev[m]).mean()) - p[0] * p[m]) / p[0] for m in range(1, lags + 1)]
    noise = float(np.mean([(ev[0] * ev[m]).std() for m in range(1, lags + 1)])) / math.sqrt(len(x)) / p[0]
    lagv = np.arange(1, lags + 1)
    c = np.array(corr)
    use = c > 3 * noise
    rate = None
    if use.sum() >= 2:
        slope = np.polyfit(lagv[use], np.log(c[use]), 1)[0]
        rate = float(-slope)
    return list(lagv.tolist()), corr, noise, rate


def tilde_invariance_check(samples: int, rng: np.random.Generator, grid_points: int = 300,
                           lags: int = 20, corr_samples: Optional[int] = None) -> InvarianceReport:
    x = sample_nu(rng, samples)
    y = _tilde_array(x)
    ks = stats.kstest(y, nu_cdf)
    g = (np.arange(grid_points) + 0.5) * 3 / grid_points
    g = g[(g != 1) & (g != 2)]
    dev = float(np.max(np.abs(p1_on_X(g) - 1)))
    xc = sample_nu(rng, corr_samples or samples)
    lagv, corr, noise, rate = correlation_decay(xc, lags)
    return InvarianceReport(samples, float(ks.statistic), float(ks.pvalue), dev, len(g),
                            lagv, corr, noise, rate)


# ---------------------------------------------------------------------------
# side-by-side with the skew product

def coding_agreement(a, steps: int = 100) -> Optional[int]:
    """Run (a, 0) under the skew product and a under T exactly.

    Returns None when frac(T^j a) = a_j and the coded b equals b_j for all
    j <= steps, otherwise the first j that disagrees.
    """
    a = as_fraction(a)
    b = Q(0)
    x = a
    for j in range(steps + 1):
        ca, cb = code(x)
        if ca != a or cb != b:
            return j
        if j == steps:
            break
        inv = 1 / a
        k = math.floor(inv)
        a, b = inv - k, frac0(-b * inv + Q(k, 2))
        x = tilde_map(x)
    return None
