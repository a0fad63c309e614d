"""Transfer operator of the fibre map b -> b1 = {-b/a + [1/a]/2}_0 and the
two-level density family it preserves.

For a density f on (-1/2, 1/2] the fibre operator is

    (P_a f)(b1) = a * sum_m f(a (-b1 + [1/a]/2 + m)),

the sum running over the integers m that put the argument in (-1/2, 1/2].
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ..errors import DomainError, ResolutionError


@dataclass(frozen=True)
class PiecewiseDensity:
    """f(b) = A for |b| < a/2 and B for |b| > a/2."""

    a: float
    A: float
    B: float

    def __post_init__(self):
        if not (0 < self.a < 1):
            raise DomainError(f"a must lie in (0, 1), got {self.a}")
        if self.A < 0 or self.B < 0:
            raise DomainError("density levels must be non-negative")

    @property
    def mass(self) -> float:
        return dot_rounded((self.a, 1.0, -self.a), (self.A, self.B, self.B))

    def __call__(self, b):
        b = np.asarray(b, dtype=float)
        return np.where(np.abs(b) < self.a / 2, self.A, self.B)

    @property
    def breakpoints(self):
        return (-self.a / 2, self.a / 2)


def gauss(a: float) -> float:
    return 1.0 / a - math.floor(1.0 / a)


_SPLIT = 134217729.0  # 2^27 + 1


def _two_prod(x: float, y: float):
    """x*y = p + e exactly (Dekker)."""
    p = x * y
    t = _SPLIT * x
    xh = t - (t - x)
    xl = x - xh
    t = _SPLIT * y
    yh = t - (t - y)
    yl = y - yh
    e = ((xh * yh - p) + xh * yl + xl * yh) + xl * yl
    return p, e


def dot_rounded(xs, ys) -> float:
    """sum x_i y_i rounded once (exact products, then fsum)."""
    parts = []
    for x, y in zip(xs, ys):
        parts.extend(_two_prod(float(x), float(y)))
    return math.fsum(parts)


def transfer_matrix(a: float) -> np.ndarray:
    """S(a) with (A1, B1) = S(a) (A, B)."""
    a1 = gauss(a)
    return np.array([[a, 1 - a * a1], [a, 1 - a - a * a1]])


def pf_apply_family(d: PiecewiseDensity) -> PiecewiseDensity:
    """P_a f(.|a, A, B) = f(.|a1, A1, B1)."""
    a = d.a
    a1 = gauss(a)
    if a1 == 0:
        raise DomainError(f"a={a} is 1/integer: the Gauss map hits 0")
    # each level rounded once, so the mass drifts only by output rounding
    aa1 = _two_prod(a, a1)
    A1 = dot_rounded((a, 1.0, -aa1[0], -aa1[1]), (d.A, d.B, d.B, d.B))
    B1 = dot_rounded((a, 1.0, -a, -aa1[0], -aa1[1]), (d.A, d.B, d.B, d.B, d.B))
    return PiecewiseDensity(a1, A1, B1)


def _dd_dot(terms):
    """sum of x*y over (x, y) with y a float or a (hi, lo) pair, as (hi, lo)."""
    parts = []
    for x, y in terms:
        hi, lo = (y, 0.0) if isinstance(y, float) else y
        parts.extend(_two_prod(x, hi))
        parts.append(x * lo)
    hi = math.fsum(parts)
    parts.append(-hi)
    return hi, math.fsum(parts)


def iterate_family(d: PiecewiseDensity, steps: int) -> list:
    """P_a applied `steps` times along the (floating) Gauss orbit of d.a.

    The levels are carried in double-double, so the returned densities
    (rounded to double) do not accumulate rounding from step to step.
    """
    a, A, B = d.a, (float(d.A), 0.0), (float(d.B), 0.0)
    out = []
    for _ in range(steps):
        a1 = gauss(a)
        if a1 == 0:
            raise DomainError(f"a={a} is 1/integer: the Gauss map hits 0")
        p, e = _two_prod(a, a1)
        common = [(a, A), (1.0, B), (-p, B), (-e, B)]
        A = _dd_dot(common)
        B = _dd_dot(common + [(-a, B)])
        a = a1
        out.append(PiecewiseDensity(a, A[0], B[0]))
    return out


def preimages(b1, a: float):
    """All b in (-1/2, 1/2] mapped to b1 (array) by the fibre map.

    Returns (b, mask) of shape (len(b1), M) where mask marks valid entries.
    """
    b1 = np.atleast_1d(np.asarray(b1, dtype=float))
    k = math.floor(1.0 / a)
    # a(-b1 + k/2 + m) in (-1/2, 1/2]  <=>  m in (b1 - k/2 - 1/(2a), b1 - k/2 + 1/(2a)]
    lo = np.floor(b1 - k / 2 - 0.5 / a) + 1
    hi = np.floor(b1 - k / 2 + 0.5 / a)
    M = int(np.max(hi - lo)) + 1
    m = lo[:, None] + np.arange(M)[None, :]
    b = a * (-b1[:, None] + k / 2 + m)
    mask = (m <= hi[:, None]) & (b > -0.5) & (b <= 0.5)
    return b, mask


def pf_apply_grid(f, a: float, grid) -> np.ndarray:
    """Brute-force (P_a f) at the points of grid.

    f is either a vectorised callable or a pair (nodes, values) sampled on a
    uniform grid of (-1/2, 1/2], interpolated piecewise linearly.  A sampled
    f must resolve the plateau of width a: at least 2/a nodes.
    """
    if not (0 < a < 1):
        raise DomainError(f"a must lie in (0, 1), got {a}")
    if not callable(f):
        nodes, values = (np.asarray(v, dtype=float) for v in f)
        if len(nodes) < 2 / a:
            raise ResolutionError(f"{len(nodes)} nodes cannot resolve a plateau of width {a}")
        f = lambda x, nodes=nodes, values=values: np.interp(x, nodes, values)
    b, mask = preimages(grid, a)
    vals = np.where(mask, f(np.where(mask, b, 0.0)), 0.0)
    return a * vals.sum(axis=1)


def piecewise_integral(func: Callable, cuts: Sequence[float], order: int = 40) -> float:
    """int_{-1/2}^{1/2} func by Gauss-Legendre on the pieces between cuts."""
    x, w = np.polynomial.legendre.leggauss(order)
    edges = [-0.5] + sorted(c for c in cuts if -0.5 < c < 0.5) + [0.5]
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        mid, half = (lo + hi) / 2, (hi - lo) / 2
        total += half * float(np.sum(w * func(mid + half * x)))
    return total


# ---------------------------------------------------------------------------
# the levels (A_l, B_l) along an orbit

def iterate_AB(a_seq: Sequence[float], B0: float = 1.0):
    """(A_l, B_l) along a_0, a_1, ... two ways.

    Returns dict with 'A_rec', 'B_rec' from repeated transfer matrices and
    'A_closed', 'B_closed' from the explicit alternating product sums
        B_l = sum_{m<l} (-1)^m prod_{n=l-m+1}^{l} a_n a_{n-1}
              + (-1)^l prod_{n=1}^{l} a_n a_{n-1} B_0,
        A_l = B_l + a_{l-1} B_{l-1},
    with A_0 fixed by a_0 A_0 + (1 - a_0) B_0 = 1.
    """
    a = np.asarray(a_seq, dtype=float)
    n = len(a)
    A0 = (1 - (1 - a[0]) * B0) / a[0]
    A_rec, B_rec = np.empty(n), np.empty(n)
    A_rec[0], B_rec[0] = A0, B0
    for l in range(n - 1):
        al, an = a[l], a[l + 1]
        A_rec[l + 1] = al * A_rec[l] + (1 - al * an) * B_rec[l]
        B_rec[l + 1] = al * A_rec[l] + (1 - al - al * an) * B_rec[l]
    p = np.ones(n)
    p[1:] = a[1:] * a[:-1]
    B_closed = np.empty(n)
    for l in range(n):
        total, prod = 0.0, 1.0
        for m in range(l):
            total += (-1) ** m * prod
            prod *= p[l - m]
        B_closed[l] = total + (-1) ** l * prod * B0
    A_closed = np.empty(n)
    A_closed[0] = A0
    A_closed[1:] = B_closed[1:] + a[:-1] * B_closed[:-1]
    return {"A_rec": A_rec, "B_rec": B_rec, "A_closed": A_closed, "B_closed": B_closed}


# ---------------------------------------------------------------------------
# box densities

@dataclass(frozen=True)
class BoxDensity:
    """Uniform density on |b| <= half_width."""

    a: float
    M: int
    half_width: float
    height: float

    def __call__(self, b):
        b = np.asarray(b, dtype=float)
        return np.where(np.abs(b) <= self.half_width, self.height, 0.0)


def second_family(a: float, M: int):
    """The box density f(.|a, M) and the parameters of its image.

    With k = [1/a] and a1 = {1/a}:
      k even (M <= k/2):       box |b| <= a(M - a1/2),       s = 2M - a1
      k odd  (M <= (k+1)/2):   box |b| <= a(M - (1+a1)/2),   s = 2M - 1 - a1
    and P_a f = f(.|a1, A1, B1) with A1 = 1 - (1 - a1)/s, B1 = 1 + a1/s.
    """
    if not (0 < a < 1):
        raise DomainError(f"a must lie in (0, 1), got {a}")
    k = math.floor(1 / a)
    a1 = 1 / a - k
    if k % 2 == 0:
        top, s, hw = k // 2, 2 * M - a1, a * (M - a1 / 2)
    else:
        top, s, hw = (k + 1) // 2, 2 * M - 1 - a1, a * (M - (1 + a1) / 2)
    if not (1 <= M <= top):
        raise DomainError(f"M={M} out of range [1, {top}] for a={a}")
    box = BoxDensity(a, M, hw, 1.0 / (2 * hw))
    image = PiecewiseDensity(a1, 1 - (1 - a1) / s, 1 + a1 / s)
    return box, image
