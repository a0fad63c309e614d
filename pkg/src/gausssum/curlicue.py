"""Partial-sum paths S(0), S(1), ..., S(N) and their comparison with the
Cornu spiral on a level block where a_L is small.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree

from .asymptotics import last_level
from .errors import DomainError
from .numeric import (DEFAULT_CONFIG, Params, PrecisionConfig, Q, phase_block, unit_exp,
                      unit_exp_array)
from .renorm import _wide_enough, gauss_orbit, min_N_reaching, n_bounds, renorm_sum
from .special import fresnel_F_array

MAX_PATH = 10 ** 7
_BLOCK = 1 << 20
Q_HALF = Q(1, 2)


@dataclass
class CurlicuePath:
    points: np.ndarray        # complex, S(0), ..., S(N)
    params: Params
    N: int


def partial_sums(start: int, stop: int, s0: complex, a, b, cfg) -> np.ndarray:
    """S(start), ..., S(stop) given s0 = S(start)."""
    out = np.empty(stop - start + 1, dtype=complex)
    out[0] = s0
    cfg = _wide_enough(stop, a, b, cfg)
    pos = 1
    for lo in range(start, stop, _BLOCK):
        hi = min(lo + _BLOCK, stop)
        z = unit_exp_array(phase_block(lo, hi, a, b, cfg))
        out[pos:pos + hi - lo] = out[pos - 1] + np.cumsum(z)
        pos += hi - lo
    return out


def curlicue_path(N: int, p: Params, cfg: PrecisionConfig = DEFAULT_CONFIG) -> CurlicuePath:
    if N < 0:
        raise DomainError("N must be >= 0")
    if N > MAX_PATH:
        raise DomainError(f"N={N} exceeds the path limit {MAX_PATH}")
    a, b = p.exact
    return CurlicuePath(partial_sums(0, N, 0j, a, b, cfg), p, N)


def depth_profile(N: int, a) -> tuple:
    """(L(n), a_{L(n)}) for n = 0..N from the level boundaries N^-(L)."""
    starts, avals = [], []
    L = 0
    while True:
        orbit = gauss_orbit(a, L + 1)
        if len(orbit) <= L:
            break
        lo = min_N_reaching(L, 1, orbit)
        if lo is None or lo > N:
            break
        starts.append(lo)
        avals.append(float(orbit[L]))
        if orbit[L] == 0:
            break
        L += 1
    n = np.arange(N + 1)
    idx = np.searchsorted(np.array(starts), n, side="right") - 1
    idx = np.maximum(idx, 0)
    return idx, np.array(avals)[idx]


def export_curlicue(N: int, p: Params, out, cfg: PrecisionConfig = DEFAULT_CONFIG,
                    annotate: bool = False) -> CurlicuePath:
    """Write n, Re S(n), Im S(n) [, L(n), a_L(n)] as CSV to a path or file object."""
    path = curlicue_path(N, p, cfg)
    cols = [np.arange(N + 1), path.points.real, path.points.imag]
    header = ["n", "re", "im"]
    if annotate:
        Ls, aLs = depth_profile(N, p.exact[0])
        cols += [Ls, aLs]
        header += ["L", "a_L"]
    fh = open(out, "w", newline="") if isinstance(out, (str, bytes)) or hasattr(out, "__fspath__") else out
    try:
        w = csv.writer(fh)
        w.writerow(header)
        for row in zip(*cols):
            w.writerow([int(row[0]), repr(float(row[1])), repr(float(row[2]))] +
                       ([int(row[3]), repr(float(row[4]))] if annotate else []))
    finally:
        if fh is not out:
            fh.close()
    return path


# ---------------------------------------------------------------------------
# comparison with the Fresnel arc

@dataclass
class SpiralFit:
    L: int
    a_L: float
    b_L: float
    hausdorff: float
    C: float                 # hausdorff / sqrt(a_L)
    n_points: int
    arc_step: float


def normalized_block(p: Params, L: int, cfg: PrecisionConfig = DEFAULT_CONFIG):
    """Points w(N) = conj^L[e(-theta) sqrt(a_0..a_L) S(N)] + F(-b_L/sqrt(a_L))
    for N in the level-L block with xi_L(N) - b_L <= 1/2, where the leading
    term predicts w(N) ~ F((xi_L(N) - b_L)/sqrt(a_L)).
    Returns (w, aL, bL).
    """
    a, b = p.exact
    lo, hi = n_bounds(L, a)
    orbit = gauss_orbit(a, L)
    lv = last_level(lo, p, cfg)
    if lv.L != L:
        raise DomainError(f"N^-({L}) has depth {lv.L}")
    aL, bL = lv.a, lv.b
    # last N with xi_L - b_L <= 1/2: N_L <= (1/2 + b_L)/a_L
    kmax = int(math.floor((Q_HALF + bL) / aL))
    if kmax < 1:
        raise DomainError("the below-half part of the block is empty")
    stop = min_N_reaching(L, kmax + 1, orbit) - 1
    if hi is not None:
        stop = min(stop, hi)
    if stop - lo > MAX_PATH:
        raise DomainError(f"block of {stop - lo} points exceeds the path limit")
    s0 = renorm_sum(lo, p, cfg)
    S = partial_sums(lo, stop, s0, a, b, cfg)
    w = S * math.sqrt(float(lv.prod)) * unit_exp(-lv.theta_next)
    if L % 2:
        w = np.conj(w)
    w = w + fresnel_F_array(np.array([float(-bL) / math.sqrt(float(aL))]))[0]
    return w, aL, bL


def spiral_distance(p: Params, L: int, cfg: PrecisionConfig = DEFAULT_CONFIG,
                    refine: int = 1) -> SpiralFit:
    """Hausdorff distance between the normalized block and the Fresnel arc."""
    w, aL, bL = normalized_block(p, L, cfg)
    A = math.sqrt(float(aL))
    t0 = float(aL - bL) / A
    t1 = float(Q_HALF - bL) / A
    step = 0.02 * A / refine
    t = np.linspace(t0, t1, max(2, int(math.ceil((t1 - t0) / step)) + 1))
    arc = fresnel_F_array(t)
    P = np.column_stack([w.real, w.imag])
    R = np.column_stack([arc.real, arc.imag])
    d1 = cKDTree(R).query(P)[0].max()
    d2 = cKDTree(P).query(R)[0].max()
    h = float(max(d1, d2))
    return SpiralFit(L, float(aL), float(bL), h, h / A, len(w), float(t[1] - t[0]))
