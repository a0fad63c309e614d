"""Exact renormalization of S(N, a, b) = sum_{n<N} e(-a n^2/2 + n b).

One step trades S(N, a, b) for a conjugated sum of length [aN] with
parameters a1 = {1/a}, b1 = {-b/a + [1/a]/2}_0 plus two values of F.
Iterating until the length hits zero expresses S through O(log N) special
function values.

The cascade (a_l, b_l, N_l, xi_l, theta_l) is computed in exact rational
arithmetic: a float input is the dyadic rational it represents, and every
later level is an exact function of it.  Only the F evaluations and the
final sum are rounded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import List, NamedTuple, Optional, Tuple

import numpy as np

from .errors import DepthLimitError, DomainError
from .numeric import (Q, DEFAULT_CONFIG, E_MINUS_EIGHTH, Params, PrecisionConfig, _check_budget,
                      as_fraction, frac0, phase_block, phase_error_bound, unit_exp, unit_exp_array)
from .special import SpecialValue, calF, calF_many

_CHUNK = 1 << 20

EIGHTH = Q(1, 8)


# ---------------------------------------------------------------------------
# direct summation

def direct_sum(N: int, a, b, cfg: PrecisionConfig = DEFAULT_CONFIG, start: int = 0) -> complex:
    """sum_{start<=n<N} e(-a n^2/2 + n b) with exactly reduced phases.

    Accepts a = 0 (a geometric sum), which the cascade needs when it
    terminates on a rational a.
    """
    if N < 0:
        raise DomainError(f"N must be non-negative, got {N}")
    cfg = _wide_enough(N, a, b, cfg)
    total = 0j
    for lo in range(start, N, _CHUNK):
        hi = min(lo + _CHUNK, N)
        total += complex(np.sum(unit_exp_array(phase_block(lo, hi, a, b, cfg))))
    return total


def _wide_enough(N: int, a, b, cfg: PrecisionConfig) -> PrecisionConfig:
    """Widen the fixed-point grid when a/2, b do not fit it exactly.

    Deep cascade levels have rational parameters with large denominators;
    the phase error bound is pushed down to double-precision rounding.
    """
    if phase_error_bound(N, a, b, cfg) <= 2.0 ** -50:
        return cfg
    bits = max(cfg.working_bits, 2 * max(N, 1).bit_length() + 10)
    return replace(cfg, working_bits=bits)


def naive_sum(N: int, p: Params, cfg: PrecisionConfig = DEFAULT_CONFIG) -> complex:
    """Ground-truth direct evaluation of S(N, a, b).

    Uses exactly cfg.working_bits; raises PrecisionError when that grid
    cannot represent the phases well enough.
    """
    if N < 0:
        raise DomainError(f"N must be non-negative, got {N}")
    # fail before summing rather than at the first block past the budget
    _check_budget(N, p.a, p.b, cfg)
    total = 0j
    for lo in range(0, N, _CHUNK):
        hi = min(lo + _CHUNK, N)
        total += complex(np.sum(unit_exp_array(phase_block(lo, hi, p.a, p.b, cfg))))
    return total


# ---------------------------------------------------------------------------
# one step of the Gauss map on (a, b)

class GaussStep(NamedTuple):
    a: object
    b: object
    terminated: bool     # a1 == 0: the input a was 1/integer


def _gauss_exact(a: Q, b: Q) -> Tuple[Q, Q]:
    inv = 1 / a
    k = int(math.floor(inv))
    return inv - k, frac0(-b / a + Q(k, 2))


def gauss_step(p: Params) -> GaussStep:
    """(a, b) -> ({1/a}, {-b/a + [1/a]/2}_0), evaluated exactly.

    Float inputs give float outputs rounded once from the exact result.
    """
    aq, bq = p.exact
    a1, b1 = _gauss_exact(aq, bq)
    if not isinstance(p.a, (float, np.floating)):
        return GaussStep(a1, b1, a1 == 0)
    return GaussStep(float(a1), float(b1), a1 == 0)


def c_factor(a) -> complex:
    return E_MINUS_EIGHTH / math.sqrt(float(a))


# ---------------------------------------------------------------------------
# single renormalization step

def _delta_F(N: int, a: Q, b: Q, xi: Q, cfg) -> SpecialValue:
    """e(-a N^2/2 + N b) F(xi - b, a) - F(-b, a)."""
    outer = -a * N * N / 2 + b * N
    return calF(xi - b, a, cfg).rotated(outer) - calF(-b, a, cfg)


def renorm_once(N: int, p: Params, cfg: PrecisionConfig = DEFAULT_CONFIG) -> complex:
    """S(N, a, b) from one renormalization step, the shorter sum done directly."""
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N}")
    a, b = p.exact
    a1, b1 = _gauss_exact(a, b)
    N1 = int(math.floor(a * N))
    xi = a * N - N1
    inner = direct_sum(N1, a1, b1, cfg).conjugate() * unit_exp(b * b / (2 * a))
    return c_factor(a) * (inner + _delta_F(N, a, b, xi, cfg).value)


def renorm_once_sg(N: int, p: Params, cfg: PrecisionConfig = DEFAULT_CONFIG) -> complex:
    """The same identity with the shorter sum folded into F(Na - b, a).

    Unit shifts of F reproduce the conjugated inner sum term by term, so
    this form needs no direct summation at all (cost grows with [aN]).
    """
    a, b = p.exact
    outer = -a * N * N / 2 + b * N
    val = calF(a * N - b, a, cfg).rotated(outer) - calF(-b, a, cfg)
    return c_factor(a) * val.value


# ---------------------------------------------------------------------------
# the cascade

@dataclass(frozen=True)
class RenormStep:
    l: int
    a: Q
    b: Q
    N: int
    xi: Q
    theta: Q

    @property
    def conj_parity(self) -> str:
        return "odd" if self.l % 2 else "even"

    def as_row(self) -> dict:
        return {"l": self.l, "a": float(self.a), "b": float(self.b), "N": self.N,
                "xi": float(self.xi), "theta": float(self.theta), "parity": self.conj_parity}


def _cascade(N: int, a: Q, b: Q, max_depth: int, stop_at: int = 0,
             tiny_a: float = 0.0, tiny_cap: int = 1 << 20):
    """Levels l = 0, 1, ... with N_l >= 1, stopping when N_{l+1} = 0.

    The cascade is cut short, and the current level returned as the tail to
    be summed directly, when a_l = 0 (rational a), when N_l <= stop_at, or
    when a_l < tiny_a with N_l <= tiny_cap.  The last rule matters because
    the level-l term is scaled by (a_0...a_l)^(-1/2): a tiny a_l multiplies
    the quadrature error by a_l^(-1/2).
    """
    steps = []
    theta = -EIGHTH
    l = 0
    while True:
        if l > max_depth:
            raise DepthLimitError(f"cascade deeper than max_depth={max_depth}")
        if a == 0 or N <= stop_at or (a < tiny_a and N <= tiny_cap):
            return steps, RenormStep(l, a, b, N, Q(0), theta)
        Nn = int(math.floor(a * N))
        xi = a * N - Nn
        steps.append(RenormStep(l, a, b, N, xi, theta))
        if Nn == 0:
            return steps, None
        a1, b1 = _gauss_exact(a, b)
        theta = frac0(theta + (-1) ** l * (EIGHTH + b * b / (2 * a)))
        a, b, N = a1, b1, Nn
        l += 1


@dataclass
class RenormTrace:
    """The cascade for one evaluation.

    steps[l] carries (a_l, b_l, N_l, xi_l, theta_l).  terms[l] is the level-l
    contribution e(theta_l)/sqrt(a_0...a_l) * dF_l conjugated l times.  When
    the cascade was cut short (rational a, or a direct-sum cutoff) the
    remaining level is summed directly and stored in tail.
    """

    N: int
    params: Params
    steps: List[RenormStep]
    terms: List[complex] = field(default_factory=list)
    errors: List[float] = field(default_factory=list)
    tail: Optional[RenormStep] = None
    tail_value: complex = 0j
    L: int = 0      # L(N), whether or not the cascade was cut short

    @property
    def value(self) -> complex:
        return sum(self.terms, 0j) + self.tail_value

    @property
    def err_estimate(self) -> float:
        return float(sum(self.errors))


def _level_term(step: RenormStep, dF: SpecialValue, scale: float) -> Tuple[complex, float]:
    if step.l % 2:
        dF = dF.conj()
    dF = dF.rotated(step.theta).scaled(1.0 / scale)
    return dF.value, dF.err_estimate + dF.rounding


def build_trace(N: int, p: Params, cfg: PrecisionConfig = DEFAULT_CONFIG,
                direct_below: int = 0, tiny_a: float = 0.0) -> RenormTrace:
    """Run the cascade and evaluate every level.

    With the defaults this is the pure multi-level formula.  direct_below
    and tiny_a (see _cascade) let the last levels be summed directly, which
    is cheaper for tiny N_l and far more accurate when some a_l is tiny.
    """
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N}")
    a, b = p.exact
    steps, tail = _cascade(N, a, b, cfg.max_depth, direct_below, tiny_a)
    L = len(steps) - 1 if tail is None else depth(N, a)
    trace = RenormTrace(N, p, steps, tail=tail, L=L)
    # all F values of the trace in one batch
    vals = []
    if steps:
        args = [(st.xi - st.b, -st.b) for st in steps]
        vals = calF_many([x for pair in args for x in pair],
                         [st.a for st in steps for _ in (0, 1)], cfg)
    prod = Q(1)
    for i, st in enumerate(steps):
        prod *= st.a
        outer = -st.a * st.N * st.N / 2 + st.b * st.N
        dF = vals[2 * i].rotated(outer) - vals[2 * i + 1]
        t, e = _level_term(st, dF, math.sqrt(prod))
        trace.terms.append(t)
        trace.errors.append(e)
    if tail is not None:
        # S = sum_{j<l} T_j + e(theta_l + (-1)^l/8)/sqrt(a_0...a_{l-1}) conj^l S(N_l, a_l, b_l)
        s = direct_sum(tail.N, tail.a, tail.b, cfg)
        if tail.l % 2:
            s = s.conjugate()
        ph = tail.theta + (-1) ** tail.l * EIGHTH if tail.l else Q(0)
        trace.tail_value = unit_exp(ph) * s / math.sqrt(prod)
        trace.errors.append(1e-15 * math.sqrt(tail.N / prod))
    return trace


def recompose(trace: RenormTrace) -> complex:
    return trace.value


def renorm_sum(N: int, p: Params, cfg: PrecisionConfig = DEFAULT_CONFIG,
               direct_below: int = 32, tiny_a: float = 1e-6) -> complex:
    """S(N, a, b) through the cascade: O(log N) evaluations of F.

    Lengths at most direct_below, and levels with a_l < tiny_a, are summed
    directly (see build_trace).
    """
    if N == 0:
        return 0j
    return build_trace(N, p, cfg, direct_below, tiny_a).value


def depth(N: int, a) -> int:
    """L(N): the last level with N_l >= 1 (N_{L+1} = 0)."""
    if N < 1:
        raise DomainError("depth is defined for N >= 1")
    a = as_fraction(a)
    l = 0
    while True:
        Nn = int(math.floor(a * N))
        if Nn == 0:
            return l
        a = 1 / a - math.floor(1 / a)
        if a == 0:
            return l + 1
        N = Nn
        l += 1


def gauss_orbit(a, L: int) -> List[Q]:
    """a_0, ..., a_L exactly; shorter if some a_l = 0."""
    a = as_fraction(a)
    out = [a]
    for _ in range(L):
        if a == 0:
            break
        a = 1 / a - math.floor(1 / a)
        out.append(a)
    return out


def min_N_reaching(L: int, k: int, orbit: List[Q]) -> Optional[int]:
    """Smallest N with N_L(N) >= k, or None if some a_l (l < L) vanishes.

    N_{l+1} = [a_l N_l] is non-decreasing in N_l, so N_{l+1} >= m exactly when
    N_l >= ceil(m / a_l); propagating back from level L gives the answer.
    """
    m = k
    for l in range(L - 1, -1, -1):
        if orbit[l] == 0:
            return None
        m = int(math.ceil(m / orbit[l]))
    return m


def n_bounds(L: int, a) -> Tuple[int, Optional[int]]:
    """(N^-(L), N^+(L)): the first and last N with L(N) = L.

    N^+ is None when the cascade of a stops at level L (a_{L+1}... never
    reached), i.e. every N >= N^-(L) has depth L.
    """
    if L < 0:
        raise DomainError("L must be non-negative")
    if not (0 < a < 1):
        raise DomainError(f"a must lie in (0, 1), got {a}")
    orbit = gauss_orbit(a, L + 1)
    if len(orbit) <= L:
        raise DomainError(f"the expansion of a={a} terminates before level {L}")
    lo = min_N_reaching(L, 1, orbit)
    if lo is None:
        raise DomainError(f"no N reaches level {L} for a={a}")
    if len(orbit) <= L + 1 or orbit[L] == 0:
        return lo, None
    nxt = min_N_reaching(L + 1, 1, orbit)
    return lo, None if nxt is None else nxt - 1


@dataclass(frozen=True)
class XiValues:
    L: int
    a_L: Q
    points: List[Tuple[int, Q]]
    exhausted: bool      # True when 1/a_L exceeded the budget and the grid was thinned


def xi_values(L: int, a, budget: int = 4096) -> XiValues:
    """N realizing xi_L(N) = k a_L for k = 1, 2, ... with k a_L < 1.

    For each k the smallest N with N_L(N) >= k has N_L = k exactly, so
    xi_L(N) = a_L N_L = k a_L.  When there are more than budget values of k,
    an evenly spaced subset is returned and exhausted is set.
    """
    orbit = gauss_orbit(a, L)
    if len(orbit) <= L:
        raise DomainError(f"the expansion of a={a} terminates before level {L}")
    aL = orbit[L]
    K = int(math.ceil(1 / aL)) - 1 if aL > 0 else None
    exhausted = K is None or K > budget
    if K is None:
        ks = list(range(1, budget + 1))
    elif K > budget:
        ks = sorted(set(np.linspace(1, K, budget).round().astype(np.int64).tolist()))
    else:
        ks = list(range(1, K + 1))
    pts = []
    for k in ks:
        N = min_N_reaching(L, k, orbit)
        if N is None:
            break
        pts.append((N, k * aL))
    return XiValues(L, aL, pts, exhausted)
