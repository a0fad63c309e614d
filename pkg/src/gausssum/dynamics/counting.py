"""Monte Carlo over the measure m(D) = (1/ln 2) int_D da db / (1 + a) on
(0,1) x (-1/2,1/2]: the counting function of small (a_l, b_l) and the
Birkhoff average of ln(1/a_l).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
from scipy import integrate

from ..errors import DomainError
from ..numeric import Q
from ..renorm import n_bounds

LN2 = math.log(2.0)
A_CONSTANT = math.pi ** 2 / (12 * LN2)


def sample_m(rng: np.random.Generator, size: int):
    """(a, b) ~ m: a = 2^u - 1 (CDF log2(1+a)), b uniform on (-1/2, 1/2]."""
    a = np.exp2(rng.random(size)) - 1.0
    b = 0.5 - rng.random(size)
    # u = 0 gives a = 0, which is outside the base
    bad = a <= 0
    while np.any(bad):
        a[bad] = np.exp2(rng.random(int(bad.sum()))) - 1.0
        bad = a <= 0
    return a, b


def sample_m_exact(rng: np.random.Generator, bits: int = 2048) -> Q:
    """An exact rational a ~ m with `bits` binary digits.

    The top 53 bits come from the inverse CDF; the rest are uniform, which
    changes the law by less than one part in 2^50.  Long expansions are
    needed because a 53-bit rational terminates after ~25 Gauss steps.
    """
    a, _ = sample_m(rng, 1)
    top = int(a[0] * 2 ** 53)
    low = int.from_bytes(rng.bytes((bits - 53 + 7) // 8), "little") % (1 << (bits - 53))
    num = (top << (bits - 53)) + low
    return Q(max(num, 1), 1 << bits)


def fibre_step(a: np.ndarray, b: np.ndarray):
    """One step of (a, b) -> ({1/a}, {-b/a + [1/a]/2}_0), vectorised."""
    inv = 1.0 / a
    k = np.floor(inv)
    a1 = inv - k
    y = -b * inv + 0.5 * k
    b1 = y - np.ceil(y - 0.5)
    return a1, b1


def phi_power(s: float) -> Callable[[np.ndarray], np.ndarray]:
    """phi(l) = (l + 2)^(-s)."""
    return lambda l: (np.asarray(l, dtype=float) + 2.0) ** (-s)


def parse_phi(spec: str):
    """'pow:1/6' or 'pow:0.25' -> (callable, description)."""
    kind, _, arg = spec.partition(":")
    if kind != "pow" or not arg:
        raise DomainError(f"unknown phi spec {spec!r}; expected pow:<s>")
    if "/" in arg:
        n, d = arg.split("/")
        s = float(n) / float(d)
    else:
        s = float(arg)
    if s <= 0:
        raise DomainError("phi exponent must be positive")
    return phi_power(s), f"(l+2)^(-{arg})"


@dataclass
class CountingStats:
    L: int
    phi: str
    norm1: float
    norm1_ci: float        # half-width of the 95% interval
    norm2: float
    norm2_ci: float
    samples: int
    predicted_norm1: float  # (2/ln 2) sum_{l<=L} phi^6(l)
    ratio_sq: float = field(init=False)

    def __post_init__(self):
        self.ratio_sq = (self.norm2 / self.norm1) ** 2 if self.norm1 > 0 else float("nan")


def _stats(counts: np.ndarray):
    n = len(counts)
    c = counts.astype(float)
    m1 = c.mean()
    m2 = (c * c).mean()
    s1 = c.std(ddof=1) / math.sqrt(n)
    norm2 = math.sqrt(m2)
    # delta method for sqrt(E N^2)
    s2 = (c * c).std(ddof=1) / math.sqrt(n) / (2 * norm2) if norm2 > 0 else 0.0
    return m1, 1.96 * s1, norm2, 1.96 * s2


def counting_norms(L: int, phis: Dict[str, Callable], samples: int, rng: np.random.Generator,
                   checkpoints: Optional[Sequence[int]] = None, chunk: int = 1 << 16
                   ) -> Dict[str, List[CountingStats]]:
    """Norms of N(L, a, b) = sum_{l<=L} chi(a_l^(1/4) <= phi(l)) chi(|b_l|^(1/2) <= phi(l)).

    Several thresholds share the same orbits.  Returns, for each phi, one
    CountingStats per checkpoint (default: just L).
    """
    if L < 0 or samples < 2:
        raise DomainError("need L >= 0 and at least 2 samples")
    cps = sorted(set(checkpoints or [L]))
    if cps[-1] > L or cps[0] < 0:
        raise DomainError("checkpoints must lie in [0, L]")
    ls = np.arange(L + 1)
    thr = {name: np.asarray(f(ls), dtype=float) for name, f in phis.items()}
    for name, t in thr.items():
        # phi <= 1/2 is only needed asymptotically; early l may exceed it
        if np.any(np.diff(t) > 0) or np.any(t <= 0):
            raise DomainError(f"phi {name} must be positive and non-increasing")
    a4 = {name: t ** 4 for name, t in thr.items()}
    b2 = {name: t ** 2 for name, t in thr.items()}
    counts = {name: np.zeros((len(cps), samples), dtype=np.int64) for name in phis}
    for lo in range(0, samples, chunk):
        hi = min(samples, lo + chunk)
        a, b = sample_m(rng, hi - lo)
        run = {name: np.zeros(hi - lo, dtype=np.int64) for name in phis}
        ci = 0
        for l in range(L + 1):
            ab = np.abs(b)
            for name in phis:
                run[name] += (a <= a4[name][l]) & (ab <= b2[name][l])
            if l == cps[ci]:
                for name in phis:
                    counts[name][ci, lo:hi] = run[name]
                ci += 1
                if ci == len(cps):
                    break
            a, b = fibre_step(a, b)
            # floating orbits can land on a = 0 or underflow; restart those from m
            bad = ~(a > 1e-300)
            if np.any(bad):
                a[bad], _ = sample_m(rng, int(bad.sum()))
    out = {}
    for name, f in phis.items():
        rows = []
        for ci, Lc in enumerate(cps):
            m1, c1, m2, c2 = _stats(counts[name][ci])
            pred = 2 / LN2 * float(np.sum(thr[name][: Lc + 1] ** 6))
            rows.append(CountingStats(Lc, name, m1, c1, m2, c2, samples, pred))
        out[name] = rows
    return out


# ---------------------------------------------------------------------------
# the constant A

def A_quadrature() -> float:
    """(1/ln 2) int_0^1 ln(1/a) da / (1 + a), equal to pi^2/(12 ln 2)."""
    val, _ = integrate.quad(lambda a: -math.log(a) / (1 + a), 0, 1, epsabs=1e-14, epsrel=1e-14)
    return val / LN2


@dataclass
class BirkhoffResult:
    L: int
    samples: int
    birkhoff: float          # mean of (1/L) sum_{l<L} ln(1/a_l)
    birkhoff_ci: float
    log_nminus: float        # mean of ln N^-(L) / L
    log_nminus_ci: float
    A: float = A_CONSTANT


def _log_int(n: int) -> float:
    k = max(n.bit_length() - 60, 0)
    return math.log(n >> k) + k * LN2


def birkhoff_A(samples: int, L: int, rng: np.random.Generator, bits: int = 2048) -> BirkhoffResult:
    """Monte Carlo estimates of A from exact orbits of a ~ m."""
    if L < 1:
        raise DomainError("L must be >= 1")
    # each level consumes about 2 A / ln 2 < 3.5 bits
    bits = max(bits, int(8 * L) + 64)
    avg, lnm = np.empty(samples), np.empty(samples)
    for i in range(samples):
        a = sample_m_exact(rng, bits)
        p, q = int(a.numerator), int(a.denominator)
        total = 0.0
        for _ in range(L):
            total += _log_int(q) - _log_int(p)
            p, q = q % p, p
        avg[i] = total / L
        lo, _ = n_bounds(L, a)
        lnm[i] = _log_int(lo) / L
    ci = lambda x: 1.96 * x.std(ddof=1) / math.sqrt(len(x)) if len(x) > 1 else float("nan")
    return BirkhoffResult(L, samples, float(avg.mean()), ci(avg), float(lnm.mean()), ci(lnm))


def orbit_products(samples: int, steps: int, rng: np.random.Generator) -> float:
    """max of a_{l+1} a_l over float orbits (should stay below 1/2)."""
    a, b = sample_m(rng, samples)
    worst = 0.0
    for _ in range(steps):
        a1, b = fibre_step(a, b)
        worst = max(worst, float(np.max(a * a1)))
        a = a1
        bad = ~(a > 1e-300)
        if np.any(bad):
            a[bad], _ = sample_m(rng, int(bad.sum()))
    return worst
