"""Acceptance criteria 1-14, each printing one PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -s` to see the lines as they come;
they are also collected in the terminal summary.
"""

import math
import statistics
import time

import numpy as np
import pytest
from scipy import stats

from conftest import record
from oracles import exact_naive, n_bounds_bisect
from gausssum.asymptotics import M_of_L, constructed_params
from gausssum.bench import bench
from gausssum.curlicue import curlicue_path, spiral_distance
from gausssum.dynamics import (PiecewiseDensity, birkhoff_A, counting_norms, iterate_AB,
                               iterate_family, pf_apply_family, pf_apply_grid, sample_m)
from gausssum.dynamics.counting import (A_CONSTANT, A_quadrature, orbit_products, phi_power,
                                        sample_m_exact)
from gausssum.dynamics.densities import gauss
from gausssum.dynamics.tilde import (ba_orbit, coding_agreement, nu_cdf, p1_on_X, sample_nu,
                                     tilde_invariance_check, tilde_map, correlation_decay)
from gausssum.numeric import Params, PrecisionConfig, Q, unit_exp
from gausssum.renorm import gauss_orbit, n_bounds, naive_sum, renorm_once, renorm_sum
from gausssum.special import asymptotic_calF, c_of_a, calF_many

SEED = 20240601


def _rng(k):
    return np.random.default_rng([SEED, k])


def _float_params(rng, n):
    a, b = sample_m(rng, n)
    return [Params(float(x), float(y)) for x, y in zip(a, b)]


# 1 -----------------------------------------------------------------------------

def test_c01_one_step_exactness():
    t0 = time.perf_counter()
    rng = _rng(1)
    cfg = PrecisionConfig(quad_tolerance=1e-10)
    worst, worst_ratio = 0.0, 0.0
    for p in _float_params(rng, 1000):
        N = int(rng.integers(1, 10 ** 4 + 1))
        r = abs(renorm_once(N, p, cfg) - naive_sum(N, p, cfg))
        worst = max(worst, r)
        worst_ratio = max(worst_ratio, r / (4 * abs(c_of_a(p.a)) * 1e-10))
    dt = time.perf_counter() - t0
    ok = worst_ratio <= 1 and dt <= 120
    record(1, "one-step exactness", ok,
           f"max residual {worst:.2e}, max residual/(4|c(a)|1e-10) = {worst_ratio:.3f}", dt)
    assert ok


# 2 -----------------------------------------------------------------------------

def test_c02_multi_step_exactness():
    t0 = time.perf_counter()
    rng = _rng(2)
    worst, worst_abs = 0.0, 0.0
    for p in _float_params(rng, 200):
        N = int(rng.integers(1, 10 ** 5 + 1))
        r = abs(renorm_sum(N, p) - exact_naive(N, p.a, p.b))
        worst_abs = max(worst_abs, r)
        worst = max(worst, r / (1e-6 * math.sqrt(N)))
    dt = time.perf_counter() - t0
    ok = worst <= 1 and dt <= 300
    record(2, "multi-step exactness", ok,
           f"max residual {worst_abs:.2e}, max residual/(1e-6 sqrt N) = {worst:.2e}", dt)
    assert ok


# 3 -----------------------------------------------------------------------------

def test_c03_functional_equations():
    t0 = time.perf_counter()
    xis = [Q(k, 20) for k in range(-40, 41)]
    as_ = [Q(k, 20) for k in range(1, 20)]
    pairs = [(x, a) for a in as_ for x in xis]
    # every value needed, in one batch
    need = set()
    for x, a in pairs:
        need.update({(x, a), (x - 1, a), (-x, a), (1 - x, a), (x + a, a)})
    need = sorted(need)
    vals = dict(zip(need, calF_many([x for x, _ in need], [a for _, a in need])))

    def G(x, a):
        return vals[(x, a)].rotated(-x * x / (2 * a)).scaled(c_of_a(a))

    def budget(*vs):
        return 4 * sum(v.err_estimate + v.rounding for v in vs)

    worst = {"F-shift": 0.0, "G-shift": 0.0, "reflection": 0.0, "reflection-1": 0.0}
    for x, a in pairs:
        F, Fm, Fn, F1 = vals[(x, a)], vals[(x - 1, a)], vals[(-x, a)], vals[(1 - x, a)]
        inv_c = 1 / c_of_a(a)
        res = abs(F.value - Fm.value - unit_exp(x * x / (2 * a)))
        worst["F-shift"] = max(worst["F-shift"], res / budget(F, Fm))
        Ga, G0 = G(x + a, a), G(x, a)
        res = abs(Ga.value - G0.value - unit_exp(-x * x / (2 * a)))
        worst["G-shift"] = max(worst["G-shift"], res / budget(Ga, G0))
        res = abs(Fn.value + F.value - unit_exp(x * x / (2 * a)) + inv_c)
        worst["reflection"] = max(worst["reflection"], res / budget(F, Fn))
        res = abs(F.value + F1.value - unit_exp(x * x / (2 * a))
                  - unit_exp((1 - x) ** 2 / (2 * a)) + inv_c)
        worst["reflection-1"] = max(worst["reflection-1"], res / budget(F, F1))
    dt = time.perf_counter() - t0
    ok = all(v <= 1 for v in worst.values())
    detail = ", ".join(f"{k} {v:.3f}" for k, v in worst.items())
    record(3, "functional equations", ok,
           f"{len(pairs)} grid points, max residual/(4 err_estimate): {detail}", dt)
    assert ok


# 4 -----------------------------------------------------------------------------

def test_c04_fresnel_asymptotics():
    t0 = time.perf_counter()
    xis = [Q(k, 400) for k in range(-200, 201)]
    sups = {}
    for e in (1, 2, 3, 4):
        a = Q(1, 10 ** e)
        vals = calF_many(xis, [a] * len(xis))
        sups[e] = max(abs(v.value - asymptotic_calF(x, a)) for v, x in zip(vals, xis)) / math.sqrt(a)
    ratio = max(sups.values()) / min(sups.values())
    dt = time.perf_counter() - t0
    ok = ratio < 2
    detail = ", ".join(f"a=1e-{e}: {v:.4f}" for e, v in sups.items())
    record(4, "Fresnel asymptotics", ok, f"sup|F - asym|/sqrt(a): {detail}; spread {ratio:.3f}", dt)
    assert ok


# 5 -----------------------------------------------------------------------------

def test_c05_invariant_family():
    t0 = time.perf_counter()
    rng = _rng(5)
    g = -0.5 + (np.arange(1001) + 0.5) / 1001
    worst = 0.0
    a_s, _ = sample_m(rng, 1000)
    for a in a_s:
        a = float(a)
        if gauss(a) == 0:
            continue
        B = rng.uniform(0, 1 / (1 - a))
        d = PiecewiseDensity(a, (1 - (1 - a) * B) / a, B)
        img = pf_apply_family(d)
        # off breakpoints: the image jumps at +-a1/2; b1 in {0, +-1/2} pulls back onto +-a/2
        off = (np.abs(np.abs(g) - img.a / 2) > 1e-9) & (np.abs(g) > 1e-9) & \
            (np.abs(np.abs(g) - 0.5) > 1e-9)
        worst = max(worst, float(np.max(np.abs(pf_apply_grid(d, a, g[off]) - img(g[off])))))
    drift, plain = 0.0, 0.0
    for a in a_s[:10]:
        d = PiecewiseDensity(float(a), 1.0, 1.0)
        drift = max(drift, max(abs(s.mass - 1) for s in iterate_family(d, 10 ** 4)))
        for _ in range(10 ** 4):
            d = pf_apply_family(d)
            plain = max(plain, abs(d.mass - 1))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-10 and drift <= 1e-14
    record(5, "invariant family", ok,
           f"family vs grid max {worst:.2e} over 1000 (a,A,B); mass drift {drift:.2e} "
           f"over 10 x 1e4 steps (double-double state; {plain:.1e} with double state)", dt)
    assert ok


# 6 -----------------------------------------------------------------------------

def test_c06_AB_algebra():
    t0 = time.perf_counter()
    rng = _rng(6)
    worst, bmin, bmax = 0.0, 1.0, 0.0
    for _ in range(1000):
        a = sample_m_exact(rng, 512)
        seq = [float(x) for x in gauss_orbit(a, 40)]
        r = iterate_AB(seq, B0=1.0)
        worst = max(worst, float(np.max(np.abs(r["B_rec"] - r["B_closed"]))),
                    float(np.max(np.abs(r["A_rec"] - r["A_closed"]))))
        bmin = min(bmin, float(r["B_rec"][1:].min()))
        bmax = max(bmax, float(r["B_rec"][1:].max()))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-12 and bmin > 0.5 and bmax < 1
    record(6, "A_l/B_l algebra", ok,
           f"closed vs recursion {worst:.2e}; B_l (l>=1) in [{bmin:.6f}, {bmax:.6f}]", dt)
    assert ok


# 7 -----------------------------------------------------------------------------

def test_c07_continued_fraction_invariants():
    t0 = time.perf_counter()
    rng = _rng(7)
    prod_max = orbit_products(1000, 100, rng)
    bracket_ok, chain_ok, oracle_ok = True, True, True
    worst_hi = 0.0
    for i in range(1000):
        a = sample_m_exact(rng, 2048)
        orbit = gauss_orbit(a, 21)
        prod = Q(1)
        prev_hi = None
        for L in range(0, 21):
            lo, hi = n_bounds(L, a)
            if L >= 1:
                prod *= orbit[L - 1]
                bracket_ok &= 1 / prod < lo < (1 + 4 * orbit[L - 1]) / prod
                worst_hi = max(worst_hi, float(lo * prod - 1) / float(orbit[L - 1]))
                chain_ok &= prev_hi == lo - 1
            prev_hi = hi
        if i < 30:
            for L in range(1, 8):
                oracle_ok &= n_bounds(L, a) == n_bounds_bisect(L, a)
    dt = time.perf_counter() - t0
    ok = prod_max < 0.5 and bracket_ok and chain_ok and oracle_ok
    record(7, "continued-fraction invariants", ok,
           f"max a_l a_(l+1) = {prod_max:.6f} over 1e5 steps; bracket {bracket_ok} "
           f"(max (a..N^- - 1)/a_(L-1) = {worst_hi:.3f} < 4); N^+(L-1) = N^-(L) - 1 {chain_ok}; "
           f"bisection oracle {oracle_ok}", dt)
    assert ok


# 8 -----------------------------------------------------------------------------

def test_c08_birkhoff_constant():
    t0 = time.perf_counter()
    quad = A_quadrature()
    res = birkhoff_A(1000, 200, _rng(8))
    dt = time.perf_counter() - t0
    ok = abs(quad - math.pi ** 2 / (12 * math.log(2))) <= 1e-5 and \
        abs(res.log_nminus - A_CONSTANT) <= 0.02
    record(8, "Birkhoff constant", ok,
           f"quadrature {quad:.8f} vs {A_CONSTANT:.8f}; MC ln N^-(200)/200 = "
           f"{res.log_nminus:.4f} +- {res.log_nminus_ci:.4f}; Birkhoff mean "
           f"{res.birkhoff:.4f} +- {res.birkhoff_ci:.4f}", dt)
    assert ok


# 9 -----------------------------------------------------------------------------

@pytest.mark.slow
def test_c09_counting_norms():
    t0 = time.perf_counter()
    phis = {"(l+2)^(-1/6)": phi_power(1 / 6), "(l+2)^(-1/4)": phi_power(1 / 4)}
    res = counting_norms(10 ** 4, phis, 10 ** 5, _rng(9), checkpoints=[10 ** 3, 10 ** 4])
    s6 = res["(l+2)^(-1/6)"][1]
    rel = (s6.norm1 - s6.predicted_norm1) / s6.predicted_norm1
    lo4, hi4 = res["(l+2)^(-1/4)"]
    diff = hi4.norm1 - lo4.norm1
    mc = math.hypot(lo4.norm1_ci, hi4.norm1_ci)
    parts = {"norm1 within 10%": abs(rel) <= 0.10,
             "(norm2/norm1)^2 within 0.1 of 1": abs(s6.ratio_sq - 1) <= 0.1,
             "plateau": diff <= mc}
    dt = time.perf_counter() - t0
    ok = all(parts.values()) and dt <= 600
    record(9, "counting norms", ok,
           f"phi^-1/6: norm1 {s6.norm1:.3f} +- {s6.norm1_ci:.3f} vs predicted "
           f"{s6.predicted_norm1:.3f} ({100 * rel:+.1f}%), ratio^2 {s6.ratio_sq:.4f}; "
           f"phi^-1/4: norm1 {lo4.norm1:.4f} (L=1e3) -> {hi4.norm1:.4f} (L=1e4), "
           f"increase {diff:.4f} vs MC error {mc:.4f}; "
           + ", ".join(f"{k}: {'ok' if v else 'FAIL'}" for k, v in parts.items()), dt)
    assert ok


# 10 ----------------------------------------------------------------------------

def test_c10_growth_estimates():
    t0 = time.perf_counter()
    rng = _rng(10)
    prods = []
    for _ in range(1000):
        a = sample_m_exact(rng, 256)
        b = Q(int(rng.integers(-2 ** 30 + 1, 2 ** 30 + 1)), 2 ** 31)
        L = int(rng.integers(1, 13))
        g = M_of_L(L, Params(a, b), scan_budget=1 << 14)
        prods.append(g.M * g.key)
    # key <= 0.1 needs a_L <= 1e-4 and |b_L| <= 1e-2 at once, which draws from m
    # almost never produce, so that sub-sample is built with prescribed (a_L, b_L)
    small = []
    for _ in range(200):
        pre = [int(k) for k in rng.integers(1, 6, size=int(rng.integers(1, 5)))]
        aL = Q(1, int(rng.integers(10 ** 5, 5 * 10 ** 5)))
        bL = Q(int(rng.integers(-1500, 1501)), 10 ** 6)
        g = M_of_L(len(pre), constructed_params(pre, aL, bL, rng), scan_budget=1 << 14)
        assert g.key <= 0.1
        small.append(g.M * g.key)
    sup_h, sup_f = max(prods[:500]), max(prods)
    min_h, min_f = min(small[:100]), min(small)
    dt = time.perf_counter() - t0
    ok = math.isfinite(sup_f) and sup_f / sup_h - 1 < 0.2 and min_f > 0 and \
        min_h / min_f - 1 < 0.2
    record(10, "growth estimates", ok,
           f"sup M*key {sup_h:.3f} (500) -> {sup_f:.3f} (1000); key<=0.1 floor "
           f"{min_h:.3f} (100) -> {min_f:.3f} (200)", dt)
    assert ok


# 11 ----------------------------------------------------------------------------

def test_c11_ba_orbits():
    t0 = time.perf_counter()
    rng = _rng(11)
    n_ok, total, gap, j0max = 0, 0, 0.0, 0
    fails = []
    for _ in range(1000):
        a = sample_m_exact(rng, 1024)
        orbit = gauss_orbit(a, 101)
        for _ in range(10):
            while True:
                m, n = (int(v) for v in rng.integers(-10 ** 6, 10 ** 6 + 1, size=2))
                if m % 2 == 0 or n % 2 == 0:
                    break
            o = ba_orbit(a, m, n, jmax=100, orbit=list(orbit))
            total += 1
            settled_float = o.j0 is not None and all(
                min(abs(bf - float(t)) for t in (0, 0.5, -float(orbit[j]) / 2)) <= 1e-9
                for j, bf in enumerate(o.b_float) if j > o.j0)
            if o.settled and o.table_ok and settled_float:
                n_ok += 1
                j0max = max(j0max, o.j0)
            elif len(fails) < 3:
                fails.append((m, n, o.reason))
            gap = max(gap, float(o.max_float_gap))
    dt = time.perf_counter() - t0
    ok = n_ok == total
    record(11, "B_a orbits", ok,
           f"{n_ok}/{total} orbits settle with table transitions; max j0 {j0max}; "
           f"max float gap {gap:.1e}" + (f"; failures {fails}" if fails else ""), dt)
    assert ok


# 12 ----------------------------------------------------------------------------

def test_c12_tilde_system():
    t0 = time.perf_counter()
    rng = _rng(12)
    rep = tilde_invariance_check(10 ** 6, rng, grid_points=300, lags=20,
                                 corr_samples=10 ** 6)
    bad = 0
    for _ in range(1000):
        if coding_agreement(sample_m_exact(rng, 1024), 100) is not None:
            bad += 1
    dt = time.perf_counter() - t0
    ok = rep.ks <= 0.01 and rep.p1_max_dev <= 1e-8 and bad == 0
    rate = "n/a" if rep.decay_rate is None else f"{rep.decay_rate:.2f}"
    record(12, "T system", ok,
           f"KS {rep.ks:.2e} at 1e6; max |P1_X - 1| {rep.p1_max_dev:.1e} on "
           f"{rep.grid_points} points; coding disagreements {bad}/1000; correlation at "
           f"lag 1..3 {', '.join(f'{c:.3f}' for c in rep.correlation[:3])}, decay rate {rate}", dt)
    assert ok


# 13 ----------------------------------------------------------------------------

def _median_time(fn, reps):
    ts = []
    for _ in range(reps):
        t = time.perf_counter()
        fn()
        ts.append(time.perf_counter() - t)
    return statistics.median(ts)


@pytest.mark.slow
def test_c13_performance():
    t0 = time.perf_counter()
    rng = _rng(13)
    # the level count at 1e8 varies with (a, b), so the ratio is taken over a fixed sample
    ps = _float_params(rng, 20)
    t4 = t8 = 0.0
    for p in ps:
        renorm_sum(10 ** 4, p)
        t4 += _median_time(lambda: renorm_sum(10 ** 4, p), 5)
        t8 += _median_time(lambda: renorm_sum(10 ** 8, p), 5)
    recs = bench([10 ** 7], Params(0.3183098861837907, 0.1), reps=3, naive_reps=1)
    tr = next(r for r in recs if r.method == "renorm")
    tn = next(r for r in recs if r.method == "naive")
    speed = tn.wall_ns / tr.wall_ns
    dt = time.perf_counter() - t0
    ok = t8 / t4 <= 3 and speed >= 100
    record(13, "performance", ok,
           f"sum over 20 draws: t(1e8)/t(1e4) = {t8:.3f}s/{t4:.3f}s = {t8 / t4:.2f}; "
           f"speedup vs naive at 1e7 {speed:.0f}x (residual {tr.residual:.1e})", dt)
    assert ok


# 14 ----------------------------------------------------------------------------

def test_c14_curlicue():
    t0 = time.perf_counter()
    rng = _rng(14)
    p = _float_params(rng, 1)[0]
    path = curlicue_path(10 ** 5, p)
    inc = float(np.max(np.abs(np.abs(np.diff(path.points)) - 1)))
    p3 = constructed_params([2, 1, 3], Q(1, 1000), Q(1, 7))
    f1 = spiral_distance(p3, 3, refine=1)
    f4 = spiral_distance(p3, 3, refine=4)
    p4 = constructed_params([2, 1, 3], Q(1, 10000), Q(1, 7))
    g1 = spiral_distance(p4, 3, refine=1)
    stable = abs(f4.C - f1.C) <= 0.1 * f1.C
    scaling = max(f1.C, g1.C) / min(f1.C, g1.C) < 2
    dt = time.perf_counter() - t0
    ok = inc <= 1e-10 and stable and scaling
    record(14, "curlicue export", ok,
           f"max ||dS| - 1| {inc:.1e} on N=1e5; Hausdorff/sqrt(a_L): C = {f1.C:.3f} "
           f"(a_L=1e-3), {f4.C:.3f} (4x refined), {g1.C:.3f} (a_L=1e-4)", dt)
    assert ok
