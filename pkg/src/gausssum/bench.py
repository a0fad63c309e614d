"""Wall-clock comparison of direct summation and the cascade."""

from __future__ import annotations

import statistics
import time
from dataclasses import asdict, dataclass
from typing import List, Optional, Sequence

from .numeric import DEFAULT_CONFIG, Params, PrecisionConfig
from .renorm import naive_sum, renorm_sum

NAIVE_LIMIT = 10 ** 7


@dataclass
class BenchRecord:
    N: int
    method: str              # "naive" or "renorm"
    wall_ns: int             # median over reps
    value: complex
    residual: Optional[float] = None

    def as_dict(self) -> dict:
        d = asdict(self)
        d["value"] = [self.value.real, self.value.imag]
        return d


def _median_ns(fn, reps: int):
    times, val = [], None
    for _ in range(reps):
        t0 = time.perf_counter_ns()
        val = fn()
        times.append(time.perf_counter_ns() - t0)
    return int(statistics.median(times)), val


def bench(Ns: Sequence[int], p: Params, cfg: PrecisionConfig = DEFAULT_CONFIG, reps: int = 5,
          naive_limit: int = NAIVE_LIMIT, naive_reps: Optional[int] = None) -> List[BenchRecord]:
    """Median timings per N; naive runs only up to naive_limit."""
    out = []
    for N in Ns:
        # one warm-up call so import and allocation costs stay out of the median
        renorm_sum(N, p, cfg)
        t_r, v_r = _median_ns(lambda: renorm_sum(N, p, cfg), reps)
        rec_r = BenchRecord(N, "renorm", t_r, v_r)
        out.append(rec_r)
        if N <= naive_limit:
            t_n, v_n = _median_ns(lambda: naive_sum(N, p, cfg), naive_reps or reps)
            res = abs(v_n - v_r)
            rec_r.residual = res
            out.append(BenchRecord(N, "naive", t_n, v_n, res))
    return out
