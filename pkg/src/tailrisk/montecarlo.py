"""Monte Carlo oracle for the risk measures of S_n = X_1 + ... + X_n.

Sampling is split into fixed-size chunks.  Chunk ``i`` draws from its own
Philox stream keyed by ``(seed, i)`` and chunks are reduced in index order,
so every estimate is a pure function of (model, samples, seed) whatever the
number of worker threads.

Large runs keep only a tail buffer: rows whose sum exceeds a cut-off ``L``
chosen from a pilot (the first rows of the same stream), plus per-batch counts
and sums.  Every threshold used later must lie above ``L``, which is checked.
Order statistics, expectiles and conditional means computed from the buffer
are then exactly those of the full sample.

Standard errors are batch means over 32 equal consecutive batches.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DomainError, InsufficientExceedancesError
from .sarmanov import SarmanovModel

__all__ = [
    "MCEstimate",
    "Simulation",
    "simulate",
    "estimate_var",
    "estimate_expectile",
    "estimate_conditional",
    "estimate_diversification",
    "chunk_rng",
    "default_workers",
    "CHUNK_SIZE",
    "BATCHES",
]

CHUNK_SIZE = 2**16
BATCHES = 32
IN_MEMORY_ROWS = 2**22
MIN_EXCEEDANCES = 500
CONDITIONAL = ("CTE", "MES", "SES", "CE", "ICE", "SICE")


@dataclass(frozen=True)
class MCEstimate:
    value: float
    stderr: float
    samples: int
    seed: int
    exceedances: int = 0

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "stderr": self.stderr,
            "samples": self.samples,
            "seed": self.seed,
            "exceedances": self.exceedances,
        }


def default_workers() -> int:
    """Worker count from ``TAILRISK_WORKERS`` (default 1)."""
    raw = os.environ.get("TAILRISK_WORKERS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise DomainError(f"TAILRISK_WORKERS must be an integer, got {raw!r}") from None


def chunk_rng(seed: int, index: int) -> np.random.Generator:
    """Counter-based stream for chunk ``index`` of run ``seed``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))


# -- expectile root ------------------------------------------------------------


def _expectile_sorted(desc, total_count, total_mean, p):
    """Root of h(t) = (2p-1) E(s-t)_+ - (1-p)(t - mean) from the top of a sample.

    ``desc`` holds the largest values of a sample of size ``total_count`` in
    decreasing order.  h is piecewise linear with kinks at the data, so the
    root is located on the right piece and solved exactly.  Returns None when
    the root lies below the smallest value in ``desc`` and ``desc`` is only a
    part of the sample.
    """
    m = desc.shape[0]
    c = 2 * p - 1
    cs = np.concatenate(([0.0], np.cumsum(desc)))
    k = np.arange(m)
    # h at t = desc[k], where exactly k values are strictly above
    h = c * (cs[:m] - k * desc) / total_count - (1 - p) * (desc - total_mean)
    hit = np.flatnonzero(h >= 0)
    if hit.size == 0:
        if m < total_count:
            return None
        kk = m
    else:
        kk = int(hit[0])
    if kk == 0:
        return float(desc[0])
    theta = (c * cs[kk] / total_count + (1 - p) * total_mean) / (c * kk / total_count + (1 - p))
    return float(theta)


def estimate_expectile(data, p: float) -> float:
    """Sample expectile: the root of p E(s-t)_+ = (1-p) E(t-s)_+."""
    if not 0 < p < 1:
        raise DomainError("p must lie in (0, 1)")
    data = np.asarray(data, dtype=float).ravel()
    if data.size == 0:
        raise DomainError("empty sample")
    desc = np.sort(data)[::-1]
    return _expectile_sorted(desc, data.size, float(np.mean(data)), p)


def expectile_residual(data, theta, p):
    """h(theta) for a sample; zero at the expectile."""
    data = np.asarray(data, dtype=float)
    return (2 * p - 1) * np.mean(np.maximum(data - theta, 0.0)) - (1 - p) * (theta - np.mean(data))


# -- tail buffer ---------------------------------------------------------------


class _Subset:
    """Tail view of the rows belonging to a set of batches."""

    def __init__(self, sim: "Simulation", batches):
        mask = np.isin(sim._tail_batch, batches)
        s = sim._tail_x[mask].sum(axis=1)
        order = np.argsort(-s, kind="stable")
        self.s = s[order]
        self.x = sim._tail_x[mask][order]
        self.count = int(sim._batch_count[batches].sum())
        self.total = float(sim._batch_sum[batches].sum())
        mmask = np.isin(sim._marg_batch, batches)
        self.xm = np.sort(sim._marg_vals[mmask])[::-1]
        self.n = sim.model.n
        self.cut = sim._cut_s
        self.cut_m = sim._cut_x

    @property
    def mean_s(self):
        return self.total / self.count

    @property
    def mean_x(self):
        return self.total / (self.count * self.n)

    @cached_property
    def cs(self):
        return np.concatenate(([0.0], np.cumsum(self.s)))

    def order_stat(self, desc, total, p, cut):
        """Order statistic ceil(p N) (ascending) from the top of the sample."""
        r = total - math.ceil(p * total) + 1
        if r > desc.shape[0]:
            raise RuntimeError(f"tail buffer too shallow for p={p} (cut-off {cut})")
        return float(desc[r - 1])

    def var_s(self, p):
        return self.order_stat(self.s, self.count, p, self.cut)

    def var_x(self, p):
        return self.order_stat(self.xm, self.count * self.n, p, self.cut_m)

    def expectile_s(self, p):
        theta = _expectile_sorted(self.s, self.count, self.mean_s, p)
        if theta is None or theta < self.cut:
            raise RuntimeError(f"tail buffer too shallow for expectile at p={p}")
        return theta

    def expectile_x(self, p):
        theta = _expectile_sorted(self.xm, self.count * self.n, self.mean_x, p)
        if theta is None or theta < self.cut_m:
            raise RuntimeError(f"tail buffer too shallow for marginal expectile at p={p}")
        return theta

    def exceed(self, threshold):
        """Number of sums strictly above ``threshold``."""
        return int(np.searchsorted(-self.s, -threshold, side="left"))

    def cond_mean_x_above(self, threshold):
        k = int(np.searchsorted(-self.xm, -threshold, side="left"))
        if k == 0:
            raise InsufficientExceedancesError("no marginal exceedances")
        return float(np.mean(self.xm[:k]))


class Simulation:
    """One Monte Carlo run; query it for any measure at levels >= ``p_min``.

    Parameters
    ----------
    model : SarmanovModel
    samples : int
        Number of draws of the vector (X_1, ..., X_n).
    seed : int
        Master seed; chunk streams are keyed by (seed, chunk index).
    p_min : float
        Smallest level that will be queried; sets the tail buffer depth.
    workers : int, optional
        Threads used to generate chunks (default from ``TAILRISK_WORKERS``).
    split_sample : bool
        Estimate thresholds on even batches and conditional means on odd
        batches, removing the same-sample bias of conditional estimators.
    """

    def __init__(self, model: SarmanovModel, samples: int, seed: int, *, p_min: float = 0.9,
                 workers: int | None = None, split_sample: bool = False, chunk_size: int = CHUNK_SIZE,
                 batches: int = BATCHES):
        if samples < 10**4:
            raise DomainError("samples must be at least 10^4")
        if not 0 < p_min < 1:
            raise DomainError("p_min must lie in (0, 1)")
        model.require_admissible()
        self.model = model
        self.samples = int(samples)
        self.seed = int(seed)
        self.p_min = float(p_min)
        self.workers = default_workers() if workers is None else max(1, int(workers))
        self.split_sample = bool(split_sample)
        self.chunk_size = int(chunk_size)
        self.batches = int(batches)
        self.proposals = 0
        self.produced = 0
        self._run()

    # -- generation ----------------------------------------------------------
    def _chunks(self):
        """Yield chunk draws in index order, generated by a thread pool."""
        model, seed, size = self.model, self.seed, self.chunk_size

        def job(i):
            return model.draw(chunk_rng(seed, i), size)

        window = 4 * self.workers
        index = 0
        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            while True:
                for rows in pool.map(job, range(index, index + window)):
                    yield rows
                index += window

    def _pilot_cuts(self, rows):
        """Conservative cut-offs for the sum and the pooled marginal."""
        s = rows.sum(axis=1)
        x = rows.ravel()
        cuts = []
        for vals in (s, x):
            q = np.quantile(vals, self.p_min)
            e = estimate_expectile(vals, self.p_min)
            tau = float(np.mean(vals > min(q, e)))
            cuts.append(float(np.quantile(vals, max(0.0, 1.0 - 2.0 * tau - 1e-3))))
        return cuts

    def _run(self):
        n, N, B = self.model.n, self.samples, self.batches
        batch_count = np.zeros(B, dtype=np.int64)
        batch_sum = np.zeros(B)
        tail_x, tail_b, marg_v, marg_b = [], [], [], []
        self._cut_s = self._cut_x = -math.inf
        pending = []
        have = 0
        stream = self._chunks()
        stored = 0
        streaming = N > IN_MEMORY_ROWS
        if streaming:
            while stored < IN_MEMORY_ROWS:
                rows = next(stream)
                pending.append(rows)
                stored += rows.shape[0]
            self._cut_s, self._cut_x = self._pilot_cuts(np.concatenate(pending))

        produced = 0

        def consume(rows):
            nonlocal have, produced
            produced += rows.shape[0]
            rows = rows[: N - have]
            k = rows.shape[0]
            if k == 0:
                return
            pos = np.arange(have, have + k, dtype=np.int64)
            b = pos * B // N
            s = rows.sum(axis=1)
            batch_count[:] += np.bincount(b, minlength=B)
            batch_sum[:] += np.bincount(b, weights=s, minlength=B)
            keep = s > self._cut_s
            tail_x.append(rows[keep])
            tail_b.append(b[keep])
            mkeep = rows > self._cut_x
            marg_v.append(rows[mkeep])
            marg_b.append(np.broadcast_to(b[:, None], rows.shape)[mkeep])
            have += k

        chunks_used = 0
        for rows in pending:
            consume(rows)
            chunks_used += 1
        while have < N:
            consume(next(stream))
            chunks_used += 1
        stream.close()
        self.proposals = chunks_used * self.chunk_size
        self.produced = produced
        self._batch_count = batch_count
        self._batch_sum = batch_sum
        self._tail_x = np.concatenate(tail_x) if tail_x else np.empty((0, n))
        self._tail_batch = np.concatenate(tail_b)
        self._marg_vals = np.concatenate(marg_v)
        self._marg_batch = np.concatenate(marg_b)

    @property
    def acceptance_rate(self) -> float:
        """Accepted rows per proposal over every chunk drawn."""
        return self.produced / self.proposals

    # -- subsets ---------------------------------------------------------------
    @cached_property
    def _all(self):
        return _Subset(self, np.arange(self.batches))

    @cached_property
    def _even(self):
        return _Subset(self, np.arange(0, self.batches, 2))

    @cached_property
    def _odd(self):
        return _Subset(self, np.arange(1, self.batches, 2))

    @cached_property
    def _per_batch(self):
        return [_Subset(self, np.array([b])) for b in range(self.batches)]

    def _pairs(self):
        """(threshold subset, evaluation subset) for the point estimate and each batch."""
        if self.split_sample:
            point = (self._even, self._odd)
            reps = [(self._per_batch[b], self._per_batch[b + 1]) for b in range(0, self.batches - 1, 2)]
        else:
            point = (self._all, self._all)
            reps = [(sub, sub) for sub in self._per_batch]
        return point, reps

    def _check_level(self, p):
        if not self.p_min <= p < 1:
            raise DomainError(f"p={p} outside [{self.p_min}, 1) covered by this run")
        if self.samples * (1 - p) < MIN_EXCEEDANCES:
            raise InsufficientExceedancesError(
                f"samples*(1-p) = {self.samples * (1 - p):.0f} < {MIN_EXCEEDANCES}"
            )

    def _estimate(self, func, p, exceed_func=None):
        self._check_level(p)
        point, reps = self._pairs()
        value = func(*point)
        reps_vals = np.array([func(*pair) for pair in reps])
        stderr = float(np.std(reps_vals, ddof=1) / math.sqrt(len(reps_vals)))
        exceed = exceed_func(*point) if exceed_func else 0
        return MCEstimate(float(value), stderr, self.samples, self.seed, int(exceed))

    # -- estimators --------------------------------------------------------------
    def var(self, p: float) -> MCEstimate:
        """Order statistic S_(ceil(pN))."""
        return self._estimate(lambda t, e: e.var_s(p), p, lambda t, e: e.exceed(e.var_s(p)))

    def expectile(self, p: float) -> MCEstimate:
        return self._estimate(lambda t, e: e.expectile_s(p), p, lambda t, e: e.exceed(e.expectile_s(p)))

    def marginal_var(self, p: float) -> MCEstimate:
        return self._estimate(lambda t, e: e.var_x(p), p)

    def marginal_expectile(self, p: float) -> MCEstimate:
        return self._estimate(lambda t, e: e.expectile_x(p), p)

    def _conditional_value(self, thr_sub, ev_sub, p, target, m):
        if target in ("CTE", "MES", "SES"):
            threshold = thr_sub.var_s(p)
        else:
            threshold = thr_sub.expectile_s(p)
        k = ev_sub.exceed(threshold)
        if k == 0:
            raise InsufficientExceedancesError("no exceedances in a batch")
        if target in ("CTE", "CE"):
            return ev_sub.cs[k] / k
        xm = ev_sub.x[:k, m]
        if target in ("MES", "ICE"):
            return float(np.sum(xm)) / k
        inner = thr_sub.var_x(p) if target == "SES" else thr_sub.expectile_x(p)
        return float(np.sum(np.maximum(xm - inner, 0.0))) / k

    def conditional(self, p: float, target: str, m: int = 0) -> MCEstimate:
        """E[target | S_n > threshold] with the VaR (CTE/MES/SES) or expectile (CE/ICE/SICE) threshold."""
        if target not in CONDITIONAL:
            raise DomainError(f"target must be one of {CONDITIONAL}")
        if not 0 <= m < self.model.n:
            raise DomainError(f"component index {m} out of range")

        def exceed(t, e):
            thr = t.var_s(p) if target in ("CTE", "MES", "SES") else t.expectile_s(p)
            return e.exceed(thr)

        return self._estimate(lambda t, e: self._conditional_value(t, e, p, target, m), p, exceed)

    def _div_value(self, sub, p, measure):
        n = self.model.n
        if measure == "VaR":
            agg, alone = sub.var_s(p), sub.var_x(p)
        elif measure == "E":
            agg, alone = sub.expectile_s(p), sub.expectile_x(p)
        elif measure == "CTE":
            k = sub.exceed(sub.var_s(p))
            agg, alone = sub.cs[k] / k, sub.cond_mean_x_above(sub.var_x(p))
        elif measure == "CE":
            k = sub.exceed(sub.expectile_s(p))
            agg, alone = sub.cs[k] / k, sub.cond_mean_x_above(sub.expectile_x(p))
        else:
            raise DomainError(f"unknown diversification measure {measure!r}")
        return 1.0 - (agg - sub.mean_s) / (n * (alone - sub.mean_x))

    def diversification(self, p: float, measure: str) -> MCEstimate:
        """1 - (rho(S) - mean S)/(n (rho(X) - mean X)), rho(X) from the pooled components."""
        if self.model.n == 1:
            return MCEstimate(0.0, 0.0, self.samples, self.seed, 0)
        return self._estimate(lambda t, e: self._div_value(e, p, measure), p)

    def tail_ratio(self, t: float) -> MCEstimate:
        """P(S_n > t)/sf(t)."""
        if t <= self._cut_s:
            raise RuntimeError("t lies below the tail buffer cut-off")
        sf = float(self.model.marginal.sf(t))

        def ratio(sub):
            return sub.exceed(t) / sub.count / sf

        vals = np.array([ratio(sub) for sub in self._per_batch])
        return MCEstimate(ratio(self._all), float(np.std(vals, ddof=1) / math.sqrt(len(vals))),
                          self.samples, self.seed, self._all.exceed(t))

    def estimate(self, p: float, measure: str, m: int = 0) -> MCEstimate:
        """Dispatch by measure name, mirroring :func:`asymptotics.evaluate`."""
        if measure == "VaR":
            return self.var(p)
        if measure == "E":
            return self.expectile(p)
        if measure in CONDITIONAL:
            return self.conditional(p, measure, m)
        if measure.startswith("D_"):
            return self.diversification(p, measure[2:])
        raise DomainError(f"unknown measure {measure!r}")

    def sum_mean(self) -> float:
        return self._all.mean_s


def simulate(model: SarmanovModel, samples: int, seed: int, **kw) -> Simulation:
    return Simulation(model, samples, seed, **kw)


def estimate_var(model, p, samples, seed, **kw) -> MCEstimate:
    return Simulation(model, samples, seed, p_min=p, **kw).var(p)


def estimate_conditional(model, p, target, samples, seed, m=0, **kw) -> MCEstimate:
    return Simulation(model, samples, seed, p_min=p, **kw).conditional(p, target, m)


def estimate_diversification(model, p, measure, samples, seed, **kw) -> MCEstimate:
    return Simulation(model, samples, seed, p_min=p, **kw).diversification(p, measure)
