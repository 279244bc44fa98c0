"""Landscape statistics: which activation cones hold global or bad local minima.

A sampled cone is classified by solving its convex program and comparing the
value against the global one (within the fixed 1e-7 tolerance); cones that
miss the global value are probed for stationarity of their constrained
minimizer.  Closed-form companions: the coupon-collector width threshold and
the orthogonal-data fraction bound with its exact inclusion-exclusion value.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ._seeds import stream
from .arrangement import (ActivationMatrix, cover_count, enumerate_patterns,
                          sample_cone_network, sample_cone_uniform)
from .conic import (ObjectiveKind, SolveStatus, build_cone_program,
                    global_optimum, global_support_patterns, recover_network,
                    solve, stationarity_check)
from .data import Dataset, DatasetKind

__all__ = [
    "SamplingStrategy",
    "ConeClassification",
    "StatsConfig",
    "LandscapeStats",
    "ConeRecord",
    "classify_cone",
    "classify_by_patterns",
    "estimate_proportions",
    "theorem1_m_threshold",
    "theorem3_fraction",
    "stats_to_csv",
]

GLOBAL_VALUE_TOL = 1e-7
THREADS_ENV = "RELU_LANDSCAPE_THREADS"


class SamplingStrategy(str, Enum):
    UNIFORM = "uniform"
    RANDOM_NETWORK = "network"


@dataclass(frozen=True)
class ConeClassification:
    contains_global: bool
    bad_local_stationary: bool
    cone_value: float
    global_value: float
    status: SolveStatus

    def __post_init__(self):
        if self.contains_global and self.bad_local_stationary:
            raise ValueError("a cone at the global value cannot be a bad minimum")


def classify_cone(A: ActivationMatrix, ds: Dataset, lam: float,
                  global_value: float,
                  kind: ObjectiveKind = ObjectiveKind.REGULARIZED,
                  tol: float = 1e-8) -> ConeClassification:
    """Classify one activation cone against a known global value.

    The cone counts as containing a global minimum when its optimal value is
    within 1e-7 of the global one.  Otherwise its constrained minimizer is
    recovered as a balanced network and tested for stationarity under tunable
    ReLU subderivatives.  Solver failures surface through ``status``.
    """
    prog = build_cone_program(A, ds, lam, kind)
    sr = solve(prog, tol=tol)
    if sr.status is SolveStatus.INFEASIBLE:
        return ConeClassification(False, False, float("inf"), global_value, sr.status)
    contains = bool(sr.objective_value <= global_value + GLOBAL_VALUE_TOL)
    bad = False
    if not contains:
        net = recover_network(sr)
        bad = bool(stationarity_check(net, ds, lam).is_stationary)
    return ConeClassification(contains, bad, float(sr.objective_value),
                              float(global_value), sr.status)


def classify_by_patterns(A: ActivationMatrix, sparse_support) -> bool:
    """Sufficient condition: A carries every pattern of a sparse global solution."""
    have = {(tuple(A.bits[i]), int(A.signs[i])) for i in range(A.m)}
    return all((p.data_bits, p.sign_bit) in have for p in sparse_support)


def theorem1_m_threshold(n: int, d: int, epsilon: float) -> int:
    """Width making a uniform cone contain a sparse optimum's patterns w.p. 1-eps.

    The coupon-collector sufficient value: ceil(q * ln((n+1)/eps)) draws over
    the q = cover_count(n, d) nonempty neuron patterns collect any fixed n+1
    of them with probability at least 1 - eps.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    q = cover_count(n, d)
    return math.ceil(q * math.log((n + 1) / epsilon))


def theorem3_fraction(p: int, q: int, m: int, with_signs: bool):
    """(upper bound, exact value) for the fraction of winning cones, orthogonal data.

    A cone wins when some row covers all positive-label points and some row
    covers all negative-label points; the bound is m * 2^-max(p, q).  For the
    exact value under i.i.d. fair rows: with ``with_signs`` the two covering
    events additionally require output signs +/- so a single row can satisfy
    at most one of them; without signs a row can satisfy both independently
    (the masks are disjoint).  Inclusion-exclusion over the m rows gives
    1 - (1-c_p)^m - (1-c_q)^m + (1 - c_p - c_q + j)^m with c = 2^-(count+s)
    and the per-row joint j = c_p c_q (no signs) or 0 (signs).
    """
    if p < 0 or q < 0 or m < 0:
        raise ValueError("p, q, m must be nonnegative")
    upper = m * 2.0 ** (-max(p, q))
    s = 1 if with_signs else 0
    c_p = 2.0 ** (-(p + s))
    c_q = 2.0 ** (-(q + s))
    joint = 0.0 if with_signs else c_p * c_q
    exact = (1.0 - (1.0 - c_p) ** m - (1.0 - c_q) ** m
             + (1.0 - c_p - c_q + joint) ** m)
    return float(upper), float(exact)


@dataclass(frozen=True)
class StatsConfig:
    m_grid: tuple
    lam: float = 0.01
    num_cones: int = 100
    num_datasets: int = 5
    epsilon: float = 0.1
    strategy: SamplingStrategy = SamplingStrategy.UNIFORM
    kind: ObjectiveKind = ObjectiveKind.REGULARIZED
    master_seed: int = 0
    solver_tol: float = 1e-8

    def __post_init__(self):
        if self.num_cones < 1 or self.num_datasets < 1 or not self.m_grid:
            raise ValueError("need at least one cone, dataset, and width")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must lie in (0, 1)")
        object.__setattr__(self, "m_grid", tuple(int(m) for m in self.m_grid))
        object.__setattr__(self, "strategy", SamplingStrategy(self.strategy))
        object.__setattr__(self, "kind", ObjectiveKind(self.kind))


@dataclass(frozen=True)
class ConeRecord:
    """Per-cone detail retained for cross-checks of the aggregate statistics."""

    replicate: int
    m: int
    cone_index: int
    classification: ConeClassification
    covers_support: bool
    covering_signed: tuple | None
    covering_unsigned: tuple | None


@dataclass(frozen=True)
class LandscapeStats:
    m_grid: tuple
    prop_global: np.ndarray      # (len(m_grid), 3): mean, min, max over datasets
    prop_bad: np.ndarray
    num_cones: int
    num_datasets: int
    flagged: int                 # solves that ended MAX_ITER
    infeasible: int
    records: tuple = field(default=(), repr=False)
    per_dataset_global: tuple = ()
    per_dataset_labels: tuple = ()

    def __post_init__(self):
        for name in ("prop_global", "prop_bad"):
            arr = np.asarray(getattr(self, name))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        ok = (self.prop_global >= -1e-12).all() and (self.prop_global <= 1 + 1e-12).all()
        if not ok:
            raise ValueError("proportions out of range")


def _pool_size() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def estimate_proportions(cfg: StatsConfig, dataset_gen,
                         keep_records: bool = False) -> LandscapeStats:
    """Sample, classify, and aggregate cones for each width in the grid.

    ``dataset_gen(seed)`` supplies one dataset replicate per derived seed.
    Classification jobs are independent; they may run on a thread pool sized
    by the RELU_LANDSCAPE_THREADS variable, and results are reduced by job
    index so the pool size never changes any output.
    """
    n_m = len(cfg.m_grid)
    per_ds_global = []
    per_ds_labels = []
    hits = np.zeros((cfg.num_datasets, n_m))
    bads = np.zeros((cfg.num_datasets, n_m))
    flagged = 0
    infeasible = 0
    records = []

    for rep in range(cfg.num_datasets):
        ds_seed = int(stream(cfg.master_seed, "dataset", rep).integers(2 ** 63))
        ds = dataset_gen(ds_seed)
        gopt = global_optimum(ds, cfg.lam, cfg.kind, tol=cfg.solver_tol)
        support = global_support_patterns(gopt)
        per_ds_global.append(gopt.objective_value)
        per_ds_labels.append(ds.labels.copy())
        pats = enumerate_patterns(ds) if cfg.strategy is SamplingStrategy.UNIFORM else None

        masks = None
        if ds.kind is DatasetKind.ORTHOGONAL:
            from .arrangement import winning_patterns
            masks = winning_patterns(ds)

        jobs = []
        for mi, m in enumerate(cfg.m_grid):
            for j in range(cfg.num_cones):
                jobs.append((mi, m, j))

        def sample(m, j, mi):
            rng = stream(cfg.master_seed, "cone", rep, mi, j)
            if cfg.strategy is SamplingStrategy.UNIFORM:
                return sample_cone_uniform(pats, m, rng)
            return sample_cone_network(ds, m, rng)

        def run(job):
            mi, m, j = job
            A = sample(m, j, mi)
            cls = classify_cone(A, ds, cfg.lam, gopt.objective_value,
                                cfg.kind, tol=cfg.solver_tol)
            covers = classify_by_patterns(A, support)
            signed = unsigned = None
            if masks is not None:
                from .arrangement import contains_covering_row
                pos, neg = masks
                signed = (contains_covering_row(A, pos, 1),
                          contains_covering_row(A, neg, 0))
                unsigned = (contains_covering_row(A, pos, None),
                            contains_covering_row(A, neg, None))
            return ConeRecord(rep, m, j, cls, covers, signed, unsigned)

        workers = _pool_size()
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as ex:
                results = list(ex.map(run, jobs))
        else:
            results = [run(job) for job in jobs]

        for (mi, m, j), rec in zip(jobs, results):
            cls = rec.classification
            if cls.status is SolveStatus.MAX_ITER:
                flagged += 1
            if cls.status is SolveStatus.INFEASIBLE:
                infeasible += 1
                continue
            hits[rep, mi] += cls.contains_global
            bads[rep, mi] += cls.bad_local_stationary
            if keep_records:
                records.append(rec)

    hits /= cfg.num_cones
    bads /= cfg.num_cones
    agg = lambda a: np.stack([a.mean(axis=0), a.min(axis=0), a.max(axis=0)], axis=1)
    return LandscapeStats(cfg.m_grid, agg(hits), agg(bads), cfg.num_cones,
                          cfg.num_datasets, flagged, infeasible,
                          tuple(records), tuple(per_ds_global),
                          tuple(np.asarray(l) for l in per_ds_labels))


def stats_to_csv(stats: LandscapeStats) -> str:
    lines = ["m,prop_global_mean,prop_global_min,prop_global_max,"
             "prop_bad_mean,prop_bad_min,prop_bad_max"]
    for i, m in enumerate(stats.m_grid):
        g = stats.prop_global[i]
        b = stats.prop_bad[i]
        vals = [format(v, ".17g") for v in (*g, *b)]
        lines.append(f"{m}," + ",".join(vals))
    return "\n".join(lines) + "\n"
