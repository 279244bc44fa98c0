"""Cone classification statistics and the closed-form width/fraction bounds."""

import math
import os

import numpy as np
import pytest

from conftest import make_orthogonal
from relu_landscape import landscape as lsc
from relu_landscape.arrangement import (ActivationMatrix, enumerate_patterns,
                                        sample_cone_uniform)
from relu_landscape.conic import (ObjectiveKind, SolveStatus, global_optimum,
                                  global_support_patterns)
from relu_landscape.data import gen_gaussian_teacher
from relu_landscape.landscape import (SamplingStrategy, StatsConfig,
                                      classify_by_patterns, classify_cone,
                                      estimate_proportions, stats_to_csv,
                                      theorem1_m_threshold, theorem3_fraction)


class TestWidthThreshold:
    def test_known_value(self):
        # q = 16 patterns, collect 5 coupons at eps = 0.1
        assert theorem1_m_threshold(4, 2, 0.1) == math.ceil(16 * math.log(50))
        assert theorem1_m_threshold(4, 2, 0.1) == 63

    def test_eps_to_one_limit(self):
        assert theorem1_m_threshold(4, 2, 0.999999) == math.ceil(
            16 * math.log(5 / 0.999999))

    def test_rejects_bad_eps(self):
        with pytest.raises(ValueError):
            theorem1_m_threshold(4, 2, 0.0)

    def test_coupon_guarantee_empirical(self):
        # at the threshold width, a uniform cone carries any fixed 5 patterns
        # with probability at least 1 - eps
        rng = np.random.default_rng(0)
        eps = 0.1
        m = theorem1_m_threshold(4, 2, eps)
        wanted = set(range(5))
        trials = 4000
        hit = sum(wanted <= set(rng.integers(0, 16, size=m)) for _ in range(trials))
        assert hit / trials >= 1 - eps


class TestFractionFormula:
    def test_upper_bound_value(self):
        ub, _ = theorem3_fraction(8, 8, 16, with_signs=False)
        assert ub == pytest.approx(16 / 256)

    def test_zero_rows(self):
        for signs in (True, False):
            _, exact = theorem3_fraction(5, 3, 0, signs)
            assert exact == 0.0

    def test_exact_below_bound(self):
        for m in (1, 4, 32, 200):
            for signs in (True, False):
                ub, exact = theorem3_fraction(6, 2, m, signs)
                assert exact <= min(1.0, ub) + 1e-12

    @pytest.mark.parametrize("p,q,m", [(2, 2, 8), (3, 1, 4), (5, 3, 64), (10, 10, 1024)])
    def test_matches_pattern_draw_monte_carlo(self, p, q, m):
        # draw i.i.d. fair rows and test the two covering events directly
        rng = np.random.default_rng(p * 100 + q * 10 + m)
        n = p + q + 1
        pos = np.zeros(n, bool)
        pos[:p] = True
        neg = np.zeros(n, bool)
        neg[p:p + q] = True
        trials = 60_000
        hits_s = hits_u = 0
        for _ in range(trials):
            bits = rng.integers(0, 2, size=(m, n), dtype=np.uint8).astype(bool)
            signs = rng.integers(0, 2, size=m, dtype=np.uint8)
            cov_pos = (bits | ~pos).all(axis=1)
            cov_neg = (bits | ~neg).all(axis=1)
            hits_u += cov_pos.any() and cov_neg.any()
            hits_s += (cov_pos & (signs == 1)).any() and (cov_neg & (signs == 0)).any()
        for hits, signs in ((hits_s, True), (hits_u, False)):
            _, exact = theorem3_fraction(p, q, m, signs)
            emp = hits / trials
            sigma = math.sqrt(max(exact * (1 - exact), 1.0 / trials) / trials)
            assert abs(emp - exact) <= 3.5 * sigma


class TestClassifyCone:
    def test_full_pattern_cone_contains_global(self, gaussian_4x2):
        g = global_optimum(gaussian_4x2, 0.01)
        ps = enumerate_patterns(gaussian_4x2)
        A = ActivationMatrix(np.vstack([ps.patterns, ps.patterns]),
                             np.concatenate([np.ones(len(ps), np.uint8),
                                             np.zeros(len(ps), np.uint8)]))
        cls = classify_cone(A, gaussian_4x2, 0.01, g.objective_value)
        assert cls.contains_global and not cls.bad_local_stationary

    def test_orthogonal_missing_covering_row(self):
        ds = make_orthogonal(4, 6, seed=3)
        g = global_optimum(ds, 0.01)
        pos = (ds.labels > 0).astype(np.uint8)
        # a single row that misses one positive-label point entirely
        bits = pos.copy()
        bits[np.flatnonzero(pos)[0]] = 0
        A = ActivationMatrix(bits[None, :], np.array([1], np.uint8))
        cls = classify_cone(A, ds, 0.01, g.objective_value)
        assert not cls.contains_global

    def test_infeasible_min_norm_recorded(self, gaussian_4x2):
        A = ActivationMatrix(np.zeros((1, 4), np.uint8), np.array([1], np.uint8))
        cls = classify_cone(A, gaussian_4x2, 0.0, 0.0, ObjectiveKind.MIN_NORM)
        assert cls.status is SolveStatus.INFEASIBLE
        assert not cls.contains_global and not cls.bad_local_stationary

    def test_consistency_invariant(self):
        with pytest.raises(ValueError):
            lsc.ConeClassification(True, True, 0.0, 0.0, SolveStatus.OPTIMAL)


class TestClassifyByPatterns:
    def test_empty_support_always_true(self, gaussian_4x2):
        ps = enumerate_patterns(gaussian_4x2)
        A = sample_cone_uniform(ps, 1, np.random.default_rng(0))
        assert classify_by_patterns(A, [])

    def test_support_implication(self, gaussian_4x2):
        g = global_optimum(gaussian_4x2, 0.01)
        support = global_support_patterns(g)
        ps = enumerate_patterns(gaussian_4x2)
        rng = np.random.default_rng(5)
        checked = 0
        for _ in range(60):
            A = sample_cone_uniform(ps, 12, rng)
            if classify_by_patterns(A, support):
                cls = classify_cone(A, gaussian_4x2, 0.01, g.objective_value)
                assert cls.contains_global
                checked += 1
        assert checked > 0


class TestEstimateProportions:
    def make_cfg(self, **kw):
        base = dict(m_grid=(2, 8, 32), lam=0.01, num_cones=8, num_datasets=2,
                    master_seed=99)
        base.update(kw)
        return StatsConfig(**base)

    def gen(self, seed):
        return gen_gaussian_teacher(4, 2, 10, seed)

    def test_deterministic_across_runs(self):
        cfg = self.make_cfg()
        s1 = estimate_proportions(cfg, self.gen)
        s2 = estimate_proportions(cfg, self.gen)
        np.testing.assert_array_equal(s1.prop_global, s2.prop_global)
        np.testing.assert_array_equal(s1.prop_bad, s2.prop_bad)

    def test_thread_pool_invariance(self):
        cfg = self.make_cfg()
        s1 = estimate_proportions(cfg, self.gen)
        os.environ[lsc.THREADS_ENV] = "4"
        try:
            s2 = estimate_proportions(cfg, self.gen)
        finally:
            del os.environ[lsc.THREADS_ENV]
        np.testing.assert_array_equal(s1.prop_global, s2.prop_global)
        np.testing.assert_array_equal(s1.prop_bad, s2.prop_bad)

    def test_adding_rows_never_loses_global(self, gaussian_4x2):
        ps = enumerate_patterns(gaussian_4x2)
        g = global_optimum(gaussian_4x2, 0.01)
        rng = np.random.default_rng(31)
        for _ in range(10):
            A = sample_cone_uniform(ps, 6, rng)
            extra = sample_cone_uniform(ps, 6, rng)
            big = ActivationMatrix(np.vstack([A.bits, extra.bits]),
                                   np.concatenate([A.signs, extra.signs]))
            small_cls = classify_cone(A, gaussian_4x2, 0.01, g.objective_value)
            big_cls = classify_cone(big, gaussian_4x2, 0.01, g.objective_value)
            if small_cls.contains_global:
                assert big_cls.contains_global

    def test_csv_schema(self):
        cfg = self.make_cfg(num_cones=4, num_datasets=1, m_grid=(2, 4))
        stats = estimate_proportions(cfg, self.gen)
        lines = stats_to_csv(stats).splitlines()
        assert lines[0] == ("m,prop_global_mean,prop_global_min,prop_global_max,"
                            "prop_bad_mean,prop_bad_min,prop_bad_max")
        assert len(lines) == 3

    def test_strategies_agree_on_orthogonal(self):
        # both samplers induce the uniform law over patterns here, so the
        # estimated proportions agree within binomial noise
        def gen(seed):
            return make_orthogonal(4, 8, seed=seed)

        cfg_u = self.make_cfg(m_grid=(8, 16), num_cones=60, num_datasets=1,
                              strategy=SamplingStrategy.UNIFORM, master_seed=5)
        cfg_n = self.make_cfg(m_grid=(8, 16), num_cones=60, num_datasets=1,
                              strategy=SamplingStrategy.RANDOM_NETWORK, master_seed=5)
        su = estimate_proportions(cfg_u, gen)
        sn = estimate_proportions(cfg_n, gen)
        for i in range(2):
            pu, pn = su.prop_global[i, 0], sn.prop_global[i, 0]
            sigma = math.sqrt((pu * (1 - pu) + pn * (1 - pn)) / 60 + 1e-6)
            assert abs(pu - pn) <= 3.5 * sigma
