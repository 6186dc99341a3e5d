import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sslgauss.errors import BoundInapplicableError, ContractError, ExactInfeasibleError
from sslgauss.theory import (LowDegParams, RegionLabel, Verdict, bound_dominates_exact,
                             fusion_verdict, hypergeom_overlap_moment,
                             hypergeom_overlap_pmf, lowdeg_degree_bound_terms,
                             lowdeg_norm_exact, lowdeg_norm_mc, lowdeg_norm_upper_bound,
                             rademacher_sum_moment, region_classify, sl_threshold,
                             ul_threshold)


def enumerate_overlap_pmf(p: int, k: int) -> dict[int, Fraction]:
    """Oracle: exhaust all pairs of k-subsets of [p] and count overlaps."""
    subsets = list(itertools.combinations(range(p), k))
    counts: dict[int, int] = {}
    for a in subsets:
        sa = set(a)
        for b in subsets:
            m = len(sa.intersection(b))
            counts[m] = counts.get(m, 0) + 1
    total = len(subsets) ** 2
    return {m: Fraction(c, total) for m, c in counts.items()}


def enumerate_sign_sum_moment(n: int, d: int) -> Fraction:
    """Oracle: all 2^n sign patterns of the Rademacher sum."""
    total = 0
    for signs in itertools.product((-1, 1), repeat=n):
        total += sum(signs) ** d
    return Fraction(total, 2 ** n)


class TestThresholds:
    def test_sl_reference_point(self):
        val = sl_threshold(100, 3.0, 10 ** 5, 0.0)
        assert abs(val - (200.0 / 3.0) * math.log(99901)) < 1e-9
        assert abs(val - 767.462) < 0.01

    def test_delta_one_gives_zero(self):
        assert sl_threshold(10, 1.0, 100, 1.0) == 0.0

    def test_linear_in_k(self):
        a = sl_threshold(50, 2.0, 10 ** 4, 0.1)
        # doubling k doubles the threshold, up to the log(p-k+1) factor
        b = sl_threshold(100, 2.0, 10 ** 4, 0.1)
        ratio = b / a
        expected = 2.0 * math.log(10 ** 4 - 100 + 1) / math.log(10 ** 4 - 50 + 1)
        assert abs(ratio - expected) < 1e-12

    def test_ul_equals_sl_at_lambda_one(self):
        assert ul_threshold(30, 1.0, 2000, 0.2) == sl_threshold(30, 1.0, 2000, 0.2)

    def test_ul_reference_point(self):
        val = ul_threshold(100, 3.0, 10 ** 5, 0.0)
        assert abs(val - (200.0 / 9.0) * math.log(99901) * 3.0) < 1e-9
        assert abs(val - sl_threshold(100, 3.0, 10 ** 5, 0.0)) < 1e-12

    def test_ul_small_lambda(self):
        # max{1, lambda} = 1, so the value is 2(1-d) k log(p-k+1) / lambda^2
        val = ul_threshold(10, 0.5, 100, 0.0)
        assert abs(val - 2 * 10 * math.log(91) / 0.25) < 1e-12

    def test_zero_lambda_sentinel(self):
        assert sl_threshold(10, 0.0, 100, 0.5) == math.inf
        assert ul_threshold(10, 0.0, 100, 0.5) == math.inf

    def test_domain_checks(self):
        with pytest.raises(ContractError):
            sl_threshold(100, 1.0, 100, 0.5)
        with pytest.raises(ContractError):
            sl_threshold(10, 1.0, 100, 1.5)


class TestFusionVerdict:
    def test_half_half_split_below(self):
        L0 = sl_threshold(100, 3.0, 10 ** 5, 0.5)
        n0 = ul_threshold(100, 3.0, 10 ** 5, 0.5)
        rep = fusion_verdict(int(L0 / 2), int(n0 / 2), 100, 3.0, 10 ** 5, 0.5)
        assert rep.verdict is Verdict.BELOW_BOUND
        assert 0.0 <= rep.q <= 0.5 + 1e-9

    def test_both_at_threshold_above(self):
        L0 = sl_threshold(100, 3.0, 10 ** 5, 0.5)
        n0 = ul_threshold(100, 3.0, 10 ** 5, 0.5)
        rep = fusion_verdict(math.ceil(L0), math.ceil(n0), 100, 3.0, 10 ** 5, 0.5)
        assert rep.verdict is Verdict.ABOVE_BOUND

    def test_labeled_corner_reduces_to_ul(self):
        n0 = ul_threshold(100, 3.0, 10 ** 5, 0.5)
        rep = fusion_verdict(0, int(n0 * 0.9), 100, 3.0, 10 ** 5, 0.5)
        assert rep.verdict is Verdict.BELOW_BOUND
        assert rep.q == 0.0
        rep2 = fusion_verdict(0, int(n0 * 1.1) + 1, 100, 3.0, 10 ** 5, 0.5)
        assert rep2.verdict is Verdict.ABOVE_BOUND

    def test_unlabeled_corner_reduces_to_sl(self):
        L0 = sl_threshold(100, 3.0, 10 ** 5, 0.5)
        assert fusion_verdict(int(L0 * 0.9), 0, 100, 3.0, 10 ** 5, 0.5).verdict \
            is Verdict.BELOW_BOUND
        assert fusion_verdict(int(L0 * 1.1) + 1, 0, 100, 3.0, 10 ** 5, 0.5).verdict \
            is Verdict.ABOVE_BOUND


class TestHypergeomOverlap:
    def test_normalization(self):
        total = sum(hypergeom_overlap_pmf(10, 3, m) for m in range(4))
        assert abs(total - 1.0) < 1e-12

    def test_mean_identity_small(self):
        mean = sum(m * hypergeom_overlap_pmf(4, 2, m) for m in range(3))
        assert abs(mean - 1.0) < 1e-12  # k^2/p = 4/4

    @pytest.mark.parametrize("p", range(2, 9))
    def test_matches_enumeration(self, p):
        for k in range(1, p + 1):
            oracle = enumerate_overlap_pmf(p, k)
            for m in range(k + 1):
                want = float(oracle.get(m, Fraction(0)))
                got = hypergeom_overlap_pmf(p, k, m)
                if want == 0.0:
                    assert got == 0.0
                else:
                    assert abs(got - want) <= 1e-12 * want

    @pytest.mark.parametrize("p", [12, 25, 40])
    def test_mean_identity_sweep(self, p):
        for k in range(1, p + 1, 3):
            mean = sum(m * hypergeom_overlap_pmf(p, k, m) for m in range(k + 1))
            assert abs(mean - k * k / p) <= 1e-10 * max(1.0, k * k / p)

    def test_out_of_range_warns(self):
        with pytest.warns(UserWarning):
            assert hypergeom_overlap_pmf(10, 3, 5) == 0.0
        with pytest.warns(UserWarning):
            assert hypergeom_overlap_pmf(10, 3, -1) == 0.0

    def test_moment_matches_enumeration(self):
        oracle = enumerate_overlap_pmf(6, 2)
        for d in range(5):
            want = float(sum(Fraction(m) ** d * pr for m, pr in oracle.items()))
            assert abs(hypergeom_overlap_moment(6, 2, d) - want) <= 1e-12 * max(1.0, want)


class TestRademacherMoments:
    def test_odd_is_exactly_zero(self):
        for n in (1, 5, 12, 100):
            for d in (1, 3, 7):
                assert rademacher_sum_moment(n, d) == 0.0

    def test_second_moment_is_n(self):
        for n in (1, 4, 17, 64):
            assert rademacher_sum_moment(n, 2) == float(n)

    def test_n4_d4_enumeration(self):
        want = enumerate_sign_sum_moment(4, 4)
        assert want == Fraction(40)
        assert rademacher_sum_moment(4, 4) == 40.0

    def test_enumeration_sweep(self):
        for n in range(0, 13):
            for d in range(0, 9):
                want = float(enumerate_sign_sum_moment(n, d))
                got = rademacher_sum_moment(n, d)
                if want == 0.0:
                    assert got == 0.0
                else:
                    assert abs(got - want) <= 1e-12 * want

    def test_double_factorial_bound(self):
        for n in range(1, 31):
            for ell in range(1, 7):
                dd = math.prod(range(2 * ell - 1, 0, -2))
                assert rademacher_sum_moment(n, 2 * ell) <= n ** ell * dd * (1 + 1e-12)

    def test_large_n_log_space_path(self):
        # n = 80 exceeds the exact-path guard; compare to direct Fraction sum
        n, d = 80, 6
        want = float(Fraction(sum(math.comb(n, t) * (2 * t - n) ** d
                                  for t in range(n + 1)), 2 ** n))
        got = rademacher_sum_moment(n, d)
        assert abs(got - want) <= 1e-10 * want


class TestLowDegNorm:
    def test_degree_zero_is_one(self):
        assert lowdeg_norm_exact(LowDegParams(p=9, k=3, L=4, n=5, lam=2.0, D=0)) == 1.0

    def test_zero_signal_is_one(self):
        assert lowdeg_norm_exact(LowDegParams(p=9, k=3, L=4, n=5, lam=0.0, D=7)) == 1.0

    def test_small_case_hand_value(self):
        # p=6,k=2,L=1,n=2,lam=1,D=3 -> 1 + 1/3 + 3/10 + 7/45 = 161/90
        got = lowdeg_norm_exact(LowDegParams(p=6, k=2, L=1, n=2, lam=1.0, D=3))
        assert abs(got - 161.0 / 90.0) < 1e-14

    def test_monotone_in_each_argument(self):
        base = LowDegParams(p=12, k=3, L=2, n=4, lam=1.5, D=4)
        val = lowdeg_norm_exact(base)
        assert lowdeg_norm_exact(LowDegParams(12, 3, 2, 4, 1.5, 6)) >= val
        assert lowdeg_norm_exact(LowDegParams(12, 3, 2, 4, 2.5, 4)) >= val
        assert lowdeg_norm_exact(LowDegParams(12, 3, 5, 4, 1.5, 4)) >= val
        assert lowdeg_norm_exact(LowDegParams(12, 3, 2, 9, 1.5, 4)) >= val

    def test_mc_agrees_with_exact(self):
        params = LowDegParams(p=6, k=2, L=1, n=2, lam=1.0, D=3)
        exact = lowdeg_norm_exact(params)
        est, se = lowdeg_norm_mc(params, n_samples=200_000, seed=3)
        assert abs(est - exact) <= 3.0 * se

    def test_guard_raises(self):
        with pytest.raises(ExactInfeasibleError):
            lowdeg_norm_exact(LowDegParams(p=200, k=100, L=1, n=2, lam=1.0, D=3))
        with pytest.raises(ExactInfeasibleError):
            lowdeg_norm_exact(LowDegParams(p=9, k=3, L=1, n=100, lam=1.0, D=3))
        with pytest.raises(ExactInfeasibleError):
            lowdeg_norm_exact(LowDegParams(p=9, k=3, L=1, n=2, lam=1.0, D=40))

    def test_bound_dominates_exact_where_applicable(self):
        # search small instances whose finite-size domination condition holds
        checked = 0
        for p in (500, 2000, 8000):
            for k in (2, 3, 5):
                for L in (20, 60):
                    for n in (0, 10, 40):
                        for lam in (0.25, 0.5):
                            for D in (2, 4, 6):
                                params = LowDegParams(p=p, k=k, L=L, n=n, lam=lam, D=D)
                                if not bound_dominates_exact(params):
                                    continue
                                exact = lowdeg_norm_exact(params)
                                bound = lowdeg_norm_upper_bound(params)
                                assert bound >= exact - 1e-12
                                checked += 1
        assert checked >= 20

    def test_intermediate_terms_dominate_exact_terms(self):
        params = LowDegParams(p=100, k=4, L=5, n=8, lam=1.0, D=4)
        terms = lowdeg_degree_bound_terms(params)
        assert sum(terms) >= lowdeg_norm_exact(params) - 1e-12

    def test_bound_tends_to_one(self):
        params = LowDegParams(p=10 ** 6, k=2, L=1, n=0, lam=0.001, D=2)
        val = lowdeg_norm_upper_bound(params, alpha=0.05, beta=0.05, epsilon=0.1)
        assert 1.0 <= val < 1.0 + 1e-3

    def test_bound_log_space_smoke(self):
        # alpha = 1/3, beta = 0.1, epsilon = 1/2 - alpha - beta
        params = LowDegParams(p=10 ** 6, k=100, L=50, n=10, lam=3.0, D=10)
        val = lowdeg_norm_upper_bound(params, alpha=1.0 / 3.0, beta=0.1, epsilon=None)
        assert math.isfinite(val) and val >= 1.0

    def test_bound_inapplicable_cases(self):
        with pytest.raises(BoundInapplicableError):
            lowdeg_norm_upper_bound(LowDegParams(p=10, k=2, L=0, n=4, lam=2.0, D=5))
        with pytest.raises(BoundInapplicableError):
            lowdeg_norm_upper_bound(LowDegParams(p=10, k=2, L=3, n=4, lam=2.0, D=5),
                                    alpha=0.2, beta=0.6)  # 2*beta >= 1


class TestRegionClassify:
    def test_reference_points(self):
        assert region_classify(0.4, 0.5, 1.5) is RegionLabel.SSL_EASY_BLUE
        assert region_classify(0.4, 0.05, 1.5) is RegionLabel.HARD_ORANGE
        assert region_classify(0.3, 0.9, 0.5) is RegionLabel.SL_EASY
        assert region_classify(0.4, 0.25, 1.5) is RegionLabel.UNKNOWN_WHITE

    def test_ul_easy_green(self):
        assert region_classify(0.3, 0.1, 2.0) is RegionLabel.UL_EASY
        assert region_classify(0.3, 0.1, 5.0) is RegionLabel.UL_EASY

    def test_impossible_red(self):
        assert region_classify(0.3, 0.2, 0.5) is RegionLabel.IMPOSSIBLE_RED
        assert region_classify(0.3, 0.2, 1.0) is RegionLabel.IMPOSSIBLE_RED

    def test_boundary_precedence(self):
        # gamma = 2 exactly goes to the earlier UL clause even with large beta <= 1-alpha
        assert region_classify(0.4, 0.6, 2.0) is RegionLabel.UL_EASY
        # beta = 1 - alpha exactly is not SL-easy (strict) and not blue (strict)
        assert region_classify(0.4, 0.6, 1.5) is RegionLabel.UNKNOWN_WHITE

    def test_domain_error(self):
        with pytest.raises(ContractError):
            region_classify(0.6, 0.1, 1.0)
        with pytest.raises(ContractError):
            region_classify(0.0, 0.1, 1.0)

    @given(st.floats(0.01, 0.49), st.floats(0, 2), st.floats(0, 4))
    @settings(max_examples=200, deadline=None)
    def test_total_on_domain(self, alpha, beta, gamma):
        label = region_classify(alpha, beta, gamma)
        assert isinstance(label, RegionLabel)
