import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dpipac.divergences import (
    DimensionError,
    DiscreteDistribution,
    MarkovKernel,
    binary_kl,
    chi_squared_divergence,
    chi_squared_generator,
    dpi_check,
    f_divergence,
    hellinger_generator,
    hellinger_log_moment,
    hellinger_p_divergence,
    kl_generator,
    kl_inverse_upper,
    pinsker_risk_bound,
    pushforward,
    renyi_divergence,
)

from conftest import distribution_pairs, distributions, random_distribution, random_kernel

mpmath.mp.dps = 50


def mp_binary_kl(p, q):
    p, q = mpmath.mpf(p), mpmath.mpf(q)
    out = mpmath.mpf(0)
    if p > 0:
        out += p * mpmath.log(p / q)
    if p < 1:
        out += (1 - p) * mpmath.log((1 - p) / (1 - q))
    return out


class TestDiscreteDistribution:
    def test_rejects_bad_masses(self):
        with pytest.raises(ValueError):
            DiscreteDistribution([0.5, 0.6])
        with pytest.raises(ValueError):
            DiscreteDistribution([1.5, -0.5])
        with pytest.raises(ValueError):
            DiscreteDistribution([])
        with pytest.raises(ValueError):
            DiscreteDistribution([float("nan"), 1.0])

    def test_tolerance_is_not_renormalized(self):
        d = DiscreteDistribution([0.5, 0.5 + 5e-10])
        assert d.masses[1] == 0.5 + 5e-10
        with pytest.raises(ValueError):
            DiscreteDistribution([0.5, 0.5 + 2e-9])

    def test_min_mass_and_probability(self):
        d = DiscreteDistribution([0.2, 0.5, 0.3])
        assert d.min_mass == 0.2
        assert d.probability([True, False, True]) == pytest.approx(0.5)
        with pytest.raises(DimensionError):
            d.probability([True])

    def test_kernel_rows_validated(self):
        with pytest.raises(ValueError):
            MarkovKernel([[0.5, 0.4], [0.5, 0.5]])
        with pytest.raises(DimensionError):
            MarkovKernel([0.5, 0.5])
        k = MarkovKernel([[1, 0], [0.25, 0.75]])
        assert k.input_size == 2 and k.output_size == 2
        assert k.rows[1] == DiscreteDistribution([0.25, 0.75])


class TestBinaryKL:
    def test_identical_arguments(self):
        assert binary_kl(0.5, 0.5) == 0.0

    def test_zero_empirical(self):
        assert binary_kl(0.0, 0.5) == pytest.approx(math.log(2), abs=1e-15)

    def test_against_extended_precision(self):
        expected = float(mp_binary_kl("0.1", "0.4"))
        assert binary_kl(0.1, 0.4) == pytest.approx(expected, rel=1e-14)
        assert expected == pytest.approx(0.1 * math.log(0.25) + 0.9 * math.log(1.5), rel=1e-14)

    def test_infinities(self):
        assert binary_kl(0.3, 0.0) == math.inf
        assert binary_kl(0.3, 1.0) == math.inf
        assert binary_kl(0.0, 0.0) == 0.0
        assert binary_kl(1.0, 1.0) == 0.0

    @given(st.floats(0, 1), st.floats(0, 1))
    def test_nonnegative(self, p, q):
        assert binary_kl(p, q) >= 0


class TestKLInverse:
    def test_zero_budget(self):
        assert kl_inverse_upper(0.5, 0.0) == 0.5

    def test_full_empirical_loss(self):
        assert kl_inverse_upper(1.0, 0.3) == 1.0

    def test_closed_form_at_zero(self):
        c = math.log(40) / 100
        assert kl_inverse_upper(0.0, c) == pytest.approx(-math.expm1(-c), abs=1e-12)
        assert kl_inverse_upper(0.0, c) == pytest.approx(0.036216692645176419, abs=1e-12)

    @pytest.mark.parametrize("c", [1e-6, 1e-3, 0.1, 1.0, 5.0])
    def test_round_trip_at_p_hat_0_2(self, c):
        assert abs(binary_kl(0.2, kl_inverse_upper(0.2, c)) - c) <= 1e-10

    @given(st.floats(0, 0.99), st.floats(1e-6, 5))
    def test_returns_largest_feasible_double(self, p, c):
        q = kl_inverse_upper(p, c)
        assert p <= q < 1 or q == 1
        assert binary_kl(p, q) <= c
        assert binary_kl(p, np.nextafter(q, 2.0)) > c

    @given(st.floats(0, 0.99), st.floats(0, 5), st.floats(0, 0.99), st.floats(0, 5))
    def test_monotone(self, p1, c1, p2, c2):
        (p1, p2), (c1, c2) = sorted((p1, p2)), sorted((c1, c2))
        assert kl_inverse_upper(p1, c1) <= kl_inverse_upper(p2, c1)
        assert kl_inverse_upper(p1, c1) <= kl_inverse_upper(p1, c2)

    def test_rejects_bad_budget(self):
        with pytest.raises(ValueError):
            kl_inverse_upper(0.1, -1.0)
        with pytest.raises(ValueError):
            kl_inverse_upper(0.1, math.inf)


class TestPinsker:
    def test_values(self):
        assert pinsker_risk_bound(0.1, 0.08) == pytest.approx(0.3, abs=1e-15)
        assert pinsker_risk_bound(0.5, 0.0) == 0.5
        assert pinsker_risk_bound(0.9, 2.0) == 1.0

    def test_dominates_kl_inverse_on_grid(self):
        for p in np.linspace(0, 0.99, 10):
            for c in np.geomspace(1e-6, 5, 10):
                assert kl_inverse_upper(p, c) <= pinsker_risk_bound(p, c)


class TestRenyi:
    def test_identical(self):
        P = DiscreteDistribution([0.2, 0.3, 0.5])
        for a in (1.5, 2, 1e7):
            assert renyi_divergence(P, P, a) == pytest.approx(0.0, abs=1e-12)

    def test_point_mass_against_half(self):
        P, Q = DiscreteDistribution([1, 0]), DiscreteDistribution([0.5, 0.5])
        assert renyi_divergence(P, Q, 2) == pytest.approx(math.log(2), rel=1e-14)

    def test_rejects_small_order(self):
        P = DiscreteDistribution([0.5, 0.5])
        for a in (1.0, 0.5):
            with pytest.raises(ValueError):
                renyi_divergence(P, P, a)

    def test_support_failure(self):
        P, Q = DiscreteDistribution([0.5, 0.5]), DiscreteDistribution([1, 0])
        assert renyi_divergence(P, Q, 2) == math.inf
        assert renyi_divergence(Q, P, 2) == pytest.approx(math.log(2))

    def test_against_extended_precision(self):
        P = DiscreteDistribution([0.1, 0.6, 0.3])
        Q = DiscreteDistribution([0.4, 0.4, 0.2])
        for a in (1.5, 3.0, 100.0):
            s = sum(mpmath.mpf(p) ** a * mpmath.mpf(q) ** (1 - a)
                    for p, q in zip(P.masses, Q.masses))
            assert renyi_divergence(P, Q, a) == pytest.approx(float(mpmath.log(s) / (a - 1)),
                                                              rel=1e-12)

    @given(distribution_pairs())
    def test_order_two_is_log_one_plus_chi2(self, pair):
        P, Q = pair
        assert renyi_divergence(P, Q, 2) == pytest.approx(
            math.log1p(chi_squared_divergence(P, Q)), rel=1e-10, abs=1e-12)

    @given(distribution_pairs(min_size=2), st.sampled_from([1e7, 1e9]))
    def test_large_order_finite(self, pair, a):
        P, Q = pair
        v = renyi_divergence(P, Q, a)
        assert math.isfinite(v) and v >= 0


class TestChiSquared:
    def test_values(self):
        assert chi_squared_divergence(DiscreteDistribution([1, 0]),
                                      DiscreteDistribution([0.5, 0.5])) == pytest.approx(1.0)
        got = chi_squared_divergence(DiscreteDistribution.bernoulli(0.3),
                                     DiscreteDistribution.bernoulli(0.2))
        assert got == pytest.approx(0.0625, abs=1e-15)

    def test_identical(self):
        P = DiscreteDistribution([0.25, 0.75])
        assert chi_squared_divergence(P, P) == pytest.approx(0.0, abs=1e-15)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            chi_squared_divergence(DiscreteDistribution([1.0]), DiscreteDistribution([0.5, 0.5]))


class TestHellinger:
    def test_identical(self):
        P = DiscreteDistribution([0.2, 0.8])
        for p in (1.5, 2, 10):
            assert hellinger_p_divergence(P, P, p) == pytest.approx(0.0, abs=1e-12)

    def test_rejects_small_order(self):
        P = DiscreteDistribution([0.5, 0.5])
        with pytest.raises(ValueError):
            hellinger_p_divergence(P, P, 1.0)

    @given(distribution_pairs())
    def test_order_two_is_chi_squared(self, pair):
        P, Q = pair
        assert hellinger_p_divergence(P, Q, 2) == pytest.approx(
            chi_squared_divergence(P, Q), rel=1e-10, abs=1e-12)

    @given(distribution_pairs(), st.sampled_from([1.5, 3.0, 10.0]))
    def test_links_to_renyi(self, pair, p):
        P, Q = pair
        lhs = (p - 1) * hellinger_p_divergence(P, Q, p) + 1
        assert lhs == pytest.approx(math.exp((p - 1) * renyi_divergence(P, Q, p)), rel=1e-10)

    def test_large_order(self):
        # exact value below the double range: stays finite
        Q = DiscreteDistribution([0.3, 0.7])
        P = DiscreteDistribution([0.3 + 1e-7, 0.7 - 1e-7])
        v = hellinger_p_divergence(P, Q, 1e7)
        assert math.isfinite(v) and v > 0
        # exact value above the double range: the log moment is still finite
        P = DiscreteDistribution([0.6, 0.4])
        assert math.isfinite(hellinger_log_moment(P, Q, 1e7))
        assert not math.isnan(hellinger_p_divergence(P, Q, 1e7))


class TestFDivergence:
    def test_identical(self):
        P = DiscreteDistribution([0.1, 0.9])
        assert f_divergence(P, P, kl_generator) == 0.0
        assert f_divergence(P, P, chi_squared_generator) == pytest.approx(0.0, abs=1e-15)

    @given(distribution_pairs())
    def test_generator_identities(self, pair):
        P, Q = pair
        assert f_divergence(P, Q, chi_squared_generator) == pytest.approx(
            chi_squared_divergence(P, Q), rel=1e-10, abs=1e-12)
        assert f_divergence(P, Q, hellinger_generator(3.0)) == pytest.approx(
            hellinger_p_divergence(P, Q, 3.0), rel=1e-10, abs=1e-12)

    def test_zero_mass_conventions(self):
        P, Q = DiscreteDistribution([0.5, 0.5]), DiscreteDistribution([1.0, 0.0])
        assert f_divergence(P, Q, chi_squared_generator) == math.inf
        # total variation generator |t - 1| / 2 has slope 1/2 at infinity
        tv = lambda t: abs(t - 1) / 2  # noqa: E731
        assert f_divergence(P, Q, tv, slope_at_infinity=0.5) == pytest.approx(0.5)

    def test_rejects_nonconvex_or_unanchored(self):
        P = DiscreteDistribution([0.5, 0.5])
        with pytest.raises(ValueError):
            f_divergence(P, P, lambda t: -t * t + 1)
        with pytest.raises(ValueError):
            f_divergence(P, P, lambda t: t * t)


class TestPushforward:
    def test_identity(self):
        P = DiscreteDistribution([0.2, 0.3, 0.5])
        assert np.allclose(pushforward(MarkovKernel.identity(3), P).masses, P.masses)

    def test_equal_rows(self):
        R = [0.1, 0.9]
        K = MarkovKernel([R, R, R])
        got = pushforward(K, DiscreteDistribution([0.2, 0.3, 0.5]))
        assert np.allclose(got.masses, R)

    def test_event_indicator_gives_bernoulli(self):
        P = DiscreteDistribution([0.1, 0.2, 0.3, 0.4])
        event = [True, False, True, False]
        got = pushforward(MarkovKernel.event_indicator(event), P)
        # enumerate the two output symbols directly
        expected = [sum(m for m, e in zip(P.masses, event) if not e),
                    sum(m for m, e in zip(P.masses, event) if e)]
        assert np.allclose(got.masses, expected)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            pushforward(MarkovKernel.identity(2), DiscreteDistribution([1.0]))


class TestDPI:
    def test_identity_kernel(self):
        P, Q = DiscreteDistribution([0.2, 0.8]), DiscreteDistribution([0.6, 0.4])
        after, before = dpi_check(MarkovKernel.identity(2), P, Q, "renyi", 3)
        assert after == pytest.approx(before, rel=1e-14)

    def test_single_output(self):
        P, Q = DiscreteDistribution([0.2, 0.8]), DiscreteDistribution([0.6, 0.4])
        after, before = dpi_check(MarkovKernel([[1.0], [1.0]]), P, Q, "chi_squared")
        assert after == 0.0 and before > 0

    def test_random_four_by_three(self, rng):
        for _ in range(200):
            K = random_kernel(rng, 4, 3)
            P, Q = random_distribution(rng, 4), random_distribution(rng, 4)
            after, before = dpi_check(K, P, Q, "renyi", 3)
            assert after <= before + 1e-12

    @settings(max_examples=200)
    @given(distribution_pairs(min_size=2), st.integers(1, 5), st.randoms(use_true_random=False),
           st.sampled_from([("renyi", 1.5), ("renyi", 10), ("hellinger", 2), ("chi_squared", None),
                            ("kl", None)]))
    def test_monotone_under_kernels(self, pair, k_out, r, sel):
        P, Q = pair
        rng = np.random.default_rng(r.randint(0, 2**32))
        K = random_kernel(rng, P.size, k_out)
        after, before = dpi_check(K, P, Q, *sel)
        assert after <= before + 1e-12

    def test_unknown_selector(self):
        P = DiscreteDistribution([0.5, 0.5])
        with pytest.raises(ValueError):
            dpi_check(MarkovKernel.identity(2), P, P, "total_variation")
        with pytest.raises(ValueError):
            dpi_check(MarkovKernel.identity(2), P, P, "renyi")


@given(distributions(positive=False))
def test_nonnegative_and_zero_on_diagonal(P):
    assert renyi_divergence(P, P, 2) == pytest.approx(0, abs=1e-12)
    assert chi_squared_divergence(P, P) == pytest.approx(0, abs=1e-12)
    assert hellinger_p_divergence(P, P, 1.5) == pytest.approx(0, abs=1e-12)
