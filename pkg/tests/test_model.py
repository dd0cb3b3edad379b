import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mpqkd_ad.model import (
    EZZ_EQUAL_OBSERVED,
    ModelDomainError,
    SystemParams,
    binary_entropy,
    click_probability,
    derive_channel,
    pair_rate,
    per_arm_transmittance,
    single_photon_pair_ratio,
    single_photon_x_stats,
    single_photon_z_error,
    z_pair_ratio,
    z_qber,
)

PD = 1.2e-8


def click_given_intensity(p_d, eta_s, mu, n_pulses):
    return 1 - (1 - 2 * p_d) * math.exp(-eta_s * mu * n_pulses)


def click_given_photons(p_d, eta_s, n_photons):
    return 1 - (1 - 2 * p_d) * (1 - eta_s) ** n_photons


class TestBinaryEntropy:
    def test_boundaries(self):
        assert binary_entropy(0.0) == 0.0
        assert binary_entropy(1.0) == 0.0
        assert binary_entropy(0.5) == 1.0

    def test_value(self):
        # 30-digit mpmath evaluation: 0.499915958164527995...
        assert binary_entropy(0.11) == pytest.approx(0.499916, abs=1e-6)

    def test_snaps_tiny_excursions(self):
        assert binary_entropy(-1e-16) == 0.0
        assert binary_entropy(1 + 1e-16) == 0.0

    @pytest.mark.parametrize("x", [-1e-12, 1.0 + 1e-12, 2.0, float("nan")])
    def test_domain(self, x):
        with pytest.raises(ModelDomainError):
            binary_entropy(x)

    @given(st.floats(0, 1))
    def test_symmetric(self, x):
        assert binary_entropy(x) == pytest.approx(binary_entropy(1 - x), abs=1e-12)


class TestParams:
    @pytest.mark.parametrize(
        "kwargs",
        [
            {"eta_d": 0.0},
            {"eta_d": 1.5},
            {"alpha": -0.1},
            {"p_d": 0.5},
            {"p_d": -1e-9},
            {"f": 0.99},
            {"delta": 0},
            {"delta": 2.5},
            {"e_d": 0.6},
            {"e_0": 1.5},
            {"e_zz_model": "bogus"},
            {"e_zz_model": 0.7},
        ],
    )
    def test_rejects(self, kwargs):
        with pytest.raises(ValueError):
            SystemParams(**kwargs)

    def test_defaults_match_table(self):
        p = SystemParams()
        assert (p.eta_d, p.alpha, p.p_d, p.f, p.delta) == (0.2, 0.2, 1.2e-8, 1.15, 10**6)


class TestTransmittance:
    def test_zero_length(self, table1):
        assert per_arm_transmittance(table1, 0) == 0.2

    def test_ten_db_arm(self, table1):
        assert per_arm_transmittance(table1, 100) == pytest.approx(0.02, rel=1e-14)

    def test_long(self, table1):
        # 0.2 * 10**-4.82 evaluated with mpmath at 40 digits
        assert per_arm_transmittance(table1, 482) == pytest.approx(3.02712250e-06, rel=1e-8)

    def test_negative(self, table1):
        with pytest.raises(ModelDomainError):
            per_arm_transmittance(table1, -1)


class TestClickProbability:
    def test_dark(self):
        assert click_probability(SystemParams(p_d=0), 0.02, 0.0) == 0.0

    @pytest.mark.parametrize("x", [1e-2, 1e-3, 1e-5])
    def test_small_signal(self, x):
        p = click_probability(SystemParams(p_d=0), 0.1, x / 0.1)
        assert abs(p - x) / x < 0.01

    def test_case_by_case_sum(self):
        params = SystemParams(p_d=PD)
        eta, mu = 0.02, 0.1
        # average over intensity settings 00, 01, 10, 11
        settings_ = [(0, 0), (0, 1), (1, 0), (1, 1)]
        oracle = sum(click_given_intensity(PD, eta, mu, a + b) for a, b in settings_) / 4
        assert click_probability(params, eta, mu) == pytest.approx(oracle, rel=1e-12)


class TestPairRate:
    def test_large_delta_limit(self):
        assert pair_rate(0.1, 10**6) == pytest.approx(0.05, abs=1e-9)

    def test_delta_one(self):
        p = 0.1
        assert pair_rate(p, 1) == pytest.approx(p * p / (1 + p), rel=1e-14)
        assert pair_rate(p, 1) == pytest.approx(9.0909e-3, rel=1e-4)

    def test_direct_formula(self):
        p, d = 0.1, 5
        direct = 1 / (1 / (p * (1 - (1 - p) ** d)) + 1 / p)
        assert pair_rate(p, d) == pytest.approx(direct, rel=1e-13)

    def test_zero_click(self):
        assert pair_rate(0.0, 10) == 0.0

    @given(st.floats(1e-6, 1.0), st.integers(1, 10**7))
    def test_bounded_by_half_p(self, p, d):
        r = pair_rate(p, d)
        assert 0 < r <= p / 2 * (1 + 1e-12)

    def test_monotone_grid(self):
        ps = np.linspace(0.001, 1.0, 40)
        ds = [1, 2, 3, 5, 10, 30, 100, 1000, 10**4, 10**6]
        grid = np.array([[pair_rate(float(p), d) for d in ds] for p in ps])
        assert np.all(np.diff(grid, axis=0) >= -1e-15)
        assert np.all(np.diff(grid, axis=1) >= -1e-15)

    @pytest.mark.parametrize("p", [1e-3, 0.01, 0.3, 1.0])
    def test_half_p_at_million(self, p):
        assert abs(pair_rate(p, 10**6) - p / 2) <= 1e-9


class TestZStatistics:
    def test_small_mu_ratio(self):
        # p ~ eta*mu for small signals, so r_s -> (1/8) (eta mu)^2 / (eta mu)^2 = 1/8
        params = SystemParams(p_d=0)
        eta, mu = 0.1, 1e-3
        p = click_probability(params, eta, mu)
        assert z_pair_ratio(params, eta, mu, p) == pytest.approx(1 / 8, rel=0.01)

    def test_ratio_reevaluation(self):
        params = SystemParams(p_d=PD)
        eta, mu = 0.02, 0.5
        p = click_probability(params, eta, mu)
        oracle = (1 / 8) * click_given_intensity(PD, eta, mu, 1) ** 2 / p**2
        assert z_pair_ratio(params, eta, mu, p) == pytest.approx(oracle, rel=1e-12)

    def test_ratio_sweep(self, table1):
        for L in range(0, 701, 25):
            eta = per_arm_transmittance(table1, L)
            for mu in np.linspace(0.01, 1.0, 12):
                p = click_probability(table1, eta, mu)
                assert 0 < z_pair_ratio(table1, eta, mu, p) <= 1

    def test_qber_no_dark_counts(self):
        params = SystemParams(p_d=0)
        p = click_probability(params, 0.02, 0.3)
        r_s = z_pair_ratio(params, 0.02, 0.3, p)
        assert z_qber(params, 0.02, 0.3, p, r_s) == 0.0

    @pytest.mark.parametrize("eta,mu", [(3e-6, 0.5), (0.02, 0.1), (1e-4, 0.3), (0.2, 1.0)])
    def test_qber_substituted_form(self, eta, mu):
        params = SystemParams(p_d=PD)
        p = click_probability(params, eta, mu)
        r_s = z_pair_ratio(params, eta, mu, p)
        closed = (
            2 * PD * click_given_intensity(PD, eta, mu, 2) / click_given_intensity(PD, eta, mu, 1) ** 2
        )
        assert z_qber(params, eta, mu, p, r_s) == pytest.approx(closed, rel=1e-9)

    def test_qber_grows_with_loss(self):
        params = SystemParams(p_d=PD)
        values = []
        for eta in (1e-3, 1e-4, 1e-5, 3e-6, 1e-6):
            p = click_probability(params, eta, 0.5)
            values.append(z_qber(params, eta, 0.5, p, z_pair_ratio(params, eta, 0.5, p)))
        assert values == sorted(values)
        assert values[-1] < 0.5

    def test_qber_out_of_domain(self):
        params = SystemParams(p_d=PD)
        eta, mu = 1e-8, 1e-3
        p = click_probability(params, eta, mu)
        with pytest.raises(ModelDomainError):
            z_qber(params, eta, mu, p, z_pair_ratio(params, eta, mu, p))


class TestSinglePhotonRatio:
    @pytest.mark.parametrize("eta,mu", [(3e-6, 0.5), (0.02, 0.1), (2e-4, 0.7)])
    def test_substituted_form(self, eta, mu):
        params = SystemParams(p_d=PD)
        p = click_probability(params, eta, mu)
        r_s = z_pair_ratio(params, eta, mu, p)
        p1 = mu * math.exp(-mu)
        closed = (p1 * click_given_photons(PD, eta, 1) / click_given_intensity(PD, eta, mu, 1)) ** 2
        assert single_photon_pair_ratio(params, eta, mu, p, r_s) == pytest.approx(closed, rel=1e-9)

    def test_noiseless_value(self):
        params = SystemParams(p_d=0)
        eta, mu = 0.02, 0.5
        p = click_probability(params, eta, mu)
        q = single_photon_pair_ratio(params, eta, mu, p, z_pair_ratio(params, eta, mu, p))
        expected = (0.5 * math.exp(-0.5) * 0.02) ** 2 / (1 - math.exp(-0.01)) ** 2
        assert q == pytest.approx(expected, rel=1e-10)
        assert q == pytest.approx(0.3716, abs=1e-3)

    def test_sweep(self, table1):
        for L in range(0, 601, 20):
            eta = per_arm_transmittance(table1, L)
            for mu in np.linspace(0.01, 1.0, 12):
                p = click_probability(table1, eta, mu)
                r_s = z_pair_ratio(table1, eta, mu, p)
                assert 0 <= single_photon_pair_ratio(table1, eta, mu, p, r_s) <= 1


class TestXStats:
    def test_no_dark_counts(self):
        params = SystemParams(p_d=0, e_d=0.04)
        y, e = single_photon_x_stats(params, 0.02, 0.03)
        assert y == 0.02 * 0.03 / 2
        assert e == 0.04

    def test_dark_dominated(self):
        params = SystemParams(p_d=1e-3, e_d=0.04, e_0=0.5)
        _, e = single_photon_x_stats(params, 1e-9, 1e-9)
        assert e == pytest.approx(0.5, abs=1e-4)

    def test_table_value(self):
        params = SystemParams(p_d=PD, e_d=0.04, e_0=0.5)
        _, e = single_photon_x_stats(params, 0.02, 0.02)
        assert e == pytest.approx(0.04, abs=1e-4)

    def test_nonpositive_transmittance(self, table1):
        with pytest.raises(ModelDomainError):
            single_photon_x_stats(table1, 0.0, 0.1)


class TestZSinglePhotonError:
    def test_no_dark_counts(self):
        assert single_photon_z_error(SystemParams(p_d=0), 0.01, 0.0) == 0.0

    def test_passthrough(self):
        assert single_photon_z_error(SystemParams(e_zz_model=EZZ_EQUAL_OBSERVED), 0.01, 0.01) == 0.01

    def test_fixed(self):
        assert single_photon_z_error(SystemParams(e_zz_model=0.03), 0.01, 0.2) == 0.03

    @pytest.mark.parametrize("eta", [3e-6, 1e-4, 0.02])
    def test_configuration_enumeration(self, eta):
        # one photon per side in total across the pair: the four Z configurations
        # (1) [10,01], (2) [01,10] put one photon in each round; (3) [00,11] and
        # (4) [11,00] put both photons in one round and leave a dark round.
        w = {
            1: click_given_photons(PD, eta, 1) * click_given_photons(PD, eta, 1),
            2: click_given_photons(PD, eta, 1) * click_given_photons(PD, eta, 1),
            3: 2 * PD * click_given_photons(PD, eta, 2),
            4: click_given_photons(PD, eta, 2) * 2 * PD,
        }
        oracle = (w[3] + w[4]) / sum(w.values())
        got = single_photon_z_error(SystemParams(p_d=PD), eta, 0.0)
        assert got == pytest.approx(oracle, rel=1e-7)


class TestDeriveChannel:
    def test_back_to_back(self, table1):
        ch = derive_channel(table1, 0.0, 0.5)
        assert ch.eta_s == 0.2
        assert ch.E_zz < 1e-6
        for name in ("p", "r_p", "r_s", "qbar11", "Y11", "e_xx", "e_zz"):
            assert math.isfinite(getattr(ch, name))

    def test_zero_mu(self, table1):
        with pytest.raises(ModelDomainError):
            derive_channel(table1, 100.0, 0.0)

    def test_pure(self, table1):
        assert derive_channel(table1, 300, 0.4) == derive_channel(table1, 300, 0.4)

    def test_no_dark_counts_limits(self):
        params = SystemParams(p_d=0, e_d=0.04)
        ch = derive_channel(params, 250, 0.3)
        assert ch.E_zz == 0.0
        assert ch.e_xx == 0.04

    def test_probability_sweep(self, table1):
        checked = 0
        for L, mu in itertools.product(range(0, 701, 20), np.geomspace(1e-3, 1.0, 15)):
            try:
                ch = derive_channel(table1, float(L), float(mu))
            except ModelDomainError:
                # only the observed Z error may leave its range (dark-count dominated)
                eta = per_arm_transmittance(table1, L)
                p = click_probability(table1, eta, mu)
                r_s = z_pair_ratio(table1, eta, mu, p)
                e = 0.25 * table1.p_d * click_given_intensity(PD, eta, mu, 2) / (r_s * p * p)
                assert 0.5 < e <= 1.0
                continue
            checked += 1
            for name in ("p", "r_p", "r_s", "E_zz", "qbar11", "Y11", "e_xx", "e_zz"):
                assert 0 <= getattr(ch, name) <= 1
            assert ch.r_p <= ch.p / 2 + 1e-12
        assert checked > 350

    @settings(max_examples=60, deadline=None)
    @given(st.floats(0, 450), st.floats(0.01, 1.0))
    def test_random_points_valid(self, L, mu):
        ch = derive_channel(SystemParams(), L, mu)
        assert 0 <= ch.E_zz <= 0.5
