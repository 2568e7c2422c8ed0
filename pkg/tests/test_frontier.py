import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from qcorr import frontier, states
from qcorr.frontier import EnvelopeConfig, FrontierError
from qcorr.measures import correlation_report, discord_sym, vn_entropy


class TestFamilyCurves:
    @pytest.mark.parametrize("s", [0.3, 0.9231, 1.41, 1.9])
    def test_werner_eps_for_entropy(self, s):
        assert_allclose(vn_entropy(states.werner(frontier.werner_eps_for_entropy(s))), s, atol=1e-12)

    def test_werner_eps_endpoints(self):
        assert frontier.werner_eps_for_entropy(0.0) == 0.0
        assert frontier.werner_eps_for_entropy(2.0) == 1.0
        with pytest.raises(FrontierError):
            frontier.werner_eps_for_entropy(2.5)

    def test_mems_ree_r(self):
        r = frontier.mems_ree_r_for_entropy(0.2, 1.2)
        assert_allclose(vn_entropy(states.mems_ree(0.2, r)), 1.2, atol=1e-12)
        assert frontier.mems_ree_r_for_entropy(0.01, 1.5) is None

    def test_feasible_interval_edges(self):
        for s in (0.3, 1.2):
            a_lo, a_hi = frontier.mems_ree_feasible_a(s)
            assert frontier.mems_ree_r_for_entropy(a_lo, s) is not None
            assert frontier.mems_ree_r_for_entropy(a_hi, s) is not None
            assert frontier.mems_ree_r_for_entropy(min(a_hi + 1e-3, 1 / 3), s) is None or a_hi == 1 / 3

    def test_frontier_point_beats_grid(self):
        s = 0.6
        d, a, r = frontier.mems_ree_frontier_point(s)
        assert_allclose(vn_entropy(states.mems_ree(a, r)), s, atol=1e-10)
        a_lo, a_hi = frontier.mems_ree_feasible_a(s)
        for a_try in np.linspace(a_lo, a_hi, 7):
            r_try = frontier.mems_ree_r_for_entropy(a_try, s)
            assert discord_sym(states.mems_ree(a_try, r_try)) <= d + 1e-9

    def test_mems_ree_above_werner_low_entropy(self):
        d_r, _, _ = frontier.mems_ree_frontier_point(0.5)
        d_w = discord_sym(states.werner(frontier.werner_eps_for_entropy(0.5)))
        assert d_r > d_w


class TestXParams:
    def test_vector_roundtrip(self):
        p = states.XStateParams(0.4, 0.1, 0.2, 0.3, 0.2, 0.05)
        q = frontier.x_params_from_vector(frontier.x_vector_from_params(p))
        assert_allclose([q.rho11, q.rho22, q.rho33, q.rho44, q.rho14, q.rho23],
                        [0.4, 0.1, 0.2, 0.3, 0.2, 0.05], atol=1e-12)

    def test_any_vector_is_state(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            assert states.is_density(states.xstate(frontier.x_params_from_vector(rng.normal(size=6) * 3)))

    @pytest.mark.parametrize("s", [0.4, 1.7])
    def test_mix_to_entropy(self, s):
        rho = frontier.mix_to_entropy(states.rho_up(0.3, 0.6), s)
        assert_allclose(vn_entropy(rho), s, atol=1e-10)
        assert states.is_density(rho)


class TestEnvelope:
    def test_edges(self):
        assert_allclose(EnvelopeConfig(bin_count=4).edges, [0, 0.5, 1, 1.5, 2])
        assert_allclose(EnvelopeConfig("discord", 2).edges, [0, 0.5, 1])
        with pytest.raises(FrontierError):
            EnvelopeConfig("purity")

    def test_bin_dominates_families(self):
        config = EnvelopeConfig(bin_count=40, samples_per_bin=10, seed=1)
        b = frontier._envelope_bin((30, config))
        assert b.present and abs(b.S - b.target) < 0.5 * (b.hi - b.lo)
        d_w = discord_sym(states.werner(frontier.werner_eps_for_entropy(b.S)))
        assert b.D_sym >= d_w - 5e-3
        rep = correlation_report(states.xstate(b.params))
        assert_allclose([rep.S, rep.D_sym], [b.S, b.D_sym], atol=1e-9)

    def test_doubling_samples(self):
        d = [frontier._envelope_bin((12, EnvelopeConfig(bin_count=40, samples_per_bin=n, seed=3))).D_sym
             for n in (10, 20)]
        assert abs(d[0] - d[1]) < 5e-3

    def test_low_entropy_anchor(self):
        b = frontier._envelope_bin((0, EnvelopeConfig(bin_count=40, samples_per_bin=5)))
        assert b.D_sym > 0.98

    def test_monotone_pass_and_order(self):
        bins = frontier.mncms_envelope(EnvelopeConfig(bin_count=4, samples_per_bin=4, seed=2))
        assert [b.index for b in bins] == [0, 1, 2, 3]
        d = [b.D_sym for b in bins]
        assert all(x >= y for x, y in zip(d, d[1:]))

    def test_wrong_axis(self):
        with pytest.raises(FrontierError):
            frontier.mncms_envelope(EnvelopeConfig("discord"))
        with pytest.raises(FrontierError):
            frontier.amid_plane_bounds(EnvelopeConfig("entropy"))


class TestAmidPlane:
    def test_bounds_ordered(self):
        bins = frontier.amid_plane_bounds(EnvelopeConfig("discord", bin_count=5, samples_per_bin=8))
        for b in bins:
            assert 0 <= b.min_A <= b.max_A <= 2
            assert b.lower_points > 0 and b.upper_points > 0

    def test_level_set(self):
        p = frontier.rho_up_p_for_discord(0.1, 0.4)
        assert_allclose(discord_sym(states.rho_up(0.1, p)), 0.4, atol=1e-9)
        assert frontier.rho_up_p_for_discord(0.9, 0.9) is None

    def test_upper_at_dominates_pure(self):
        a, e, p = frontier.rho_up_upper_at(0.5)
        p0 = frontier.rho_up_p_for_discord(0.0, 0.5)
        from qcorr.measures import amid
        assert a >= amid(states.rho_up(0.0, p0)) - 1e-9
        assert_allclose(discord_sym(states.rho_up(e, p)), 0.5, atol=1e-8)


class TestSweeps:
    def test_sweep_family(self):
        recs = frontier.sweep_family("werner", [0.0, 0.5, {"eps": 1.0}])
        assert [r.params["eps"] for r in recs] == [0.0, 0.5, 1.0]
        assert_allclose(recs[0].report.D_sym, 1.0, atol=1e-9)
        assert_allclose(recs[2].report.S, 2.0)

    def test_sweep_rejects_domain_before_work(self):
        with pytest.raises(FrontierError):
            frontier.sweep_family("mems_ree", [(0.3, 0.9)])
        with pytest.raises(FrontierError):
            frontier.sweep_family("ghz", [0.1])

    def test_parallel_matches_serial(self):
        a = frontier.scatter_random(4, seed=5, jobs=1)
        b = frontier.scatter_random(4, seed=5, jobs=2)
        assert [r.report.values() for r in a] == [r.report.values() for r in b]

    def test_scatter_state_lookup(self):
        recs = frontier.scatter_random(2, seed=8)
        assert_allclose(vn_entropy(frontier.random_state_for(1, 8)), recs[1].report.S)


class TestSpread:
    def test_zero_sigma(self):
        out = frontier.monte_carlo_spread("werner", {"eps": 0.3}, {"eps": 0.0}, 5, seed=0)
        rep = correlation_report(states.werner(0.3))
        assert_allclose(out["S"], (rep.S, 0.0), atol=1e-12)
        assert_allclose(out["A"], (rep.A, 0.0), atol=1e-9)

    def test_first_order_error(self):
        h = 1e-5
        ds = (vn_entropy(states.werner(0.5 + h)) - vn_entropy(states.werner(0.5 - h))) / (2 * h)
        out = frontier.monte_carlo_spread("werner", {"eps": 0.5}, {"eps": 0.01}, 500, seed=4)
        assert abs(out["S"][1] - abs(ds) * 0.01) < 0.2 * abs(ds) * 0.01

    def test_rho_up_table_row(self):
        out = frontier.monte_carlo_spread("rho_up", {"eps": 0.1, "p": 0.8}, {"eps": 0.01, "p": 0.01},
                                          100, seed=2)
        assert 0 < out["D_sym"][1] < 0.05 and 0 < out["A"][1] < 0.05

    def test_clipping(self):
        out = frontier.monte_carlo_spread("werner", {"eps": 1.0}, {"eps": 0.2}, 20, seed=0)
        assert out["S"][0] <= 2.0

    def test_bad_sigma(self):
        with pytest.raises(FrontierError):
            frontier.monte_carlo_spread("werner", {"eps": 0.5}, {"q": 0.1}, 5, seed=0)


def test_measured_settings_consistent():
    for (eps, s_eps), (p, s_p) in frontier.MEASURED_RHO_UP:
        assert 0 <= eps <= 1 and 0.5 <= p <= 1 and s_eps > 0 and s_p > 0
    assert math.isclose(frontier.MEASURED_RHO_UP[0][1][0], 0.5)
