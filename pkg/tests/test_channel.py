"""Tests for the linear-optics channel model."""
import math

import numpy as np
import pytest

from scsqkd.channel import (ChannelModelError, ChannelParams, ProtocolParams,
                            WindowTally, arm_transmittance, b_window_prob,
                            detector_means, effective_prob, expected_tallies,
                            visibility, window_probs)

CHANNEL = ChannelParams(distance_km=100.0, alpha_f=0.2, eta_d=0.3,
                        p_d=1e-9, e_d=0.04)


class TestArmTransmittance:
    def test_reference_point(self):
        # 100 km link, 0.2 dB/km, 30% detectors: 10 dB over the 50 km arm.
        assert arm_transmittance(CHANNEL) == pytest.approx(0.03, rel=1e-12)

    def test_zero_distance_gives_detector_efficiency(self):
        chan = ChannelParams(0.0, 0.2, 0.3, 0.0, 0.0)
        assert arm_transmittance(chan) == 0.3

    def test_monotone_decreasing_in_distance(self):
        etas = [arm_transmittance(ChannelParams(d, 0.2, 0.3, 0.0, 0.0))
                for d in np.linspace(0.0, 300.0, 30)]
        assert all(x > y for x, y in zip(etas, etas[1:]))


class TestDetectorMeans:
    def test_vacuum_window_is_dark(self):
        assert detector_means("O", 0.1, 0.1, 0.03, 0.04) == (0.0, 0.0)

    def test_one_sided_windows_split_evenly(self):
        nu_l, nu_r = detector_means("Z_A", 0.1, 0.2, 0.03, 0.04)
        assert nu_l == nu_r == pytest.approx(0.03 * 0.2 / 2.0, rel=1e-12)
        nu_l, nu_r = detector_means("Z_B", 0.1, 0.2, 0.03, 0.04)
        assert nu_l == nu_r == pytest.approx(0.03 * 0.1 / 2.0, rel=1e-12)

    def test_both_coherent_compensated_reference(self):
        # Equal intensities: nu_R = eta * mu * (1 - V) = eta * mu * 2 e_d.
        nu_l, nu_r = detector_means("B", 0.1, 0.1, 0.03, 0.04)
        assert nu_r == pytest.approx(2.4e-4, rel=1e-12)
        assert nu_l == pytest.approx(0.03 * 0.1 * (2.0 - 2.0 * 0.04), rel=1e-12)

    def test_energy_conservation(self):
        # The two ports always share the total transmitted energy.
        for cos_d in (-1.0, -0.3, 0.0, 0.7, 1.0):
            nu_l, nu_r = detector_means("B", 0.1, 0.25, 0.03, 0.04, cos_delta=cos_d)
            assert nu_l + nu_r == pytest.approx(0.03 * (0.1 + 0.25), rel=1e-12)
            assert nu_l >= 0.0 and nu_r >= 0.0

    def test_perfect_visibility_extinguishes_right_port(self):
        _, nu_r = detector_means("B", 0.2, 0.2, 0.03, 0.0)
        assert nu_r == pytest.approx(0.0, abs=1e-18)

    def test_unknown_kind_raises(self):
        with pytest.raises(ChannelModelError):
            detector_means("X", 0.1, 0.1, 0.03, 0.04)

    def test_visibility_convention(self):
        assert visibility(0.04) == pytest.approx(0.92, rel=1e-15)


class TestEffectiveProb:
    def test_dark_count_reference(self):
        # nu_R = 0: only a dark count can fire the right detector.
        p = effective_prob(0.003, 0.0, 1e-9, "improved")
        assert p == pytest.approx(1e-9 * (1.0 - 1e-9) * math.exp(-0.003), rel=1e-12)

    def test_vanishing_signal_limit(self):
        # nu -> 0 in both arms: improved heralding tends to p_d (1 - p_d).
        p_d = 1e-6
        p = effective_prob(0.0, 0.0, p_d, "improved")
        assert p == pytest.approx(p_d * (1.0 - p_d), rel=1e-12)

    def test_baseline_is_symmetric_sum(self):
        p_imp = effective_prob(0.01, 0.002, 1e-9, "improved")
        p_mirror = effective_prob(0.002, 0.01, 1e-9, "improved")
        p_base = effective_prob(0.01, 0.002, 1e-9, "baseline")
        assert p_base == pytest.approx(p_imp + p_mirror, rel=1e-12)

    def test_probability_bounds(self):
        for nu_l, nu_r, p_d in ((0.0, 0.0, 0.0), (5.0, 5.0, 0.5), (0.1, 3.0, 1e-3)):
            for mode in ("improved", "baseline"):
                p = effective_prob(nu_l, nu_r, p_d, mode)
                assert 0.0 <= p <= 1.0

    def test_invalid_inputs_raise(self):
        with pytest.raises(ChannelModelError):
            effective_prob(-0.1, 0.0, 0.0)
        with pytest.raises(ChannelModelError):
            effective_prob(0.1, 0.0, 1.5)
        with pytest.raises(ChannelModelError):
            effective_prob(0.1, 0.0, 0.0, "other")


class TestBWindowProb:
    def test_improved_below_phase_averaged_baseline(self):
        # Compensation steers energy away from the heralding detector, so the
        # improved B-window probability is far below the baseline average.
        for mu in (0.01, 0.05, 0.2):
            p_imp = b_window_prob(mu, mu, 0.03, 0.04, 1e-9, "improved")
            p_base = b_window_prob(mu, mu, 0.03, 0.04, 1e-9, "baseline")
            assert p_imp < p_base

    def test_baseline_average_against_dense_grid(self):
        # The fixed 256-point midpoint rule agrees with a much denser grid.
        mu, eta, e_d, p_d = 0.1, 0.03, 0.04, 1e-9
        delta = (np.arange(1 << 14) + 0.5) * (2.0 * np.pi / (1 << 14))
        avg = eta * mu
        cross = visibility(e_d) * eta * mu * np.cos(delta)
        no_l = (1.0 - p_d) * np.exp(-(avg + cross))
        no_r = (1.0 - p_d) * np.exp(-(avg - cross))
        dense = float(np.mean((1.0 - no_r) * no_l + (1.0 - no_l) * no_r))
        assert b_window_prob(mu, mu, eta, e_d, p_d, "baseline") == pytest.approx(
            dense, rel=1e-13)


class TestWindowTally:
    def test_error_rate_is_exact_count_ratio(self):
        tally = WindowTally(n_O=3.0, n_B=7.0, n_Z=90.0)
        assert tally.M_s == 100.0
        assert tally.E_Z == pytest.approx(0.1, rel=1e-15)

    def test_empty_tally(self):
        tally = WindowTally(0.0, 0.0, 0.0)
        assert tally.M_s == 0.0 and tally.E_Z == 0.0

    def test_negative_counts_rejected(self):
        with pytest.raises(ChannelModelError):
            WindowTally(-1.0, 0.0, 0.0)


class TestProtocolParams:
    def test_probability_closure_enforced(self):
        with pytest.raises(ChannelModelError):
            ProtocolParams(p0=0.5, px=0.6, mu_xA=0.1, mu_xB=0.1, N=1)

    def test_px_open_interval(self):
        with pytest.raises(ChannelModelError):
            ProtocolParams(p0=0.0, px=1.0, mu_xA=0.1, mu_xB=0.1, N=1)

    def test_unknown_mode_rejected(self):
        with pytest.raises(ChannelModelError):
            ProtocolParams(p0=0.5, px=0.5, mu_xA=0.1, mu_xB=0.1, N=1, mode="x")


class TestExpectedTallies:
    def test_mode_leaves_o_and_z_invariant(self):
        proto_i = ProtocolParams(0.5, 0.5, 0.1, 0.1, 10**8, mode="improved")
        proto_b = ProtocolParams(0.5, 0.5, 0.1, 0.1, 10**8, mode="baseline")
        t_i = expected_tallies(proto_i, CHANNEL)
        t_b = expected_tallies(proto_b, CHANNEL)
        assert t_i.n_O == t_b.n_O
        assert t_i.n_Z == t_b.n_Z
        assert t_i.n_B < t_b.n_B

    def test_no_darks_no_misalignment_kills_error_windows(self):
        # Perfect visibility steers all B-window energy left; no dark counts
        # means O windows never herald: the raw key is error-free.
        chan = ChannelParams(50.0, 0.2, 0.3, 0.0, 0.0)
        proto = ProtocolParams(0.5, 0.5, 0.1, 0.1, 10**6)
        tally = expected_tallies(proto, chan)
        assert tally.n_O == 0.0
        assert tally.n_B == 0.0
        assert tally.n_Z > 0.0
        assert tally.E_Z == 0.0

    def test_counts_scale_linearly_with_n(self):
        small = expected_tallies(ProtocolParams(0.5, 0.5, 0.1, 0.1, 10**6), CHANNEL)
        large = expected_tallies(ProtocolParams(0.5, 0.5, 0.1, 0.1, 10**9), CHANNEL)
        for name in ("n_O", "n_B", "n_Z"):
            assert getattr(large, name) == pytest.approx(
                1e3 * getattr(small, name), rel=1e-12)

    def test_window_probs_consistent_with_tallies(self):
        proto = ProtocolParams(0.7, 0.3, 0.05, 0.08, 10**7)
        probs = window_probs(proto, CHANNEL)
        tally = expected_tallies(proto, CHANNEL)
        assert tally.n_O == pytest.approx(1e7 * 0.49 * probs["O"], rel=1e-12)
        assert tally.n_B == pytest.approx(1e7 * 0.09 * probs["B"], rel=1e-12)
        assert tally.n_Z == pytest.approx(
            1e7 * 0.21 * (probs["Z_A"] + probs["Z_B"]), rel=1e-12)

    def test_intensity_override(self):
        proto = ProtocolParams(0.5, 0.5, 0.1, 0.1, 10**6)
        override = expected_tallies(proto, CHANNEL, intensities=(0.2, 0.2))
        direct = expected_tallies(ProtocolParams(0.5, 0.5, 0.2, 0.2, 10**6), CHANNEL)
        assert override == direct
