import math

import numpy as np
import pytest

from chanalloc.radio import (
    Allocation,
    ChannelRealization,
    UnallocatedUserError,
    calibration_report,
    sample_channel_realization,
    transmission_delay,
    transmission_rate,
)
from conftest import make_radio


class TestConfigValidation:
    def test_rejects_nonpositive_bandwidth(self):
        with pytest.raises(ValueError, match="bandwidth"):
            make_radio(bandwidth_hz=0.0)

    def test_rejects_zero_power(self):
        with pytest.raises(ValueError, match="tx_power_w"):
            make_radio(powers=np.array([1.0, 0.0]))

    def test_rejects_wrong_vector_length(self):
        with pytest.raises(ValueError, match="distance_m"):
            make_radio(num_users=3, powers=np.ones(3), distances=np.ones(2))

    def test_noise_power_is_bandwidth_times_psd(self):
        cfg = make_radio(bandwidth_hz=5e6, noise_psd=1e-13)
        assert cfg.noise_power_w == 5e-7


class TestGain:
    def test_unit_distance_unit_fading(self):
        cfg = make_radio(num_users=1, num_channels=1, distances=np.array([1.0]), powers=np.array([1.0]))
        real = ChannelRealization.from_fading(cfg, np.array([[1.0]]))
        assert real.gain[0, 0] == 1.0

    def test_distance_ten_alpha_two(self):
        cfg = make_radio(num_users=1, num_channels=1, distances=np.array([10.0]), powers=np.array([1.0]))
        real = ChannelRealization.from_fading(cfg, np.array([[1.0]]))
        assert real.gain[0, 0] == pytest.approx(0.01, rel=1e-12)

    def test_fading_mean_is_one(self):
        # unit-mean exponential power fading: 1e6 samples within 1.0 +/- 0.01
        cfg = make_radio(num_users=100, num_channels=100, powers=np.ones(100), distances=np.ones(100))
        rng = np.random.default_rng(42)
        samples = np.concatenate([sample_channel_realization(cfg, rng).fading.ravel() for _ in range(100)])
        assert samples.size == 10**6
        assert abs(samples.mean() - 1.0) < 0.01

    def test_gain_factorization(self, rng):
        cfg = make_radio(num_users=3, num_channels=4, powers=np.ones(3),
                         distances=np.array([3.0, 11.0, 42.0]))
        real = sample_channel_realization(cfg, rng)
        ratio = real.gain / real.fading
        expected = cfg.distance_m ** -cfg.path_loss_exponent
        for m in range(4):
            np.testing.assert_allclose(ratio[:, m], expected, rtol=1e-12)

    def test_all_gains_positive(self, rng):
        cfg = make_radio(num_users=5, num_channels=3, powers=np.ones(5), distances=np.full(5, 20.0))
        for _ in range(50):
            assert np.all(sample_channel_realization(cfg, rng).gain > 0)

    def test_determinism_bit_identical(self):
        cfg = make_radio(num_users=4, num_channels=3, powers=np.ones(4), distances=np.full(4, 10.0))
        seqs = []
        for _ in range(2):
            gen = np.random.default_rng(77)
            seqs.append([sample_channel_realization(cfg, gen).gain for _ in range(5)])
        for a, b in zip(*seqs):
            assert np.array_equal(a, b)


class TestRate:
    def sole_occupant_setup(self, h):
        cfg = make_radio(num_users=1, num_channels=1, distances=np.array([1.0]), powers=np.array([1.0]))
        real = ChannelRealization.from_fading(cfg, np.array([[h]]))
        return cfg, real, Allocation(np.array([1]))

    def test_hand_computed_sole_occupant(self):
        # B=5 MHz, p=1 W, h=1e-8, sigma^2=1e-13 W/Hz: noise 5e-7 W, SINR 0.02
        cfg, real, alloc = self.sole_occupant_setup(1e-8)
        rate = transmission_rate(alloc, real, cfg, 0)
        assert rate == pytest.approx(5e6 * math.log2(1.02), rel=1e-12)
        assert rate == pytest.approx(1.4289e5, rel=1e-3)

    def test_interference_strictly_reduces_sinr(self):
        cfg = make_radio(num_users=2, num_channels=1, powers=np.array([1.0, 1.0]),
                         distances=np.array([1.0, 1.0]))
        real = ChannelRealization.from_fading(cfg, np.array([[2e-8], [3e-8]]))
        shared = Allocation(np.array([1, 1]))
        alone = Allocation(np.array([1, 0]))
        assert transmission_rate(shared, real, cfg, 0) < transmission_rate(alone, real, cfg, 0)

    def test_rate_monotone_in_gain(self):
        rates = [transmission_rate(a, r, c, 0) for h in (1e-9, 1e-8, 1e-7)
                 for c, r, a in [self.sole_occupant_setup(h)]]
        assert rates[0] < rates[1] < rates[2]

    def test_rate_monotone_in_own_power(self):
        rates = []
        for p in (0.5, 1.0, 2.0):
            cfg = make_radio(num_users=1, num_channels=1, powers=np.array([p]), distances=np.array([1.0]))
            real = ChannelRealization.from_fading(cfg, np.array([[1e-8]]))
            rates.append(transmission_rate(Allocation(np.array([1])), real, cfg, 0))
        assert rates[0] < rates[1] < rates[2]

    def test_rate_decreasing_in_interferer_power(self):
        rates = []
        for p1 in (0.5, 1.0, 2.0):
            cfg = make_radio(num_users=2, num_channels=1, powers=np.array([1.0, p1]),
                             distances=np.array([1.0, 1.0]))
            real = ChannelRealization.from_fading(cfg, np.array([[1e-8], [1e-8]]))
            rates.append(transmission_rate(Allocation(np.array([1, 1])), real, cfg, 0))
        assert rates[0] > rates[1] > rates[2]

    def test_sole_occupancy_upper_bound(self, rng):
        cfg = make_radio(num_users=4, num_channels=2, powers=rng.uniform(0.5, 2.0, 4),
                         distances=rng.uniform(5, 50, 4))
        for _ in range(25):
            real = sample_channel_realization(cfg, rng)
            channels = rng.integers(0, 3, size=4)
            if channels[0] == 0:
                channels[0] = 1
            crowded = Allocation(channels)
            alone = np.zeros(4, dtype=int)
            alone[0] = channels[0]
            bound = transmission_rate(Allocation(alone), real, cfg, 0)
            assert transmission_rate(crowded, real, cfg, 0) <= bound + 1e-9

    def test_unallocated_user_raises(self):
        cfg, real, _ = self.sole_occupant_setup(1e-8)
        with pytest.raises(UnallocatedUserError):
            transmission_rate(Allocation(np.array([0])), real, cfg, 0)


class TestDelay:
    def test_direct_division(self):
        assert transmission_delay(1e7, 1e8) == 0.1

    def test_zero_data(self):
        assert transmission_delay(0.0, 123.4) == 0.0

    def test_continues_rate_example(self):
        assert transmission_delay(2e7, 1.4289e5) == pytest.approx(139.97, abs=0.01)

    def test_nonpositive_rate_rejected(self):
        with pytest.raises(ValueError):
            transmission_delay(1.0, 0.0)
        with pytest.raises(ValueError):
            transmission_delay(1.0, -5.0)


class TestCalibration:
    def test_all_satisfied_is_degenerate(self, rng):
        cfg = make_radio(num_users=2, num_channels=2, powers=np.ones(2), distances=np.ones(2))
        report = calibration_report(cfg, [0.05, 0.05], (1.0, 2.0), rng)
        assert report.degenerate
        assert report.frac_dissatisfied == 0.0

    def test_all_dissatisfied_is_degenerate(self, rng):
        cfg = make_radio(num_users=2, num_channels=2, powers=np.ones(2), distances=np.full(2, 40.0))
        report = calibration_report(cfg, [0.05, 0.05], (1e7, 3e7), rng)
        assert report.degenerate
        assert report.frac_dissatisfied == 1.0

    def test_report_orders_quantiles(self, rng):
        cfg = make_radio(num_users=3, num_channels=3, powers=np.ones(3), distances=np.full(3, 20.0))
        report = calibration_report(cfg, [0.05] * 3, (1e6, 3e6), rng)
        assert report.ratio_min <= report.ratio_median <= report.ratio_max
        assert report.threshold_ratio == pytest.approx(math.log(2), rel=1e-12)

    def test_draw_floor_enforced(self, rng):
        cfg = make_radio()
        with pytest.raises(ValueError):
            calibration_report(cfg, [0.05, 0.05], (1.0, 2.0), rng, draws=100)
