import numpy as np
import pytest

from chanalloc.env import ScenarioConfig
from chanalloc.qos import QosProfile
from chanalloc.radio import RadioConfig


def make_radio(num_users=2, num_channels=3, bandwidth_hz=5e6, noise_psd=1e-13,
               alpha=2.0, powers=None, distances=None) -> RadioConfig:
    powers = powers if powers is not None else np.full(num_users, 1.0)
    distances = distances if distances is not None else np.full(num_users, 10.0)
    return RadioConfig(
        bandwidth_hz=bandwidth_hz,
        noise_psd_w_per_hz=noise_psd,
        path_loss_exponent=alpha,
        num_users=num_users,
        num_channels=num_channels,
        tx_power_w=powers,
        distance_m=distances,
    )


def make_scenario(num_users=2, num_channels=3, taus=None, thresholds=None, budget=5,
                  data_range=(1e6, 3e6), horizon=100, waste_penalty=0.1,
                  complaint_penalty=2.0, seed=0, **kwargs) -> ScenarioConfig:
    radio = make_radio(num_users=num_users, num_channels=num_channels,
                       **{k: kwargs.pop(k) for k in ("powers", "distances") if k in kwargs})
    taus = taus if taus is not None else np.full(num_users, 0.05)
    thresholds = thresholds if thresholds is not None else np.full(num_users, 5, dtype=int)
    qos = QosProfile(tolerable_delay_s=taus, complaint_threshold=thresholds,
                     complaint_budget=budget)
    return ScenarioConfig(
        radio=radio,
        qos=qos,
        data_bits_range=data_range,
        horizon=horizon,
        waste_penalty=waste_penalty,
        complaint_penalty=complaint_penalty,
        seed=seed,
        **kwargs,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
