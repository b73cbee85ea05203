"""QoS-driven downlink channel allocation: simulator, agents, harness."""

from .env import ChannelAllocationEnv, ScenarioConfig, decode_action, encode_action
from .harness import ExperimentConfig, load_config, run_training

__version__ = "0.1.0"

__all__ = [
    "ChannelAllocationEnv",
    "ScenarioConfig",
    "ExperimentConfig",
    "decode_action",
    "encode_action",
    "load_config",
    "run_training",
    "__version__",
]
