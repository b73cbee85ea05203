"""Deterministic random-stream derivation from a single master seed.

Every experiment consumes randomness through generators derived here, so one
master seed fixes user profiles, environment draws, network initialization,
action sampling, calibration and evaluation independently of each other.

Stream ids (appended to the master seed as SeedSequence entropy):

====================  ==============================================
``PROFILE``           per-user scenario vectors (distances, powers,
                      tolerable delays, complaint thresholds)
``ENV``               episode demands and fading; workers append
                      their worker index
``AGENT_INIT``        network weight initialization
``SAMPLE``            action sampling, minibatch shuffling, replay
                      sampling; workers append their worker index
``CALIBRATE``         Monte-Carlo calibration draws
``EVAL``              evaluation rollouts
====================  ==============================================
"""

import numpy as np

PROFILE = 0
ENV = 1
AGENT_INIT = 2
SAMPLE = 3
CALIBRATE = 4
EVAL = 5


def derive_rng(master_seed: int, *scope: int) -> np.random.Generator:
    """Return a Generator for stream (master_seed, *scope)."""
    if master_seed < 0:
        raise ValueError("master_seed must be non-negative")
    return np.random.default_rng(np.random.SeedSequence([int(master_seed), *map(int, scope)]))
