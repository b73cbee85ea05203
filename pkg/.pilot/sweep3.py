import json, time, numpy as np
from chanalloc import harness

def run(algo, seed, n_users, **ov):
    base = {"algorithm": algo, "episodes": 3000, "num_users": str(n_users), "seed": seed}
    base.update({k: str(v) for k, v in ov.items()})
    t0 = time.perf_counter()
    r = harness.run_training(harness.load_config(None, base))
    rs = np.array([x.total_reward for x in r.records])
    return dict(final200=float(rs[-200:].mean()), mid=float(rs[1400:1600].mean()),
                secs=round(time.perf_counter()-t0, 1))

out = {}
jobs = [
    ("n4_ppo_ent002_s0", "ppo", 0, 4, dict(rollout_length=256, minibatch_size=64, entropy_coef="0.002")),
    ("n4_ppo_ent003_s0", "ppo", 0, 4, dict(rollout_length=256, minibatch_size=64, entropy_coef="0.003")),
    ("a2c_lr3e-3_s2", "a2c", 2, 7, dict(actor_lr="3e-3")),
    ("a2c_lr3e-3_s3", "a2c", 3, 7, dict(actor_lr="3e-3")),
    ("n7_ppo_ent003_s1", "ppo", 1, 7, dict(rollout_length=256, minibatch_size=64, entropy_coef="0.003")),
    ("n7_ppo_ent002_s1", "ppo", 1, 7, dict(rollout_length=256, minibatch_size=64, entropy_coef="0.002")),
]
for name, algo, seed, n, ov in jobs:
    out[name] = run(algo, seed, n, **ov)
    print(name, out[name], flush=True)
json.dump(out, open("/root/pkg/.pilot/sweep3.json", "w"), indent=1)
