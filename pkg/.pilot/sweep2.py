import json, time, numpy as np
from chanalloc import harness

def run(algo, seed, n_users=7, episodes=3000, **ov):
    base = {"algorithm": algo, "episodes": episodes, "num_users": str(n_users), "seed": seed}
    base.update({k: str(v) for k, v in ov.items()})
    t0 = time.perf_counter()
    r = harness.run_training(harness.load_config(None, base))
    rs = np.array([x.total_reward for x in r.records])
    return dict(final200=float(rs[-200:].mean()), mid=float(rs[1400:1600].mean()),
                secs=round(time.perf_counter()-t0, 1))

out = {}
jobs = [
    # criterion-5 re-check at N=4 with candidate defaults (incl. random/greedy refs)
    ("n4_ppo_cand_s0", "ppo", 0, dict(n_users=4, rollout_length=256, minibatch_size=64, entropy_coef="0.001")),
    # a2c variants at N=7 seed 1
    ("a2c_lr3e-3",      "a2c", 1, dict(actor_lr="3e-3")),
    ("a2c_lr3e-3_e003", "a2c", 1, dict(actor_lr="3e-3", entropy_coef="0.003")),
    ("a2c_r64_lr3e-3",  "a2c", 1, dict(rollout_length=64, actor_lr="3e-3")),
    ("a2c_r64_lr1e-3",  "a2c", 1, dict(rollout_length=64, actor_lr="1e-3")),
    # ppo candidate on other seeds
    ("ppo_cand_s2", "ppo", 2, dict(rollout_length=256, minibatch_size=64, entropy_coef="0.001")),
    ("ppo_cand_s3", "ppo", 3, dict(rollout_length=256, minibatch_size=64, entropy_coef="0.001")),
]
for name, algo, seed, ov in jobs:
    out[name] = run(algo, seed, **ov)
    print(name, out[name], flush=True)
json.dump(out, open("/root/pkg/.pilot/sweep2.json", "w"), indent=1)
