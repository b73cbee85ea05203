import json, time, numpy as np
from chanalloc import harness

def run(algo, seed, n_users, episodes=3000, **ov):
    base = {"algorithm": algo, "episodes": episodes, "num_users": str(n_users), "seed": seed}
    base.update({k: str(v) for k, v in ov.items()})
    t0 = time.perf_counter()
    r = harness.run_training(harness.load_config(None, base))
    rs = np.array([x.total_reward for x in r.records])
    return dict(final200=float(rs[-200:].mean()), mid=float(rs[1400:1600].mean()),
                secs=round(time.perf_counter()-t0, 1))

out = {}
jobs = [
    # final-defaults verification, clipping active
    ("n4_ppo_s0",  "ppo", 0, 4, {}),
    ("n7_a2c_s1",  "a2c", 1, 7, {}),
    ("n7_a2c_s2",  "a2c", 2, 7, {}),
    ("n7_a2c_s3",  "a2c", 3, 7, {}),
    ("n7_ppo_s1",  "ppo", 1, 7, {}),
    ("n7_ppo_s2",  "ppo", 2, 7, {}),
    ("n7_ppo_s3",  "ppo", 3, 7, {}),
]
for name, algo, seed, n, ov in jobs:
    out[name] = run(algo, seed, n, **ov)
    print(name, out[name], flush=True)
json.dump(out, open("/root/pkg/.pilot/sweep4.json", "w"), indent=1)
