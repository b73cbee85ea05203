import json, time, numpy as np
from chanalloc import harness

def run(name, algo, seed, n_users, **ov):
    base = {"algorithm": algo, "episodes": 3000, "num_users": str(n_users), "seed": seed}
    base.update({k: str(v) for k, v in ov.items()})
    t0 = time.perf_counter()
    r = harness.run_training(harness.load_config(None, base))
    rs = np.array([x.total_reward for x in r.records])
    d = dict(final200=float(rs[-200:].mean()), mid=float(rs[1400:1600].mean()),
             secs=round(time.perf_counter()-t0, 1))
    print(name, d, flush=True)
    return d

out = {}
jobs = [
    ("n7_ppo_clip2_s1",   "ppo", 1, 7, dict(max_grad_norm="2.0")),
    ("n7_a2c_clip2_s3",   "a2c", 3, 7, dict(max_grad_norm="2.0")),
    ("n7_a2c_clip2_s2",   "a2c", 2, 7, dict(max_grad_norm="2.0")),
    ("n7_ppo_clip2_s2",   "ppo", 2, 7, dict(max_grad_norm="2.0")),
    ("n7_ppo_clip2_s3",   "ppo", 3, 7, dict(max_grad_norm="2.0")),
    ("n4_ppo_clip2_s0",   "ppo", 0, 4, dict(max_grad_norm="2.0")),
    ("n7_a2c_clip2_s1",   "a2c", 1, 7, dict(max_grad_norm="2.0")),
]
for name, algo, seed, n, ov in jobs:
    out[name] = run(name, algo, seed, n, **ov)
json.dump(out, open("/root/pkg/.pilot/sweep5.json", "w"), indent=1)
