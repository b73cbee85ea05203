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
for seed in (1, 2, 3):
    out[f"n7_ppo_e001c2_s{seed}"] = run(f"n7_ppo_e001c2_s{seed}", "ppo", seed, 7,
                                        entropy_coef="0.001", max_grad_norm="2.0")
out["n4_ppo_e001c2_s0"] = run("n4_ppo_e001c2_s0", "ppo", 0, 4,
                              entropy_coef="0.001", max_grad_norm="2.0")
json.dump(out, open("/root/pkg/.pilot/sweep6.json", "w"), indent=1)
