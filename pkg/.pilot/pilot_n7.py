import json, time, numpy as np
from chanalloc import harness

out = {}
for seed in (1,):
    for algo in ("ppo", "a2c", "dqn", "dueling_dqn"):
        t0 = time.perf_counter()
        run = harness.run_training(harness.load_config(None, {
            "algorithm": algo, "episodes": 3000, "num_users": "7", "seed": seed}))
        rs = np.array([r.total_reward for r in run.records])
        out[f"{algo}_s{seed}"] = dict(
            final200=float(rs[-200:].mean()),
            first200=float(rs[:200].mean()),
            mid=float(rs[1400:1600].mean()),
            secs=round(time.perf_counter() - t0, 1),
        )
        print(algo, seed, out[f"{algo}_s{seed}"], flush=True)
json.dump(out, open("/root/pkg/.pilot/pilot_n7.json", "w"), indent=1)
