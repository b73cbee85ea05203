import json, time, numpy as np
from chanalloc import harness

out = {}
for seed in (2, 3, 1):  # seeds 2,3 first: they decide the compound ordering
    for algo in ("dqn", "dueling_dqn"):
        t0 = time.perf_counter()
        run = harness.run_training(harness.load_config(None, {
            "algorithm": algo, "episodes": 3000, "num_users": "7", "seed": seed}))
        rs = np.array([x.total_reward for x in run.records])
        out[f"{algo}_s{seed}"] = dict(final200=float(rs[-200:].mean()),
                                      mid=float(rs[1400:1600].mean()),
                                      secs=round(time.perf_counter()-t0, 1))
        print(algo, seed, out[f"{algo}_s{seed}"], flush=True)
        json.dump(out, open("/root/pkg/.pilot/rehearse_dqn.json", "w"), indent=1)
