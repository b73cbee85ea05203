import json, time, numpy as np
from chanalloc import harness

def run(algo, seed, **ov):
    base = {"algorithm": algo, "episodes": 3000, "num_users": "7", "seed": seed}
    base.update({k: str(v) for k, v in ov.items()})
    t0 = time.perf_counter()
    r = harness.run_training(harness.load_config(None, base))
    rs = np.array([x.total_reward for x in r.records])
    return dict(final200=float(rs[-200:].mean()), mid=float(rs[1400:1600].mean()),
                first200=float(rs[:200].mean()), secs=round(time.perf_counter()-t0, 1))

out = {}
variants = [
    ("ppo_ent001",        "ppo", dict(entropy_coef="0.001")),
    ("ppo_r256_ent001",   "ppo", dict(rollout_length=256, minibatch_size=64, entropy_coef="0.001")),
    ("ppo_r256",          "ppo", dict(rollout_length=256, minibatch_size=64)),
    ("ppo_r256_e8_ent001","ppo", dict(rollout_length=256, minibatch_size=64, epochs=8, entropy_coef="0.001")),
    ("a2c_ent001",        "a2c", dict(entropy_coef="0.001")),
    ("a2c_lr1e-3",        "a2c", dict(actor_lr="1e-3")),
    ("a2c_lr1e-3_ent001", "a2c", dict(actor_lr="1e-3", entropy_coef="0.001")),
]
for name, algo, ov in variants:
    out[name] = run(algo, 1, **ov)
    print(name, out[name], flush=True)
json.dump(out, open("/root/pkg/.pilot/sweep_onpolicy.json", "w"), indent=1)
