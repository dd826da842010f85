"""Smoke test for the pybandits extension module.

Build and install it first:

    maturin build --release -m crates/python/Cargo.toml -o dist
    pip install dist/pybandits-*.whl
    python python/smoke_test.py
"""

import json
import math
import sys

import pybandits as pb


def check(cond, what):
    if not cond:
        print(f"FAIL: {what}")
        sys.exit(1)
    print(f"ok: {what}")


def main():
    cfg = pb.Config(4, 2, 200.0, 0.5)
    env = pb.Environment.stochastic([0.9, 0.75, 0.5, 0.4], [0.5, 0.5, 0.6, 0.5], 0.5)

    ep = pb.run_episode("ucb_mb", cfg, env, seed=3)
    check(ep.budget_spent <= cfg.budget, "UCB-MB stays within budget")
    check(ep.stopping_time == len(ep.arms) + 1, "stopping time counts the unpaid round")
    check(len(ep.arms[0]) == 4, "UCB-MB opens with every arm")
    check(all(len(a) == 2 for a in ep.arms[1:]), "later rounds play K arms")
    again = pb.run_episode("ucb_mb", cfg, env, seed=3)
    check(again.gain == ep.gain, "same seed, same episode")

    p = pb.probabilities([0.0, 3.0, 0.5, -1.0, 2.0], 0.2, 2)
    check(abs(sum(p) - 2.0) < 1e-9 and max(p) <= 1.0, "probabilities sum to K and stay in [0, 1]")
    picked = pb.dependent_rounding(p, 2, seed=11)
    check(len(set(picked)) == 2, "dependent rounding returns K distinct arms")

    check(abs(pb.thm2_bound(200.0, 100.0, 10, 2, 0.5) - 213.0196303334401) < 1e-9, "thm2 bound value")
    check(pb.thm4_bound(5, 5, 100, 0.1) == 0.0, "thm4 vanishes at K = N")

    lb_cfg = pb.Config(8, 2, 400.0, 0.5)
    lb_env, good, eps = pb.Environment.lower_bound(lb_cfg, seed=5)
    check(len(good) == 2 and 0.0 < eps <= 0.25, "lower-bound instance")
    a_star, g_max = pb.oracle_gain(lb_cfg, lb_env)
    gamma = pb.tune_gamma_mb(g_max, 400.0, 8, 2, 0.5)
    ep = pb.run_episode("exp3_mb", lb_cfg, lb_env, seed=1, gamma=gamma)
    check(ep.gain <= g_max + 2.0 * math.sqrt(g_max) + 2, "Exp3.M.B gain is plausible against G_max")

    spec = {
        "config": {"n_arms": 4, "plays": 2, "budget": 300, "c_min": 0.5},
        "policy": {"type": "exp31_mb"},
        "environment": json.loads(env.to_json()),
        "replications": 20,
        "base_seed": 4,
    }
    report = pb.run(json.dumps(spec))
    check(len(report.gains) == 20, "run returns every replication")
    check(json.loads(report.to_json())["mean_regret"] == report.mean_regret, "report JSON round-trips")
    csv = pb.sweep(json.dumps(spec), [100.0, 200.0])
    check(len(csv.strip().splitlines()) == 3, "sweep gives a header and one row per budget")
    check("thm1" in pb.bounds(json.dumps(spec)), "bounds lists the stochastic bound")

    try:
        pb.Config(3, 4, 10.0, 0.5)
    except ValueError:
        check(True, "K > N is rejected with ValueError")
    else:
        check(False, "K > N is rejected with ValueError")

    print("smoke test passed")


if __name__ == "__main__":
    main()
