"""Compare the numba and numpy simulation kernels.

Run as: python benchmarks/bench_backends.py
Backend selection happens at import time via FAIRSHARE_BACKEND, so each
backend is timed in a subprocess.
"""

import json
import os
import subprocess
import sys
import textwrap

_WORKLOAD = textwrap.dedent("""
    import json, time
    import fairshare as fs
    from fairshare.backend import active_backend

    params, prefs = fs.preset("facebook")
    theta = fs.Targeting(1.0, 0.0)

    cfg = fs.SimConfig(n_agents=100_000, trials=10, master_seed=7)
    t0 = time.perf_counter()
    res = fs.simulate_mass_model(prefs, params, theta, cfg)
    mass_s = time.perf_counter() - t0

    graph = fs.generate_synthetic_graph(10_000, 0.5, 0.72, 0.68, 27.0, seed=3)
    gcfg = fs.SimConfig(n_agents=graph.n, trials=10, master_seed=7)
    t0 = time.perf_counter()
    gres = fs.simulate_graph(graph, prefs, theta, gcfg, mode="one_to_one")
    graph_s = time.perf_counter() - t0

    print(json.dumps({
        "backend": active_backend(),
        "mass_model_s": round(mass_s, 3),
        "graph_s": round(graph_s, 3),
        "liked_total": int(res.liked.sum()),
        "graph_liked_total": int(gres.liked.sum()),
    }))
""")


def run(backend: str) -> dict:
    env = dict(os.environ, FAIRSHARE_BACKEND=backend)
    out = subprocess.run([sys.executable, "-c", _WORKLOAD], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main():
    results = {b: run(b) for b in ("numpy", "numba")}
    for b, r in results.items():
        print(f"{b:>6}: mass model {r['mass_model_s']:7.3f}s   "
              f"graph {r['graph_s']:7.3f}s")
    same = all(
        results["numpy"][k] == results["numba"][k]
        for k in ("liked_total", "graph_liked_total")
    )
    print("outputs identical across backends:", same)
    if not same:
        raise SystemExit(1)


if __name__ == "__main__":
    main()
