"""Benchmark of the compiled kernels against the plain-numpy fallback.

Run as `python -m cheegerdef.bench`.  Spawns one subprocess per mode so
each gets a clean import (the compilation switch is read at import
time), runs a fixed workload, and prints the timing comparison.  The
workload mirrors the hot paths of a verification run: metric variant
evaluation over a sample plan, a C^0/C^1 sweep block, and a geodesic
integration.
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time

__all__ = ["main", "workload"]


def workload(n_points: int = 60, geo_steps: int = 300) -> dict[str, float]:
    """Timed fixed workload; returns seconds per stage."""
    import numpy as np

    from . import _kernels as _k
    from ._jit import JIT_ENABLED
    from .scenarios import direction_pairs, get_scenario, sample_grid

    scenario = get_scenario("s2_band")
    code, par = scenario.code, scenario.params
    pts = sample_grid(scenario, n_points)
    dirs = direction_pairs(scenario, len(pts), 8, 42)

    # pay any compilation outside the timed sections
    _k.c0_block(code, par, _k.RESCALED, 0.1, _k.LIMIT, 0.0, pts[:2], dirs[:2], 1e-8)
    _k.c1_block(code, par, _k.RESCALED, 0.1, _k.LIMIT, 0.0, pts[:2], 1e-4, 1e-8)
    x0 = np.array([0.3, 0.9])
    v0 = np.array([1.0, 0.0])
    _k.geodesic_rk4(code, par, _k.LIMIT, 0.0, x0, v0, 2, 1e-3, 1e-4, False,
                    scenario.chart.lo, scenario.chart.hi,
                    scenario.chart.periodic.astype(np.int64), 1e-8)

    out: dict[str, float] = {"jit": bool(JIT_ENABLED), "points": len(pts)}
    t0 = time.perf_counter()
    for l in (0.2, 0.1, 0.05):
        _k.c0_block(code, par, _k.RESCALED, l, _k.LIMIT, 0.0, pts, dirs, 1e-8)
    out["c0_sweep"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    _k.c1_block(code, par, _k.RESCALED, 0.1, _k.LIMIT, 0.0, pts, 1e-4, 1e-8)
    out["c1_block"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    _k.geodesic_rk4(code, par, _k.LIMIT, 0.0, x0, v0 / np.sqrt(0.9), geo_steps,
                    1e-3, 1e-4, False, scenario.chart.lo, scenario.chart.hi,
                    scenario.chart.periodic.astype(np.int64), 1e-8)
    out["geodesic"] = time.perf_counter() - t0
    out["total"] = out["c0_sweep"] + out["c1_block"] + out["geodesic"]
    return out


def _run_child(disable_jit: bool, n_points: int, geo_steps: int) -> dict[str, float]:
    env = dict(os.environ)
    if disable_jit:
        env["CHEEGERDEF_NO_JIT"] = "1"
    else:
        env.pop("CHEEGERDEF_NO_JIT", None)
    script = (f"import json\nfrom cheegerdef.bench import workload\n"
              f"print(json.dumps(workload({n_points}, {geo_steps})))")
    proc = subprocess.run([sys.executable, "-c", script], env=env,
                          capture_output=True, text=True, check=True)
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(
        prog="python -m cheegerdef.bench",
        description="compare compiled kernels against the numpy fallback")
    ap.add_argument("--points", type=int, default=60,
                    help="sample plan size for the sweep stages")
    ap.add_argument("--geo-steps", type=int, default=300,
                    help="geodesic integration steps")
    args = ap.parse_args(argv)

    fast = _run_child(False, args.points, args.geo_steps)
    slow = _run_child(True, args.points, args.geo_steps)

    mode_fast = "jit" if fast["jit"] else "numpy"
    print(f"workload: {fast['points']} plan points, {args.geo_steps} geodesic steps")
    print(f"{'stage':<12} {mode_fast + ' [s]':>12} {'numpy [s]':>12} {'speedup':>9}")
    for stage in ("c0_sweep", "c1_block", "geodesic", "total"):
        ratio = slow[stage] / fast[stage] if fast[stage] > 0 else float("inf")
        print(f"{stage:<12} {fast[stage]:>12.4f} {slow[stage]:>12.4f} {ratio:>8.1f}x")
    if not fast["jit"]:
        print("note: compiled mode unavailable in this environment; "
              "both columns ran the numpy path")
    return 0


if __name__ == "__main__":
    sys.exit(main())
