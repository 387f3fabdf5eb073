"""Compare the compiled (numba) and interpreted execution modes.

Each mode runs in its own subprocess because the mode is fixed at
import time by the CUSUMSEG_DISABLE_NUMBA environment variable. The
child segments the default synthetic phantom repeatedly and reports
timings; the parent prints a side-by-side table and the speedup.

Usage: python3 benchmarks/bench_modes.py [--repeats N]
"""

import argparse
import json
import os
import statistics
import subprocess
import sys
import time


def run_child(repeats: int) -> int:
    from cusumseg import (NUMBA_ENABLED, PhantomSpec, generate,
                          segment_image, working_image)

    stack, _ = generate(PhantomSpec())
    img = working_image(stack)

    start = time.perf_counter()
    res = segment_image(img)
    first_ms = (time.perf_counter() - start) * 1000.0

    warm = []
    for _ in range(repeats):
        start = time.perf_counter()
        segment_image(img)
        warm.append((time.perf_counter() - start) * 1000.0)

    json.dump({
        "mode": "numba" if NUMBA_ENABLED else "numpy",
        "first_call_ms": first_ms,
        "warm_median_ms": statistics.median(warm),
        "warm_min_ms": min(warm),
        "repeats": repeats,
        "steps": res.trace.steps,
        "change_points": len(res.trace.change_points),
    }, sys.stdout)
    return 0


def run_mode(disable: bool, repeats: int) -> dict:
    env = dict(os.environ)
    env["CUSUMSEG_DISABLE_NUMBA"] = "1" if disable else "0"
    out = subprocess.run(
        [sys.executable, os.path.abspath(__file__),
         "--child", "--repeats", str(repeats)],
        capture_output=True, text=True, env=env, check=True)
    return json.loads(out.stdout)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=20,
                    help="warm segmentations per mode (default 20)")
    ap.add_argument("--child", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args()

    if args.child:
        return run_child(args.repeats)

    rows = [run_mode(disable=False, repeats=args.repeats),
            run_mode(disable=True, repeats=args.repeats)]

    a, b = rows
    if (a["steps"], a["change_points"]) != (b["steps"], b["change_points"]):
        print("WARNING: modes disagree on the trajectory", file=sys.stderr)

    print(f"default phantom, 128x128, {a['steps']} steps, "
          f"{a['change_points']} change points, {args.repeats} repeats\n")
    header = f"{'mode':8} {'first call':>12} {'warm median':>12} {'warm min':>12}"
    print(header)
    print("-" * len(header))
    for r in rows:
        print(f"{r['mode']:8} {r['first_call_ms']:10.1f} ms "
              f"{r['warm_median_ms']:9.2f} ms {r['warm_min_ms']:9.2f} ms")
    speedup = b["warm_median_ms"] / a["warm_median_ms"]
    print(f"\nwarm speedup (numba over numpy): {speedup:.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
