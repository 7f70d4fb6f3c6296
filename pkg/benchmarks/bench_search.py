#!/usr/bin/env python3
"""Compare the numba kernels with the pure-Python fallback.

Each backend runs in its own subprocess because the backend flag is read
at import time. Both must produce the same certificate stream; the
script prints one JSON object with per-group timings and the speedup.

    python3 benchmarks/bench_search.py dihedral:8 quaternion:16 --repeat 3
"""
import argparse
import json
import os
import subprocess
import sys

DEFAULT_GROUPS = ["dihedral:8", "quaternion:8", "dihedral:12", "dihedral:16"]

WORKER = r"""
import hashlib, json, sys, time
from skewprod import backend, enumerate_skew_morphisms, parse_descriptor
G = parse_descriptor(sys.argv[1])
enumerate_skew_morphisms(parse_descriptor("cyclic:4"))  # warm-up (jit compile or cache load)
best = None
for _ in range(int(sys.argv[2])):
    t = time.perf_counter()
    res = enumerate_skew_morphisms(G)
    dt = time.perf_counter() - t
    best = dt if best is None else min(best, dt)
digest = hashlib.sha256("\n".join(s.to_json() for s in res.skew_morphisms).encode()).hexdigest()
print(json.dumps({"backend": backend(), "seconds": best, "count": len(res.skew_morphisms),
                  "nodes": res.search_stats["nodes"], "sha256": digest}))
"""


def run(group: str, disable: bool, repeat: int, timeout: float) -> dict:
    env = dict(os.environ, SKEWPROD_DISABLE_NUMBA="1" if disable else "0")
    proc = subprocess.run([sys.executable, "-c", WORKER, group, str(repeat)], env=env,
                          capture_output=True, text=True, timeout=timeout)
    if proc.returncode != 0:
        raise RuntimeError(proc.stderr.strip())
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("groups", nargs="*", default=DEFAULT_GROUPS)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--timeout", type=float, default=3600.0)
    args = ap.parse_args(argv)

    rows = []
    ok = True
    for g in args.groups:
        fast = run(g, False, args.repeat, args.timeout)
        slow = run(g, True, args.repeat, args.timeout)
        same = fast["sha256"] == slow["sha256"]
        ok &= same
        rows.append({"group": g, "count": fast["count"], "nodes": fast["nodes"],
                     "numba_s": round(fast["seconds"], 4), "python_s": round(slow["seconds"], 4),
                     "speedup": round(slow["seconds"] / max(fast["seconds"], 1e-9), 1),
                     "identical": same})
    print(json.dumps({"repeat": args.repeat, "results": rows}, indent=2))
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
