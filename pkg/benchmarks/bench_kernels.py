"""Time the numba kernels against their numpy / interpreted fallbacks.

The path is fixed at import time, so each arm runs in its own interpreter
with ``NRSP_DISABLE_NUMBA`` set accordingly. Both arms must also produce
the same labels; a mismatch is reported and exits with status 1.

    python3 benchmarks/bench_kernels.py --size 321 481 --k 600 --repeat 5
"""
import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import hashlib, json, sys, time
import numpy as np
from nrsp import _accel, kernels
from nrsp.centroidx import BlockMeans, segment
from nrsp.clustering import ClusterParams, init_centroids_grid, grid_step
from nrsp.fixtures import two_tone
from nrsp.imagecore import rgb_to_lab

h, w, k, repeat = map(int, sys.argv[1:5])
rng = np.random.default_rng(0)
rgb, _ = two_tone(max(h, w), 0)
rgb = np.clip(rgb[:h, :w].astype(int) + rng.integers(-30, 31, (h, w, 3)), 0, 255).astype(np.uint8)
lab = rgb_to_lab(rgb)
step = grid_step(w, h, k)
cents = init_centroids_grid(lab, k)
side = 9
bm = BlockMeans(lab)
params = ClusterParams(k=k)

cases = {
    "slic_assign": lambda: kernels.slic_assign_kernel(lab, cents, step, (30.0 / step) ** 2),
    "block_map": lambda: kernels.block_map_kernel(bm.lab, bm.ref, bm.sat, side),
    "components": lambda: kernels.connected_components(rng_labels),
    "slic": lambda: segment("slic", lab, params),
    "centroid_slic": lambda: segment("slic", lab, params, centroidx=True),
    "snic": lambda: segment("snic", lab, params),
}
rng_labels = np.random.default_rng(1).integers(0, 4, (h, w))
out = {"numba": _accel.HAS_NUMBA, "ms": {}, "digest": {}}
for name, fn in cases.items():
    res = fn()  # warm-up, includes jit compilation
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append((time.perf_counter() - t) * 1e3)
    out["ms"][name] = float(np.median(times))
    arr = res[0] if isinstance(res, tuple) else res
    out["digest"][name] = hashlib.sha1(np.ascontiguousarray(arr).tobytes()).hexdigest()
print(json.dumps(out))
"""


def run_arm(disable, args):
    env = dict(os.environ, NRSP_DISABLE_NUMBA="1" if disable else "0")
    cmd = [sys.executable, "-c", WORKER, str(args.size[0]), str(args.size[1]), str(args.k), str(args.repeat)]
    proc = subprocess.run(cmd, env=env, capture_output=True, text=True, check=True)
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--size", type=int, nargs=2, default=(161, 241), metavar=("H", "W"))
    p.add_argument("--k", type=int, default=300)
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args(argv)

    jit = run_arm(False, args)
    ref = run_arm(True, args)
    if not jit["numba"]:
        print("numba is not available; both arms ran the fallback")
    print(f"{'kernel':<14} {'numba ms':>10} {'fallback ms':>12} {'speedup':>8}  same")
    bad = 0
    for name in jit["ms"]:
        a, b = jit["ms"][name], ref["ms"][name]
        same = jit["digest"][name] == ref["digest"][name]
        bad += not same
        print(f"{name:<14} {a:>10.1f} {b:>12.1f} {b / a:>7.1f}x  {'yes' if same else 'NO'}")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
