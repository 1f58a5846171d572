#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-NumPy fallback.

Times the four hot kernels on realistic shapes (full-width spectrometer
frames, Monte Carlo frame batches) and prints per-call medians plus the
compiled/fallback speedup.  Run from a built checkout:

    python benchmarks/bench_kernels.py
    python benchmarks/bench_kernels.py --pixels 3648 --batch 256 --repeat 200
"""

import argparse
import statistics
import time

import numpy as np

from wmsense._kernels import _fallback

try:
    from wmsense._kernels import _core
except ImportError:
    _core = None


def time_call(fn, args, repeat):
    samples = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        samples.append(time.perf_counter() - t0)
    return statistics.median(samples)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pixels", type=int, default=3648, help="pixels per frame")
    ap.add_argument("--batch", type=int, default=128, help="frames per centroid batch")
    ap.add_argument("--repeat", type=int, default=300, help="timing repetitions")
    args = ap.parse_args()

    rng = np.random.default_rng(7)
    lam = 750.0 + np.arange(args.pixels) * (200.0 / max(args.pixels - 1, 1))
    tau = 2e-4
    sin_tl = np.sin(tau * lam)
    cos_tl = np.cos(tau * lam)
    psd = np.exp(-0.5 * ((lam - 840.0) / 22.0) ** 2) + 1e-9
    cos_c, sin_c = np.cos(0.37), np.sin(0.37)
    counts = rng.poisson(2000.0, args.pixels).astype(np.float64)
    frames = rng.poisson(2000.0, (args.batch, args.pixels)).astype(np.float64)

    cases = [
        ("sin2_weights", (sin_tl, cos_tl, psd, cos_c, sin_c)),
        ("sin2_centroid", (lam, sin_tl, cos_tl, psd, cos_c, sin_c)),
        ("centroid_sums", (lam, counts, True)),
        ("centroid_batch", (lam, frames, 1040.0, False)),
    ]

    if _core is None:
        print("compiled extension not available; timing fallback only")

    width = max(len(name) for name, _ in cases)
    header = f"{'kernel':<{width}}  {'fallback':>12}  {'compiled':>12}  {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for name, call_args in cases:
        t_fb = time_call(getattr(_fallback, name), call_args, args.repeat)
        if _core is not None:
            t_c = time_call(getattr(_core, name), call_args, args.repeat)
            ratio = t_fb / t_c if t_c > 0 else float("inf")
            print(
                f"{name:<{width}}  {t_fb * 1e6:>10.2f}us  {t_c * 1e6:>10.2f}us"
                f"  {ratio:>7.2f}x"
            )
        else:
            print(f"{name:<{width}}  {t_fb * 1e6:>10.2f}us  {'-':>12}  {'-':>8}")


if __name__ == "__main__":
    main()
