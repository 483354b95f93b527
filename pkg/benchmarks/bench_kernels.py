"""Time each hot kernel in its numba and numpy flavours.

    python benchmarks/bench_kernels.py [--repeat 5]

Numba timings exclude the first (compiling) call.
"""

import argparse
import time

import numpy as np

from mlbounds import ConvolutionalComponent, LinearCode, kernels
from mlbounds._accel import HAVE_NUMBA


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def cases(rng):
    k, n = 18, 48
    code = LinearCode(np.hstack([np.eye(k, dtype=np.uint8), rng.integers(0, 2, (k, n - k), dtype=np.uint8)]))
    gen = kernels.pack_rows(code.generator)
    mask = kernels.pack_rows((np.arange(n) < k)[None, :])[0]
    inv = kernels.pack_rows((np.arange(n) >= k)[None, :])[0]
    yield "span_histogram k=18 n=48", kernels.nb_span_histogram, kernels.np_span_histogram, (gen, mask, inv, k, n - k)

    nxt, par = ConvolutionalComponent.turbo_rsc_37_21().transition_table()
    yield "trellis_dp N=300", kernels.nb_trellis_dp, kernels.np_trellis_dp, (nxt, par, 300, 300, 300)

    small = LinearCode(np.hstack([np.eye(8, dtype=np.uint8), rng.integers(0, 2, (8, 16), dtype=np.uint8)]))
    indptr, indices = kernels.supports_csr(small.codewords()[1:])
    v = 1.0 + rng.standard_normal((20_000, 24))
    yield "decode_metrics 20000 x 255", kernels.nb_decode_metrics, kernels.np_decode_metrics, (v, indptr, indices)

    wide = LinearCode(np.hstack([np.eye(14, dtype=np.uint8), rng.integers(0, 2, (14, 18), dtype=np.uint8)]))
    indptr, indices = kernels.supports_csr(wide.codewords()[1:])
    v = 1.0 + rng.standard_normal((2_000, 32))
    yield "decode_metrics 2000 x 16383", kernels.nb_decode_metrics, kernels.np_decode_metrics, (v, indptr, indices)

    big = kernels.pack_rows(small.codewords()[1:])[:, 0]
    yield "pair_profiles M=255 n=24", kernels.nb_pair_profiles, kernels.np_pair_profiles, (big, 24)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    if not HAVE_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare")
    rng = np.random.default_rng(0)
    print(f"{'kernel':32s} {'numba [s]':>10s} {'numpy [s]':>10s} {'speed-up':>9s}")
    for name, nb_fn, np_fn, call_args in cases(rng):
        a = nb_fn(*call_args)
        b = np_fn(*call_args)
        same = all(np.allclose(x, y) for x, y in zip(a, b)) if isinstance(a, tuple) else np.allclose(a, b)
        if not same:
            raise SystemExit(f"{name}: numba and numpy results differ")
        t_nb = best_of(lambda: nb_fn(*call_args), args.repeat)
        t_np = best_of(lambda: np_fn(*call_args), args.repeat)
        print(f"{name:32s} {t_nb:10.4f} {t_np:10.4f} {t_np / t_nb:8.1f}x")


if __name__ == "__main__":
    main()
