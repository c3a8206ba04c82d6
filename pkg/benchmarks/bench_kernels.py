"""Numba vs numpy timing for the three hot kernels.

    python3 benchmarks/bench_kernels.py [--bits 18] [--repeat 5]

Both paths are called directly, so MASKPROP_DISABLE_NUMBA has no effect here.
Every run also checks that the two paths agree bit for bit.
"""

import argparse
import random
import time

import numpy as np

from maskprop import _kernels as K
from maskprop.fuzz import random_gadget
from maskprop.gadget import elaborate


def best_of(fn, repeat):
    fn()  # warm-up (jit compile on first call)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def bench_fwht(bits, repeat):
    rng = np.random.default_rng(0)
    base = rng.integers(-4, 5, size=(4, 1 << bits), dtype=np.int64)
    return ("fwht_rows", f"4 x 2^{bits}",
            lambda: K.fwht_rows_numpy(base.copy()), lambda: K.fwht_rows_numba(base.copy()))


def bench_parity(bits, repeat):
    rng = np.random.default_rng(1)
    m = 6
    fx = rng.integers(0, 1 << m, size=1 << bits, dtype=np.int64)
    return ("parity_signs", f"2^{m} x 2^{bits}",
            lambda: K.parity_signs_numpy(fx, m), lambda: K.parity_signs_numba(fx, m))


def bench_eval(bits, repeat):
    rng = random.Random(2)
    nl = elaborate(random_gadget(rng, max_inputs=bits - 4, max_randoms=4, max_gates=60))
    while len(nl.inputs) + len(nl.randoms) < bits - 2:
        nl = elaborate(random_gadget(rng, max_inputs=bits - 4, max_randoms=4, max_gates=60))
    index, ops, a0, a1 = nl.kernel_arrays()
    n = len(nl.inputs) + len(nl.randoms)
    obs = np.array([index[nl.wire(o)] for o in nl.outputs], dtype=np.int64)
    args = (n, np.asarray(ops, np.int8), np.asarray(a0, np.int64), np.asarray(a1, np.int64), obs)
    return ("eval_codes", f"2^{n} assignments, {len(nl.gates)} gates",
            lambda: K.eval_codes_numpy(*args), lambda: K.eval_codes_numba(*args))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--bits", type=int, default=18)
    ap.add_argument("--repeat", type=int, default=5)
    a = ap.parse_args()
    if not hasattr(K, "fwht_rows_numba"):
        raise SystemExit("numba is not importable; nothing to compare")
    print(f"{'kernel':<14} {'size':<32} {'numpy ms':>10} {'numba ms':>10} {'speedup':>8}")
    for make in (bench_fwht, bench_parity, bench_eval):
        name, size, f_np, f_nb = make(a.bits, a.repeat)
        t_np, r_np = best_of(f_np, a.repeat)
        t_nb, r_nb = best_of(f_nb, a.repeat)
        assert np.array_equal(r_np, r_nb), f"{name}: paths disagree"
        print(f"{name:<14} {size:<32} {t_np * 1e3:>10.2f} {t_nb * 1e3:>10.2f} {t_np / t_nb:>7.1f}x")


if __name__ == "__main__":
    main()
