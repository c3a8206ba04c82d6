import os
import random
import subprocess
import sys

import numpy as np
import pytest

from maskprop import _kernels as K
from maskprop.fuzz import random_gadget
from maskprop.gadget import elaborate

needs_numba = pytest.mark.skipif(not hasattr(K, "fwht_rows_numba"), reason="numba missing")


def naive_wht(row):
    n = len(row)
    return np.array([sum(int(row[x]) * (-1) ** bin(g & x).count("1") for x in range(n))
                     for g in range(n)])


@pytest.mark.parametrize("bits", [0, 1, 3, 6])
def test_fwht_numpy_matches_naive(bits):
    a = np.random.default_rng(bits).integers(-5, 6, size=(3, 1 << bits), dtype=np.int64)
    out = K.fwht_rows_numpy(a.copy())
    for r in range(3):
        assert np.array_equal(out[r], naive_wht(a[r]))


def test_fwht_object_dtype():
    a = np.array([[1 << 70, 1]], dtype=object)
    out = K.fwht_rows(a.copy())
    assert list(out[0]) == [(1 << 70) + 1, (1 << 70) - 1]


@needs_numba
@pytest.mark.parametrize("bits", [1, 5, 10])
def test_fwht_paths_agree(bits):
    a = np.random.default_rng(bits).integers(-9, 10, size=(4, 1 << bits), dtype=np.int64)
    assert np.array_equal(K.fwht_rows_numpy(a.copy()), K.fwht_rows_numba(a.copy()))


@needs_numba
def test_parity_signs_paths_agree():
    fx = np.random.default_rng(3).integers(0, 1 << 5, size=256, dtype=np.int64)
    ref = K.parity_signs_numpy(fx, 5)
    assert np.array_equal(ref, K.parity_signs_numba(fx, 5))
    assert ref[0].tolist() == [1] * 256


@needs_numba
def test_eval_codes_paths_agree():
    rng = random.Random(4)
    for _ in range(25):
        nl = elaborate(random_gadget(rng, max_inputs=5, max_randoms=3, max_gates=15))
        index, ops, a0, a1 = nl.kernel_arrays()
        n = len(nl.inputs) + len(nl.randoms)
        obs = np.array([index[w] for w in nl.wires], dtype=np.int64)[:8]
        args = (n, np.asarray(ops, np.int8), np.asarray(a0, np.int64),
                np.asarray(a1, np.int64), obs)
        assert np.array_equal(K.eval_codes_numpy(*args), K.eval_codes_numba(*args))


def test_eval_codes_against_python_evaluation():
    from maskprop.oracle import eval_bits
    rng = random.Random(5)
    for _ in range(10):
        nl = elaborate(random_gadget(rng, max_inputs=4, max_randoms=2, max_gates=10))
        index, ops, a0, a1 = nl.kernel_arrays()
        src = nl.inputs + nl.randoms
        n = len(src)
        wires = [nl.wire(o) for o in nl.outputs]
        codes = K.eval_codes_numpy(n, np.asarray(ops, np.int8), np.asarray(a0, np.int64),
                                   np.asarray(a1, np.int64),
                                   np.array([index[w] for w in wires], dtype=np.int64))
        for x in range(1 << n):
            vals = eval_bits(nl, {w: (x >> (n - 1 - i)) & 1 for i, w in enumerate(src)})
            code = int("".join(str(vals[w]) for w in wires) or "0", 2)
            assert codes[x] == code


def test_env_flag_selects_numpy_path():
    env = dict(os.environ, MASKPROP_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", "from maskprop import _kernels; print(_kernels.USE_NUMBA)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "False"


@needs_numba
@pytest.mark.parametrize("n_bits", [0, 1, 5, 6, 7, 9])
def test_eval_codes_lane_boundaries(n_bits):
    # gates: xor of the first and last source, and of that with a constant
    ops = np.array([0, 2, 0, 1], dtype=np.int8) if n_bits else np.array([2, 3, 1], dtype=np.int8)
    if n_bits:
        a0 = np.array([0, 0, n_bits, n_bits], dtype=np.int64)
        a1 = np.array([n_bits - 1, 0, n_bits + 1, n_bits - 1], dtype=np.int64)
    else:
        a0 = np.array([0, 0, 0], dtype=np.int64)
        a1 = np.array([0, 0, 1], dtype=np.int64)
    obs = np.arange(n_bits + len(ops), dtype=np.int64)
    assert np.array_equal(K.eval_codes_numpy(n_bits, ops, a0, a1, obs),
                          K.eval_codes_numba(n_bits, ops, a0, a1, obs))
