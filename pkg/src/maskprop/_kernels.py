"""Integer hot loops: fast Walsh-Hadamard butterflies, parity sign tables and
exhaustive netlist evaluation.

Each kernel exists twice, a numba ``@njit`` version and a pure numpy version.
The module-level names dispatch to the numba path unless numba is missing or
``MASKPROP_DISABLE_NUMBA`` is set to a non-empty value other than ``0``.
Both paths return bit-identical results; the benchmark in ``benchmarks/``
compares their speed.
"""

import os

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    njit = None

_flag = os.environ.get("MASKPROP_DISABLE_NUMBA", "")
USE_NUMBA = njit is not None and _flag in ("", "0")

OP_XOR, OP_AND, OP_TRUE, OP_FALSE = 0, 1, 2, 3


# --- numpy reference path ---------------------------------------------------

def fwht_rows_numpy(a):
    """In-place unnormalized Walsh-Hadamard transform of every row of ``a``."""
    rows, size = a.shape
    h = 1
    while h < size:
        v = a.reshape(rows, size // (2 * h), 2, h)
        x = v[:, :, 0, :].copy()
        v[:, :, 0, :] += v[:, :, 1, :]
        v[:, :, 1, :] = x - v[:, :, 1, :]
        h *= 2
    return a


def _parity64(v):
    v = v ^ (v >> 32)
    v = v ^ (v >> 16)
    v = v ^ (v >> 8)
    v = v ^ (v >> 4)
    v = v ^ (v >> 2)
    v = v ^ (v >> 1)
    return v & 1


def parity_signs_numpy(fx, m):
    """Row ``w`` holds ``(-1)^{popcount(w & fx[x])}`` for every ``x``."""
    omegas = np.arange(1 << m, dtype=np.int64)[:, None]
    return 1 - 2 * _parity64(omegas & fx[None, :].astype(np.int64))


def eval_codes_numpy(n_bits, ops, arg0, arg1, observed):
    """Observed-wire code (MSB first) for every assignment of the first
    ``n_bits`` wires, assignments enumerated MSB first."""
    size = 1 << n_bits
    idx = np.arange(size, dtype=np.int64)
    vals = [((idx >> (n_bits - 1 - i)) & 1).astype(np.uint8) for i in range(n_bits)]
    one = np.ones(size, dtype=np.uint8)
    zero = np.zeros(size, dtype=np.uint8)
    for g in range(len(ops)):
        op = ops[g]
        if op == OP_XOR:
            vals.append(vals[arg0[g]] ^ vals[arg1[g]])
        elif op == OP_AND:
            vals.append(vals[arg0[g]] & vals[arg1[g]])
        elif op == OP_TRUE:
            vals.append(one)
        else:
            vals.append(zero)
    codes = np.zeros(size, dtype=np.int64)
    for w in observed:
        codes = (codes << 1) | vals[w]
    return codes


# --- numba path -------------------------------------------------------------

if njit is not None:

    @njit(cache=True)
    def fwht_rows_numba(a):
        rows, size = a.shape
        for r in range(rows):
            h = 1
            while h < size:
                for i in range(0, size, 2 * h):
                    for j in range(i, i + h):
                        x = a[r, j]
                        y = a[r, j + h]
                        a[r, j] = x + y
                        a[r, j + h] = x - y
                h *= 2
        return a

    @njit(cache=True)
    def parity_signs_numba(fx, m):
        n = fx.shape[0]
        out = np.empty((1 << m, n), dtype=np.int64)
        for w in range(1 << m):
            for x in range(n):
                v = w & fx[x]
                p = 0
                while v:
                    p ^= 1
                    v &= v - 1
                out[w, x] = 1 - 2 * p
        return out

    @njit(cache=True)
    def eval_codes_numba(n_bits, ops, arg0, arg1, observed):
        # bit-sliced: lane l of each uint64 word is assignment base + l
        n_gates = ops.shape[0]
        size = 1 << n_bits
        lanes = min(size, 64)
        zero = np.uint64(0)
        one = np.uint64(1)
        full = ~zero if lanes == 64 else np.uint64((1 << lanes) - 1)
        pattern = np.zeros(6, dtype=np.uint64)
        for s in range(6):
            for l in range(64):
                if (l >> s) & 1:
                    pattern[s] |= one << np.uint64(l)
        vals = np.zeros(n_bits + n_gates, dtype=np.uint64)
        codes = np.empty(size, dtype=np.int64)
        for base in range(0, size, lanes):
            for i in range(n_bits):
                s = n_bits - 1 - i
                if s < 6:
                    vals[i] = pattern[s] & full
                elif (base >> s) & 1:
                    vals[i] = full
                else:
                    vals[i] = zero
            for g in range(n_gates):
                op = ops[g]
                if op == 0:
                    vals[n_bits + g] = vals[arg0[g]] ^ vals[arg1[g]]
                elif op == 1:
                    vals[n_bits + g] = vals[arg0[g]] & vals[arg1[g]]
                elif op == 2:
                    vals[n_bits + g] = full
                else:
                    vals[n_bits + g] = zero
            for l in range(lanes):
                k = 0
                sh = np.uint64(l)
                for o in range(observed.shape[0]):
                    k = (k << 1) | np.int64((vals[observed[o]] >> sh) & one)
                codes[base + l] = k
        return codes

else:  # pragma: no cover
    fwht_rows_numba = parity_signs_numba = eval_codes_numba = None


# --- dispatch ---------------------------------------------------------------

def fwht_rows(a):
    """Transform rows of a C-contiguous 2-D integer array in place.

    Object arrays (arbitrary-precision numerators) always take the numpy path.
    """
    if USE_NUMBA and a.dtype == np.int64:
        return fwht_rows_numba(a)
    return fwht_rows_numpy(a)


def parity_signs(fx, m):
    fx = np.ascontiguousarray(fx, dtype=np.int64)
    if USE_NUMBA:
        return parity_signs_numba(fx, m)
    return parity_signs_numpy(fx, m)


def eval_codes(n_bits, ops, arg0, arg1, observed):
    ops = np.ascontiguousarray(ops, dtype=np.int8)
    arg0 = np.ascontiguousarray(arg0, dtype=np.int64)
    arg1 = np.ascontiguousarray(arg1, dtype=np.int64)
    observed = np.ascontiguousarray(observed, dtype=np.int64)
    if USE_NUMBA:
        return eval_codes_numba(n_bits, ops, arg0, arg1, observed)
    return eval_codes_numpy(n_bits, ops, arg0, arg1, observed)
