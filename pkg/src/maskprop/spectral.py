"""Exact Walsh/Fourier machinery over dyadic rationals.

Conventions used everywhere in the package:

* wire 0 is the most significant bit of a row/column index;
* correlation matrices are stored normalized, entry ``(w, a)`` equal to
  ``2^-n * sum_x (-1)^(w.f(x) xor a.x)``, never the integer spectrum;
* a bit-vector distribution is stored by its parity coefficients
  ``T(g) = sum_x p(x) (-1)^(g.x)``, so ``T(0) == 1``.

Numbers are ``numerator / 2**exponent`` with no rounding anywhere. Matrices
and vectors keep one shared exponent and an integer numerator array (int64
while it provably cannot overflow, Python ints otherwise).
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import _kernels

DEFAULT_MAX_INPUTS = 16
_SAFE = 1 << 62


class MalformedFunctionError(ValueError):
    """A truth table does not define a total function."""


class DimensionError(ValueError):
    """Operand interfaces do not line up."""


class NotInvertibleError(ValueError):
    """A bit matrix is singular over F_2."""


# --- bit helpers --------------------------------------------------------------

def index_to_bits(index: int, n: int) -> tuple[int, ...]:
    return tuple((index >> (n - 1 - i)) & 1 for i in range(n))


def bits_to_index(bits: Iterable[int]) -> int:
    k = 0
    for b in bits:
        k = (k << 1) | (int(b) & 1)
    return k


def _log2(size: int) -> int:
    if size < 1 or size & (size - 1):
        raise DimensionError(f"dimension {size} is not a power of two")
    return size.bit_length() - 1


# --- scalars --------------------------------------------------------------------

@functools.total_ordering
@dataclass(frozen=True, eq=False)
class Dyadic:
    """The exact number ``numerator / 2**exponent`` in canonical form."""

    numerator: int
    exponent: int = 0

    def __post_init__(self):
        n, e = int(self.numerator), int(self.exponent)
        if e < 0:
            n <<= -e
            e = 0
        if n == 0:
            e = 0
        else:
            tz = min((n & -n).bit_length() - 1, e)
            n >>= tz
            e -= tz
        object.__setattr__(self, "numerator", n)
        object.__setattr__(self, "exponent", e)

    @classmethod
    def coerce(cls, value) -> "Dyadic":
        if isinstance(value, Dyadic):
            return value
        if isinstance(value, (int, np.integer)):
            return cls(int(value))
        if isinstance(value, str):
            value = Fraction(value)
        if isinstance(value, Fraction):
            den = value.denominator
            if den & (den - 1):
                raise ValueError(f"{value} is not dyadic")
            return cls(value.numerator, den.bit_length() - 1)
        raise TypeError(f"cannot interpret {value!r} as a dyadic rational")

    def to_fraction(self) -> Fraction:
        return Fraction(self.numerator, 1 << self.exponent)

    def _pair(self, other):
        o = Dyadic.coerce(other)
        e = max(self.exponent, o.exponent)
        return self.numerator << (e - self.exponent), o.numerator << (e - o.exponent), e

    def __add__(self, other):
        try:
            a, b, e = self._pair(other)
        except TypeError:
            return NotImplemented
        return Dyadic(a + b, e)

    __radd__ = __add__

    def __sub__(self, other):
        try:
            a, b, e = self._pair(other)
        except TypeError:
            return NotImplemented
        return Dyadic(a - b, e)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        try:
            o = Dyadic.coerce(other)
        except TypeError:
            return NotImplemented
        return Dyadic(self.numerator * o.numerator, self.exponent + o.exponent)

    __rmul__ = __mul__

    def __neg__(self):
        return Dyadic(-self.numerator, self.exponent)

    def __abs__(self):
        return Dyadic(abs(self.numerator), self.exponent)

    def __eq__(self, other):
        try:
            o = Dyadic.coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.numerator == o.numerator and self.exponent == o.exponent

    def __lt__(self, other):
        try:
            a, b, _ = self._pair(other)
        except TypeError:
            return NotImplemented
        return a < b

    def __hash__(self):
        return hash(self.to_fraction())

    def __str__(self):
        if self.exponent == 0:
            return str(self.numerator)
        return f"{self.numerator}/2^{self.exponent}"

    def __repr__(self):
        return f"Dyadic({self})"


# --- exact integer array helpers ------------------------------------------------

def _maxabs(a: np.ndarray) -> int:
    if a.size == 0:
        return 0
    return int(max(abs(int(a.max())), abs(int(a.min()))))


def _shrink(a: np.ndarray) -> np.ndarray:
    """Return an int64 array when every entry fits, else an object array."""
    if a.dtype == np.int64:
        return a
    if a.dtype != object:
        return a.astype(np.int64)
    if _maxabs(a) < _SAFE:
        return a.astype(np.int64)
    return a


def _canonical(num: np.ndarray, exp: int) -> tuple[np.ndarray, int]:
    num = _shrink(np.asarray(num))
    if exp <= 0:
        if exp < 0:
            num = _shrink(num.astype(object) * (1 << -exp))
        return num, 0
    if not num.any():
        return np.zeros_like(num), 0
    if num.dtype == np.int64:
        acc = int(np.bitwise_or.reduce(num.ravel()))
    else:
        acc = functools.reduce(lambda x, y: x | int(y), num.flat, 0)
    if acc & 1:
        return num, exp
    tz = min((acc & -acc).bit_length() - 1, exp)
    if tz:
        num = num // (1 << tz)
    return num, exp - tz


def _matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    inner = max(a.shape[-1], 1)
    if a.dtype == b.dtype == np.int64 and _maxabs(a) * _maxabs(b) * inner < _SAFE:
        return a @ b
    return _shrink(np.dot(a.astype(object), b.astype(object)))


def _kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.dtype == b.dtype == np.int64 and _maxabs(a) * _maxabs(b) < _SAFE:
        return np.kron(a, b)
    return _shrink(np.kron(a.astype(object), b.astype(object)))


def _scale_to(num: np.ndarray, exp: int, target: int) -> np.ndarray:
    if target == exp:
        return num
    factor = 1 << (target - exp)
    if num.dtype == np.int64 and _maxabs(num) * factor < _SAFE:
        return num * factor
    return num.astype(object) * factor


def _entries_to_array(entries, ndim: int) -> tuple[np.ndarray, int]:
    arr = np.array(entries, dtype=object)
    if arr.ndim != ndim:
        raise DimensionError(f"expected a {ndim}-d grid of entries")
    ds = [Dyadic.coerce(v) for v in arr.flat]
    exp = max((d.exponent for d in ds), default=0)
    num = np.array([d.numerator << (exp - d.exponent) for d in ds], dtype=object)
    return num.reshape(arr.shape), exp


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


# --- matrices and vectors ---------------------------------------------------------

class DyadicMatrix:
    """Exact ``2^m x 2^n`` correlation matrix; rows are output parities,
    columns input parities."""

    __slots__ = ("num", "exp", "in_wires", "out_wires")

    def __init__(self, num, exp: int = 0):
        num = np.asarray(num)
        if num.ndim != 2:
            raise DimensionError("a correlation matrix is two-dimensional")
        num, exp = _canonical(num, int(exp))
        self.num = _frozen(num)
        self.exp = exp
        self.out_wires = _log2(num.shape[0])
        self.in_wires = _log2(num.shape[1])

    @classmethod
    def from_entries(cls, rows) -> "DyadicMatrix":
        num, exp = _entries_to_array(rows, 2)
        return cls(num, exp)

    @classmethod
    def identity(cls, n: int) -> "DyadicMatrix":
        return cls(np.eye(1 << n, dtype=np.int64))

    @property
    def shape(self) -> tuple[int, int]:
        return self.num.shape

    @property
    def T(self) -> "DyadicMatrix":
        return DyadicMatrix(self.num.T, self.exp)

    def __getitem__(self, key) -> Dyadic:
        i, j = key
        return Dyadic(int(self.num[i, j]), self.exp)

    def to_fractions(self) -> list[list[Fraction]]:
        d = 1 << self.exp
        return [[Fraction(int(v), d) for v in row] for row in self.num]

    def rows_as_str(self) -> list[list[str]]:
        return [[str(Dyadic(int(v), self.exp)) for v in row] for row in self.num]

    def format(self) -> str:
        cells = self.rows_as_str()
        width = max((len(c) for row in cells for c in row), default=1)
        return "\n".join(" ".join(c.rjust(width) for c in row) for row in cells)

    def __matmul__(self, other: "DyadicMatrix") -> "DyadicMatrix":
        return compose(self, other)

    def __eq__(self, other):
        if not isinstance(other, DyadicMatrix):
            return NotImplemented
        return (self.shape == other.shape and self.exp == other.exp
                and bool(np.array_equal(self.num, other.num)))

    def __hash__(self):
        return hash((self.shape, self.exp, self.num.tobytes() if self.num.dtype != object
                     else tuple(self.num.flat)))

    def __repr__(self):
        return f"DyadicMatrix({self.out_wires}<-{self.in_wires}:\n{self.format()})"


class FourierVector:
    """A pseudo-Boolean function over ``n_bits`` wires in the parity basis."""

    __slots__ = ("num", "exp", "n_bits")

    def __init__(self, num, exp: int = 0):
        num = np.asarray(num)
        if num.ndim != 1:
            raise DimensionError("a Fourier vector is one-dimensional")
        num, exp = _canonical(num, int(exp))
        self.num = _frozen(num)
        self.exp = exp
        self.n_bits = _log2(num.shape[0])

    @classmethod
    def from_entries(cls, coefficients) -> "FourierVector":
        num, exp = _entries_to_array(coefficients, 1)
        return cls(num, exp)

    @property
    def coefficients(self) -> tuple[Dyadic, ...]:
        return tuple(Dyadic(int(v), self.exp) for v in self.num)

    def __getitem__(self, gamma: int) -> Dyadic:
        return Dyadic(int(self.num[gamma]), self.exp)

    def __len__(self):
        return self.num.shape[0]

    def is_distribution(self) -> bool:
        if self[0] != 1:
            return False
        return all(0 <= p <= 1 for p in to_probabilities(self))

    def __eq__(self, other):
        if not isinstance(other, FourierVector):
            return NotImplemented
        return (self.n_bits == other.n_bits and self.exp == other.exp
                and bool(np.array_equal(self.num, other.num)))

    def __hash__(self):
        return hash((self.exp, tuple(int(v) for v in self.num)))

    def __repr__(self):
        return "FourierVector(" + ", ".join(str(c) for c in self.coefficients) + ")"


class BitMatrix:
    """Square matrix over F_2, stored as a 0/1 uint8 array."""

    def __init__(self, rows):
        a = np.asarray(rows, dtype=np.uint8) & 1
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionError("bit matrix must be square")
        self.bits = _frozen(a)

    @property
    def n(self) -> int:
        return self.bits.shape[0]

    def _eliminate(self):
        n = self.n
        aug = np.concatenate([self.bits.copy(), np.eye(n, dtype=np.uint8)], axis=1)
        for col in range(n):
            pivots = np.nonzero(aug[col:, col])[0]
            if pivots.size == 0:
                return None
            p = col + pivots[0]
            if p != col:
                aug[[col, p]] = aug[[p, col]]
            for r in range(n):
                if r != col and aug[r, col]:
                    aug[r] ^= aug[col]
        return aug[:, n:]

    def is_invertible(self) -> bool:
        return self._eliminate() is not None

    def inverse(self) -> "BitMatrix":
        inv = self._eliminate()
        if inv is None:
            raise NotInvertibleError("bit matrix is singular over F_2")
        return BitMatrix(inv)

    def __matmul__(self, other):
        if isinstance(other, BitMatrix):
            return BitMatrix((self.bits.astype(np.int64) @ other.bits) & 1)
        v = np.asarray(other, dtype=np.int64)
        return tuple(int(b) for b in (self.bits.astype(np.int64) @ v) & 1)

    def apply_index(self, x: int) -> int:
        """Image of the input index ``x`` (MSB-first bit vector)."""
        return bits_to_index(self @ index_to_bits(x, self.n))

    @classmethod
    def random_invertible(cls, n: int, rng) -> "BitMatrix":
        while True:
            m = cls(rng.integers(0, 2, size=(n, n)))
            if m.is_invertible():
                return m

    def __eq__(self, other):
        return isinstance(other, BitMatrix) and bool(np.array_equal(self.bits, other.bits))

    def __repr__(self):
        return f"BitMatrix({self.bits.tolist()})"


# --- correlation matrices ----------------------------------------------------------

def _table_array(table, n: int, m: int) -> np.ndarray:
    size = 1 << n
    if isinstance(table, Mapping):
        missing = [x for x in range(size) if x not in table]
        if missing:
            raise MalformedFunctionError(
                f"truth table undefined at input {missing[0]:0{max(n, 1)}b}")
        extra = [x for x in table if not 0 <= x < size]
        if extra:
            raise MalformedFunctionError(f"input {extra[0]} outside F_2^{n}")
        fx = np.array([table[x] for x in range(size)], dtype=np.int64)
    else:
        fx = np.asarray(list(table), dtype=np.int64)
        if fx.shape != (size,):
            raise MalformedFunctionError(f"expected {size} outputs, got {fx.shape[0]}")
    if fx.size and (fx.min() < 0 or fx.max() >= (1 << m)):
        raise MalformedFunctionError(f"output value outside F_2^{m}")
    return fx


def walsh_from_truth_table(table, n: int, m: int, *, method: str = "fast",
                           max_inputs: int = DEFAULT_MAX_INPUTS) -> DyadicMatrix:
    """Correlation matrix of the function ``x -> table[x]`` over F_2^n -> F_2^m.

    ``table`` is a mapping or sequence from input index to output index, both
    MSB first. ``method="naive"`` evaluates the defining double sum directly;
    the default runs one fast Walsh-Hadamard transform per output parity.
    """
    if n > max_inputs:
        raise ValueError(f"{n} input wires exceeds the limit of {max_inputs}")
    fx = _table_array(table, n, m)
    if method == "naive":
        xs = np.arange(1 << n, dtype=np.int64)
        signs = _kernels.parity_signs_numpy(fx, m)
        chi = _kernels.parity_signs_numpy(xs, n)
        return DyadicMatrix(signs @ chi.T, n)
    if method != "fast":
        raise ValueError(f"unknown method {method!r}")
    spectrum = np.ascontiguousarray(_kernels.parity_signs(fx, m))
    _kernels.fwht_rows(spectrum)
    return DyadicMatrix(spectrum, n)


def compose(second: DyadicMatrix, first: DyadicMatrix) -> DyadicMatrix:
    """Matrix of "run ``first``, then ``second``"."""
    if first.out_wires != second.in_wires:
        raise DimensionError(
            f"cannot feed {first.out_wires} wires into {second.in_wires}")
    return DyadicMatrix(_matmul(second.num, first.num), second.exp + first.exp)


def tensor(a: DyadicMatrix, b: DyadicMatrix) -> DyadicMatrix:
    """Parallel composition; ``a``'s wires are the more significant ones."""
    return DyadicMatrix(_kron(a.num, b.num), a.exp + b.exp)


def walsh_of_linear(m: BitMatrix) -> DyadicMatrix:
    """Permutation matrix of ``x -> Mx``: a single 1 per column ``j``, in the
    row ``i`` with ``j = M^T i``."""
    inv_t = BitMatrix(m.inverse().bits.T)
    size = 1 << m.n
    out = np.zeros((size, size), dtype=np.int64)
    for j in range(size):
        out[inv_t.apply_index(j), j] = 1
    return DyadicMatrix(out)


def orthogonality_defect(w: DyadicMatrix) -> str | None:
    """``None`` when ``W W^T = I`` exactly, else the reason it fails."""
    if w.shape[0] != w.shape[1]:
        return f"matrix is {w.shape[0]}x{w.shape[1]}, not square"
    if compose(w, w.T) != DyadicMatrix.identity(w.in_wires):
        return "W W^T differs from the identity"
    return None


def is_orthogonal(w: DyadicMatrix) -> bool:
    return orthogonality_defect(w) is None


# --- distributions -------------------------------------------------------------

def apply(w: DyadicMatrix, t: FourierVector) -> FourierVector:
    """Push a distribution through a circuit: ``T_Y = W T_X``."""
    if t.n_bits != w.in_wires:
        raise DimensionError(f"vector has {t.n_bits} bits, matrix expects {w.in_wires}")
    return FourierVector(_matmul(w.num, t.num[:, None])[:, 0], w.exp + t.exp)


def uniform(n: int) -> FourierVector:
    if n < 0:
        raise ValueError("negative bit count")
    v = np.zeros(1 << n, dtype=np.int64)
    v[0] = 1
    return FourierVector(v)


def constant(bits) -> FourierVector:
    """Point mass on ``bits`` (a 0/1 sequence or a binary string)."""
    if isinstance(bits, str):
        bits = [int(c) for c in bits]
    bits = [int(b) & 1 for b in bits]
    s = bits_to_index(bits)
    gammas = np.arange(1 << len(bits), dtype=np.int64)
    return FourierVector(1 - 2 * _kernels._parity64(gammas & s))


def joint(a: FourierVector, b: FourierVector) -> FourierVector:
    """Distribution of two independent blocks, ``a`` on the high wires."""
    return FourierVector(_kron(a.num, b.num), a.exp + b.exp)


def dot(f: FourierVector, g: FourierVector) -> Dyadic:
    if f.n_bits != g.n_bits:
        raise DimensionError("vectors over different bit counts")
    total = sum(int(x) * int(y) for x, y in zip(f.num, g.num))
    return Dyadic(total, f.exp + g.exp)


def _fwht_exact(num: np.ndarray) -> np.ndarray:
    a = np.array(num, dtype=num.dtype if num.dtype == object else np.int64)
    if a.dtype == np.int64 and _maxabs(a) * a.size >= _SAFE:
        a = a.astype(object)
    a = a.reshape(1, -1).copy()
    _kernels.fwht_rows(a)
    return a[0]


def to_probabilities(t: FourierVector) -> list[Dyadic]:
    """Inverse expansion ``p(x) = 2^-n sum_g T(g) (-1)^(g.x)``.

    Invalid distributions are returned as computed; check with
    :meth:`FourierVector.is_distribution`.
    """
    p = _fwht_exact(t.num)
    return [Dyadic(int(v), t.exp + t.n_bits) for v in p]


def from_probabilities(probs: Sequence) -> FourierVector:
    num, exp = _entries_to_array(list(probs), 1)
    _log2(num.shape[0])
    return FourierVector(_fwht_exact(_shrink(num)), exp)


def factor_check(t: FourierVector, k: int):
    """Split ``t`` as ``T1 (x) T2`` over the first ``k`` wires and the rest.

    Returns the pair, or ``None`` when no such product exists. For
    distributions the factors are the two marginals.
    """
    n = t.n_bits
    if not 0 < k < n:
        raise ValueError(f"split point {k} must lie strictly inside 0..{n}")
    grid = t.num.reshape(1 << k, 1 << (n - k))
    if t[0] == 1:
        left = FourierVector(grid[:, 0], t.exp)
        right = FourierVector(grid[0, :], t.exp)
    else:
        nz = np.argwhere(grid != 0)
        if nz.size == 0:
            left, right = uniform(k), FourierVector(np.zeros(1 << (n - k), dtype=np.int64))
        else:
            i, j = (int(v) for v in nz[0])
            pivot = int(grid[i, j])
            if abs(pivot) & (abs(pivot) - 1):
                return None
            sign = 1 if pivot > 0 else -1
            shift = abs(pivot).bit_length() - 1
            left = FourierVector(grid[:, j], t.exp)
            right = FourierVector(_shrink(grid[i, :].astype(object) * sign), shift)
    if joint(left, right) != t:
        return None
    return left, right


# --- truth table text format -------------------------------------------------------

def parse_truth_table(text: str) -> tuple[dict[int, int], int, int]:
    """Read ``<input bits> <output bits>`` lines (``#`` starts a comment)."""
    table: dict[int, int] = {}
    n = m = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2 or any(set(p) - {"0", "1"} for p in parts):
            raise MalformedFunctionError(f"line {lineno}: expected '<bits> <bits>'")
        x, y = parts
        if n is None:
            n, m = len(x), len(y)
        elif (len(x), len(y)) != (n, m):
            raise MalformedFunctionError(f"line {lineno}: inconsistent widths")
        key = int(x, 2)
        if key in table:
            raise MalformedFunctionError(f"line {lineno}: input {x} defined twice")
        table[key] = int(y, 2)
    if n is None:
        raise MalformedFunctionError("empty truth table")
    return table, n, m


def format_truth_table(table, n: int, m: int) -> str:
    fx = _table_array(table, n, m)
    return "".join(f"{x:0{n}b} {int(y):0{m}b}\n" if n else f" {int(y):0{m}b}\n"
                   for x, y in enumerate(fx))
