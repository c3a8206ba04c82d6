"""Ground truth by exhaustive enumeration of inputs and randoms."""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .gadget import Netlist, ObservationSpec
from .spectral import DyadicMatrix, Dyadic, walsh_from_truth_table

DEFAULT_BIT_CAP = 22


def default_cap() -> int:
    return int(os.environ.get("MASKPROP_BIT_CAP", DEFAULT_BIT_CAP))


class BitCapExceeded(RuntimeError):
    pass


def _check_cap(nl: Netlist, cap: int | None):
    cap = default_cap() if cap is None else cap
    bits = len(nl.inputs) + len(nl.randoms)
    if bits > cap:
        raise BitCapExceeded(f"{nl.name}: {bits} input+random bits exceed the cap of {cap}")


def eval_bits(nl: Netlist, assignment: dict[str, int]) -> dict[str, int]:
    """Plain F_2 evaluation; returns outputs, declared probes and every named
    wire."""
    vals = {}
    for w in nl.inputs + nl.randoms:
        if w not in assignment:
            raise KeyError(f"no value for wire {w!r}")
        vals[w] = int(assignment[w]) & 1
    for g in nl.gates:
        if g.op == "xor":
            vals[g.out] = vals[g.args[0]] ^ vals[g.args[1]]
        elif g.op == "and":
            vals[g.out] = vals[g.args[0]] & vals[g.args[1]]
        else:
            vals[g.out] = 1 if g.op == "true" else 0
    for name in nl.aliases:
        vals[name] = vals[nl.wire(name)]
    return vals


def _codes(nl: Netlist, wires: list[str]) -> np.ndarray:
    index, ops, a0, a1 = nl.kernel_arrays()
    n_bits = len(nl.inputs) + len(nl.randoms)
    return _kernels.eval_codes(n_bits, ops, a0, a1, [index[w] for w in wires])


@dataclass(frozen=True)
class DistTable:
    """Observed-tuple counts per input assignment; probability is
    ``counts / 2**n_randoms``."""

    inputs: tuple[str, ...]
    labels: tuple[str, ...]
    n_randoms: int
    counts: np.ndarray  # (2**len(inputs), 2**len(labels))

    @property
    def width(self) -> int:
        return len(self.labels)

    def probabilities(self, x: int) -> list[Dyadic]:
        return [Dyadic(int(c), self.n_randoms) for c in self.counts[x]]

    def to_text(self) -> str:
        n = len(self.inputs)
        head = [f"# inputs {' '.join(self.inputs) or '-'}",
                f"# observed {' '.join(self.labels) or '-'}",
                f"# scale 2^-{self.n_randoms}"]
        rows = []
        for x in range(self.counts.shape[0]):
            bits = format(x, f"0{n}b") if n else "-"
            rows.append(bits + " " + " ".join(str(int(c)) for c in self.counts[x]))
        return "\n".join(head + rows) + "\n"


def dist_table(nl: Netlist, obs: ObservationSpec, cap: int | None = None) -> DistTable:
    obs.validate(nl)
    _check_cap(nl, cap)
    n, r, w = len(nl.inputs), len(nl.randoms), len(obs)
    codes = _codes(nl, obs.wires(nl))
    x = np.arange(1 << (n + r), dtype=np.int64) >> r
    counts = np.bincount(x * (1 << w) + codes, minlength=(1 << n) << w).reshape(1 << n, 1 << w)
    return DistTable(nl.inputs, tuple(obs.labels()), r, counts)


def _input_index(nl: Netlist, assignment) -> int:
    if isinstance(assignment, (int, np.integer)):
        return int(assignment)
    if isinstance(assignment, dict):
        return int("".join(str(int(assignment[w]) & 1) for w in nl.inputs) or "0", 2)
    bits = list(assignment)
    if len(bits) != len(nl.inputs):
        raise ValueError("assignment length differs from the input count")
    return int("".join(str(int(b) & 1) for b in bits) or "0", 2)


def observed_distribution(nl: Netlist, obs: ObservationSpec, input_assignment,
                          cap: int | None = None) -> list[Dyadic]:
    """Exact distribution of the observed tuple for one input assignment,
    averaged over all random assignments."""
    return dist_table(nl, obs, cap).probabilities(_input_index(nl, input_assignment))


@dataclass(frozen=True)
class SupportWitness:
    inputs: tuple[str, ...]
    indices: frozenset[int]
    minimal: bool = True

    def __contains__(self, name):
        return name in self.inputs

    def __len__(self):
        return len(self.inputs)


def _depends_only_on(grid: np.ndarray, n: int, keep: set[int]) -> bool:
    ref = grid
    for axis in range(n):
        if axis not in keep:
            ref = ref.take([0], axis=axis)
    return bool(np.all(grid == ref))


def support_of_table(table: DistTable) -> SupportWitness:
    n = len(table.inputs)
    grid = table.counts.reshape((2,) * n + (-1,))
    keep = set(range(n))
    for i in range(n):
        if _depends_only_on(grid, n, keep - {i}):
            keep.discard(i)
    if not _depends_only_on(grid, n, keep):
        raise AssertionError("support verification failed")
    minimal = all(not _depends_only_on(grid, n, keep - {i}) for i in keep)
    return SupportWitness(tuple(table.inputs[i] for i in sorted(keep)), frozenset(keep), minimal)


def dependency_support(nl: Netlist, obs: ObservationSpec, cap: int | None = None) -> SupportWitness:
    """Smallest input set the observed distribution depends on.

    Inputs are dropped one at a time, each drop checked over all assignments;
    a final pass confirms no single remaining input can be dropped.
    """
    return support_of_table(dist_table(nl, obs, cap))


def oracle_simulatable(nl: Netlist, obs: ObservationSpec, d: int,
                       cap: int | None = None) -> tuple[bool, SupportWitness]:
    s = dependency_support(nl, obs, cap)
    return len(s) <= d, s


def function_table(nl: Netlist, cap: int | None = None) -> np.ndarray:
    """Output code for every input-then-random assignment."""
    _check_cap(nl, cap)
    return _codes(nl, [nl.wire(o) for o in nl.outputs])


def oracle_matrix(nl: Netlist, cap: int | None = None) -> DyadicMatrix:
    """Correlation matrix of inputs+randoms -> outputs, randoms as the low
    input wires."""
    fx = function_table(nl, cap)
    n = len(nl.inputs) + len(nl.randoms)
    return walsh_from_truth_table(fx, n, len(nl.outputs), max_inputs=max(n, 16))


def subsets(items, max_size: int, min_size: int = 0):
    for k in range(min_size, max_size + 1):
        yield from itertools.combinations(items, k)
