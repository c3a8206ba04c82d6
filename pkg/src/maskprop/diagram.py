"""String diagrams over the generator signature, as terms and as port graphs.

Terms are the serialization form (``Id``, ``Gen``, ``Swap``, ``Seq``,
``Par``); port graphs are what the rewrite engine works on. Both evaluate to
a :class:`~maskprop.spectral.DyadicMatrix`.
"""

from __future__ import annotations

import enum
import functools
import heapq
from collections import defaultdict
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import spectral
from .spectral import DyadicMatrix


class Generator(enum.Enum):
    XOR = ("xor", 2, 1)
    AND = ("and", 2, 1)
    FALSE = ("false", 0, 1)
    TRUE = ("true", 0, 1)
    DUP = ("dup", 1, 2)
    ERASE = ("erase", 1, 0)
    RANDOM = ("random", 0, 1)

    def __init__(self, label, n_in, n_out):
        self.label = label
        self.n_in = n_in
        self.n_out = n_out

    def __repr__(self):
        return f"Generator.{self.name}"


class Boundary(enum.Enum):
    INPUT = ("input", 0, 1)
    OUTPUT = ("output", 1, 0)

    def __init__(self, label, n_in, n_out):
        self.label = label
        self.n_in = n_in
        self.n_out = n_out


_GENERATOR_ENTRIES = {
    Generator.XOR: [[1, 0, 0, 0], [0, 0, 0, 1]],
    Generator.AND: [[1, 0, 0, 0], ["1/2", "1/2", "1/2", "-1/2"]],
    Generator.FALSE: [[1], [1]],
    Generator.TRUE: [[1], [-1]],
    Generator.DUP: [[1, 0], [0, 1], [0, 1], [1, 0]],
    Generator.ERASE: [[1, 0]],
    Generator.RANDOM: [[1], [0]],
}


@functools.lru_cache(maxsize=None)
def generator_matrix(g: Generator) -> DyadicMatrix:
    return DyadicMatrix.from_entries(_GENERATOR_ENTRIES[g])


class Interface(NamedTuple):
    n_in: int
    n_out: int


class TermTypeError(TypeError):
    def __init__(self, message, subterm):
        super().__init__(f"{message}: {subterm!r}")
        self.subterm = subterm


# --- terms ----------------------------------------------------------------------

class Term:
    __slots__ = ()

    @property
    def interface(self) -> Interface:
        return term_interface(self)


@dataclass(frozen=True)
class Id(Term):
    n: int


@dataclass(frozen=True)
class Gen(Term):
    g: Generator


@dataclass(frozen=True)
class Swap(Term):
    pass


@dataclass(frozen=True)
class Seq(Term):
    """``first`` then ``second``."""
    first: Term
    second: Term


@dataclass(frozen=True)
class Par(Term):
    """``top`` on the high wires, ``bottom`` below it."""
    top: Term
    bottom: Term


@functools.lru_cache(maxsize=4096)
def term_interface(t: Term) -> Interface:
    if isinstance(t, Id):
        if t.n < 0:
            raise TermTypeError("negative identity width", t)
        return Interface(t.n, t.n)
    if isinstance(t, Gen):
        return Interface(t.g.n_in, t.g.n_out)
    if isinstance(t, Swap):
        return Interface(2, 2)
    if isinstance(t, Seq):
        a, b = term_interface(t.first), term_interface(t.second)
        if a.n_out != b.n_in:
            raise TermTypeError(f"sequencing {a.n_out} wires into {b.n_in}", t)
        return Interface(a.n_in, b.n_out)
    if isinstance(t, Par):
        a, b = term_interface(t.top), term_interface(t.bottom)
        return Interface(a.n_in + b.n_in, a.n_out + b.n_out)
    raise TermTypeError("not a term", t)


def seq(*terms: Term) -> Term:
    """Left-to-right sequence, skipping identities where possible."""
    kept = [t for t in terms if not isinstance(t, Id)]
    if not kept:
        return terms[-1] if terms else Id(0)
    out = kept[0]
    for t in kept[1:]:
        out = Seq(out, t)
    return out


def par(*terms: Term) -> Term:
    """Tensor of ``terms``, merging adjacent identities and dropping ``Id(0)``."""
    merged: list[Term] = []
    for t in terms:
        if isinstance(t, Id):
            if t.n == 0:
                continue
            if merged and isinstance(merged[-1], Id):
                merged[-1] = Id(merged[-1].n + t.n)
                continue
        merged.append(t)
    if not merged:
        return Id(0)
    out = merged[-1]
    for t in reversed(merged[:-1]):
        out = Par(t, out)
    return out


_SWAP = DyadicMatrix(np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]]))


def term_matrix(t: Term) -> DyadicMatrix:
    """Structural semantics: ``Seq`` is a matrix product, ``Par`` a Kronecker
    product."""
    term_interface(t)
    return _term_matrix(t)


@functools.lru_cache(maxsize=4096)
def _term_matrix(t: Term) -> DyadicMatrix:
    if isinstance(t, Id):
        return DyadicMatrix.identity(t.n)
    if isinstance(t, Gen):
        return generator_matrix(t.g)
    if isinstance(t, Swap):
        return _SWAP
    if isinstance(t, Seq):
        return spectral.compose(_term_matrix(t.second), _term_matrix(t.first))
    return spectral.tensor(_term_matrix(t.top), _term_matrix(t.bottom))


def format_term(t: Term) -> str:
    if isinstance(t, Id):
        return str(t.n)
    if isinstance(t, Gen):
        return t.g.label
    if isinstance(t, Swap):
        return "swap"
    if isinstance(t, Seq):
        return f"({format_term(t.first)}) ; ({format_term(t.second)})"
    return f"{format_term(t.top)} * {format_term(t.bottom)}"


# --- port graphs ----------------------------------------------------------------

class Node(NamedTuple):
    kind: Generator | Boundary
    index: int = -1


class Wire(NamedTuple):
    src: int
    src_port: int
    dst: int
    dst_port: int


Endpoint = tuple  # (node id, port)


class GraphError(ValueError):
    pass


class Graph:
    """Linear port graph: every port carries exactly one wire, fan-out only
    through ``Dup``. Node ids are allocated in increasing order and never
    reused, so rewrite sites stay meaningful across a trace."""

    def __init__(self):
        self.nodes: dict[int, Node] = {}
        self.wires: set[Wire] = set()
        self.inputs: list[int] = []
        self.outputs: list[int] = []
        self._next = 0
        self._into = defaultdict(list)
        self._outof = defaultdict(list)

    # construction
    def add_node(self, kind, index: int = -1) -> int:
        nid = self._next
        self._next += 1
        self.nodes[nid] = Node(kind, index)
        return nid

    def add_input(self) -> int:
        nid = self.add_node(Boundary.INPUT, len(self.inputs))
        self.inputs.append(nid)
        return nid

    def add_output(self) -> int:
        nid = self.add_node(Boundary.OUTPUT, len(self.outputs))
        self.outputs.append(nid)
        return nid

    def connect(self, src: int, src_port: int, dst: int, dst_port: int) -> Wire:
        w = Wire(src, src_port, dst, dst_port)
        self.wires.add(w)
        self._outof[(src, src_port)].append(w)
        self._into[(dst, dst_port)].append(w)
        return w

    def disconnect(self, w: Wire):
        self.wires.discard(w)
        self._outof[(w.src, w.src_port)].remove(w)
        self._into[(w.dst, w.dst_port)].remove(w)

    def remove_node(self, nid: int):
        for w in [w for w in self.wires if w.src == nid or w.dst == nid]:
            self.disconnect(w)
        del self.nodes[nid]

    def copy(self) -> "Graph":
        g = Graph()
        g.nodes = dict(self.nodes)
        g.inputs = list(self.inputs)
        g.outputs = list(self.outputs)
        g._next = self._next
        for w in self.wires:
            g.connect(*w)
        return g

    # queries
    @property
    def interface(self) -> Interface:
        return Interface(len(self.inputs), len(self.outputs))

    def kind(self, nid: int):
        return self.nodes[nid].kind

    def producer(self, nid: int, port: int) -> Endpoint:
        ws = self._into.get((nid, port), ())
        if len(ws) != 1:
            raise GraphError(f"in-port {port} of node {nid} has {len(ws)} wires")
        return ws[0].src, ws[0].src_port

    def consumer(self, nid: int, port: int) -> Endpoint:
        ws = self._outof.get((nid, port), ())
        if len(ws) != 1:
            raise GraphError(f"out-port {port} of node {nid} has {len(ws)} wires")
        return ws[0].dst, ws[0].dst_port

    def generator_nodes(self, kind: Generator | None = None) -> list[int]:
        return sorted(n for n, node in self.nodes.items()
                      if isinstance(node.kind, Generator)
                      and (kind is None or node.kind is kind))

    def count(self, kind: Generator) -> int:
        return sum(1 for node in self.nodes.values() if node.kind is kind)

    def same_structure(self, other: "Graph") -> bool:
        return (self.nodes == other.nodes and self.wires == other.wires
                and self.inputs == other.inputs and self.outputs == other.outputs)

    def __repr__(self):
        kinds = ", ".join(f"{n}:{node.kind.label}" for n, node in sorted(self.nodes.items()))
        return f"Graph({self.interface.n_in}->{self.interface.n_out}; {kinds})"


def validate(g: Graph) -> list[str]:
    """Every broken invariant as a message; empty for a well-formed graph."""
    problems = []
    for w in sorted(g.wires):
        for nid, port, side in ((w.src, w.src_port, "out"), (w.dst, w.dst_port, "in")):
            if nid not in g.nodes:
                problems.append(f"wire {tuple(w)} touches missing node {nid}")
                continue
            kind = g.nodes[nid].kind
            limit = kind.n_out if side == "out" else kind.n_in
            if not 0 <= port < limit:
                problems.append(f"wire {tuple(w)} uses {side}-port {port} of {kind.label} node {nid}")
    for nid, node in sorted(g.nodes.items()):
        for port in range(node.kind.n_in):
            k = len(g._into.get((nid, port), ()))
            if k != 1:
                problems.append(f"linearity: in-port {port} of {node.kind.label} node {nid} has {k} wires")
        for port in range(node.kind.n_out):
            k = len(g._outof.get((nid, port), ()))
            if k != 1:
                problems.append(f"linearity: out-port {port} of {node.kind.label} node {nid} has {k} wires")
    if _topological(g, strict=False) is None:
        problems.append("acyclicity: graph contains a cycle")
    for side, ids, kind in (("input", g.inputs, Boundary.INPUT), ("output", g.outputs, Boundary.OUTPUT)):
        for i, nid in enumerate(ids):
            node = g.nodes.get(nid)
            if node is None or node.kind is not kind or node.index != i:
                problems.append(f"boundary: {side} {i} is not {side} node with index {i}")
        stray = [n for n, node in g.nodes.items() if node.kind is kind and n not in ids]
        if stray:
            problems.append(f"boundary: unlisted {side} nodes {sorted(stray)}")
    return problems


def _topological(g: Graph, strict: bool = True):
    indeg = {n: 0 for n in g.nodes}
    for w in g.wires:
        if w.dst in indeg and w.src in g.nodes:
            indeg[w.dst] += 1
    heap = [n for n, d in indeg.items() if d == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        n = heapq.heappop(heap)
        order.append(n)
        for port in range(g.nodes[n].kind.n_out):
            for w in g._outof.get((n, port), ()):
                if w.dst in indeg:
                    indeg[w.dst] -= 1
                    if indeg[w.dst] == 0:
                        heapq.heappush(heap, w.dst)
    if len(order) != len(g.nodes):
        if strict:
            raise GraphError("graph contains a cycle")
        return None
    return order


def slices(g: Graph, strategy: str = "asap") -> list[list[int]]:
    """Layer generator nodes into antichains.

    ``asap`` puts each node one layer after its latest generator producer;
    ``alap`` pushes nodes as late as their consumers allow. Any layering is a
    valid evaluation schedule.
    """
    order = [n for n in _topological(g) if isinstance(g.nodes[n].kind, Generator)]
    if not order:
        return []
    depth: dict[int, int] = {}
    if strategy == "asap":
        for n in order:
            d = 0
            for port in range(g.nodes[n].kind.n_in):
                src, _ = g.producer(n, port)
                if src in depth:
                    d = max(d, depth[src] + 1)
            depth[n] = d
    elif strategy == "alap":
        height: dict[int, int] = {}
        for n in reversed(order):
            h = 0
            for port in range(g.nodes[n].kind.n_out):
                dst, _ = g.consumer(n, port)
                if dst in height:
                    h = max(h, height[dst] + 1)
            height[n] = h
        top = max(height.values())
        depth = {n: top - h for n, h in height.items()}
    else:
        raise ValueError(f"unknown slicing strategy {strategy!r}")
    layers: dict[int, list[int]] = defaultdict(list)
    for n in order:
        layers[depth[n]].append(n)
    return [sorted(layers[k]) for k in sorted(layers)]


def _bring_front(num: np.ndarray, k: int, positions: list[int]) -> np.ndarray:
    cols = num.shape[1]
    rest = [p for p in range(k) if p not in positions]
    t = num.reshape((2,) * k + (cols,)).transpose(positions + rest + [k])
    return t.reshape(1 << len(positions), -1)


def eval_graph(g: Graph, strategy: str = "asap") -> DyadicMatrix:
    """Correlation matrix of ``g``, contracting one slice at a time.

    Each slice acts as the tensor of its generators with identities on the
    wires passing by; the state is the correlation matrix from the graph
    inputs to the currently open wires.
    """
    problems = validate(g)
    if problems:
        raise GraphError("invalid graph: " + "; ".join(problems))
    n_in = len(g.inputs)
    num = np.eye(1 << n_in, dtype=np.int64)
    exp = 0
    live: list[Endpoint] = [(nid, 0) for nid in g.inputs]
    for layer in slices(g, strategy):
        for nid in layer:
            kind = g.nodes[nid].kind
            gm = generator_matrix(kind)
            pos = [live.index(g.producer(nid, p)) for p in range(kind.n_in)]
            cols = num.shape[1]
            front = _bring_front(num, len(live), pos)
            num = spectral._matmul(gm.num, front).reshape(-1, cols)
            exp += gm.exp
            live = [(nid, p) for p in range(kind.n_out)] + [e for i, e in enumerate(live) if i not in pos]
    pos = [live.index(g.producer(nid, 0)) for nid in g.outputs]
    num = _bring_front(num, len(live), pos).reshape(1 << len(pos), -1)
    return DyadicMatrix(num, exp)


# the public name used across the package
eval = eval_graph  # noqa: A001


def graph_from_term(t: Term) -> Graph:
    iface = term_interface(t)
    g = Graph()
    ins = [(g.add_input(), 0) for _ in range(iface.n_in)]
    outs_ids = [g.add_output() for _ in range(iface.n_out)]

    def build(t: Term, srcs: list[Endpoint]) -> list[Endpoint]:
        if isinstance(t, Id):
            return srcs
        if isinstance(t, Swap):
            return [srcs[1], srcs[0]]
        if isinstance(t, Gen):
            nid = g.add_node(t.g)
            for port, (s, sp) in enumerate(srcs):
                g.connect(s, sp, nid, port)
            return [(nid, p) for p in range(t.g.n_out)]
        if isinstance(t, Seq):
            return build(t.second, build(t.first, srcs))
        k = term_interface(t.top).n_in
        return build(t.top, srcs[:k]) + build(t.bottom, srcs[k:])

    outs = build(t, ins)
    for (s, sp), o in zip(outs, outs_ids):
        g.connect(s, sp, o, 0)
    return g


def permutation_term(current: list, target: list) -> Term:
    """Adjacent-swap network turning wire order ``current`` into ``target``."""
    cur = list(current)
    k = len(cur)
    steps: list[Term] = []
    for i, want in enumerate(target):
        j = cur.index(want, i)
        while j > i:
            steps.append(par(Id(j - 1), Swap(), Id(k - j - 1)))
            cur[j - 1], cur[j] = cur[j], cur[j - 1]
            j -= 1
    return seq(*steps) if steps else Id(k)


def term_from_graph(g: Graph, strategy: str = "asap") -> Term:
    problems = validate(g)
    if problems:
        raise GraphError("invalid graph: " + "; ".join(problems))
    live: list[Endpoint] = [(nid, 0) for nid in g.inputs]
    parts: list[Term] = [Id(len(live))]
    for layer in slices(g, strategy):
        consumed = [g.producer(nid, p) for nid in layer for p in range(g.nodes[nid].kind.n_in)]
        rest = [e for e in live if e not in consumed]
        parts.append(permutation_term(live, consumed + rest))
        parts.append(par(*[Gen(g.nodes[nid].kind) for nid in layer], Id(len(rest))))
        live = [(nid, p) for nid in layer for p in range(g.nodes[nid].kind.n_out)] + rest
    parts.append(permutation_term(live, [g.producer(o, 0) for o in g.outputs]))
    return seq(*parts)


def to_dot(g: Graph, name: str = "diagram") -> str:
    """Graphviz rendering; edge labels are ``src_port:dst_port``."""
    lines = [f'digraph "{name}" {{', "  rankdir=TB;"]
    for nid, node in sorted(g.nodes.items()):
        if isinstance(node.kind, Boundary):
            prefix = "in" if node.kind is Boundary.INPUT else "out"
            lines.append(f'  n{nid} [label="{prefix}{node.index}", shape=plaintext];')
        else:
            lines.append(f'  n{nid} [label="{node.kind.label}"];')
    for w in sorted(g.wires):
        lines.append(f'  n{w.src} -> n{w.dst} [label="{w.src_port}:{w.dst_port}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
