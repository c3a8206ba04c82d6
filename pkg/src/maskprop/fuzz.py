"""Seeded random diagrams, terms and gadgets for property tests and
benchmarks."""

from __future__ import annotations

import random

from .diagram import Gen, Generator, Graph, Id, Seq, Swap, Term, par, term_interface
from .gadget import Assignment, GadgetAst, InputDecl, OutputDecl

_WEIGHTS = {
    Generator.XOR: 5, Generator.AND: 3, Generator.DUP: 4, Generator.RANDOM: 3,
    Generator.ERASE: 3, Generator.FALSE: 1, Generator.TRUE: 1,
}


def random_graph(rng: random.Random, max_wires: int = 6, max_generators: int = 12,
                 max_inputs: int = 4) -> Graph:
    """Well-formed graph with at most ``max_wires`` wires open at any point
    and at most ``max_generators`` generators, closing erases included."""
    g = Graph()
    for _ in range(rng.randint(0, max_inputs)):
        g.add_input()
    live = [(nid, 0) for nid in g.inputs]
    kinds = list(_WEIGHTS)
    weights = [_WEIGHTS[k] for k in kinds]
    used = 0
    for _ in range(rng.randint(0, max_generators)):
        options = [(k, w) for k, w in zip(kinds, weights)
                   if k.n_in <= len(live) and len(live) - k.n_in + k.n_out <= max_wires]
        if not options:
            break
        kind = rng.choices([k for k, _ in options], [w for _, w in options])[0]
        picks = rng.sample(range(len(live)), kind.n_in)
        nid = g.add_node(kind)
        used += 1
        for port, i in enumerate(picks):
            g.connect(*live[i], nid, port)
        live = [e for i, e in enumerate(live) if i not in picks]
        pos = rng.randint(0, len(live))
        live[pos:pos] = [(nid, p) for p in range(kind.n_out)]
    for src in live:
        if used < max_generators and rng.random() < 0.35:
            used += 1
            g.connect(*src, g.add_node(Generator.ERASE), 0)
        else:
            g.connect(*src, g.add_output(), 0)
    return g


def random_term(rng: random.Random, n_in: int, budget: int = 6, max_wires: int = 6) -> Term:
    """Well-typed term on ``n_in`` inputs built from at most ``budget``
    layers."""
    t: Term = Id(n_in)
    width = n_in
    for _ in range(rng.randint(0, budget)):
        options = [k for k in Generator if k.n_in <= width
                   and width - k.n_in + k.n_out <= max_wires]
        if width >= 2 and rng.random() < 0.2:
            pos = rng.randint(0, width - 2)
            layer = par(Id(pos), Swap(), Id(width - pos - 2))
        elif options:
            k = rng.choice(options)
            pos = rng.randint(0, width - k.n_in)
            layer = par(Id(pos), Gen(k), Id(width - pos - k.n_in))
        else:
            break
        t = Seq(t, layer)
        width = term_interface(t).n_out
    return t


def random_gadget(rng: random.Random, max_inputs: int = 6, max_randoms: int = 3,
                  max_gates: int = 12, name: str = "fuzz") -> GadgetAst:
    """Random annotated gadget: inputs carry domains 0/1 and are grouped into
    sharings in pairs."""
    n_in = rng.randint(1, max_inputs)
    inputs = tuple(InputDecl(f"x{i}", i % 2, f"s{i // 2}") for i in range(n_in))
    randoms = tuple(f"r{i}" for i in range(rng.randint(0, max_randoms)))
    pool = [i.name for i in inputs] + list(randoms)
    assigns = []
    for k in range(rng.randint(1, max_gates)):
        op = rng.choices(["xor", "and", "not", "copy"], [6, 3, 1, 1])[0]
        arity = 2 if op in ("xor", "and") else 1
        args = tuple(rng.choice(pool) for _ in range(arity))
        target = f"w{k}"
        assigns.append(Assignment(target, op, args))
        pool.append(target)
    defined = [a.target for a in assigns]
    outs = rng.sample(defined, min(len(defined), rng.randint(1, 3)))
    outputs = tuple(OutputDecl(o, rng.randint(0, 1)) for o in outs)
    return GadgetAst(name, inputs, randoms, tuple(assigns), outputs)
