"""The gadget description language (``.gdl``) and its lowering to netlists
and observation diagrams.

Grammar, one statement per line, ``#`` starts a comment::

    gadget <name>
    input <wire> [domain <int>] [share <group>]
    random <wire>
    <wire> = xor <w1> <w2> | and <w1> <w2> | not <w1> | copy <w1>
    output <wire> [domain <int>]
    probe <wire>
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources

from .diagram import Generator, Graph

IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_.]*\Z")
OPS = {"xor": 2, "and": 2, "not": 1, "copy": 1}


class GadgetError(ValueError):
    """Parse or validation failure, located when a line is known."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        where = f"line {line}, col {col}: " if line is not None else ""
        super().__init__(where + message)
        self.message = message
        self.line = line
        self.col = col


@dataclass(frozen=True)
class InputDecl:
    name: str
    domain: int | None = None
    share: str | None = None


@dataclass(frozen=True)
class Assignment:
    target: str
    op: str
    args: tuple[str, ...]


@dataclass(frozen=True)
class OutputDecl:
    name: str
    domain: int | None = None


@dataclass(frozen=True)
class GadgetAst:
    name: str
    inputs: tuple[InputDecl, ...] = ()
    randoms: tuple[str, ...] = ()
    assignments: tuple[Assignment, ...] = ()
    outputs: tuple[OutputDecl, ...] = ()
    probes: tuple[str, ...] = ()

    @property
    def sharings(self) -> dict[str, tuple[str, ...]]:
        groups: dict[str, list[str]] = {}
        for i in self.inputs:
            if i.share is not None:
                groups.setdefault(i.share, []).append(i.name)
        return {k: tuple(v) for k, v in groups.items()}

    def to_source(self) -> str:
        out = [f"gadget {self.name}"]
        for i in self.inputs:
            s = f"input {i.name}"
            if i.domain is not None:
                s += f" domain {i.domain}"
            if i.share is not None:
                s += f" share {i.share}"
            out.append(s)
        out += [f"random {r}" for r in self.randoms]
        out += [f"{a.target} = {a.op} {' '.join(a.args)}" for a in self.assignments]
        for o in self.outputs:
            out.append(f"output {o.name}" + (f" domain {o.domain}" if o.domain is not None else ""))
        out += [f"probe {p}" for p in self.probes]
        return "\n".join(out) + "\n"


# --- parsing --------------------------------------------------------------------

def _tokens(line: str):
    return [(m.group(), m.start() + 1) for m in re.finditer(r"\S+", line)]


def _ident(tok, lineno):
    text, col = tok
    if not IDENT.match(text):
        raise GadgetError(f"bad wire name {text!r}", lineno, col)
    return text


def _options(toks, allowed, lineno):
    opts = {}
    i = 0
    while i < len(toks):
        key, col = toks[i]
        if key not in allowed or key in opts:
            raise GadgetError(f"unexpected {key!r}", lineno, col)
        if i + 1 >= len(toks):
            raise GadgetError(f"{key!r} needs a value", lineno, col)
        val, vcol = toks[i + 1]
        if key == "domain":
            if not re.fullmatch(r"\d+", val):
                raise GadgetError(f"domain must be a non-negative integer, got {val!r}", lineno, vcol)
            opts[key] = int(val)
        else:
            opts[key] = _ident(toks[i + 1], lineno)
        i += 2
    return opts


def parse(text: str) -> GadgetAst:
    name = None
    inputs, randoms, assigns, outputs, probes = [], [], [], [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        toks = _tokens(raw.split("#", 1)[0])
        if not toks:
            continue
        head, col = toks[0]
        if name is None:
            if head != "gadget" or len(toks) != 2:
                raise GadgetError("expected 'gadget <name>' header", lineno, col)
            name = _ident(toks[1], lineno)
            continue
        if head == "gadget":
            raise GadgetError("second gadget header", lineno, col)
        if head == "input":
            if len(toks) < 2:
                raise GadgetError("input needs a wire name", lineno, col)
            opts = _options(toks[2:], ("domain", "share"), lineno)
            w = _ident(toks[1], lineno)
            inputs.append((InputDecl(w, opts.get("domain"), opts.get("share")), lineno))
        elif head == "random":
            if len(toks) != 2:
                raise GadgetError("expected 'random <wire>'", lineno, col)
            randoms.append((_ident(toks[1], lineno), lineno))
        elif head == "output":
            if len(toks) < 2:
                raise GadgetError("output needs a wire name", lineno, col)
            opts = _options(toks[2:], ("domain",), lineno)
            outputs.append((OutputDecl(_ident(toks[1], lineno), opts.get("domain")), lineno, toks[1][1]))
        elif head == "probe":
            if len(toks) != 2:
                raise GadgetError("expected 'probe <wire>'", lineno, col)
            probes.append((_ident(toks[1], lineno), lineno, toks[1][1]))
        elif len(toks) >= 2 and toks[1][0] == "=":
            target = _ident(toks[0], lineno)
            if len(toks) < 3:
                raise GadgetError("missing operator", lineno, toks[1][1] + 1)
            op, opcol = toks[2]
            if op not in OPS:
                raise GadgetError(f"unknown operator {op!r}", lineno, opcol)
            args = toks[3:]
            if len(args) != OPS[op]:
                raise GadgetError(f"{op} takes {OPS[op]} argument(s), got {len(args)}", lineno, opcol)
            assigns.append((Assignment(target, op, tuple(_ident(a, lineno) for a in args)),
                            lineno, [a[1] for a in args]))
        else:
            raise GadgetError(f"unrecognized statement {head!r}", lineno, col)
    if name is None:
        raise GadgetError("missing 'gadget <name>' header")
    _check(inputs, randoms, assigns, outputs, probes)
    return GadgetAst(name, tuple(i for i, _ in inputs), tuple(r for r, _ in randoms),
                     tuple(a for a, _, _ in assigns), tuple(o for o, _, _ in outputs),
                     tuple(p for p, _, _ in probes))


def _check(inputs, randoms, assigns, outputs, probes):
    defined: dict[str, int] = {}
    order = 0

    def define(w, lineno):
        nonlocal order
        if w in defined:
            raise GadgetError(f"duplicate definition of {w!r}", lineno, 1)
        defined[w] = order
        order += 1

    for i, lineno in inputs:
        define(i.name, lineno)
    for r, lineno in randoms:
        define(r, lineno)
    deps = {a.target: a.args for a, _, _ in assigns}
    for a, lineno, _ in assigns:
        define(a.target, lineno)
    for a, lineno, cols in assigns:
        for arg, col in zip(a.args, cols):
            if arg not in defined:
                raise GadgetError(f"undefined wire {arg!r}", lineno, col)
            if defined[arg] >= defined[a.target]:
                if _reaches(deps, arg, a.target):
                    raise GadgetError(f"cycle through {a.target!r} and {arg!r}", lineno, col)
                raise GadgetError(f"wire {arg!r} used before its definition", lineno, col)
    seen = set()
    for o, lineno, col in outputs:
        if o.name not in defined:
            raise GadgetError(f"undefined output wire {o.name!r}", lineno, col)
        if o.name in seen:
            raise GadgetError(f"duplicate output {o.name!r}", lineno, col)
        seen.add(o.name)
    for p, lineno, col in probes:
        if p not in defined:
            raise GadgetError(f"undefined probe wire {p!r}", lineno, col)


def _reaches(deps, start, goal) -> bool:
    stack, seen = [start], set()
    while stack:
        w = stack.pop()
        if w == goal:
            return True
        if w in seen:
            continue
        seen.add(w)
        stack.extend(deps.get(w, ()))
    return False


def load(path) -> GadgetAst:
    with open(path) as fh:
        return parse(fh.read())


def fixture(name: str) -> GadgetAst:
    """A bundled example gadget, e.g. ``fixture("dom2")``."""
    fname = name if name.endswith(".gdl") else name + ".gdl"
    return parse(resources.files("maskprop.fixtures").joinpath(fname).read_text())


def fixture_path(name: str) -> str:
    fname = name if name.endswith(".gdl") else name + ".gdl"
    return str(resources.files("maskprop.fixtures").joinpath(fname))


def evaluate_ast(ast: GadgetAst, assignment: dict[str, int]) -> dict[str, int]:
    """Value of every named wire, straight from the source operators."""
    vals = {w: int(assignment[w]) & 1 for w in [i.name for i in ast.inputs] + list(ast.randoms)}
    for a in ast.assignments:
        x = [vals[w] for w in a.args]
        if a.op == "xor":
            vals[a.target] = x[0] ^ x[1]
        elif a.op == "and":
            vals[a.target] = x[0] & x[1]
        elif a.op == "not":
            vals[a.target] = 1 - x[0]
        else:
            vals[a.target] = x[0]
    return vals


# --- netlists -------------------------------------------------------------------

@dataclass(frozen=True)
class Gate:
    out: str
    op: str  # xor | and | true | false
    args: tuple[str, ...] = ()


@dataclass(frozen=True)
class Netlist:
    """Gate-level form: ``not`` lowered to ``xor`` with a ``true`` gate,
    ``copy`` resolved to an alias of its argument."""

    name: str
    inputs: tuple[str, ...]
    randoms: tuple[str, ...]
    gates: tuple[Gate, ...]
    outputs: tuple[str, ...]
    aliases: dict[str, str]
    input_domains: dict[str, int | None]
    output_domains: dict[str, int | None]
    sharings: dict[str, tuple[str, ...]]
    probes: tuple[str, ...] = ()

    def wire(self, name: str) -> str:
        """Canonical wire carrying ``name``."""
        return self.aliases.get(name, name)

    @property
    def wires(self) -> tuple[str, ...]:
        """Every canonical wire: inputs, randoms, then gate outputs."""
        return self.inputs + self.randoms + tuple(g.out for g in self.gates)

    @property
    def names(self) -> tuple[str, ...]:
        return self.wires + tuple(a for a in self.aliases if a not in self.wires)

    def kernel_arrays(self):
        """Integer encoding for the evaluation kernels: wire ``i`` is
        input/random ``i`` or gate ``i - n_bits``."""
        index = {w: i for i, w in enumerate(self.wires)}
        code = {"xor": 0, "and": 1, "true": 2, "false": 3}
        ops = [code[g.op] for g in self.gates]
        a0 = [index[g.args[0]] if g.args else 0 for g in self.gates]
        a1 = [index[g.args[1]] if len(g.args) > 1 else 0 for g in self.gates]
        return index, ops, a0, a1


def elaborate(ast: GadgetAst) -> Netlist:
    aliases: dict[str, str] = {}
    gates: list[Gate] = []

    def res(w):
        return aliases.get(w, w)

    for a in ast.assignments:
        args = tuple(res(w) for w in a.args)
        if a.op == "copy":
            aliases[a.target] = args[0]
        elif a.op == "not":
            one = f"{a.target}#true"
            gates.append(Gate(one, "true"))
            gates.append(Gate(a.target, "xor", (args[0], one)))
        else:
            gates.append(Gate(a.target, a.op, args))
    return Netlist(
        name=ast.name,
        inputs=tuple(i.name for i in ast.inputs),
        randoms=tuple(ast.randoms),
        gates=tuple(gates),
        outputs=tuple(o.name for o in ast.outputs),
        aliases=aliases,
        input_domains={i.name: i.domain for i in ast.inputs},
        output_domains={o.name: o.domain for o in ast.outputs},
        sharings=ast.sharings,
        probes=tuple(ast.probes),
    )


@dataclass(frozen=True)
class ObservationSpec:
    """What the adversary sees: output names plus probed wire names.

    Observation order is fixed: outputs in declaration order, then probes in
    the order given.
    """

    outputs: tuple[str, ...] = ()
    probes: tuple[str, ...] = ()

    @classmethod
    def of(cls, nl: Netlist, names) -> "ObservationSpec":
        names = list(names)
        outs = [o for o in nl.outputs if o in names]
        probes = []
        known = set(nl.names)
        for n in names:
            if n in nl.outputs:
                continue
            if n not in known:
                raise GadgetError(f"unknown observation {n!r}")
            if n not in probes:
                probes.append(n)
        return cls(tuple(outs), tuple(probes))

    @classmethod
    def all_outputs(cls, nl: Netlist) -> "ObservationSpec":
        return cls(tuple(nl.outputs))

    def validate(self, nl: Netlist):
        for o in self.outputs:
            if o not in nl.outputs:
                raise GadgetError(f"unknown output {o!r}")
        known = set(nl.names)
        for p in self.probes:
            if p not in known:
                raise GadgetError(f"unknown probe wire {p!r}")

    def wires(self, nl: Netlist) -> list[str]:
        """Canonical wire of every observed item, in observation order."""
        return [nl.wire(o) for o in self.outputs] + [nl.wire(p) for p in self.probes]

    def labels(self) -> list[str]:
        return list(self.outputs) + list(self.probes)

    def __len__(self):
        return len(self.outputs) + len(self.probes)


_GATE_KIND = {"xor": Generator.XOR, "and": Generator.AND,
              "true": Generator.TRUE, "false": Generator.FALSE}


def observation_diagram(nl: Netlist, obs: ObservationSpec) -> Graph:
    """Port graph of the gadget as seen through ``obs``.

    Inputs are the non-random gadget inputs in declaration order; each random
    wire gets a ``Random`` node. A wire read ``k`` times is split by a chain of
    ``k - 1`` ``Dup`` nodes (each Dup hands its port 0 to the next reader and
    its port 1 down the chain). Observed items become boundary outputs, and
    unobserved outputs or unread wires end in ``Erase``.
    """
    obs.validate(nl)
    g = Graph()
    source: dict[str, tuple[int, int]] = {}
    for w in nl.inputs:
        source[w] = (g.add_input(), 0)
    observed = obs.wires(nl)
    out_nodes = [g.add_output() for _ in observed]
    for r in nl.randoms:
        source[r] = (g.add_node(Generator.RANDOM), 0)
    readers: dict[str, list[tuple[int, int]]] = {w: [] for w in nl.wires}
    for gate in nl.gates:
        nid = g.add_node(_GATE_KIND[gate.op])
        source[gate.out] = (nid, 0)
        for port, a in enumerate(gate.args):
            readers[a].append((nid, port))
    observed_outputs = set(obs.outputs)
    k = 0
    for o in nl.outputs:
        if o in observed_outputs:
            readers[nl.wire(o)].append((out_nodes[k], 0))
            k += 1
        else:
            readers[nl.wire(o)].append((g.add_node(Generator.ERASE), 0))
    for p in obs.probes:
        readers[nl.wire(p)].append((out_nodes[k], 0))
        k += 1
    for w in nl.wires:
        src = source[w]
        dsts = readers[w]
        if not dsts:
            dsts = [(g.add_node(Generator.ERASE), 0)]
        for dst in dsts[:-1]:
            dup = g.add_node(Generator.DUP)
            g.connect(*src, dup, 0)
            g.connect(dup, 0, *dst)
            src = (dup, 1)
        g.connect(*src, *dsts[-1])
    return g

