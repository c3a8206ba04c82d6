"""Equational rewriting on port graphs and the erase-propagation fixpoint.

Every rule is oriented toward the inputs. A site is the node id of the rule's
anchor: the ``Erase`` node for erase-driven rules (R3, R4, R6, R7, R8), the
gate for unit laws and the cut (R1, R2, R5).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable

from .diagram import (
    Boundary, Gen, Generator, Graph, Id, Par, Seq, Term, eval_graph, term_matrix,
)

X, A, F, T = Generator.XOR, Generator.AND, Generator.FALSE, Generator.TRUE
D, E, R = Generator.DUP, Generator.ERASE, Generator.RANDOM


class NoMatchError(ValueError):
    pass


class RuleSoundnessError(AssertionError):
    pass


# --- site matchers and in-place rewrites ----------------------------------------

def _is(g: Graph, nid: int, *kinds) -> bool:
    return nid in g.nodes and g.nodes[nid].kind in kinds


def _input_fed_by(g: Graph, nid: int, kinds) -> int | None:
    """Port of gate ``nid`` whose producer has one of ``kinds``."""
    for port in range(2):
        src, _ = g.producer(nid, port)
        if g.nodes[src].kind in kinds:
            return port
    return None


def _erase_producer(g: Graph, nid: int, kinds):
    if not _is(g, nid, E):
        return None
    src, sp = g.producer(nid, 0)
    if g.nodes[src].kind in kinds:
        return src, sp
    return None


def _add_erase(g: Graph, src: int, sp: int) -> int:
    e = g.add_node(E)
    g.connect(src, sp, e, 0)
    return e


def _unit_match(gate, const):
    def match(g, site):
        return _is(g, site, gate) and _input_fed_by(g, site, (const,)) is not None
    return match


def _unit_rewrite(const):
    def rewrite(g, site):
        k = _input_fed_by(g, site, (const,))
        c, _ = g.producer(site, k)
        src = g.producer(site, 1 - k)
        dst = g.consumer(site, 0)
        g.remove_node(c)
        g.remove_node(site)
        g.connect(*src, *dst)
        return []
    return rewrite


def _copy_erase_match(g, site):
    return _erase_producer(g, site, (D,)) is not None


def _copy_erase(g, site):
    dup, port = g.producer(site, 0)
    dst = g.consumer(dup, 1 - port)
    src = g.producer(dup, 0)
    g.remove_node(site)
    g.remove_node(dup)
    g.connect(*src, *dst)
    return []


def _gate_erase_match(g, site):
    return _erase_producer(g, site, (X, A)) is not None


def _gate_erase(g, site):
    gate, _ = g.producer(site, 0)
    srcs = [g.producer(gate, 0), g.producer(gate, 1)]
    g.remove_node(site)
    g.remove_node(gate)
    return [_add_erase(g, *s) for s in srcs]


def _cut_match(g, site):
    return _is(g, site, X) and _input_fed_by(g, site, (R,)) is not None


def _cut(g, site):
    k = _input_fed_by(g, site, (R,))
    rnd, _ = g.producer(site, k)
    other = g.producer(site, 1 - k)
    dst = g.consumer(site, 0)
    g.remove_node(rnd)
    g.remove_node(site)
    e = _add_erase(g, *other)
    fresh = g.add_node(R)
    g.connect(fresh, 0, *dst)
    return [e]


def _erase_source_match(kinds):
    def match(g, site):
        return _erase_producer(g, site, kinds) is not None
    return match


def _erase_source(g, site):
    src, _ = g.producer(site, 0)
    g.remove_node(site)
    g.remove_node(src)
    return []


def _dup_both_match(g, site):
    hit = _erase_producer(g, site, (D,))
    if hit is None:
        return False
    dup, port = hit
    other, _ = g.consumer(dup, 1 - port)
    return g.nodes[other].kind is E


def _dup_both(g, site):
    dup, port = g.producer(site, 0)
    other, _ = g.consumer(dup, 1 - port)
    src = g.producer(dup, 0)
    g.remove_node(site)
    g.remove_node(other)
    g.remove_node(dup)
    return [_add_erase(g, *src)]


# --- rules ---------------------------------------------------------------------

@dataclass(frozen=True)
class Rule:
    """A left-to-right equation; ``variants`` are the (lhs, rhs) term pairs it
    covers, one per port orientation."""

    name: str
    title: str
    variants: tuple[tuple[Term, Term], ...]
    matches: Callable[[Graph, int], bool] = field(repr=False)
    rewrite: Callable[[Graph, int], list[int]] = field(repr=False)

    @property
    def lhs(self) -> Term:
        return self.variants[0][0]

    @property
    def rhs(self) -> Term:
        return self.variants[0][1]

    def self_check(self):
        for lhs, rhs in self.variants:
            if lhs.interface != rhs.interface or term_matrix(lhs) != term_matrix(rhs):
                raise RuleSoundnessError(f"rule {self.name} ({self.title}) is unsound")


I1 = Id(1)


def _build_rules() -> tuple[Rule, ...]:
    g_ = Gen
    return (
        Rule("R1", "xor-unit",
             ((Seq(Par(I1, g_(F)), g_(X)), I1), (Seq(Par(g_(F), I1), g_(X)), I1)),
             _unit_match(X, F), _unit_rewrite(F)),
        Rule("R2", "and-unit",
             ((Seq(Par(I1, g_(T)), g_(A)), I1), (Seq(Par(g_(T), I1), g_(A)), I1)),
             _unit_match(A, T), _unit_rewrite(T)),
        Rule("R3", "copy-erase",
             ((Seq(g_(D), Par(I1, g_(E))), I1), (Seq(g_(D), Par(g_(E), I1)), I1)),
             _copy_erase_match, _copy_erase),
        Rule("R4", "gate-erase",
             ((Seq(g_(X), g_(E)), Par(g_(E), g_(E))), (Seq(g_(A), g_(E)), Par(g_(E), g_(E)))),
             _gate_erase_match, _gate_erase),
        Rule("R5", "cut",
             ((Seq(Par(g_(R), I1), g_(X)), Seq(g_(E), g_(R))),
              (Seq(Par(I1, g_(R)), g_(X)), Seq(g_(E), g_(R)))),
             _cut_match, _cut),
        Rule("R6", "erase-random", ((Seq(g_(R), g_(E)), Id(0)),),
             _erase_source_match((R,)), _erase_source),
        Rule("R7", "erase-const",
             ((Seq(g_(F), g_(E)), Id(0)), (Seq(g_(T), g_(E)), Id(0))),
             _erase_source_match((F, T)), _erase_source),
        Rule("R8", "dup-both-erased", ((Seq(g_(D), Par(g_(E), g_(E))), g_(E)),),
             _dup_both_match, _dup_both),
    )


def _load() -> dict[str, Rule]:
    rules = _build_rules()
    for r in rules:
        r.self_check()
    return {r.name: r for r in rules}


RULES = _load()


def rule_set() -> list[Rule]:
    return list(RULES.values())


@dataclass(frozen=True)
class NegativeCheck:
    """An equation that looks like a rule but changes the semantics."""

    name: str
    lhs: Term
    rhs: Term
    reason: str
    force: Callable[[Graph, int], list[int]] = field(repr=False)


def _force_and_cut(g, site):
    if not (_is(g, site, A) and _input_fed_by(g, site, (R,)) is not None):
        raise NoMatchError(f"no and-with-random at node {site}")
    k = _input_fed_by(g, site, (R,))
    rnd, _ = g.producer(site, k)
    other = g.producer(site, 1 - k)
    dst = g.consumer(site, 0)
    g.remove_node(rnd)
    g.remove_node(site)
    e = _add_erase(g, *other)
    g.connect(g.add_node(R), 0, *dst)
    return [e]


def _force_dup_split(g, site):
    if not _is(g, site, D) or g.nodes[g.producer(site, 0)[0]].kind is not R:
        raise NoMatchError(f"no dup-of-random at node {site}")
    rnd, _ = g.producer(site, 0)
    dsts = [g.consumer(site, 0), g.consumer(site, 1)]
    g.remove_node(rnd)
    g.remove_node(site)
    for dst in dsts:
        g.connect(g.add_node(R), 0, *dst)
    return []


def negative_checks() -> list[NegativeCheck]:
    return [
        NegativeCheck("and-cut", Seq(Par(Gen(R), I1), Gen(A)), Seq(Gen(E), Gen(R)),
                      "an AND with a random input still leaks its other input",
                      _force_and_cut),
        NegativeCheck("dup-random-split", Seq(Gen(R), Gen(D)), Par(Gen(R), Gen(R)),
                      "two copies of one random are correlated, not independent",
                      _force_dup_split),
    ]


# --- application and the fixpoint ------------------------------------------------

def _rule(rule) -> Rule:
    return RULES[rule] if isinstance(rule, str) else rule


def apply_rule(g: Graph, rule: Rule | str, site: int) -> Graph:
    """One rewrite step on a copy of ``g``."""
    rule = _rule(rule)
    if not rule.matches(g, site):
        raise NoMatchError(f"{rule.name} does not match at node {site}")
    out = g.copy()
    rule.rewrite(out, site)
    return out


@dataclass
class RewriteTrace:
    initial: Graph
    final: Graph | None = None
    steps: list[tuple[str, int]] = field(default_factory=list)
    header: dict[str, str] = field(default_factory=dict)

    def to_text(self) -> str:
        lines = [f"# {k} {v}" for k, v in self.header.items()]
        lines += [f"{name}@{site}" for name, site in self.steps]
        return "\n".join(lines) + "\n"


class ReplayError(ValueError):
    def __init__(self, step: int, message: str):
        super().__init__(f"step {step}: {message}")
        self.step = step


def parse_trace(text: str) -> tuple[dict[str, str], list[tuple[str, int]]]:
    header: dict[str, str] = {}
    steps = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition(" ")
            header[key] = value.strip()
            continue
        name, at, site = line.partition("@")
        if not at or not site.strip().lstrip("-").isdigit():
            raise ReplayError(len(steps) + 1, f"line {lineno}: expected 'rule@site', got {line!r}")
        steps.append((name.strip(), int(site)))
    return header, steps


def replay(initial: Graph, steps, check: bool = True) -> Graph:
    """Re-run ``steps`` from ``initial``; with ``check`` every step is
    confirmed semantics-preserving."""
    g = initial.copy()
    ref = eval_graph(g) if check else None
    for i, (name, site) in enumerate(steps, 1):
        if name not in RULES:
            raise ReplayError(i, f"unknown rule {name!r}")
        rule = RULES[name]
        if not rule.matches(g, site):
            raise ReplayError(i, f"site mismatch: {name} does not apply at node {site}")
        rule.rewrite(g, site)
        if check and eval_graph(g) != ref:
            raise ReplayError(i, f"{name}@{site} changed the correlation matrix")
    return g


def _erase_rule(g: Graph, e: int) -> Rule | None:
    src, _ = g.producer(e, 0)
    kind = g.nodes[src].kind
    if kind in (X, A):
        return RULES["R4"]
    if kind is R:
        return RULES["R6"]
    if kind in (F, T):
        return RULES["R7"]
    if kind is D:
        return RULES["R8"] if _dup_both_match(g, e) else RULES["R3"]
    return None


_GATE_RULES = ("R5", "R1", "R2")


def propagate_erases(g: Graph, step_limit: int | None = None) -> tuple[Graph, RewriteTrace]:
    """Push erases toward the inputs until no rule applies.

    Erase nodes are handled first-in first-out in creation order; when the
    queue is empty, the lowest-id gate matching the cut or a unit law is
    rewritten and any erase it creates joins the queue.
    """
    work = g.copy()
    trace = RewriteTrace(initial=g.copy())
    queue = deque(work.generator_nodes(E))
    gates = len(work.generator_nodes())
    limit = step_limit if step_limit is not None else max(gates, 1) ** 2 + 2 * gates + 4
    while True:
        if len(trace.steps) > limit:
            raise RuntimeError(f"erase propagation exceeded {limit} steps")
        if queue:
            e = queue.popleft()
            if e not in work.nodes:
                continue
            rule = _erase_rule(work, e)
            if rule is None:
                continue
            queue.extend(rule.rewrite(work, e))
            trace.steps.append((rule.name, e))
            continue
        hit = None
        for nid in work.generator_nodes():
            for name in _GATE_RULES:
                if RULES[name].matches(work, nid):
                    hit = (RULES[name], nid)
                    break
            if hit:
                break
        if hit is None:
            break
        rule, nid = hit
        queue.extend(rule.rewrite(work, nid))
        trace.steps.append((rule.name, nid))
    trace.final = work
    return work, trace


def erased_inputs(g: Graph) -> set[int]:
    """Indices of inputs wired straight into an ``Erase``."""
    out = set()
    for nid in g.inputs:
        dst, _ = g.consumer(nid, 0)
        if g.nodes[dst].kind is E:
            out.add(g.nodes[nid].index)
    return out


def residue(g: Graph) -> dict[str, int]:
    """Generator counts left in ``g``, erases on inputs included."""
    counts: dict[str, int] = {}
    for node in g.nodes.values():
        if not isinstance(node.kind, Boundary):
            counts[node.kind.label] = counts.get(node.kind.label, 0) + 1
    return counts

