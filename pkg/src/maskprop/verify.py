"""Security notions as checkers.

``check_sim`` and ``check_pini`` play the erase-propagation game and, within
the enumeration cap, cross-check with the exhaustive oracle. NI and SNI are
decided by the oracle alone. The game answers Proved or NotShown, never
"impossible": only the oracle refutes.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field

from . import oracle
from .gadget import (
    Assignment, GadgetAst, GadgetError, InputDecl, Netlist, ObservationSpec, OutputDecl,
    observation_diagram, parse,
)
from .rewrite import RewriteTrace, erased_inputs, propagate_erases


class Syntactic(str, enum.Enum):
    PROVED = "Proved"
    NOT_SHOWN = "NotShown"
    NOT_APPLICABLE = "NotApplicable"


class OracleResult(str, enum.Enum):
    HOLDS = "Holds"
    FAILS = "Fails"
    SKIPPED = "Skipped"


class MissingDomainError(GadgetError):
    pass


@dataclass
class Verdict:
    prop: str
    syntactic: Syntactic
    oracle: OracleResult
    witness: dict = field(default_factory=dict)
    trace: RewriteTrace | None = None
    cap_exceeded: bool = False

    @property
    def passed(self) -> bool | None:
        """Oracle answer when it ran, else the game's proof; ``None`` when
        neither settles it."""
        if self.oracle is OracleResult.HOLDS:
            return True
        if self.oracle is OracleResult.FAILS:
            return False
        if self.syntactic is Syntactic.PROVED:
            return True
        return None

    @property
    def consistent(self) -> bool:
        return not (self.syntactic is Syntactic.PROVED and self.oracle is OracleResult.FAILS)

    def to_dict(self) -> dict:
        return {"property": self.prop, "case": self.witness.get("case", ""),
                "result": {"syntactic": self.syntactic.value, "oracle": self.oracle.value,
                           "passed": self.passed},
                "witness": {k: v for k, v in self.witness.items() if k != "case"},
                "trace": self.witness.get("trace_file")}

    def to_text(self) -> str:
        status = {True: "PASS", False: "FAIL", None: "UNDECIDED"}[self.passed]
        parts = [f"{self.prop}: {status} (game {self.syntactic.value}, oracle {self.oracle.value})"]
        for k, v in self.witness.items():
            if k in ("case", "trace_file"):
                continue
            parts.append(f"  {k}: {_fmt(v)}")
        return "\n".join(parts) + "\n"


def _fmt(v) -> str:
    if isinstance(v, (list, tuple, set, frozenset)):
        items = sorted(v) if isinstance(v, (set, frozenset)) else list(v)
        return "{" + ", ".join(str(x) for x in items) + "}"
    return str(v)


def _play(nl: Netlist, obs: ObservationSpec):
    g = observation_diagram(nl, obs)
    fixpoint, trace = propagate_erases(g)
    names = [nl.inputs[i] for i in sorted(erased_inputs(fixpoint))]
    return fixpoint, trace, names


def check_sim(nl: Netlist, obs: ObservationSpec, d: int, use_oracle: bool = True,
              cap: int | None = None) -> Verdict:
    """Can the observed items be simulated from at most ``d`` inputs?"""
    obs.validate(nl)
    _, trace, erased = _play(nl, obs)
    needed = [w for w in nl.inputs if w not in erased]
    syn = Syntactic.PROVED if len(needed) <= d else Syntactic.NOT_SHOWN
    witness = {"case": f"observe={','.join(obs.labels()) or '-'} d={d}",
               "observed": obs.labels(), "erased": erased, "needed": needed}
    result, capped = OracleResult.SKIPPED, False
    if use_oracle:
        try:
            ok, support = oracle.oracle_simulatable(nl, obs, d, cap)
        except oracle.BitCapExceeded:
            capped = True
        else:
            result = OracleResult.HOLDS if ok else OracleResult.FAILS
            witness["support"] = list(support.inputs)
    return Verdict("sim", syn, result, witness, trace, capped)


def _require_domains(nl: Netlist):
    missing = [w for w in nl.inputs if nl.input_domains.get(w) is None]
    missing += [o for o in nl.outputs if nl.output_domains.get(o) is None]
    if missing:
        raise MissingDomainError(f"no domain annotation on {', '.join(missing)}")


def _domains_erased(nl: Netlist, erased_names) -> set[int]:
    erased = set(erased_names)
    domains: dict[int, list[str]] = {}
    for w in nl.inputs:
        domains.setdefault(nl.input_domains[w], []).append(w)
    return {d for d, ws in domains.items() if all(w in erased for w in ws)}


def domains_receiving_erase(nl: Netlist, obs: ObservationSpec) -> set[int]:
    """Domains all of whose input shares end in an erase at the fixpoint."""
    _require_domains(nl)
    _, _, erased = _play(nl, obs)
    return _domains_erased(nl, erased)


@dataclass
class PiniCase:
    probes: tuple[str, ...]
    output_domains: tuple[int, ...]
    required: int
    erased_domains: frozenset
    passed: bool
    oracle_domains: frozenset | None = None
    oracle_passed: bool | None = None

    @property
    def label(self) -> str:
        return (f"probes={','.join(self.probes) or '-'} "
                f"outputs={','.join(map(str, self.output_domains)) or '-'}")


@dataclass
class PiniReport:
    t: int
    cases: list[PiniCase]
    oracle_ran: bool = True

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.cases)

    @property
    def failures(self) -> list[PiniCase]:
        return [c for c in self.cases if not c.passed]

    @property
    def soundness_violations(self) -> list[PiniCase]:
        return [c for c in self.cases if c.passed and c.oracle_passed is False]

    def to_dict(self) -> dict:
        return {
            "property": "pini", "t": self.t, "passed": self.passed,
            "cases": [{"case": c.label, "result": "pass" if c.passed else "fail",
                       "witness": {"required": c.required,
                                   "erased_domains": sorted(c.erased_domains),
                                   "oracle_domains": None if c.oracle_domains is None
                                   else sorted(c.oracle_domains),
                                   "oracle_passed": c.oracle_passed},
                       "trace": None} for c in self.cases],
        }

    def to_text(self) -> str:
        lines = [f"pini t={self.t}: {'PASS' if self.passed else 'FAIL'}"]
        for c in self.cases:
            ora = "" if c.oracle_domains is None else f" oracle={_fmt(c.oracle_domains)}"
            lines.append(f"  {'ok  ' if c.passed else 'FAIL'} {c.label} need>={c.required} "
                         f"erased={_fmt(c.erased_domains)}{ora}")
        return "\n".join(lines) + "\n"


def probe_candidates(nl: Netlist) -> tuple[str, ...]:
    """Every wire an adversary may probe: inputs, randoms, gate outputs."""
    return tuple(w for w in nl.wires if not w.endswith("#true"))


def check_pini(nl: Netlist, t: int, max_probes: int, use_oracle: bool = True,
               cap: int | None = None, candidates=None) -> PiniReport:
    """Every probe set of size ``p <= max_probes`` and output-domain set of
    size ``o`` with ``p + o < t`` must leave ``t - (p + o)`` input domains
    fully erased."""
    _require_domains(nl)
    candidates = probe_candidates(nl) if candidates is None else tuple(candidates)
    out_domains = sorted({nl.output_domains[o] for o in nl.outputs})
    cases = []
    oracle_ran = use_oracle
    for p in range(0, min(max_probes, t - 1) + 1):
        for probes in oracle.subsets(candidates, p, p):
            for o in range(0, t - p):
                for doms in oracle.subsets(out_domains, o, o):
                    outs = tuple(x for x in nl.outputs if nl.output_domains[x] in doms)
                    obs = ObservationSpec(outs, tuple(probes))
                    need = t - (p + o)
                    got = frozenset(domains_receiving_erase(nl, obs))
                    case = PiniCase(tuple(probes), tuple(doms), need, got, len(got) >= need)
                    if oracle_ran:
                        try:
                            s = oracle.dependency_support(nl, obs, cap)
                        except oracle.BitCapExceeded:
                            oracle_ran = False
                        else:
                            od = frozenset(_domains_erased(
                                nl, [w for w in nl.inputs if w not in s.inputs]))
                            case.oracle_domains = od
                            case.oracle_passed = len(od) >= need
                    cases.append(case)
    return PiniReport(t, cases, oracle_ran)


def _obs_sets(nl: Netlist, d: int):
    outs = [("out", o) for o in nl.outputs]
    internal = [("probe", w) for w in probe_candidates(nl)]
    return oracle.subsets(outs + internal, d, 1)


def _check_ni(nl: Netlist, d: int, strong: bool, cap: int | None) -> Verdict:
    name = "sni" if strong else "ni"
    if not nl.sharings:
        raise GadgetError(f"{name} needs sharing groups on the inputs")
    if d == 0:
        return Verdict(name, Syntactic.PROVED, OracleResult.HOLDS, {"case": "d=0"})
    try:
        oracle._check_cap(nl, cap)
    except oracle.BitCapExceeded:
        return Verdict(name, Syntactic.NOT_APPLICABLE, OracleResult.SKIPPED,
                       {"case": f"d={d}"}, cap_exceeded=True)
    for sel in _obs_sets(nl, d):
        obs = ObservationSpec(tuple(n for k, n in sel if k == "out"),
                              tuple(n for k, n in sel if k == "probe"))
        support = oracle.dependency_support(nl, obs, cap)
        limit = len(obs.probes) if strong else d
        for group, shares in nl.sharings.items():
            used = [s for s in shares if s in support.inputs]
            if len(used) > limit:
                return Verdict(name, Syntactic.NOT_APPLICABLE, OracleResult.FAILS,
                               {"case": f"d={d}", "observed": obs.labels(), "group": group,
                                "shares": used, "limit": limit})
    return Verdict(name, Syntactic.NOT_APPLICABLE, OracleResult.HOLDS, {"case": f"d={d}"})


def check_ni(nl: Netlist, d: int, cap: int | None = None) -> Verdict:
    """Every set of at most ``d`` observations reads at most ``d`` shares of
    each sharing."""
    return _check_ni(nl, d, False, cap)


def check_sni(nl: Netlist, d: int, cap: int | None = None) -> Verdict:
    """Like NI, but the share budget is the number of internal probes."""
    return _check_ni(nl, d, True, cap)


# --- composition ----------------------------------------------------------------

def compose(f: GadgetAst, g: GadgetAst, wiring: dict[str, str]) -> GadgetAst:
    """``f`` after ``g``: each g-output named in ``wiring`` feeds the f-input
    it maps to. Wires are renamed with ``g.``/``f.`` prefixes, which keeps
    randoms disjoint."""
    g_outs = {o.name: o for o in g.outputs}
    f_ins = {i.name: i for i in f.inputs}
    used = set()
    for go, fi in wiring.items():
        if go not in g_outs:
            raise GadgetError(f"wiring source {go!r} is not an output of {g.name}")
        if fi not in f_ins:
            raise GadgetError(f"wiring target {fi!r} is not an input of {f.name}")
        if fi in used:
            raise GadgetError(f"input {fi!r} of {f.name} is wired twice")
        used.add(fi)
        if g_outs[go].domain != f_ins[fi].domain:
            raise GadgetError(f"domain mismatch: {g.name}.{go} is in domain "
                              f"{g_outs[go].domain}, {f.name}.{fi} in {f_ins[fi].domain}")

    def G(w):
        return f"g.{w}"

    def F(w):
        return f"f.{w}"

    inputs = [InputDecl(G(i.name), i.domain, None if i.share is None else G(i.share))
              for i in g.inputs]
    inputs += [InputDecl(F(i.name), i.domain, None if i.share is None else F(i.share))
               for i in f.inputs if i.name not in used]
    assigns = [Assignment(G(a.target), a.op, tuple(G(x) for x in a.args)) for a in g.assignments]
    assigns += [Assignment(F(fi), "copy", (G(go),)) for go, fi in wiring.items()]
    assigns += [Assignment(F(a.target), a.op, tuple(F(x) for x in a.args)) for a in f.assignments]
    outputs = [OutputDecl(F(o.name), o.domain) for o in f.outputs]
    outputs += [OutputDecl(G(o.name), o.domain) for o in g.outputs if o.name not in wiring]
    probes = [G(p) for p in g.probes] + [F(p) for p in f.probes]
    ast = GadgetAst(f"{f.name}_o_{g.name}", tuple(inputs), tuple(G(r) for r in g.randoms)
                    + tuple(F(r) for r in f.randoms), tuple(assigns), tuple(outputs), tuple(probes))
    parse(ast.to_source())  # re-check every structural invariant
    return ast


def valid_wirings(f: GadgetAst, g: GadgetAst, include_empty: bool = False):
    """Every injective, domain-consistent partial map from g-outputs to
    f-inputs."""
    outs = list(g.outputs)
    ins = list(f.inputs)

    def rec(i, used, acc):
        if i == len(outs):
            if acc or include_empty:
                yield dict(acc)
            return
        yield from rec(i + 1, used, acc)
        for fi in ins:
            if fi.name not in used and fi.domain == outs[i].domain:
                acc[outs[i].name] = fi.name
                yield from rec(i + 1, used | {fi.name}, acc)
                del acc[outs[i].name]

    yield from rec(0, frozenset(), {})


def report_json(obj) -> str:
    return json.dumps(obj.to_dict(), indent=2, sort_keys=True) + "\n"
