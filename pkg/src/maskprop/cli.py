"""Command line: ``maskprop {matrix,check,render,replay}``.

Exit codes: 0 pass, 1 property fails or is refuted, 2 usage or parse error,
3 enumeration cap exceeded.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass

from . import diagram, oracle
from .gadget import GadgetError, ObservationSpec, elaborate, load, observation_diagram
from .rewrite import ReplayError, parse_trace, propagate_erases, replay
from .verify import check_ni, check_pini, check_sim, check_sni, report_json

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_CAP = 0, 1, 2, 3


@dataclass
class Config:
    cap: int = oracle.DEFAULT_BIT_CAP
    oracle: bool = True
    trace_path: str | None = None
    report_format: str = "text"
    report_path: str | None = None

    def __post_init__(self):
        if self.cap < 1:
            raise ValueError("bit cap must be at least 1")


def _observation(nl, names, default_all: bool):
    if names is None:
        return ObservationSpec.all_outputs(nl) if default_all else ObservationSpec()
    flat = [n for item in names for n in item.split(",") if n and n != "-"]
    return ObservationSpec.of(nl, flat)


def _emit(cfg: Config, text: str):
    if cfg.report_path:
        with open(cfg.report_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_matrix(args, cfg: Config) -> int:
    nl = elaborate(load(args.file))
    if args.observe is None:
        m = oracle.oracle_matrix(nl, cfg.cap)
    else:
        m = diagram.eval(observation_diagram(nl, _observation(nl, args.observe, False)))
    sys.stdout.write(m.format() + "\n")
    return EXIT_PASS


def cmd_check(args, cfg: Config, parser) -> int:
    nl = elaborate(load(args.file))
    prop = args.prop
    if prop == "sim":
        if args.d is None:
            parser.error("--prop sim needs --d")
        obs = _observation(nl, args.observe, True)
        v = check_sim(nl, obs, args.d, cfg.oracle, cfg.cap)
        if cfg.trace_path:
            v.trace.header.update({"gadget": nl.name,
                                   "observe": " ".join(obs.labels()) or "-"})
            with open(cfg.trace_path, "w") as fh:
                fh.write(v.trace.to_text())
            v.witness["trace_file"] = cfg.trace_path
        _emit(cfg, report_json(v) if cfg.report_format == "json" else v.to_text())
        if v.passed is None:
            return EXIT_CAP if v.cap_exceeded else EXIT_FAIL
        return EXIT_PASS if v.passed else EXIT_FAIL
    if prop == "pini":
        if args.t is None:
            parser.error("--prop pini needs -t")
        probes = args.probes if args.probes is not None else args.t - 1
        rep = check_pini(nl, args.t, probes, cfg.oracle, cfg.cap)
        _emit(cfg, report_json(rep) if cfg.report_format == "json" else rep.to_text())
        return EXIT_PASS if rep.passed else EXIT_FAIL
    if args.d is None:
        parser.error(f"--prop {prop} needs --d")
    v = (check_ni if prop == "ni" else check_sni)(nl, args.d, cfg.cap)
    _emit(cfg, report_json(v) if cfg.report_format == "json" else v.to_text())
    if v.passed is None:
        return EXIT_CAP if v.cap_exceeded else EXIT_FAIL
    return EXIT_PASS if v.passed else EXIT_FAIL


def cmd_render(args, cfg: Config) -> int:
    nl = elaborate(load(args.file))
    g = observation_diagram(nl, _observation(nl, args.observe, True))
    if args.after_rewrite:
        g, _ = propagate_erases(g)
    sys.stdout.write(diagram.to_dot(g, nl.name))
    return EXIT_PASS


def cmd_replay(args, cfg: Config) -> int:
    nl = elaborate(load(args.file))
    with open(args.trace) as fh:
        header, steps = parse_trace(fh.read())
    names = args.observe
    if names is None:
        names = header.get("observe", "-").split()
    g = observation_diagram(nl, _observation(nl, names, False))
    try:
        replay(g, steps, check=True)
    except ReplayError as exc:
        print(f"replay failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    print(f"replayed {len(steps)} step(s); correlation matrix preserved at every step")
    return EXIT_PASS


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="maskprop", description=__doc__.splitlines()[0])
    p.add_argument("--cap", type=int, default=None,
                   help="oracle bit cap (default $MASKPROP_BIT_CAP or 22)")
    sub = p.add_subparsers(dest="command", required=True)

    m = sub.add_parser("matrix", help="print a correlation matrix")
    m.add_argument("file")
    m.add_argument("--observe", nargs="*")

    c = sub.add_parser("check", help="check a security property")
    c.add_argument("file")
    c.add_argument("--prop", choices=["sim", "ni", "sni", "pini"], required=True)
    c.add_argument("--d", type=int)
    c.add_argument("-t", type=int)
    c.add_argument("--probes", type=int)
    c.add_argument("--observe", nargs="*")
    c.add_argument("--oracle", action=argparse.BooleanOptionalAction, default=True)
    c.add_argument("--format", choices=["text", "json"], default="text")
    c.add_argument("--report")
    c.add_argument("--trace")

    r = sub.add_parser("render", help="emit the observation diagram as Graphviz dot")
    r.add_argument("file")
    r.add_argument("--observe", nargs="*")
    r.add_argument("--after-rewrite", action="store_true")

    rp = sub.add_parser("replay", help="re-check a rewrite trace")
    rp.add_argument("file")
    rp.add_argument("trace")
    rp.add_argument("--observe", nargs="*")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = Config(cap=args.cap if args.cap is not None else oracle.default_cap(),
                     oracle=getattr(args, "oracle", True),
                     trace_path=getattr(args, "trace", None) if args.command == "check" else None,
                     report_format=getattr(args, "format", "text"),
                     report_path=getattr(args, "report", None))
    except ValueError as exc:
        parser.error(str(exc))
    try:
        if args.command == "matrix":
            return cmd_matrix(args, cfg)
        if args.command == "check":
            return cmd_check(args, cfg, parser)
        if args.command == "render":
            return cmd_render(args, cfg)
        return cmd_replay(args, cfg)
    except (GadgetError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except oracle.BitCapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP


if __name__ == "__main__":
    sys.exit(main())
