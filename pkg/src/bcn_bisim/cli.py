"""bcn-bisim: compile, reduce, check, synthesize and simulate Boolean control networks.

Exit codes: 0 ok, 2 parse error, 3 bad arguments or target, 4 not stabilizable, 5 internal error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import reports
from .bisim import PROBABILISTIC, STRONG, WEAK, max_bisimulation, one_step_reachability, quotient_probabilistic, \
    quotient_strong, quotient_weak, relation_from_target
from .matrix import LogicalMatrix
from .model import BcnModel, ModelError, PbcnModel, TargetError, model_from_json, model_to_json
from .network import (NetworkSource, ParseError, assemble, parse, parse_index_target, parse_target,
                      target_members)
from .stabilize import NotStabilizableError, analyze, simulate, stabilization_time, synthesize

log = logging.getLogger("bcn_bisim")

EXIT_OK, EXIT_PARSE, EXIT_ARGS, EXIT_NEGATIVE, EXIT_INTERNAL = 0, 2, 3, 4, 5
METHODS = {"weak": WEAK, "strong": STRONG, "prob": PROBABILISTIC, "probabilistic": PROBABILISTIC}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ARGS, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="bcn-bisim", description="Bisimulation reduction and set stabilization of Boolean control networks.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, method=True, target=True):
        sp.add_argument("file", help=".bcn network or model .json")
        if method:
            sp.add_argument("--method", choices=sorted(METHODS), default="weak")
        if target:
            sp.add_argument("--target", help="override the target: {1, 3:5} or a predicate over state variables")
        sp.add_argument("--out", type=Path, help="write result files into this directory")
        sp.add_argument("--json", action="store_true", help="print the JSON result instead of a summary")
        sp.add_argument("--dense", action="store_true", help="include full 0/1 rows for Boolean matrices")

    sp = sub.add_parser("compile", help="compile a .bcn file to model JSON")
    common(sp, method=False, target=False)
    sp.add_argument("--dot", action="store_true", help="also emit the transition graph")

    sp = sub.add_parser("reduce", help="maximal bisimulation inside the target relation and its quotient")
    common(sp)
    sp.add_argument("--dot", action="store_true", help="also emit the quotient graph")

    sp = sub.add_parser("check", help="set stabilizability via the quotient")
    common(sp)

    sp = sub.add_parser("synthesize", help="time-optimal state-feedback family")
    common(sp)

    sp = sub.add_parser("simulate", help="closed-loop trajectories under a state feedback")
    common(sp)
    sp.add_argument("--feedback", help="feedback matrix as delta(M)[...] text or a JSON file; "
                                       "defaults to the canonical synthesized one")
    sp.add_argument("--steps", type=int, default=20)
    sp.add_argument("--x0", type=int, help="simulate one initial state instead of all")
    sp.add_argument("--csv", action="store_true", help="emit trajectories as CSV")
    return p


# --------------------------------------------------------------------------
# loading


def load(path: Path, target_text=None):
    """Return ``(model, target_or_None)`` from a .bcn or model .json file."""
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    if path.suffix == ".json":
        try:
            model, target = model_from_json(json.loads(text))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"invalid model JSON: {exc}") from None
        if target_text is not None:
            if model.state_names and model.n is not None and 2 ** model.n == model.N:
                target = parse_target(target_text, NetworkSource(model.state_names, model.input_names, {}))
            else:
                target = parse_index_target(target_text, model.N)
        return model, target
    src = parse(text)
    model = assemble(src)
    target = parse_target(target_text, src) if target_text is not None else target_members(src)
    return model, target


def _require_target(target):
    if target is None:
        raise TargetError("no target given: add a 'target =' line or pass --target")
    return target


def _method(args) -> str:
    return METHODS[args.method]


def _require_kind(model, method):
    if method == PROBABILISTIC and not isinstance(model, PbcnModel):
        raise UsageError("--method prob needs a probabilistic network")
    if method != PROBABILISTIC and not isinstance(model, BcnModel):
        raise UsageError(f"--method {method} needs a deterministic network; use --method prob")


def load_feedback(text: str, model) -> LogicalMatrix:
    path = Path(text)
    try:
        if path.suffix == ".json" and path.exists():
            obj = json.loads(path.read_text())
            obj = obj.get("canonical_G", obj)
            G = LogicalMatrix(obj.get("rows", model.M), obj["delta"])
        else:
            G = LogicalMatrix.from_text(text)
    except (ValueError, KeyError, TypeError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read feedback matrix: {exc}") from None
    if G.shape != (model.M, model.N):
        raise UsageError(f"feedback matrix must be {model.M}x{model.N}, got {G.shape[0]}x{G.shape[1]}")
    return G


# --------------------------------------------------------------------------
# commands; each returns (exit code, json document, summary text, extra files)


def cmd_compile(args, model, target):
    doc = model_to_json(model, target)
    extra = {"dot": reports.model_dot(model, target)} if args.dot and isinstance(model, BcnModel) else {}
    kind = f"{len(model.modes)} modes" if isinstance(model, PbcnModel) else "deterministic"
    return EXIT_OK, doc, f"n={model.n} m={model.m} N={model.N} M={model.M} ({kind})", extra


def _reduction(model, target, method):
    mb = max_bisimulation(relation_from_target(target, model.N), model, method)
    if method == WEAK:
        quotient = quotient_weak(mb.partition, one_step_reachability(model))
    elif method == STRONG:
        quotient = quotient_strong(mb.partition, model)
    else:
        quotient = quotient_probabilistic(mb.partition, model)
    return mb, quotient


def cmd_reduce(args, model, target):
    method = _method(args)
    _require_kind(model, method)
    mb, quotient = _reduction(model, _require_target(target), method)
    doc = reports.reduce_report(mb, quotient, target, args.dense)
    extra = {"dot": reports.quotient_dot(mb, quotient, target)} if args.dot else {}
    text = (f"{method} bisimulation: k*={mb.k_star} N_A={mb.partition.n_blocks} "
            f"(target relation is {'already' if mb.k_star == 0 else 'not'} a bisimulation)")
    if isinstance(doc["quotient"].get("F"), dict) and "logical" in doc["quotient"]["F"]:
        text += f"\nF_quotient = delta({mb.partition.n_blocks})[{' '.join(map(str, doc['quotient']['F']['logical']))}]"
    elif method == WEAK:
        text += f"\npsi1_quotient = {quotient.psi1.to_delta_text()}"
    return EXIT_OK, doc, text, extra


def _analysis(args, model, target):
    method = _method(args)
    if method == PROBABILISTIC:
        raise UsageError("stabilization is supported for --method weak or strong only")
    _require_kind(model, method)
    return analyze(model, _require_target(target), method)


def cmd_check(args, model, target):
    an = _analysis(args, model, target)
    doc = reports.check_report(an, args.dense)
    if an.report.stabilizable:
        return EXIT_OK, doc, f"stabilizable: yes (N_A={doc['N_A']}, l*={doc['l_star']})", {}
    return EXIT_NEGATIVE, doc, f"stabilizable: no; uncovered states {doc['uncovered_states']}", {}


def cmd_synthesize(args, model, target):
    an = _analysis(args, model, target)
    try:
        result = synthesize(an, model)
    except NotStabilizableError:
        doc = reports.check_report(an, args.dense)
        return EXIT_NEGATIVE, doc, f"not stabilizable; uncovered states {doc['uncovered_states']}", {}
    doc = reports.synthesis_report(an, result)
    text = (f"time-optimal feedback family of size {doc['family_size']}\n"
            f"canonical G = {result.canonical_G.to_text()}")
    return EXIT_OK, doc, text, {}


def cmd_simulate(args, model, target):
    if not isinstance(model, BcnModel):
        raise UsageError("simulate needs a deterministic network")
    if args.steps < 0:
        raise UsageError("--steps must be non-negative")
    if args.feedback:
        G = load_feedback(args.feedback, model)
    else:
        an = _analysis(args, model, target)
        try:
            G = synthesize(an, model).canonical_G
        except NotStabilizableError as exc:
            return EXIT_NEGATIVE, {"stabilizable": False, "uncovered_states": list(exc.uncovered_states)}, \
                f"not stabilizable; uncovered states {list(exc.uncovered_states)}", {}
    if args.x0 is not None and not 1 <= args.x0 <= model.N:
        raise UsageError(f"--x0 must lie in [1, {model.N}]")
    starts = [args.x0] if args.x0 is not None else range(1, model.N + 1)
    trajs = {x: simulate(model, G, x, args.steps) for x in starts}
    times = stabilization_time(model, G, target) if target is not None else []
    doc = reports.simulation_report(trajs, times, target)
    doc["feedback"] = {"rows": model.M, "delta": G.delta}
    extra = {"csv": reports.trajectories_csv(trajs)} if args.csv else {}
    text = f"simulated {len(trajs)} trajectories for {args.steps} steps"
    if target is not None:
        text += "; all stabilized" if doc["all_stabilized"] else "; some never stabilize"
        if doc["all_stabilized"]:
            text += f" within {doc['max_time']} steps"
    return EXIT_OK, doc, text, extra


COMMANDS = {"compile": cmd_compile, "reduce": cmd_reduce, "check": cmd_check,
            "synthesize": cmd_synthesize, "simulate": cmd_simulate}


def _emit(args, code, doc, text, extra):
    path = Path(args.file)
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        stem = args.out / f"{path.stem}.{args.command}"
        Path(f"{stem}.json").write_text(json.dumps(doc, indent=2) + "\n")
        for ext, content in extra.items():
            Path(f"{stem}.{ext}").write_text(content)
        print(json.dumps(doc, indent=2) if args.json else text)
        return
    chosen = [k for k in ("dot", "csv") if k in extra]
    if len(chosen) + bool(args.json) > 1:
        raise UsageError("several outputs requested on stdout; pass --out DIR")
    if chosen:
        sys.stdout.write(extra[chosen[0]])
    elif args.json:
        print(json.dumps(doc, indent=2))
    else:
        print(text)


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_ARGS
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        model, target = load(Path(args.file), getattr(args, "target", None))
        log.info("loaded %s: N=%d M=%d", args.file, model.N, model.M)
        code, doc, text, extra = COMMANDS[args.command](args, model, target)
        _emit(args, code, doc, text, extra)
        return code
    except ParseError as exc:
        print(f"{args.file}:{exc}" if exc.line else f"{args.file}: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (TargetError, ModelError, UsageError) as exc:
        print(f"bcn-bisim: {exc}", file=sys.stderr)
        return EXIT_ARGS
    except Exception as exc:  # noqa: BLE001 - last-resort exit code
        log.debug("internal error", exc_info=True)
        print(f"bcn-bisim: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
