"""JSON, DOT and CSV renderings of analysis results, plus the JSON schemas they follow."""
from __future__ import annotations

import csv
import io
import math
from typing import Optional

from .bisim import PROBABILISTIC, STRONG, WEAK, MaxBisimulation, QuotientStrong, QuotientWeak
from .matrix import BooleanMatrix, RationalMatrix
from .model import BcnModel, TargetSet
from .stabilize import SynthesisResult, StabilizationAnalysis


def boolean_json(mat: BooleanMatrix, dense: bool = False) -> dict:
    out = {"rows": mat.rows, "cols": mat.cols, "delta": mat.to_delta_text()}
    if dense:
        out["bits"] = mat.to_bitstrings()
    return out


def rational_json(mat: RationalMatrix) -> dict:
    return {"rows": mat.shape[0], "cols": mat.shape[1],
            "entries": [[str(f) for f in row] for row in mat.to_fractions().tolist()]}


def _time(t: float):
    return None if t == math.inf else int(t)


def model_summary(model) -> dict:
    return {"n": model.n, "m": model.m, "N": model.N, "M": model.M,
            "modes": len(model.modes) if hasattr(model, "modes") else 1}


def reduce_report(mb: MaxBisimulation, quotient, target: TargetSet, dense: bool = False) -> dict:
    part = mb.partition
    out = {"method": mb.mode, "holds": mb.k_star == 0, "k_star": mb.k_star, "N": part.N,
           "N_A": part.n_blocks, "partition": part.blocks(), "target": list(target.members),
           "quotient_target": list(part.project_target(target).members)}
    if isinstance(quotient, QuotientWeak):
        out["quotient"] = {"kind": "reachability", "psi1": boolean_json(quotient.psi1, dense)}
    elif isinstance(quotient, QuotientStrong):
        q = {"kind": "transition", "M": quotient.M, "F": boolean_json(quotient.F, dense)}
        if quotient.is_logical():
            q["F"]["logical"] = quotient.as_logical().delta
        out["quotient"] = q
    else:
        out["quotient"] = {"kind": "probabilistic", "F": rational_json(quotient)}
    return out


def check_report(analysis: StabilizationAnalysis, dense: bool = False) -> dict:
    rep = analysis.report
    labels = analysis.bisimulation.partition.labels
    blocks = sorted(set(analysis.layers.uncovered()) | set(rep.uncovered))
    return {"method": analysis.method, "stabilizable": rep.stabilizable,
            "k_star": analysis.bisimulation.k_star, "N_A": analysis.quotient_target.ambient,
            "quotient_target": list(analysis.quotient_target.members), "l_star": rep.l_star,
            "psi": boolean_json(rep.psi, dense),
            "layers": [list(layer) for layer in analysis.layers.layers],
            "uncovered_blocks": blocks,
            "uncovered_states": [i + 1 for i, b in enumerate(labels) if int(b) + 1 in blocks]}


def synthesis_report(analysis: StabilizationAnalysis, result: SynthesisResult) -> dict:
    return {"method": analysis.method, "stabilizable": True, "l_star": analysis.report.l_star,
            "layers": [list(layer) for layer in result.layers.layers],
            "state_layer": list(result.state_layer),
            "theta": {str(i): list(opts) for i, opts in result.theta.items()},
            "canonical_G": {"rows": result.M, "delta": result.canonical_G.delta},
            "family_size": str(result.family_size)}


def simulation_report(trajectories: dict[int, list[int]], times: list[float], target: Optional[TargetSet]) -> dict:
    out = {"steps": len(next(iter(trajectories.values()))) - 1,
           "initial_states": sorted(trajectories),
           "final_states": [trajectories[x][-1] for x in sorted(trajectories)]}
    if target is not None:
        out["target"] = list(target.members)
        out["stabilization_time"] = [_time(times[x - 1]) for x in sorted(trajectories)]
        finite = [t for t in out["stabilization_time"] if t is not None]
        out["all_stabilized"] = len(finite) == len(out["stabilization_time"])
        out["max_time"] = max(finite) if out["all_stabilized"] else None
    return out


def trajectories_csv(trajectories: dict[int, list[int]]) -> str:
    """Long-format plot data: one row per (initial_state, step)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if len(trajectories) == 1:
        w.writerow(["step", "state_index"])
        (traj,) = trajectories.values()
        w.writerows(enumerate(traj))
    else:
        w.writerow(["initial_state", "step", "state"])
        for x0 in sorted(trajectories):
            w.writerows((x0, t, s) for t, s in enumerate(trajectories[x0]))
    return buf.getvalue()


def _block_label(members: list[int]) -> str:
    runs, start = [], members[0]
    for a, b in zip(members, members[1:] + [None]):
        if b != a + 1:
            runs.append(str(start) if start == a else f"{start}:{a}")
            start = b
    return ",".join(runs)


def quotient_dot(mb: MaxBisimulation, quotient, target: TargetSet) -> str:
    part = mb.partition
    qt = part.project_target(target)
    lines = ["digraph quotient {", "  rankdir=LR;"]
    for a, members in enumerate(part.blocks(), 1):
        shape = "doublecircle" if a in qt else "circle"
        lines.append(f'  q{a} [shape={shape}, label="{a}\\n{{{_block_label(members)}}}"];')
    if isinstance(quotient, QuotientWeak):
        for j, col in enumerate(quotient.psi1.column_sets(), 1):
            lines.extend(f"  q{j} -> q{i};" for i in col)
    elif isinstance(quotient, QuotientStrong):
        edges: dict[tuple[int, int], list[int]] = {}
        for q in range(1, quotient.M + 1):
            for j, col in enumerate(quotient.block(q).column_sets(), 1):
                for i in col:
                    edges.setdefault((j, i), []).append(q)
        lines.extend(f'  q{j} -> q{i} [label="{",".join(map(str, us))}"];' for (j, i), us in sorted(edges.items()))
    else:
        fr = quotient.to_fractions()
        n = fr.shape[0]
        M = fr.shape[1] // n
        for a in range(n):
            for q in range(M):
                for b in range(n):
                    if fr[b, a * M + q]:
                        lines.append(f'  q{a + 1} -> q{b + 1} [label="u{q + 1}: {fr[b, a * M + q]}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def model_dot(model: BcnModel, target: Optional[TargetSet] = None) -> str:
    lines = ["digraph model {"]
    for x in range(1, model.N + 1):
        shape = "doublecircle" if target is not None and x in target else "circle"
        lines.append(f"  x{x} [shape={shape}, label=\"{x}\"];")
    table = model.successor_table()
    for x in range(model.N):
        edges: dict[int, list[int]] = {}
        for u in range(model.M):
            edges.setdefault(int(table[x, u]) + 1, []).append(u + 1)
        lines.extend(f'  x{x + 1} -> x{y} [label="{",".join(map(str, us))}"];' for y, us in sorted(edges.items()))
    lines.append("}")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# schemas

_INTS = {"type": "array", "items": {"type": "integer", "minimum": 1}}
_BOOL_MATRIX = {"type": "object", "required": ["rows", "cols", "delta"],
                "properties": {"rows": {"type": "integer"}, "cols": {"type": "integer"},
                               "delta": {"type": "string", "pattern": r"^delta\(\d+\)\[.*\]$"},
                               "bits": {"type": "array", "items": {"type": "string", "pattern": "^[01]*$"}}}}
_LOGICAL = {"type": "object", "required": ["rows", "cols", "delta"],
            "properties": {"rows": {"type": "integer"}, "cols": {"type": "integer"}, "delta": _INTS}}

SCHEMAS = {
    "model": {
        "type": "object", "required": ["N", "M"],
        "properties": {"n": {"type": ["integer", "null"]}, "m": {"type": ["integer", "null"]},
                       "N": {"type": "integer", "minimum": 1}, "M": {"type": "integer", "minimum": 1},
                       "state_names": {"type": "array", "items": {"type": "string"}},
                       "input_names": {"type": "array", "items": {"type": "string"}},
                       "F": _LOGICAL,
                       "modes": {"type": "array", "minItems": 1, "items": {
                           "type": "object", "required": ["p", "F"],
                           "properties": {"p": {"type": "string"}, "F": _LOGICAL}}},
                       "target": _INTS},
        "oneOf": [{"required": ["F"]}, {"required": ["modes"]}],
    },
    "reduce": {
        "type": "object",
        "required": ["method", "holds", "k_star", "N", "N_A", "partition", "quotient"],
        "properties": {"method": {"enum": [WEAK, STRONG, PROBABILISTIC]}, "holds": {"type": "boolean"},
                       "k_star": {"type": "integer", "minimum": 0}, "N": {"type": "integer"},
                       "N_A": {"type": "integer"}, "partition": {"type": "array", "items": _INTS},
                       "target": _INTS, "quotient_target": _INTS,
                       "quotient": {"type": "object", "required": ["kind"],
                                    "properties": {"kind": {"enum": ["reachability", "transition",
                                                                     "probabilistic"]}}}},
    },
    "check": {
        "type": "object",
        "required": ["method", "stabilizable", "k_star", "N_A", "l_star", "layers", "uncovered_states"],
        "properties": {"method": {"enum": [WEAK, STRONG]}, "stabilizable": {"type": "boolean"},
                       "k_star": {"type": "integer"}, "N_A": {"type": "integer"},
                       "quotient_target": _INTS, "l_star": {"type": "integer", "minimum": 1},
                       "psi": _BOOL_MATRIX, "layers": {"type": "array", "items": _INTS},
                       "uncovered_blocks": {"type": "array"}, "uncovered_states": {"type": "array"}},
    },
    "synthesize": {
        "type": "object",
        "required": ["stabilizable", "l_star", "layers", "theta", "canonical_G", "family_size"],
        "properties": {"stabilizable": {"const": True}, "l_star": {"type": "integer"},
                       "layers": {"type": "array", "items": _INTS},
                       "theta": {"type": "object", "patternProperties": {r"^\d+$": _INTS},
                                 "additionalProperties": False},
                       "canonical_G": {"type": "object", "required": ["delta"], "properties": {"delta": _INTS}},
                       "family_size": {"type": "string", "pattern": r"^[1-9]\d*$"}},
    },
    "simulate": {
        "type": "object", "required": ["steps", "initial_states", "final_states"],
        "properties": {"steps": {"type": "integer", "minimum": 0}, "initial_states": _INTS,
                       "final_states": _INTS,
                       "stabilization_time": {"type": "array", "items": {"type": ["integer", "null"]}},
                       "all_stabilized": {"type": "boolean"}},
    },
}
