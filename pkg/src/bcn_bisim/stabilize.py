"""Set stabilizability on quotient systems and time-optimal state-feedback synthesis."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .bisim import (STRONG, WEAK, MaxBisimulation, Partition, QuotientStrong, QuotientWeak, max_bisimulation,
                    one_step_reachability, quotient_strong, quotient_weak, relation_from_target)
from .matrix import BooleanMatrix, LogicalMatrix, bool_power, bool_product, power_reducing, stp
from .model import BcnModel, TargetError, TargetSet


class NotStabilizableError(RuntimeError):
    def __init__(self, message: str, uncovered_blocks: Sequence[int] = (), uncovered_states: Sequence[int] = ()):
        super().__init__(message)
        self.uncovered_blocks = tuple(uncovered_blocks)
        self.uncovered_states = tuple(uncovered_states)


def gamma_matrix(target: TargetSet, n: Optional[int] = None) -> BooleanMatrix:
    """Diagonal selector: column i is delta_n^i for members of the target, zero otherwise."""
    n = target.ambient if n is None else n
    if target.ambient != n:
        raise TargetError(f"target lives in Delta_{target.ambient}, expected Delta_{n}")
    return BooleanMatrix(np.diag(target.mask()))


def reachability_matrix(psi1: BooleanMatrix) -> tuple[BooleanMatrix, int]:
    """OR of the Boolean powers psi1, psi1^2, ... up to the first power that repeats an earlier one.

    Returns ``(psi, l_star)`` where psi_{l_star + 1} is the first repeated power.
    """
    seen = [psi1]
    while True:
        nxt = bool_product(seen[-1], psi1)
        if nxt in seen:
            break
        seen.append(nxt)
    acc = np.zeros(psi1.shape, dtype=bool)
    for p in seen:
        acc |= p.data
    return BooleanMatrix(acc), len(seen)


@dataclass(frozen=True)
class StabilizationReport:
    target: TargetSet
    gamma: BooleanMatrix
    l_star: int
    psi: BooleanMatrix
    criterion: BooleanMatrix  # the 1 x n row vector on the left of the test
    stabilizable: bool

    @property
    def uncovered(self) -> tuple[int, ...]:
        return tuple((np.flatnonzero(~self.criterion.data[0]) + 1).tolist())


def check_stabilizable(psi1: BooleanMatrix, target: TargetSet) -> StabilizationReport:
    """Evaluate 1^T (.) [(Gamma (.) psi1)^|A| Gamma (.) psi] = 1^T on a one-step matrix."""
    n = psi1.rows
    gamma = gamma_matrix(target, n)
    holding = bool_power(bool_product(gamma, psi1), len(target))
    psi, l_star = reachability_matrix(psi1)
    inner = bool_product(bool_product(holding, gamma), psi)
    row = bool_product(BooleanMatrix.ones(1, n), inner)
    return StabilizationReport(target, gamma, l_star, psi, row, bool(row.data.all()))


@dataclass(frozen=True)
class Layers:
    """Omega_0, Omega_1, ...: states by optimal number of steps to the holdable part of the target."""

    layers: tuple[tuple[int, ...], ...]
    size: int

    @property
    def k_max(self) -> int:
        return len(self.layers) - 1

    @property
    def layer_of(self) -> dict[int, int]:
        return {a: k for k, layer in enumerate(self.layers) for a in layer}

    @property
    def covers(self) -> bool:
        return sum(map(len, self.layers)) == self.size

    def uncovered(self) -> tuple[int, ...]:
        lo = self.layer_of
        return tuple(a for a in range(1, self.size + 1) if a not in lo)


def omega_layers(psi1: BooleanMatrix, target: TargetSet) -> Layers:
    """Omega_0 = target states with a length-|A| path inside the target; Omega_{k+1} = new predecessors of Omega_k."""
    n = psi1.rows
    gamma = gamma_matrix(target, n)
    holding = bool_power(bool_product(gamma, psi1), len(target)).data
    omega0 = tuple(a for a in target.members if holding[:, a - 1].any())
    layers = [omega0]
    assigned = np.zeros(n, dtype=bool)
    assigned[np.array(omega0, dtype=np.int64) - 1] = True
    current = assigned.copy()
    while current.any():
        hits = psi1.data[current].any(axis=0) & ~assigned
        if not hits.any():
            break
        layers.append(tuple((np.flatnonzero(hits) + 1).tolist()))
        assigned |= hits
        current = hits
    return Layers(tuple(layers) if omega0 else (), n)


@dataclass(frozen=True)
class SynthesisResult:
    layers: Layers
    state_layer: tuple[int, ...]       # optimal stabilization time of each original state
    theta: dict[int, tuple[int, ...]]  # admissible inputs per original state
    canonical_G: LogicalMatrix
    M: int

    @property
    def family_size(self) -> int:
        return math.prod(len(opts) for opts in self.theta.values())

    def admits(self, G: LogicalMatrix) -> bool:
        """True iff G lies in the product family of Theta sets."""
        return all(G.column(i) in opts for i, opts in self.theta.items())


def _build_result(layers: Layers, blocks: np.ndarray, theta_for) -> SynthesisResult:
    lo = layers.layer_of
    missing = sorted({int(b) + 1 for b in blocks} - lo.keys())
    if missing:
        states = [i + 1 for i, b in enumerate(blocks) if int(b) + 1 in missing]
        raise NotStabilizableError(f"quotient states {missing} lie outside every Omega layer", missing, states)
    theta, state_layer = {}, []
    for i0, b in enumerate(blocks):
        k = lo[int(b) + 1]
        target_layer = set(layers.layers[max(k - 1, 0)])
        opts = theta_for(i0, target_layer)
        if not opts:
            raise NotStabilizableError(f"state {i0 + 1} has no admissible input", (int(b) + 1,), (i0 + 1,))
        theta[i0 + 1] = opts
        state_layer.append(k)
    M = theta_for.M
    G = LogicalMatrix(M, [opts[0] for opts in theta.values()])
    return SynthesisResult(layers, tuple(state_layer), theta, G, M)


def synthesize_weak(model: BcnModel, partition: Partition, layers: Layers) -> SynthesisResult:
    """Theta_i = {r : block of F delta_M^r delta_N^i lies in Omega_b}, b = max(k - 1, 0)."""
    projected = stp(partition.projection(), model.F)  # column (r-1)N + i: block of successor
    succ_block = projected.index.reshape(model.M, model.N)

    def theta_for(i0, allowed):
        return tuple(r + 1 for r in range(model.M) if int(succ_block[r, i0]) + 1 in allowed)

    theta_for.M = model.M
    return _build_result(layers, partition.labels, theta_for)


def synthesize_strong(quotient: QuotientStrong, layers: Layers) -> SynthesisResult:
    """Theta_i = {r : Col_i(Fbar_r P) in Omega_b}; uses only the quotient and the projection P."""
    P = quotient.projection
    images = []
    for r in range(1, quotient.M + 1):
        moved = bool_product(quotient.block(r), P)
        if not moved.is_logical():
            raise ValueError("quotient is not a logical system; the partition is not a strong bisimulation")
        images.append(moved.to_logical().index)

    def theta_for(i0, allowed):
        return tuple(r + 1 for r in range(quotient.M) if int(images[r][i0]) + 1 in allowed)

    theta_for.M = quotient.M
    return _build_result(layers, P.index, theta_for)


# --------------------------------------------------------------------------
# closed loop


def closed_loop(model: BcnModel, G: LogicalMatrix) -> LogicalMatrix:
    """F G Phi_N: with u = Gx, x(t+1) = F G x x = F G Phi_N x."""
    if G.shape != (model.M, model.N):
        raise ValueError(f"feedback matrix must be {model.M}x{model.N}, got {G.shape[0]}x{G.shape[1]}")
    return stp(stp(model.F, G), power_reducing(model.N))


def simulate(model: BcnModel, G: LogicalMatrix, x0: int, steps: int) -> list[int]:
    L = closed_loop(model, G)
    traj = [x0]
    for _ in range(steps):
        traj.append(L.column(traj[-1]))
    return traj


def stabilization_time(model: BcnModel, G: LogicalMatrix, target: TargetSet) -> list[float]:
    """Per state, the first step from which the closed-loop trajectory never leaves the target (inf if none)."""
    nxt = closed_loop(model, G).index
    # states whose whole forward orbit stays in the target
    forever = target.mask().copy()
    while True:
        keep = forever & forever[nxt]
        if np.array_equal(keep, forever):
            break
        forever = keep
    times = []
    for x in range(model.N):
        t, seen = 0, set()
        while not forever[x] and x not in seen:
            seen.add(x)
            x = int(nxt[x])
            t += 1
        times.append(t if forever[x] else math.inf)
    return times


# --------------------------------------------------------------------------
# end-to-end


@dataclass(frozen=True)
class StabilizationAnalysis:
    method: str
    bisimulation: MaxBisimulation
    quotient: object  # QuotientWeak or QuotientStrong
    quotient_target: TargetSet
    report: StabilizationReport
    layers: Layers

    @property
    def quotient_one_step(self) -> BooleanMatrix:
        return self.quotient.psi1 if isinstance(self.quotient, QuotientWeak) else self.quotient.one_step()


def analyze(model: BcnModel, target: TargetSet, method: str = WEAK) -> StabilizationAnalysis:
    """Reduce by the maximal weak/strong bisimulation inside R_A and test stabilizability on the quotient."""
    if method not in (WEAK, STRONG):
        raise ValueError(f"stabilization supports weak or strong reduction, not {method!r}")
    mb = max_bisimulation(relation_from_target(target, model.N), model, method)
    if method == WEAK:
        quotient = quotient_weak(mb.partition, one_step_reachability(model))
        one_step = quotient.psi1
    else:
        quotient = quotient_strong(mb.partition, model)
        one_step = quotient.one_step()
    qtarget = mb.partition.project_target(target)
    return StabilizationAnalysis(method, mb, quotient, qtarget, check_stabilizable(one_step, qtarget),
                                 omega_layers(one_step, qtarget))


def synthesize(analysis: StabilizationAnalysis, model: BcnModel) -> SynthesisResult:
    if not analysis.report.stabilizable:
        blocks = analysis.layers.uncovered() or analysis.report.uncovered
        labels = analysis.bisimulation.partition.labels
        states = [i + 1 for i, b in enumerate(labels) if int(b) + 1 in blocks]
        raise NotStabilizableError("system is not stabilizable to the target", blocks, states)
    if analysis.method == WEAK:
        return synthesize_weak(model, analysis.bisimulation.partition, analysis.layers)
    return synthesize_strong(analysis.quotient, analysis.layers)
