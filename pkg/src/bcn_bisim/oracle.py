"""Brute-force reference checks on the explicit controlled transition graph.

Everything here works state by state with plain Python sets, dicts and
Fractions so that it shares no code path with the matrix engine.  It is
meant for small instances in tests.
"""
from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional

WEAK, STRONG, PROBABILISTIC = "weak", "strong", "probabilistic"


@dataclass
class ExplicitGraph:
    """States and inputs are 1-based.  ``succ[(x, u)]`` is a state, ``dist[(x, u)]`` a {state: Fraction} map."""

    N: int
    M: int
    succ: dict = field(default_factory=dict)
    dist: dict = field(default_factory=dict)

    @classmethod
    def from_model(cls, model) -> "ExplicitGraph":
        g = cls(model.N, model.M)
        if hasattr(model, "modes"):
            for F, p in zip(model.modes, model.probabilities):
                cols = F.delta
                for u in range(1, model.M + 1):
                    for x in range(1, model.N + 1):
                        d = g.dist.setdefault((x, u), {})
                        y = cols[(u - 1) * model.N + x - 1]
                        d[y] = d.get(y, Fraction(0)) + Fraction(p)
        else:
            cols = model.F.delta
            for u in range(1, model.M + 1):
                for x in range(1, model.N + 1):
                    g.succ[(x, u)] = cols[(u - 1) * model.N + x - 1]
        return g

    @property
    def probabilistic(self) -> bool:
        return bool(self.dist)

    def check_total(self):
        for x in range(1, self.N + 1):
            for u in range(1, self.M + 1):
                if self.probabilistic:
                    assert sum(self.dist[(x, u)].values()) == 1
                else:
                    assert 1 <= self.succ[(x, u)] <= self.N


def pairs_of(relation) -> set:
    """Accept a set of 1-based pairs, a list of blocks, or anything with a boolean ``.data`` array."""
    if hasattr(relation, "data"):
        R = relation.data
        return {(i + 1, j + 1) for i in range(R.shape[0]) for j in range(R.shape[1]) if R[i, j]}
    relation = list(relation)
    if relation and not isinstance(relation[0], tuple):
        return {(a, b) for block in relation for a in block for b in block}
    return set(relation)


def blocks_of(pairs: set, N: int) -> list[list[int]]:
    """Classes of an equivalence given as pairs, ordered by smallest member."""
    seen, out = set(), []
    for i in range(1, N + 1):
        if i in seen:
            continue
        block = sorted(j for j in range(1, N + 1) if (i, j) in pairs)
        seen.update(block)
        out.append(block)
    return out


def _weak_ok(x, y, R, g):
    for u in range(1, g.M + 1):
        if not any((g.succ[(x, u)], g.succ[(y, v)]) in R for v in range(1, g.M + 1)):
            return False
    for v in range(1, g.M + 1):
        if not any((g.succ[(x, u)], g.succ[(y, v)]) in R for u in range(1, g.M + 1)):
            return False
    return True


def _strong_ok(x, y, R, g):
    return all((g.succ[(x, u)], g.succ[(y, u)]) in R for u in range(1, g.M + 1))


def _block_probs(d, block_index):
    out = {}
    for y, p in d.items():
        out[block_index[y]] = out.get(block_index[y], Fraction(0)) + p
    return out


def _prob_ok(x, y, R, g, index=None):
    if index is None:
        index = {s: min(b) for b in blocks_of(R, g.N) for s in b}
    return all(_block_probs(g.dist[(x, u)], index) == _block_probs(g.dist[(y, u)], index)
               for u in range(1, g.M + 1))


_CHECKS = {WEAK: _weak_ok, STRONG: _strong_ok, PROBABILISTIC: _prob_ok}


def oracle_is_weak(relation, graph: ExplicitGraph) -> bool:
    R = pairs_of(relation)
    return all(_weak_ok(x, y, R, graph) for x, y in R)


def oracle_is_strong(relation, graph: ExplicitGraph) -> bool:
    R = pairs_of(relation)
    return all(_strong_ok(x, y, R, graph) for x, y in R)


def oracle_is_prob_one_step(relation, graph: ExplicitGraph) -> bool:
    R = pairs_of(relation)
    index = {s: min(b) for b in blocks_of(R, graph.N) for s in b}
    return all(_prob_ok(x, y, R, graph, index) for x, y in R)


def oracle_max_bisim(relation, graph: ExplicitGraph, mode: str = WEAK) -> list[list[int]]:
    """Delete violating pairs until nothing changes; returns the blocks of what is left."""
    ok = _CHECKS[mode]
    R = pairs_of(relation)
    while True:
        if mode == PROBABILISTIC:
            index = {s: min(b) for b in blocks_of(R, graph.N) for s in b}
            bad = {(x, y) for x, y in R if not _prob_ok(x, y, R, graph, index)}
        else:
            bad = {(x, y) for x, y in R if not ok(x, y, R, graph)}
        if not bad:
            break
        R -= bad
    # the greatest fixpoint inside an equivalence is again an equivalence
    for x, y in R:
        assert (y, x) in R
    return blocks_of(R, graph.N)


def oracle_stabilizable(graph: ExplicitGraph, target: Iterable[int]) -> tuple[bool, list[float]]:
    """Largest controlled-invariant core of the target, then backward BFS to it.

    Returns ``(stabilizable, times)`` with ``times[x - 1]`` the least number of
    steps after which state x can be kept in the target forever.
    """
    core = set(target)
    while True:
        drop = {x for x in core if not any(graph.succ[(x, u)] in core for u in range(1, graph.M + 1))}
        if not drop:
            break
        core -= drop
    dist = {x: 0 for x in core}
    frontier = set(core)
    k = 0
    while frontier:
        k += 1
        frontier = {x for x in range(1, graph.N + 1) if x not in dist
                    and any(graph.succ[(x, u)] in frontier for u in range(1, graph.M + 1))}
        for x in frontier:
            dist[x] = k
    times = [dist.get(x, math.inf) for x in range(1, graph.N + 1)]
    return all(t < math.inf for t in times), times


def oracle_closed_loop_times(graph: ExplicitGraph, G: list[int], target: Iterable[int]) -> list[float]:
    """Per state, the first time after which the closed loop x -> succ(x, G[x]) stays in the target."""
    A = set(target)
    times = []
    for x0 in range(1, graph.N + 1):
        traj = [x0]
        while traj.count(traj[-1]) < 2:
            traj.append(graph.succ[(traj[-1], G[traj[-1] - 1])])
        start = traj.index(traj[-1])
        cycle = traj[start:-1]
        if not set(cycle) <= A:
            times.append(math.inf)
            continue
        t = start
        while t > 0 and traj[t - 1] in A:
            t -= 1
        times.append(t)
    return times


@dataclass(frozen=True)
class ProbWitness:
    x: int
    y: int
    S: tuple[int, ...]
    inputs: tuple[int, ...]
    p_x: Fraction
    p_y: Fraction


def oracle_prob_bisim(relation, graph: ExplicitGraph, horizon: Optional[int] = None, budget: int = 64,
                      seed: int = 0) -> tuple[bool, Optional[ProbWitness]]:
    """Compare P(x(t) in S) for related starts, every union-of-blocks S and input sequences up to ``horizon``.

    Sequences are enumerated level by level; sequences that lead to identical
    distributions from every start are merged.  If a level holds more than
    ``budget`` sequences a seeded random subset is kept.  A failure returns a
    witness; success only certifies the explored sequences.
    """
    R = pairs_of(relation)
    N, M = graph.N, graph.M
    horizon = 2 * N if horizon is None else horizon
    blocks = blocks_of(R, N)
    rng = random.Random(seed)
    pairs = sorted((x, y) for x, y in R if x < y)
    # level 0: point masses
    start = tuple(tuple(Fraction(int(x == s)) for s in range(1, N + 1)) for x in range(1, N + 1))
    level = {start: ()}
    for _ in range(horizon):
        nxt = {}
        for dists, seq in level.items():
            for u in range(1, M + 1):
                new = tuple(_push(d, graph, u) for d in dists)
                nxt.setdefault(new, seq + (u,))
        for dists, seq in nxt.items():
            w = _compare(dists, seq, pairs, blocks)
            if w is not None:
                return False, w
        if len(nxt) > budget:
            keys = sorted(nxt, key=lambda k: nxt[k])
            nxt = {k: nxt[k] for k in rng.sample(keys, budget)}
        level = nxt
    return True, None


def _push(d, graph, u):
    out = [Fraction(0)] * graph.N
    for x, px in enumerate(d, 1):
        if px:
            for y, p in graph.dist[(x, u)].items():
                out[y - 1] += px * p
    return tuple(out)


def _compare(dists, seq, pairs, blocks):
    for x, y in pairs:
        for block in blocks:
            px = sum(dists[x - 1][s - 1] for s in block)
            py = sum(dists[y - 1][s - 1] for s in block)
            if px != py:
                return ProbWitness(x, y, tuple(block), seq, px, py)
    return None


def unions_of_blocks(blocks: list[list[int]]):
    """Every nonempty union of blocks, i.e. every S with R^-1 R(S) = S."""
    for r in range(1, len(blocks) + 1):
        for combo in itertools.combinations(blocks, r):
            yield tuple(sorted(s for b in combo for s in b))


def enumerate_feedbacks(N: int, M: int):
    """All feedback maps as tuples G[x - 1] in 1..M."""
    return itertools.product(range(1, M + 1), repeat=N)
