"""Acceptance gate: one test (or pair of tests) per criterion, each reported as PASS/FAIL in the summary.

Run directly with ``python3 tests/test_acceptance.py`` or as part of ``pytest``.
"""
import time
import tracemalloc

import numpy as np
import pytest

from bcn_bisim import (PROBABILISTIC, STRONG, WEAK, BooleanMatrix, LogicalMatrix, Partition, TargetSet,
                       bisim_matrix, is_bisimulation, max_bisimulation, one_step_reachability, relation_from_target)
from bcn_bisim.bisim import weak_bisim_matrix
from bcn_bisim.matrix import bool_product
from bcn_bisim.oracle import (ExplicitGraph, oracle_closed_loop_times, oracle_is_strong, oracle_is_weak,
                              oracle_max_bisim, oracle_prob_bisim, oracle_stabilizable)
from bcn_bisim.random_models import lifted_model, lifted_pbcn, random_model, random_partition, random_pbcn, \
    random_target
from bcn_bisim.stabilize import analyze, check_stabilizable, reachability_matrix, simulate, stabilization_time, \
    synthesize

from conftest import load_example

REFERENCE_G = LogicalMatrix(16, [2] * 32 + [4] * 12 + [1] * 4 + [4] * 12 + [1] * 4)


def test_criterion_1_weak_bisimulation_matrix(record):
    with record(1, "bisimulation matrix"):
        model, _ = load_example("weakcheck8.json")
        R = Partition.from_blocks(8, [[1, 2], [3], [4, 5, 6, 7, 8]]).relation()
        psi1 = one_step_reachability(model)
        assert psi1 == BooleanMatrix.from_delta_text("delta(8)[1+2 1 4+8 5 6 7 8 4]")
        big = "4+5+6+7+8"
        assert bool_product(R, psi1) == BooleanMatrix.from_delta_text(f"delta(8)[1+2 1+2 {' '.join([big] * 6)}]")
        rest = "3+4+5+6+7+8"
        expected = BooleanMatrix.from_delta_text(f"delta(8)[1+2 1+2 {' '.join([rest] * 6)}]")
        M = bisim_matrix(R, model, WEAK)
        assert M == expected
        assert R <= M
        assert is_bisimulation(R, model, WEAK)


def test_criterion_2_weak_but_not_strong(record):
    with record(2, "verdicts and strong maximum"):
        model, _ = load_example("reduction8.json")
        R = Partition.from_blocks(8, [[1, 2], [3, 4], [5, 6, 7, 8]]).relation()
        assert is_bisimulation(R, model, WEAK) is True
        assert is_bisimulation(R, model, STRONG) is False
        expected = [[1], [2], [3], [4], [5, 6, 7, 8]]
        assert oracle_max_bisim(R, ExplicitGraph.from_model(model), STRONG) == expected
        assert max_bisimulation(R, model, STRONG).partition.blocks() == expected


def test_criterion_3_small_reduction_and_synthesis(record):
    with record(3, "weak and strong paths"):
        model, A = load_example("reduction8.json")
        assert A.members == (5, 6, 7, 8)
        weak = analyze(model, A, WEAK)
        assert weak.bisimulation.partition.blocks() == [[1, 2], [3, 4], [5, 6, 7, 8]]
        assert weak.quotient.psi1 == BooleanMatrix.from_delta_text("delta(3)[1+2 1+3 3]")
        assert weak.quotient_target.members == (3,)
        assert weak.report.stabilizable
        assert weak.layers.layers == ((3,), (2,), (1,))
        theta = synthesize(weak, model).theta
        assert theta == {1: (2,), 2: (1,), 3: (2,), 4: (1,), 5: (1, 2), 6: (1, 2), 7: (1, 2), 8: (1, 2)}
        strong = analyze(model, A, STRONG)
        assert strong.quotient.as_logical() == LogicalMatrix(5, [2, 3, 1, 5, 5, 3, 2, 5, 2, 5])
        assert strong.quotient_target.members == (5,)
        assert strong.report.stabilizable
        assert synthesize(strong, model).theta == theta


def _index_groups(*ranges):
    return [i for lo, hi in ranges for i in range(lo, hi + 1)]


def test_criterion_4_example_end_to_end(record):
    with record(4, "end-to-end"):
        t0 = time.perf_counter()
        model, A = load_example("apoptosis_as_computed.bcn")
        assert (model.N, model.M) == (64, 16)
        assert A.members == tuple(_index_groups((1, 4), (29, 36), (61, 64)))
        an = analyze(model, A, WEAK)
        assert an.bisimulation.k_star == 3
        assert an.bisimulation.partition.blocks() == [
            _index_groups((1, 4)), _index_groups((5, 12), (17, 28)), _index_groups((13, 16)),
            _index_groups((29, 32)), _index_groups((33, 36)), _index_groups((37, 44), (49, 60)),
            _index_groups((45, 48)), _index_groups((61, 64))]
        assert an.quotient_target.members == (1, 4, 5, 8)
        assert an.report.l_star == 3
        assert an.report.stabilizable
        assert an.layers.layers == ((1, 5, 8), (2, 6, 7), (3, 4))
        result = synthesize(an, model)
        groups = {(2, 4, 6, 10, 12, 14, 16): _index_groups((1, 12), (17, 28)),
                  tuple(range(1, 17)): _index_groups((13, 16), (29, 32)),
                  (4, 12, 16): _index_groups((33, 44), (49, 60)),
                  (1, 5, 9, 13): _index_groups((45, 48), (61, 64))}
        for options, states in groups.items():
            for i in states:
                assert result.theta[i] == options, i
        assert result.family_size == 7 ** 24 * 16 ** 8 * 3 ** 24 * 4 ** 8
        assert result.admits(REFERENCE_G)
        for x0 in range(1, 65):
            traj = simulate(model, REFERENCE_G, x0, 50)
            assert all(s in A for s in traj[3:]), x0
        assert max(stabilization_time(model, REFERENCE_G, A)) <= 3
        assert time.perf_counter() - t0 < 5


REFERENCE_PSI1_Q = "delta(8)[2+4+6+7+8 2+4+6+7+8 2+6 2+6 2+4+6+7+8 2+4+6+7+8 1+2+5+6 1+2+5+6]"


@pytest.mark.xfail(strict=True, reason="reference quotient matrices are inconsistent with the reference Psi_1 "
                                       "and partition; see README")
def test_criterion_4_reference_quotient_matrices(record):
    with record(4, "reference Psi1^[I] and Psi^[I]"):
        model, A = load_example("apoptosis_as_computed.bcn")
        an = analyze(model, A, WEAK)
        assert an.quotient.psi1 == BooleanMatrix.from_delta_text(REFERENCE_PSI1_Q)
        col = "1+2+4+5+6+7+8"
        assert an.report.psi == BooleanMatrix.from_delta_text(f"delta(8)[{' '.join([col] * 8)}]")


def test_criterion_4_stabilization_ops_on_reference_quotient(record):
    # the stabilization stage reproduces the reference l*, Psi and layers when fed the reference matrix
    with record(4, "stabilization ops on reference quotient"):
        psi1 = BooleanMatrix.from_delta_text(REFERENCE_PSI1_Q)
        psi, l_star = reachability_matrix(psi1)
        assert l_star == 3
        assert all(col == (1, 2, 4, 5, 6, 7, 8) for col in psi.column_sets())
        rep = check_stabilizable(psi1, TargetSet.of(8, [1, 4, 5, 8]))
        assert rep.stabilizable


def _bcn_instance(seed):
    rng = np.random.default_rng(seed)
    N, M = int(rng.integers(1, 13)), int(rng.integers(1, 5))
    if seed % 3 == 0:
        return random_model(rng, N, M), random_partition(rng, N)
    model, part = lifted_model(rng, N, M, int(rng.integers(1, N + 1)), strong=seed % 3 == 1)
    # coarsen or refine sometimes so that not every relation is a bisimulation
    if rng.random() < 0.3:
        part = random_partition(rng, N)
    return model, part


def test_criterion_5_oracle_equivalence(record):
    with record(5, "100 seeded models"):
        verdicts = {WEAK: [], STRONG: []}
        for seed in range(100):
            model, part = _bcn_instance(seed)
            graph = ExplicitGraph.from_model(model)
            R = part.relation()
            for mode, oracle in ((WEAK, oracle_is_weak), (STRONG, oracle_is_strong)):
                engine = is_bisimulation(R, model, mode)
                assert engine == oracle(R, graph), (seed, mode)
                verdicts[mode].append(engine)
                assert max_bisimulation(R, model, mode).partition.blocks() == oracle_max_bisim(R, graph, mode), \
                    (seed, mode)
        for mode in verdicts:
            assert any(verdicts[mode]) and not all(verdicts[mode])


def _stab_instance(seed):
    rng = np.random.default_rng(10_000 + seed)
    N, M = int(rng.integers(1, 11)), int(rng.integers(1, 5))
    model = random_model(rng, N, M) if seed % 2 else lifted_model(rng, N, M, int(rng.integers(1, N + 1)))[0]
    return model, random_target(rng, N)


def test_criterion_6_stabilizability_through_quotient(record):
    with record(6, "100 seeded models"):
        outcomes = []
        for seed in range(100):
            model, A = _stab_instance(seed)
            expected, _ = oracle_stabilizable(ExplicitGraph.from_model(model), A.members)
            assert analyze(model, A, WEAK).report.stabilizable == expected, seed
            outcomes.append(expected)
        assert any(outcomes) and not all(outcomes)


def test_criterion_7_time_optimality(record):
    with record(7, "optimal times and exhaustive family"):
        stabilizable = exhaustive = 0
        for seed in range(100):
            model, A = _stab_instance(seed)
            graph = ExplicitGraph.from_model(model)
            ok, times = oracle_stabilizable(graph, A.members)
            if not ok:
                continue
            stabilizable += 1
            results = {}
            for method in (WEAK, STRONG):
                res = synthesize(analyze(model, A, method), model)
                assert stabilization_time(model, res.canonical_G, A) == times, (seed, method)
                assert oracle_closed_loop_times(graph, res.canonical_G.delta, A.members) == times
                results[method] = res
            assert results[WEAK].theta == results[STRONG].theta, seed
            if model.N * model.M <= 16:
                exhaustive += 1
                optimal = 0
                for G in np.ndindex(*([model.M] * model.N)):
                    G = [g + 1 for g in G]
                    t = oracle_closed_loop_times(graph, G, A.members)
                    assert all(a >= b for a, b in zip(t, times)), seed
                    is_opt = t == times
                    assert is_opt == results[WEAK].admits(LogicalMatrix(model.M, G)), (seed, G)
                    optimal += is_opt
                assert optimal == results[WEAK].family_size
        assert stabilizable >= 20 and exhaustive >= 5, (stabilizable, exhaustive)


def _pbcn_instance(seed):
    rng = np.random.default_rng(20_000 + seed)
    N, M, s = int(rng.integers(1, 9)), int(rng.integers(1, 3)), int(rng.integers(1, 4))
    if seed % 2:
        return lifted_pbcn(rng, N, M, s, int(rng.integers(1, N + 1)))
    return random_pbcn(rng, N, M, s), random_partition(rng, N)


def test_criterion_8_probabilistic_criterion(record):
    with record(8, "100 seeded PBCNs"):
        accepted = rejected = 0
        for seed in range(100):
            pmodel, part = _pbcn_instance(seed)
            R = part.relation()
            graph = ExplicitGraph.from_model(pmodel)
            engine = is_bisimulation(R, pmodel, PROBABILISTIC)
            holds, witness = oracle_prob_bisim(R, graph, horizon=2 * pmodel.N, seed=seed)
            if engine:
                accepted += 1
                assert holds, (seed, witness)
            else:
                rejected += 1
                assert not holds and witness.p_x != witness.p_y, seed
                assert witness.x in part.blocks()[part.block_of(witness.y) - 1]
            if len(pmodel.modes) == 1:
                assert engine == is_bisimulation(R, pmodel.mode_model(1), STRONG), seed
        assert accepted >= 20 and rejected >= 20, (accepted, rejected)


def test_criterion_9_performance(record):
    with record(9, "N=1024, M=4"):
        model = random_model(9, 1024, 4)
        R = relation_from_target(random_target(9, 1024))
        tracemalloc.start()
        t0 = time.perf_counter()
        psi1 = one_step_reachability(model)
        weak_bisim_matrix(R, psi1)
        mb = max_bisimulation(R, model, WEAK)
        elapsed = time.perf_counter() - t0
        _, peak = tracemalloc.get_traced_memory()
        tracemalloc.stop()
        assert mb.k_star >= 1
        assert elapsed < 10, elapsed
        assert peak < 2 ** 30, peak


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
