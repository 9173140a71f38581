"""Weak, strong and probabilistic bisimulation matrices, maximal bisimulations and quotients."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np

from .matrix import BooleanMatrix, DimensionError, LogicalMatrix, RationalMatrix, bool_and, bool_product, leq
from .model import BcnModel, ModelError, PbcnModel, TargetError, TargetSet

WEAK, STRONG, PROBABILISTIC = "weak", "strong", "probabilistic"
MODES = (WEAK, STRONG, PROBABILISTIC)


class NotEquivalenceError(ValueError):
    pass


def _row_classes(sig: np.ndarray) -> np.ndarray:
    """Label rows of a 2-D array so that equal rows share a label."""
    sig = np.ascontiguousarray(sig.reshape(sig.shape[0], -1))
    if sig.dtype == bool:
        sig = np.packbits(sig, axis=1)
    if sig.shape[1] == 0:
        return np.zeros(sig.shape[0], dtype=np.int64)
    keys = sig.view(np.dtype((np.void, sig.dtype.itemsize * sig.shape[1]))).reshape(-1)
    _, labels = np.unique(keys, return_inverse=True)
    return labels.reshape(-1)


def _equal_label_matrix(labels: np.ndarray) -> BooleanMatrix:
    return BooleanMatrix(labels[:, None] == labels[None, :])


@dataclass(frozen=True, eq=False)
class Partition:
    """Equivalence classes on states 1..N, blocks numbered by their smallest member."""

    labels: np.ndarray

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64).reshape(-1)
        _, first, inverse = np.unique(labels, return_index=True, return_inverse=True)
        rank = np.empty(first.size, dtype=np.int64)
        rank[np.argsort(first)] = np.arange(first.size)
        canon = rank[inverse.reshape(-1)]
        canon.flags.writeable = False
        object.__setattr__(self, "labels", canon)

    @classmethod
    def from_blocks(cls, N: int, blocks: Iterable[Iterable[int]]) -> "Partition":
        labels = np.full(N, -1, dtype=np.int64)
        for b, members in enumerate(blocks):
            for i in members:
                if labels[i - 1] != -1:
                    raise ValueError(f"state {i} appears in two blocks")
                labels[i - 1] = b
        if (labels < 0).any():
            raise ValueError(f"state {int(np.argmax(labels < 0)) + 1} is in no block")
        return cls(labels)

    @classmethod
    def from_relation(cls, relation: BooleanMatrix) -> "Partition":
        check_equivalence(relation)
        return cls(_row_classes(relation.data))

    @classmethod
    def discrete(cls, N: int) -> "Partition":
        return cls(np.arange(N))

    @property
    def N(self) -> int:
        return int(self.labels.size)

    @property
    def n_blocks(self) -> int:
        return int(self.labels.max()) + 1 if self.labels.size else 0

    def block_of(self, i: int) -> int:
        return int(self.labels[i - 1]) + 1

    def blocks(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.n_blocks)]
        for i, b in enumerate(self.labels.tolist(), 1):
            out[b].append(i)
        return out

    def representatives(self) -> list[int]:
        return [b[0] for b in self.blocks()]

    def relation(self) -> BooleanMatrix:
        return _equal_label_matrix(self.labels)

    def projection(self) -> LogicalMatrix:
        """The N_A x N logical matrix sending each state to its block."""
        return LogicalMatrix.from_index(self.n_blocks, self.labels)

    def project_target(self, target: TargetSet) -> TargetSet:
        if target.ambient != self.N:
            raise TargetError(f"target lives in Delta_{target.ambient}, partition in Delta_{self.N}")
        return TargetSet.of(self.n_blocks, {self.block_of(i) for i in target.members})

    def __eq__(self, other):
        return isinstance(other, Partition) and np.array_equal(self.labels, other.labels)

    def __hash__(self):
        return hash(self.labels.tobytes())

    def __repr__(self):
        return f"Partition({self.blocks()})"


def check_equivalence(relation: BooleanMatrix) -> None:
    """Raise NotEquivalenceError unless the relation is reflexive, symmetric and transitive."""
    R = relation.data
    if R.shape[0] != R.shape[1]:
        raise NotEquivalenceError("relation matrix must be square")
    if not R.diagonal().all():
        raise NotEquivalenceError("relation is not reflexive")
    if not np.array_equal(R, R.T):
        raise NotEquivalenceError("relation is not symmetric")
    if not leq(bool_product(relation, relation), relation):
        raise NotEquivalenceError("relation is not transitive")


def is_equivalence(relation: BooleanMatrix) -> bool:
    try:
        check_equivalence(relation)
    except NotEquivalenceError:
        return False
    return True


def relation_from_target(target: TargetSet, N: int | None = None) -> BooleanMatrix:
    """Relation matrix of {(a, b): both in A or both outside A}."""
    N = target.ambient if N is None else N
    if target.ambient != N:
        raise TargetError(f"target lives in Delta_{target.ambient}, expected Delta_{N}")
    inside = target.mask()
    return BooleanMatrix(inside[:, None] == inside[None, :])


def one_step_reachability(model: BcnModel) -> BooleanMatrix:
    """sgn(F 1_M): entry (i, j) is 1 iff some input moves state j to state i."""
    psi = np.zeros((model.N, model.N), dtype=bool)
    psi[model.F.index, np.tile(np.arange(model.N), model.M)] = True
    return BooleanMatrix(psi)


def _check_square(relation: BooleanMatrix, N: int):
    if relation.shape != (N, N):
        raise DimensionError(f"relation must be {N}x{N}, got {relation.shape}")


def weak_bisim_matrix(relation: BooleanMatrix, psi1: BooleanMatrix) -> BooleanMatrix:
    """(i, j) = 1 iff columns i and j of relation (.) psi1 coincide."""
    _check_square(relation, psi1.rows)
    projected = bool_product(relation, psi1)
    return _equal_label_matrix(_row_classes(projected.data.T))


def strong_bisim_matrix(relation: BooleanMatrix, model: BcnModel) -> BooleanMatrix:
    """(i, j) = 1 iff relation (.) Fbar_i = relation (.) Fbar_j, Fbar_i being state i's input-response block."""
    _check_square(relation, model.N)
    responses = bool_product(relation, model.swapped()).data  # column (i-1)M + q
    per_state = responses.reshape(model.N, model.N, model.M).transpose(1, 0, 2)
    return _equal_label_matrix(_row_classes(per_state))


def prob_bisim_matrix(relation: BooleanMatrix, pmodel: PbcnModel) -> BooleanMatrix:
    """(i, j) = 1 iff relation Ftilde_[i] = relation Ftilde_[j] exactly (block-hitting probabilities)."""
    _check_square(relation, pmodel.N)
    lumped = _lumped_numerators(relation, pmodel.averaged_swapped())
    per_state = lumped.reshape(pmodel.N, pmodel.N, pmodel.M).transpose(1, 0, 2)
    return _equal_label_matrix(_row_classes(per_state))


def _lumped_numerators(relation: BooleanMatrix, Ft: RationalMatrix) -> np.ndarray:
    # all products share Ft's denominator, so comparing numerators is exact
    num = Ft.num
    if Ft.den * relation.rows < 2 ** 62:
        return relation.data.astype(np.int64) @ num.astype(np.int64)
    return relation.data.astype(object) @ num


def bisim_matrix(relation: BooleanMatrix, model: Union[BcnModel, PbcnModel], mode: str = WEAK,
                 psi1: BooleanMatrix | None = None) -> BooleanMatrix:
    if mode == WEAK:
        _require(model, BcnModel, mode)
        return weak_bisim_matrix(relation, one_step_reachability(model) if psi1 is None else psi1)
    if mode == STRONG:
        _require(model, BcnModel, mode)
        return strong_bisim_matrix(relation, model)
    if mode == PROBABILISTIC:
        _require(model, PbcnModel, mode)
        return prob_bisim_matrix(relation, model)
    raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")


def _require(model, cls, mode):
    if not isinstance(model, cls):
        raise ModelError(f"{mode} bisimulation needs a {cls.__name__}, got {type(model).__name__}")


def is_bisimulation(relation: BooleanMatrix, model, mode: str = WEAK) -> bool:
    check_equivalence(relation)
    return leq(relation, bisim_matrix(relation, model, mode))


def is_weak_bisimulation(relation: BooleanMatrix, model: BcnModel) -> bool:
    return is_bisimulation(relation, model, WEAK)


def is_strong_bisimulation(relation: BooleanMatrix, model: BcnModel) -> bool:
    return is_bisimulation(relation, model, STRONG)


def is_probabilistic_bisimulation(relation: BooleanMatrix, pmodel: PbcnModel) -> bool:
    return is_bisimulation(relation, pmodel, PROBABILISTIC)


@dataclass(frozen=True)
class MaxBisimulation:
    partition: Partition
    k_star: int
    mode: str

    @property
    def relation(self) -> BooleanMatrix:
        return self.partition.relation()


def max_bisimulation(initial: BooleanMatrix, model, mode: str = WEAK) -> MaxBisimulation:
    """Largest bisimulation inside ``initial`` by iterating R_{k+1} = R_k AND M_{R_k}.

    ``k_star`` is the first k with R_k = R_{k+1}.
    """
    check_equivalence(initial)
    psi1 = one_step_reachability(model) if mode == WEAK and isinstance(model, BcnModel) else None
    current, k = initial, 0
    while True:
        nxt = bool_and(current, bisim_matrix(current, model, mode, psi1=psi1))
        if nxt == current:
            return MaxBisimulation(Partition(_row_classes(current.data)), k, mode)
        current, k = nxt, k + 1


# --------------------------------------------------------------------------
# quotients


@dataclass(frozen=True)
class QuotientWeak:
    psi1: BooleanMatrix
    projection: LogicalMatrix

    @property
    def size(self) -> int:
        return self.psi1.rows


@dataclass(frozen=True)
class QuotientStrong:
    F: BooleanMatrix  # [Fbar_1 ... Fbar_M], each Nq x Nq
    projection: LogicalMatrix

    @property
    def size(self) -> int:
        return self.F.rows

    @property
    def M(self) -> int:
        return self.F.cols // self.F.rows

    def block(self, q: int) -> BooleanMatrix:
        n = self.size
        return BooleanMatrix(self.F.data[:, (q - 1) * n:q * n])

    def one_step(self) -> BooleanMatrix:
        """sgn(F_II 1_M)."""
        out = np.zeros((self.size, self.size), dtype=bool)
        for q in range(1, self.M + 1):
            out |= self.block(q).data
        return BooleanMatrix(out)

    def is_logical(self) -> bool:
        return self.F.is_logical()

    def as_logical(self) -> LogicalMatrix:
        return self.F.to_logical()


def quotient_weak(partition: Partition, psi1: BooleanMatrix) -> QuotientWeak:
    P = partition.projection()
    return QuotientWeak(bool_product(bool_product(P, psi1), P.T), P)


def quotient_strong(partition: Partition, model: BcnModel) -> QuotientStrong:
    P = partition.projection()
    PT = P.T
    blocks = [bool_product(bool_product(P, model.input_block(q)), PT).data for q in range(1, model.M + 1)]
    return QuotientStrong(BooleanMatrix(np.hstack(blocks)), P)


def quotient_probabilistic(partition: Partition, pmodel: PbcnModel) -> RationalMatrix:
    """Block-level transition probabilities: column (a-1)M + q is block a's distribution under input q."""
    Ft = pmodel.averaged_swapped()
    lumped = _lumped_numerators(partition.projection().to_boolean(), Ft)
    cols = [(rep - 1) * pmodel.M + q for rep in partition.representatives() for q in range(pmodel.M)]
    return RationalMatrix(lumped[:, cols], Ft.den)
