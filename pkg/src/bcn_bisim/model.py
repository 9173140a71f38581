"""Algebraic network models and target sets."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from .matrix import LogicalMatrix, RationalMatrix, stp, swap_matrix


class ModelError(ValueError):
    pass


class TargetError(ValueError):
    pass


@dataclass(frozen=True)
class TargetSet:
    ambient: int
    members: tuple[int, ...]

    def __post_init__(self):
        members = tuple(int(i) for i in self.members)
        if not members:
            raise TargetError("target set must be nonempty")
        if any(b <= a for a, b in zip(members, members[1:])):
            raise TargetError("target members must be strictly increasing")
        if members[0] < 1 or members[-1] > self.ambient:
            raise TargetError(f"target members must lie in [1, {self.ambient}]")
        object.__setattr__(self, "members", members)

    @classmethod
    def of(cls, ambient: int, members: Iterable[int]) -> "TargetSet":
        return cls(ambient, tuple(sorted(set(int(i) for i in members))))

    def __contains__(self, i) -> bool:
        return i in self.members

    def __len__(self):
        return len(self.members)

    def mask(self) -> np.ndarray:
        """0-based boolean membership vector."""
        out = np.zeros(self.ambient, dtype=bool)
        out[np.array(self.members) - 1] = True
        return out


@dataclass(frozen=True)
class BcnModel:
    """x(t+1) = F u(t) x(t); column (q-1)N + i of F is the successor of state i under input q."""

    F: LogicalMatrix
    N: int
    M: int
    n: Optional[int] = None
    m: Optional[int] = None
    state_names: tuple[str, ...] = ()
    input_names: tuple[str, ...] = ()

    def __post_init__(self):
        if self.F.rows != self.N or self.F.cols != self.N * self.M:
            raise ModelError(f"F must be {self.N}x{self.N * self.M}, got {self.F.rows}x{self.F.cols}")

    def successor(self, state: int, inp: int) -> int:
        return self.F.column((inp - 1) * self.N + state)

    def successor_table(self) -> np.ndarray:
        """0-based array ``succ[state, input]``."""
        return self.F.index.reshape(self.M, self.N).T

    def input_block(self, q: int) -> LogicalMatrix:
        """F_q = F delta_M^q, the N x N transition matrix under input q."""
        return self.F.columns((q - 1) * self.N + 1, q * self.N)

    def swapped(self) -> LogicalMatrix:
        """F W_[N,M]: column block i holds the responses of state i to every input."""
        return stp(self.F, swap_matrix(self.N, self.M))


@dataclass(frozen=True)
class PbcnModel:
    """x(t+1) = F_sigma(t) u(t) x(t) with P(sigma = k) = p_k."""

    modes: tuple[LogicalMatrix, ...]
    probabilities: tuple[Fraction, ...]
    N: int
    M: int
    n: Optional[int] = None
    m: Optional[int] = None
    state_names: tuple[str, ...] = ()
    input_names: tuple[str, ...] = ()

    def __post_init__(self):
        probs = tuple(Fraction(p) for p in self.probabilities)
        object.__setattr__(self, "probabilities", probs)
        object.__setattr__(self, "modes", tuple(self.modes))
        if not self.modes or len(self.modes) != len(probs):
            raise ModelError("need one probability per mode and at least one mode")
        if any(p <= 0 for p in probs):
            raise ModelError("mode probabilities must be positive")
        if sum(probs) != 1:
            raise ModelError(f"mode probabilities sum to {sum(probs)}, not 1")
        for F in self.modes:
            if F.shape != (self.N, self.N * self.M):
                raise ModelError(f"every mode must be {self.N}x{self.N * self.M}")

    def mode_model(self, k: int) -> BcnModel:
        return BcnModel(self.modes[k - 1], self.N, self.M, self.n, self.m,
                        self.state_names, self.input_names)

    def averaged_swapped(self) -> RationalMatrix:
        """sum_k p_k F_k W_[N,M]; entry (j, (i-1)M + q) is P(i -> j | input q)."""
        den = math.lcm(*(p.denominator for p in self.probabilities))
        num = np.zeros((self.N, self.N * self.M), dtype=np.int64)
        cols = np.arange(self.N * self.M)
        W = swap_matrix(self.N, self.M)
        for F, p in zip(self.modes, self.probabilities):
            np.add.at(num, (stp(F, W).index, cols), p.numerator * (den // p.denominator))
        return RationalMatrix(num, den)


def load_model_direct(N: int, M: int, delta_columns: Sequence[int]) -> BcnModel:
    """Wrap a raw delta column list (length N*M) as a model; N, M need not be powers of 2."""
    if N < 1 or M < 1:
        raise ModelError("N and M must be positive")
    if len(delta_columns) != N * M:
        raise ModelError(f"expected {N * M} columns, got {len(delta_columns)}")
    try:
        F = LogicalMatrix(N, delta_columns)
    except ValueError as exc:
        raise ModelError(str(exc)) from None
    return BcnModel(F, N, M)


def _bits(k: int) -> Optional[int]:
    return k.bit_length() - 1 if k > 0 and k & (k - 1) == 0 else None


def model_to_json(model, target: Optional[TargetSet] = None) -> dict:
    out = {"n": model.n if model.n is not None else _bits(model.N),
           "m": model.m if model.m is not None else _bits(model.M),
           "N": model.N, "M": model.M}
    if model.state_names:
        out["state_names"] = list(model.state_names)
    if model.input_names:
        out["input_names"] = list(model.input_names)
    if isinstance(model, BcnModel):
        out["F"] = model.F.to_json()
    else:
        out["modes"] = [{"p": str(p), "F": F.to_json()}
                        for F, p in zip(model.modes, model.probabilities)]
    if target is not None:
        out["target"] = list(target.members)
    return out


def model_from_json(obj: dict):
    """Inverse of :func:`model_to_json`; returns ``(model, target_or_None)``."""
    N, M = int(obj["N"]), int(obj["M"])
    common = dict(n=obj.get("n"), m=obj.get("m"),
                  state_names=tuple(obj.get("state_names", ())),
                  input_names=tuple(obj.get("input_names", ())))
    if "modes" in obj:
        model = PbcnModel(tuple(LogicalMatrix(N, md["F"]["delta"]) for md in obj["modes"]),
                          tuple(Fraction(md["p"]) for md in obj["modes"]), N, M, **common)
    else:
        model = BcnModel(LogicalMatrix(N, obj["F"]["delta"]), N, M, **common)
    target = TargetSet.of(N, obj["target"]) if obj.get("target") else None
    return model, target
