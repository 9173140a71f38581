"""Bisimulation reduction and time-optimal set stabilization for Boolean control networks."""
import os

_threads = os.environ.get("BCN_BISIM_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, _threads)

from .matrix import (BooleanMatrix, DimensionError, LogicalMatrix, RationalMatrix, bool_power, bool_product,
                     delta, khatri_rao, kron, power_reducing, stp, swap_matrix)
from .model import BcnModel, ModelError, PbcnModel, TargetError, TargetSet, load_model_direct
from .network import ParseError, assemble, parse
from .bisim import (PROBABILISTIC, STRONG, WEAK, Partition, bisim_matrix, is_bisimulation, max_bisimulation,
                    one_step_reachability, quotient_probabilistic, quotient_strong, quotient_weak,
                    relation_from_target)
from .stabilize import (NotStabilizableError, analyze, check_stabilizable, closed_loop, omega_layers,
                        simulate, stabilization_time, synthesize, synthesize_strong, synthesize_weak)

__version__ = "0.1.0"
