"""Finite-rank Zeno-limit steady states of boundary-driven spin chains.

The library builds the auxiliary classical Markov chain on the eigenstates of
the dissipation-projected Hamiltonian, checks the closed-class, transience and
degeneracy conditions, predicts the NESS rank and cross-checks it against a
brute-force Lindblad steady-state solver.
"""

from .criterion import CriterionReport, Tolerances, assemble_zeno_ness, oracle_compare, predict_rank
from .errors import ZenoRankError
from .xxz import ChainSpec, effective_xxz_model, full_lindblad_model

__all__ = [
    "ChainSpec",
    "CriterionReport",
    "Tolerances",
    "ZenoRankError",
    "assemble_zeno_ness",
    "effective_xxz_model",
    "full_lindblad_model",
    "oracle_compare",
    "predict_rank",
]
__version__ = "0.1.0"
