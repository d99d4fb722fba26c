"""Zeno-limit reduction onto the dissipation-free subspace.

The dissipative sites carry a fixed kernel state ``ψ₀``; the remaining sites
evolve under ``h_D = tr_0[(ψ₀ ⊗ I) H]`` plus slow effective dissipation.  The
effective dissipators themselves are model-specific and supplied by the
caller (see :mod:`zeno_rank.xxz`).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatchError, InputError, NonHermitianError
from .lindblad import LindbladModel, WeightedLindbladOp
from .operators import as_matrix, is_hermitian, n_qubits, partial_trace, place_on_sites, trace_norm


@dataclass(frozen=True)
class EffectiveModel:
    """``h_D`` with weighted effective jump operators on the interior space."""

    h_d: np.ndarray
    effective_lindblads: tuple = field(default=())
    gamma: float = 1.0

    def __post_init__(self):
        h = as_matrix(self.h_d, "h_D")
        if not is_hermitian(h):
            raise NonHermitianError("h_D is not Hermitian")
        n_qubits(h.shape[0])
        ops = tuple(
            op if isinstance(op, WeightedLindbladOp) else WeightedLindbladOp(*op)
            for op in self.effective_lindblads
        )
        for op in ops:
            if op.operator.shape != h.shape:
                raise DimensionMismatchError("effective Lindblad dimension differs from h_D")
        object.__setattr__(self, "h_d", h)
        object.__setattr__(self, "effective_lindblads", ops)

    @property
    def dim(self):
        return self.h_d.shape[0]

    def dissipation_generator(self):
        """``Σ_k γ_k L̃_k† L̃_k``, the operator probed by condition C."""
        out = np.zeros_like(self.h_d)
        for op in self.effective_lindblads:
            out += op.weight * (op.operator.conj().T @ op.operator)
        return out

    def as_lindblad_model(self):
        """Slow interior dynamics ``dR/dt = -i[h_D, R] + Γ⁻¹ D̃[R]`` as a Lindblad model."""
        return LindbladModel(self.h_d, self.effective_lindblads, 1.0 / self.gamma)


def _partition(dissipative_sites, n):
    d0 = sorted(dissipative_sites)
    if not d0 or any(not 1 <= s <= n for s in d0) or len(set(d0)) != len(d0):
        raise InputError(f"invalid dissipative site set {dissipative_sites} for {n} sites")
    rest = [s for s in range(1, n + 1) if s not in d0]
    if not rest:
        raise InputError("no sites left outside the dissipative partition")
    return d0, rest


def dissipation_projected_hamiltonian(h, psi0, dissipative_sites, n):
    """``tr_{H₀}[(ψ₀ ⊗ I_{H₁}) H]`` on the sites outside ``dissipative_sites``.

    ``psi0`` is ordered by ascending site number of the dissipative set.
    """
    h = as_matrix(h, "H")
    if h.shape[0] != 2**n:
        raise DimensionMismatchError(f"H has dim {h.shape[0]}, expected 2**{n}")
    d0, rest = _partition(dissipative_sites, n)
    psi0 = as_matrix(psi0, "psi0")
    if psi0.shape[0] != 2 ** len(d0):
        raise DimensionMismatchError("psi0 dimension does not match the dissipative sites")
    weighted = place_on_sites([(psi0, d0), (np.eye(2 ** len(rest)), rest)], n) @ h
    return partial_trace(weighted, rest, n)


def factorization_residual(rho, psi0, dissipative_sites, n):
    """Trace norm ``‖ρ − ψ₀ ⊗ R‖`` with ``R`` the marginal of ``ρ`` off the dissipative sites."""
    rho = as_matrix(rho, "rho")
    if rho.shape[0] != 2**n:
        raise DimensionMismatchError(f"rho has dim {rho.shape[0]}, expected 2**{n}")
    d0, rest = _partition(dissipative_sites, n)
    psi0 = as_matrix(psi0, "psi0")
    if psi0.shape[0] != 2 ** len(d0):
        raise DimensionMismatchError("psi0 dimension does not match the dissipative sites")
    r = partial_trace(rho, rest, n)
    return trace_norm(rho - place_on_sites([(psi0, d0), (r, rest)], n))
