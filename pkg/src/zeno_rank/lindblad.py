"""Finite-dimensional Lindblad dynamics.

The generator is ``dρ/dt = -i[H, ρ] + Γ Σ_k γ_k (L_k ρ L_k† - ½{L_k†L_k, ρ})``.
Superoperators use column-stacking: ``vec(ρ) = ρ.reshape(-1, order="F")``, so
``vec(AρB) = (Bᵀ ⊗ A) vec(ρ)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import (
    ConditioningError,
    DimensionMismatchError,
    InputError,
    NonHermitianError,
    NonUniqueSteadyStateError,
    SizeLimitError,
    StepSizeError,
)
from .operators import as_matrix, dagger, frobenius_norm, is_hermitian

logger = logging.getLogger(__name__)

MAX_LIOUVILLIAN_DIM = 128
# at or below this superoperator size the full spectrum is computed
DENSE_EIG_LIMIT = 1024
NULL_TOL = 1e-11
RESIDUAL_TOL = 1e-9


@dataclass(frozen=True)
class WeightedLindbladOp:
    operator: np.ndarray
    weight: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "operator", as_matrix(self.operator, "Lindblad operator"))
        if not self.weight >= 0:
            raise InputError(f"Lindblad weight must be nonnegative, got {self.weight}")


@dataclass(frozen=True)
class LindbladModel:
    """Hamiltonian, weighted jump operators and overall dissipation strength Γ."""

    hamiltonian: np.ndarray
    lindblads: tuple = field(default=())
    gamma: float = 1.0

    def __post_init__(self):
        h = as_matrix(self.hamiltonian, "hamiltonian")
        if not is_hermitian(h):
            raise NonHermitianError("Lindblad model Hamiltonian is not Hermitian")
        ops = tuple(
            op if isinstance(op, WeightedLindbladOp) else WeightedLindbladOp(*op)
            for op in self.lindblads
        )
        for op in ops:
            if op.operator.shape != h.shape:
                raise DimensionMismatchError(
                    f"Lindblad operator of shape {op.operator.shape} vs H {h.shape}"
                )
        if not self.gamma >= 0:
            raise InputError(f"gamma must be nonnegative, got {self.gamma}")
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "lindblads", ops)

    @property
    def dim(self):
        return self.hamiltonian.shape[0]

    def with_gamma(self, gamma):
        return LindbladModel(self.hamiltonian, self.lindblads, gamma)


def vec(rho):
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v, d=None):
    v = np.asarray(v)
    d = d or int(round(np.sqrt(v.size)))
    return v.reshape(d, d, order="F")


def _check_rho(model, rho):
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (model.dim, model.dim):
        raise DimensionMismatchError(f"rho shape {rho.shape} vs model dim {model.dim}")
    return rho


def apply_dissipator(model, rho):
    """``Σ_k γ_k (L ρ L† − ½{L†L, ρ})``, without the Γ prefactor."""
    rho = _check_rho(model, rho)
    out = np.zeros_like(rho)
    for op in model.lindblads:
        a = op.operator
        ad = dagger(a)
        ada = ad @ a
        out += op.weight * (a @ rho @ ad - 0.5 * (ada @ rho + rho @ ada))
    return out


def lindblad_rhs(model, rho):
    rho = _check_rho(model, rho)
    h = model.hamiltonian
    return -1j * (h @ rho - rho @ h) + model.gamma * apply_dissipator(model, rho)


def liouvillian_superoperator(model):
    """Dense ``d²×d²`` generator acting on column-stacked density matrices."""
    d = model.dim
    if d > MAX_LIOUVILLIAN_DIM:
        raise SizeLimitError(f"Liouvillian for dim {d} exceeds limit {MAX_LIOUVILLIAN_DIM}")
    eye = np.eye(d, dtype=complex)
    h = model.hamiltonian
    out = -1j * (np.kron(eye, h) - np.kron(h.T, eye))
    for op in model.lindblads:
        a = op.operator
        ada = dagger(a) @ a
        out += (model.gamma * op.weight) * (
            np.kron(a.conj(), a) - 0.5 * np.kron(eye, ada) - 0.5 * np.kron(ada.T, eye)
        )
    return out


def liouvillian_sparse(model):
    """Same generator as :func:`liouvillian_superoperator`, in CSC format."""
    d = model.dim
    if d > MAX_LIOUVILLIAN_DIM:
        raise SizeLimitError(f"Liouvillian for dim {d} exceeds limit {MAX_LIOUVILLIAN_DIM}")
    eye = sp.identity(d, dtype=complex, format="csr")
    h = sp.csr_matrix(model.hamiltonian)
    out = -1j * (sp.kron(eye, h) - sp.kron(h.T, eye))
    for op in model.lindblads:
        a = sp.csr_matrix(op.operator)
        ada = (a.conj().T @ a).tocsr()
        out = out + (model.gamma * op.weight) * (
            sp.kron(a.conj(), a) - 0.5 * sp.kron(eye, ada) - 0.5 * sp.kron(ada.T, eye)
        )
    return out.tocsc()


def _normalize_state(v, d):
    rho = unvec(v, d)
    tr = np.trace(rho)
    if abs(tr) < 1e-14:
        raise ConditioningError("steady-state null vector has vanishing trace")
    rho = rho / tr
    return 0.5 * (rho + dagger(rho))


def _dense_null(lv, scale, null_tol):
    evals, evecs = np.linalg.eig(lv)
    order = np.argsort(np.abs(evals))
    small = np.abs(evals[order[:4]])
    null_dim = int(np.sum(np.abs(evals) <= null_tol * scale))
    return evecs[:, order[0]], null_dim, small


def _sparse_null(lv, scale, null_tol):
    n = lv.shape[0]
    shift = 0.0
    try:
        lu = spla.splu(lv)
    except RuntimeError:
        shift = -1e-12 * scale
        lu = spla.splu((lv - shift * sp.identity(n, format="csc")).tocsc())
    op = spla.LinearOperator(lv.shape, matvec=lu.solve, dtype=complex)
    rng = np.random.default_rng(0)
    v0 = rng.normal(size=n) + 1j * rng.normal(size=n)
    mu, vecs = spla.eigs(op, k=2, which="LM", v0=v0, tol=1e-12)
    lam = shift + 1.0 / mu
    order = np.argsort(np.abs(lam))
    v = vecs[:, order[0]]
    for _ in range(2):
        v = lu.solve(v)
        v /= np.linalg.norm(v)
    null_dim = int(np.sum(np.abs(lam) <= null_tol * scale))
    return v, null_dim, np.abs(lam[order])


def steady_state(model, null_tol=NULL_TOL, return_info=False):
    """Unit-trace ρ with ``ℒ vec(ρ) = 0``.

    Small systems use a full eigendecomposition of ℒ; larger ones a sparse LU
    factorization with shift-invert Arnoldi for the two eigenvalues nearest
    zero.  A null space of dimension above one raises
    :class:`NonUniqueSteadyStateError`.
    """
    d = model.dim
    if d * d <= DENSE_EIG_LIMIT:
        lv = liouvillian_superoperator(model)
        scale = float(np.max(np.sum(np.abs(lv), axis=0))) or 1.0
        v, null_dim, small = _dense_null(lv, scale, null_tol)
    else:
        lv = liouvillian_sparse(model)
        scale = float(abs(lv).sum(axis=0).max()) or 1.0
        v, null_dim, small = _sparse_null(lv, scale, null_tol)
    if null_dim > 1:
        raise NonUniqueSteadyStateError(null_dim, small)
    rho = _normalize_state(v, d)
    residual = float(np.linalg.norm(lv @ vec(rho)))
    lnorm = float(spla.norm(lv)) if sp.issparse(lv) else frobenius_norm(lv)
    if residual > RESIDUAL_TOL * lnorm:
        raise ConditioningError(f"steady-state residual {residual:.3e} too large")
    logger.debug("steady state dim=%d residual=%.3e smallest |λ|=%s", d, residual, small)
    if return_info:
        return rho, {"residual": residual, "liouvillian_norm": lnorm, "smallest_abs_eigs": small}
    return rho


def evolve(model, rho0, t_final, dt, trace_tol=1e-9):
    """Classic fourth-order Runge-Kutta integration of the master equation."""
    rho = _check_rho(model, rho0).copy()
    if t_final < 0 or dt <= 0:
        raise InputError("need t_final >= 0 and dt > 0")
    n_steps = int(np.ceil(t_final / dt - 1e-12))
    if n_steps == 0:
        return rho
    h = t_final / n_steps
    tr0 = np.trace(rho)
    for _ in range(n_steps):
        k1 = lindblad_rhs(model, rho)
        k2 = lindblad_rhs(model, rho + 0.5 * h * k1)
        k3 = lindblad_rhs(model, rho + 0.5 * h * k2)
        k4 = lindblad_rhs(model, rho + h * k3)
        rho = rho + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(rho)) or frobenius_norm(rho) > abs(tr0) * (1 + 1e-6):
            raise StepSizeError(f"integration unstable with dt={h:g}")
    drift = abs(np.trace(rho) - tr0)
    if drift > trace_tol * max(1.0, t_final):
        raise StepSizeError(f"trace drift {drift:.3e} exceeds tolerance")
    return rho


def unitary_from_hamiltonian(h, t):
    """``exp(-i H t)`` through the eigendecomposition of the Hermitian ``H``."""
    h = as_matrix(h, "H")
    evals, evecs = np.linalg.eigh(0.5 * (h + dagger(h)))
    return (evecs * np.exp(-1j * evals * t)) @ dagger(evecs)


def _trace_out_edges(big, d):
    t = big.reshape(2, d, 2, 2, d, 2)
    return np.einsum("aibajb->ij", t)


def repeated_interaction_step(rho, rho_l, rho_r, h_total, tau, unitary=None):
    """One collision step: ``tr_{0,N+1}(U ρ_L⊗ρ⊗ρ_R U†)`` with ``U = exp(-iℋτ)``.

    ``h_total`` acts on bath qubit 0, the system, and bath qubit N+1 in that
    tensor order.  A precomputed ``unitary`` skips the exponential.
    """
    rho = as_matrix(rho, "rho")
    d = rho.shape[0]
    big_dim = 4 * d
    rho_l = as_matrix(rho_l, "rho_L")
    rho_r = as_matrix(rho_r, "rho_R")
    if rho_l.shape != (2, 2) or rho_r.shape != (2, 2):
        raise DimensionMismatchError("bath states must be single-qubit")
    if unitary is None:
        h_total = as_matrix(h_total, "H_total")
        if h_total.shape != (big_dim, big_dim):
            raise DimensionMismatchError(f"H_total has shape {h_total.shape}, need {big_dim}")
        unitary = unitary_from_hamiltonian(h_total, tau)
    big = np.kron(np.kron(rho_l, rho), rho_r)
    big = unitary @ big @ dagger(unitary)
    return _trace_out_edges(big, d)


def repeated_interactions(rho, rho_l, rho_r, h_total, tau, n_steps):
    """Compose :func:`repeated_interaction_step` ``n_steps`` times."""
    u = unitary_from_hamiltonian(h_total, tau)
    for _ in range(n_steps):
        rho = repeated_interaction_step(rho, rho_l, rho_r, None, tau, unitary=u)
    return rho
