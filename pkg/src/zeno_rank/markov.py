"""Auxiliary continuous-time Markov chain on the eigenstates of ``h_D``.

``rates[α, β]`` is the jump rate α → β.  The generator ``F`` acts on column
probability vectors, ``dν/dt = F ν``, so ``F[β, α] = rates[α, β]`` off the
diagonal and each column sums to zero.  With the closed class listed first the
permuted generator has the block layout ``[[X, R], [0, K]]``: ``R`` carries
transient → closed inflow and the zero block is the absent closed → transient
leak.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import ConditioningError, DimensionMismatchError, InputError, NonUniqueStationaryError, NotClosedError

DEFAULT_RATE_FLOOR = 1e-10
DEFAULT_K_TOL = 1e-10


@dataclass(frozen=True)
class MarkovChainModel:
    rates: np.ndarray
    eigenvalues: np.ndarray | None = None

    def __post_init__(self):
        w = np.array(self.rates, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise DimensionMismatchError(f"rate matrix must be square, got {w.shape}")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise InputError("rates must be finite and nonnegative")
        np.fill_diagonal(w, 0.0)
        object.__setattr__(self, "rates", w)
        if self.eigenvalues is not None:
            lam = np.asarray(self.eigenvalues, dtype=float)
            if lam.shape != (w.shape[0],):
                raise DimensionMismatchError("one eigenvalue label per state required")
            object.__setattr__(self, "eigenvalues", lam)

    @property
    def n_states(self):
        return self.rates.shape[0]

    @property
    def generator(self):
        f = self.rates.T.copy()
        np.fill_diagonal(f, -self.rates.sum(axis=1))
        return f

    def default_floor(self, rel=DEFAULT_RATE_FLOOR):
        return rel * float(self.rates.max(initial=0.0))


def _operator_in_basis(op, basis):
    """``V† L V`` exploiting sparsity of local jump operators."""
    a = sp.csr_matrix(op)
    if a.nnz < 0.1 * a.shape[0] ** 2:
        return basis.conj().T @ (a @ basis)
    return basis.conj().T @ (np.asarray(op) @ basis)


def transition_rates(eigensystem, effective_lindblads, gamma):
    """``rates[α, β] = Γ⁻¹ Σ_k γ_k |⟨β|L̃_k|α⟩|²`` in the eigenbasis of ``h_D``."""
    v = np.asarray(eigensystem.eigenvectors)
    d = v.shape[0]
    if not gamma > 0:
        raise InputError("gamma must be positive")
    w = np.zeros((d, d))
    for op in effective_lindblads:
        if op.operator.shape != (d, d):
            raise DimensionMismatchError("Lindblad operator does not match eigenbasis dimension")
        m = _operator_in_basis(op.operator, v)
        # m[β, α] = <β|L|α>, the α -> β amplitude
        w += op.weight * np.abs(m.T) ** 2
    return MarkovChainModel(w / gamma, eigensystem.eigenvalues)


@dataclass(frozen=True)
class ClassDecomposition:
    closed_classes: tuple
    transient: tuple
    rate_floor: float

    @property
    def closed_states(self):
        return tuple(sorted(i for c in self.closed_classes for i in c))

    def to_json(self):
        return {
            "closed": [list(map(int, c)) for c in self.closed_classes],
            "transient": list(map(int, self.transient)),
            "epsilon": self.rate_floor,
        }


def adjacency(model, eps):
    return model.rates > eps


def classify_states(model, eps=None):
    """Closed classes (SCCs with no outgoing edge ``> eps``) and transient states.

    The default floor is ``1e-10 * max(rates)``.  Classes are ordered by their
    smallest member, states within a class ascending.
    """
    if eps is None:
        eps = model.default_floor()
    adj = adjacency(model, eps)
    n, labels = connected_components(sp.csr_matrix(adj), directed=True, connection="strong")
    closed = []
    for c in range(n):
        members = np.flatnonzero(labels == c)
        outside = labels != c
        if not adj[np.ix_(members, outside)].any():
            closed.append(tuple(int(i) for i in members))
    closed.sort(key=min)
    in_closed = {i for c in closed for i in c}
    transient = tuple(i for i in range(model.n_states) if i not in in_closed)
    return ClassDecomposition(tuple(closed), transient, float(eps))


@dataclass(frozen=True)
class CanonicalForm:
    X: np.ndarray
    R: np.ndarray
    K: np.ndarray
    permutation: np.ndarray
    leak: float

    def assemble(self):
        r = self.X.shape[0]
        t = self.K.shape[0]
        return np.block([[self.X, self.R], [np.zeros((t, r)), self.K]])


def canonical_form(model, closed_class, eps=None):
    """Permute the generator so ``closed_class`` comes first, ``[[X, R], [0, K]]``.

    Raises :class:`NotClosedError` if the would-be zero block exceeds ``eps``.
    """
    if eps is None:
        eps = model.default_floor()
    closed = sorted(int(i) for i in closed_class)
    if not closed:
        raise InputError("closed class must be non-empty")
    rest = [i for i in range(model.n_states) if i not in set(closed)]
    perm = np.array(closed + rest, dtype=int)
    f = model.generator[np.ix_(perm, perm)]
    r = len(closed)
    lower = f[r:, :r]
    leak = float(np.max(lower, initial=0.0))
    if leak > eps:
        raise NotClosedError(f"class leaks with rate {leak:.3e} > {eps:.3e}")
    return CanonicalForm(f[:r, :r], f[:r, r:], f[r:, r:], perm, leak)


@dataclass(frozen=True)
class TransientCertificate:
    ok: bool
    min_singular_value: float
    relative_margin: float
    abs_det: float
    log10_abs_det: float


def transient_certificate(K, tol=DEFAULT_K_TOL):
    """``K`` is nonsingular iff ``σ_min(K) > tol · ‖K‖₂``; no zero eigenvalue means every state is transient."""
    K = np.asarray(K, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise DimensionMismatchError("K must be square")
    if K.size == 0:
        return TransientCertificate(True, float("inf"), float("inf"), 1.0, 0.0)
    sv = np.linalg.svd(K, compute_uv=False)
    top = float(sv[0])
    low = float(sv[-1])
    rel = low / top if top > 0 else 0.0
    sign, logdet = np.linalg.slogdet(K)
    log10 = float(logdet / np.log(10)) if sign != 0 else float("-inf")
    absdet = float(10.0**log10) if -300 < log10 < 300 else (0.0 if log10 <= -300 else float("inf"))
    return TransientCertificate(rel > tol, low, rel, absdet, log10)


def stationary_distribution(model, decomposition, clip=True):
    """Unique stationary law from the null vector of the closed-class block ``X``."""
    if len(decomposition.closed_classes) != 1:
        raise NonUniqueStationaryError(decomposition.closed_classes)
    closed = list(decomposition.closed_classes[0])
    f = model.generator
    x = f[np.ix_(closed, closed)]
    _, _, vh = np.linalg.svd(x)
    v = vh[-1].real
    v = v / v.sum()
    nu = np.zeros(model.n_states)
    nu[closed] = v
    if clip:
        nu = np.clip(nu, 0.0, None)
        nu /= nu.sum()
    scale = max(1.0, float(np.abs(f).max(initial=0.0)))
    residual = float(np.abs(f @ nu).max())
    if residual > 1e-10 * scale:
        raise ConditioningError(f"stationary residual {residual:.3e} too large")
    return nu


def rates_to_csv(model, fh=None):
    """Rate matrix as CSV, row = source state.  Returns the text if ``fh`` is None."""
    buf = fh or io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["source"] + [str(j) for j in range(model.n_states)])
    for i, row in enumerate(model.rates):
        writer.writerow([str(i)] + [repr(float(x)) for x in row])
    if fh is None:
        return buf.getvalue()
    return None


def rates_to_json(model):
    out = {"rates": model.rates.tolist()}
    if model.eigenvalues is not None:
        out["eigenvalues"] = model.eigenvalues.tolist()
    return json.dumps(out)
