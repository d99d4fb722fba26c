"""Dense complex linear algebra over multi-qubit Hilbert spaces.

Operators are plain ``numpy`` complex arrays.  Sites are numbered from 1 and
site 1 is the leftmost, slowest-varying tensor factor, so that for ``N``
qubits the basis index is ``sum_k b_k 2**(N-k)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from .errors import (
    DimensionMismatchError,
    InputError,
    InvalidDensityMatrixError,
    NonHermitianError,
    SizeLimitError,
)

MAX_DENSE_DIM = 4096
DEFAULT_DEGENERACY_TOL = 1e-8

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA = (SX, SY, SZ)
# raising/lowering with respect to sigma^z, |up> = (1, 0)
SPLUS = np.array([[0, 1], [0, 0]], dtype=complex)
SMINUS = SPLUS.T.copy()


def check_size(dim, limit=MAX_DENSE_DIM):
    if dim > limit:
        raise SizeLimitError(f"dimension {dim} exceeds dense limit {limit}")


def as_matrix(a, name="matrix"):
    """Return ``a`` as a finite square complex array or raise."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatchError(f"{name} must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InputError(f"{name} has non-finite entries")
    return m


def n_qubits(dim):
    n = int(round(np.log2(dim))) if dim > 0 else -1
    if n < 0 or 2**n != dim:
        raise DimensionMismatchError(f"dimension {dim} is not a power of two")
    return n


def dagger(a):
    return np.conj(np.transpose(a))


def commutator(a, b):
    return a @ b - b @ a


def anticommutator(a, b):
    return a @ b + b @ a


def frobenius_norm(a):
    return float(np.linalg.norm(a))


def trace_norm(a):
    """Sum of singular values."""
    return float(np.sum(np.linalg.svd(np.asarray(a), compute_uv=False)))


def trace_distance(a, b):
    return 0.5 * trace_norm(np.asarray(a) - np.asarray(b))


def is_hermitian(a, rtol=1e-10):
    a = np.asarray(a)
    return frobenius_norm(a - dagger(a)) <= rtol * max(1.0, frobenius_norm(a))


def tensor_product(a, b):
    """Kronecker product, ``(A⊗B)[i*dB+k, j*dB+l] = A[i,j] B[k,l]``."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    check_size(a.shape[0] * b.shape[0])
    return np.kron(a, b)


def tensor(*ops):
    """Kronecker product of several operators (or state vectors), left to right."""
    if not ops:
        return np.ones((1, 1), dtype=complex)
    return reduce(np.kron, [np.asarray(o, dtype=complex) for o in ops])


def _check_sites(sites, n):
    sites = list(sites)
    if any(not 1 <= s <= n for s in sites):
        raise InputError(f"site indices {sites} out of range 1..{n}")
    if len(set(sites)) != len(sites):
        raise InputError(f"repeated site indices {sites}")
    return sites


def embed_at_site(op, site, n):
    """``I^{⊗(site-1)} ⊗ op ⊗ I^{⊗(n-site)}`` for a single-qubit ``op``."""
    op = as_matrix(op, "op")
    if op.shape != (2, 2):
        raise DimensionMismatchError("embed_at_site expects a 2x2 operator")
    _check_sites([site], n)
    check_size(2**n)
    left = np.eye(2 ** (site - 1), dtype=complex)
    right = np.eye(2 ** (n - site), dtype=complex)
    return np.kron(np.kron(left, op), right)


def spin_dot(vec, site, n):
    """``vec · σ⃗`` at ``site`` of an ``n``-qubit register; ``vec`` may be complex."""
    local = sum(complex(c) * s for c, s in zip(vec, SIGMA))
    return embed_at_site(local, site, n)


def place_on_sites(parts, n):
    """Tensor together operators living on disjoint site sets.

    ``parts`` is a list of ``(operator, sites)``; the union of site lists must
    be ``1..n``.  Each operator is ordered by its own site list.
    """
    order = []
    mats = []
    for op, sites in parts:
        sites = list(sites)
        op = np.asarray(op, dtype=complex)
        if op.shape != (2 ** len(sites),) * 2:
            raise DimensionMismatchError(f"operator of shape {op.shape} on sites {sites}")
        order += sites
        mats.append(op)
    _check_sites(order, n)
    if sorted(order) != list(range(1, n + 1)):
        raise InputError(f"sites {order} do not cover 1..{n}")
    check_size(2**n)
    full = tensor(*mats)
    # axis a of the tensor holds site order[a]; move it to position site-1
    perm = np.argsort(order)
    t = full.reshape((2,) * (2 * n))
    t = t.transpose(list(perm) + [n + p for p in perm])
    return t.reshape(2**n, 2**n)


def partial_trace(rho, keep, n):
    """Reduce ``rho`` on ``n`` qubits to the sites in ``keep`` (kept in ascending order)."""
    rho = as_matrix(rho, "rho")
    if rho.shape[0] != 2**n:
        raise DimensionMismatchError(f"rho has dim {rho.shape[0]}, expected 2**{n}")
    keep = sorted(_check_sites(keep, n))
    traced = [s for s in range(1, n + 1) if s not in keep]
    t = rho.reshape((2,) * (2 * n))
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    if 2 * n > len(letters):
        raise SizeLimitError("too many qubits for partial_trace")
    rows = list(letters[:n])
    cols = list(letters[n : 2 * n])
    for s in traced:
        cols[s - 1] = rows[s - 1]
    out = "".join(rows[s - 1] for s in keep) + "".join(cols[s - 1] for s in keep)
    red = np.einsum("".join(rows) + "".join(cols) + "->" + out, t)
    k = 2 ** len(keep)
    return red.reshape(k, k)


def validate_density_matrix(rho, herm_tol=1e-12, trace_tol=1e-12, psd_tol=1e-10):
    """Return ``rho`` as an array after checking the density-matrix invariants."""
    rho = as_matrix(rho, "density matrix")
    d = rho.shape[0]
    if frobenius_norm(rho - dagger(rho)) > herm_tol * d:
        raise InvalidDensityMatrixError("density matrix is not Hermitian")
    tr = np.trace(rho)
    if abs(tr - 1) > trace_tol:
        raise InvalidDensityMatrixError(f"density matrix has trace {tr}")
    lmin = np.linalg.eigvalsh(0.5 * (rho + dagger(rho)))[0]
    if lmin < -psd_tol:
        raise InvalidDensityMatrixError(f"density matrix has eigenvalue {lmin}")
    return rho


def projector(psi):
    psi = np.asarray(psi, dtype=complex).ravel()
    return np.outer(psi, psi.conj())


def fidelity_with_pure(psi, rho):
    """``<psi|rho|psi>`` for a normalized vector ``psi``."""
    psi = np.asarray(psi, dtype=complex).ravel()
    return float(np.real(np.vdot(psi, rho @ psi)))


@dataclass(frozen=True)
class HermitianEigensystem:
    """Ascending eigenvalues, orthonormal eigenvector columns and degeneracy clusters."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    degeneracy_tol: float = DEFAULT_DEGENERACY_TOL
    clusters: tuple = field(default=())

    @property
    def dim(self):
        return len(self.eigenvalues)

    @property
    def scale(self):
        return max(1.0, float(np.max(np.abs(self.eigenvalues)))) if self.dim else 1.0

    def cluster_of(self, index):
        for c in self.clusters:
            if index in c:
                return c
        raise IndexError(index)

    def indices_near(self, value):
        """Indices whose eigenvalue lies within the degeneracy window of ``value``."""
        tol = self.degeneracy_tol * self.scale
        return np.flatnonzero(np.abs(self.eigenvalues - value) <= tol)


def degeneracy_clusters(evals, tol):
    groups = []
    start = 0
    for i in range(1, len(evals) + 1):
        if i == len(evals) or evals[i] - evals[i - 1] > tol:
            groups.append(tuple(range(start, i)))
            start = i
    return tuple(groups)


def hermitian_eig(h, degeneracy_tol=DEFAULT_DEGENERACY_TOL):
    """Full spectrum of a Hermitian matrix with degeneracy clustering.

    Consecutive eigenvalues closer than ``degeneracy_tol * max(1, ‖H‖)`` are
    chained into one cluster.
    """
    h = as_matrix(h, "H")
    check_size(h.shape[0])
    hnorm = frobenius_norm(h)
    if frobenius_norm(h - dagger(h)) > 1e-10 * max(hnorm, 1e-300):
        raise NonHermitianError("hermitian_eig received a non-Hermitian matrix")
    evals, evecs = np.linalg.eigh(0.5 * (h + dagger(h)))
    scale = max(1.0, float(np.max(np.abs(evals)))) if len(evals) else 1.0
    return HermitianEigensystem(
        eigenvalues=evals,
        eigenvectors=evecs,
        degeneracy_tol=degeneracy_tol,
        clusters=degeneracy_clusters(evals, degeneracy_tol * scale),
    )


def rank_by_threshold(rho, tol):
    """Number of eigenvalues of the Hermitian part of ``rho`` above ``tol``."""
    rho = as_matrix(rho, "rho")
    return int(np.sum(np.linalg.eigvalsh(0.5 * (rho + dagger(rho))) > tol))


def matrix_to_json(m):
    m = as_matrix(m)
    return {
        "dim": int(m.shape[0]),
        "entries": [[float(z.real), float(z.imag)] for z in m.ravel()],
    }


def matrix_from_json(obj):
    if isinstance(obj, str):
        obj = json.loads(obj)
    dim = int(obj["dim"])
    entries = obj["entries"]
    if dim <= 0 or len(entries) != dim * dim:
        raise InputError(f"matrix dump with dim {dim} has {len(entries)} entries")
    flat = np.array([complex(re, im) for re, im in entries])
    return as_matrix(flat.reshape(dim, dim))
