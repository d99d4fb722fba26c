"""Boundary-driven XXZ chain: Hamiltonian, targets, Zeno effective model, helix states.

Conventions: ``H = Σ_n J(σˣσˣ + σʸσʸ + Δ σᶻσᶻ)`` on sites ``1..N``; the interior
sites ``2..N-1`` are renumbered ``1..M`` with ``M = N - 2``; a single-qubit
target with polarization ``μ n⃗`` is the state ``½(I + μ n⃗·σ⃗)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, replace

import numpy as np
import scipy.sparse as sp

from .errors import CollinearityError, ConditioningError, InputError
from .lindblad import LindbladModel, WeightedLindbladOp
from .operators import I2, SIGMA, check_size, projector, tensor
from .zeno import EffectiveModel

_JSON_KEYS = {
    "N": "N",
    "J": "J",
    "Delta": "delta",
    "thetaL": "theta_l",
    "phiL": "phi_l",
    "muL": "mu_l",
    "thetaR": "theta_r",
    "phiR": "phi_r",
    "muR": "mu_r",
    "Gamma": "gamma",
}


@dataclass(frozen=True)
class ChainSpec:
    """Physical parameters of the chain; angles in radians."""

    N: int
    J: float = 1.0
    delta: float = 1.0
    theta_l: float = math.pi / 2
    phi_l: float = 0.0
    mu_l: float = 1.0
    theta_r: float = math.pi / 2
    phi_r: float = 0.0
    mu_r: float = 1.0
    gamma: float = 1.0

    def __post_init__(self):
        if isinstance(self.N, bool) or int(self.N) != self.N or self.N < 3:
            raise InputError(f"N must be an integer >= 3, got {self.N!r}")
        object.__setattr__(self, "N", int(self.N))
        for name in ("J", "delta", "theta_l", "phi_l", "mu_l", "theta_r", "phi_r", "mu_r", "gamma"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float, np.floating, np.integer)):
                raise InputError(f"{name} must be a real number, got {value!r}")
            if not math.isfinite(value):
                raise InputError(f"{name} must be finite")
            object.__setattr__(self, name, float(value))
        for name in ("theta_l", "theta_r"):
            if not 0.0 <= getattr(self, name) <= math.pi:
                raise InputError(f"{name} must lie in [0, pi]")
        for name in ("mu_l", "mu_r"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise InputError(f"{name} must lie in [0, 1]")
        if not self.gamma > 0:
            raise InputError("gamma must be positive")

    @property
    def M(self):
        return self.N - 2

    @property
    def helix_step(self):
        """Azimuthal step per bond implied by the boundary targets."""
        return (self.phi_r - self.phi_l) / (self.N - 1)

    @classmethod
    def helix(cls, N, phi, theta=math.pi / 2, J=1.0, gamma=1.0):
        """Helix-matched spec: ``Δ = cos φ``, ``φ_L = 0``, ``φ_R = φ(N-1)``, pure targets."""
        return cls(
            N=N, J=J, delta=math.cos(phi), theta_l=theta, phi_l=0.0, mu_l=1.0,
            theta_r=theta, phi_r=phi * (N - 1), mu_r=1.0, gamma=gamma,
        )

    def with_gamma(self, gamma):
        return replace(self, gamma=gamma)

    def to_json(self):
        data = asdict(self)
        return {key: data[attr] for key, attr in _JSON_KEYS.items()}

    @classmethod
    def from_json(cls, obj):
        if isinstance(obj, (str, bytes)):
            try:
                obj = json.loads(obj)
            except json.JSONDecodeError as exc:
                raise InputError(f"spec is not valid JSON: {exc}") from exc
        if not isinstance(obj, dict):
            raise InputError("spec JSON must be an object")
        unknown = set(obj) - set(_JSON_KEYS)
        if unknown:
            raise InputError(f"unknown spec keys: {sorted(unknown)}")
        missing = set(_JSON_KEYS) - set(obj)
        if missing:
            raise InputError(f"missing spec keys: {sorted(missing)}")
        return cls(**{attr: obj[key] for key, attr in _JSON_KEYS.items()})


def bloch_vector(theta, phi):
    return np.array(
        [math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)]
    )


def _primed_axes(theta, phi):
    """The two axes ``n′ = n(π/2-θ, φ+π)`` and ``n″ = n(π/2, φ+π/2)`` orthogonal to ``n(θ, φ)``."""
    return bloch_vector(math.pi / 2 - theta, phi + math.pi), bloch_vector(math.pi / 2, phi + math.pi / 2)


def _dot_sigma(vec):
    return sum(complex(c) * s for c, s in zip(vec, SIGMA))


def target_qubit_state(theta, phi, mu):
    if not 0.0 <= mu <= 1.0:
        raise InputError(f"purity mu must lie in [0, 1], got {mu}")
    return 0.5 * (I2 + mu * _dot_sigma(bloch_vector(theta, phi)))


def single_site_lindblads(theta, phi, mu):
    """The pair ``(2√2)⁻¹ √(1±μ) (n′ ∓ i n″)·σ⃗``; zero-prefactor operators are dropped."""
    n1, n2 = _primed_axes(theta, phi)
    ops = []
    for sign in (1, -1):
        pref = math.sqrt(max(0.0, 1 + sign * mu)) / (2 * math.sqrt(2))
        if pref > 0:
            ops.append(pref * (_dot_sigma(n1) - sign * 1j * _dot_sigma(n2)))
    return ops


def _site_sparse(op, site, n):
    left = sp.identity(2 ** (site - 1), dtype=complex, format="csr")
    right = sp.identity(2 ** (n - site), dtype=complex, format="csr")
    return sp.kron(sp.kron(left, sp.csr_matrix(op)), right, format="csr")


def _chain_bonds(n, couplings):
    """``Σ_j Σ_a J_a σᵃ_j σᵃ_{j+1}`` as a sparse matrix."""
    out = sp.csr_matrix((2**n, 2**n), dtype=complex)
    for j in range(1, n):
        for ja, s in zip(couplings, SIGMA):
            if ja != 0:
                out = out + ja * (_site_sparse(s, j, n) @ _site_sparse(s, j + 1, n))
    return out


def anisotropy(spec):
    return np.array([spec.J, spec.J, spec.J * spec.delta])


def xxz_hamiltonian(spec):
    check_size(2**spec.N)
    return _chain_bonds(spec.N, anisotropy(spec)).toarray()


def boundary_kernels(spec):
    """Target states ``(ρ_L, ρ_R)`` on sites 1 and N."""
    return (
        target_qubit_state(spec.theta_l, spec.phi_l, spec.mu_l),
        target_qubit_state(spec.theta_r, spec.phi_r, spec.mu_r),
    )


def boundary_lindblads(spec):
    n = spec.N
    check_size(2**n)
    ops = []
    for (theta, phi, mu), site in (
        ((spec.theta_l, spec.phi_l, spec.mu_l), 1),
        ((spec.theta_r, spec.phi_r, spec.mu_r), n),
    ):
        for local in single_site_lindblads(theta, phi, mu):
            ops.append(WeightedLindbladOp(_site_sparse(local, site, n).toarray(), 1.0))
    return ops


def full_lindblad_model(spec):
    return LindbladModel(xxz_hamiltonian(spec), tuple(boundary_lindblads(spec)), spec.gamma)


def effective_jump_operators(spec):
    """``g₁`` and ``g₃`` for both edges of the interior chain, keyed ``g1L, g1R, g3L, g3R``."""
    m = spec.M
    jt = anisotropy(spec)
    out = {}
    for side, theta, phi, site in (("L", spec.theta_l, spec.phi_l, 1), ("R", spec.theta_r, spec.phi_r, m)):
        n1, n2 = _primed_axes(theta, phi)
        g1 = _dot_sigma(jt * n1) - 1j * _dot_sigma(jt * n2)
        g3 = 2 * _dot_sigma(jt * bloch_vector(theta, phi))
        out["g1" + side] = _site_sparse(g1, site, m).toarray()
        out["g3" + side] = _site_sparse(g3, site, m).toarray()
    return out


def explicit_h_d(spec):
    m = spec.M
    check_size(2**m)
    jt = anisotropy(spec)
    h = _chain_bonds(m, jt)
    h = h + spec.mu_l * _site_sparse(_dot_sigma(jt * bloch_vector(spec.theta_l, spec.phi_l)), 1, m)
    h = h + spec.mu_r * _site_sparse(_dot_sigma(jt * bloch_vector(spec.theta_r, spec.phi_r)), m, m)
    return h.toarray()


def effective_xxz_model(spec):
    """Zeno-limit ``h_D`` plus ``D̃_L + D̃_R`` on the ``M = N - 2`` interior qubits.

    Weights are ``2(1+μ)`` on ``g₁``, ``2(1-μ)`` on ``g₁†`` and ``½(1-μ²)`` on
    ``g₃`` per edge; operators with zero weight are omitted, so pure targets
    leave ``4 D[g₁L] + 4 D[g₁R]``.
    """
    g = effective_jump_operators(spec)
    ops = []
    for side, mu in (("L", spec.mu_l), ("R", spec.mu_r)):
        g1 = g["g1" + side]
        for weight, op in (
            (2 * (1 + mu), g1),
            (2 * (1 - mu), g1.conj().T),
            (0.5 * (1 - mu * mu), g["g3" + side]),
        ):
            if weight > 0:
                ops.append(WeightedLindbladOp(op, weight))
    return EffectiveModel(explicit_h_d(spec), tuple(ops), spec.gamma)


def _spinor(theta, azimuth):
    return np.array(
        [math.cos(theta / 2) * np.exp(-0.5j * azimuth), math.sin(theta / 2) * np.exp(0.5j * azimuth)]
    )


def spin_helix_state(N, theta, phi):
    """Product state with local azimuth ``φ(k-1)`` on site ``k = 1..N``."""
    check_size(2**N)
    return tensor(*[_spinor(theta, phi * (k - 1)) for k in range(1, N + 1)]).ravel()


def helix_interior_state(N, theta, phi, sign=1, phi_offset=0.0):
    """Interior helix ``|0±⟩``: local azimuth ``φ_offset ± kφ`` on interior site ``k = 1..N-2``."""
    if sign not in (1, -1):
        raise InputError("sign must be +1 or -1")
    check_size(2 ** (N - 2))
    return tensor(*[_spinor(theta, phi_offset + sign * phi * k) for k in range(1, N - 1)]).ravel()


def kappa(J, theta, phi):
    """Eigenvalue of ``g₁R`` on ``|0₊⟩`` (and minus that of ``g₁L``)."""
    return 1j * J * math.sin(theta) * math.sin(phi)


def overlap_eta(theta, phi, N):
    """``⟨0₋|0₊⟩ = Π_{k=1}^{N-2} (cos kφ − i cos θ sin kφ)``."""
    k = np.arange(1, N - 1)
    return complex(np.prod(np.cos(k * phi) - 1j * math.cos(theta) * np.sin(k * phi)))


def q_pochhammer(a, q, n, start=0):
    """``Π_{k=start}^{start+n-1} (1 − a q^k)``."""
    k = np.arange(start, start + n)
    return complex(np.prod(1 - a * np.power(complex(q), k)))


def overlap_eta_pochhammer(theta, phi, N):
    """Closed form of :func:`overlap_eta` via ``(-tan²(θ/2) q; q)_M`` with ``q = e^{2iφ}``.

    Undefined at ``θ = π`` where the tangent diverges.
    """
    m = N - 2
    t2 = math.tan(theta / 2) ** 2
    pref = np.exp(-0.5j * m * (m + 1) * phi) * math.cos(theta / 2) ** (2 * m)
    return complex(pref * q_pochhammer(-t2, np.exp(2j * phi), m, start=1))


def _is_multiple(x, period, tol=1e-9):
    r = x / period
    return abs(r - round(r)) <= tol


def helix_geometry(spec, tol=1e-9):
    """Return ``(θ, φ)`` if the spec is helix-matched, else raise :class:`InputError`.

    Helix-matched means pure equal-θ targets and ``Δ = cos φ`` with ``φ`` the
    per-bond azimuthal step between the boundary targets.
    """
    if abs(spec.theta_l - spec.theta_r) > tol:
        raise InputError("helix geometry needs theta_L == theta_R")
    if spec.mu_l != 1.0 or spec.mu_r != 1.0:
        raise InputError("helix geometry needs pure targets (mu = 1)")
    phi = spec.helix_step
    if abs(spec.delta - math.cos(phi)) > tol:
        raise InputError(f"Delta={spec.delta} differs from cos(phi)={math.cos(phi)}")
    return spec.theta_l, phi


def is_rank2_geometry(spec, tol=1e-9):
    """Parallel or antiparallel helix-matched boundaries, ``φ_R − φ_L = nπ``."""
    try:
        helix_geometry(spec, tol)
    except InputError:
        return False
    return _is_multiple(spec.phi_r - spec.phi_l, math.pi, tol)


def orientation(spec, tol=1e-9):
    """``"parallel"``, ``"antiparallel"`` or ``"helix"`` for the boundary pair."""
    diff = spec.phi_r - spec.phi_l
    if _is_multiple(diff, 2 * math.pi, tol):
        return "parallel"
    if _is_multiple(diff, math.pi, tol):
        return "antiparallel"
    return "helix"


@dataclass(frozen=True)
class Rank2Basis:
    zero: np.ndarray
    one: np.ndarray
    a0: complex
    a1: complex
    eta: complex
    residual: float


def rank2_basis(spec, tol=1e-10):
    """Orthonormal ``|0⟩, |1⟩`` built from ``|0₊⟩, |0₋⟩`` with ``g₁R|0⟩ = a₀|1⟩``, ``g₁R|1⟩ = a₁|0⟩``."""
    if not is_rank2_geometry(spec):
        raise InputError("rank-2 basis needs helix-matched parallel/antiparallel boundaries")
    theta, phi = helix_geometry(spec)
    N = spec.N
    plus = helix_interior_state(N, theta, phi, +1, spec.phi_l)
    minus = helix_interior_state(N, theta, phi, -1, spec.phi_l)
    eta = complex(np.vdot(minus, plus))
    mod = abs(eta)
    if mod >= 1 - 1e-12:
        raise CollinearityError(f"|eta| = {mod:.15f}: helix states are collinear")
    # the phase is free when eta vanishes; choose 1
    phase = eta / mod if mod > 1e-14 else 1.0
    eta_p = math.sqrt(2 + 2 * mod)
    eta_m = math.sqrt(2 - 2 * mod)
    zero = (plus + phase * minus) / eta_p
    one = (plus - phase * minus) / eta_m
    k = kappa(spec.J, theta, phi)
    a0 = k * eta_m / eta_p
    a1 = k * eta_p / eta_m
    g1r = effective_jump_operators(spec)["g1R"]
    residual = max(
        float(np.linalg.norm(g1r @ zero - a0 * one)),
        float(np.linalg.norm(g1r @ one - a1 * zero)),
    )
    if residual > tol * max(1.0, abs(a1)):
        raise ConditioningError(f"g1R action on rank-2 basis has residual {residual:.3e}")
    return Rank2Basis(zero, one, a0, a1, eta, residual)


def rank2_weights(eta):
    """Interior eigenvalues ``(1±|η|)² / (2 + 2|η|²)``."""
    mod = abs(eta)
    denom = 2 + 2 * mod * mod
    return (1 + mod) ** 2 / denom, (1 - mod) ** 2 / denom


def rank2_parameter_predicate(N, phi, theta=math.pi / 2, tol=1e-9):
    """Whether ``(N, φ, θ)`` is in the rank-2 family; returns ``(ok, diagnosis)``.

    Requires ``φ = πm/(N-1)`` with integer ``1 ≤ m ≤ N-2`` and no collinear pair
    among the interior helix spins, i.e. ``gcd(m, N-1) = 1`` and ``0 < θ < π``.
    """
    if not tol < theta < math.pi - tol:
        return False, "theta at a pole: all spins collinear"
    m_real = phi * (N - 1) / math.pi
    m = round(m_real)
    if abs(m_real - m) > tol:
        return False, f"phi*(N-1)/pi = {m_real:.6g} is not an integer"
    if not 1 <= m <= N - 2:
        return False, f"m = {m} outside 1..{N - 2}"
    g = math.gcd(m, N - 1)
    if g != 1:
        return False, f"gcd(m={m}, N-1={N - 1}) = {g}: spins {(N - 1) // g} sites apart are collinear"
    return True, f"m = {m} coprime to N-1 = {N - 1}"


def rank2_ness(spec):
    """Full-chain ``ρ_L ⊗ (w₀|0⟩⟨0| + w₁|1⟩⟨1|) ⊗ ρ_R``."""
    theta, phi = helix_geometry(spec)
    ok, why = rank2_parameter_predicate(spec.N, phi, theta)
    if not ok:
        raise InputError(f"rank-2 parameter predicate fails: {why}")
    basis = rank2_basis(spec)
    w0, w1 = rank2_weights(basis.eta)
    interior = w0 * projector(basis.zero) + w1 * projector(basis.one)
    rho_l, rho_r = boundary_kernels(spec)
    return tensor(rho_l, interior, rho_r)


def flipflop_coupling(theta, phi, first, second, n):
    """``s_a s_b† + s_a† s_b`` with ``s = ½(n′ − i n″)·σ⃗`` the flip toward ``n(θ, φ)``.

    Coupling a bath qubit held in the target state to an edge spin this way
    has no first-order (mean-field) term, so repeated interactions with
    ``γ_B²τ = Γ`` converge to the boundary dissipator as ``τ → 0``.
    """
    n1, n2 = _primed_axes(theta, phi)
    s = 0.5 * (_dot_sigma(n1) - 1j * _dot_sigma(n2))
    a = _site_sparse(s, first, n) @ _site_sparse(s.conj().T, second, n)
    return (a + a.conj().T).toarray()


def repeated_interaction_hamiltonian(spec, gamma_b):
    """``ℋ = H + γ_B (U_{0,1} + U_{N,N+1})`` on bath ⊗ chain ⊗ bath."""
    n = spec.N + 2
    check_size(2**n)
    h = np.kron(np.kron(I2, xxz_hamiltonian(spec)), I2)
    u_l = flipflop_coupling(spec.theta_l, spec.phi_l, 1, 2, n)
    u_r = flipflop_coupling(spec.theta_r, spec.phi_r, n, n - 1, n)
    return h + gamma_b * (u_l + u_r)
