"""Rank criterion: conditions A, B, C on the auxiliary chain and the Zeno NESS.

A: the designated class is closed and strongly connected.
B: every other state is transient (nonsingular ``K``, a single closed class).
C: ``⟨z|Σ γ_k L̃_k†L̃_k|α⟩`` vanishes for degenerate closed/transient pairs.
When all three hold the Zeno NESS is ``ψ_L ⊗ Σ_z ν_z |z⟩⟨z| ⊗ ψ_R``.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import CollinearityError, ConditioningError, ConditionsNotMetError, InputError, SizeLimitError
from .lindblad import MAX_LIOUVILLIAN_DIM, steady_state
from .markov import (
    DEFAULT_K_TOL,
    DEFAULT_RATE_FLOOR,
    canonical_form,
    classify_states,
    stationary_distribution,
    transient_certificate,
    transition_rates,
)
from .operators import DEFAULT_DEGENERACY_TOL, HermitianEigensystem, degeneracy_clusters, hermitian_eig, partial_trace, tensor, trace_distance
from .xxz import (
    boundary_kernels,
    effective_xxz_model,
    full_lindblad_model,
    helix_geometry,
    helix_interior_state,
    is_rank2_geometry,
    rank2_basis,
)


TOL_ENV = "ZENO_RANK_TOL"
# rows from this size on are flagged as numerically unreliable
PRECISION_WARN_N = 13


@dataclass(frozen=True)
class Tolerances:
    """All relative: ``eps`` to the max rate, ``degeneracy`` to ``max(1, ‖h_D‖)``,
    ``c`` to ``‖Σγ L̃†L̃‖₂``, ``k`` to ``‖K‖₂``."""

    eps: float = DEFAULT_RATE_FLOOR
    degeneracy: float = DEFAULT_DEGENERACY_TOL
    c: float = 1e-8
    k: float = DEFAULT_K_TOL

    def __post_init__(self):
        for name in ("eps", "degeneracy", "c", "k"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise InputError(f"tolerance {name} must be positive, got {value!r}")

    @classmethod
    def from_string(cls, text, base=None):
        """Parse ``"eps=1e-10,c=1e-8"``; unspecified keys keep ``base`` values."""
        base = base or cls()
        updates = {}
        for item in filter(None, (s.strip() for s in text.split(","))):
            key, sep, value = item.partition("=")
            key = key.strip()
            if not sep or key not in ("eps", "degeneracy", "c", "k"):
                raise InputError(f"bad tolerance entry {item!r}; use eps|degeneracy|c|k=value")
            try:
                updates[key] = float(value)
            except ValueError as exc:
                raise InputError(f"bad tolerance value in {item!r}") from exc
        return replace(base, **updates)

    @classmethod
    def from_env(cls, environ=None):
        text = (environ if environ is not None else os.environ).get(TOL_ENV, "")
        return cls.from_string(text) if text else cls()


PASS, FAIL, NA = "pass", "fail", "n/a"


@dataclass(frozen=True)
class Verdict:
    status: str
    margin: float | None = None
    detail: str = ""
    pairs: tuple = ()

    @property
    def holds(self):
        """Passed, or vacuously true when not applicable."""
        return self.status != FAIL

    def to_json(self):
        out = {"pass": NA if self.status == NA else self.status == PASS, "margin": _num(self.margin)}
        if self.detail:
            out["detail"] = self.detail
        return out


def _num(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else str(x)


def check_condition_A(model, candidate, eps=None):
    """Closed (no rate ``> eps`` leaving) and a single strongly connected component."""
    cand = sorted(int(i) for i in candidate)
    if not cand:
        raise InputError("candidate class is empty")
    if eps is None:
        eps = model.default_floor()
    inside = np.zeros(model.n_states, dtype=bool)
    inside[cand] = True
    leak = float(model.rates[np.ix_(inside, ~inside)].max(initial=0.0))
    sub = sp.csr_matrix(model.rates[np.ix_(cand, cand)] > eps)
    n_scc, _ = connected_components(sub, directed=True, connection="strong")
    connected = n_scc == 1
    ok = leak <= eps and connected
    detail = [] if connected else ["candidate is not strongly connected"]
    if leak > eps:
        detail.append(f"leak rate {leak:.3e} exceeds floor {eps:.3e}")
    return Verdict(PASS if ok else FAIL, leak, "; ".join(detail))


def check_condition_B(model, decomposition, closed_class, tol_k=DEFAULT_K_TOL):
    """Nonsingular transient block and exactly one closed class; n/a without transients."""
    n_closed = len(decomposition.closed_classes)
    closed = sorted(closed_class)
    rest = [i for i in range(model.n_states) if i not in set(closed)]
    if not rest:
        if n_closed == 1:
            return Verdict(NA, None, "no transient states")
        return Verdict(FAIL, None, f"{n_closed} closed classes")
    f = model.generator
    k = f[np.ix_(rest, rest)]
    cert = transient_certificate(k, tol_k)
    ok = cert.ok and n_closed == 1
    detail = f"sigma_min(K)/|K| = {cert.relative_margin:.3e}, log10|det K| = {cert.log10_abs_det:.2f}"
    if n_closed != 1:
        sizes = ",".join(str(len(c)) for c in decomposition.closed_classes)
        detail += f"; {n_closed} closed classes (sizes {sizes})"
    return Verdict(PASS if ok else FAIL, cert.relative_margin, detail)


def check_condition_C(eigensystem, effective_lindblads, closed_class, degeneracy_tol=None, tol_c=1e-8):
    """Scan degenerate (closed ``z``, transient ``α``) pairs of ``⟨z|Σγ L̃†L̃|α⟩``.

    ``tol_c`` is relative to the spectral norm of the dissipation generator.
    """
    lam = np.asarray(eigensystem.eigenvalues)
    v = np.asarray(eigensystem.eigenvectors)
    if degeneracy_tol is None:
        degeneracy_tol = eigensystem.degeneracy_tol
    window = degeneracy_tol * max(1.0, float(np.max(np.abs(lam), initial=0.0)))
    closed = sorted(closed_class)
    transient = [i for i in range(len(lam)) if i not in set(closed)]
    pairs = [(z, a) for z in closed for a in transient if abs(lam[z] - lam[a]) <= window]
    if not pairs:
        return Verdict(NA, None, "no degenerate closed/transient pairs")
    g = np.zeros((v.shape[0], v.shape[0]), dtype=complex)
    for op in effective_lindblads:
        g += op.weight * (op.operator.conj().T @ op.operator)
    scale = float(np.linalg.norm(g, 2)) or 1.0
    zs = sorted({z for z, _ in pairs})
    alphas = sorted({a for _, a in pairs})
    block = v[:, zs].conj().T @ (g @ v[:, alphas])
    zi = {z: i for i, z in enumerate(zs)}
    ai = {a: i for i, a in enumerate(alphas)}
    records = tuple((z, a, float(lam[z]), float(abs(block[zi[z], ai[a]]))) for z, a in pairs)
    worst = max(r[3] for r in records)
    ok = worst <= tol_c * scale
    return Verdict(PASS if ok else FAIL, worst, f"{len(records)} pairs, tol {tol_c * scale:.3e}", records)


def _seed_states(spec):
    """Analytic eigenvectors of ``h_D`` at ``λ₀`` used to fix the degenerate basis."""
    try:
        theta, phi = helix_geometry(spec)
    except InputError:
        return [], []
    plus = helix_interior_state(spec.N, theta, phi, +1, spec.phi_l)
    if is_rank2_geometry(spec):
        try:
            b = rank2_basis(spec)
            return [b.zero, b.one], []
        except CollinearityError as exc:
            return [plus], [f"rank-2 basis unavailable ({exc}); seeding with the helix state"]
        except ConditioningError as exc:
            return [], [f"rank-2 basis rejected: {exc}"]
    return [plus], []


def seeded_eigensystem(es, seeds, value, tol=1e-8):
    """Replace the eigenbasis of the cluster at ``value`` by ``seeds`` plus an orthonormal complement.

    Returns ``(eigensystem, seed_indices, warnings)``; falls back to the raw
    basis if the seeds do not lie in that eigenspace.
    """
    if not seeds:
        return es, [], []
    idx = es.indices_near(value)
    s = np.column_stack(seeds)
    if len(idx) < s.shape[1]:
        return es, [], [f"seed states exceed the degeneracy {len(idx)} at {value:.6g}; raw basis used"]
    vc = es.eigenvectors[:, idx]
    outside = s - vc @ (vc.conj().T @ s)
    if np.linalg.norm(outside) > tol * math.sqrt(s.shape[1]):
        return es, [], [f"seed states are not eigenvectors at {value:.6g}; raw basis used"]
    comp = vc - s @ (s.conj().T @ vc)
    u, _, _ = np.linalg.svd(comp, full_matrices=False)
    basis = np.column_stack([s, u[:, : len(idx) - s.shape[1]]])
    vecs = es.eigenvectors.copy()
    vecs[:, idx] = basis
    lam = es.eigenvalues.copy()
    lam[idx] = value
    new = HermitianEigensystem(lam, vecs, es.degeneracy_tol, degeneracy_clusters(lam, es.degeneracy_tol * es.scale))
    return new, [int(i) for i in idx[: s.shape[1]]], []


@dataclass
class CriterionReport:
    spec: object
    closed_class: tuple
    cond_A: Verdict
    cond_B: Verdict
    cond_C: Verdict
    predicted_rank: int | None
    nu: np.ndarray | None
    lambda0_degeneracy: int
    closed_classes: tuple = ()
    closed_vectors: np.ndarray | None = None
    assembled_ness: np.ndarray | None = None
    warnings: list = field(default_factory=list)

    @property
    def full_rank(self):
        return 2 ** (self.spec.N - 2)

    @property
    def conditions_hold(self):
        return self.cond_A.holds and self.cond_B.holds and self.cond_C.holds

    def rank_label(self):
        return str(self.predicted_rank) if self.predicted_rank is not None else "undetermined"

    def to_json(self):
        pairs = [
            {"z": z, "alpha": a, "lambda": lam, "element": el} for z, a, lam, el in self.cond_C.pairs
        ]
        cond_c = self.cond_C.to_json()
        cond_c["pairs"] = pairs
        return {
            "spec": self.spec.to_json(),
            "closedClass": list(self.closed_class),
            "condA": self.cond_A.to_json(),
            "condB": self.cond_B.to_json(),
            "condC": cond_c,
            "predictedRank": self.predicted_rank if self.predicted_rank is not None else "undetermined",
            "nu": None if self.nu is None else [float(x) for x in self.nu[list(self.closed_class)]],
            "lambda0Degeneracy": self.lambda0_degeneracy,
            "warnings": list(self.warnings),
        }


def predict_rank(spec, tolerances=None, assemble=False):
    """Run the full criterion pipeline for ``spec``.

    The designated class is the closed class containing the first seeded
    state if seeds exist, otherwise the closed class with the smallest member.
    """
    tol = tolerances or Tolerances()
    warnings = []
    if spec.mu_l < 1 or spec.mu_r < 1:
        warnings.append("mixed boundary targets: a full-rank Zeno NESS is expected")
    if spec.N >= PRECISION_WARN_N:
        warnings.append(f"N={spec.N}: ranks above 2 cannot be determined reliably at this size")
    eff = effective_xxz_model(spec)
    es = hermitian_eig(eff.h_d, tol.degeneracy)
    lam0 = (spec.N - 1) * spec.J * spec.delta
    deg0 = len(es.indices_near(lam0))
    seeds, w = _seed_states(spec)
    warnings += w
    es, seed_idx, w = seeded_eigensystem(es, seeds, lam0)
    warnings += w
    chain = transition_rates(es, eff.effective_lindblads, spec.gamma)
    eps = chain.default_floor(tol.eps)
    dec = classify_states(chain, eps)
    classes = dec.closed_classes
    designated = classes[0]
    if seed_idx:
        owner = [c for c in classes if seed_idx[0] in c]
        if owner:
            designated = owner[0]
        else:
            # the seeded state is transient: test A on its strongly connected set
            designated = _scc_of(chain, seed_idx[0], eps)
    cond_a = check_condition_A(chain, designated, eps)
    cond_b = check_condition_B(chain, dec, designated, tol.k)
    cond_c = check_condition_C(es, eff.effective_lindblads, designated, tol.degeneracy, tol.c)
    if cond_b.margin is not None and cond_b.status == PASS and cond_b.margin < 1e-6:
        warnings.append(f"transient block is close to singular (relative margin {cond_b.margin:.2e})")
    _straddle_warnings(es, designated, warnings)
    nu = None
    if len(classes) == 1 and cond_a.holds:
        nu = stationary_distribution(chain, dec)
        canonical_form(chain, designated, eps)
    rank = len(designated) if (cond_a.holds and cond_b.holds and cond_c.holds) else None
    report = CriterionReport(
        spec=spec,
        closed_class=tuple(designated),
        cond_A=cond_a,
        cond_B=cond_b,
        cond_C=cond_c,
        predicted_rank=rank,
        nu=nu,
        lambda0_degeneracy=deg0,
        closed_classes=classes,
        closed_vectors=es.eigenvectors[:, list(designated)].copy(),
        warnings=warnings,
    )
    if assemble and rank is not None:
        report.assembled_ness = assemble_zeno_ness(spec, report)
    return report


def _scc_of(chain, state, eps):
    _, labels = connected_components(sp.csr_matrix(chain.rates > eps), directed=True, connection="strong")
    return tuple(int(i) for i in np.flatnonzero(labels == labels[state]))


def _straddle_warnings(es, closed, warnings):
    closed = set(closed)
    for c in es.clusters:
        inside = [i for i in c if i in closed]
        if inside and len(inside) < len(c):
            warnings.append(
                f"degeneracy cluster at lambda={es.eigenvalues[c[0]]:.6g} (size {len(c)}) "
                "straddles the closed/transient split"
            )


def interior_zeno_state(report):
    """``Σ_z ν_z |z⟩⟨z|`` on the interior chain."""
    if report.nu is None or not report.conditions_hold:
        raise ConditionsNotMetError("conditions A, B, C do not all hold")
    v = report.closed_vectors
    w = report.nu[list(report.closed_class)]
    return (v * w) @ v.conj().T


def assemble_zeno_ness(spec, report):
    """Full-chain ``ψ_L ⊗ Σ_z ν_z |z⟩⟨z| ⊗ ψ_R``."""
    interior = interior_zeno_state(report)
    rho_l, rho_r = boundary_kernels(spec)
    return tensor(rho_l, interior, rho_r)


@dataclass
class OracleComparison:
    gammas: list
    ranks: list
    spectra: list
    distances: list
    slope: float | None
    rank_threshold_c: float = 10.0

    def to_json(self):
        return {
            "gammas": self.gammas,
            "oracleRanks": self.ranks,
            "interiorSpectra": [[float(x) for x in s] for s in self.spectra],
            "traceDistances": [_num(d) for d in self.distances],
            "scalingExponent": _num(self.slope),
            "rankThreshold": f"{self.rank_threshold_c}/Gamma",
        }


def fit_exponent(gammas, values):
    """Slope of ``log(value)`` against ``log(1/Γ)``; ``None`` if undefined."""
    g = np.asarray(gammas, dtype=float)
    v = np.asarray(values, dtype=float)
    if len(g) < 2 or np.any(v <= 0) or not np.all(np.isfinite(v)):
        return None
    return float(np.polyfit(np.log(1 / g), np.log(v), 1)[0])


def _oracle_point(spec, gamma, reference, c):
    rho = steady_state(full_lindblad_model(spec.with_gamma(gamma)))
    n = spec.N
    interior = partial_trace(rho, list(range(2, n)), n)
    spectrum = np.sort(np.linalg.eigvalsh(interior))[::-1]
    rank = int(np.sum(spectrum > c / gamma))
    dist = trace_distance(rho, reference) if reference is not None else None
    return rank, spectrum, dist


def oracle_compare(spec, report, gammas, rank_c=10.0, workers=1):
    """Brute-force NESS for each Γ: interior rank at threshold ``rank_c/Γ`` and distance to the Zeno NESS."""
    d = 2**spec.N
    if d > MAX_LIOUVILLIAN_DIM:
        raise SizeLimitError(f"oracle needs 2**N <= {MAX_LIOUVILLIAN_DIM}, got N={spec.N}")
    gammas = [float(g) for g in gammas]
    if not gammas or any(g <= 0 for g in gammas):
        raise InputError("gamma list must be non-empty and positive")
    reference = report.assembled_ness
    if reference is None and report.predicted_rank is not None:
        reference = assemble_zeno_ness(spec, report)
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_oracle_point, [spec] * len(gammas), gammas, [reference] * len(gammas), [rank_c] * len(gammas)))
    else:
        results = [_oracle_point(spec, g, reference, rank_c) for g in gammas]
    ranks = [r[0] for r in results]
    spectra = [r[1] for r in results]
    dists = [r[2] for r in results]
    slope = fit_exponent(gammas, dists) if reference is not None else None
    return OracleComparison(gammas, ranks, spectra, dists, slope, rank_c)
