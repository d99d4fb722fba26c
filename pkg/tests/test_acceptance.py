"""Acceptance gate: each criterion at its stated tolerance.

A summary line per criterion is printed at the end of the pytest run.
"""

import csv
import math
import time
from fractions import Fraction
from functools import lru_cache

import numpy as np
import pytest

from conftest import random_density, random_hermitian
from zeno_rank.cli import main as cli_main
from zeno_rank.criterion import fit_exponent, oracle_compare, predict_rank
from zeno_rank.lindblad import LindbladModel, WeightedLindbladOp, evolve, repeated_interactions, steady_state
from zeno_rank.markov import MarkovChainModel, classify_states, transition_rates
from zeno_rank.operators import hermitian_eig, partial_trace, tensor, trace_norm
from zeno_rank.xxz import (
    ChainSpec, boundary_kernels, effective_jump_operators, effective_xxz_model, full_lindblad_model,
    helix_interior_state, kappa, overlap_eta, rank2_parameter_predicate, rank2_weights,
    repeated_interaction_hamiltonian, spin_helix_state,
)

# Ranks for parallel/antiparallel helix boundaries, theta = pi/2:
# (N, m) -> (NESS rank, deg lambda0, A, B, C) with phi = pi m / (N - 1).
# "C-fail" rows carry their empirical rank; B-fail rows are full rank or empirical.
REFERENCE = {}


def _rows(N, ms, rank, deg, a, b, c):
    for m in ms:
        REFERENCE[(N, m)] = (rank, deg, a, b, c)


P, F, NA = "pass", "fail", "n/a"
_rows(3, [1], 2, 2, P, NA, NA)
_rows(4, [1, 2], 2, 2, P, P, NA)
_rows(5, [2], 8, 4, P, F, P)
_rows(5, [1, 3], 2, 2, P, P, NA)
_rows(6, [1, 2, 3, 4], 2, 2, P, P, NA)
_rows(7, [3], 32, 8, P, F, P)
_rows(7, [2, 4], 22, 4, P, P, F)
_rows(7, [1, 5], 2, 2, P, P, NA)
_rows(8, range(1, 7), 2, 2, P, P, NA)
_rows(9, [4], 128, 16, P, F, P)
_rows(9, [2, 6], 72, 4, P, F, P)
_rows(9, [1, 3, 5, 7], 2, 2, P, P, NA)
_rows(10, [3, 6], 170, 8, P, P, F)
_rows(10, [1, 2, 4, 5, 7, 8], 2, 2, P, P, NA)
_rows(11, [5], 512, 32, P, F, P)
_rows(11, [2, 4], 254, 4, P, P, F)
_rows(11, [1, 3, 7, 9], 2, 2, P, P, NA)
_rows(12, range(1, 11), 2, 2, P, P, NA)


@lru_cache(maxsize=None)
def report_for(N, m):
    return predict_rank(ChainSpec.helix(N, math.pi * m / (N - 1)))


def rank2_rows():
    return [(N, m) for N in range(3, 13) for m in range(1, N - 1)
            if rank2_parameter_predicate(N, math.pi * m / (N - 1))[0]]


# ---------------------------------------------------------------- 1
@pytest.mark.acceptance(1, "table reproduction for 3 <= N <= 12")
def test_table_reproduction(tmp_path):
    out = tmp_path / "table.csv"
    start = time.perf_counter()
    assert cli_main(["table", "--n-min", "3", "--n-max", "12", "--out", str(out)]) == 0
    elapsed = time.perf_counter() - start
    with open(out) as fh:
        rows = {(int(r["N"]), r["phi_over_pi"]): r for r in csv.DictReader(fh)}
    mismatches = []
    for (N, m), (rank, deg, a, b, c) in REFERENCE.items():
        r = rows[(N, str(Fraction(m, N - 1)))]
        want_rank = "2" if rank == 2 else "undetermined"
        got = (r["predicted_rank"], int(r["deg_lambda0"]), r["condA"], r["condB"], r["condC"])
        if got != (want_rank, deg, a, b, c):
            mismatches.append(((N, m), got, (want_rank, deg, a, b, c)))
        assert int(r["full_rank"]) == 2 ** (N - 2)
    assert not mismatches, mismatches
    assert elapsed <= 600


# ---------------------------------------------------------------- 2
ORACLE_ROWS = [(N, m) for (N, m) in sorted(REFERENCE) if N <= 6]


@pytest.mark.acceptance(2, "oracle numeric rank equals the table rank for N <= 6")
@pytest.mark.parametrize("N,m", ORACLE_ROWS)
def test_oracle_rank(N, m):
    spec = ChainSpec.helix(N, math.pi * m / (N - 1))
    start = time.perf_counter()
    cmp = oracle_compare(spec, report_for(N, m), [200.0])
    assert cmp.ranks[0] == REFERENCE[(N, m)][0]
    assert time.perf_counter() - start <= 300


# ---------------------------------------------------------------- 3
@pytest.mark.acceptance(3, "rank-2 NESS formula at N=4, phi=pi/3")
def test_rank2_formula_scaling():
    spec = ChainSpec.helix(4, math.pi / 3)
    assert spec.phi_r == pytest.approx(math.pi)  # antiparallel
    report = predict_rank(spec, assemble=True)
    gammas = [100.0, 200.0, 400.0]
    cmp = oracle_compare(spec, report, gammas)
    slope = cmp.slope
    assert 0.7 <= slope <= 1.3, slope
    c = max(d * g for d, g in zip(cmp.distances, gammas))
    assert all(d <= c / g for d, g in zip(cmp.distances, gammas))
    w0, w1 = 25 / 34, 9 / 34
    for g, spectrum in zip(gammas, cmp.spectra):
        assert abs(spectrum[0] - w0) <= 5 / g and abs(spectrum[1] - w1) <= 5 / g


# ---------------------------------------------------------------- 4
def _rank1_spec(N):
    # (N-1) phi < pi: no pair of helix spins is collinear
    return ChainSpec.helix(N, math.pi / N, 1.0)


@pytest.mark.acceptance(4, "pure-state Zeno limit for N in {4, 5, 6}")
@pytest.mark.parametrize("N", [4, 5, 6])
def test_rank1_absorbing_state(N):
    spec = _rank1_spec(N)
    report = predict_rank(spec)
    assert report.predicted_rank == 1
    eff = effective_xxz_model(spec)
    es = hermitian_eig(eff.h_d)
    # rates in an eigenbasis whose lambda0 vector is the helix state
    lam0 = (N - 1) * spec.delta
    plus = helix_interior_state(N, spec.theta_l, math.pi / N, +1)
    idx = es.indices_near(lam0)
    assert len(idx) == 1
    vecs = es.eigenvectors.copy()
    vecs[:, idx[0]] = plus
    chain = transition_rates(type(es)(es.eigenvalues, vecs), eff.effective_lindblads, spec.gamma)
    w = chain.rates
    assert np.max(w[idx[0]]) <= 1e-10 * np.max(w)


_GAMMAS = [50.0, 100.0, 200.0]


@lru_cache(maxsize=None)
def _rank1_oracle(N):
    spec = _rank1_spec(N)
    xi = spin_helix_state(N, spec.theta_l, math.pi / N)
    infid, dist = [], []
    for g in _GAMMAS:
        rho = steady_state(full_lindblad_model(spec.with_gamma(g)))
        infid.append(1 - np.vdot(xi, rho @ xi).real)
        dist.append(0.5 * trace_norm(rho - np.outer(xi, xi.conj())))
    return np.array(infid), np.array(dist)


@pytest.mark.acceptance(4, "pure-state Zeno limit for N in {4, 5, 6}")
@pytest.mark.parametrize("N", [4, 5, 6])
def test_rank1_infidelity_bounded_by_c_over_gamma(N):
    infid, dist = _rank1_oracle(N)
    c = infid[0] * _GAMMAS[0]
    assert np.all(infid <= c / np.array(_GAMMAS) * (1 + 1e-9))
    assert 0.7 <= fit_exponent(_GAMMAS, dist) <= 1.3


@pytest.mark.acceptance(4, "pure-state Zeno limit for N in {4, 5, 6}")
@pytest.mark.xfail(strict=True, reason=(
    "infidelity decays as 1/Gamma^2 (fitted exponent ~2.0): the O(1/Gamma) correction to the "
    "state is a coherence, so populations off the helix enter at second order; the trace "
    "distance has exponent ~1"))
@pytest.mark.parametrize("N", [4, 5, 6])
def test_rank1_infidelity_exponent(N):
    infid, _ = _rank1_oracle(N)
    slope = fit_exponent(_GAMMAS, infid)
    assert 0.7 <= slope <= 1.3, slope


# ---------------------------------------------------------------- 5
@pytest.mark.acceptance(5, "helix overlap identity and special magnitudes")
def test_overlap_identity():
    worst = 0.0
    for N in range(3, 13):
        for theta in (math.pi / 6, math.pi / 4, math.pi / 2):
            for m in range(1, N - 1):
                phi = math.pi * m / (N - 1)
                plus = helix_interior_state(N, theta, phi, +1)
                minus = helix_interior_state(N, theta, phi, -1)
                worst = max(worst, abs(overlap_eta(theta, phi, N) - np.vdot(minus, plus)))
    assert worst <= 1e-12, worst


@pytest.mark.acceptance(5, "helix overlap identity and special magnitudes")
def test_overlap_even_n_magnitude():
    checked = set()
    for N in range(4, 13, 2):
        for m in range(1, N - 1):
            phi = math.pi * m / (N - 1)
            if not rank2_parameter_predicate(N, phi)[0]:
                continue
            checked.add("parallel" if m % 2 == 0 else "antiparallel")
            assert abs(abs(overlap_eta(math.pi / 2, phi, N)) - 2.0 ** (2 - N)) <= 1e-12
    assert checked == {"parallel", "antiparallel"}


# ---------------------------------------------------------------- 6
@pytest.mark.acceptance(6, "Markov balance nu0/nu1 on every rank-2 row")
def test_markov_balance():
    for N, m in rank2_rows():
        r = report_for(N, m)
        assert r.predicted_rank == 2, (N, m)
        i0, i1 = r.closed_class
        ratio = r.nu[i0] / r.nu[i1]
        mod = abs(overlap_eta(math.pi / 2, math.pi * m / (N - 1), N))
        expect = (1 + mod) ** 2 / (1 - mod) ** 2
        assert abs(ratio - expect) <= 1e-8, (N, m, ratio, expect)
        w0, w1 = rank2_weights(mod)
        assert abs(ratio - w0 / w1) <= 1e-8


# ---------------------------------------------------------------- 7
@pytest.mark.acceptance(7, "lambda0 degeneracy and g1 eigen-relations")
def test_lambda0_degeneracy():
    for (N, m), ref in REFERENCE.items():
        assert report_for(N, m).lambda0_degeneracy == ref[1], (N, m)


@pytest.mark.acceptance(7, "lambda0 degeneracy and g1 eigen-relations")
def test_g1_kappa_relations():
    for N in range(3, 13):
        for theta in (math.pi / 6, math.pi / 4, math.pi / 2, 2.0):
            for m in range(1, N - 1):
                phi = math.pi * m / (N - 1)
                spec = ChainSpec.helix(N, phi, theta)
                g = effective_jump_operators(spec)
                plus = helix_interior_state(N, theta, phi, +1)
                k = kappa(spec.J, theta, phi)
                assert np.linalg.norm(g["g1R"] @ plus - k * plus) <= 1e-10
                assert np.linalg.norm(g["g1L"] @ plus + k * plus) <= 1e-10


# ---------------------------------------------------------------- 8
def _random_model(rng, d=8):
    ops = tuple(WeightedLindbladOp(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)), 0.5) for _ in range(2))
    return LindbladModel(random_hermitian(d, rng), ops, 1.0)


@pytest.mark.acceptance(8, "structural property suite")
def test_property_evolution_trace_and_positivity():
    rng = np.random.default_rng(7)
    for _ in range(5):
        model = _random_model(rng)
        t = 2.0
        rho = evolve(model, random_density(8, rng), t, 0.002)
        assert abs(np.trace(rho) - 1) <= 1e-9 * t
        assert np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0] >= -1e-8


@pytest.mark.acceptance(8, "structural property suite")
def test_property_generator_columns_and_permutation():
    rng = np.random.default_rng(8)
    for _ in range(20):
        w = rng.uniform(size=(9, 9)) * (rng.uniform(size=(9, 9)) < 0.3)
        model = MarkovChainModel(w)
        assert np.max(np.abs(model.generator.sum(axis=0))) <= 1e-12
        perm = rng.permutation(9)
        dec = classify_states(model)
        dec_p = classify_states(MarkovChainModel(model.rates[np.ix_(perm, perm)]))
        mapped = sorted(tuple(sorted(int(perm[i]) for i in c)) for c in dec_p.closed_classes)
        assert mapped == sorted(dec.closed_classes)


@pytest.mark.acceptance(8, "structural property suite")
def test_property_tensor_partial_trace():
    rng = np.random.default_rng(9)
    for _ in range(10):
        a, b, c = (random_density(2, rng) for _ in range(3))
        abc = tensor(a, b, c)
        assert np.allclose(partial_trace(abc, [1], 3), a, atol=1e-14)
        assert np.allclose(partial_trace(abc, [2, 3], 3), tensor(b, c), atol=1e-14)
        x, y = random_hermitian(2, rng), random_hermitian(2, rng)
        assert np.allclose(tensor(a, x) @ tensor(b, y), tensor(a @ b, x @ y))


@pytest.mark.acceptance(8, "structural property suite")
def test_property_repeated_interaction_halving():
    spec = ChainSpec(N=3, J=1.0, delta=0.5, theta_l=0.8, phi_l=0.3, mu_l=0.7,
                     theta_r=2.2, phi_r=-0.9, mu_r=1.0, gamma=1.0)
    rho0 = np.eye(8) / 8
    rho_l, rho_r = boundary_kernels(spec)
    t_final = 1.0
    ref = evolve(full_lindblad_model(spec), rho0, t_final, 1e-3)
    errs = []
    for tau in (0.02, 0.01, 0.005):
        h_total = repeated_interaction_hamiltonian(spec, math.sqrt(spec.gamma / tau))
        rho = repeated_interactions(rho0, rho_l, rho_r, h_total, tau, int(round(t_final / tau)))
        errs.append(trace_norm(rho - ref))
    ratios = [errs[1] / errs[0], errs[2] / errs[1]]
    assert all(0.4 <= r <= 0.7 for r in ratios), ratios
