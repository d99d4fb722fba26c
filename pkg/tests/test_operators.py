import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_density, random_hermitian
from zeno_rank.errors import DimensionMismatchError, InputError, InvalidDensityMatrixError, NonHermitianError, SizeLimitError
from zeno_rank.operators import (
    I2, SX, SY, SZ, commutator, embed_at_site, fidelity_with_pure, hermitian_eig, matrix_from_json,
    matrix_to_json, n_qubits, partial_trace, place_on_sites, projector, rank_by_threshold, spin_dot,
    tensor, tensor_product, trace_distance, trace_norm, validate_density_matrix,
)

seeds = st.integers(0, 2**31 - 1)


def test_pauli_algebra():
    assert np.allclose(commutator(SX, SY), 2j * SZ)
    for s in (SX, SY, SZ):
        assert np.allclose(s @ s, I2)


def test_tensor_product_index_convention():
    a = np.arange(4).reshape(2, 2) + 0j
    b = np.array([[1, 2], [3, 4]]) + 0j
    ab = tensor_product(a, b)
    assert ab[1 * 2 + 0, 0 * 2 + 1] == a[1, 0] * b[0, 1]


def test_tensor_product_size_limit():
    big = np.eye(128)
    with pytest.raises(SizeLimitError):
        tensor_product(big, big[:64, :64])


def test_embed_first_site_is_leftmost():
    assert np.allclose(embed_at_site(SZ, 1, 3), tensor(SZ, I2, I2))
    assert np.allclose(embed_at_site(SX, 3, 3), tensor(I2, I2, SX))


def test_spin_dot_linear():
    v = np.array([0.3, -0.2, 0.9])
    assert np.allclose(spin_dot(v, 2, 2), tensor(I2, 0.3 * SX - 0.2 * SY + 0.9 * SZ))


def test_n_qubits_rejects_non_power():
    with pytest.raises(DimensionMismatchError):
        n_qubits(6)


@given(seeds)
def test_partial_trace_of_product(seed):
    rng = np.random.default_rng(seed)
    a, b, c = (random_density(2, rng) for _ in range(3))
    rho = tensor(a, b, c)
    assert np.allclose(partial_trace(rho, [2], 3), b)
    assert np.allclose(partial_trace(rho, [1, 3], 3), tensor(a, c))
    assert np.allclose(partial_trace(rho, [1, 2, 3], 3), rho)


@given(seeds)
def test_partial_trace_preserves_trace_and_hermiticity(seed):
    rng = np.random.default_rng(seed)
    rho = random_density(8, rng)
    red = partial_trace(rho, [1, 3], 3)
    assert abs(np.trace(red) - 1) < 1e-12
    assert np.allclose(red, red.conj().T)


@given(seeds)
def test_partial_trace_adjoint_identity(seed):
    # tr[(A ⊗ I) rho] = tr[A tr_2 rho]
    rng = np.random.default_rng(seed)
    rho = random_density(4, rng)
    a = random_hermitian(2, rng)
    lhs = np.trace(tensor(a, I2) @ rho)
    rhs = np.trace(a @ partial_trace(rho, [1], 2))
    assert abs(lhs - rhs) < 1e-12


@given(seeds)
def test_place_on_sites_matches_reordered_kron(seed):
    rng = np.random.default_rng(seed)
    a = random_hermitian(2, rng)
    bc = random_hermitian(4, rng)
    placed = place_on_sites([(a, [2]), (bc, [1, 3])], 3)
    # build the same operator by swapping sites 1 and 2 of a ⊗ bc
    swap = np.zeros((8, 8))
    for i in range(8):
        bits = [(i >> 2) & 1, (i >> 1) & 1, i & 1]
        j = (bits[1] << 2) | (bits[0] << 1) | bits[2]
        swap[j, i] = 1
    assert np.allclose(placed, swap @ tensor(a, bc) @ swap.T)


def test_place_on_sites_requires_cover():
    with pytest.raises(InputError):
        place_on_sites([(I2, [1])], 2)


@given(seeds)
def test_trace_norm_and_distance(seed):
    rng = np.random.default_rng(seed)
    rho = random_density(4, rng)
    sigma = random_density(4, rng)
    assert abs(trace_norm(rho) - 1) < 1e-12
    d = trace_distance(rho, sigma)
    assert 0 <= d <= 1 + 1e-12
    assert abs(d - trace_distance(sigma, rho)) < 1e-12


def test_validate_density_matrix():
    validate_density_matrix(np.eye(2) / 2)
    with pytest.raises(InvalidDensityMatrixError):
        validate_density_matrix(np.diag([1.2, -0.2]))
    with pytest.raises(InvalidDensityMatrixError):
        validate_density_matrix(np.array([[0.5, 1], [0, 0.5]]))
    with pytest.raises(InvalidDensityMatrixError):
        validate_density_matrix(np.eye(2))


def test_projector_and_fidelity():
    psi = np.array([1, 1j]) / np.sqrt(2)
    p = projector(psi)
    assert abs(fidelity_with_pure(psi, p) - 1) < 1e-14
    assert rank_by_threshold(p, 1e-10) == 1


def test_hermitian_eig_clusters():
    h = np.diag([0.0, 1.0, 1.0 + 1e-12, 3.0])
    es = hermitian_eig(h)
    assert es.clusters == ((0,), (1, 2), (3,))
    assert list(es.indices_near(1.0)) == [1, 2]
    with pytest.raises(NonHermitianError):
        hermitian_eig(np.array([[0, 1], [0, 0]]))


@given(seeds)
def test_hermitian_eig_reconstructs(seed):
    rng = np.random.default_rng(seed)
    h = random_hermitian(6, rng)
    es = hermitian_eig(h)
    v = es.eigenvectors
    assert np.allclose(v @ np.diag(es.eigenvalues) @ v.conj().T, h)
    assert np.allclose(v.conj().T @ v, np.eye(6))


def test_matrix_json_roundtrip(rng):
    m = random_hermitian(4, rng)
    assert np.array_equal(matrix_from_json(matrix_to_json(m)), m)
    with pytest.raises(InputError):
        matrix_from_json({"dim": 2, "entries": [[0, 0]]})
