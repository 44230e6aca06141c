import numpy as np
import pytest

from cohdist.errors import DimensionMismatch, InvalidDistribution
from cohdist.linalg import (
    DensityMatrix,
    HermitianMatrix,
    StateVector,
    as_density,
    basis_state,
    dephase,
    eig_hermitian,
    haar_random_pure,
    inner,
    max_coherent_state,
    pos_neg_parts,
    shannon_entropy,
    trace_norm,
    unit_vector,
    von_neumann_entropy,
)

rng = np.random.default_rng(1234)


def random_hermitian(d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (a + a.conj().T) / 2


def test_state_vector_validation():
    StateVector(np.array([1.0, 0.0]))
    with pytest.raises(Exception):
        StateVector(np.array([1.0, 1.0]))  # not normalized


def test_density_validation_rejects_nonpsd():
    with pytest.raises(Exception):
        DensityMatrix(np.array([[1.5, 0.0], [0.0, -0.5]]))


def test_density_validation_rejects_trace():
    with pytest.raises(Exception):
        DensityMatrix(np.eye(2))


def test_as_density_coercions():
    psi = max_coherent_state(3)
    assert as_density(psi).dim == 3
    assert as_density(psi.projector()) is psi.projector() or isinstance(
        as_density(psi.projector()), DensityMatrix
    )
    raw = np.ones(2) / np.sqrt(2)
    assert as_density(raw).dim == 2


def test_unit_vector_normalizes():
    v = unit_vector([3.0, 4.0])
    assert np.allclose(v.probabilities(), [9 / 25, 16 / 25])


def test_basis_state():
    e1 = basis_state(4, 1)
    assert e1.amps[1] == 1.0
    assert np.sum(np.abs(e1.amps)) == 1.0


@pytest.mark.parametrize("d", [2, 3, 5, 8])
def test_eig_matches_numpy(d):
    """Spectral routine agrees with the reference LAPACK call."""
    a = random_hermitian(d)
    dec = eig_hermitian(a)
    ref = np.linalg.eigvalsh(a)
    assert np.max(np.abs(np.sort(dec.eigenvalues) - ref)) < 1e-10
    assert np.max(np.abs(dec.reconstruct() - a)) < 1e-10


def test_eig_vectors_orthonormal():
    a = random_hermitian(6)
    dec = eig_hermitian(a)
    v = dec.eigenvectors
    assert np.max(np.abs(v.conj().T @ v - np.eye(6))) < 1e-10


def test_pos_neg_parts_split():
    a = random_hermitian(5)
    p, n = (x.mat for x in pos_neg_parts(a))
    assert np.max(np.abs(p - n - a)) < 1e-10
    assert np.linalg.eigvalsh(p)[0] > -1e-12
    assert np.linalg.eigvalsh(n)[0] > -1e-12
    # complementary supports
    assert abs(np.trace(p @ n)) < 1e-10


def test_trace_norm_vs_sum_of_singulars():
    a = random_hermitian(4)
    assert abs(trace_norm(a) - np.abs(np.linalg.eigvalsh(a)).sum()) < 1e-10


def test_dephase_kills_offdiagonal():
    a = random_hermitian(4)
    d = dephase(a).mat
    assert np.max(np.abs(d - np.diag(np.diag(a)))) < 1e-15


def test_shannon_entropy_uniform():
    assert abs(shannon_entropy(np.ones(8) / 8) - 3.0) < 1e-12


def test_shannon_entropy_rejects_bad_input():
    with pytest.raises(InvalidDistribution):
        shannon_entropy(np.array([0.5, 0.6]))


def test_von_neumann_entropy_pure_is_zero():
    psi = max_coherent_state(4)
    assert von_neumann_entropy(psi.projector()) < 1e-10


def test_von_neumann_entropy_mixed():
    rho = DensityMatrix(np.diag([0.5, 0.25, 0.25]))
    assert abs(von_neumann_entropy(rho) - 1.5) < 1e-12


def test_inner_is_real_for_hermitian():
    a = random_hermitian(3)
    rho = DensityMatrix(np.eye(3) / 3)
    v = inner(a, rho.mat)
    assert abs(v - np.real(np.trace(a @ rho.mat))) < 1e-12


def test_max_coherent_state_entropy():
    psi = max_coherent_state(8)
    assert abs(shannon_entropy(psi.probabilities()) - 3.0) < 1e-12


def test_haar_random_pure_normalized():
    g = np.random.default_rng(0)
    for _ in range(10):
        psi = haar_random_pure(5, g)
        assert abs(np.vdot(psi.amps, psi.amps).real - 1.0) < 1e-12


def test_dimension_mismatch_raises():
    with pytest.raises((DimensionMismatch, ValueError, Exception)):
        inner(np.eye(2), np.eye(3))
