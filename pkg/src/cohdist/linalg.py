"""Dense complex Hermitian linear algebra.

Small dense matrices only (dimensions up to a few dozen).  The fixed
computational basis plays a distinguished role throughout: dephasing
erases off-diagonal entries in that basis, and incoherent states are
exactly the diagonal density matrices.  All entropies use base-2
logarithms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceFailure, DimensionMismatch, InvalidDistribution

PSD_TOL = 1e-9
TRACE_TOL = 1e-9
NORM_TOL = 1e-12


def _as_matrix(a) -> np.ndarray:
    if isinstance(a, (HermitianMatrix, DensityMatrix)):
        return a.mat
    return np.asarray(a, dtype=np.complex128)


class HermitianMatrix:
    """A square complex matrix forced Hermitian on construction.

    The constructor symmetrizes its input as (A + A*) / 2, which makes
    the Hermiticity exact in floating point: entry (i, j) and the
    conjugate of entry (j, i) are computed from the same two summands.

    Parameters
    ----------
    entries : array_like
        Square complex array.  A ``HermitianMatrix`` or
        ``DensityMatrix`` is accepted and copied.
    """

    __slots__ = ("mat",)

    def __init__(self, entries):
        a = np.array(_as_matrix(entries), dtype=np.complex128)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("expected a square matrix, got shape %r" % (a.shape,))
        if a.shape[0] < 1:
            raise ValueError("dimension must be at least 1")
        if not np.all(np.isfinite(a)):
            raise ValueError("matrix entries must be finite")
        m = (a + a.conj().T) / 2.0
        m.setflags(write=False)
        self.mat = m

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def diagonal(self) -> np.ndarray:
        """Real diagonal of the matrix."""
        return np.real(np.diag(self.mat))

    def __repr__(self):
        return "HermitianMatrix(dim=%d)" % self.dim


class DensityMatrix:
    """A Hermitian matrix validated as a quantum state.

    Eigenvalues must sit above ``-1e-9`` and the trace must equal one
    within ``1e-9``; anything else is rejected rather than repaired.
    """

    __slots__ = ("mat",)

    def __init__(self, entries):
        h = HermitianMatrix(entries)
        tr = float(np.real(np.trace(h.mat)))
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError("trace %.3e is not 1 within %g" % (tr, TRACE_TOL))
        lo = float(np.linalg.eigvalsh(h.mat)[0])
        if lo < -PSD_TOL:
            raise ValueError("matrix is not positive semidefinite (min eig %.3e)" % lo)
        self.mat = h.mat

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def diagonal(self) -> np.ndarray:
        return np.real(np.diag(self.mat))

    def __repr__(self):
        return "DensityMatrix(dim=%d)" % self.dim


class StateVector:
    """A normalized complex amplitude vector.

    The squared 2-norm must equal one within ``1e-12``.  Use
    :func:`unit_vector` to normalize raw amplitudes first.
    """

    __slots__ = ("amps",)

    def __init__(self, amplitudes):
        v = np.array(amplitudes, dtype=np.complex128).reshape(-1)
        if v.size < 1:
            raise ValueError("dimension must be at least 1")
        if not np.all(np.isfinite(v)):
            raise ValueError("amplitudes must be finite")
        nrm2 = float(np.real(np.vdot(v, v)))
        if abs(nrm2 - 1.0) > NORM_TOL:
            raise ValueError("squared norm %.17g is not 1 within %g" % (nrm2, NORM_TOL))
        v.setflags(write=False)
        self.amps = v

    @property
    def dim(self) -> int:
        return self.amps.size

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    def projector(self) -> DensityMatrix:
        return DensityMatrix(np.outer(self.amps, self.amps.conj()))

    def __repr__(self):
        return "StateVector(dim=%d)" % self.dim


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues in descending order with matching orthonormal columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.eigenvectors * self.eigenvalues) @ self.eigenvectors.conj().T


def unit_vector(raw) -> StateVector:
    """Normalize raw amplitudes and wrap them as a :class:`StateVector`."""
    v = np.asarray(raw, dtype=np.complex128).reshape(-1)
    nrm = float(np.linalg.norm(v))
    if nrm <= 0.0 or not np.isfinite(nrm):
        raise ValueError("cannot normalize a zero or non-finite vector")
    return StateVector(v / nrm)


def as_density(state) -> DensityMatrix:
    """Coerce a state vector, density matrix, or raw array to a density matrix."""
    if isinstance(state, DensityMatrix):
        return state
    if isinstance(state, StateVector):
        return state.projector()
    a = np.asarray(state, dtype=np.complex128)
    if a.ndim == 1:
        return StateVector(a).projector()
    return DensityMatrix(a)


def basis_state(dim: int, index: int) -> StateVector:
    """Computational basis vector |index> in the given dimension."""
    if not 0 <= index < dim:
        raise ValueError("index %d outside [0, %d)" % (index, dim))
    v = np.zeros(dim, dtype=np.complex128)
    v[index] = 1.0
    return StateVector(v)


def dephase(a) -> HermitianMatrix:
    """Project onto the diagonal in the computational basis.

    Idempotent, trace preserving, and self-adjoint with respect to the
    trace inner product.
    """
    m = _as_matrix(a)
    return HermitianMatrix(np.diag(np.real(np.diag(m)).astype(np.complex128)))


def eig_hermitian(a) -> SpectralDecomposition:
    """Spectral decomposition with eigenvalues sorted descending.

    Raises
    ------
    ConvergenceFailure
        If the underlying eigensolver fails to converge, which signals
        a numerically pathological input.
    """
    m = _as_matrix(a)
    try:
        vals, vecs = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure("eigendecomposition failed: %s" % exc) from exc
    order = np.argsort(vals, kind="stable")[::-1]
    return SpectralDecomposition(vals[order].copy(), vecs[:, order].copy())


def pos_neg_parts(a):
    """Split a Hermitian matrix into its positive and negative parts.

    Returns ``(P, N)`` with ``A = P - N``, both positive semidefinite
    and mutually orthogonal.
    """
    dec = eig_hermitian(a)
    v = dec.eigenvectors
    pos = (v * np.maximum(dec.eigenvalues, 0.0)) @ v.conj().T
    neg = (v * np.maximum(-dec.eigenvalues, 0.0)) @ v.conj().T
    return HermitianMatrix(pos), HermitianMatrix(neg)


def inner(a, b) -> float:
    """Trace inner product Tr(AB) of two Hermitian matrices."""
    ma, mb = _as_matrix(a), _as_matrix(b)
    if ma.shape != mb.shape:
        raise DimensionMismatch("shapes %r and %r differ" % (ma.shape, mb.shape))
    # vdot conjugates the first argument, so this is Tr(A^dag B) = Tr(AB).
    return float(np.real(np.vdot(ma, mb)))


def trace_norm(a) -> float:
    """Sum of absolute eigenvalues."""
    return float(np.sum(np.abs(np.linalg.eigvalsh(_as_matrix(a)))))


def shannon_entropy(p) -> float:
    """Shannon entropy in bits, with the 0 log 0 = 0 convention.

    Raises
    ------
    InvalidDistribution
        If any entry sits below ``-1e-9`` or the sum deviates from one
        by more than ``1e-9``.
    """
    v = np.asarray(p, dtype=np.float64).reshape(-1)
    if v.size and float(v.min()) < -PSD_TOL:
        raise InvalidDistribution("negative entry %.3e" % float(v.min()))
    s = float(v.sum())
    if abs(s - 1.0) > TRACE_TOL:
        raise InvalidDistribution("entries sum to %.17g, not 1" % s)
    w = np.clip(v, 0.0, None)
    w = w[w > 0.0]
    return float(-np.sum(w * np.log2(w)))


def von_neumann_entropy(rho) -> float:
    """Entropy of a density matrix in bits; zero on pure states."""
    vals = np.linalg.eigvalsh(_as_matrix(rho))
    return shannon_entropy(vals)


def max_coherent_state(m: int) -> StateVector:
    """The m-dimensional state with all amplitudes equal to 1/sqrt(m)."""
    if m < 1:
        raise ValueError("m must be at least 1")
    return StateVector(np.full(m, 1.0 / np.sqrt(m), dtype=np.complex128))


def haar_random_pure(d: int, rng: np.random.Generator) -> StateVector:
    """Draw a Haar-distributed pure state on d dimensions.

    Samples d independent standard complex Gaussians and normalizes;
    deterministic for a fixed generator state.
    """
    if d < 1:
        raise ValueError("dimension must be at least 1")
    z = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return unit_vector(z)
