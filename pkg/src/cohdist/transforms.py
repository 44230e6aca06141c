"""Channels that certify the distillation programs constructively.

A witness G of the fidelity program turns into an explicit channel
whose output hits the target overlap exactly; the channel commutes
with dephasing, which is checked on a spanning set of matrix units.
For pure states a majorization argument produces the same fidelity
with nothing but a coefficient rearrangement.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvalidDistribution, InvalidWitness
from .linalg import (
    DensityMatrix,
    HermitianMatrix,
    StateVector,
    _as_matrix,
    as_density,
    max_coherent_state,
)
from .purestate import m_distillation_norm

CHOI_TOL = 1e-8


@dataclass
class ChoiChannel:
    """Completely positive trace-preserving map in Choi form.

    The Choi operator lives on the (in x out)-dimensional space with
    the input factor first; :func:`apply_choi` fixes the pairing
    convention (input indices contract against the transposed state).
    """

    in_dim: int
    out_dim: int
    choi: HermitianMatrix

    def __post_init__(self):
        d = self.in_dim * self.out_dim
        if self.choi.dim != d:
            raise DimensionMismatch(
                "Choi dim %d != in*out = %d" % (self.choi.dim, d)
            )
        eigs = np.linalg.eigvalsh(self.choi.mat)
        if eigs[0] < -CHOI_TOL:
            raise InvalidWitness("Choi operator has eigenvalue %.3e" % eigs[0])
        # partial trace over the output factor must give the identity
        j4 = self.tensor()
        tr_out = np.einsum("ikjk->ij", j4)
        if np.max(np.abs(tr_out - np.eye(self.in_dim))) > CHOI_TOL:
            raise InvalidWitness("channel is not trace preserving")

    def tensor(self) -> np.ndarray:
        """Choi entries as a 4-index array [in, out, in, out]."""
        return self.choi.mat.reshape(
            self.in_dim, self.out_dim, self.in_dim, self.out_dim
        )


def _apply_raw(j4: np.ndarray, mat: np.ndarray) -> np.ndarray:
    return np.einsum("ikjl,ij->kl", j4, mat)


def apply_choi(ch: ChoiChannel, state) -> DensityMatrix:
    """Run a state through the channel."""
    rho = as_density(state)
    if rho.dim != ch.in_dim:
        raise DimensionMismatch(
            "state dim %d != channel input dim %d" % (rho.dim, ch.in_dim)
        )
    return DensityMatrix(_apply_raw(ch.tensor(), rho.mat))


def optimal_distillation_channel(G, m: int) -> ChoiChannel:
    """Channel achieving <G, rho> overlap with the m-level uniform target.

    G must sit in [0, 1] with every diagonal entry 1/m.  For m >= 2
    the construction splits the Choi operator into a traceless part
    steered by G and a depolarizing remainder; m = 1 is the map that
    discards its input.
    """
    g = _as_matrix(G)
    d = g.shape[0]
    order = int(m)
    if order != m or order < 1:
        raise ValueError("m must be a positive integer, got %r" % (m,))

    if order == 1:
        return ChoiChannel(d, 1, HermitianMatrix(np.eye(d)))

    eigs = np.linalg.eigvalsh(g)
    if eigs[0] < -CHOI_TOL or eigs[-1] > 1.0 + CHOI_TOL:
        raise InvalidWitness(
            "witness eigenvalues [%.3e, %.3e] leave [0, 1]" % (eigs[0], eigs[-1])
        )
    diag_dev = float(np.max(np.abs(np.real(np.diag(g)) - 1.0 / order)))
    if diag_dev > CHOI_TOL or np.max(np.abs(np.imag(np.diag(g)))) > CHOI_TOL:
        raise InvalidWitness(
            "witness diagonal deviates from 1/m by %.3e" % diag_dev
        )

    q = (order / (order - 1.0)) * (g - np.eye(d) / order)
    psi = max_coherent_state(order).projector().mat
    steer = psi - np.eye(order) / order
    j4 = np.einsum("ij,kl->ikjl", q.T, steer) + np.einsum(
        "ij,kl->ikjl", np.eye(d), np.eye(order) / order
    )
    return ChoiChannel(d, order, HermitianMatrix(j4.reshape(d * order, d * order)))


def certify_dio(ch: ChoiChannel):
    """Check commutation with dephasing on the matrix-unit basis.

    Returns (ok, max_violation).  Covariance is linear, so diagonal
    outputs on |i><i| plus dephased-to-zero outputs on |i><j| settle
    membership completely.
    """
    j4 = ch.tensor()
    d = ch.in_dim
    viol = 0.0
    for i in range(d):
        for j in range(d):
            unit = np.zeros((d, d), dtype=np.complex128)
            unit[i, j] = 1.0
            out = _apply_raw(j4, unit)
            if i == j:
                off = out - np.diag(np.diag(out))
                viol = max(viol, float(np.max(np.abs(off))))
            else:
                viol = max(viol, float(np.max(np.abs(np.diag(out)))))
    return viol <= CHOI_TOL, viol


@dataclass
class MajorizationPlan:
    source: StateVector
    target_eta: StateVector
    kept: int
    flattened_mass: float
    fidelity_achieved: float


def majorizes(p, q) -> bool:
    """Whether distribution p majorizes q (sorted partial sums dominate)."""
    pv = np.asarray(p, dtype=np.float64).ravel()
    qv = np.asarray(q, dtype=np.float64).ravel()
    for name, v in (("p", pv), ("q", qv)):
        if v.size == 0 or np.any(v < -1e-12) or abs(float(v.sum()) - 1.0) > 1e-9:
            raise InvalidDistribution("%s is not a probability vector" % name)
    n = max(pv.size, qv.size)
    pv = np.sort(np.concatenate([pv, np.zeros(n - pv.size)]))[::-1]
    qv = np.sort(np.concatenate([qv, np.zeros(n - qv.size)]))[::-1]
    return bool(np.all(np.cumsum(pv) >= np.cumsum(qv) - 1e-10))


def sio_pure_protocol(psi, m) -> MajorizationPlan:
    """Rearrangement protocol hitting the optimal pure-state fidelity.

    Keeps the largest amplitudes, flattens the rest into equal
    entries, and zero-pads up to the requested target size.  The
    squared target coefficients majorize the squared source
    coefficients, which is what makes the transformation free under
    the strictest operation classes.
    """
    source = psi if isinstance(psi, StateVector) else StateVector(psi)
    order = int(m)
    if order != m or order < 1:
        raise ValueError("m must be a positive integer, got %r" % (m,))
    d = source.dim
    m_eff = min(order, d)

    res = m_distillation_norm(source, order)
    kept = m_eff - res.k_star
    mags = np.abs(source.amps)[res.sort_permutation]

    eta = np.zeros(order)
    eta[:kept] = mags[:kept]
    eta[kept:m_eff] = res.tail_l2 / np.sqrt(res.k_star)
    target = StateVector(eta / np.linalg.norm(eta))

    if not majorizes(target.probabilities(), source.probabilities()):
        raise InvalidWitness("constructed target fails to majorize the source")

    fid = float(np.sum(np.abs(target.amps))) ** 2 / order
    return MajorizationPlan(
        source=source,
        target_eta=target,
        kept=kept,
        flattened_mass=res.tail_l2**2,
        fidelity_achieved=fid,
    )


# ---- stock channel constructions -----------------------------------

def identity_channel(d: int) -> ChoiChannel:
    return unitary_conjugation_channel(np.eye(d))


def dephasing_channel(d: int) -> ChoiChannel:
    j4 = np.zeros((d, d, d, d))
    for i in range(d):
        j4[i, i, i, i] = 1.0
    return ChoiChannel(d, d, HermitianMatrix(j4.reshape(d * d, d * d)))


def unitary_conjugation_channel(u) -> ChoiChannel:
    um = np.asarray(u, dtype=np.complex128)
    d = um.shape[0]
    if um.shape != (d, d) or np.max(np.abs(um.conj().T @ um - np.eye(d))) > 1e-10:
        raise ValueError("expected a unitary matrix")
    j4 = np.einsum("ki,lj->ikjl", um, um.conj())
    return ChoiChannel(d, d, HermitianMatrix(j4.reshape(d * d, d * d)))


def permutation_channel(perm) -> ChoiChannel:
    p = np.asarray(perm, dtype=np.int64)
    d = p.size
    if sorted(p.tolist()) != list(range(d)):
        raise ValueError("not a permutation of 0..%d" % (d - 1))
    u = np.zeros((d, d))
    u[p, np.arange(d)] = 1.0
    return unitary_conjugation_channel(u)


def diagonal_unitary_channel(phases) -> ChoiChannel:
    ph = np.asarray(phases, dtype=np.float64)
    return unitary_conjugation_channel(np.diag(np.exp(1j * ph)))


def mix_channels(channels, weights) -> ChoiChannel:
    w = np.asarray(weights, dtype=np.float64)
    if len(channels) != w.size or np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
        raise ValueError("weights must be a distribution over the channels")
    d_in = channels[0].in_dim
    d_out = channels[0].out_dim
    acc = np.zeros((d_in * d_out, d_in * d_out), dtype=np.complex128)
    for ch, wi in zip(channels, w):
        if (ch.in_dim, ch.out_dim) != (d_in, d_out):
            raise DimensionMismatch("cannot mix channels of different shapes")
        acc += wi * ch.choi.mat
    return ChoiChannel(d_in, d_out, HermitianMatrix(acc))


def random_distillation_channel(d: int, m: int, rng: np.random.Generator) -> ChoiChannel:
    """Random valid witness pushed through the optimal construction."""
    if m < 2:
        raise ValueError("m must be at least 2")
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    r = (a + a.conj().T) / 2.0
    np.fill_diagonal(r, 0.0)
    nrm = float(np.linalg.norm(r, 2))
    if nrm > 0:
        scale = 0.9 * min(1.0 / m, 1.0 - 1.0 / m) / nrm
        r = r * scale
    g = np.eye(d) / m + r
    return optimal_distillation_channel(g, m)


def dio_channel_family(d: int, rng: np.random.Generator, count: int):
    """Assorted dephasing-covariant channels for property testing."""
    out = []
    while len(out) < count:
        kind = int(rng.integers(0, 5))
        if kind == 0:
            out.append(dephasing_channel(d))
        elif kind == 1:
            out.append(permutation_channel(rng.permutation(d)))
        elif kind == 2:
            out.append(diagonal_unitary_channel(rng.uniform(0, 2 * np.pi, size=d)))
        elif kind == 3:
            m = int(rng.integers(2, max(3, d + 1)))
            out.append(random_distillation_channel(d, m, rng))
        else:
            a = permutation_channel(rng.permutation(d))
            b = dephasing_channel(d)
            out.append(mix_channels([a, b], [0.5, 0.5]))
    return out
