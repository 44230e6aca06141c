"""Closed-form machinery for pure states.

The central object is the m-distillation norm of an amplitude vector:
sort the magnitudes in decreasing order, split off a tail of length k
chosen to minimize the mean tail energy T(k)/k, and report

    head_l1 + sqrt(k) * sqrt(T(k))

with the smallest minimizing k.  Everything else here (monotone
values, distillation fidelities, achievable rates for pure inputs)
reduces to evaluations of this norm.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceFailure, InvalidDistribution
from .linalg import StateVector


@dataclass(frozen=True)
class MNormResult:
    value: float
    k_star: int
    head_l1: float
    tail_l2: float
    sort_permutation: np.ndarray


def _amplitudes(state) -> np.ndarray:
    if isinstance(state, StateVector):
        return state.amps
    return StateVector(state).amps


def _check_order(m) -> int:
    order = int(m)
    if order != m or order < 1:
        raise ValueError("norm order must be a positive integer, got %r" % (m,))
    return order


def m_distillation_norm(state, m) -> MNormResult:
    """Evaluate the norm at integer order m >= 1.

    Orders beyond the vector length give the plain l1 norm; the
    reported split still refers to the clamped order.  Ties in the
    mean tail energy resolve to the smallest k, which the dual
    certificate in :func:`m_norm_dual_check` relies on.
    """
    amps = _amplitudes(state)
    order = _check_order(m)
    d = amps.shape[0]
    m_eff = min(order, d)

    mags = np.abs(amps)
    perm = np.argsort(-mags, kind="stable")
    mags = mags[perm]
    sq = mags * mags

    # T(k) = energy of the last k entries of the length-m_eff head
    # window plus everything past it; suffix sums accumulate upward
    # from the small end so tiny tails are not lost to cancellation.
    suffix = np.concatenate((np.cumsum(sq[::-1])[::-1], [0.0]))
    ks = np.arange(1, m_eff + 1)
    tails = suffix[m_eff - ks]
    k_star = int(ks[np.argmin(tails / ks)])

    tail_energy = float(tails[k_star - 1])
    head_l1 = float(np.sum(mags[: m_eff - k_star]))
    tail_l2 = float(np.sqrt(tail_energy))
    value = head_l1 + float(np.sqrt(k_star)) * tail_l2
    return MNormResult(
        value=value,
        k_star=k_star,
        head_l1=head_l1,
        tail_l2=tail_l2,
        sort_permutation=perm,
    )


def m_norm_dual_check(state, m) -> dict:
    """Exhibit a dual-feasible point achieving the norm value.

    The dual unit ball is {x : max|x_i| <= 1 and sum|x_i|^2 <= m}.  The
    point pairs ones against the head and a rescaled copy of the state
    against the tail; its overlap with the amplitudes reproduces the
    norm, certifying optimality from below and above simultaneously.
    """
    amps = _amplitudes(state)
    order = _check_order(m)
    res = m_distillation_norm(amps, order)
    d = amps.shape[0]
    m_eff = min(order, d)
    split = m_eff - res.k_star

    x = np.zeros(d, dtype=np.complex128)
    mags = np.abs(amps)
    phases = np.where(mags > 0, amps / np.where(mags > 0, mags, 1.0), 1.0)
    perm = res.sort_permutation
    x[perm[:split]] = phases[perm[:split]]
    if res.tail_l2 > 0:
        scale = np.sqrt(res.k_star) / res.tail_l2
        idx = perm[split:]
        x[idx] = phases[idx] * (scale * mags[idx])
    overlap = float(np.real(np.vdot(x, amps)))
    return {
        "point": x,
        "overlap": overlap,
        "max_abs": float(np.max(np.abs(x))) if d else 0.0,
        "sq_norm": float(np.real(np.vdot(x, x))),
        "value": res.value,
    }


def theta_pure(state, m) -> float:
    """Monotone value of a pure state: norm at order m+1, squared, minus 1.

    Integer weights use the closed form; fractional weights fall back
    to the operator programs on the projector.
    """
    if m < 0:
        raise ValueError("m must be nonnegative")
    if float(m) == int(m):
        res = m_distillation_norm(state, int(m) + 1)
        return res.value * res.value - 1.0
    from .monotones import theta

    return theta(StateVector(_amplitudes(state)), float(m)).value


def fidelity_pure(state, m) -> float:
    """Best distillation fidelity toward the m-level uniform state.

    The same value is achieved by every free-operation class down to
    incoherent operations, so no class argument is needed here.
    """
    order = _check_order(m)
    res = m_distillation_norm(state, order)
    return res.value * res.value / order


def zero_error_distillable_pure(state) -> float:
    """Exact-distillation yield in bits: log2 floor(1 / max probability)."""
    amps = _amplitudes(state)
    maxp = float(np.max(np.abs(amps) ** 2))
    return float(np.log2(np.floor(1.0 / maxp + 1e-9)))


# ---- array-level rate machinery ------------------------------------

_THRESH_SLACK = 1e-12
_EXHAUSTIVE_LIMIT = 4096


def _checked_probs(probs) -> np.ndarray:
    p = np.asarray(probs, dtype=np.float64).ravel()
    if p.size == 0:
        raise InvalidDistribution("empty distribution")
    if not np.all(np.isfinite(p)) or np.any(p < -1e-12):
        raise InvalidDistribution("probabilities must be finite and nonnegative")
    s = float(p.sum())
    if abs(s - 1.0) > 1e-9:
        raise InvalidDistribution("probabilities sum to %.12g, not 1" % s)
    return np.maximum(p, 0.0)


def _fidelity_sorted(sorted_probs, prefix_amp, suffix_p, m: int) -> float:
    """F(m) for a descending probability vector with cached partial sums."""
    d = sorted_probs.shape[0]
    if m > d:
        l1 = prefix_amp[-1]
        return float(l1 * l1 / m)
    ks = np.arange(1, m + 1)
    tails = suffix_p[m - ks]
    k_star = int(ks[np.argmin(tails / ks)])
    head = prefix_amp[m - k_star]
    value = head + np.sqrt(k_star * tails[k_star - 1])
    return float(value * value / m)


def rate_from_probs(probs, eps: float) -> int:
    """Largest target size reachable at infidelity eps, from probabilities.

    Works on the squared amplitudes alone, so tensor-power inputs can
    be fed as flat product arrays without building any operators.  The
    fidelity is non-increasing in the target size, which a bisection
    exploits above _EXHAUSTIVE_LIMIT candidates; the returned size is
    re-verified against both neighbors.
    """
    if not 0.0 <= eps < 1.0:
        raise ValueError("eps must lie in [0, 1)")
    p = _checked_probs(probs)
    if eps == 0.0:
        return int(np.floor(1.0 / float(p.max()) + 1e-9))

    p = np.sort(p)[::-1]
    amp = np.sqrt(p)
    prefix_amp = np.concatenate(([0.0], np.cumsum(amp)))
    # tail energies accumulate upward from the small end: no cancellation
    suffix_p = np.concatenate((np.cumsum(p[::-1])[::-1], [0.0]))

    target = (1.0 - eps) - _THRESH_SLACK
    l1 = float(prefix_amp[-1])
    m_hi = max(1, int(np.floor(l1 * l1 / (1.0 - eps) + 1e-9)))

    def ok(m: int) -> bool:
        return _fidelity_sorted(p, prefix_amp, suffix_p, m) >= target

    if m_hi <= _EXHAUSTIVE_LIMIT:
        best = 1
        for m in range(1, m_hi + 1):
            if ok(m):
                best = m
        return best

    lo, hi = 1, m_hi  # ok(1) always: F(1) = 1
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if ok(mid):
            lo = mid
        else:
            hi = mid - 1
    if not ok(lo) or (lo < m_hi and ok(lo + 1)):
        # the fidelity is non-increasing in exact arithmetic, so a
        # bracket violation means the evaluation itself broke down
        raise ConvergenceFailure(
            "fidelity not monotone near m=%d; cannot certify the rate" % lo
        )
    return lo
