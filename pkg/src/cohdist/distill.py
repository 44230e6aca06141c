"""One-shot distillation programs for general states.

Two semidefinite routes anchor everything: the fidelity program

    max <G, rho>   s.t.  0 <= G <= 1,  diag(G) = (1/m) 1

and the rate program

    min k          s.t.  0 <= G <= 1,  diag(G) = k 1,  <G, rho> >= 1 - eps

whose optimum turns into a distillable-bit count through m = floor(1/k).
The rate answer is always re-derived by scanning the fidelity program
over candidate target sizes, and pure inputs get a third, closed-form
route through the amplitude norm machinery.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    ResourceLimit,
    SolverFailure,
    UnsupportedCombination,
)
from .linalg import (
    DensityMatrix,
    HermitianMatrix,
    StateVector,
    as_density,
    eig_hermitian,
)
from .monotones import _require_optimal, theta_hat
from .purestate import fidelity_pure, rate_from_probs
from .sdp import ProgramBuilder, SolveStatus, interval_value, solve

log = logging.getLogger(__name__)

ROUTE_TOL = 1e-6
_EPS_NUDGE = 1e-10
_PURE_EIG = 1e-12


@dataclass
class DistillationReport:
    m: int
    log2_m: float
    epsilon: float | None
    fidelity: float
    witness_G: HermitianMatrix
    k_value: float
    route: str
    scan_m: int | None = None
    delta: float | None = None
    flags: tuple = ()
    solutions: tuple = ()


@dataclass
class HypothesisTestResult:
    value_bits: float
    optimal_M: HermitianMatrix


def _check_class(which: str) -> str:
    w = str(which).lower()
    if w not in ("mio", "dio"):
        raise UnsupportedCombination(
            "class %r not supported here; mixed-state programs cover mio/dio only"
            % (which,)
        )
    return w


def _check_eps(eps: float) -> float:
    e = float(eps)
    if not 0.0 <= e < 1.0:
        raise ValueError("epsilon must lie in [0, 1), got %r" % (eps,))
    return e


def _pure_part(rho: DensityMatrix):
    """Top eigenvector if the state is pure within 1e-12, else None."""
    dec = eig_hermitian(rho)
    if dec.eigenvalues[0] >= 1.0 - _PURE_EIG:
        return StateVector(dec.eigenvectors[:, 0])
    return None


def fidelity_distill(state, m, which: str = "mio", cross_check: bool = True) -> DistillationReport:
    """Best fidelity toward the m-level uniform state under mio or dio.

    The two classes share one program, so the value never depends on
    ``which``.  With ``cross_check`` on, the value is re-derived from
    the witness-family monotone at weight m - 1 and the two must agree
    within 1e-6.  The returned G has its diagonal repaired to exactly
    1/m, so downstream channel reconstruction starts from a witness
    whose diagonal constraint holds to rounding error.
    """
    _check_class(which)
    order = int(m)
    if order != m or order < 1:
        raise ValueError("m must be a positive integer, got %r" % (m,))
    rho = as_density(state)
    d = rho.dim

    if order == 1:
        # diag(G) = 1 with G <= 1 pins every basis vector as a unit
        # eigenvector, so G is the identity and the fidelity is Tr rho.
        return DistillationReport(
            m=1,
            log2_m=0.0,
            epsilon=None,
            fidelity=1.0,
            witness_G=HermitianMatrix(np.eye(d)),
            k_value=1.0,
            route="DirectSDP",
        )

    if not np.any(rho.mat - np.diag(np.diag(rho.mat))):
        # incoherent input: the objective only sees the pinned diagonal,
        # so every feasible witness scores exactly 1/m
        report = DistillationReport(
            m=order,
            log2_m=math.log2(order),
            epsilon=None,
            fidelity=1.0 / order,
            witness_G=HermitianMatrix(np.eye(d) / order),
            k_value=1.0 / order,
            route="IncoherentClosedForm",
        )
        if cross_check:
            alt = (theta_hat(rho, float(order - 1)).value + 1.0) / order
            if abs(alt - 1.0 / order) > ROUTE_TOL:
                raise SolverFailure(
                    "fidelity routes disagree on an incoherent state: "
                    "closed form %.12g vs monotone %.12g" % (1.0 / order, alt)
                )
        return report

    b = ProgramBuilder()
    g = b.add_interval_variable(np.zeros((d, d)), np.eye(d))
    b.add_diagonal_constraint(g, "eq", 1.0 / order)
    b.add_objective(g, rho.mat)
    sol = _require_optimal(solve(b.build()), "fidelity program")
    value = float(min(1.0, max(0.0, sol.primal_value)))

    gmat = interval_value(g, sol)
    gmat = gmat - np.diag(np.diag(gmat)) + np.eye(d) / order

    report = DistillationReport(
        m=order,
        log2_m=math.log2(order),
        epsilon=None,
        fidelity=value,
        witness_G=HermitianMatrix(gmat),
        k_value=1.0 / order,
        route="DirectSDP",
        solutions=(sol,),
    )
    if cross_check:
        alt = (theta_hat(rho, float(order - 1)).value + 1.0) / order
        if abs(alt - value) > ROUTE_TOL:
            raise SolverFailure(
                "fidelity routes disagree: program %.12g vs monotone %.12g"
                % (value, alt),
                solution=sol,
            )
    return report


def _rate_program(rho: DensityMatrix, eps: float):
    """min k over feasible G; retries just inside the boundary at eps = 0."""

    def attempt(e: float):
        d = rho.dim
        b = ProgramBuilder()
        g = b.add_interval_variable(np.zeros((d, d)), np.eye(d))
        k = b.add_diagonal_constraint(g, "eq_scalar")
        u = b.add_scalar_block()
        b.add_row([(g, rho.mat), (u, -1.0)], 1.0 - e)
        b.add_objective(k, -1.0)
        sol = solve(b.build())
        return sol, g, k

    sol, g, k = attempt(eps)
    nudged = False
    if sol.status is not SolveStatus.OPTIMAL and eps < _EPS_NUDGE:
        sol, g, k = attempt(_EPS_NUDGE)
        nudged = True
    _require_optimal(sol, "rate program")

    k_value = float(np.real(sol.primal_blocks[k][0, 0]))
    gmat = interval_value(g, sol)
    gmat = gmat - np.diag(np.diag(gmat)) + k_value * np.eye(rho.dim)
    return k_value, gmat, sol, nudged


def scan_ceiling(dim: int, eps: float) -> int:
    # <G, rho> <= ||rho|| Tr G = ||rho|| d/m <= d/m, so m > d/(1-eps)
    # can never reach fidelity 1 - eps
    return max(1, int(math.floor(dim / (1.0 - eps))))


def _scan_rate(rho: DensityMatrix, eps: float, cache=None) -> tuple[int, float]:
    """Largest m with fidelity >= 1 - eps - 1e-9, by exhaustive scan.

    ``cache`` maps m to a previously computed fidelity report for this
    same state; the scan fills it in as it goes, so sweeps over several
    eps values share their solves.
    """
    best_m, best_f = 1, 1.0
    prev = None
    for m in range(1, scan_ceiling(rho.dim, eps) + 1):
        if cache is not None and m in cache:
            rep = cache[m]
        else:
            rep = fidelity_distill(rho, m, cross_check=False)
            if cache is not None:
                cache[m] = rep
        f = rep.fidelity
        if prev is not None and f > prev + 1e-9:
            log.info("fidelity rose from %.12g to %.12g at m=%d", prev, f, m)
        prev = f
        if f >= 1.0 - eps - 1e-9:
            best_m, best_f = m, f
    return best_m, best_f


def one_shot_distillable(
    state, eps, which: str = "mio", fidelity_cache=None
) -> DistillationReport:
    """Distillable bits at error eps: direct rate program, scan-verified.

    The direct route floors 1/k with a 1e-9 cushion; the scan route
    picks the largest target the fidelity program accepts.  The two
    must coincide, otherwise a :class:`SolverFailure` reports both.
    Pure inputs at eps = 0 take the closed amplitude formula instead of
    the boundary-feasible program.
    """
    _check_class(which)
    eps = _check_eps(eps)
    rho = as_density(state)
    flags: tuple = ()

    pure = _pure_part(rho) if eps == 0.0 else None
    if pure is not None:
        # the boundary program has an empty interior here, but the
        # zero-error answer is exact: k_min is the largest probability
        maxp = float(np.max(pure.probabilities()))
        m = rate_from_probs(pure.probabilities(), 0.0)
        scan_m, _ = _scan_rate(rho, eps, cache=fidelity_cache)
        if scan_m != m:
            raise SolverFailure(
                "closed-form rate m=%d disagrees with scan m=%d" % (m, scan_m)
            )
        rep = fidelity_distill(rho, m, cross_check=False)
        return DistillationReport(
            m=m,
            log2_m=math.log2(m),
            epsilon=eps,
            fidelity=fidelity_pure(pure, m),
            witness_G=rep.witness_G,
            k_value=maxp,
            route="PureClosedForm",
            scan_m=scan_m,
            delta=max(0.0, -math.log2(maxp) - math.log2(m)),
            flags=("pure_closed_form",),
            solutions=rep.solutions,
        )

    k_value, gmat, sol, nudged = _rate_program(rho, eps)
    if nudged:
        flags = flags + ("epsilon_nudged",)
    if k_value <= 0.0:
        raise SolverFailure("rate program returned k=%.3e <= 0" % k_value, solution=sol)
    m = max(1, int(math.floor(1.0 / k_value + 1e-9)))

    scan_m, scan_f = _scan_rate(rho, eps, cache=fidelity_cache)
    if scan_m != m:
        raise SolverFailure(
            "direct rate m=%d (k=%.12g) disagrees with scan m=%d"
            % (m, k_value, scan_m),
            solution=sol,
        )

    delta = max(0.0, -math.log2(k_value) - math.log2(m))
    return DistillationReport(
        m=m,
        log2_m=math.log2(m),
        epsilon=eps,
        fidelity=scan_f,
        witness_G=HermitianMatrix(gmat),
        k_value=k_value,
        route="DirectSDP",
        scan_m=scan_m,
        delta=delta,
        flags=flags,
        solutions=(sol,),
    )


def _hypothesis_exact(rho: DensityMatrix, x: HermitianMatrix) -> HypothesisTestResult:
    # At eps = 0 the acceptance constraint saturates: <M, rho> = 1
    # forces M to be the identity on the support of rho (M <= 1 then
    # kills the off-support blocks), leaving a free block on the
    # orthocomplement whose optimal choice is the projector onto the
    # negative eigenspace of the compressed reference.
    dec = eig_hermitian(rho)
    rank = int(np.count_nonzero(dec.eigenvalues > 1e-12))
    vs = dec.eigenvectors[:, :rank]
    vp = dec.eigenvectors[:, rank:]
    beta = float(np.real(np.trace(vs.conj().T @ x.mat @ vs)))
    mopt = vs @ vs.conj().T
    if vp.shape[1]:
        xp = vp.conj().T @ x.mat @ vp
        pdec = eig_hermitian(xp)
        neg = pdec.eigenvalues < 0.0
        beta += float(np.sum(pdec.eigenvalues[neg]))
        if np.any(neg):
            u = pdec.eigenvectors[:, neg]
            mopt = mopt + vp @ (u @ u.conj().T) @ vp.conj().T
    value = math.inf if beta <= 1e-12 else -math.log2(beta)
    return HypothesisTestResult(value_bits=value, optimal_M=HermitianMatrix(mopt))


def hypothesis_test_relent(state, reference, eps) -> HypothesisTestResult:
    """Hypothesis-testing divergence against a trace-one Hermitian operator.

    Minimizes <M, reference> over tests 0 <= M <= 1 that accept the
    state with probability at least 1 - eps, then takes -log2.  A
    minimum at or below zero (possible since the reference may fail to
    be positive semidefinite) gives +inf.  eps = 0 is handled by an
    exact support reduction rather than the program, whose interior is
    empty there.
    """
    eps = _check_eps(eps)
    rho = as_density(state)
    x = HermitianMatrix(reference)
    tr = float(np.real(np.trace(x.mat)))
    if abs(tr - 1.0) > 1e-9:
        raise ValueError("reference operator has trace %.12g, expected 1" % tr)
    if x.dim != rho.dim:
        raise DimensionMismatch(
            "state dimension %d, reference dimension %d" % (rho.dim, x.dim)
        )

    if eps == 0.0:
        return _hypothesis_exact(rho, x)

    d = rho.dim
    b = ProgramBuilder()
    mvar = b.add_interval_variable(np.zeros((d, d)), np.eye(d))
    u = b.add_scalar_block()
    b.add_row([(mvar, rho.mat), (u, -1.0)], 1.0 - eps)
    b.add_objective(mvar, -x.mat)
    sol = _require_optimal(solve(b.build()), "hypothesis test program")

    beta = -sol.primal_value
    value = math.inf if beta <= 1e-12 else -math.log2(beta)
    return HypothesisTestResult(
        value_bits=value,
        optimal_M=HermitianMatrix(interval_value(mvar, sol)),
    )


def min_hypothesis_over_diagonal(state, eps) -> float:
    """Smallest divergence against sign-free diagonal references, in bits.

    The reference set is every diagonal Hermitian with unit trace,
    positive semidefinite or not.  Shares its program with the rate
    route: the answer is -log2 of the minimized k, and flooring
    2^value recovers the one-shot target size.  The gap between the
    value and its floored version stays in [0, 1).
    """
    eps = _check_eps(eps)
    rho = as_density(state)
    if eps == 0.0:
        pure = _pure_part(rho)
        if pure is not None:
            # exact boundary value; the program itself has no interior
            return -math.log2(float(np.max(pure.probabilities())))
    k_value, _, sol, _ = _rate_program(rho, eps)
    if k_value <= 0.0:
        raise SolverFailure("rate program returned k=%.3e <= 0" % k_value, solution=sol)
    return -math.log2(k_value)


def min_hypothesis_pure(state, eps) -> float:
    """Smallest divergence against diagonal density matrices, pure input.

    A minimax swap turns the nested optimization into one program:
    minimize the largest diagonal entry of the test operator subject to
    the acceptance constraint.  Valid for pure states only; the caller
    supplies amplitudes.
    """
    eps = _check_eps(eps)
    psi = state if isinstance(state, StateVector) else StateVector(state)
    d = psi.dim
    rho = psi.projector()

    if eps == 0.0:
        # the divergence is linear in the reference through the accepted
        # probability, so the minimum over diagonal densities sits on a
        # vertex of the simplex; each vertex goes through the exact
        # support reduction
        best = math.inf
        for j in range(d):
            unit = np.zeros((d, d))
            unit[j, j] = 1.0
            best = min(best, hypothesis_test_relent(rho, unit, 0.0).value_bits)
        return best

    # minimax swap: minimize the largest diagonal entry of the test.
    # The "leq" diagonal mode compares against a constant, so the rows
    # M_jj <= t are spelled out by hand.
    b = ProgramBuilder()
    mvar = b.add_interval_variable(np.zeros((d, d)), np.eye(d))
    t = b.add_scalar_block()
    for j in range(d):
        unit = np.zeros((d, d), dtype=np.complex128)
        unit[j, j] = 1.0
        s = b.add_scalar_block()
        b.add_row([(mvar, unit), (t, -1.0), (s, 1.0)], 0.0)
    u = b.add_scalar_block()
    b.add_row([(mvar, rho.mat), (u, -1.0)], 1.0 - eps)
    b.add_objective(t, -1.0)
    sol = _require_optimal(solve(b.build()), "pure hypothesis program")
    beta = -sol.primal_value
    if beta <= 1e-12:
        return math.inf
    return -math.log2(beta)


def asymptotic_rate_scan(state, eps, n_max: int):
    """Per-copy rates over tensor powers, from the amplitude multiset.

    Returns (n, rate) pairs for n = 1..n_max.  The n-fold power is
    handled as the flat product array of squared amplitudes, never as
    an operator, so the reachable range is capped by array size alone.
    """
    eps = _check_eps(eps)
    if isinstance(state, DensityMatrix):
        raise UnsupportedCombination(
            "per-copy scan works on amplitudes; pass a pure state"
        )
    psi = state if isinstance(state, StateVector) else StateVector(state)
    p1 = psi.probabilities()
    d = p1.size

    out = []
    p = np.ones(1)
    for n in range(1, int(n_max) + 1):
        if d ** n > 10**7:
            raise ResourceLimit(
                "tensor power %d^%d exceeds the 1e7 amplitude budget" % (d, n)
            )
        p = np.kron(p, p1)
        m = rate_from_probs(p, eps)
        out.append((n, math.log2(m) / n))
    return out
