"""The coherence monotone family and its relatives.

Every quantity here is computed along two independently compiled
routes that must agree:

* a witness route, maximizing the overlap with a bounded operator
  whose diagonal is constrained (nonpositive for ``theta``, exactly
  zero for ``theta_hat``), and
* a closest-diagonal route, minimizing a weighted sum of the positive
  and negative parts of ``rho - X`` over diagonal ``X`` (nonnegative
  for ``theta``, sign-free for ``theta_hat``).

The closest-diagonal compilations use the epigraph identity
``min { Tr P : P >= A, P >= 0 } = Tr A_+`` so no nonsmooth positive
part ever reaches the solver.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SolverFailure
from .linalg import (
    DensityMatrix,
    HermitianMatrix,
    as_density,
    von_neumann_entropy,
    dephase,
)
from .sdp import (
    ConicSolution,
    ProgramBuilder,
    SolveStatus,
    interval_value,
    solve,
)

ROUTE_TOL = 1e-6


@dataclass
class MonotoneResult:
    """Value with both optimizers and the certified solver gap.

    ``witness`` is the optimal bounded operator of the witness route
    (diagonal polished to satisfy its sign constraint exactly);
    ``closest_diagonal`` is the optimal diagonal operator of the other
    route.  ``witness_value`` and ``primal_value`` keep the two raw
    route values so their agreement can be audited.
    """

    value: float
    witness: HermitianMatrix
    closest_diagonal: HermitianMatrix
    gap: float
    witness_value: float
    primal_value: float
    solutions: tuple = ()


def _require_optimal(sol: ConicSolution, label: str) -> ConicSolution:
    if sol.status is not SolveStatus.OPTIMAL:
        raise SolverFailure(
            "%s solve ended with status %s: %s" % (label, sol.status.value, sol.message),
            solution=sol,
        )
    return sol


def _witness_program(rho: np.ndarray, m: float, diag_mode: str):
    d = rho.shape[0]
    b = ProgramBuilder()
    w = b.add_interval_variable(-np.eye(d), m * np.eye(d))
    b.add_diagonal_constraint(w, diag_mode, 0.0)
    b.add_objective(w, rho)
    return b.build(), w


def _closest_diagonal_program(rho: np.ndarray, m: float, sign_free: bool):
    # minimize (m+1) Tr P + Tr X - Tr rho  subject to  P >= 0 and
    # P - (rho - X) >= 0, over diagonal X.  For the sign-free variant
    # X is shifted by 2*identity: the optimum never needs entries
    # below -2 (any such entry already makes Tr(rho - X)_+ exceed 2,
    # which is worse than X = 0 whenever m > 0), so a nonnegative
    # shifted diagonal loses nothing.
    d = rho.shape[0]
    shift = 2.0 if sign_free else 0.0
    b = ProgramBuilder()
    p = b.add_psd_block(d)
    r = b.add_psd_block(d)
    xs = [b.add_scalar_block() for _ in range(d)]
    terms = [(p, 1.0), (r, -1.0)]
    for j, x in enumerate(xs):
        unit = np.zeros((d, d), dtype=np.complex128)
        unit[j, j] = 1.0
        terms.append((x, unit))
    b.add_matrix_equality(terms, rho + shift * np.eye(d))
    b.add_objective(p, -(m + 1.0) * np.eye(d))
    for x in xs:
        b.add_objective(x, -1.0)
    # engine value is -(m+1) Tr P - sum x + (trace rho + shift * d), so
    # the monotone value is its negation.
    b.add_constant(1.0 + shift * d)
    return b.build(), xs, shift


def _solve_pair(rho: np.ndarray, m: float, exact_diag: bool):
    diag_mode = "eq" if exact_diag else "leq"
    prog_w, wvar = _witness_program(rho, m, diag_mode)
    sol_w = _require_optimal(solve(prog_w), "witness route")
    witness_value = sol_w.primal_value

    prog_c, xs, shift = _closest_diagonal_program(rho, m, sign_free=exact_diag)
    sol_c = _require_optimal(solve(prog_c), "closest-diagonal route")
    primal_value = -sol_c.primal_value

    if abs(witness_value - primal_value) > ROUTE_TOL:
        raise SolverFailure(
            "route disagreement %.3e exceeds %g (witness %.12g vs diagonal %.12g)"
            % (abs(witness_value - primal_value), ROUTE_TOL, witness_value, primal_value),
            solution=sol_w,
        )

    w_mat = interval_value(wvar, sol_w)
    diag_w = np.real(np.diag(w_mat))
    if exact_diag:
        w_mat = w_mat - np.diag(diag_w).astype(np.complex128)
    else:
        w_mat = w_mat - np.diag(np.maximum(diag_w, 0.0)).astype(np.complex128)

    x_vals = np.array(
        [float(np.real(sol_c.primal_blocks[x][0, 0])) for x in xs]
    )
    if exact_diag:
        x_diag = x_vals - shift
    else:
        x_diag = np.maximum(x_vals, 0.0)

    value = max(0.0, 0.5 * (witness_value + primal_value))
    return MonotoneResult(
        value=value,
        witness=HermitianMatrix(w_mat),
        closest_diagonal=HermitianMatrix(np.diag(x_diag).astype(np.complex128)),
        gap=max(sol_w.gap, sol_c.gap),
        witness_value=witness_value,
        primal_value=primal_value,
        solutions=(sol_w, sol_c),
    )


def theta(state, m: float) -> MonotoneResult:
    """Monotone value at weight m, via both program routes.

    The witness route maximizes ``<rho, W>`` over ``-1 <= W <= m*1``
    with a nonpositive diagonal; the closest-diagonal route minimizes
    ``m Tr(rho - X)_+ + Tr(rho - X)_-`` over diagonal ``X >= 0``.  Both
    must agree within 1e-6 or a :class:`SolverFailure` is raised.  The
    weight may be any nonnegative real.
    """
    if m < 0:
        raise ValueError("m must be nonnegative")
    rho = as_density(state)
    return _solve_pair(rho.mat, float(m), exact_diag=False)


def theta_hat(state, m: float) -> MonotoneResult:
    """Variant with the witness diagonal pinned to zero.

    The closest-diagonal route now ranges over sign-free diagonal
    operators.  At m = 0 the feasible witness set collapses to the
    zero operator, so the value is exactly 0 and is returned without a
    solve, together with exact optimizers for both routes.
    """
    if m < 0:
        raise ValueError("m must be nonnegative")
    rho = as_density(state)
    d = rho.dim
    if m == 0:
        # only W = 0 has a zero diagonal inside [-1, 0]; on the other
        # route X = diag(rho) - c*1 with c = ||rho - diag(rho)|| makes
        # rho - X positive semidefinite, so the objective is 0 exactly.
        offdiag = rho.mat - np.diag(np.diag(rho.mat))
        c = float(np.linalg.norm(offdiag, 2))
        x_diag = rho.diagonal() - c
        return MonotoneResult(
            value=0.0,
            witness=HermitianMatrix(np.zeros((d, d), dtype=np.complex128)),
            closest_diagonal=HermitianMatrix(np.diag(x_diag).astype(np.complex128)),
            gap=0.0,
            witness_value=0.0,
            primal_value=0.0,
        )
    return _solve_pair(rho.mat, float(m), exact_diag=True)


def robustness(state) -> MonotoneResult:
    """Minimal incoherent mixing weight, cross-checked two ways.

    Equals ``theta`` at weight d - 1; also compiled directly as
    ``min { Tr Y - 1 : Y diagonal >= 0, Y >= rho }``.
    """
    rho = as_density(state)
    d = rho.dim
    result = theta(rho, float(d - 1)) if d > 1 else theta(rho, 0.0)

    b = ProgramBuilder()
    r = b.add_psd_block(d)
    ys = [b.add_scalar_block() for _ in range(d)]
    terms = [(r, -1.0)]
    for j, y in enumerate(ys):
        unit = np.zeros((d, d), dtype=np.complex128)
        unit[j, j] = 1.0
        terms.append((y, unit))
    b.add_matrix_equality(terms, rho.mat)
    for y in ys:
        b.add_objective(y, -1.0)
    b.add_constant(1.0)
    sol = _require_optimal(solve(b.build()), "mixing-weight route")
    direct = max(0.0, -sol.primal_value)

    if abs(direct - result.value) > ROUTE_TOL:
        raise SolverFailure(
            "mixing-weight route %.12g disagrees with monotone value %.12g"
            % (direct, result.value),
            solution=sol,
        )
    result.solutions = result.solutions + (sol,)
    return result


def modified_trace_distance(state) -> MonotoneResult:
    """Distance to the cone of diagonal PSD operators in trace norm.

    Equals ``theta`` at weight 1; also compiled directly as
    ``min Tr P + Tr N`` with ``P - N = rho - X`` and diagonal
    ``X >= 0``.
    """
    rho = as_density(state)
    result = theta(rho, 1.0)
    sol, value = _trace_norm_to_diagonal(rho.mat, normalized=False)
    if abs(value - result.value) > ROUTE_TOL:
        raise SolverFailure(
            "trace-norm route %.12g disagrees with monotone value %.12g"
            % (value, result.value),
            solution=sol,
        )
    result.solutions = result.solutions + (sol,)
    return result


def _trace_norm_to_diagonal(rho: np.ndarray, normalized: bool):
    d = rho.shape[0]
    b = ProgramBuilder()
    p = b.add_psd_block(d)
    n = b.add_psd_block(d)
    xs = [b.add_scalar_block() for _ in range(d)]
    terms = [(p, 1.0), (n, -1.0)]
    for j, x in enumerate(xs):
        unit = np.zeros((d, d), dtype=np.complex128)
        unit[j, j] = 1.0
        terms.append((x, unit))
    b.add_matrix_equality(terms, rho)
    if normalized:
        b.add_row([(x, 1.0) for x in xs], 1.0)
    b.add_objective(p, -np.eye(d))
    b.add_objective(n, -np.eye(d))
    sol = _require_optimal(solve(b.build()), "trace-norm route")
    return sol, max(0.0, -sol.primal_value)


def trace_distance_of_coherence(state) -> float:
    """Minimal trace distance to a diagonal density matrix."""
    rho = as_density(state)
    _, value = _trace_norm_to_diagonal(rho.mat, normalized=True)
    return value


def relative_entropy_of_coherence(state) -> float:
    """Entropy of the dephased state minus the entropy of the state."""
    rho = as_density(state)
    return von_neumann_entropy(dephase(rho)) - von_neumann_entropy(rho)
