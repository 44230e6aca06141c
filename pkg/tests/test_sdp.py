"""Solver-level checks on programs small enough to verify by hand."""

import numpy as np
import pytest

from cohdist.sdp import (
    ProgramBuilder,
    SolveStatus,
    interval_value,
    solve,
)

rng = np.random.default_rng(99)


def random_hermitian(d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return (a + a.conj().T) / 2


def test_scalar_equality():
    b = ProgramBuilder()
    x = b.add_scalar_block()
    b.add_objective(x, 1.0)
    b.add_row([(x, 1.0)], 3.0)
    sol = solve(b.build())
    assert sol.status is SolveStatus.OPTIMAL
    assert abs(sol.primal_value - 3.0) < 1e-7


def test_max_eigenvalue_program():
    # max <C, X> over density-like X is the top eigenvalue
    c = random_hermitian(4)
    b = ProgramBuilder()
    x = b.add_psd_block(4)
    b.add_objective(x, c)
    b.add_row([(x, np.eye(4))], 1.0)
    sol = solve(b.build())
    assert sol.status is SolveStatus.OPTIMAL
    assert abs(sol.primal_value - np.linalg.eigvalsh(c)[-1]) < 1e-7


def test_interval_variable_trace_norm():
    # sup of <C, W> over -1 <= W <= 1 is the trace norm
    c = random_hermitian(3)
    b = ProgramBuilder()
    w = b.add_interval_variable(-np.eye(3), np.eye(3))
    b.add_objective(w, c)
    sol = solve(b.build())
    assert sol.status is SolveStatus.OPTIMAL
    want = np.abs(np.linalg.eigvalsh(c)).sum()
    assert abs(sol.primal_value - want) < 1e-6
    wmat = interval_value(w, sol)
    eigs = np.linalg.eigvalsh(wmat)
    assert eigs[0] > -1.0 - 1e-7 and eigs[-1] < 1.0 + 1e-7


def test_interval_with_diagonal_cap():
    # plus-state witness with nonpositive diagonal tops out at 1
    plus = np.full((2, 2), 0.5)
    b = ProgramBuilder()
    w = b.add_interval_variable(-np.eye(2), np.eye(2))
    b.add_diagonal_constraint(w, "leq", 0.0)
    b.add_objective(w, plus)
    sol = solve(b.build())
    assert sol.status is SolveStatus.OPTIMAL
    assert abs(sol.primal_value - 1.0) < 1e-7


def test_shared_scalar_diagonal():
    # uniform target overlap with tied diagonal: G = target is optimal
    target = np.full((2, 2), 0.5)
    b = ProgramBuilder()
    g = b.add_interval_variable(np.zeros((2, 2)), np.eye(2))
    k = b.add_diagonal_constraint(g, "eq_scalar")
    b.add_objective(g, target)
    sol = solve(b.build())
    assert sol.status is SolveStatus.OPTIMAL
    assert abs(sol.primal_value - 1.0) < 1e-6
    # optimal k is any value in [1/2, 1]; the tie matters, the point does not
    kv = float(np.real(sol.primal_blocks[k][0, 0]))
    assert 0.5 - 1e-6 <= kv <= 1.0 + 1e-6


def test_objective_constant_offset():
    b = ProgramBuilder()
    x = b.add_scalar_block()
    b.add_objective(x, 1.0)
    b.add_row([(x, 1.0)], 2.0)
    b.add_constant(5.0)
    sol = solve(b.build())
    assert abs(sol.primal_value - 7.0) < 1e-7


def test_infeasible_status():
    b = ProgramBuilder()
    x = b.add_scalar_block()
    b.add_objective(x, 1.0)
    b.add_row([(x, 1.0)], -1.0)  # nonnegative scalar forced negative
    sol = solve(b.build())
    assert sol.status is SolveStatus.INFEASIBLE


def test_unbounded_status():
    b = ProgramBuilder()
    x = b.add_scalar_block()
    b.add_objective(x, 1.0)
    sol = solve(b.build())
    assert sol.status is SolveStatus.UNBOUNDED


def test_redundant_rows_are_pruned():
    b = ProgramBuilder()
    x = b.add_psd_block(2)
    b.add_objective(x, np.eye(2))
    b.add_row([(x, np.eye(2))], 1.0)
    b.add_row([(x, np.eye(2))], 1.0)  # duplicate
    b.add_row([(x, 2.0 * np.eye(2))], 2.0)  # scaled duplicate
    prog = b.build()
    sol = solve(prog)
    assert sol.status is SolveStatus.OPTIMAL
    assert sol.pruned_rows >= 2
    assert abs(sol.primal_value - 1.0) < 1e-7


def test_contradictory_redundancy_is_infeasible():
    b = ProgramBuilder()
    x = b.add_psd_block(2)
    b.add_objective(x, np.eye(2))
    b.add_row([(x, np.eye(2))], 1.0)
    b.add_row([(x, np.eye(2))], 2.0)  # same row, different rhs
    sol = solve(b.build())
    assert sol.status is SolveStatus.INFEASIBLE


def test_certification_fields():
    c = random_hermitian(5)
    b = ProgramBuilder()
    x = b.add_psd_block(5)
    b.add_objective(x, c)
    b.add_row([(x, np.eye(5))], 1.0)
    sol = solve(b.build())
    assert sol.status is SolveStatus.OPTIMAL
    assert sol.gap <= 1e-8
    assert sol.residual <= 1e-8
    assert sol.min_eigenvalue >= -1e-9
    assert sol.certified


def test_matrix_equality_splits_hermitian_dof():
    # P - N = C with P, N psd recovers the Jordan decomposition value
    c = random_hermitian(3)
    b = ProgramBuilder()
    p = b.add_psd_block(3)
    n = b.add_psd_block(3)
    b.add_matrix_equality([(p, 1.0), (n, -1.0)], c)
    b.add_objective(p, -np.eye(3))
    b.add_objective(n, -np.eye(3))
    sol = solve(b.build())
    assert sol.status is SolveStatus.OPTIMAL
    want = -np.abs(np.linalg.eigvalsh(c)).sum()
    assert abs(sol.primal_value - want) < 1e-6


def test_complex_objective_handled():
    c = random_hermitian(3)
    assert np.max(np.abs(np.imag(c))) > 1e-3  # stays a complex instance
    b = ProgramBuilder()
    x = b.add_psd_block(3)
    b.add_objective(x, c)
    b.add_row([(x, np.eye(3))], 1.0)
    sol = solve(b.build())
    top = sol.primal_blocks[x]
    # optimizer concentrates on the top eigenvector
    vals, vecs = np.linalg.eigh(c)
    overlap = np.real(vecs[:, -1].conj() @ top @ vecs[:, -1])
    assert overlap > 1.0 - 1e-5
