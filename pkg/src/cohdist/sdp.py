"""Block-diagonal semidefinite programs in standard conic form.

A program is

    maximize    sum_b <C_b, X_b>
    subject to  sum_b <A_ib, X_b> = b_i   for every row i,
                X_b >= 0                  (PSD blocks, nonnegative scalars),

where every block variable is either an n x n complex Hermitian matrix
or a 1 x 1 nonnegative scalar, and <.,.> is the trace inner product.
:class:`ProgramBuilder` assembles programs from higher level pieces
(interval-constrained operators, diagonal constraints) and prunes
linearly dependent rows.  :func:`solve` runs a primal-dual
path-following interior-point method on the homogeneous self-dual
embedding (via cvxopt's conelp core) and then certifies the answer
independently: the reported status is Optimal only when the duality
gap, the constraint residual, and the block eigenvalue floors all pass
the thresholds below, regardless of what the backend claims.

Complex Hermitian blocks are handed to the real solver through the
standard 2n x 2n symmetric embedding

    T(A) = [[Re A, -Im A], [Im A, Re A]],

which doubles trace inner products; the coefficient scaling below keeps
objective and row values unscaled, so the API speaks complex Hermitian
only.
"""

from __future__ import annotations

import inspect
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.linalg

from cvxopt import matrix as _cvxmat
from cvxopt import solvers as _cvxsolvers

from .errors import DimensionMismatch
from .linalg import _as_matrix

RANK_TOL = 1e-10
GAP_TOL = 1e-8
RESIDUAL_TOL = 1e-8
EIG_FLOOR = -1e-9
MAX_ITERATIONS = 200

# backend must be run an order of magnitude inside GAP_TOL, or the
# certified gap of a marginal iterate can land just above it
_SOLVER_OPTIONS = {
    "show_progress": False,
    "maxiters": MAX_ITERATIONS,
    "abstol": 1e-10,
    "reltol": 1e-10,
    "feastol": 1e-9,
    "refinement": 2,
}

# second rung of the retry ladder, used only when the first solve comes
# back uncertified or the backend factorization breaks down; the dense
# ldl kkt solver is slower but survives the near-singular systems that
# make the default cholesky raise, at the same target tolerances
# (pushing below 1e-10 provokes breakdowns without improving the
# certificate, so the rungs differ in factorization, not tightness)
_STRICT_OPTIONS = {
    "show_progress": False,
    "maxiters": 300,
    "abstol": 1e-10,
    "reltol": 1e-10,
    "feastol": 1e-9,
    "refinement": 2,
    "kktsolver": "ldl",
}

_CONELP_TAKES_OPTIONS = "options" in inspect.signature(_cvxsolvers.conelp).parameters


class SolveStatus(Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    NUMERICAL_TROUBLE = "NumericalTrouble"


@dataclass(frozen=True)
class IntervalVar:
    """Virtual operator variable X with L <= X <= U in PSD order.

    Represented through two slack blocks, X - L and U - X, tied by
    linking equalities; ``X = L + slack_lower`` everywhere.
    """

    lower_block: int
    upper_block: int
    lower: np.ndarray
    upper: np.ndarray

    @property
    def dim(self) -> int:
        return self.lower.shape[0]


@dataclass(frozen=True)
class ConicProgram:
    """Immutable compiled program.

    ``rows`` holds the retained (independent) constraint rows as
    ``(coeffs, rhs)`` with ``coeffs`` a dict from block index to a
    coefficient matrix.  ``dropped_rows`` keeps pruned rows so that
    solution certification can still check them.
    """

    blocks: tuple
    objective: tuple
    rows: tuple
    objective_offset: float = 0.0
    dropped_rows: tuple = ()
    pruned: bool = False
    inconsistent: bool = False


@dataclass
class ConicSolution:
    status: SolveStatus
    primal_value: float
    dual_value: float
    primal_blocks: tuple
    dual_vector: np.ndarray
    gap: float
    iterations: int
    residual: float = float("nan")
    min_eigenvalue: float = float("nan")
    pruned_rows: int = 0
    message: str = ""

    @property
    def certified(self) -> bool:
        return self.status is SolveStatus.OPTIMAL


class ProgramBuilder:
    """Incrementally assembles a :class:`ConicProgram`."""

    def __init__(self):
        self._dims = []
        self._objective = {}
        self._rows = []
        self._offset = 0.0

    # ---- variables -------------------------------------------------

    def add_psd_block(self, dim: int) -> int:
        if dim < 1:
            raise ValueError("block dimension must be at least 1")
        self._dims.append(int(dim))
        return len(self._dims) - 1

    def add_scalar_block(self) -> int:
        return self.add_psd_block(1)

    def add_interval_variable(self, lower, upper) -> IntervalVar:
        """New operator variable pinned between two Hermitian bounds."""
        lo = _as_matrix(lower)
        up = _as_matrix(upper)
        if lo.shape != up.shape:
            raise DimensionMismatch("bound shapes %r, %r" % (lo.shape, up.shape))
        d = lo.shape[0]
        lb = self.add_psd_block(d)
        ub = self.add_psd_block(d)
        var = IntervalVar(lb, ub, lo.copy(), up.copy())
        # linking equalities: (X - L) + (U - X) = U - L, one row per
        # Hermitian degree of freedom.
        self.add_matrix_equality([(lb, 1.0), (ub, 1.0)], up - lo)
        return var

    # ---- objective and rows ----------------------------------------

    def _coeff_for(self, ref, coeff):
        """Normalize one (ref, coeff) term into (block, matrix, rhs_shift)."""
        if isinstance(ref, IntervalVar):
            c = np.asarray(_as_matrix(coeff), dtype=np.complex128)
            shift = float(np.real(np.vdot(c, ref.lower)))
            return ref.lower_block, c, shift
        block = int(ref)
        d = self._dims[block]
        if d == 1 and np.isscalar(coeff):
            c = np.array([[coeff]], dtype=np.complex128)
        else:
            c = np.asarray(_as_matrix(coeff), dtype=np.complex128)
        if c.shape != (d, d):
            raise DimensionMismatch(
                "coefficient shape %r does not match block dim %d" % (c.shape, d)
            )
        return block, c, 0.0

    def add_objective(self, ref, coeff):
        """Add <coeff, ref> to the maximization objective."""
        block, c, shift = self._coeff_for(ref, coeff)
        self._offset += shift
        if block in self._objective:
            self._objective[block] = self._objective[block] + c
        else:
            self._objective[block] = c

    def add_constant(self, value: float):
        """Add a constant to the objective (reported, not optimized)."""
        self._offset += float(value)

    def add_row(self, terms, rhs: float):
        """Add the equality row  sum_t <coeff_t, ref_t> = rhs."""
        coeffs = {}
        adjusted = float(rhs)
        for ref, coeff in terms:
            block, c, shift = self._coeff_for(ref, coeff)
            adjusted -= shift
            if block in coeffs:
                coeffs[block] = coeffs[block] + c
            else:
                coeffs[block] = c
        self._rows.append((coeffs, adjusted))

    def add_matrix_equality(self, terms, rhs):
        """Add the operator equality  sum_t alpha_t X_t = RHS.

        Each term is ``(matrix_ref, scalar)`` for a matrix variable or
        ``(scalar_block, direction_matrix)`` for a scalar one.  Expands
        into one scalar row per Hermitian degree of freedom of the
        common dimension.
        """
        r = _as_matrix(rhs)
        d = r.shape[0]
        norm_terms = []
        for ref, spec in terms:
            if isinstance(ref, IntervalVar) or self._dims[int(ref)] > 1:
                norm_terms.append((ref, float(spec), None))
            else:
                dmat = np.asarray(_as_matrix(spec), dtype=np.complex128)
                if dmat.shape != (d, d):
                    raise DimensionMismatch("direction shape %r" % (dmat.shape,))
                norm_terms.append((ref, None, dmat))

        def emit(basis):
            row_terms = []
            for ref, alpha, dmat in norm_terms:
                if dmat is None:
                    row_terms.append((ref, alpha * basis))
                else:
                    row_terms.append((ref, float(np.real(np.vdot(basis, dmat)))))
            self.add_row(row_terms, float(np.real(np.vdot(basis, r))))

        for i in range(d):
            basis = np.zeros((d, d), dtype=np.complex128)
            basis[i, i] = 1.0
            emit(basis)
        for i in range(d):
            for j in range(i + 1, d):
                basis = np.zeros((d, d), dtype=np.complex128)
                basis[i, j] = 0.5
                basis[j, i] = 0.5
                emit(basis)
                basis = np.zeros((d, d), dtype=np.complex128)
                basis[i, j] = -0.5j
                basis[j, i] = 0.5j
                emit(basis)

    def add_diagonal_constraint(self, ref, mode: str, value=0.0, scalar_block=None):
        """Constrain the diagonal of an operator variable.

        mode "leq": diag(X) <= value entrywise (slack scalars added).
        mode "eq": diag(X) = value entrywise.
        mode "eq_scalar": diag(X) = k * ones for a shared scalar block
        k, created on demand and returned.
        """
        if isinstance(ref, IntervalVar):
            d = ref.dim
        else:
            d = self._dims[int(ref)]
        vals = np.broadcast_to(np.asarray(value, dtype=np.float64), (d,))
        k_block = None
        if mode == "eq_scalar":
            k_block = scalar_block if scalar_block is not None else self.add_scalar_block()
        for j in range(d):
            unit = np.zeros((d, d), dtype=np.complex128)
            unit[j, j] = 1.0
            if mode == "leq":
                slack = self.add_scalar_block()
                self.add_row([(ref, unit), (slack, 1.0)], float(vals[j]))
            elif mode == "eq":
                self.add_row([(ref, unit)], float(vals[j]))
            elif mode == "eq_scalar":
                self.add_row([(ref, unit), (k_block, -1.0)], 0.0)
            else:
                raise ValueError("unknown mode %r" % mode)
        return k_block

    # ---- compilation -----------------------------------------------

    def _row_basis(self, coeffs) -> np.ndarray:
        """Real parametrization of one row for rank analysis."""
        pieces = []
        for b, d in enumerate(self._dims):
            c = coeffs.get(b)
            if d == 1:
                pieces.append(np.array([0.0 if c is None else float(np.real(c[0, 0]))]))
                continue
            if c is None:
                pieces.append(np.zeros(d * d))
                continue
            iu = np.triu_indices(d, k=1)
            pieces.append(
                np.concatenate(
                    [
                        np.real(np.diag(c)),
                        np.sqrt(2.0) * np.real(c[iu]),
                        np.sqrt(2.0) * np.imag(c[iu]),
                    ]
                )
            )
        return np.concatenate(pieces) if pieces else np.zeros(0)

    def build(self) -> ConicProgram:
        dims = tuple(self._dims)
        objective = tuple(
            self._objective.get(b, np.zeros((d, d), dtype=np.complex128))
            for b, d in enumerate(dims)
        )
        rows = list(self._rows)
        kept_idx = list(range(len(rows)))
        dropped_idx = []
        inconsistent = False
        if rows:
            r_mat = np.array([self._row_basis(c) for c, _ in rows])
            if r_mat.shape[1] == 0:
                r_mat = np.zeros((len(rows), 1))
            _, r_tri, piv = scipy.linalg.qr(r_mat.T, mode="economic", pivoting=True)
            diag = np.abs(np.diag(r_tri)) if r_tri.size else np.zeros(0)
            scale = diag[0] if diag.size else 0.0
            rank = int(np.sum(diag > RANK_TOL * max(scale, 1.0))) if scale > 0 else 0
            if rank < len(rows):
                kept_idx = sorted(piv[:rank])
                dropped_idx = sorted(piv[rank:])
                if kept_idx:
                    basis = r_mat[kept_idx].T
                    for j in dropped_idx:
                        comb, *_ = np.linalg.lstsq(basis, r_mat[j], rcond=None)
                        predicted = float(
                            np.dot(comb, [rows[i][1] for i in kept_idx])
                        )
                        if abs(predicted - rows[j][1]) > RESIDUAL_TOL:
                            inconsistent = True
                else:
                    # all-zero coefficient rows: consistent only if rhs is 0
                    for j in dropped_idx:
                        if abs(rows[j][1]) > RESIDUAL_TOL:
                            inconsistent = True
        kept = tuple(
            ({b: c.copy() for b, c in rows[i][0].items()}, rows[i][1]) for i in kept_idx
        )
        dropped = tuple(
            ({b: c.copy() for b, c in rows[i][0].items()}, rows[i][1])
            for i in dropped_idx
        )
        return ConicProgram(
            blocks=dims,
            objective=objective,
            rows=kept,
            objective_offset=self._offset,
            dropped_rows=dropped,
            pruned=bool(dropped_idx),
            inconsistent=inconsistent,
        )


def interval_value(var: IntervalVar, solution: ConicSolution) -> np.ndarray:
    """Recover X = L + lower_slack for an interval variable."""
    return var.lower + solution.primal_blocks[var.lower_block]


# ---- real embedding helpers ---------------------------------------


def _embed_half(a: np.ndarray) -> np.ndarray:
    re, im = np.real(a), np.imag(a)
    return 0.5 * np.block([[re, -im], [im, re]])


def _extract(z: np.ndarray, n: int) -> np.ndarray:
    z = 0.5 * (z + z.T)
    h = 0.5 * (z[:n, :n] + z[n:, n:]) + 0.5j * (z[n:, :n] - z[:n, n:])
    return 0.5 * (h + h.conj().T)


def _program_values(program: ConicProgram, blocks) -> tuple:
    primal = program.objective_offset
    for c, x in zip(program.objective, blocks):
        primal += float(np.real(np.vdot(c, x)))
    residual = 0.0
    for coeffs, rhs in program.rows + program.dropped_rows:
        lhs = sum(float(np.real(np.vdot(c, blocks[b]))) for b, c in coeffs.items())
        residual = max(residual, abs(lhs - rhs))
    min_eig = 0.0
    for x in blocks:
        if x.shape[0] == 1:
            min_eig = min(min_eig, float(np.real(x[0, 0])))
        else:
            min_eig = min(min_eig, float(np.linalg.eigvalsh(x)[0]))
    return primal, residual, min_eig


def _trouble(program: ConicProgram, message: str, iterations: int = 0) -> ConicSolution:
    zeros = tuple(np.zeros((d, d), dtype=np.complex128) for d in program.blocks)
    return ConicSolution(
        status=SolveStatus.NUMERICAL_TROUBLE,
        primal_value=float("nan"),
        dual_value=float("nan"),
        primal_blocks=zeros,
        dual_vector=np.zeros(len(program.rows)),
        gap=float("inf"),
        iterations=iterations,
        pruned_rows=len(program.dropped_rows),
        message=message,
    )


def _call_conelp(c, g, h, dims, options):
    options = dict(options)
    kktsolver = options.pop("kktsolver", None)
    if _CONELP_TAKES_OPTIONS:
        return _cvxsolvers.conelp(c, g, h, dims, kktsolver=kktsolver, options=options)
    saved = dict(_cvxsolvers.options)
    _cvxsolvers.options.update(options)
    try:
        return _cvxsolvers.conelp(c, g, h, dims, kktsolver=kktsolver)
    finally:
        _cvxsolvers.options.clear()
        _cvxsolvers.options.update(saved)


def solve(program: ConicProgram) -> ConicSolution:
    """Solve a compiled program and certify the answer.

    Never raises on numerical failure; a :class:`ConicSolution` with
    status ``NUMERICAL_TROUBLE`` is returned instead.  Infeasibility
    and unboundedness are reported through the self-dual embedding
    certificates (assuming, as holds for every program built here, that
    the other side of the pair is feasible).
    """
    if program.inconsistent:
        sol = _trouble(program, "inconsistent dependent rows")
        sol.status = SolveStatus.INFEASIBLE
        sol.primal_value = float("-inf")
        sol.dual_value = float("-inf")
        return sol

    n_rows = len(program.rows)
    scalar_blocks = [b for b, d in enumerate(program.blocks) if d == 1]
    matrix_blocks = [b for b, d in enumerate(program.blocks) if d > 1]

    if n_rows == 0:
        # unconstrained: each block maximizes <C_b, X_b> over the cone,
        # which is 0 when C_b has no positive eigenvalue and unbounded
        # otherwise.
        unbounded = False
        for b, c in enumerate(program.objective):
            top = (
                float(np.real(c[0, 0]))
                if program.blocks[b] == 1
                else float(np.linalg.eigvalsh(c)[-1])
            )
            if top > 1e-12:
                unbounded = True
        zeros = tuple(np.zeros((d, d), dtype=np.complex128) for d in program.blocks)
        if unbounded:
            return ConicSolution(
                status=SolveStatus.UNBOUNDED,
                primal_value=float("inf"),
                dual_value=float("inf"),
                primal_blocks=zeros,
                dual_vector=np.zeros(0),
                gap=float("inf"),
                iterations=0,
            )
        val = program.objective_offset
        return ConicSolution(
            status=SolveStatus.OPTIMAL,
            primal_value=val,
            dual_value=val,
            primal_blocks=zeros,
            dual_vector=np.zeros(0),
            gap=0.0,
            iterations=0,
            residual=0.0,
            min_eigenvalue=0.0,
        )

    # cvxopt sees our dual: variables y over rows, cone constraint
    # sum_i y_i A_ib - C_b >= 0 per block.  Columns of G carry the
    # negated half-embedded row coefficients; h carries the negated
    # half-embedded objective.
    col_chunks = []
    h_chunks = []
    rhs = np.array([r for _, r in program.rows], dtype=np.float64)

    for b in scalar_blocks:
        row_vals = np.zeros((1, n_rows))
        for i, (coeffs, _) in enumerate(program.rows):
            c = coeffs.get(b)
            if c is not None:
                row_vals[0, i] = float(np.real(c[0, 0]))
        col_chunks.append(-row_vals)
        h_chunks.append(-np.array([float(np.real(program.objective[b][0, 0]))]))
    for b in matrix_blocks:
        d = program.blocks[b]
        size = (2 * d) ** 2
        block_cols = np.zeros((size, n_rows))
        for i, (coeffs, _) in enumerate(program.rows):
            c = coeffs.get(b)
            if c is not None:
                block_cols[:, i] = _embed_half(c).flatten(order="F")
        col_chunks.append(-block_cols)
        h_chunks.append(-_embed_half(program.objective[b]).flatten(order="F"))

    g_np = np.vstack(col_chunks)
    h_np = np.concatenate(h_chunks)
    dims = {
        "l": len(scalar_blocks),
        "q": [],
        "s": [2 * program.blocks[b] for b in matrix_blocks],
    }

    best = None
    for options in (_SOLVER_OPTIONS, _STRICT_OPTIONS):
        sol = _attempt(
            program, rhs, g_np, h_np, dims, scalar_blocks, matrix_blocks, options
        )
        if sol.status is not SolveStatus.NUMERICAL_TROUBLE:
            return sol
        if best is None or sol.gap < best.gap:
            best = sol
    return best


def _attempt(
    program, rhs, g_np, h_np, dims, scalar_blocks, matrix_blocks, options
) -> ConicSolution:
    n_rows = len(program.rows)
    try:
        raw = _call_conelp(
            _cvxmat(rhs.reshape(-1, 1)),
            _cvxmat(g_np),
            _cvxmat(h_np.reshape(-1, 1)),
            dims,
            options,
        )
    except (ArithmeticError, ValueError, ZeroDivisionError) as exc:
        return _trouble(program, "backend raised: %s" % exc)

    status = raw.get("status", "unknown")
    iterations = int(raw.get("iterations", 0) or 0)

    if status == "primal infeasible":
        zeros = tuple(np.zeros((d, d), dtype=np.complex128) for d in program.blocks)
        return ConicSolution(
            status=SolveStatus.UNBOUNDED,
            primal_value=float("inf"),
            dual_value=float("inf"),
            primal_blocks=zeros,
            dual_vector=np.zeros(n_rows),
            gap=float("inf"),
            iterations=iterations,
            pruned_rows=len(program.dropped_rows),
            message="improving ray certificate",
        )
    if status == "dual infeasible":
        zeros = tuple(np.zeros((d, d), dtype=np.complex128) for d in program.blocks)
        return ConicSolution(
            status=SolveStatus.INFEASIBLE,
            primal_value=float("-inf"),
            dual_value=float("-inf"),
            primal_blocks=zeros,
            dual_vector=np.zeros(n_rows),
            gap=float("inf"),
            iterations=iterations,
            pruned_rows=len(program.dropped_rows),
            message="infeasibility certificate",
        )

    if raw.get("x") is None or raw.get("z") is None:
        return _trouble(program, "backend returned no iterate (%s)" % status, iterations)

    y = np.array(raw["x"]).reshape(-1)
    z = np.array(raw["z"]).reshape(-1)

    blocks = [None] * len(program.blocks)
    offset = 0
    for b in scalar_blocks:
        blocks[b] = np.array([[z[offset] + 0.0j]])
        offset += 1
    for b in matrix_blocks:
        d = program.blocks[b]
        size = (2 * d) ** 2
        zmat = z[offset : offset + size].reshape(2 * d, 2 * d, order="F")
        blocks[b] = _extract(zmat, d)
        offset += size
    blocks = tuple(blocks)

    primal, residual, min_eig = _program_values(program, blocks)
    dual = float(np.dot(rhs, y)) + program.objective_offset
    gap = abs(primal - dual) / max(1.0, abs(primal))

    certified = (
        gap <= GAP_TOL and residual <= RESIDUAL_TOL and min_eig >= EIG_FLOOR
    )
    final = SolveStatus.OPTIMAL if certified else SolveStatus.NUMERICAL_TROUBLE
    message = "" if certified else (
        "certification failed (backend %s): gap=%.3e residual=%.3e mineig=%.3e"
        % (status, gap, residual, min_eig)
    )
    return ConicSolution(
        status=final,
        primal_value=primal,
        dual_value=dual,
        primal_blocks=blocks,
        dual_vector=y,
        gap=gap,
        iterations=iterations,
        residual=residual,
        min_eigenvalue=min_eig,
        pruned_rows=len(program.dropped_rows),
        message=message,
    )
