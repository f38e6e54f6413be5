"""Complex linear solves for the per-step systems.

1D systems are banded and solved directly (LAPACK ``gbsv``, partial
pivoting inside the band). 2D systems change every step, so they go to a
Jacobi-preconditioned BiCGSTAB warm-started from the previous level.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp

logger = logging.getLogger(__name__)


class SingularSystemError(ArithmeticError):
    pass


@dataclass(frozen=True)
class SolveReport:
    iterations: int
    residual_norm: float
    converged: bool


@dataclass
class StepSystem:
    """Sparse complex system ``matrix @ psi^{n+1} = rhs`` for one time step."""

    matrix: sp.csr_matrix
    rhs: np.ndarray

    @property
    def n_unknowns(self) -> int:
        return self.matrix.shape[0]

    def bandwidth(self):
        """``(lower, upper)`` bandwidths of the matrix."""
        coo = self.matrix.tocoo()
        if coo.nnz == 0:
            return 0, 0
        d = coo.col - coo.row
        return int(max(0, -d.min())), int(max(0, d.max()))


def _relative_residual(matrix, x, rhs):
    bnorm = np.linalg.norm(rhs)
    r = np.linalg.norm(rhs - matrix @ x)
    return r / bnorm if bnorm > 0 else r


def solve_banded(system: StepSystem):
    """Direct banded elimination. Returns ``(solution, SolveReport)``."""
    A = system.matrix.tocsr()
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("system must be square")
    lower, upper = system.bandwidth()
    coo = A.tocoo()
    ab = np.zeros((lower + upper + 1, n), dtype=complex)
    ab[upper + coo.row - coo.col, coo.col] = coo.data
    zero_rows = np.diff(A.indptr) == 0
    if np.any(zero_rows):
        raise SingularSystemError(f"row {int(np.argmax(zero_rows))} is empty")
    try:
        x = scipy.linalg.solve_banded((lower, upper), ab, system.rhs, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(str(exc)) from exc
    if not np.all(np.isfinite(x)):
        raise SingularSystemError("elimination produced non-finite values")
    res = _relative_residual(A, x, system.rhs)
    return x, SolveReport(0, float(res), True)


def _bicgstab(A, b, x, inv_diag, tol, max_iter):
    """Right-preconditioned BiCGSTAB on the unpreconditioned residual.

    Returns ``(x, iterations, relative residual, breakdown)``.
    """
    bnorm = np.linalg.norm(b)
    if bnorm == 0:
        return np.zeros_like(b), 0, 0.0, False
    r = b - A @ x
    res = np.linalg.norm(r) / bnorm
    if res <= tol:
        return x, 0, res, False
    r_hat = r.copy()
    rho = alpha = omega = 1.0 + 0j
    v = np.zeros_like(b)
    p = np.zeros_like(b)
    tiny = np.finfo(float).tiny ** 0.5
    for it in range(1, max_iter + 1):
        rho_new = np.vdot(r_hat, r)
        if abs(rho_new) < tiny * bnorm**2:
            return x, it - 1, res, True
        beta = (rho_new / rho) * (alpha / omega)
        rho = rho_new
        p = r + beta * (p - omega * v)
        p_hat = inv_diag * p
        v = A @ p_hat
        denom = np.vdot(r_hat, v)
        if abs(denom) < tiny * bnorm**2:
            return x, it - 1, res, True
        alpha = rho / denom
        s = r - alpha * v
        if np.linalg.norm(s) / bnorm <= tol:
            x = x + alpha * p_hat
            return x, it, _relative_residual(A, x, b), False
        s_hat = inv_diag * s
        t = A @ s_hat
        tt = np.vdot(t, t).real
        if tt == 0:
            return x, it, res, True
        omega = np.vdot(t, s) / tt
        x = x + alpha * p_hat + omega * s_hat
        r = s - omega * t
        res = np.linalg.norm(r) / bnorm
        if res <= tol:
            # confirm against the true residual before declaring convergence
            true_res = _relative_residual(A, x, b)
            if true_res <= tol:
                return x, it, true_res, False
            r = b - A @ x
            res = true_res
        if omega == 0:
            return x, it, res, True
    return x, max_iter, res, False


def solve_sparse(system: StepSystem, tol=1e-10, max_iter=500, guess=None):
    """Jacobi-preconditioned BiCGSTAB. Returns ``(solution, SolveReport)``.

    On breakdown the iteration restarts once from a zero guess.
    """
    if not 0 < tol < 1:
        raise ValueError("tol must lie in (0, 1)")
    A = system.matrix.tocsr()
    b = np.asarray(system.rhs, dtype=complex)
    diag = A.diagonal()
    inv_diag = np.where(diag != 0, 1.0 / np.where(diag != 0, diag, 1.0), 1.0)
    x0 = np.zeros_like(b) if guess is None else np.asarray(guess, dtype=complex).ravel().copy()
    x, its, res, breakdown = _bicgstab(A, b, x0, inv_diag, tol, max_iter)
    if breakdown and guess is not None:
        logger.debug("BiCGSTAB breakdown after %d iterations; restarting from zero", its)
        x, its2, res, breakdown = _bicgstab(A, b, np.zeros_like(b), inv_diag, tol, max_iter)
        its += its2
    converged = bool(res <= tol) and np.all(np.isfinite(x))
    return x, SolveReport(int(its), float(res), bool(converged))
