"""Sparse linear solves: direct LU for small systems, BiCGStab above."""

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from ..errors import SolverFailure

#largest system solved by direct sparse LU
_DIRECT_LIMIT = 20_000
_RTOL = 1e-10
_MAXITER = 10_000


def solve_sparse(A, b):
    """Solve A x = b with relative residual <= 1e-10.

    Direct sparse LU for n <= 20 000 unknowns; otherwise BiCGStab with a
    diagonal (Jacobi) preconditioner, which handles the non-symmetric K of
    advective problems. Raises SolverFailure with iteration diagnostics on
    breakdown or non-convergence.
    """
    A = sp.csr_matrix(A)
    b = np.asarray(b, float)
    n = A.shape[0]
    if A.shape[0] != A.shape[1] or b.shape != (n,):
        raise ValueError("solve_sparse needs square A and conforming b")
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return np.zeros(n)
    if n <= _DIRECT_LIMIT:
        try:
            x = spla.splu(A.tocsc()).solve(b)
        except RuntimeError as exc:
            raise SolverFailure(f"sparse LU failed: {exc}") from exc
        resid = np.linalg.norm(A @ x - b)
        if not np.isfinite(resid) or resid > _RTOL * max(1.0, bnorm):
            raise SolverFailure(
                f"direct solve residual {resid:.3e} exceeds "
                f"{_RTOL:g}*max(1, ||b||)"
            )
        return x
    diag = A.diagonal()
    if np.any(diag == 0.0):
        raise SolverFailure("zero diagonal entry; Jacobi preconditioner undefined")
    precond = spla.LinearOperator((n, n), matvec=lambda r: r / diag)
    x, info = spla.bicgstab(A, b, rtol=_RTOL, atol=0.0, maxiter=_MAXITER,
                            M=precond)
    if info != 0:
        raise SolverFailure(
            f"BiCGStab {'breakdown' if info < 0 else 'non-convergence'} "
            f"(info={info}) after at most {_MAXITER} iterations; "
            f"residual {np.linalg.norm(A @ x - b):.3e}"
        )
    return x
