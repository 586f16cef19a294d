"""Standard and generalized Lyapunov equations.

Right-side equations read ``A X + X A^T + sum_k N_k X N_k^T + F = 0``, left-side
equations ``A^T X + X A + sum_k N_k^T X N_k + F = 0``.  The standard solver is a
Bartels-Stewart method: the real Schur form of ``A`` is computed once and the
quasi-triangular Sylvester equation is back-substituted with LAPACK ``trsyl``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy.linalg import lapack

from .errors import (
    DimTooLarge,
    NoConvergence,
    NotPsd,
    NotStable,
    ShapeMismatch,
    SingularDecomposition,
    SingularOperator,
)

RIGHT = "right"
LEFT = "left"
ORACLE_HARD_CAP = 64


@dataclass(frozen=True)
class SolverOptions:
    residual_tol: float = 1e-8
    rel_diff_tol: float = 1e-7
    max_iter: int = 50
    oracle_dim_cap: int = ORACLE_HARD_CAP

    def __post_init__(self):
        if not self.residual_tol > 0:
            raise ValueError("residual_tol must be positive")
        if not self.rel_diff_tol >= 0:
            # 0 disables the stall criterion
            raise ValueError("rel_diff_tol must be nonnegative")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not 1 <= self.oracle_dim_cap <= ORACLE_HARD_CAP:
            raise ValueError(f"oracle_dim_cap must lie in [1, {ORACLE_HARD_CAP}]")


@dataclass
class LyapunovSolution:
    X: np.ndarray
    relative_residual: float
    iterations: int
    converged: bool
    # one of "residual", "rel_diff", "max_iter", "direct"
    stopped_by: str = "direct"


def _check_side(side):
    if side not in (RIGHT, LEFT):
        raise ValueError(f"side must be 'right' or 'left', got {side!r}")


def _symmetrize(X):
    return 0.5 * (X + X.T)


def check_stable(A):
    """Raise :class:`NotStable` unless every eigenvalue of ``A`` has Re < 0."""
    eig = np.linalg.eigvals(A)
    if eig.size and np.max(eig.real) >= 0:
        raise NotStable(f"spectral abscissa {np.max(eig.real):.3e} >= 0")
    return eig


def _as_square(A, name="A"):
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ShapeMismatch(f"{name} must be square, got shape {A.shape}")
    return A


def _check_operands(A, Ns, F, X=None):
    A = _as_square(A)
    n = A.shape[0]
    F = np.asarray(F, dtype=float)
    if F.shape != (n, n):
        raise ShapeMismatch(f"F has shape {F.shape}, expected {(n, n)}")
    Ns = [np.asarray(N, dtype=float) for N in (Ns or [])]
    for k, N in enumerate(Ns):
        if N.shape != (n, n):
            raise ShapeMismatch(f"N[{k}] has shape {N.shape}, expected {(n, n)}")
    if X is not None:
        X = np.asarray(X, dtype=float)
        if X.shape != (n, n):
            raise ShapeMismatch(f"X has shape {X.shape}, expected {(n, n)}")
    return A, Ns, F, X


def apply_pi(Ns, X, side):
    """Bilinear coupling term ``sum N X N^T`` (right) or ``sum N^T X N`` (left)."""
    out = np.zeros_like(X)
    # fixed summation order keeps results bit-reproducible
    if side == RIGHT:
        for N in Ns:
            out += N @ X @ N.T
    else:
        for N in Ns:
            out += N.T @ X @ N
    return out


def residual_norm(A, Ns, F, X, side=RIGHT):
    """Relative spectral-norm residual of the (generalized) Lyapunov equation.

    Returns ``||L_A(X) + Pi(X) + F||_2 / ||F||_2``; when ``F`` vanishes the
    absolute residual is returned instead.
    """
    _check_side(side)
    A, Ns, F, X = _check_operands(A, Ns, F, X)
    if side == RIGHT:
        R = A @ X + X @ A.T
    else:
        R = A.T @ X + X @ A
    R = R + apply_pi(Ns, X, side) + F
    nf = np.linalg.norm(F, 2)
    nr = np.linalg.norm(R, 2)
    return float(nr / nf) if nf > 0 else float(nr)


class SchurLyapunov:
    """Bartels-Stewart solver with the Schur form of ``A`` cached.

    Repeated solves with the same ``A`` (as in a fixed-point iteration) only
    pay for the quasi-triangular back-substitution.
    """

    def __init__(self, A):
        A = _as_square(A)
        check_stable(A)
        self.A = A
        self.T, self.Z = sla.schur(A, output="real")
        self._trsyl = lapack.get_lapack_funcs("trsyl", (self.T,))

    def solve(self, F, side=RIGHT):
        _check_side(side)
        F = np.asarray(F, dtype=float)
        T, Z = self.T, self.Z
        rhs = -(Z.T @ F @ Z)
        if side == RIGHT:
            # T Y + Y T^T = rhs, X = Z Y Z^T
            Y, scale, info = self._trsyl(T, T, rhs, trana="N", tranb="T")
        else:
            Y, scale, info = self._trsyl(T, T, rhs, trana="T", tranb="N")
        if info < 0:
            raise ValueError(f"trsyl: illegal argument {-info}")
        if info > 0:
            raise SingularDecomposition(
                "Schur back-substitution met a near-zero pivot (lambda_i + lambda_j ~ 0)")
        X = Z @ (Y / scale) @ Z.T
        return _symmetrize(X)


def solve_standard(A, F, side=RIGHT, residual_tol=1e-8):
    """Solve ``A X + X A^T + F = 0`` (right) or ``A^T X + X A + F = 0`` (left)."""
    A, _, F, _ = _check_operands(A, [], F)
    X = SchurLyapunov(A).solve(F, side)
    res = residual_norm(A, [], F, X, side)
    return LyapunovSolution(X, res, 1, res <= residual_tol, "direct")


def solve_generalized_fixed_point(A, Ns, F, side=RIGHT, opts=None, solver=None,
                                  callback=None):
    """Fixed-point iteration for the generalized Lyapunov equation.

    The seed solves the standard equation with the same ``F``; each sweep
    then solves ``L_A(X_l) = -(F + Pi(X_{l-1}))``.  For psd ``F`` the iterates
    are the partial sums of the Gramian series and grow monotonically.

    ``callback(l, X_l)`` is invoked after every solve (``l`` starts at 1).
    Raises :class:`NoConvergence` when ``max_iter`` solves neither reach
    ``residual_tol`` nor stall below ``rel_diff_tol``.
    """
    opts = opts or SolverOptions()
    _check_side(side)
    A, Ns, F, _ = _check_operands(A, Ns, F)
    solver = solver or SchurLyapunov(A)

    X = solver.solve(F, side)
    if callback is not None:
        callback(1, X)
    res = residual_norm(A, Ns, F, X, side)
    it = 1
    if res <= opts.residual_tol:
        return LyapunovSolution(X, res, it, True, "residual")
    while it < opts.max_iter:
        X_new = solver.solve(F + apply_pi(Ns, X, side), side)
        it += 1
        if callback is not None:
            callback(it, X_new)
        nx = np.linalg.norm(X_new)
        diff = np.linalg.norm(X_new - X) / nx if nx > 0 else 0.0
        X = X_new
        res = residual_norm(A, Ns, F, X, side)
        if not np.isfinite(res):
            break
        if res <= opts.residual_tol:
            return LyapunovSolution(X, res, it, True, "residual")
        if diff <= opts.rel_diff_tol:
            warnings.warn(
                f"fixed-point iteration stalled (rel. change {diff:.2e}) with "
                f"residual {res:.2e} above tolerance", RuntimeWarning, stacklevel=2)
            return LyapunovSolution(X, res, it, False, "rel_diff")
    sol = LyapunovSolution(X, res, it, False, "max_iter")
    raise NoConvergence(
        f"no convergence after {it} iterations, last residual {res:.3e}", sol)


def _kron_operator(A, Ns, side):
    n = A.shape[0]
    I = np.eye(n)
    Aop = A if side == RIGHT else A.T
    K = np.kron(I, Aop) + np.kron(Aop, I)
    for N in Ns:
        Nop = N if side == RIGHT else N.T
        K += np.kron(Nop, Nop)
    return K


def solve_generalized_kron_oracle(A, Ns, F, side=RIGHT, dim_cap=ORACLE_HARD_CAP):
    """Dense reference solve of the vectorized generalized Lyapunov equation.

    Builds the ``n^2 x n^2`` operator ``I (x) A + A (x) I + sum N (x) N`` (or its
    transposed-operator analogue for the left side).  Intended for verification
    only.
    """
    _check_side(side)
    A, Ns, F, _ = _check_operands(A, Ns, F)
    n = A.shape[0]
    if n > min(dim_cap, ORACLE_HARD_CAP):
        raise DimTooLarge(f"n={n} exceeds oracle cap {min(dim_cap, ORACLE_HARD_CAP)}")
    K = _kron_operator(A, Ns, side)
    lu, piv = sla.lu_factor(K, check_finite=True)
    d = np.abs(np.diag(lu))
    if d.min() <= n * n * np.finfo(float).eps * d.max():
        raise SingularOperator("vectorized Lyapunov operator is singular")
    x = sla.lu_solve((lu, piv), -F.reshape(-1, order="F"))
    X = _symmetrize(x.reshape(n, n, order="F"))
    res = residual_norm(A, Ns, F, X, side)
    return LyapunovSolution(X, res, 1, True, "direct")


def spectral_radius_certificate(A, Ns, dim_cap=ORACLE_HARD_CAP):
    """Spectral radius of ``-L_A^{-1} Pi``; the equation is uniquely solvable by
    fixed-point iteration iff it is below one."""
    A = _as_square(A)
    n = A.shape[0]
    if n > min(dim_cap, ORACLE_HARD_CAP):
        raise DimTooLarge(f"n={n} exceeds oracle cap {min(dim_cap, ORACLE_HARD_CAP)}")
    check_stable(A)
    Ns = [np.asarray(N, dtype=float) for N in (Ns or [])]
    if not Ns:
        return 0.0, True
    I = np.eye(n)
    L = np.kron(I, A) + np.kron(A, I)
    Pi = sum(np.kron(N, N) for N in Ns)
    K = -np.linalg.solve(L, Pi)
    rho = float(np.max(np.abs(np.linalg.eigvals(K))))
    return rho, rho < 1.0


def psd_factor(X, clip_tol=None):
    """Low-rank factor ``L`` with ``L L^T ~= X`` for a numerically psd ``X``.

    Eigenvalues at or below ``clip_tol * lambda_max`` are treated as zero and
    their eigenvectors dropped; columns are ordered by decreasing eigenvalue.
    The default ``clip_tol`` is ``n * eps``.
    """
    X = _as_square(X, "X")
    n = X.shape[0]
    if clip_tol is None:
        clip_tol = max(n, 1) * np.finfo(float).eps
    w, V = np.linalg.eigh(_symmetrize(X))
    if n == 0 or not np.any(w):
        return np.zeros((n, 0))
    lmax = w[-1]
    if lmax <= 0 or w[0] < -clip_tol * lmax:
        raise NotPsd(f"lambda_min={w[0]:.3e} below -{clip_tol:.1e} * lambda_max={lmax:.3e}")
    keep = w > clip_tol * lmax
    w, V = w[keep][::-1], V[:, keep][:, ::-1]
    return V * np.sqrt(w)
