"""Reachability and observability Gramians of BQO systems.

Full Gramians solve generalized Lyapunov equations by fixed-point iteration:

    P   :  A P + P A^T + sum N_k P N_k^T + B B^T = 0
    Q^S :  A^T Q + Q A + sum N_k^T Q N_k + sum M_j P M_j + C^T C = 0
    Q^A :  A^T Q + Q A + sum M_j P M_j + C^T C = 0
    Q^M :  as Q^S with N_k replaced by phi_k N_k

Truncated Gramians keep only the leading terms of the underlying series and
need a fixed, small number of standard Lyapunov solves.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import NotPsd
from .lyapunov import (
    LEFT,
    RIGHT,
    SchurLyapunov,
    SolverOptions,
    residual_norm,
    solve_generalized_fixed_point,
)
from .model import existence_margins

PSD_TOL = 1e-10
KERNEL_TOL = 1e-10

VARIANTS = ("S", "A", "M", "TS", "TP", "TA", "reach", "Treach")
_ALIASES = {"T-S": "TS", "T-P": "TP", "T-A": "TA", "T-reach": "Treach",
            "QS": "S", "QA": "A", "QM": "M"}


@dataclass
class GramianSet:
    P: np.ndarray
    Q: Optional[np.ndarray]
    variant: str
    residuals: dict = field(default_factory=dict)
    phi: Optional[list] = None
    # intermediate matrices of the truncated algorithms (P1, Qhat, ...)
    extras: dict = field(default_factory=dict)
    iterations: dict = field(default_factory=dict)

    @property
    def uses_truncated_reach(self):
        return self.variant in ("TS", "TP", "TA", "Treach")


def normalize_variant(variant):
    v = _ALIASES.get(variant, variant)
    if v not in VARIANTS:
        raise ValueError(f"unknown Gramian variant {variant!r}; choose from {VARIANTS}")
    return v


def check_psd(X, name="X", tol=PSD_TOL):
    w = np.linalg.eigvalsh(X)
    scale = max(abs(w[-1]), abs(w[0])) if w.size else 0.0
    if w.size and w[0] < -tol * scale:
        raise NotPsd(f"{name}: lambda_min={w[0]:.3e} < -{tol:g} * {scale:.3e}")
    return X


def _mpm(sys, P):
    out = np.zeros((sys.n, sys.n))
    for M in sys.Ms:
        out += M @ P @ M
    return out


def _ctc(sys):
    return sys.C.T @ sys.C


def _bbt(sys):
    return sys.B @ sys.B.T


def _npn(Ns, X):
    out = np.zeros_like(X)
    for N in Ns:
        out += N @ X @ N.T
    return out


def _ntqn(Ns, X):
    out = np.zeros_like(X)
    for N in Ns:
        out += N.T @ X @ N
    return out


def _warn_margin(sys, which):
    cert = existence_margins(sys)
    ok = {"P": cert.exists_P, "QS": cert.exists_QS, "QA": cert.exists_QA}[which]
    if not ok:
        g = {"P": cert.gamma_P, "QS": cert.gamma_QS, "QA": cert.gamma_QA}[which]
        warnings.warn(
            f"existence margin for {which} fails ({g:.3g} >= {cert.threshold:.3g}); "
            "the condition is only sufficient, attempting the solve anyway",
            RuntimeWarning, stacklevel=3)
    return cert


def _solver(sys, solver):
    return solver if solver is not None else SchurLyapunov(sys.A)


def reach_gramian(sys, opts=None, solver=None, check_margin=True, full_output=False):
    """Reachability Gramian ``P``."""
    if check_margin:
        _warn_margin(sys, "P")
    sol = solve_generalized_fixed_point(sys.A, sys.Ns, _bbt(sys), RIGHT, opts, _solver(sys, solver))
    check_psd(sol.X, "P")
    return sol if full_output else sol.X


def obs_gramian_standard(sys, P, opts=None, solver=None, check_margin=True, full_output=False):
    """Standard observability Gramian ``Q^S`` (equal to ``Q^P`` when unique)."""
    if check_margin:
        _warn_margin(sys, "QS")
    F = _mpm(sys, P) + _ctc(sys)
    sol = solve_generalized_fixed_point(sys.A, sys.Ns, F, LEFT, opts, _solver(sys, solver))
    check_psd(sol.X, "Q^S")
    return sol if full_output else sol.X


def obs_gramian_alternative(sys, P, solver=None):
    """Alternative observability Gramian ``Q^A``: one standard Lyapunov solve."""
    Q = _solver(sys, solver).solve(_mpm(sys, P) + _ctc(sys), LEFT)
    return check_psd(Q, "Q^A")


def obs_gramian_mixed(sys, P, phi, opts=None, solver=None, full_output=False):
    """Mixed observability Gramian ``Q^M`` with weights ``phi_k`` in [0, 1]."""
    phi = [float(f) for f in np.atleast_1d(phi)]
    if len(phi) != sys.m:
        raise ValueError(f"need {sys.m} phi values, got {len(phi)}")
    if any(not 0 <= f <= 1 for f in phi):
        raise ValueError("phi entries must lie in [0, 1]")
    Ns = [f * N for f, N in zip(phi, sys.Ns)]
    F = _mpm(sys, P) + _ctc(sys)
    sol = solve_generalized_fixed_point(sys.A, Ns, F, LEFT, opts, _solver(sys, solver))
    check_psd(sol.X, "Q^M")
    return sol if full_output else sol.X


@dataclass
class SeriesTerms:
    """Leading terms of the Gramian series.

    ``QB_terms[i-1]`` is ``Q^B_i``; ``Q_cross[(i, j)]`` is ``Q_{i,j}``, kept for
    ``i + j <= depth + 1``.
    """

    P_terms: list
    QS_terms: list
    QB_terms: list
    Q_cross: dict
    depth: int

    def p_partial(self, level):
        return sum(self.P_terms[:level])

    def qs_partial(self, level):
        return sum(self.QS_terms[:level])

    def qp_partial(self, level):
        """``sum_{i<=level} Q^B_i + sum_{i+j<=level+1} Q_{i,j}``."""
        if not 1 <= level <= self.depth:
            raise ValueError(f"level must lie in [1, {self.depth}]")
        out = sum(self.QB_terms[:level])
        for (i, j), X in sorted(self.Q_cross.items()):
            if i + j <= level + 1:
                out = out + X
        return out


def series_terms(sys, depth=8, solver=None, stop_rtol=1e-12):
    """Series terms computed with standard Lyapunov solves only.

    Stops early once every newly added term is below ``stop_rtol`` times the
    norm of the corresponding partial sum.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    lyap = _solver(sys, solver)
    Ns = sys.Ns
    P = [lyap.solve(_bbt(sys), RIGHT)]
    QS = [lyap.solve(_ctc(sys), LEFT)]
    QB = [QS[0].copy()]
    cross = {}

    def add_cross(level):
        # Q_{i,j} with i + j == level
        for i in range(1, level):
            j = level - i
            if i == 1:
                cross[(1, j)] = lyap.solve(_mpm(sys, P[j - 1]), LEFT)
            else:
                cross[(i, j)] = lyap.solve(_ntqn(Ns, cross[(i - 1, j)]), LEFT)

    reached = 1
    for level in range(2, depth + 1):
        P.append(lyap.solve(_npn(Ns, P[-1]), RIGHT))
        QS.append(lyap.solve(_ntqn(Ns, QS[-1]) + _mpm(sys, P[-2]), LEFT))
        QB.append(lyap.solve(_ntqn(Ns, QB[-1]), LEFT))
        add_cross(level)
        reached = level
        new = [P[-1], QS[-1], QB[-1]] + [cross[(i, level - i)] for i in range(1, level)]
        ref = max(np.linalg.norm(sum(P)), np.linalg.norm(sum(QS)), np.finfo(float).tiny)
        if max(np.linalg.norm(X) for X in new) < stop_rtol * ref:
            break
    add_cross(reached + 1)
    return SeriesTerms(P, QS, QB, cross, reached)


def truncated_reach(sys, solver=None):
    """Truncated reachability Gramian: returns ``(P_1, P_T)`` with ``P_T = P_1 + P_2``."""
    lyap = _solver(sys, solver)
    BBt = _bbt(sys)
    P1 = lyap.solve(BBt, RIGHT)
    PT = lyap.solve(_npn(sys.Ns, P1) + BBt, RIGHT)
    return check_psd(P1, "P_1"), check_psd(PT, "P_T")


def truncated_obs_standard(sys, P1, PT, solver=None, return_intermediate=False):
    """``Q^S_T = Q^S_1 + Q^S_2 + Q^S_3`` via three chained standard solves."""
    lyap = _solver(sys, solver)
    CtC = _ctc(sys)
    Q1 = lyap.solve(CtC, LEFT)
    Qhat = lyap.solve(_ntqn(sys.Ns, Q1) + _mpm(sys, P1) + CtC, LEFT)
    QT = lyap.solve(_ntqn(sys.Ns, Qhat) + _mpm(sys, PT) + CtC, LEFT)
    check_psd(QT, "Q^S_T")
    if return_intermediate:
        return QT, {"QS1": Q1, "Qhat": Qhat}
    return QT


def truncated_obs_padhi(sys, PT, solver=None, return_intermediate=False):
    """Two-solve truncated Gramian ``Q^P_T``; its first step equals ``Q^A_T``."""
    lyap = _solver(sys, solver)
    F = _mpm(sys, PT) + _ctc(sys)
    Qhat = lyap.solve(F, LEFT)
    QT = lyap.solve(_ntqn(sys.Ns, Qhat) + F, LEFT)
    check_psd(QT, "Q^P_T")
    if return_intermediate:
        return QT, {"Qhat": Qhat}
    return QT


def truncated_obs_alternative(sys, PT, solver=None):
    """``Q^A_T``: the alternative-Gramian equation with ``P_T`` in place of ``P``."""
    Q = _solver(sys, solver).solve(_mpm(sys, PT) + _ctc(sys), LEFT)
    return check_psd(Q, "Q^A_T")


def _reach_residuals(sys, P, P1=None, PT=None):
    out = {}
    if P is not None:
        out["P"] = residual_norm(sys.A, sys.Ns, _bbt(sys), P, RIGHT)
    if P1 is not None:
        out["P1"] = residual_norm(sys.A, [], _bbt(sys), P1, RIGHT)
        out["PT"] = residual_norm(sys.A, [], _npn(sys.Ns, P1) + _bbt(sys), PT, RIGHT)
    return out


def compute_gramians(sys, variant, phi=None, opts=None):
    """Compute the Gramian pair used by one balanced-truncation variant.

    ``S``, ``A``, ``M`` pair the full ``P`` with ``Q^S``, ``Q^A``, ``Q^M``;
    ``TS``, ``TP``, ``TA`` pair ``P_T`` with the truncated observability
    Gramians; ``reach`` and ``Treach`` return only ``P`` resp. ``P_T``.
    Residuals of every equation solved on the way are recorded.
    """
    variant = normalize_variant(variant)
    opts = opts or SolverOptions()
    lyap = SchurLyapunov(sys.A)
    CtC = _ctc(sys)
    res, extras, iters = {}, {}, {}

    if variant in ("S", "A", "M", "reach"):
        sol = reach_gramian(sys, opts, lyap, full_output=True)
        P = sol.X
        iters["P"] = sol.iterations
        res.update(_reach_residuals(sys, P))
        Q = None
        if variant == "S":
            qsol = obs_gramian_standard(sys, P, opts, lyap, full_output=True)
            Q, iters["Q"] = qsol.X, qsol.iterations
            res["Q"] = residual_norm(sys.A, sys.Ns, _mpm(sys, P) + CtC, Q, LEFT)
        elif variant == "A":
            Q = obs_gramian_alternative(sys, P, lyap)
            res["Q"] = residual_norm(sys.A, [], _mpm(sys, P) + CtC, Q, LEFT)
        elif variant == "M":
            if phi is None:
                raise ValueError("variant M needs phi")
            qsol = obs_gramian_mixed(sys, P, phi, opts, lyap, full_output=True)
            Q, iters["Q"] = qsol.X, qsol.iterations
            Ns = [f * N for f, N in zip(np.atleast_1d(phi), sys.Ns)]
            res["Q"] = residual_norm(sys.A, Ns, _mpm(sys, P) + CtC, Q, LEFT)
            phi = [float(f) for f in np.atleast_1d(phi)]
        return GramianSet(P, Q, variant, res, phi if variant == "M" else None, extras, iters)

    P1, PT = truncated_reach(sys, lyap)
    extras["P1"] = P1
    res.update(_reach_residuals(sys, None, P1, PT))
    Q = None
    if variant == "TS":
        Q, inter = truncated_obs_standard(sys, P1, PT, lyap, return_intermediate=True)
        extras.update(inter)
        res["QS1"] = residual_norm(sys.A, [], CtC, inter["QS1"], LEFT)
        res["Qhat"] = residual_norm(
            sys.A, [], _ntqn(sys.Ns, inter["QS1"]) + _mpm(sys, P1) + CtC, inter["Qhat"], LEFT)
        res["Q"] = residual_norm(
            sys.A, [], _ntqn(sys.Ns, inter["Qhat"]) + _mpm(sys, PT) + CtC, Q, LEFT)
    elif variant == "TP":
        Q, inter = truncated_obs_padhi(sys, PT, lyap, return_intermediate=True)
        extras.update(inter)
        F = _mpm(sys, PT) + CtC
        res["Qhat"] = residual_norm(sys.A, [], F, inter["Qhat"], LEFT)
        res["Q"] = residual_norm(sys.A, [], _ntqn(sys.Ns, inter["Qhat"]) + F, Q, LEFT)
    elif variant == "TA":
        Q = truncated_obs_alternative(sys, PT, lyap)
        res["Q"] = residual_norm(sys.A, [], _mpm(sys, PT) + CtC, Q, LEFT)
    return GramianSet(PT, Q, variant, res, None, extras, iters)


def numerical_kernel(X, tol=KERNEL_TOL):
    """Orthonormal basis of eigenvectors with eigenvalue <= ``tol * lambda_max``."""
    w, V = np.linalg.eigh(0.5 * (X + X.T))
    lmax = max(w[-1], 0.0) if w.size else 0.0
    return V[:, w <= tol * lmax]
