"""Bilinear systems with quadratic outputs (BQO systems).

    x' = A x + sum_k N_k x u_k + B u,      x(0) = 0
    y_j = (C x)_j + x^T M_j x,             j = 1..p
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .errors import BadGamma, NonFinite, NotStable, ShapeMismatch, VerificationFailed


def _frozen(X):
    X = np.array(X, dtype=float)
    X.flags.writeable = False
    return X


@dataclass(frozen=True, eq=False)
class BqoSystem:
    """Immutable BQO realization.

    ``B`` and ``Ns`` are the operating matrices, i.e. already multiplied by
    ``gamma_applied``; the unscaled originals are kept so that repeated input
    scaling stays exact.  Construct through :func:`build`.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    Ns: tuple
    Ms: tuple
    gamma_applied: float = 1.0
    B_unscaled: np.ndarray = field(default=None, repr=False)
    Ns_unscaled: tuple = field(default=None, repr=False)

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def m(self):
        return self.B.shape[1]

    @property
    def p(self):
        return self.C.shape[0]

    @property
    def dims(self):
        return self.n, self.m, self.p

    def n_stack(self):
        """Horizontal concatenation ``[N_1 ... N_m]``."""
        return np.hstack(self.Ns) if self.Ns else np.zeros((self.n, 0))

    def nt_stack(self):
        """Horizontal concatenation ``[N_1^T ... N_m^T]``."""
        return np.hstack([N.T for N in self.Ns]) if self.Ns else np.zeros((self.n, 0))

    def m_stack(self):
        """Horizontal concatenation ``[M_1 ... M_p]``."""
        return np.hstack(self.Ms) if self.Ms else np.zeros((self.n, 0))

    def output(self, x):
        """Output ``y`` for a state vector ``x`` (or an ``(n, T)`` array of states)."""
        x = np.asarray(x, dtype=float)
        lin = self.C @ x
        quad = np.array([np.einsum("i...,ij,j...->...", x, M, x) for M in self.Ms])
        return lin + quad

    def unscaled(self):
        """Realization for the original input, i.e. with ``gamma_applied = 1``."""
        return _make(self.A, self.B_unscaled, self.C, self.Ns_unscaled, self.Ms, 1.0)


def _make(A, B0, C, Ns0, Ms, gamma):
    if gamma == 1.0:
        B, Ns = B0, tuple(Ns0)
    else:
        B = B0 * gamma
        Ns = tuple(N * gamma for N in Ns0)
    return BqoSystem(
        A=_frozen(A), B=_frozen(B), C=_frozen(C),
        Ns=tuple(_frozen(N) for N in Ns), Ms=tuple(_frozen(M) for M in Ms),
        gamma_applied=float(gamma),
        B_unscaled=_frozen(B0), Ns_unscaled=tuple(_frozen(N) for N in Ns0),
    )


def build(A, B, C, Ns, Ms, gamma_applied=1.0):
    """Validate a quintuple and return a :class:`BqoSystem`.

    ``B`` and ``Ns`` are the unscaled matrices; ``gamma_applied`` multiplies
    them (see :func:`scale_input`).  Each ``M_j`` is replaced by its
    symmetric part.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    n = A.shape[0]
    if A.ndim != 2 or A.shape != (n, n):
        raise ShapeMismatch(f"A must be square, got {A.shape}")
    B = np.asarray(B, dtype=float)
    if B.ndim < 2:
        B = B.reshape(n, -1) if B.size else np.zeros((n, 0))
    C = np.asarray(C, dtype=float)
    if C.ndim < 2:
        C = C.reshape(-1, n) if C.size else np.zeros((0, n))
    if B.shape[0] != n:
        raise ShapeMismatch(f"B has {B.shape[0]} rows, expected {n}")
    if C.shape[1] != n:
        raise ShapeMismatch(f"C has {C.shape[1]} columns, expected {n}")
    m, p = B.shape[1], C.shape[0]
    Ns = [np.atleast_2d(np.asarray(N, dtype=float)) for N in Ns]
    Ms = [np.atleast_2d(np.asarray(M, dtype=float)) for M in Ms]
    if len(Ns) != m:
        raise ShapeMismatch(f"got {len(Ns)} N matrices for m={m} inputs")
    if len(Ms) != p:
        raise ShapeMismatch(f"got {len(Ms)} M matrices for p={p} outputs")
    for k, N in enumerate(Ns):
        if N.shape != (n, n):
            raise ShapeMismatch(f"N[{k}] has shape {N.shape}, expected {(n, n)}")
    for j, M in enumerate(Ms):
        if M.shape != (n, n):
            raise ShapeMismatch(f"M[{j}] has shape {M.shape}, expected {(n, n)}")
    for name, X in [("A", A), ("B", B), ("C", C)] + \
            [(f"N[{k}]", N) for k, N in enumerate(Ns)] + \
            [(f"M[{j}]", M) for j, M in enumerate(Ms)]:
        if not np.all(np.isfinite(X)):
            raise NonFinite(f"{name} has non-finite entries")
    if not 0 < gamma_applied <= 1:
        raise BadGamma(f"gamma_applied must lie in (0, 1], got {gamma_applied}")
    Ms = [0.5 * (M + M.T) for M in Ms]
    return _make(A, B, C, Ns, Ms, gamma_applied)


def scale_input(sys, gamma):
    """Input scaling ``u -> u / gamma``: ``B`` and every ``N_k`` get multiplied by gamma."""
    if not 0 < gamma <= 1:
        raise BadGamma(f"gamma must lie in (0, 1], got {gamma}")
    return _make(sys.A, sys.B_unscaled, sys.C, sys.Ns_unscaled, sys.Ms,
                 sys.gamma_applied * gamma)


def _decay_profile(A, alpha, ts):
    return np.array([np.linalg.norm(expm(A * t), 2) * np.exp(alpha * t) for t in ts])


def _sample_grid(alpha, t_max=20.0, num=120):
    return np.geomspace(1e-3 / alpha, t_max / alpha, num)


def verify_decay_bound(A, alpha, beta, t_max=20.0, num=120):
    """Check ``||e^{At}|| e^{alpha t} <= beta (1 + 1e-8)`` on a log-spaced grid."""
    vals = _decay_profile(np.asarray(A, dtype=float), alpha, _sample_grid(alpha, t_max, num))
    return bool(np.all(vals <= beta * (1 + 1e-8)))


def stability_params(A, max_retries=10):
    """Decay rate and transient bound ``(alpha, beta)`` with ``||e^{At}|| <= beta e^{-alpha t}``.

    Normal ``A`` gives ``beta = 1``.  Otherwise, for diagonalizable ``A``, ``alpha`` is minus the spectral abscissa and ``beta``
    the 2-norm condition number of the eigenvector matrix.  The pair is checked
    by sampling; on failure (or for numerically defective ``A``) ``alpha`` is
    shrunk by 0.9 and ``beta`` is taken as the sampled supremum, which must
    then also bound a grid twice as long.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    eig, V = np.linalg.eig(A)
    abscissa = float(np.max(eig.real))
    if abscissa >= 0:
        raise NotStable(f"spectral abscissa {abscissa:.3e} >= 0")
    alpha = -abscissa
    if np.linalg.norm(A @ A.T - A.T @ A) <= 1e-12 * np.linalg.norm(A) ** 2:
        # normal matrix: ||e^{At}|| = e^{-alpha t} exactly
        if verify_decay_bound(A, alpha, 1.0):
            return alpha, 1.0
    kappa = np.linalg.cond(V)
    if np.isfinite(kappa) and kappa < 1e8:
        beta = max(float(kappa), 1.0)
        if verify_decay_bound(A, alpha, beta):
            return alpha, beta
    for _ in range(max_retries):
        alpha *= 0.9
        beta = max(1.0, float(_decay_profile(A, alpha, _sample_grid(alpha)).max()))
        if verify_decay_bound(A, alpha, beta, t_max=40.0, num=240):
            return alpha, beta
    raise VerificationFailed("could not certify a decay bound for A")


@dataclass(frozen=True)
class StabilityCertificate:
    alpha: float
    beta: float
    gamma_P: float
    gamma_QS: float
    gamma_QA: float
    threshold: float
    exists_P: bool
    exists_QS: bool
    exists_QA: bool
    # sum-of-squared-norms bounds, for comparison only
    gamma_P_loose: float = float("nan")
    gamma_QS_loose: float = float("nan")
    gamma_QA_loose: float = float("nan")


def existence_margins(sys):
    """Sufficient existence conditions for P, Q^S (= Q^P) and Q^A."""
    alpha, beta = stability_params(sys.A)
    threshold = 2 * alpha / beta**2

    def sq(X):
        return float(np.linalg.norm(X, 2) ** 2) if X.size else 0.0

    g_p = sq(sys.n_stack())
    g_nt = sq(sys.nt_stack())
    g_m = sq(sys.m_stack())
    g_qs = max(g_p, g_nt, g_m)
    g_qa = max(g_p, g_m)
    sum_n = float(sum(np.linalg.norm(N, 2) ** 2 for N in sys.Ns))
    sum_m = float(sum(np.linalg.norm(M, 2) ** 2 for M in sys.Ms))
    return StabilityCertificate(
        alpha=alpha, beta=beta,
        gamma_P=g_p, gamma_QS=g_qs, gamma_QA=g_qa, threshold=threshold,
        exists_P=g_p < threshold, exists_QS=g_qs < threshold, exists_QA=g_qa < threshold,
        gamma_P_loose=sum_n, gamma_QS_loose=max(sum_n, sum_m), gamma_QA_loose=max(sum_n, sum_m),
    )
