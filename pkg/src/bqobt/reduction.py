"""Square-root balanced truncation for BQO systems."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import RankDeficient, ShapeMismatch
from .lyapunov import psd_factor
from .model import _make

RANK_TOL = 1e-12
TIE_TOL = 1e-10


@dataclass
class BalancingResult:
    hsv: np.ndarray
    W: np.ndarray
    V: np.ndarray
    reduced: object
    numerical_rank: int


def _fix_signs(Z, Y):
    # largest-magnitude entry of each left singular vector made positive
    idx = np.argmax(np.abs(Z), axis=0)
    s = np.sign(Z[idx, np.arange(Z.shape[1])])
    s[s == 0] = 1.0
    return Z * s, Y * s


def hankel_singular_values(U, L):
    """Singular values of ``U^T L``, nonincreasing."""
    U, L = np.asarray(U, float), np.asarray(L, float)
    if U.shape[0] != L.shape[0]:
        raise ShapeMismatch(f"factor row counts differ: {U.shape[0]} vs {L.shape[0]}")
    if U.shape[1] == 0 or L.shape[1] == 0:
        return np.zeros(0)
    return np.linalg.svd(U.T @ L, compute_uv=False)


def balanced_truncation(sys, U, L, r, rank_tol=RANK_TOL):
    """Reduce ``sys`` to order ``r`` from Gramian factors ``P = U U^T``, ``Q = L L^T``.

    Projects with ``W^T = S1^{-1/2} Y1^T L^T`` and ``V = U Z1 S1^{-1/2}`` where
    ``U^T L = Z S Y^T``.  Raises :class:`RankDeficient` when ``r`` exceeds the
    number of singular values above ``rank_tol * sigma_1``.
    """
    U, L = np.asarray(U, float), np.asarray(L, float)
    n = sys.n
    if U.ndim != 2 or L.ndim != 2 or U.shape[0] != n or L.shape[0] != n:
        raise ShapeMismatch(f"factors must have {n} rows, got {U.shape} and {L.shape}")
    if r < 1:
        raise ValueError("r must be >= 1")
    if U.shape[1] == 0 or L.shape[1] == 0:
        raise RankDeficient("a Gramian factor is empty", 0)
    Z, s, Yt = np.linalg.svd(U.T @ L, full_matrices=False)
    rank = int(np.sum(s > rank_tol * s[0])) if s[0] > 0 else 0
    if r > rank:
        raise RankDeficient(f"requested r={r} exceeds numerical rank {rank} of U^T L", rank)
    if r < len(s) and s[r - 1] - s[r] <= TIE_TOL * s[0]:
        warnings.warn(f"near-tie at the truncation boundary: sigma_{r}={s[r - 1]:.6e}, "
                      f"sigma_{r + 1}={s[r]:.6e}", RuntimeWarning, stacklevel=2)
    Z1, Y1 = _fix_signs(Z[:, :r], Yt[:r].T)
    d = 1.0 / np.sqrt(s[:r])
    W = (L @ Y1) * d
    V = (U @ Z1) * d
    red = project(sys, W, V)
    return BalancingResult(hsv=s, W=W, V=V, reduced=red, numerical_rank=rank)


def project(sys, W, V):
    """Petrov-Galerkin projection of every system matrix."""
    A = W.T @ sys.A @ V
    C = sys.C @ V
    Ms = []
    for M in sys.Ms:
        Mr = V.T @ M @ V
        Ms.append(0.5 * (Mr + Mr.T))
    # unscaled matrices are projected too so the reduced model keeps its gamma
    B0 = W.T @ sys.B_unscaled
    Ns0 = [W.T @ N @ V for N in sys.Ns_unscaled]
    return _make(A, B0, C, Ns0, Ms, sys.gamma_applied)


def hsv_compare(U, L_a, L_b, tol=1e-10):
    """Check ``sigma_i(U^T L_a) <= sigma_i(U^T L_b) + tol * sigma_1(U^T L_b)`` for all i.

    The shorter list is padded with zeros.
    """
    ha = hankel_singular_values(U, L_a)
    hb = hankel_singular_values(U, L_b)
    k = max(len(ha), len(hb))
    pa = np.pad(ha, (0, k - len(ha)))
    pb = np.pad(hb, (0, k - len(hb)))
    scale = pb[0] if k else 0.0
    dominated = bool(np.all(pa <= pb + tol * scale))
    return ha, hb, dominated


def reduce_with(sys, gramians, r, clip_tol=None, rank_tol=RANK_TOL):
    """Balanced truncation with the Gramian pair of a :class:`GramianSet`."""
    if gramians.Q is None:
        raise ValueError(f"Gramian set {gramians.variant!r} carries no observability Gramian")
    U = psd_factor(gramians.P, clip_tol)
    L = psd_factor(gramians.Q, clip_tol)
    return balanced_truncation(sys, U, L, r, rank_tol)


def hsv_gap_order(hsv, rel_tol=1e-8):
    """Heuristic order: smallest r with sigma_{r+1} < rel_tol * sigma_1."""
    hsv = np.asarray(hsv)
    if hsv.size == 0:
        return 0
    below = np.nonzero(hsv < rel_tol * hsv[0])[0]
    return int(below[0]) if below.size else int(hsv.size)
