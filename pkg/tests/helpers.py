"""Shared constructors and oracles for the test suite."""
import numpy as np

from bqobt.benchmarks import random_admissible
from bqobt.model import build


def scalar_system():
    # x' = -x + 0.5 x u + u,  y = x + x^2
    return build([[-1.0]], [[1.0]], [[1.0]], [[[0.5]]], [[[1.0]]])


def random_family(count=20, nmax=10, seed0=0):
    """Random admissible systems of varying size with margin 0.5."""
    out = []
    for s in range(count):
        rng = np.random.default_rng(1000 + seed0 + s)
        n = int(rng.integers(2, nmax + 1))
        m = int(rng.integers(1, 3))
        p = int(rng.integers(1, 3))
        out.append(random_admissible(n, m, p, seed=seed0 + s, margin=0.5))
    return out


def lambda_min_rel(X):
    """Smallest eigenvalue of the symmetric part divided by the spectral norm."""
    X = 0.5 * (X + X.T)
    w = np.linalg.eigvalsh(X)
    scale = max(abs(w[0]), abs(w[-1]), np.finfo(float).tiny)
    return w[0] / scale


def rel_err(X, Y):
    ny = np.linalg.norm(Y)
    return np.linalg.norm(X - Y) / ny if ny > 0 else np.linalg.norm(X - Y)


def classical_linear_bt(A, B, C, r):
    """Textbook balancing transform for a linear system (no square-root trick).

    P = R R^T, R^T Q R = K S^2 K^T, T = S^{1/2} K^T R^{-1}.
    Returns (hsv, Ar, Br, Cr).
    """
    from scipy.linalg import solve_continuous_lyapunov

    P = solve_continuous_lyapunov(A, -B @ B.T)
    Q = solve_continuous_lyapunov(A.T, -C.T @ C)
    R = np.linalg.cholesky(0.5 * (P + P.T))
    w, K = np.linalg.eigh(R.T @ Q @ R)
    w, K = w[::-1], K[:, ::-1]
    hsv = np.sqrt(w)
    T = np.diag(hsv ** 0.5) @ K.T @ np.linalg.inv(R)
    Ti = R @ K @ np.diag(hsv ** -0.5)
    Ab, Bb, Cb = T @ A @ Ti, T @ B, C @ Ti
    return hsv, Ab[:r, :r], Bb[:r], Cb[:, :r]


ACCEPTANCE = {}  # criterion -> line; key 'info' holds report-only lines


def report(criterion, ok, detail=""):
    """Record and print one acceptance line; returns ``ok`` for asserting."""
    line = f"{'PASS' if ok else 'FAIL'} criterion {criterion}: {detail}"
    ACCEPTANCE[criterion] = line
    print(line)
    return ok


def info(text):
    """Record a report-only line shown under the acceptance summary."""
    line = f"INFO {text}"
    ACCEPTANCE.setdefault("info", []).append(line)
    print(line)
