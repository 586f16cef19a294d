"""Benchmark systems: the bilinear heat-transfer model and random admissible systems."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.stats import ortho_group

from .errors import BadSpec
from .model import build, scale_input

OUTPUT_VARIANTS = ("ones_quadratic", "identity_quadratic")


@dataclass(frozen=True)
class HeatBenchmarkSpec:
    k: int = 10
    output_variant: str = "ones_quadratic"
    gamma: float = 1.0

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 3:
            raise BadSpec(f"k must be an integer >= 3, got {self.k}")
        if self.output_variant not in OUTPUT_VARIANTS:
            raise BadSpec(f"output_variant must be one of {OUTPUT_VARIANTS}")
        if not 0 < self.gamma <= 1:
            raise BadSpec(f"gamma must lie in (0, 1], got {self.gamma}")


def _line_operator(k):
    # 1D second difference on nodes 1..k with h = 1/(k+1): zero-flux closure
    # at node 1 (the Robin part is added separately), Dirichlet beyond node k
    main = -2.0 * np.ones(k)
    main[0] = -1.0
    return sp.diags([np.ones(k - 1), main, np.ones(k - 1)], [-1, 0, 1])


def heat_system(spec=None, **kwargs):
    """Finite-difference model of the unit square with two Robin-controlled edges.

    Unknowns sit on a ``k x k`` grid with spacing ``h = 1/(k+1)`` and are
    ordered with the first coordinate running fastest.  Edge ``xi_1 = 0`` is
    driven by ``u_1`` and edge ``xi_2 = 0`` by ``u_2`` through the flux
    condition ``n . grad x = u (x - 1)``; the other two edges are held at zero.
    Eliminating the boundary flux adds ``(u/h)(x_b - 1)`` to every boundary row,
    which splits into ``N_k`` (``1/h`` on the diagonal) and ``B`` (``-1/h``).

    Outputs: ``y_1`` is the mean temperature, ``y_2 = x^T M x`` with
    ``M = 1/k^4 * ones`` or ``M = 1/k^2 * I``.
    """
    if spec is None:
        spec = HeatBenchmarkSpec(**kwargs)
    k = spec.k
    n = k * k
    h = 1.0 / (k + 1)
    T = _line_operator(k)
    I = sp.identity(k)
    A = ((sp.kron(I, T) + sp.kron(T, I)) / h**2).toarray()

    first = np.zeros(k)
    first[0] = 1.0
    ones = np.ones(k)
    left = np.kron(ones, first)    # nodes with first coordinate index 1
    bottom = np.kron(first, ones)  # nodes with second coordinate index 1
    N1 = np.diag(left / h)
    N2 = np.diag(bottom / h)
    B = -np.column_stack([left, bottom]) / h

    C = np.full((1, n), 1.0 / k**2)
    if spec.output_variant == "ones_quadratic":
        M2 = np.full((n, n), 1.0 / k**4)
    else:
        M2 = np.eye(n) / k**2
    # y_1 = C x is purely linear, y_2 = x^T M x purely quadratic
    C_full = np.vstack([C, np.zeros((1, n))])
    sys = build(A, B, C_full, [N1, N2], [np.zeros((n, n)), M2])
    if spec.gamma != 1.0:
        sys = scale_input(sys, spec.gamma)
    return sys


def random_admissible(n, m, p, seed=0, margin=0.5, eig_range=(0.5, 3.0)):
    """Random BQO system whose existence margins sit at ``margin`` times the threshold.

    ``A`` is an orthogonal similarity of a negative diagonal, so it is normal,
    ``alpha`` is its smallest decay rate and ``beta = 1``.  The ``N_k`` are
    rescaled so that ``max(||[N]||^2, ||[N^T]||^2) = margin * 2 alpha`` and the
    ``M_j`` so that ``||[M]||^2 = margin * 2 alpha``.
    """
    if not 0 < margin < 1:
        raise ValueError("margin must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    d = rng.uniform(*eig_range, size=n)
    Qo = ortho_group.rvs(n, random_state=rng) if n > 1 else np.ones((1, 1))
    A = -(Qo * d) @ Qo.T
    A = 0.5 * (A + A.T)
    alpha = float(np.min(np.linalg.eigvalsh(-A)))
    target = margin * 2.0 * alpha
    B = rng.standard_normal((n, m))
    C = rng.standard_normal((p, n))
    Ns = [rng.standard_normal((n, n)) for _ in range(m)]
    Ms = []
    for _ in range(p):
        G = rng.standard_normal((n, n))
        Ms.append(0.5 * (G + G.T))
    if m:
        g = max(np.linalg.norm(np.hstack(Ns), 2), np.linalg.norm(np.hstack([N.T for N in Ns]), 2))
        Ns = [N * np.sqrt(target) / g for N in Ns]
    if p:
        g = np.linalg.norm(np.hstack(Ms), 2)
        Ms = [M * np.sqrt(target) / g for M in Ms]
    return build(A, B, C, Ns, Ms)


def unobservable_system(n1=4, n2=3, m=2, p=2, seed=0, couple_n=False, rotate=False,
                        scale=0.3):
    """System with a known unobservable subspace, for kernel checks.

    The state splits into an observable block of size ``n1`` and a block of
    size ``n2`` on which ``C`` and every ``M_j`` vanish and that ``A`` leaves
    invariant.  Without ``couple_n`` the ``N_k`` are block diagonal, so the
    second block is the kernel of both ``Q^S`` and ``Q^A``.  With ``couple_n``
    each ``N_k`` also maps the second block into the first; the kernel of
    ``Q^A`` is unchanged but is no longer ``N_k``-invariant.  ``rotate``
    applies a random orthogonal state transformation.

    Returns ``(system, basis)`` where ``basis`` spans the constructed
    unobservable subspace.
    """
    rng = np.random.default_rng(seed)
    n = n1 + n2
    d = rng.uniform(1.0, 3.0, size=n)
    A = np.diag(-d)
    A[:n1, :n1] += 0.2 * rng.standard_normal((n1, n1))
    A[n1:, n1:] += 0.2 * rng.standard_normal((n2, n2))
    B = rng.standard_normal((n, m))
    C = np.zeros((p, n))
    C[:, :n1] = rng.standard_normal((p, n1))
    Ns = []
    for _ in range(m):
        N = np.zeros((n, n))
        N[:n1, :n1] = rng.standard_normal((n1, n1))
        N[n1:, n1:] = rng.standard_normal((n2, n2))
        if couple_n:
            N[:n1, n1:] = rng.standard_normal((n1, n2))
        Ns.append(scale * N / np.linalg.norm(N, 2))
    Ms = []
    for _ in range(p):
        M = np.zeros((n, n))
        G = rng.standard_normal((n1, n1))
        M[:n1, :n1] = 0.5 * (G + G.T)
        Ms.append(scale * M / np.linalg.norm(M, 2))
    basis = np.vstack([np.zeros((n1, n2)), np.eye(n2)])
    if rotate:
        T = ortho_group.rvs(n, random_state=rng)
        A, B, C = T.T @ A @ T, T.T @ B, C @ T
        Ns = [T.T @ N @ T for N in Ns]
        Ms = [T.T @ M @ T for M in Ms]
        basis = T.T @ basis
    return build(A, B, C, Ns, Ms), basis
