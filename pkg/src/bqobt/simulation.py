"""Fixed-step RK4 simulation of BQO systems and output-error metrics."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridMismatch, NonFiniteState

BLOWUP = 1e12


@dataclass
class Trajectory:
    times: np.ndarray    # (T,)
    states: np.ndarray   # (T, n)
    outputs: np.ndarray  # (T, p)


@dataclass
class ErrorReport:
    pointwise_rel: np.ndarray
    frobenius_rel: float


def _rhs(sys, homogeneous):
    A, Ns = sys.A, sys.Ns
    B = None if homogeneous else sys.B

    def f(x, u):
        dx = A @ x
        for k, N in enumerate(Ns):
            if u[k] != 0.0:
                dx = dx + u[k] * (N @ x)
        if B is not None:
            dx = dx + B @ u
        return dx
    return f


def stable_substeps(sys, u, t_end, steps, safety=2.5):
    """RK4 substeps per output interval keeping ``h * stiffness`` below ``safety``.

    The stiffness estimate is ``rho(A) + sum_k max|u_k| ||N_k||`` with ``u``
    sampled on the output grid.
    """
    h = t_end / steps
    rho = float(np.max(np.abs(np.linalg.eigvals(sys.A)))) if sys.n else 0.0
    if sys.Ns:
        ts = np.linspace(0.0, t_end, min(steps, 200) + 1)
        umax = np.max(np.abs([np.broadcast_to(u(t), (sys.m,)) for t in ts]), axis=0)
        rho += float(sum(a * np.linalg.norm(N, 2) for a, N in zip(umax, sys.Ns)))
    return max(1, int(np.ceil(h * rho / safety)))


def shared_substeps(systems, u, t_end, steps, safety=2.5):
    """Common substep count for systems whose trajectories will be compared.

    Using one step size for the full and the reduced models keeps the RK4
    discretization error out of the measured reduction error.
    """
    return max(stable_substeps(s, u, t_end, steps, safety) for s in systems)


def integrate(sys, u, t_end, steps, x0=None, homogeneous=False, substeps=None):
    """Classical RK4 from ``x0`` (default zero); ``homogeneous`` drops ``B u``.

    States and outputs are recorded on ``steps + 1`` equidistant points.  Each
    output interval is split into ``substeps`` RK4 steps, chosen automatically
    from a stiffness estimate when not given.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    n, m = sys.n, sys.m
    if substeps is None:
        substeps = stable_substeps(sys, u, t_end, steps)
    times = np.linspace(0.0, t_end, steps + 1)
    h = t_end / (steps * substeps)
    X = np.empty((steps + 1, n))
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    X[0] = x
    f = _rhs(sys, homogeneous)

    def uu(t):
        return np.broadcast_to(np.asarray(u(t), dtype=float), (m,))

    for i in range(steps):
        for j in range(substeps):
            t = times[i] + j * h
            u0, uh, u1 = uu(t), uu(t + 0.5 * h), uu(t + h)
            k1 = f(x, u0)
            k2 = f(x + 0.5 * h * k1, uh)
            k3 = f(x + 0.5 * h * k2, uh)
            k4 = f(x + h * k3, u1)
            x = x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(x)) or np.linalg.norm(x) > BLOWUP:
            raise NonFiniteState(
                f"state norm exceeded {BLOWUP:g} at t={times[i + 1]:.4g}; "
                "system unstable for this input or step too large")
        X[i + 1] = x
    Y = sys.output(X.T).T.reshape(steps + 1, sys.p)
    return Trajectory(times, X, Y)


def simulate(sys, u, t_end, steps=1000, substeps=None):
    """Simulate from the zero initial state with input function ``u(t) -> (m,)``."""
    return integrate(sys, u, t_end, steps, substeps=substeps)


def error_metrics(full, reduced):
    """Pointwise and Frobenius relative output errors between two trajectories."""
    if full.times.shape != reduced.times.shape or not np.allclose(
            full.times, reduced.times, rtol=0, atol=1e-12 * max(1.0, abs(full.times[-1]))):
        raise GridMismatch("trajectories are sampled on different time grids")
    if full.outputs.shape != reduced.outputs.shape:
        raise GridMismatch(f"output shapes differ: {full.outputs.shape} vs {reduced.outputs.shape}")
    diff = full.outputs - reduced.outputs
    ymax = np.max(np.linalg.norm(full.outputs, axis=1))
    pointwise = np.linalg.norm(diff, axis=1) / ymax if ymax > 0 else np.linalg.norm(diff, axis=1)
    fy = np.linalg.norm(full.outputs)
    frob = float(np.linalg.norm(diff) / fy) if fy > 0 else float(np.linalg.norm(diff))
    return ErrorReport(pointwise, frob)


def unobservability_probe(sys, Q, x0, t_end, steps, u=None, kernel_tol=1e-8):
    """Largest output norm along the trajectory started at ``x0`` in ``ker(Q)``.

    With ``u`` given, the homogeneous system (no ``B u``) is driven by ``u``;
    otherwise the input is identically zero.
    """
    x0 = np.asarray(x0, dtype=float)
    Q = np.asarray(Q, dtype=float)
    if np.linalg.norm(Q @ x0) > kernel_tol * np.linalg.norm(Q, 2) * np.linalg.norm(x0):
        raise ValueError("x0 is not in the numerical kernel of Q")
    if u is None:
        u = lambda t: np.zeros(sys.m)  # noqa: E731
    traj = integrate(sys, u, t_end, steps, x0=x0, homogeneous=True)
    return float(np.max(np.linalg.norm(traj.outputs, axis=1)))


def exp_input(m=1):
    """``u_j(t) = exp(-t)`` for every channel."""
    return lambda t: np.full(m, np.exp(-t))


def cos_input(m):
    """``u_j(t) = cos(j pi t)``, j = 1..m."""
    js = np.arange(1, m + 1)
    return lambda t: np.cos(js * np.pi * t)


def table_input(times, values):
    """Piecewise-linear interpolation of a sampled input table ``values[(T, m)]``."""
    times = np.asarray(times, float)
    values = np.asarray(values, float).reshape(len(times), -1)

    def u(t):
        return np.array([np.interp(t, times, values[:, k]) for k in range(values.shape[1])])
    return u
