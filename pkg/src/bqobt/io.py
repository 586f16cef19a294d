"""On-disk bundles: dense CSV matrices plus a JSON manifest.

A system bundle is a directory holding ``manifest.json`` (``n, m, p,
gamma_applied``) and ``A.csv, B.csv, C.csv, N1.csv ..., M1.csv ...``.  The
CSVs store the unscaled realization; ``B`` and ``N_k`` are multiplied by
``gamma_applied`` on load.  Values are written with 17 significant digits so
a save/load round trip is bit-exact.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .model import build

FMT = "%.16e"


def save_matrix(path, X):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    np.savetxt(path, X, fmt=FMT, delimiter=",")


def load_matrix(path, shape=None):
    X = np.loadtxt(path, delimiter=",", ndmin=2)
    if shape is not None:
        X = X.reshape(shape)
    return X


def write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")


def read_json(path):
    return json.loads(Path(path).read_text())


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, Path):
        return str(o)
    raise TypeError(f"not JSON serializable: {type(o)}")


def save_system(sys, directory, extra=None):
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    manifest = {"kind": "system", "n": sys.n, "m": sys.m, "p": sys.p,
                "gamma_applied": sys.gamma_applied}
    if extra:
        manifest.update(extra)
    write_json(d / "manifest.json", manifest)
    save_matrix(d / "A.csv", sys.A)
    if sys.m:
        save_matrix(d / "B.csv", sys.B_unscaled)
    if sys.p:
        save_matrix(d / "C.csv", sys.C)
    for k, N in enumerate(sys.Ns_unscaled, 1):
        save_matrix(d / f"N{k}.csv", N)
    for j, M in enumerate(sys.Ms, 1):
        save_matrix(d / f"M{j}.csv", M)
    return d


def load_system(directory):
    d = Path(directory)
    man = read_json(d / "manifest.json")
    n, m, p = man["n"], man["m"], man["p"]
    A = load_matrix(d / "A.csv", (n, n))
    B = load_matrix(d / "B.csv", (n, m)) if m else np.zeros((n, 0))
    C = load_matrix(d / "C.csv", (p, n)) if p else np.zeros((0, n))
    Ns = [load_matrix(d / f"N{k}.csv", (n, n)) for k in range(1, m + 1)]
    Ms = [load_matrix(d / f"M{j}.csv", (n, n)) for j in range(1, p + 1)]
    return build(A, B, C, Ns, Ms, gamma_applied=man.get("gamma_applied", 1.0))


def save_gramians(gset, directory, gamma_total):
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    write_json(d / "manifest.json", {
        "kind": "gramians", "variant": gset.variant, "phi": gset.phi,
        "n": int(gset.P.shape[0]), "gamma_total": gamma_total,
        "extras": sorted(gset.extras),
    })
    save_matrix(d / "P.csv", gset.P)
    if gset.Q is not None:
        save_matrix(d / "Q.csv", gset.Q)
    for name, X in gset.extras.items():
        save_matrix(d / f"{name}.csv", X)
    write_json(d / "residuals.json", {"residuals": gset.residuals, "iterations": gset.iterations})
    return d


def load_gramians(directory):
    from .gramians import GramianSet

    d = Path(directory)
    man = read_json(d / "manifest.json")
    n = man["n"]
    P = load_matrix(d / "P.csv", (n, n))
    Q = load_matrix(d / "Q.csv", (n, n)) if (d / "Q.csv").exists() else None
    extras = {name: load_matrix(d / f"{name}.csv", (n, n)) for name in man.get("extras", [])}
    rep = read_json(d / "residuals.json") if (d / "residuals.json").exists() else {}
    gset = GramianSet(P, Q, man["variant"], rep.get("residuals", {}), man.get("phi"),
                      extras, rep.get("iterations", {}))
    return gset, man


def save_column(path, values, header):
    np.savetxt(path, np.asarray(values, float).reshape(-1, 1), fmt=FMT,
               delimiter=",", header=header, comments="")


def save_trajectory(traj, path):
    p = traj.outputs.shape[1]
    header = ",".join(["t"] + [f"y_{j}" for j in range(1, p + 1)])
    np.savetxt(path, np.column_stack([traj.times, traj.outputs]), fmt=FMT,
               delimiter=",", header=header, comments="")


@dataclass
class RunManifest:
    command: str
    argv: list
    inputs: list = field(default_factory=list)
    options: dict = field(default_factory=dict)
    output_dir: str = ""
    tool_version: str = ""

    def write(self, directory):
        write_json(Path(directory) / "run.json", asdict(self))

    @classmethod
    def read(cls, path):
        return cls(**read_json(path))
