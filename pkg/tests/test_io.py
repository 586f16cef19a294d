import numpy as np
from hypothesis import given, strategies as st

from bqobt.benchmarks import heat_system, random_admissible
from bqobt.gramians import compute_gramians
from bqobt.io import (
    RunManifest,
    load_gramians,
    load_matrix,
    load_system,
    save_gramians,
    save_matrix,
    save_system,
)
from bqobt.model import scale_input


def same_system(a, b):
    pairs = [(a.A, b.A), (a.B, b.B), (a.C, b.C), (a.B_unscaled, b.B_unscaled)]
    pairs += list(zip(a.Ns, b.Ns)) + list(zip(a.Ms, b.Ms))
    return a.gamma_applied == b.gamma_applied and all(np.array_equal(x, y) for x, y in pairs)


@given(seed=st.integers(0, 10_000))
def test_matrix_roundtrip_bit_exact(seed, tmp_path_factory):
    X = np.random.default_rng(seed).standard_normal((4, 3)) * 10.0 ** np.arange(-6, 6)[:3]
    path = tmp_path_factory.mktemp("m") / "X.csv"
    save_matrix(path, X)
    assert np.array_equal(load_matrix(path), X)


def test_system_roundtrip(tmp_path):
    sys = scale_input(random_admissible(6, 2, 2, seed=1), 0.3)
    save_system(sys, tmp_path / "s", {"note": "x"})
    back = load_system(tmp_path / "s")
    assert same_system(sys, back)


def test_heat_roundtrip(tmp_path):
    sys = heat_system(k=6, output_variant="identity_quadratic", gamma=0.1)
    save_system(sys, tmp_path)
    assert same_system(sys, load_system(tmp_path))


def test_gramian_roundtrip(tmp_path):
    sys = random_admissible(5, 2, 1, seed=2)
    g = compute_gramians(sys, "TS")
    save_gramians(g, tmp_path, sys.gamma_applied)
    back, man = load_gramians(tmp_path)
    assert man["variant"] == "TS" and man["gamma_total"] == 1.0
    assert np.array_equal(back.P, g.P) and np.array_equal(back.Q, g.Q)
    assert set(back.extras) == {"P1", "QS1", "Qhat"}
    assert back.residuals == g.residuals


def test_run_manifest(tmp_path):
    rec = RunManifest("build", ["build", "heat", "--k", "3"], [], {"k": 3}, str(tmp_path), "0.1.0")
    rec.write(tmp_path)
    assert RunManifest.read(tmp_path / "run.json") == rec
