"""Smoke test for the tfmbe_py extension.

Build and install first:
    pip install --no-build-isolation -e crates/py
then run with python or pytest.
"""

import math
import os
import tempfile

import tfmbe_py as tf


def test_meshes():
    mesh = tf.TimeMesh.graded_random(40, 2.0, 1.0, 7)
    pts = mesh.points()
    assert len(mesh) == 40 and len(pts) == 41
    assert pts[0] == 0.0 and pts[-1] == 1.0
    assert abs(sum(mesh.steps()) - 1.0) < 1e-12
    assert tf.TimeMesh.graded_random(40, 2.0, 1.0, 7).points() == pts
    assert tf.TimeMesh([0.0, 0.5, 2.0]).tau(2) == 1.5


def test_kernels():
    ks = tf.KernelSet(0.5, tf.TimeMesh.uniform(1, 1.0))
    # a_0 = 1 / Γ(2 - α) for a unit step
    assert abs(ks.a_row(1)[0] - 1.0 / math.gamma(1.5)) < 1e-14
    ks = tf.KernelSet(0.7, tf.TimeMesh.random(30, 1.0, 3))
    rep = ks.identity_report()
    assert rep["orthogonality"] < 1e-10 and rep["complementarity"] < 1e-10
    assert rep["min_dcc"] > 0.0
    audit = tf.kernel_audit(0.4, mesh="graded", n=20, gamma=3.0)
    assert audit["sum_bound_margin"] >= 0.0


def test_solver_and_checkpoint():
    solver = tf.Solver(16, 0.6, step_bound="solvability")
    start = solver.report()
    assert solver.level == 0 and len(solver.phi()) == 256
    reports = solver.run_mesh(tf.TimeMesh.uniform(5, 0.05))
    assert [r["n"] for r in reports] == [1, 2, 3, 4, 5]
    assert all(abs(r["volume"] - start["volume"]) < 1e-10 for r in reports)
    assert reports[-1]["variational"] <= start["variational"]
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "state.ckpt")
        solver.save_checkpoint(path)
        back = tf.Solver.resume(path, step_bound="solvability")
        assert back.level == 5 and back.phi() == solver.phi()
        a = solver.advance(0.01)
        b = back.advance(0.01)
        assert a == b
    try:
        tf.Solver.resume("/nonexistent/state.ckpt")
    except RuntimeError:
        pass
    else:
        raise AssertionError("missing checkpoint accepted")


def test_adaptive_and_studies():
    solver = tf.Solver(16, 0.5, step_bound="solvability", adaptive=(1e-3, 0.1, 100.0))
    reports = solver.run_adaptive(0.3)
    assert abs(solver.time - 0.3) < 1e-15 and reports[-1]["t"] == solver.time

    rows = tf.convergence_study(0.8, [1.0], [10, 20, 40], m=8, seed=1)
    assert [r["n"] for r in rows] == [10, 20, 40]
    assert rows[0]["order"] is None and rows[-1]["order"] > 0.5

    out = tf.simulate(0.7, 0.2, m=16, eta=100.0, snapshots=[0.0, 0.1])
    assert out["violations"] == []
    assert out["reports"][0]["n"] == 0 and out["reports"][-1]["t"] == 0.2
    assert len(out["snapshots"]) == 2 and len(out["snapshots"][1][1]) == 256

    conv, solv = tf.step_bounds(0.5, 0.1, 1.0)
    assert 0.0 < conv < solv
    try:
        tf.step_bounds(1.5, 0.1, 1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("alpha outside (0, 1] accepted")


if __name__ == "__main__":
    for name, fn in list(globals().items()):
        if name.startswith("test_"):
            fn()
            print(f"{name}: ok")
