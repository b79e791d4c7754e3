"""Smoke test for the savwave_py extension module.

Build and run from the repository root:

    cargo build -p savwave-py --features extension-module
    cp target/debug/libsavwave_py.so python/savwave_py.so
    python3 python/smoke_test.py
"""

import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import savwave_py as sw


def main():
    assert sw.Problem.names() == ["klein-gordon-2d", "sine-gordon-3d"]

    mesh = sw.Mesh(2, 4)
    assert mesh.n_elements == 32
    kg = sw.Problem("klein-gordon-2d")
    assert mesh.n_dofs(2, kg) == 81
    assert abs(kg.force(2.0) - 6.0) < 1e-15

    try:
        sw.Problem("heat-1d")
    except ValueError as e:
        assert "klein-gordon-2d" in str(e)
    else:
        raise AssertionError("unknown problem accepted")

    sim = sw.Simulation(kg.unforced(), m=8, tau=1.0)
    energies = sim.run(20)
    assert len(energies) == 21
    assert sim.steps_taken == 20 and sim.time == 20.0
    drift = sw.relative_drift(energies)
    assert drift <= 1e-10, drift
    print(f"sav energy drift over 20 steps: {drift:.2e}")

    rows = sw.convergence_study(kg, [8, 16])
    assert rows[0].l2_order is None
    order = rows[1].l2_order
    assert 1.8 < order < 2.2, order
    assert math.isclose(sw.convergence_order(rows[0].l2_error, rows[1].l2_error, 2.0), order)
    print(f"P1 L2 order (M=8 -> 16): {order:.3f}")

    forced = sw.Simulation(kg, m=8, tau=1 / 8)
    for _ in range(8):
        forced.step()
    assert math.isclose(forced.l2_error(), rows[0].l2_error, rel_tol=1e-12)

    print("smoke test passed")


if __name__ == "__main__":
    main()
