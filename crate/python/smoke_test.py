"""Smoke test for the poisson_nav_py extension.

Build and run:
    cargo build --release -p poisson-nav-py
    cp target/release/libpoisson_nav_py.so python/poisson_nav_py.so
    python3 python/smoke_test.py
"""

import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import poisson_nav_py as pn


def main():
    p = pn.ModelParams(1.0, math.pi / 4)
    assert abs(p.theta - math.pi / 4) < 1e-15
    assert pn.ModelParams.from_theta_frac(1.0, 1, 6).theta == math.pi / 6

    try:
        pn.ModelParams(1.0, math.pi / 2)
    except ValueError:
        pass
    else:
        raise AssertionError("pi/2 accepted")

    nav = pn.Navigator(p, seed=7)
    for _ in range(5):
        x, y, r, phi, renewal = nav.step()
        assert x > 0 and r > 0 and abs(phi) <= p.theta + 1e-12
    assert nav.steps_taken == 5

    a = pn.simulate_path(p, seed=7, steps=5)
    assert len(a["waypoints"]) == 5
    assert abs(a["waypoints"][-1][0] - nav.position[0]) < 1e-12

    b = pn.simulate_path(p, seed=7, t=50.0)
    assert b["waypoints"][-1][0] >= 50.0

    rho = pn.rho_closed_form(p)
    est = pn.estimate_rho(p, 20000, seed=3)
    assert abs(est["value"] - rho) < 5 * est["stderr"], (est, rho)

    kappa = pn.estimate_kappa(p, 20000, seed=3)
    assert kappa["value"] > 0

    tail = pn.tau_tail(p, 5000, seed=4)
    assert tail["survival"][0] == 1.0

    assert pn.cgf_step((0.0, 0.0), p) == 0.0
    leg = pn.legendre((1.2, 0.0), p)
    assert abs(leg["value"] - 0.1710167) < 1e-6, leg
    assert pn.ldp_rate(0.0, p)["value"] < 1e-10
    assert pn.mdp_rate(0.5, rho) == rho * 0.25

    dep = pn.dependent_ldp_rate(
        1.0,
        lambda u, v: (u - 1.0) ** 2 + v * v,
        lambda x, y: math.hypot(x, y),
    )
    assert dep["value"] >= 0.0

    def boom(x, y):
        raise KeyError("boom")

    try:
        pn.dependent_ldp_rate(1.0, boom, boom)
    except KeyError:
        pass
    else:
        raise AssertionError("callable error swallowed")

    rows, ok = pn.run_validate(["narrow_cone"])
    assert ok and rows[0]["status"] == "pass", rows

    print("smoke test ok: rho=%.6f rho_hat=%.6f kappa_hat=%.4f" % (rho, est["value"], kappa["value"]))


if __name__ == "__main__":
    main()
