"""Smoke test for the springchain Python bindings.

Build and install first:

    pip install maturin
    maturin develop --release -m crates/py/Cargo.toml

then run `python python/smoke.py`.
"""

import math

import springchain as sc


def check(cond, what):
    if not cond:
        raise SystemExit(f"FAIL: {what}")
    print(f"ok: {what}")


def main():
    # exact step stays on the sphere and leaves fixed points alone
    m = sc.llg_step_exact((0.6, 0.8, 0.0), (0.0, 0.0, 5.0), 0.5, 0.3)
    check(abs(math.sqrt(sum(x * x for x in m)) - 1.0) < 1e-12, "exact step keeps |m| = 1")
    check(sc.llg_step_exact((0.0, 0.0, 1.0), (0.0, 0.0, 5.0), 0.5, 0.3) == (0.0, 0.0, 1.0), "m = h is fixed")

    stack = sc.Stack(6, 6, d=2e-7)
    check(len(stack) == 12 and stack.n_hard == 6, "stack layout")
    state = sc.State.uniform(stack, 0.0, 0.0)
    field = sc.effective_field(stack, state, 0.0, 0.0)
    check(all(h == (0.0, 0.0, 0.0) for h in field), "saturated state feels no field")

    r = sc.relax(stack, state, 3000.0, math.radians(60.0))
    check(r["converged"] and r["residual"] <= 1e-8, "relaxation converges")
    theta = r["state"].theta
    check(0.0 < theta[-1] < math.radians(60.0), "top layer turns toward the field")
    e0 = sc.total_energy(stack, state, 3000.0, math.radians(60.0))
    e1 = sc.total_energy(stack, r["state"], 3000.0, math.radians(60.0))
    check(e1 < e0, "relaxation lowers the energy")
    t = sc.torque_density(stack, theta, 3000.0, math.radians(60.0))
    check(t > 0.0, "positive torque below the field direction")

    recs = sc.rotational_sweep(stack, 3000.0, coarse_step=10.0)
    check(all(x["converged"] for x in recs), "sweep converges")
    chir = [x["chirality"] for x in recs if x["chirality"] != 0]
    check(chir[0] == 1 and chir[-1] == -1, "one chirality flip over a full turn")

    tc = sc.find_critical_angle(stack, 3000.0, (math.radians(200.0), math.radians(350.0)))
    flip = next(x["theta_a"] for x in recs if x["chirality"] == -1)
    check(abs(tc - flip) < math.radians(10.0), f"critical angle {math.degrees(tc):.2f} deg")

    try:
        sc.Stack(0, 5)
    except ValueError as e:
        check("n_hard" in str(e), "invalid stack rejected")
    else:
        raise SystemExit("FAIL: empty hard region accepted")


if __name__ == "__main__":
    main()
