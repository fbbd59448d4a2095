"""Smoke test for the due_py extension.

Build and install first:

    pip install --no-build-isolation -e crates/python
    python python/smoke_test.py
"""

import math

import due_py


def check(name, ok, detail=""):
    print(f"{'ok  ' if ok else 'FAIL'} {name} {detail}")
    if not ok:
        raise SystemExit(1)


def main():
    worst = max(
        abs(due_py.eta_exponential_sum(m, i / 64, 3))
        for m in (-2, -1, 1, 2)
        for i in range(64)
    )
    check("eta sums cancel", worst < 1e-10, f"{worst:.1e}")

    p, q = due_py.ak_rationals(1, 2, 128, 1)
    check("approximating rational", (p, q) == (129, 256), f"{p}/{q}")

    g = due_py.NilGroup.heisenberg3()
    a, b = [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]
    prod = g.mul(a, b)
    check("heisenberg product", prod == [0.5, 1.0, 1.0], str(prod))
    x0, lat = g.reduce([0.3, 2.25, -0.5])
    check("lattice reduction", all(0 <= c < 1 for c in g.to_second_kind(x0)), str(lat))

    d = due_py.wigner("1", [math.cos(0.3), 0.0, math.sin(0.3), 0.0])
    unit = max(
        abs(sum(d[k][i].conjugate() * d[k][j] for k in range(3)) - (1 if i == j else 0))
        for i in range(3)
        for j in range(3)
    )
    check("spin-1 unitarity", unit < 1e-12, f"{unit:.1e}")

    cert = due_py.nil_certificate(n=1, q0=2, p=1, nt=4, nx=2)
    check(
        "nilpotent certificate",
        cert["passed"],
        f"qbar {cert['qbars'][-1]}, full sum {cert['max_full_sum']:.1e}",
    )

    lp = due_py.EquidistributedLoop.build(["1/2"], 2, seed=3)
    rep = lp.verify(grid=64, translates=4)
    check("antipodal loop", rep["passed"], f"defect {rep['max_defect']:.1e}")
    back = due_py.EquidistributedLoop.from_manifest(lp.manifest())
    gap = max(abs(u - v) for u, v in zip(back.theta(0.37), lp.theta(0.37)))
    check("manifest round trip", gap < 1e-12, f"{gap:.1e}")

    cc = due_py.compact_certificate(lp, ["1/2"], lp.m, nt=4, ng=4)
    check("compact certificate", cc["passed"], f"qbar {cc['qbar']}, {cc['max_full_sum']:.1e}")
    control = due_py.compact_certificate(None, ["1/2"], 2, nt=2, ng=2)
    check("trivial loop control fails", not control["passed"], f"{control['max_full_sum']:.2f}")

    par = due_py.parabolic_diagnostic((math.sqrt(5) - 1) / 2, [10, 20])
    con = due_py.constructed_diagnostic([1], element=3, nt=4, nx=2)
    check(
        "obstruction vs coboundary",
        min(r["rms"] for r in par) > 0.1 and con[0]["sup"] < 1e-8,
        f"{min(r['rms'] for r in par):.3f} vs {con[0]['sup']:.1e}",
    )

    try:
        due_py.nil_certificate(p=2)
    except ValueError as e:
        check("coprimality error", "coprime" in str(e))
    else:
        check("coprimality error", False)

    z = due_py.eta_exponential_sum(3, 0.0, 3)
    check("uncancelled frequency", abs(z) > 1, f"{z:.3f}")
    print("smoke test passed")


if __name__ == "__main__":
    main()
