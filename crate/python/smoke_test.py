#!/usr/bin/env python3
"""Smoke test for the qcalc_py extension module.

Builds the module if needed (cargo build -p qcalc-py --release), loads it,
and exercises the main types and operations end to end. Exits nonzero on
the first failure.
"""

import json
import math
import shutil
import subprocess
import sys
import sysconfig
import tempfile
from pathlib import Path

WORKSPACE = Path(__file__).resolve().parent.parent


def locate_or_build_module() -> Path:
    candidates = [
        WORKSPACE / "target" / "release" / "libqcalc_py.so",
        WORKSPACE / "target" / "debug" / "libqcalc_py.so",
    ]
    for c in candidates:
        if c.exists():
            return c
    print("building qcalc-py (cargo build -p qcalc-py --release) ...")
    subprocess.run(
        ["cargo", "build", "-p", "qcalc-py", "--release"],
        cwd=WORKSPACE,
        check=True,
    )
    return candidates[0]


def load_module():
    lib = locate_or_build_module()
    staging = Path(tempfile.mkdtemp(prefix="qcalc-py-"))
    ext = sysconfig.get_config_var("EXT_SUFFIX") or ".so"
    shutil.copy2(lib, staging / f"qcalc_py{ext}")
    sys.path.insert(0, str(staging))
    import qcalc_py  # noqa: E402

    return qcalc_py


CHECKS = 0


def check(label: str, ok: bool, detail: str = "") -> None:
    global CHECKS
    CHECKS += 1
    if ok:
        print(f"ok   {label}")
    else:
        print(f"FAIL {label} {detail}")
        sys.exit(1)


def close(a: float, b: float, tol: float) -> bool:
    scale = max(abs(a), abs(b), 1e-300)
    return abs(a - b) / scale <= tol


def main() -> None:
    qc = load_module()

    # Scalar primitives.
    check("q_bracket(2, 0.5) = 1.5", qc.q_bracket(2.0, 0.5) == 1.5)
    check("q_bracket rejects q >= 1", raises(lambda: qc.q_bracket(1.0, 1.0)))
    p = qc.QParams(0.5, 2.0)
    check("pochhammer [2]_{2,1}", close(qc.q_pochhammer_k(2.0, 2, qc.QParams(0.5, 1.0)), 2.625, 1e-15))
    check("classical (1)_{3,2} = 15", qc.classical_pochhammer_k(1.0, 3, 2.0) == 15.0)
    check(
        "E_q^x equals its product form",
        close(
            qc.q_exponential(-1.0, 0.5),
            qc.q_shifted_product(1.0, -0.5, None, 0.5),
            1e-12,
        ),
    )

    # Functional operators over Python callables.
    d = qc.q_derivative(lambda x: x * x, 1.0, 0.5)
    check("q-derivative of x^2 at 1 is [2]_q", close(d, 1.5, 1e-14))
    v = qc.jackson_integral(lambda x: x, 0.0, 1.0, 0.5)
    check("Jackson integral of x on [0,1]", close(v, 2.0 / 3.0, 1e-12))
    check(
        "Python exceptions surface from integrands",
        raises(lambda: qc.jackson_integral(lambda x: 1 / 0, 0.0, 1.0, 0.5)),
    )

    # Exact polynomials.
    poly = qc.weighted_cardinality(2, 2, 1)
    check("tree polynomial renders", str(poly) == "1 + 2*q + 2*q^2 + q^3")
    brute = qc.weighted_cardinality_enumerated(2, 2, 1)
    check("enumeration matches the closed product", poly == brute)
    check("polynomial evaluation", close(poly.eval(1.0), 6.0, 1e-15))
    check(
        "polynomial arithmetic",
        str(qc.QPolynomial([1, 1]) * qc.QPolynomial([1, 1, 1])) == "1 + 2*q + 2*q^2 + q^3",
    )
    check("unbounded counts", qc.unweighted_count(3, 20, 3) == math.prod(range(3, 63, 3)))

    # Trees and the bijection.
    w = qc.tree_weight([1, 3, 6, 7], 2, 2)
    check("worked-example weight q^13", str(w) == "q^13")
    tree_json = qc.compose_tree([1, 3, 6, 7], 2, 2)
    back = qc.decompose_tree(tree_json, 2, 4, 2)
    check("compose/decompose round trip", back == [1, 3, 6, 7])
    items = qc.enumerate_trees(2, 1, 1)
    check("enumeration yields (seq, exponent, tree)", [i[:2] for i in items] == [([1], 0), ([2], 1)])

    # Special functions.
    check("Gamma_{0,k}(t) = 1", qc.gamma_qk(5.0, qc.QParams(0.0, 2.0)) == 1.0)
    check("Gamma_{q,k}(2k) = [k]_q", close(qc.gamma_qk(4.0, p), 1.5, 1e-13))
    for method in ("product", "series", "integral"):
        check(
            f"gamma method {method} agrees",
            close(qc.gamma_qk(1.3, p, method=method), qc.gamma_qk(1.3, p), 1e-7),
        )
    check("gamma_q(3) at q=0.5", close(qc.gamma_q(3.0, 0.5), 1.5, 1e-12))
    lhs, rhs = qc.gamma_base_change_check(1.7, qc.QParams(0.3, 3.0))
    check("base-change identity", close(lhs, rhs, 1e-10))
    lhs, rhs = qc.pochhammer_sum_check(2.5, qc.QParams(0.6, 2.0))
    check("shifted-power summation identity", close(lhs, rhs, 1e-10))
    check("B_{0,k} = 1", qc.beta_qk(0.5, 0.5, qc.QParams(0.0, 3.0)) == 1.0)
    check(
        "beta symmetry",
        close(
            qc.beta_qk(1.0, 2.3, p, method="ratio"),
            qc.beta_qk(2.3, 1.0, p, method="ratio"),
            1e-11,
        ),
    )

    # Distributions.
    dist = qc.KGammaDist(p, 1.0)
    check("gamma CDF at 0", dist.cdf(0.0) == 0.0)
    check("gamma CDF at upper", close(dist.cdf(dist.upper), 1.0, 1e-9))
    check(
        "CDF methods agree",
        close(dist.cdf(0.7), dist.cdf(0.7, method="jackson"), 1e-9),
    )
    check("moment recovers the bracket product", close(dist.moment(2), 1.75, 1e-7))
    lattice = dist.lattice(1e-9)
    check("lattice masses sum to 1", close(lattice.total_mass(), 1.0, 1e-8))
    check("lattice JSON shape", set(json.loads(lattice.to_json())) == {"support", "masses", "tail_tol"})
    a = lattice.sample(50, seed=7)
    b = lattice.sample(50, seed=7)
    check("sampling is seed-deterministic", a == b)
    check("draws live on the support", set(a) <= set(lattice.support()))

    beta_dist = qc.KBetaDist(qc.QParams(0.5, 3.0), 0.5, 0.5)
    check("beta CDF normalizes", close(beta_dist.cdf(beta_dist.upper), 1.0, 1e-8))
    check(
        "beta density positive inside the support",
        beta_dist.density(0.5 * beta_dist.upper) > 0.0,
    )

    # Verification report.
    report = json.loads(qc.verify_suite("trees"))
    check("trees suite passes", report["pass"] is True)
    check("report carries cases", len(report["cases"]) >= 100)
    case = report["cases"][0]
    check(
        "report schema",
        set(case) == {"id", "anchor", "params", "lhs", "rhs", "rel_err", "tol", "pass"},
    )

    print(f"\nsmoke test passed ({CHECKS} checks)")


def raises(f) -> bool:
    try:
        f()
    except Exception:
        return True
    return False


if __name__ == "__main__":
    main()
