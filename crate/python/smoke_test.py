"""Smoke test for the cvwit_py extension.

Build and run from the repository root:

    cargo build --release -p cvwit-py
    cp target/release/libcvwit_py.so python/cvwit_py.so
    python3 python/smoke_test.py
"""

import json
import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import cvwit_py as cv


def ghz_cm(n, r):
    e, ie = math.exp(2 * r), math.exp(-2 * r)
    return (e + (n - 1) * ie) / n, ((n - 1) * e + ie) / n, 2 * math.sinh(2 * r) / n


def main():
    p = cv.GhzParams(4, 0.6)
    a, b, c = p.cm()
    want = ghz_cm(4, 0.6)
    assert all(abs(x - y) < 1e-12 for x, y in zip((a, b, c), want)), (a, b, c)
    assert len(p.full_cm()) == 8

    assert cv.kappa_exact(8, 3, [2, 3, 3]) == ("2", "7")
    assert abs(cv.kappa(4, 2, [1, 3]) - 0.5) < 1e-15

    w = cv.optimal_witness(100)
    assert (w.m, w.layout, w.sizes) == (6, "singletons", [99, 1]), w

    t = cv.threshold(100, eta=0.999, noise_n=1e-4)
    lo, hi = t.certified
    assert abs(lo - 0.0088554426723734165) < 1e-12, lo
    assert abs(hi - 0.73162749606486560) < 1e-9, hi

    v = cv.certify_point(cv.GhzParams(100, 0.5, 0.999, 1e-4))
    assert v.certified and v.routes_agree

    rows = cv.optimal_table(3, 124)
    assert rows[0] == (1, "singletons", 3, 9), rows[0]
    assert rows[-1] == (6, "singletons", 74, 124), rows[-1]

    verdict = cv.check_symmetric_cm(4, *ghz_cm(4, 0.6), draws=20_000)
    assert verdict.certified and verdict.best_value < 0
    assert abs(sum(verdict.q) - 1) < 1e-9

    doc = json.dumps({"format_version": 1, "n": 4, "kind": "symmetric", "a": 1, "b": 1, "c": 0})
    assert not cv.check_cm_json(doc, "trisep", draws=20_000).certified

    reports = cv.run_oracle("signset3")
    assert reports and all(r[3] for r in reports)

    try:
        cv.GhzParams(4, 0.5, eta=1.5)
    except ValueError:
        pass
    else:
        raise AssertionError("eta > 1 accepted")
    try:
        cv.check_symmetric_cm(13, 1, 1, 0)
    except RuntimeError:
        pass
    else:
        raise AssertionError("13 modes accepted")

    print("cvwit_py smoke test: ok")


if __name__ == "__main__":
    main()
