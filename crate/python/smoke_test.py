"""Smoke test for the sgsn_py extension module.

Build first, e.g. `maturin develop -m crates/python/Cargo.toml`, then run
`python python/smoke_test.py`.
"""

import sgsn_py


def main():
    z, ties = sgsn_py.prox_g([2.0, 0.1, -1.0, 0.5], tau=0.5, mu=0.5)
    assert z == [2.0, 0.0, 0.0, 0.0], z
    assert ties == [], ties
    _, ties = sgsn_py.prox_g([1.0, 0.3], tau=0.5, mu=1.0)
    assert ties == [0], ties

    ds = sgsn_py.gen_example1(100, 20, p=0.2, r=0.0, seed=7)
    assert (ds.n_samples, ds.n_features) == (100, 20)
    assert sum(1 for y in ds.labels() if y > 0) == 20

    fit = sgsn_py.fit("auc", ds, seed=7)
    print(fit)
    assert fit.status in ("converged", "stagnated"), fit.status
    assert len(fit.x_star) == 20
    assert fit.trace, "trace should not be empty"
    fs = [r["F"] for r in fit.trace]
    assert all(b <= a for a, b in zip(fs, fs[1:])), "F increased"
    auc = sgsn_py.evaluate("auc", ds, fit.x_star)
    print(f"train AUC {auc:.4f}")
    assert 0.5 < auc <= 1.0

    again = sgsn_py.fit("auc", ds, seed=7)
    assert again.x_star == fit.x_star, "solve is not deterministic"

    data, w = sgsn_py.gen_example3(60, 5, 2, seed=1)
    assert len(w) == 5 and len(w[0]) == 2
    train, _ = sgsn_py.prepare("mlc", data)
    mlc = sgsn_py.fit("mlc", train, lambda1=0.25)
    print(mlc)
    hl = sgsn_py.evaluate("mlc", train, mlc.x_star)
    print(f"train Hamming loss {hl:.4f}")
    assert 0.0 <= hl <= 1.0

    small = sgsn_py.Dataset([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]], [1.0, -1.0, -1.0])
    assert small.n_features == 2
    try:
        sgsn_py.fit("auc", small, tau=10.0)
    except ValueError as e:
        print(f"rejected infeasible tau: {e}")
    else:
        raise AssertionError("tau=10 should be rejected")

    print("smoke test passed")


if __name__ == "__main__":
    main()
