"""Smoke test for the qpolar_py extension module.

Build first:  pip install -e crates/python --no-build-isolation
Then run:     python python/smoke_test.py
"""

import math

import qpolar_py as q


def close(a, b, tol=1e-12):
    assert abs(a - b) <= tol, (a, b)


def main():
    ident = q.Channel([[[1, 0], [0, 1]]])
    close(ident.phi(), 1.0)
    close(ident.upsilon(), 1.0)

    ad = q.Channel.family("amplitude_damping", 2, {"gamma": 0.19})
    pol = ad.polar()
    close(pol["abs_lk"][1][1].real, 0.9)
    assert ad.classify()["decoherent"]
    assert isinstance(pol["decoherent"], q.Channel)

    dep = q.Channel.family("depolarizing", 2, {"p": 0.9})
    close(dep.unitarity(), 0.81)
    close(q.compose([dep, dep]).unitarity(), 0.81 ** 2)

    rot = q.Channel.family("rotation", 2, {"theta": 0.1})
    close(q.compose([rot, rot, rot]).phi(), math.cos(0.3) ** 2)
    m = rot.metrics()
    assert m["non_catastrophic"]

    rho = [[1, 0], [0, 0]]
    out = ad.apply(rho)
    close(out[1][1].real, 0.0)

    back = q.Channel.from_json(ad.to_json())
    close(back.phi(), ad.phi())

    try:
        q.Channel([[[1, 0], [0, 0.5]]])
    except q.QpolarError:
        pass
    else:
        raise AssertionError("non-TP input accepted")

    res = q.verify("lemmas", [2], 20, seed=42)
    assert res["summary"]["failures"] == 0
    assert res["csv"].startswith("case_id,theorem,")

    b = q.circuit_bounds([dep, dep, dep])
    assert len(b["bounds"]) >= 5

    curves = q.fig3(depth=50)
    assert len(curves) == 3
    for r in curves.values():
        for row in r["rows"]:
            assert row["thm8_lower"] <= row["phi"] <= row["thm8_upper"]

    print("smoke test ok")


if __name__ == "__main__":
    main()
