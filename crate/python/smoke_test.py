"""Smoke test for the incoherence_py extension module.

Build and install first:
    pip install --no-build-isolation -e crates/python
then run:
    python python/smoke_test.py
"""

import math

import incoherence_py as inc


def close(a, b, tol=1e-12):
    return abs(a - b) < tol


def check_tomography():
    r = inc.qpt_scenario(0.5, 0.5, 0.6)
    s = r["channel"].matrix()
    assert close(s[1][1], 1.2j) and close(s[2][2], -1.2j), s
    choi = r["choi_eigenvalues"]
    assert close(choi[0], 2.2) and close(choi[-1], -0.2), choi
    assert not r["is_cp"] and r["kraus_count"] is None

    filtered = inc.qpt_scenario(0.5, 0.5, 0.6, cp_filter=True)
    assert filtered["is_cp"] and filtered["kraus_count"] == 1 and filtered["kraus_unitary"]
    assert close(filtered["removed_weight"], 0.2)

    uncorrelated = inc.qpt_scenario(0.5, 0.5, 0.6, correlated=False)
    assert uncorrelated["kraus_count"] == 2


def check_channel():
    ch = inc.Channel.from_ensemble([(0.75, "Z", 0.0), (0.25, "Z", math.pi / 2)])
    assert ch.dim == 2 and ch.is_cp()
    assert ch.unitality_defect() < 1e-12 and ch.trace_preservation_defect() < 1e-12
    assert len(ch.kraus()) == 2
    out = ch.apply([[0.5, 0.5], [0.5, 0.5]])
    assert close(out[0][1], 0.25), out
    eig = sorted(ch.eigenvalues(), key=lambda z: z.real)
    assert close(eig[0].real, 0.5) and close(eig[-1].real, 1.0)


def check_recovery():
    system = inc.SpinSystem.fixture("3q")
    truth = inc.Profile.synthetic("skewed", 0.0, 0.07, skew=0.4)
    channel = system.channel(truth)
    assert channel.dim == 8
    r = system.recover(channel)
    assert len(r["samples"]) == 57
    t = truth.metrics()
    m = r["metrics"]
    bin_width = 0.3 / 60
    assert abs(m["mean"] - t["mean"]) <= bin_width, (m, t)
    assert abs(m["std"] - t["std"]) / t["std"] < 0.3, (m, t)
    assert m["skewness"] > 0 and m["clipped_mass"] < 0.1, m
    assert math.isclose(sum(w for _, w in r["profile"].points()), 1.0)

    shifted = system.recover(system.channel(inc.Profile.synthetic("gaussian", 0.0, 0.025), offset=0.05))
    assert abs(shifted["offset"] - 0.05) <= 1.5 * bin_width, shifted["offset"]

    back = inc.Profile.from_csv(truth.to_csv())
    assert back.points() == truth.points()


def main():
    check_tomography()
    check_channel()
    check_recovery()
    print(f"incoherence_py {inc.__version__}: smoke test passed")


if __name__ == "__main__":
    main()
