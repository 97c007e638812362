"""Smoke test for the larsim Python extension.

Build the extension first (see README), then run:
    python3 python/smoke_test.py
"""

import json

import larsim


def main():
    lb1 = larsim.Scenario.adversarial("lb1", 0.1)
    assert len(lb1) == 1 and lb1.prediction_model == "nid"
    rec = larsim.evaluate(lb1, "follow-pred")
    assert abs(rec["ratio"] - 10.0) < 1e-6, rec
    assert rec["bound"] is None

    lb2 = larsim.Scenario.adversarial("lb2")
    for name in ("lar-trust", "lar-id"):
        rec = larsim.evaluate(lb2, name)
        assert abs(rec["ratio"] - 2.0) < 1e-9 and rec["bound_ok"], rec

    sc = larsim.Scenario.random(problem="tsp", space="plane", n=6, seed=3, noise_time=0.2, noise_pos=0.2)
    again = larsim.Scenario.from_json(sc.to_json())
    assert again.to_json() == sc.to_json()
    eps_time, eps_pos, eps_last = larsim.errors(sc)
    assert eps_time is not None and eps_pos is not None and eps_last is None
    z_opt = larsim.optimum(sc)
    for name in ("pah", "redesign", "lar-trust", "lar-id"):
        rec = larsim.evaluate(sc, name, "christofides" if name == "pah" else "exact")
        assert rec["bound_ok"], rec
        assert rec["z_opt"] == z_opt
        events = [json.loads(line) for line in rec["trace"].splitlines()]
        assert events[-1]["kind"] == "complete"

    assert larsim.bound_for("lar-id", 1.0, eps_time=0.0, eps_pos=1.0) == 3.0
    assert larsim.bound_for("follow-pred", 1.0) is None

    ok, line = larsim.verify_criterion(11)
    assert ok, line

    try:
        larsim.evaluate(sc, "no-such-strategy")
    except ValueError:
        pass
    else:
        raise AssertionError("unknown strategy accepted")

    print("larsim smoke test passed")


if __name__ == "__main__":
    main()
