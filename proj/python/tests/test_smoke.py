"""Smoke tests for the python bindings; runnable directly or via pytest."""

import json
import math
import os
import sys
import tempfile

import _ttlsim as ttlsim


def config(policy, requests=30000, seed=5):
    return json.dumps(
        {
            "workload": {
                "kind": "poisson",
                "rate_per_s": 20.0,
                "types": [
                    {
                        "type_id": 1,
                        "zipf": {"count": 100, "exponent": 0.8, "mass": 0.8},
                        "rare_fraction": 0.2,
                    }
                ],
                "rare_mode": {"kind": "one_hit_wonders"},
            },
            "policy": policy,
            "metrics": {"window_seconds": 200.0},
            "requests": requests,
            "seed": seed,
        }
    )


DTTL = {
    "kind": "dttl",
    "mode": "ohr",
    "targets": [{"type_id": 1, "hit_rate": 0.5, "ttl_bound_s": 50.0}],
    "eta": {"kind": "decaying", "eta0": 1.0, "alpha": 0.6},
}


def test_gamma_threshold_plateaus():
    assert ttlsim.gamma_threshold(0.5, 0.3, 0.1) == 0.3
    assert ttlsim.gamma_threshold(0.97, 0.3, 0.1) == 1.0
    assert abs(ttlsim.gamma_threshold(0.8, 0.0, 0.2) - 0.5) < 1e-12


def test_zipf_oracle_closed_form():
    # single object: theta_s == theta collapses the hit rate to p = 1/2
    out = ttlsim.zipf_oracle(
        count=1,
        exponent=1.0,
        mass=1.0,
        rare_fraction=0.0,
        rate=1.0,
        theta=math.log(2.0),
        theta_s=math.log(2.0),
    )
    assert abs(out["hit_rate"] - 0.5) < 1e-12
    assert abs(out["normalized_size_s"] - 0.5) < 1e-12


def test_solve_full_filter_ttl_inverts_the_square():
    theta = ttlsim.solve_full_filter_ttl(
        count=1, exponent=1.0, mass=1.0, rare_fraction=0.0, rate=1.0, target=0.25
    )
    assert abs(theta - math.log(2.0)) < 1e-9


def test_tuner_hand_value():
    out = ttlsim.tune_ttl_bound(
        count=1000,
        exponent=1.5,
        mass=0.9,
        rare_fraction=0.1,
        n=1000,
        lambda0=1.0,
        target=0.8,
    )
    assert abs(out["r_star"] - 0.28) <= 1e-12
    assert out["hit_rate_at_bound"] >= 0.8


def test_simulate_is_deterministic():
    a = ttlsim.simulate(config(DTTL))
    b = ttlsim.simulate(config(DTTL))
    assert a["ohr"] == b["ohr"]
    assert a["avg_cache_bytes"] == b["avg_cache_bytes"]
    assert abs(a["ohr"] - 0.5) < 0.05
    t1 = a["types"][1]
    rel = abs(t1["normalized_size_s"] - t1["eq2_normalized_size_s"])
    assert rel <= 1e-6 * max(t1["normalized_size_s"], 1e-12)


def test_trace_roundtrip_and_audit():
    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "trace.csv")
        ttlsim.generate_trace(config(DTTL, requests=5000), path)
        with open(path) as f:
            header = f.readline().strip()
        assert header == "arrival_time_s,object_id,type_id,size_bytes"
        windows = ttlsim.audit_rarity(path, r_seconds=1e6, window_exponent=0.75)
        assert all(w[3] == 0.0 for w in windows[1])  # one-hit wonders never burst

        che = ttlsim.che_ttl_for_target(path, 0.5)
        assert che["ttl_s"] > 0
        assert abs(che["predicted_hit_rate"] - 0.5) < 1e-9


def test_sweep_rows():
    rows = ttlsim.sweep(config(DTTL, requests=20000), [0.4], 0.5)
    assert [r["policy"] for r in rows] == ["dttl", "fttl"]
    assert all(r["status"] == "ok" for r in rows)


def test_config_errors_surface_as_value_error():
    bad = json.loads(config(DTTL))
    bad["policy"]["targets"][0]["hit_rate"] = 2.0
    try:
        ttlsim.simulate(json.dumps(bad))
    except ValueError:
        pass
    else:
        raise AssertionError("expected ValueError")


if __name__ == "__main__":
    failures = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_") and callable(fn):
            try:
                fn()
                print(f"ok   {name}")
            except Exception as e:  # noqa: BLE001
                failures += 1
                print(f"FAIL {name}: {e}")
    sys.exit(failures)
