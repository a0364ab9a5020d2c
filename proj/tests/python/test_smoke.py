import math

import numpy as np
import pytest

import rsma_aoii


def test_geometric_pair_shapes():
    h1, h2 = rsma_aoii.geometric_pair(4, math.pi / 2)
    assert np.allclose(h1, np.ones(4))
    assert abs(np.vdot(h1, h2)) < 1e-12


def test_rayleigh_is_seeded():
    a = rsma_aoii.rayleigh(4, 3, 7)
    b = rsma_aoii.rayleigh(4, 3, 7)
    assert len(a) == 3
    assert all(np.array_equal(x, y) for x, y in zip(a, b))


def test_single_user_threshold():
    h = rsma_aoii.rayleigh(4, 1, 2)
    power = rsma_aoii.snr_to_power(10.0)
    capacity = math.log2(1 + power * np.linalg.norm(h[0]) ** 2)
    served = rsma_aoii.schedule(h, [capacity - 0.2], [1.0], power)
    blocked = rsma_aoii.schedule(h, [capacity + 0.2], [1.0], power)
    assert served["scheduled"] == [0] and served["achieved_aoii"] == 0.0
    assert blocked["scheduled"] == [] and blocked["achieved_aoii"] == 1.0


def test_schedule_respects_budget_and_rates():
    h = rsma_aoii.rayleigh(4, 3, 9)
    power = rsma_aoii.snr_to_power(20.0)
    out = rsma_aoii.schedule(h, [2.0] * 3, [1.0, 2.0, 3.0], power)
    total = np.linalg.norm(out["common"]) ** 2 + sum(np.linalg.norm(p) ** 2 for p in out["privates"])
    assert total <= power * (1 + 1e-6)
    assert out["status"] == "converged"
    trace = out["trace"]
    assert all(b <= a + 1e-6 for a, b in zip(trace, trace[1:]))


def test_rsma_never_worse_than_sdma():
    h = rsma_aoii.rayleigh(4, 3, 21)
    power = rsma_aoii.snr_to_power(20.0)
    weights = [1.0, 1.5, 0.5]
    rsma = rsma_aoii.schedule(h, [4.0] * 3, weights, power, "rsma")
    sdma = rsma_aoii.schedule(h, [4.0] * 3, weights, power, "sdma")
    assert rsma["achieved_aoii"] <= sdma["achieved_aoii"]


def test_sweep_and_monte_carlo():
    rows = rsma_aoii.sweep_users(
        {
            "scenario": "geometric",
            "num_antennas": 4,
            "num_users": 2,
            "theta": [math.pi / 2],
            "snr_db": [10],
            "I_values": [1.0, 8.0],
        }
    )
    counts = {(r["mode"], r["I"]): r["num_scheduled"] for r in rows}
    assert counts[("rsma", 1.0)] == 2 and counts[("sdma", 8.0)] == 0

    rows, summary = rsma_aoii.monte_carlo(
        {"scenario": "rayleigh", "num_antennas": 4, "num_users": 3, "snr_db": [20], "I_values": [3.0], "num_realizations": 2, "seed": 4}
    )
    assert len(rows) == 4
    assert {c["mode"] for c in summary["cells"]} == {"rsma", "sdma"}


def test_config_errors_name_the_key():
    with pytest.raises(rsma_aoii.ConfigError, match="I_values"):
        rsma_aoii.config_hash('{"scenario": "rayleigh", "num_antennas": 4, "num_users": 3, "snr_db": [10], "I_values": []}')
