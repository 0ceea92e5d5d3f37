import math

import pytest

import shelab


def test_heat_kernel_and_identities():
    assert shelab.heat_kernel(1.0, 0.0) == pytest.approx(1.0 / math.sqrt(2.0 * math.pi), rel=1e-15)
    lhs, rhs = shelab.kernel_shift_identity(1.0, 0.25, 0.3, -0.2)
    assert lhs == pytest.approx(rhs, rel=1e-12)
    lhs, rhs = shelab.kernel_product_identity(0.7, 1.1, -0.4)
    assert lhs == pytest.approx(rhs, rel=1e-12)
    with pytest.raises(shelab.DomainError):
        shelab.heat_kernel(0.0, 1.0)


def test_oracles():
    value, err = shelab.limiting_constant(1.0)
    assert value == pytest.approx(2.0, abs=1e-6)
    # closed form 1 + sqrt(pi t) e^{t/4} Phi(sqrt(t/2)) at t = 0.5
    assert shelab.second_moment_normalized(0.5, 0.0, 0.0) == pytest.approx(1.98200875, rel=1e-3)


def test_noise_free_style_replicate_is_deterministic():
    x, u = shelab.simulate_normalized(0.1, 8.0, 0.005, 7, 3, 0.5)
    x2, u2 = shelab.simulate_normalized(0.1, 8.0, 0.005, 7, 3, 0.5)
    assert len(x) == len(u)
    assert (u == u2).all()
    assert x[len(x) // 2] == 0.0


def test_run_covariance_report():
    cfg = {
        "kind": "covariance",
        "master_seed": 3,
        "grid": {"dx": 0.1, "half_width": 12.0, "dt": 0.005},
        "times": [0.5],
        "lags": [0, 1, 2, 3],
        "replicates": 4,
        "bulk_half_width": 4.0,
        "fit": {"lo": 1, "hi": 3},
    }
    assert shelab.validation_errors(cfg) == []
    report = shelab.run(cfg)
    rows = shelab.table(report, "covariance")
    assert len(rows) == 4
    assert report["replicates_run"] == 4


def test_invalid_config_raises():
    with pytest.raises(shelab.ConfigError):
        shelab.run({"kind": "covariance", "replicates": 0})
    with pytest.raises(shelab.ConfigError):
        shelab.run({"no_such_key": 1})
    assert shelab.validation_errors({"kind": "covariance", "replicates": 0})
