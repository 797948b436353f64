import json

import numpy as np
import pytest

import rflow


def test_calendar_skips_weekends():
    cal = rflow.ServiceCalendar.from_range("2024-03-08", "2024-03-11")
    assert cal.windows_per_day == 36
    assert cal.service_days == ["2024-03-08", "2024-03-11"]
    assert cal.locate("2024-03-08 23:59:00") == 35
    assert cal.locate("2024-03-11 06:00:00") == 36
    assert cal.locate("2024-03-09 12:00:00") is None
    assert cal.locate("2024-03-11 05:59:00") is None
    assert cal.date_of(40) == "2024-03-11"


def test_metrics():
    assert rflow.rmse([1, 2, 3], [1, 2, 3]) == 0.0
    assert rflow.rmse([0, 0], [3, 4]) == pytest.approx(np.sqrt(12.5))
    assert rflow.smape([100], [110]) == pytest.approx(200 * 10 / 210)
    res = rflow.paired_t_test([1, 2, 3, 4], [1, 2, 3, 4.5])
    assert res.df == 3
    assert res.statistic < 0
    assert 0 < res.p_value < 0.5
    assert rflow.student_t_cdf(0.0, 5) == pytest.approx(0.5)


def test_difference_seasonal():
    y = np.array([1.0, 2.0, 3.0, 1.0, 2.0, 3.0])
    np.testing.assert_array_equal(rflow.difference(y, 0, 1, 3), np.zeros(3))
    with pytest.raises(ValueError):
        rflow.difference(y, 0, 2, 3)


def test_fit_and_forecast_ar1():
    rng = np.random.default_rng(3)
    y = np.zeros(2000)
    for t in range(1, len(y)):
        y[t] = 0.6 * y[t - 1] + rng.normal()
    fit = rflow.fit_sarima(y, rflow.SarimaOrder(p=1))
    assert fit.status in ("converged", "no_improvement")
    assert fit.ar[0] == pytest.approx(0.6, abs=0.05)
    assert fit.sigma2 == pytest.approx(1.0, abs=0.1)
    assert fit.n_params == 3  # phi, mean, sigma2
    fc = rflow.forecast(fit, y, 3)
    assert fc.shape == (3,)
    mu = fit.intercept
    assert fc[0] - mu == pytest.approx(fit.ar[0] * (y[-1] - mu))
    pred = rflow.one_step_predictions(fit, y)
    assert pred.shape == y.shape


def test_fit_with_covariate_recovers_beta():
    rng = np.random.default_rng(5)
    x = rng.poisson(20, 1500).astype(float)
    e = np.zeros_like(x)
    for t in range(1, len(x)):
        e[t] = 0.5 * e[t - 1] + rng.normal()
    y = 2.0 * x + e
    fit = rflow.fit_sarima(y, rflow.SarimaOrder(p=1), covariate=x)
    assert fit.beta == pytest.approx(2.0, abs=0.05)


def test_bad_order_rejected():
    with pytest.raises(ValueError):
        rflow.SarimaOrder(p=-1)


def test_ward_two_groups():
    pts = [[0.0, 0.0], [0.0, 1.0], [10.0, 0.0], [10.0, 1.0]]
    tree = rflow.ward_cluster(pts, ["a", "b", "c", "d"])
    assert len(tree.merges) == 3
    assert tree.merges[0][:2] == (0, 1)
    assert tree.merges[0][2] == pytest.approx(1.0)
    assert tree.cut(2) == [0, 0, 1, 1]
    assert tree.cut_at_height(tree.half_height()) == [0, 0, 1, 1]


def test_simulate_is_deterministic(configs_dir):
    text = (configs_dir / "scenarios" / "small.json").read_text()
    a = rflow.simulate(text)
    b = rflow.simulate(text)
    assert a == b and len(a) > 1000
    assert rflow.simulate(text, seed=8) != a
    truth = rflow.scenario_truth(text)
    assert set(truth) >= {"C1", "R1"}
    assert truth["C1"].shape == (36, 48)
    assert (truth["C1"].sum(axis=1) <= 1 + 1e-12).all()


def test_scenario_errors_map_to_config_error():
    with pytest.raises(rflow.ConfigError):
        rflow.simulate(json.dumps({"start_date": "2024-03-04", "days": 0, "stations": []}))


def test_session_analyze(small_config):
    s = rflow.Session(str(small_config), stations=["C1"])
    assert s.stations == ["C1"]
    flows = s.flows("C1")
    assert flows["boarding"].shape == (s.calendar.window_count,)
    assert flows["alighting"].sum() > 0
    with pytest.raises(rflow.DataError):
        s.flows("nope")
    (res,) = s.analyze()
    assert res["error"] is None
    assert res["rpp"].shape == (36, 48)
    assert [m["model"] for m in res["models"]] == ["M0", "M1", "M2"]
    for m in res["models"]:
        assert np.isfinite(m["rmse_test"])
        assert m["fit"].order.m == 36
