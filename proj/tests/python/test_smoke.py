#
# Copyright 2026 The fednga Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Smoke tests for the fednga Python bindings."""

import math

import numpy as np
import pytest

import fednga

QUAD = """
task = quadratic
dim = 6
M = 8
schedule = polynomial
eta0 = 0.1
delta = 0.1
T = 200
"""


def test_fed_nga_matches_numpy():
    rng = np.random.default_rng(7)
    uploads = rng.normal(size=(5, 4))
    weights = rng.uniform(0.1, 1.0, size=5)
    weights /= weights.sum()
    expected = sum(w * u / np.linalg.norm(u) for w, u in zip(weights, uploads))
    got = fednga.fed_nga(uploads, weights)
    np.testing.assert_allclose(got, expected, rtol=1e-13, atol=1e-15)
    np.testing.assert_allclose(fednga.fedavg(uploads, weights), weights @ uploads, rtol=1e-13)


def test_degenerate_upload_contributes_zero():
    got = fednga.fed_nga([[3.0, 4.0], [0.0, 0.0]], [0.5, 0.5])
    np.testing.assert_allclose(got, [0.3, 0.4], rtol=1e-15)


def test_robust_aggregators():
    uploads = np.array([[1.0, 5.0], [2.0, 4.0], [3.0, 3.0], [100.0, -50.0]])
    np.testing.assert_array_equal(fednga.coordinate_median(uploads), [2.5, 3.5])
    np.testing.assert_array_equal(fednga.trimmed_mean(uploads, 1), [2.5, 3.5])
    assert fednga.krum_select(uploads, 1) in (0, 1, 2)
    gm = fednga.geometric_median(uploads, [0.25] * 4)
    assert np.linalg.norm(gm - [2.0, 4.0]) < 1.0
    np.testing.assert_array_equal(fednga.aggregate("median", uploads, [0.25] * 4),
                                  fednga.coordinate_median(uploads))


def test_attacks():
    honest = [[1.0, 2.0], [3.0, -1.0]]
    np.testing.assert_array_equal(fednga.sign_flip(honest), [-12.0, -3.0])
    np.testing.assert_array_equal(fednga.same_value(3), [1.0, 1.0, 1.0])
    a = fednga.gaussian_attack(10, seed=3)
    np.testing.assert_array_equal(a, fednga.gaussian_attack(10, seed=3))
    assert a.shape == (10,)


def test_dirichlet_partition_covers_every_sample():
    labels = [i % 4 for i in range(400)]
    shards = fednga.dirichlet_partition(labels, 10, 0.6, seed=1)
    assert len(shards) == 10
    assert sorted(i for s in shards for i in s) == list(range(400))


def test_validation_errors_map_to_value_error():
    with pytest.raises(fednga.ValidationError):
        fednga.fed_nga([[1.0]], [0.3])
    with pytest.raises(ValueError):
        fednga.Config.parse("no_such_key = 1")


def test_config_round_trip():
    config = fednga.Config.parse(QUAD, ["seed=5"])
    assert config.seed == 5
    assert config.rounds == 200
    assert fednga.Config.parse(config.serialize()) == config
    assert "timing" in fednga.config_keys()


def test_simulation_and_bounds():
    config = fednga.Config.parse(QUAD)
    result = fednga.run_simulation(config)
    assert len(result.records) == 201
    assert result.records[0].t == 0 and result.records[-1].t == 200
    assert result.records[-1].gap < result.records[0].gap
    assert result.records[0].agg_time_ns is None
    assert result.optimum.shape == (6,)
    theory = result.theory
    assert theory["gamma"] > 0
    assert fednga.theorem1_check(result)["holds"]
    bounds = fednga.theorem2_bounds(result, theory["gamma"])
    assert bounds["final_gap"]["holds"] and bounds["average_gap"]["holds"]
    again = fednga.run_simulation(config)
    assert again.records_csv() == result.records_csv()
    assert result.records_csv().startswith("t,eta,loss,grad_norm,gap,theta_max,accuracy")


def test_calibrated_lemma():
    config = fednga.Config.parse(QUAD, ["T=300"])
    ok, eta, gamma, run = fednga.calibrate_constant_step(config, 0.5)
    assert ok
    assert abs(eta * gamma - 0.5) < 0.05
    report = fednga.lemma1_report(run, gamma)
    assert report["applicable"] and report["violations"] == 0


def test_non_finite_abort():
    config = fednga.Config.parse(
        QUAD, ["aggregator=fedavg", "attack=sign_flip", "c_alpha_bar=0.4",
               "schedule=constant", "eta0=50", "T=2000"])
    with pytest.raises(fednga.NonFiniteError):
        fednga.run_simulation(config)


def test_records_csv_round_trip(tmp_path):
    result = fednga.run_simulation(fednga.Config.parse(QUAD, ["T=20"]))
    path = tmp_path / "records.csv"
    result.write_records(path)
    back = fednga.read_records_csv(path)
    assert [r.gap for r in back] == [r.gap for r in result.records]


def test_bench_and_slope():
    r = fednga.bench_aggregator("fednga", 256, 8, 5, seed=1)
    assert r.reps == 5 and len(r.times_ns) == 5 and r.median_ns > 0
    pts = [(float(x), 3.0 * x ** 2) for x in (1, 2, 4, 8)]
    assert math.isclose(fednga.fit_loglog_slope(pts), 2.0, rel_tol=1e-12)


def test_gradient_check():
    r = fednga.gradient_check("logistic:5-3", 4, seed=2)
    assert r.passed and len(r.errors) == 4 and r.max_error < r.tolerance


def test_lr_schedule_and_constants():
    assert fednga.lr_schedule("constant", 0.3, 0.1, 17) == 0.3
    assert math.isclose(fednga.lr_schedule("polynomial", 0.1, 0.25, 15), 0.1 / 8.0)
    assert fednga.descent_coefficient(0.0, 1.0) == 1.0
