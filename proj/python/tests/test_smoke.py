# Copyright 2026 The reg-descent Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
# http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import math
import pathlib

import numpy as np
import pytest

import regdescent as rd

CONFIGS = pathlib.Path(__file__).resolve().parents[2] / "configs"


def test_schedule_at():
    alpha, lam = rd.schedule_at(1.0, "2/3", 2.0, 0.25, 16)
    assert alpha == pytest.approx(16 ** (-2 / 3))
    assert lam == pytest.approx(1.0)


def test_validate_reports_every_theorem():
    reports = {r["theorem"]: r for r in rd.validate(0.25, "5/8", xi=0.25)}
    assert reports["L2_RATE"]["applies"]
    assert reports["L2_RATE"]["exponents"]["dist_sq_to_xstar"] == pytest.approx(0.125)
    bad = {r["theorem"]: r for r in rd.validate(0.7, 0.5, xi=0.25)}
    assert not bad["L2_RATE"]["applies"]
    assert bad["L2_RATE"]["violated"]


def test_optimal_schedule():
    o = rd.optimal_schedule(0.25, "L2")
    assert o["p"] == pytest.approx(0.25)
    assert o["q"] == pytest.approx(0.625)


def test_toy_problem_and_oracles():
    prob = rd.toy_problem()
    a = prob.dense_operator()
    assert a.shape == (1, 2)
    np.testing.assert_allclose(rd.min_norm_solution(a, prob.data), [0.5, 0.5], atol=1e-14)
    lam = 0.5
    np.testing.assert_allclose(rd.tikhonov_solution(a, prob.data, lam), [1 / (2 + lam)] * 2, atol=1e-14)
    x = np.array([0.3, -0.1])
    assert prob.value(x) == pytest.approx(0.5 * (0.2 - 1) ** 2)
    np.testing.assert_allclose(prob.gradient(x), [-0.8, -0.8])


def test_from_dense_rejects_shape_mismatch():
    with pytest.raises(Exception):
        rd.LinearProblem.from_dense(np.eye(3), np.ones(2))


def test_run_gradient_descent_converges():
    prob = rd.toy_problem()
    out = rd.run(prob, 0.5, 0.0, 1.0, 0.5, 2000, variant="reg_gd")
    mean = out["mean"]
    assert out["n_diverged"] == 0
    assert mean["dist_sq_xstar"][-1] < mean["dist_sq_xstar"][0]
    fit = rd.estimate_rate(mean["k"], mean["dist_sq_xstar"])
    assert fit["exponent"] > 0.5


def test_estimate_rate_power_law():
    ks = list(range(1, 10001))
    errs = [3.0 * k ** -0.75 for k in ks]
    fit = rd.estimate_rate(ks, errs)
    assert fit["exponent"] == pytest.approx(0.75, abs=1e-10)


def test_theoretical_heatmap_peak():
    grid = [i / 216 for i in range(1, 216)]
    h = rd.theoretical_heatmap("L2", 0.25, grid, grid)
    assert h["values"].shape == (215, 215)
    p, q, value = h["best"]
    assert (p, q) == pytest.approx((0.25, 0.625))
    assert value == pytest.approx(0.125)


def test_phantom_and_radon():
    img = rd.shepp_logan_phantom(16)
    assert img.shape == (256,)
    prob = rd.radon_problem(16, 8, 16)
    assert prob.dimension == 256
    assert prob.rows == 128


def test_run_config(tmp_path):
    code, report = rd.run_config(str(CONFIGS / "toy.cfg"), str(tmp_path))
    assert code == 0
    assert report
    assert any(tmp_path.rglob("*.csv"))


def test_bad_config_raises(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("[problem]\nkind = nonsense\n")
    with pytest.raises(rd.ConfigError):
        rd.run_config(str(bad))
