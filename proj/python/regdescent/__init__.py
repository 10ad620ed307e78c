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

"""Tikhonov-regularized SGD with decaying regularization."""

from regdescent._regdescent import (
    ConfigError,
    DivergenceError,
    LinearProblem,
    diagonal_problem,
    estimate_rate,
    min_norm_solution,
    ode_problem,
    optimal_schedule,
    radon_problem,
    run,
    run_config,
    schedule_at,
    shepp_logan_phantom,
    theoretical_heatmap,
    tikhonov_solution,
    toy_problem,
    validate,
)

__all__ = [
    "ConfigError",
    "DivergenceError",
    "LinearProblem",
    "diagonal_problem",
    "estimate_rate",
    "min_norm_solution",
    "ode_problem",
    "optimal_schedule",
    "radon_problem",
    "run",
    "run_config",
    "schedule_at",
    "shepp_logan_phantom",
    "theoretical_heatmap",
    "tikhonov_solution",
    "toy_problem",
    "validate",
]
