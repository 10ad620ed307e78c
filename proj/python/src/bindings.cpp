/*
 * Copyright 2026 The reg-descent Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "regdescent/analysis.hpp"
#include "regdescent/experiment.hpp"
#include "regdescent/oracles.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>
#include <string>

namespace py = pybind11;
using namespace regdescent;

namespace
{

PolynomialSchedule make_schedule(double c_alpha, const std::string& q, double c_lambda, const std::string& p)
{
    PolynomialSchedule s;
    s.c_alpha = c_alpha;
    s.q = Exponent::parse(q);
    s.c_lambda = c_lambda;
    s.p = Exponent::parse(p);
    return s;
}

py::dict report_dict(const TheoremReport& report)
{
    py::dict exponents;
    for (const auto& [key, value] : report.predicted_exponents)
    {
        exponents[py::str(key)] = value ? py::cast(*value) : py::none();
    }
    py::dict d;
    d["theorem"] = std::string(to_string(report.theorem));
    d["applies"] = report.applies;
    d["violated"] = report.violated_conditions;
    d["notes"] = report.notes;
    d["exponents"] = exponents;
    return d;
}

py::dict trajectory_dict(const Trajectory& t)
{
    py::dict d;
    d["k"] = t.iterations;
    d["alpha"] = t.alpha;
    d["lambda"] = t.lambda;
    d["f_gap"] = t.f_gap;
    d["dist_sq_xstar"] = t.dist_sq_to_xstar;
    d["dist_sq_xlambda"] = t.dist_sq_to_xlambda;
    d["energy"] = t.energy;
    d["max_norm"] = t.max_norm;
    d["final_iterate"] = t.final_iterate;
    return d;
}

std::string text_of(py::object value)
{
    return py::str(value).cast<std::string>();
}

}  // namespace

PYBIND11_MODULE(_regdescent, m)
{
    m.doc() = "Tikhonov-regularized stochastic gradient descent with decaying regularization";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_ArithmeticError);

    m.def(
        "schedule_at",
        [](double c_alpha, py::object q, double c_lambda, py::object p, Index k) {
            const auto step = schedule_at(make_schedule(c_alpha, text_of(q), c_lambda, text_of(p)), k);
            return py::make_tuple(step.alpha, step.lambda);
        },
        py::arg("c_alpha"), py::arg("q"), py::arg("c_lambda"), py::arg("p"), py::arg("k"),
        "(alpha_k, lambda_k) = (c_alpha k^-q, c_lambda k^-p). Exponents may be numbers or fraction strings.");

    m.def(
        "validate",
        [](py::object p, py::object q, double c_alpha, double c_lambda, std::optional<double> xi,
           std::optional<double> beta, std::optional<double> smoothness) {
            const auto schedule = make_schedule(c_alpha, text_of(q), c_lambda, text_of(p));
            TheoryContext ctx{beta, xi, smoothness};
            py::list reports;
            for (TheoremId id : kAllTheorems)
            {
                reports.append(report_dict(predicted_rates(schedule, id, ctx)));
            }
            return reports;
        },
        py::arg("p"), py::arg("q"), py::arg("c_alpha") = 1.0, py::arg("c_lambda") = 1.0, py::arg("xi") = py::none(),
        py::arg("beta") = py::none(), py::arg("smoothness") = py::none(),
        "Checks the schedule against every theorem and returns the predicted exponents.");

    m.def(
        "optimal_schedule",
        [](double xi, const std::string& mode) {
            const auto o = optimal_schedule(xi, parse_rate_mode(mode));
            py::dict d;
            d["p"] = o.p;
            d["q"] = o.q;
            d["rate"] = o.rate;
            return d;
        },
        py::arg("xi"), py::arg("mode"), "Rate-optimal (p, q) for mode 'L2', 'AS' or 'DET'.");

    py::class_<LinearProblem>(m, "LinearProblem")
        .def_static(
            "from_dense",
            [](const DenseMatrix& op, const Vector& data) { return LinearProblem::from_dense(op, data); },
            py::arg("op"), py::arg("data"), "f(x) = |A x - y|^2 / 2 with one block per row.")
        .def_property_readonly("name", &LinearProblem::name)
        .def_property_readonly("dimension", &LinearProblem::dimension)
        .def_property_readonly("rows", &LinearProblem::rows)
        .def_property_readonly("block_count", &LinearProblem::block_count)
        .def_property_readonly("smoothness", &LinearProblem::smoothness)
        .def_property_readonly("data", &LinearProblem::data)
        .def_property_readonly("ground_truth", &LinearProblem::ground_truth)
        .def("dense_operator", &LinearProblem::dense_operator)
        .def("value", &LinearProblem::value, py::arg("x"))
        .def(
            "gradient", [](const LinearProblem& p, const Vector& x) { return p.gradient(x); }, py::arg("x"));

    m.def("toy_problem", &toy_problem, "f(x1, x2) = (x1 + x2 - 1)^2 / 2.");
    m.def("ode_problem", &ode_problem, py::arg("mesh_exponent"), py::arg("n_obs"), py::arg("seed"));
    m.def(
        "radon_problem",
        [](int image_size, int n_angles, int n_rays, std::optional<Vector> truth) {
            return radon_problem(image_size, n_angles, n_rays, truth ? *truth : shepp_logan_phantom(image_size));
        },
        py::arg("image_size"), py::arg("n_angles"), py::arg("n_rays"), py::arg("ground_truth") = py::none());
    m.def("diagonal_problem", &diagonal_problem, py::arg("size"), py::arg("decay"));
    m.def("shepp_logan_phantom", &shepp_logan_phantom, py::arg("image_size"));

    m.def(
        "min_norm_solution",
        [](const DenseMatrix& op, const Vector& y) { return min_norm_solution(SpectralDecomposition::compute(op), y); },
        py::arg("op"), py::arg("y"));
    m.def(
        "tikhonov_solution",
        [](const DenseMatrix& op, const Vector& y, double lambda) {
            return tikhonov_solution(SpectralDecomposition::compute(op), y, lambda);
        },
        py::arg("op"), py::arg("y"), py::arg("lam"));

    m.def(
        "run",
        [](const LinearProblem& problem, double c_alpha, py::object q, double c_lambda, py::object p,
           Index n_iterations, const std::string& variant, const std::string& noise, double sigma, double a_coeff,
           std::size_t batch_size, const std::string& init, std::optional<Vector> x0, std::size_t n_replicas,
           std::uint64_t seed, double record_ratio) {
            OptimizerConfig c;
            c.schedule = make_schedule(c_alpha, text_of(q), c_lambda, text_of(p));
            c.n_iterations = n_iterations;
            c.variant = parse_variant(variant);
            c.noise.kind = parse_noise_kind(noise);
            c.noise.sigma = sigma;
            c.noise.a_coeff = a_coeff;
            c.batch_size = batch_size;
            c.init = parse_initial_point(init);
            if (x0)
            {
                c.x0 = *x0;
            }
            c.record.ratio = record_ratio;
            const auto oracle = make_oracle(problem);
            MonteCarloResult mc;
            {
                py::gil_scoped_release release;
                mc = monte_carlo(problem, c, n_replicas, seed, oracle.get());
            }
            py::list replicas;
            for (const auto& r : mc.replicas)
            {
                replicas.append(r.trajectory ? trajectory_dict(*r.trajectory) : py::dict());
            }
            py::dict d;
            d["mean"] = mc.n_diverged == mc.replicas.size() ? py::dict() : trajectory_dict(mc.mean);
            d["replicas"] = replicas;
            d["n_diverged"] = mc.n_diverged;
            return d;
        },
        py::arg("problem"), py::arg("c_alpha"), py::arg("q"), py::arg("c_lambda"), py::arg("p"),
        py::arg("n_iterations"), py::arg("variant") = "reg_sgd", py::arg("noise") = "none", py::arg("sigma") = 0.0,
        py::arg("a_coeff") = 0.0, py::arg("batch_size") = 1, py::arg("init") = "zero", py::arg("x0") = py::none(),
        py::arg("n_replicas") = 1, py::arg("seed") = 0, py::arg("record_ratio") = 1.05,
        "Monte Carlo run; returns the mean trajectory, per-replica trajectories and the divergence count.");

    m.def(
        "estimate_rate",
        [](const std::vector<Index>& ks, const std::vector<double>& errors, double tail_fraction) {
            const auto r = estimate_rate(ks, errors, tail_fraction);
            py::dict d;
            d["exponent"] = r.exponent;
            d["intercept"] = r.intercept;
            d["r_squared"] = r.r_squared;
            d["n_points"] = r.n_points;
            d["n_excluded"] = r.n_excluded;
            return d;
        },
        py::arg("ks"), py::arg("errors"), py::arg("tail_fraction") = kDefaultTailFraction,
        "Least-squares fit of errors ~ c k^-exponent over the tail.");

    m.def(
        "theoretical_heatmap",
        [](const std::string& mode, double xi, const std::vector<double>& p_grid, const std::vector<double>& q_grid,
           double beta_gap) {
            const auto sweep = theoretical_heatmap(parse_rate_mode(mode), xi, p_grid, q_grid, beta_gap);
            DenseMatrix values(static_cast<Eigen::Index>(p_grid.size()), static_cast<Eigen::Index>(q_grid.size()));
            for (std::size_t i = 0; i < p_grid.size(); ++i)
            {
                for (std::size_t j = 0; j < q_grid.size(); ++j)
                {
                    values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = sweep.at(i, j).theoretical;
                }
            }
            py::dict d;
            d["values"] = values;
            d["best"] = py::make_tuple(sweep.best().p, sweep.best().q, sweep.best().theoretical);
            return d;
        },
        py::arg("mode"), py::arg("xi"), py::arg("p_grid"), py::arg("q_grid"), py::arg("beta_gap") = kDefaultBetaGap,
        "Predicted squared-distance exponent per (p, q) cell, rows indexed by p.");

    m.def(
        "run_config",
        [](const std::string& path, std::optional<std::string> output_dir) {
            auto config = load_experiment(path);
            if (output_dir)
            {
                config.output_dir = *output_dir;
            }
            std::ostringstream out, err;
            int code = 0;
            {
                py::gil_scoped_release release;
                code = cli_run(config, out, err);
            }
            return py::make_tuple(code, out.str() + err.str());
        },
        py::arg("path"), py::arg("output_dir") = py::none(),
        "Runs a config file like the command line tool; returns (exit code, printed report).");
}
