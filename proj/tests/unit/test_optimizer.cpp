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

#include "regdescent/optimizer.hpp"

#include "test_oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

using namespace regdescent;

namespace
{

OptimizerConfig toy_config()
{
    OptimizerConfig c;
    c.schedule.c_alpha = 0.1;
    c.schedule.q = Rational::make(2, 3);
    c.schedule.c_lambda = 1.0;
    c.schedule.p = Rational::make(1, 9);
    c.noise.kind = NoiseKind::GaussianIso;
    c.noise.sigma = 0.1;
    c.n_iterations = 2000;
    return c;
}

bool bitwise_equal(const Trajectory& a, const Trajectory& b)
{
    if (a.iterations != b.iterations || a.final_iterate.size() != b.final_iterate.size())
    {
        return false;
    }
    for (Index i = 0; i < a.final_iterate.size(); ++i)
    {
        if (a.final_iterate[i] != b.final_iterate[i])
        {
            return false;
        }
    }
    return a.dist_sq_to_xstar == b.dist_sq_to_xstar && a.f_gap == b.f_gap && a.max_norm == b.max_norm;
}

}  // namespace

TEST_SUITE("optimizer")
{
    TEST_CASE("record steps always include both ends")
    {
        RecordPolicy geometric;
        const auto steps = geometric.steps(1000);
        CHECK(steps.front() == 0);
        CHECK(steps.back() == 1000);
        CHECK(std::is_sorted(steps.begin(), steps.end()));
        CHECK(std::adjacent_find(steps.begin(), steps.end()) == steps.end());

        RecordPolicy arithmetic;
        arithmetic.kind = RecordPolicy::Kind::Arithmetic;
        arithmetic.stride = 300;
        CHECK(arithmetic.steps(1000) == std::vector<Index>{0, 300, 600, 900, 1000});

        arithmetic.include_predecessors = true;
        CHECK(arithmetic.steps(1000) == std::vector<Index>{0, 299, 300, 599, 600, 899, 900, 999, 1000});

        CHECK(geometric.steps(0) == std::vector<Index>{0});
        geometric.ratio = 1.0;
        CHECK_THROWS_AS(geometric.steps(10), std::invalid_argument);
    }

    TEST_CASE("gradient descent with constant step reaches a minimizer")
    {
        const auto toy = toy_problem();
        ClosedFormOracle oracle(toy);
        OptimizerConfig c;
        c.variant = Variant::RegGd;
        c.schedule.c_alpha = 0.1;
        c.schedule.q = 0.0;
        c.schedule.c_lambda = 0.0;
        c.schedule.p = 1.0;
        c.n_iterations = 1000;
        RngStream stream(1);
        const auto t = run(toy, c, stream, &oracle);
        CHECK(t.f_gap.back() < 1e-12);
        CHECK(stream.counter() == 0);
    }

    TEST_CASE("an empty run records the starting point only")
    {
        const auto toy = toy_problem();
        ClosedFormOracle oracle(toy);
        auto c = toy_config();
        c.n_iterations = 0;
        RngStream stream(1);
        const auto t = run(toy, c, stream, &oracle);
        REQUIRE(t.size() == 1);
        CHECK(t.iterations[0] == 0);
        CHECK(std::isnan(t.alpha[0]));
        CHECK(t.dist_sq_to_xstar[0] == doctest::Approx(0.5));
        CHECK(t.f_gap[0] == doctest::Approx(0.5));
    }

    TEST_CASE("diagnostics are absent without an oracle")
    {
        const auto toy = toy_problem();
        RngStream stream(1);
        const auto t = run(toy, toy_config(), stream);
        CHECK(t.f_gap.empty());
        CHECK(t.dist_sq_to_xstar.empty());
        CHECK(t.energy.empty());
        CHECK(t.max_norm.size() == t.size());
    }

    TEST_CASE("toy reg-SGD gets close to the minimum-norm point")
    {
        const auto toy = toy_problem();
        ClosedFormOracle oracle(toy);
        auto c = toy_config();
        c.n_iterations = 1000000;
        const auto mc = monte_carlo(toy, c, 10, 2024, &oracle);
        int close = 0;
        for (const auto& replica : mc.replicas)
        {
            REQUIRE(replica.trajectory);
            const auto& t = *replica.trajectory;
            close += t.dist_sq_to_xstar.back() < 1e-2 ? 1 : 0;
            CHECK(t.max_norm.back() < 10.0 * (std::sqrt(0.5) + 1.0));
        }
        CHECK(close >= 9);
    }

    TEST_CASE("zero noise with a full batch reproduces gradient descent bitwise")
    {
        const auto ode = ode_problem(6, 16, 2024);
        SpectralOracle oracle(ode);
        OptimizerConfig c;
        c.schedule.c_alpha = 100.0;
        c.schedule.q = Rational::make(2, 3);
        c.schedule.c_lambda = 0.001;
        c.schedule.p = Rational::make(1, 3);
        c.batch_size = 16;
        c.n_iterations = 3000;
        RngStream s1(5);
        const auto sgd = run(ode, c, s1, &oracle);
        c.variant = Variant::RegGd;
        RngStream s2(5);
        const auto gd = run(ode, c, s2, &oracle);
        CHECK(bitwise_equal(sgd, gd));
        CHECK(sgd.energy == gd.energy);

        c.variant = Variant::RegSgd;
        const auto mc = monte_carlo(ode, c, 3, 9, &oracle, 2);
        for (const auto& r : mc.replicas)
        {
            CHECK(bitwise_equal(*r.trajectory, gd));
        }
    }

    TEST_CASE("zero regularization reproduces vanilla SGD bitwise")
    {
        const auto ode = ode_problem(6, 16, 2024);
        SpectralOracle oracle(ode);
        OptimizerConfig c;
        c.schedule.c_alpha = 50.0;
        c.schedule.q = 0.5;
        c.schedule.c_lambda = 0.0;
        c.schedule.p = Rational::make(1, 3);
        c.noise.kind = NoiseKind::GaussianIso;
        c.noise.sigma = 0.001;
        c.batch_size = 4;
        c.n_iterations = 5000;
        c.init = InitialPoint::Gaussian;
        RngStream s1(77, 2);
        const auto reg = run(ode, c, s1, &oracle);
        c.variant = Variant::VanillaSgd;
        c.schedule.c_lambda = 0.3;
        RngStream s2(77, 2);
        const auto vanilla = run(ode, c, s2, &oracle);
        CHECK(bitwise_equal(reg, vanilla));
        CHECK(s1.counter() == s2.counter());
    }

    TEST_CASE("same stream, same trajectory; worker count does not matter")
    {
        const auto ode = ode_problem(6, 16, 2024);
        SpectralOracle oracle(ode);
        OptimizerConfig c;
        c.schedule.c_alpha = 100.0;
        c.schedule.q = Rational::make(2, 3);
        c.schedule.c_lambda = 0.001;
        c.schedule.p = Rational::make(1, 3);
        c.noise.kind = NoiseKind::GaussianIso;
        c.noise.sigma = 0.001;
        c.batch_size = 4;
        c.n_iterations = 4000;
        const auto a = monte_carlo(ode, c, 4, 123, &oracle, 1);
        const auto b = monte_carlo(ode, c, 4, 123, &oracle, 3);
        for (std::size_t r = 0; r < 4; ++r)
        {
            CHECK(bitwise_equal(*a.replicas[r].trajectory, *b.replicas[r].trajectory));
        }
        CHECK(bitwise_equal(a.mean, b.mean));
        CHECK_FALSE(bitwise_equal(*a.replicas[0].trajectory, *a.replicas[1].trajectory));
    }

    TEST_CASE("the mean trajectory is the pointwise replica average")
    {
        const auto toy = toy_problem();
        ClosedFormOracle oracle(toy);
        const auto mc = monte_carlo(toy, toy_config(), 5, 3, &oracle);
        for (std::size_t i = 0; i < mc.mean.size(); ++i)
        {
            double total = 0.0;
            for (const auto& r : mc.replicas)
            {
                total += r.trajectory->dist_sq_to_xstar[i];
            }
            CHECK(mc.mean.dist_sq_to_xstar[i] == doctest::Approx(total / 5.0).epsilon(1e-12));
        }
    }

    TEST_CASE("divergence is reported with the last finite iterate")
    {
        const auto toy = toy_problem();
        OptimizerConfig c;
        c.variant = Variant::RegGd;
        c.schedule.c_alpha = 5.0;
        c.schedule.q = 0.0;
        c.schedule.c_lambda = 0.0;
        c.schedule.p = 1.0;
        c.n_iterations = 100000;
        RngStream stream(1);
        try
        {
            run(toy, c, stream);
            FAIL("expected divergence");
        }
        catch (const DivergenceError& e)
        {
            CHECK(e.step() > 1);
            CHECK(e.last_finite_iterate().allFinite());
        }
        const auto mc = monte_carlo(toy, c, 3, 1);
        CHECK(mc.all_diverged());
        CHECK(mc.n_diverged == 3);
        CHECK(mc.replicas[0].diverged_at);
    }

    TEST_CASE("configuration errors")
    {
        const auto toy = toy_problem();
        RngStream stream(1);
        auto c = toy_config();
        c.init = InitialPoint::Explicit;
        c.x0 = Vector::Zero(3);
        CHECK_THROWS_AS(run(toy, c, stream), std::invalid_argument);

        c = toy_config();
        c.batch_size = 2;
        CHECK_THROWS_AS(run(toy, c, stream), std::invalid_argument);

        c = toy_config();
        c.noise.kind = NoiseKind::AbcScaled;
        c.noise.a_coeff = 1.0;
        CHECK_THROWS_AS(run(toy, c, stream), std::invalid_argument);

        c = toy_config();
        c.n_iterations = -1;
        CHECK_THROWS_AS(run(toy, c, stream), std::invalid_argument);

        CHECK_THROWS_AS(monte_carlo(toy, toy_config(), 0, 1), std::invalid_argument);
        CHECK_THROWS_AS(parse_variant("adam"), std::invalid_argument);
        CHECK(parse_variant(to_string(Variant::VanillaSgd)) == Variant::VanillaSgd);
        CHECK(parse_initial_point(to_string(InitialPoint::Gaussian)) == InitialPoint::Gaussian);
    }

    TEST_CASE("explicit start point")
    {
        const auto toy = toy_problem();
        ClosedFormOracle oracle(toy);
        auto c = toy_config();
        c.init = InitialPoint::Explicit;
        c.x0 = Vector::Constant(2, 0.5);
        c.n_iterations = 0;
        RngStream stream(1);
        const auto t = run(toy, c, stream, &oracle);
        CHECK(t.dist_sq_to_xstar[0] == 0.0);
        CHECK(t.max_norm[0] == doctest::Approx(std::sqrt(0.5)));
    }

    TEST_CASE("noise-free energy obeys the one-step descent bound on the toy problem")
    {
        const auto toy = toy_problem();
        ClosedFormOracle oracle(toy);
        OptimizerConfig c;
        c.schedule.c_alpha = 0.5;
        c.schedule.q = 0.5;
        c.schedule.c_lambda = 1.0;
        c.schedule.p = 0.25;
        c.n_iterations = 5000;
        c.init = InitialPoint::Explicit;
        c.x0 = Vector::Constant(2, 3.0);
        c.record.kind = RecordPolicy::Kind::Arithmetic;
        c.record.stride = 1;
        RngStream stream(1);
        const auto t = run(toy, c, stream, &oracle);
        const double l = toy.smoothness();
        const double x_star_sq = 0.5;
        REQUIRE(t.energy.size() == t.size());
        for (std::size_t i = 1; i < t.size(); ++i)
        {
            const Index k = t.iterations[i];
            const auto now = schedule_at(c.schedule, k);
            const auto next = schedule_at(c.schedule, k + 1);
            REQUIRE(now.alpha <= 2.0 / (l + now.lambda));
            const double contraction = 1.0 - 2.0 * now.lambda * now.alpha * (1.0 - (l + now.lambda) * now.alpha / 2.0);
            const double bound = contraction * t.energy[i - 1] + (now.lambda - next.lambda) * x_star_sq / 2.0;
            REQUIRE(t.energy[i] <= bound * (1.0 + 1e-10) + 1e-15);
        }
    }
}
