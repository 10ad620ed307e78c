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

#include "regdescent/config.hpp"
#include "regdescent/experiment.hpp"
#include "regdescent/io.hpp"

#include "test_oracles.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace regdescent;
namespace fs = std::filesystem;
namespace rt = regdescent::testing;

namespace
{

const fs::path kSource = REG_DESCENT_SOURCE_DIR;

fs::path scratch_dir(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / ("regdescent_unit_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

ExperimentConfig small_toy(const fs::path& out)
{
    auto e = ExperimentConfig::from_config(Config::load(kSource / "configs" / "toy.cfg"));
    e.optimizer.n_iterations = 2000;
    e.n_replicas = 3;
    e.output_dir = out;
    return e;
}

}  // namespace

TEST_SUITE("config")
{
    TEST_CASE("grammar")
    {
        const auto c = Config::parse("# comment\nname = demo  # trailing\n\n[schedule]\nq = 2/3\n  p=0.25\n[noise]\nkind = none\n");
        CHECK(c.get("name") == std::optional<std::string>("demo"));
        CHECK(c.require("schedule.q") == "2/3");
        CHECK(c.get_double("schedule.p", 0.0) == 0.25);
        CHECK(c.get_string("noise.kind", "x") == "none");
        CHECK_FALSE(c.has("noise.sigma"));
        CHECK(c.get_double("noise.sigma", 1.5) == 1.5);
        CHECK_THROWS_AS(c.require("noise.sigma"), ConfigError);
    }

    TEST_CASE("syntax errors carry the line")
    {
        CHECK_THROWS_AS(Config::parse("[broken\n"), ConfigError);
        CHECK_THROWS_AS(Config::parse("just words\n"), ConfigError);
        CHECK_THROWS_AS(Config::parse("a = 1\na = 2\n"), ConfigError);
        try
        {
            Config::parse("ok = 1\n[s]\nnot a pair\n", "demo.cfg");
            FAIL("expected a ConfigError");
        }
        catch (const ConfigError& e)
        {
            CHECK(std::string(e.what()).find("demo.cfg:3") != std::string::npos);
        }
        CHECK_THROWS_AS(Config::load("/nonexistent/file.cfg"), ConfigError);
    }

    TEST_CASE("typed getters")
    {
        const auto c = Config::parse("i = -4\nu = 7\nb = true\nd = 1e-3\nbad = x\n");
        CHECK(c.get_int("i", 0) == -4);
        CHECK(c.get_u64("u", 0) == 7);
        CHECK(c.get_bool("b", false));
        CHECK(c.get_double("d", 0.0) == 1e-3);
        CHECK_THROWS_AS(c.get_int("bad", 0), ConfigError);
        CHECK_THROWS_AS(c.get_double("bad", 0), ConfigError);
        CHECK_THROWS_AS(c.get_bool("bad", false), ConfigError);
        CHECK_THROWS_AS(c.get_u64("i", 0), ConfigError);
        CHECK_THROWS_AS(parse_int("1.5", "x"), ConfigError);
    }

    TEST_CASE("serialization round-trips")
    {
        auto c = Config::parse("z = 1\n[b]\ny = 2\nx = 3\n[a]\nw = 4\n");
        const std::string text = c.serialize();
        CHECK(text == "z = 1\n\n[a]\nw = 4\n\n[b]\nx = 3\ny = 2\n");
        CHECK(Config::parse(text) == c);
        c.set("a.v", "5");
        c.erase("z");
        CHECK(c.get("a.v") == std::optional<std::string>("5"));
        CHECK_FALSE(c.has("z"));
    }

    TEST_CASE("doubles format to the shortest round-trip text")
    {
        for (double v : {0.1, 1.0 / 3.0, 1e-300, 99.9654, -2.5, 0.0})
        {
            CHECK(parse_double(format_double(v), "v") == v);
        }
        CHECK(format_double(0.1) == "0.1");
        CHECK(format_double(100.0) == "100");
    }

    TEST_CASE("grids")
    {
        CHECK(parse_grid("0.1, 0.2,0.5") == std::vector<double>{0.1, 0.2, 0.5});
        const auto lin = parse_grid("linspace(0, 1, 5)");
        REQUIRE(lin.size() == 5);
        CHECK(lin[2] == doctest::Approx(0.5));
        CHECK(parse_grid("open(0, 1, 4)") == open_grid(0.0, 1.0, 4));
        CHECK_THROWS_AS(parse_grid("0.5, 0.2"), ConfigError);
        CHECK_THROWS_AS(parse_grid("linspace(0, 1)"), ConfigError);
        CHECK_THROWS_AS(parse_grid(""), ConfigError);
    }
}

TEST_SUITE("io")
{
    TEST_CASE("matrix and vector files round-trip")
    {
        const fs::path dir = scratch_dir("io");
        std::mt19937_64 rng(1);
        const DenseMatrix m = rt::random_gaussian(3, 4, rng);
        write_matrix(dir / "m.txt", m);
        CHECK(read_matrix(dir / "m.txt") == m);
        const Vector v = rt::random_vector(5, rng);
        write_vector(dir / "v.txt", v);
        CHECK(read_vector(dir / "v.txt") == v);
        CHECK_THROWS_AS(read_vector(dir / "m.txt"), IoError);
        CHECK_THROWS_AS(read_matrix(dir / "missing.txt"), IoError);

        write_text_file(dir / "short.txt", "2 2\n1 2 3\n");
        CHECK_THROWS_AS(read_matrix(dir / "short.txt"), IoError);
        write_text_file(dir / "long.txt", "1 2\n1 2 3\n");
        CHECK_THROWS_AS(read_matrix(dir / "long.txt"), IoError);
        write_text_file(dir / "header.txt", "two 2\n1 2 3 4\n");
        CHECK_THROWS_AS(read_matrix(dir / "header.txt"), IoError);
    }

    TEST_CASE("trajectory CSV schema")
    {
        Trajectory t;
        t.iterations = {0, 1};
        t.alpha = {std::nan(""), 0.5};
        t.lambda = {std::nan(""), 0.25};
        t.f_gap = {0.5, 0.0};
        t.dist_sq_to_xstar = {0.5, 0.125};
        t.max_norm = {0.0, 1.0};
        std::ostringstream out;
        write_trajectory_csv(out, t);
        CHECK(out.str() == "k,alpha,lambda,f_gap,dist_sq_xstar,dist_sq_xlambda,energy,max_norm\n"
                           "0,,,0.5,0.5,,,0\n"
                           "1,0.5,0.25,0,0.125,,,1\n");
    }

    TEST_CASE("heatmap CSV")
    {
        const auto sweep = theoretical_heatmap(RateMode::L2, 0.25, {0.25, 0.6}, {0.625});
        std::ostringstream out;
        write_heatmap_csv(out, sweep);
        CHECK(out.str() == "p,q,theoretical_exponent,empirical_exponent,valid\n"
                           "0.25,0.625,0.125,,1\n"
                           "0.6,0.625,0,,0\n");
    }

    TEST_CASE("FNV-1a reference values")
    {
        CHECK(fnv1a_hex("") == "cbf29ce484222325");
        CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
        CHECK(fnv1a_hex("foobar") == "85944171f73967e8");
    }

    TEST_CASE("SVG plots embed provenance")
    {
        PlotSpec spec;
        spec.title = "demo <&>";
        spec.y_label = "error";
        spec.digest = "0123456789abcdef";
        spec.guide_exponent = 0.5;
        PlotSeries s;
        s.label = "mean";
        s.xs = {1, 10, 100, 1000};
        s.ys = {1, 0.3, 0.1, 0.0};
        spec.series.push_back(s);
        std::ostringstream out;
        write_loglog_svg(out, spec);
        const std::string svg = out.str();
        CHECK(svg.find("<svg") != std::string::npos);
        CHECK(svg.find("<!-- config-digest: fnv1a64:0123456789abcdef -->") != std::string::npos);
        CHECK(svg.find("<!-- generator: reg_descent") != std::string::npos);
        CHECK(svg.find("demo &lt;&amp;&gt;") != std::string::npos);
        CHECK(svg.find("stroke-dasharray") != std::string::npos);

        std::ostringstream heat;
        write_heatmap_svg(heat, theoretical_heatmap(RateMode::L2, 0.25, open_grid(0, 1, 5), open_grid(0, 1, 5)), "feed");
        CHECK(heat.str().find("fnv1a64:feed") != std::string::npos);
    }
}

TEST_SUITE("experiment")
{
    TEST_CASE("every bundled preset loads and round-trips")
    {
        for (const auto& entry : fs::directory_iterator(kSource / "configs"))
        {
            INFO(entry.path().string());
            const auto e = load_experiment(entry.path());
            const auto again = ExperimentConfig::from_config(e.to_config());
            CHECK(again.to_config() == e.to_config());
            CHECK(config_digest(again) == config_digest(e));
        }
    }

    TEST_CASE("config errors")
    {
        CHECK_THROWS_AS(ExperimentConfig::from_config(Config::parse("[problem]\nkind = toy\nbogus = 1\n")), ConfigError);
        CHECK_THROWS_AS(ExperimentConfig::from_config(Config::parse("[problem]\nkind = linear\n")), ConfigError);
        CHECK_THROWS_AS(ExperimentConfig::from_config(Config::parse("[problem]\nkind = linear\nmatrix_path = nope.txt\n"
                                                                    "y_path = nope.txt\n")),
                        ConfigError);
        CHECK_THROWS_AS(ExperimentConfig::from_config(Config::parse("[problem]\nkind = moon\n")), ConfigError);
        CHECK_THROWS_AS(ExperimentConfig::from_config(Config::parse("[schedule]\nq = two\n")), ConfigError);
        CHECK_THROWS_AS(ExperimentConfig::from_config(Config::parse("[experiment]\nn_replicas = 0\n")), ConfigError);
    }

    TEST_CASE("digest ignores the output directory")
    {
        auto a = small_toy("a");
        auto b = small_toy("b");
        CHECK(config_digest(a) == config_digest(b));
        b.master_seed += 1;
        CHECK(config_digest(a) != config_digest(b));
    }

    TEST_CASE("linear problems load from files relative to the config")
    {
        const fs::path dir = scratch_dir("linear");
        DenseMatrix a(2, 3);
        a << 1, 0, 1, 0, 1, 1;
        Vector y(2);
        y << 1, 2;
        write_matrix(dir / "a.txt", a);
        write_vector(dir / "y.txt", y);
        write_text_file(dir / "lin.cfg", "[problem]\nkind = linear\nmatrix_path = a.txt\ny_path = y.txt\n");
        const auto e = load_experiment(dir / "lin.cfg");
        const auto problem = build_problem(e.problem);
        CHECK(problem.dense_operator() == a);
        CHECK(problem.data() == y);
    }

    TEST_CASE("run writes trajectories, plots and the resolved config")
    {
        const fs::path dir = scratch_dir("run");
        std::ostringstream out, err;
        REQUIRE(cli_run(small_toy(dir), out, err) == kExitOk);
        for (const char* file : {"toy_config.txt", "toy_replica_0.csv", "toy_replica_2.csv", "toy_mean.csv",
                                 "toy_f_gap.svg", "toy_dist_sq.svg"})
        {
            INFO(file);
            CHECK(fs::exists(dir / file));
        }
        CHECK(slurp(dir / "toy_mean.csv").rfind(std::string(kTrajectoryHeader) + "\n", 0) == 0);
        CHECK(out.str().find("AS_RATE: applies") != std::string::npos);
        CHECK(out.str().find("fit dist_sq_xstar") != std::string::npos);
        CHECK(slurp(dir / "toy_dist_sq.svg").find("fnv1a64:" + config_digest(small_toy(dir))) != std::string::npos);
    }

    TEST_CASE("invalid schedules run with a warning")
    {
        const fs::path dir = scratch_dir("warn");
        auto e = small_toy(dir);
        e.optimizer.schedule.p = 0.67;
        e.optimizer.schedule.q = 0.5;
        std::ostringstream out, err;
        CHECK(cli_run(e, out, err) == kExitOk);
        CHECK(out.str().find("warning: schedule fails L2_RATE:") != std::string::npos);
        CHECK(out.str().find("q > p violated") != std::string::npos);
    }

    TEST_CASE("all replicas diverging exits 3")
    {
        const fs::path dir = scratch_dir("diverge");
        auto e = small_toy(dir);
        e.optimizer.schedule.c_alpha = 50.0;
        e.optimizer.schedule.q = 0.0;
        e.optimizer.n_iterations = 100000;
        std::ostringstream out, err;
        CHECK(cli_run(e, out, err) == kExitAllDiverged);
    }

    TEST_CASE("validate prints every theorem")
    {
        ValidateRequest r;
        r.p = Exponent::parse("0.25");
        r.q = Exponent::parse("0.625");
        r.xi = 0.25;
        std::ostringstream out, err;
        CHECK(cli_validate(r, out, err) == kExitOk);
        for (const char* id : {"L2_RATE: applies", "AS_RATE", "L2_GENERAL", "DET_RATE"})
        {
            CHECK(out.str().find(id) != std::string::npos);
        }
        CHECK(out.str().find("rate dist_sq_to_xstar: k^-0.125") != std::string::npos);

        r.p = 0.5;
        r.q = 0.5;
        std::ostringstream out2;
        cli_validate(r, out2, err);
        CHECK(out2.str().find("violated: q > p") != std::string::npos);
    }

    TEST_CASE("sweeps")
    {
        const fs::path dir = scratch_dir("sweep");
        auto e = load_experiment(kSource / "configs" / "sweep_l2.cfg");
        e.output_dir = dir;
        std::ostringstream out, err;
        REQUIRE(cli_sweep(e, out, err) == kExitOk);
        const std::string csv = slurp(dir / (e.name + "_heatmap.csv"));
        CHECK(csv.rfind("p,q,theoretical_exponent,empirical_exponent,valid\n", 0) == 0);
        CHECK(fs::exists(dir / (e.name + "_heatmap.svg")));

        const auto best = theoretical_heatmap(e.sweep->mode, e.sweep->xi, e.sweep->p_grid, e.sweep->q_grid).best();
        CHECK(std::abs(best.p - 0.25) < 0.02);
        CHECK(std::abs(best.q - 0.625) < 0.02);

        auto as = load_experiment(kSource / "configs" / "sweep_as.cfg");
        const auto as_best = theoretical_heatmap(as.sweep->mode, as.sweep->xi, as.sweep->p_grid, as.sweep->q_grid).best();
        CHECK(std::abs(as_best.p - 1.0 / 9.0) < 0.02);
        CHECK(std::abs(as_best.q - 2.0 / 3.0) < 0.02);

        auto capped = load_experiment(kSource / "configs" / "sweep_toy.cfg");
        capped.output_dir = dir;
        capped.sweep->p_grid = open_grid(0, 1, 9);
        capped.sweep->q_grid = open_grid(0, 1, 9);
        std::ostringstream err2;
        CHECK(cli_sweep(capped, out, err2) == kExitConfig);
        CHECK(err2.str().find("cap") != std::string::npos);

        auto plain = small_toy(dir);
        CHECK(cli_sweep(plain, out, err) == kExitConfig);
    }

    TEST_CASE("oracle artifacts")
    {
        const fs::path dir = scratch_dir("oracle");
        auto toy = small_toy(dir);
        std::ostringstream out, err;
        REQUIRE(cli_oracle(toy, out, err) == kExitOk);
        const Vector x_star = read_vector(dir / "toy_xstar.txt");
        CHECK((x_star - Vector::Constant(2, 0.5)).norm() < 1e-12);
        CHECK(slurp(dir / "toy_viscosity.csv").rfind("lambda,dist_to_xstar,norm_gap\n", 0) == 0);

        auto ode = load_experiment(kSource / "configs" / "ode.cfg");
        ode.output_dir = dir;
        REQUIRE(cli_oracle(ode, out, err) == kExitOk);
        const auto problem = build_problem(ode.problem);
        const Vector dense = rt::dense_min_norm(problem.dense_operator(), problem.data(), 1e-10);
        CHECK((read_vector(dir / "ode_xstar.txt") - dense).norm() <= 1e-8 * dense.norm());

        auto big = load_experiment(kSource / "configs" / "radon.cfg");
        big.problem.image_size = 64;
        big.output_dir = dir;
        CHECK(cli_oracle(big, out, err) == kExitOracleTooLarge);
    }

    TEST_CASE("reruns are byte-identical")
    {
        const fs::path a = scratch_dir("rerun_a");
        const fs::path b = scratch_dir("rerun_b");
        std::ostringstream out, err;
        REQUIRE(cli_run(small_toy(a), out, err) == kExitOk);
        REQUIRE(cli_run(small_toy(b), out, err) == kExitOk);
        for (const char* file : {"toy_replica_0.csv", "toy_replica_1.csv", "toy_mean.csv", "toy_dist_sq.svg"})
        {
            INFO(file);
            CHECK(slurp(a / file) == slurp(b / file));
        }
    }
}
