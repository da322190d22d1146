// SPDX-License-Identifier: Apache-2.0
//
// statmap: statistical radio maps for reliable rate selection
// Copyright (C) 2026 The statmap Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "doctest.h"

#include "statmap/errors.hpp"
#include "statmap/harness.hpp"
#include "statmap/io.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace statmap;
using namespace statmap::harness;
namespace fs = std::filesystem;
using nlohmann::json;

namespace
{
    fs::path scratch(const std::string &name)
    {
        const fs::path p = fs::temp_directory_path() / "statmap_test_harness" / name;
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }

    ExperimentConfig small_location()
    {
        ExperimentConfig c;
        c.n_train_users = 60;
        c.samples_per_user = 300;
        c.epsilon = 0.05;
        c.delta = 0.05;
        c.n_test_users = 40;
        c.gp.restarts = 1;
        c.gp.max_iterations = 200;
        c.seed = 3;
        return c;
    }

    ExperimentConfig small_chart()
    {
        ExperimentConfig c = small_location();
        c.mode = Mode::chart;
        c.chart.n_train_users = 80;
        c.chart.n_triplets = 400;
        c.chart.reduced_subcarriers = 8;
        c.chart.hidden = {16, 8};
        c.chart.train.epochs = 3;
        c.chart.train.batch = 32;
        c.chart.gp = {1, 100, gpmap::KernelFamily::exponential, 0};
        c.chart.csi_band = {4, 16, 5e6, 0.0857, 0};
        c.chart.power_band = {2, 8, 2e6, 0.375, 0};
        c.n_test_users = 30;
        return c;
    }

    std::vector<std::vector<std::string>> read_csv(const fs::path &p)
    {
        std::ifstream f(p);
        std::vector<std::vector<std::string>> rows;
        std::string line;
        while (std::getline(f, line))
        {
            std::vector<std::string> cells;
            std::stringstream ss(line);
            std::string cell;
            while (std::getline(ss, cell, ','))
                cells.push_back(cell);
            rows.push_back(cells);
        }
        return rows;
    }

    template <class E, class F>
    std::string thrown_message(F &&f)
    {
        try
        {
            f();
        }
        catch (const E &e)
        {
            return e.what();
        }
        return "";
    }
}

TEST_CASE("config round trip through JSON")
{
    ExperimentConfig c = small_chart();
    c.scenario.num_paths = 5;
    c.scenario.bs_location = {-90.0, 3.0, 12.0};
    c.point_process.offspring_std = 4.5;
    c.gp.kernel = gpmap::KernelFamily::squared_exponential;
    c.mismatch.sample_sizes = {200, 400};
    const json j = config_to_json(c);
    const auto back = config_from_json(j);
    CHECK(config_to_json(back) == j);
    CHECK(back.scenario.bs_location == c.scenario.bs_location);
    CHECK(back.chart.csi_band.num_antennas == 4);
    CHECK(back.gp.kernel == gpmap::KernelFamily::squared_exponential);
    CHECK(back.mode == Mode::chart);
    // partial documents keep defaults
    const auto partial = config_from_json(json{{"seed", 9}});
    CHECK(partial.seed == 9);
    CHECK(config_to_json(partial)["scenario"] == config_to_json(ExperimentConfig{})["scenario"]);
}

TEST_CASE("config rejects unknown keys and bad values")
{
    CHECK_THROWS_AS(config_from_json(json{{"bogus", 1}}), ConfigError);
    CHECK_THROWS_AS(config_from_json(json{{"scenario", {{"cell_sise", 1.0}}}}), ConfigError);
    CHECK_THROWS_AS(config_from_json(json{{"chart", {{"csi_band", {{"antennas", 2}}}}}}), ConfigError);
    CHECK_THROWS_AS(config_from_json(json{{"gp", {{"kernel", "matern"}}}}), ConfigError);
    CHECK_THROWS_AS(config_from_json(json{{"seed", "one"}}), ConfigError);
    CHECK_THROWS_AS(config_from_json(json{{"mode", "hybrid"}}), ConfigError);
    CHECK_THROWS_AS(config_from_json(json::array()), ConfigError);
    const auto msg = thrown_message<ConfigError>([] { config_from_json(json{{"scenario", {{"cell_sise", 1.0}}}}); });
    CHECK(msg.find("cell_sise") != std::string::npos);

    ExperimentConfig c;
    CHECK_NOTHROW(c.validate());
    c.samples_per_user = 100; // not > 1/epsilon
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = ExperimentConfig{};
    c.epsilon = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = ExperimentConfig{};
    c.delta = 1.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = ExperimentConfig{};
    c.oracle_n = 50;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = ExperimentConfig{};
    c.mismatch.sample_sizes = {50};
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = ExperimentConfig{};
    c.scenario.num_paths = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("full scale settings and effective counts")
{
    ExperimentConfig c;
    CHECK(c.effective_oracle_n() == 10000);
    CHECK(c.effective_n_mc() == 10000);
    c.apply_full_scale();
    CHECK(c.epsilon == 1e-3);
    CHECK(c.delta == 1e-3);
    CHECK(c.n_train_users == 500);
    CHECK(c.chart.n_train_users == 5000);
    CHECK(c.samples_per_user > 1000);
    CHECK(c.effective_oracle_n() >= 100000);
    CHECK_NOTHROW(c.validate());
}

TEST_CASE("config files")
{
    const auto dir = scratch("config");
    CHECK_THROWS_AS(load_config((dir / "missing.json").string()), IoError);
    write_text_file((dir / "bad.json").string(), "{\"seed\": ");
    CHECK_THROWS_AS(load_config((dir / "bad.json").string()), ConfigError);
    write_text_file((dir / "ok.json").string(), "{\"seed\": 4, \"epsilon\": 0.02}");
    const auto c = load_config((dir / "ok.json").string());
    CHECK(c.seed == 4);
    CHECK(c.epsilon == 0.02);
}

TEST_CASE("dataset round trip is lossless")
{
    const auto dir = scratch("dataset");
    ExperimentConfig c = small_location();
    c.n_train_users = 500;
    c.samples_per_user = 30;
    const auto d = simulate_dataset(c, 5);
    REQUIRE(d.users.size() == 500);
    io::save_dataset(d, (dir / "d.jsonl").string());
    CHECK(io::load_dataset((dir / "d.jsonl").string()) == d);

    ExperimentConfig cc = small_chart();
    cc.chart.n_train_users = 5;
    const auto dc = simulate_dataset(cc, 6);
    REQUIRE(dc.users.front().csi.has_value());
    CHECK(dc.users.front().csi->rows() == 4);
    CHECK(dc.users.front().csi->cols() == 16);
    io::save_dataset(dc, (dir / "c.jsonl").string());
    CHECK(io::load_dataset((dir / "c.jsonl").string()) == dc);

    UserRecord bare;
    bare.user_id = 42;
    bare.power_samples = {0.1, 1e-300, 3.0};
    const auto parsed = io::parse_dataset_record(io::dataset_record_line(bare), 1);
    CHECK(parsed == bare);
    CHECK_FALSE(parsed.location.has_value());
}

TEST_CASE("dataset parse errors name the line")
{
    const auto dir = scratch("truncated");
    ExperimentConfig c = small_location();
    c.n_train_users = 10;
    c.samples_per_user = 30;
    const auto path = (dir / "d.jsonl").string();
    io::save_dataset(simulate_dataset(c, 7), path);
    auto text = read_text_file(path);
    std::size_t cut = 0;
    for (int line = 0; line < 3; ++line)
        cut = text.find('\n', cut) + 1;
    write_text_file(path, text.substr(0, cut + 40));
    const auto msg = thrown_message<ParseError>([&] { io::load_dataset(path); });
    CHECK(msg.find("line 4") != std::string::npos);

    CHECK_THROWS_AS(io::parse_dataset_record(R"({"version":2,"user_id":0,"power_samples":[1]})", 1), ParseError);
    CHECK_THROWS_AS(io::parse_dataset_record(R"({"version":1,"power_samples":[1]})", 1), ParseError);
    CHECK_THROWS_AS(io::parse_dataset_record(R"({"version":1,"user_id":0,"power_samples":"x"})", 1), ParseError);
    CHECK_THROWS_AS(io::parse_dataset_record(
                        R"({"version":1,"user_id":0,"power_samples":[1],"csi":{"re":[[1,2]],"im":[[1]]}})", 1),
                    ParseError);
    const auto vmsg = thrown_message<ParseError>(
        [] { io::parse_dataset_record(R"({"version":7,"user_id":0,"power_samples":[1]})", 12); });
    CHECK(vmsg.find("12") != std::string::npos);
    CHECK(vmsg.find("version") != std::string::npos);
    CHECK_THROWS_AS(io::load_dataset((dir / "none.jsonl").string()), IoError);
}

TEST_CASE("map round trip and checksum verification")
{
    const ExperimentConfig c = small_location();
    const auto d = simulate_dataset(c, c.seed);
    const auto m = fit_location_map(c, d, c.seed);
    const auto text = io::map_to_string(m);
    const auto back = io::map_from_string(text);
    CHECK(io::map_to_string(back) == text);
    CHECK(back.epsilon == m.epsilon);
    CHECK(back.coordinates == "location");
    CHECK(back.map.hyper().family == m.map.hyper().family);
    for (const gpmap::Point2 q : {gpmap::Point2{0, 0}, gpmap::Point2{-50, 73.2}, gpmap::Point2{99, -99}})
    {
        CHECK(back.map.predict(q).mean == m.map.predict(q).mean);
        CHECK(back.map.predict(q).variance == m.map.predict(q).variance);
    }

    json j = json::parse(text);
    j["coords"][0][0] = j["coords"][0][0].get<double>() + 0.5;
    const auto msg = thrown_message<ParseError>([&] { io::map_from_string(j.dump()); });
    CHECK(msg.find("checksum") != std::string::npos);

    j = json::parse(text);
    j["kernel_checksum"]["trace"] = j["kernel_checksum"]["trace"].get<double>() * 1.01;
    CHECK_THROWS_AS(io::map_from_string(j.dump()), ParseError);
    j = json::parse(text);
    j["version"] = 99;
    CHECK_THROWS_AS(io::map_from_string(j.dump()), ParseError);
    j = json::parse(text);
    j["hyperparams"].erase("kernel");
    CHECK_THROWS_AS(io::map_from_string(j.dump()), ParseError);
    j = json::parse(text);
    j["hyperparams"]["kernel"] = "cubic";
    CHECK_THROWS_AS(io::map_from_string(j.dump()), ParseError);
    j = json::parse(text);
    j["format"] = "statmap.chart";
    CHECK_THROWS_AS(io::map_from_string(j.dump()), ParseError);
    CHECK_THROWS_AS(io::map_from_string(text.substr(0, text.size() / 2)), ParseError);
}

TEST_CASE("chart model round trip")
{
    const auto model = chart::ChartModel::initialize({7, 5, 3, 2}, 11);
    const auto text = io::chart_to_string(model);
    const auto back = io::chart_from_string(text);
    CHECK(back == model);
    CHECK(io::chart_to_string(back) == text);
    json j = json::parse(text);
    j["dims"][1] = 6;
    CHECK_THROWS_AS(io::chart_from_string(j.dump()), ParseError);
    j = json::parse(text);
    j["version"] = 0;
    CHECK_THROWS_AS(io::chart_from_string(j.dump()), ParseError);
    CHECK_THROWS_AS(io::chart_from_string("{"), ParseError);
}

TEST_CASE("location experiment report is self-consistent and deterministic")
{
    const ExperimentConfig c = small_location();
    const auto rep = run_location_experiment(c);
    REQUIRE(rep.rows.size() == 2 * static_cast<std::size_t>(c.n_test_users));
    for (std::size_t i = 1; i < rep.rows.size(); ++i)
    {
        const auto &a = rep.rows[i - 1], &b = rep.rows[i];
        CHECK((a.user_id < b.user_id || (a.user_id == b.user_id && a.policy < b.policy)));
    }
    for (auto p : {rateselect::Policy::map_quantile, rateselect::Policy::nearest_neighbor})
    {
        std::size_t n = 0, bad = 0;
        for (const auto &r : rep.rows)
            if (r.policy == p)
            {
                ++n;
                bad += r.outage_prob > c.epsilon ? 1 : 0;
            }
        CHECK(rep.violation_fraction(p) == static_cast<double>(bad) / static_cast<double>(n));
    }
    for (const auto &r : rep.rows)
    {
        CHECK(r.rate >= 0.0);
        CHECK(r.outage_prob >= 0.0);
        CHECK(r.outage_prob <= 1.0);
        if (r.policy == rateselect::Policy::map_quantile)
            CHECK(r.rate == rateselect::select_rate_map({r.pred_mean, r.pred_var}, c.delta).rate);
    }

    const auto dir = scratch("report");
    write_report(rep, (dir / "a").string());
    const auto again = run_location_experiment(c);
    write_report(again, (dir / "b").string());
    for (const char *f : {"report_users.csv", "report_summary.csv", "outage_cdf.csv", "report.json"})
        CHECK(read_text_file((dir / "a" / f).string()) == read_text_file((dir / "b" / f).string()));

    // summary file recomputed from the users file
    const auto users = read_csv(dir / "a" / "report_users.csv");
    const auto summary = read_csv(dir / "a" / "report_summary.csv");
    REQUIRE(users.size() == rep.rows.size() + 1);
    CHECK(users[0][6] == "policy");
    REQUIRE(summary.size() == 3);
    for (std::size_t s = 1; s < summary.size(); ++s)
    {
        std::size_t n = 0, bad = 0;
        for (std::size_t u = 1; u < users.size(); ++u)
            if (users[u][6] == summary[s][0])
            {
                ++n;
                bad += std::stod(users[u][5]) > c.epsilon ? 1 : 0;
            }
        CHECK(std::stoul(summary[s][2]) == n);
        CHECK(std::stod(summary[s][1]) == static_cast<double>(bad) / static_cast<double>(n));
    }

    const auto cdf = read_csv(dir / "a" / "outage_cdf.csv");
    CHECK(cdf[0] == std::vector<std::string>{"policy", "outage_prob", "cdf"});
    double prev = 0.0;
    std::string policy;
    for (std::size_t i = 1; i < cdf.size(); ++i)
    {
        if (cdf[i][0] != policy)
        {
            policy = cdf[i][0];
            prev = 0.0;
        }
        const double v = std::stod(cdf[i][2]);
        CHECK(v >= prev);
        prev = v;
    }
    CHECK(prev == 1.0);

    double se = 0.0, var = 0.0;
    for (const auto &r : rep.rows)
        if (r.policy == rateselect::Policy::map_quantile)
        {
            se += (r.true_ceps - r.pred_mean) * (r.true_ceps - r.pred_mean);
            var += r.pred_var;
        }
    const auto &cal = rep.details["prediction_calibration"];
    CHECK(cal["rmse"].get<double>() == doctest::Approx(std::sqrt(se / c.n_test_users)).epsilon(1e-12));
    CHECK(cal["rms_predictive_sd"].get<double>() == doctest::Approx(std::sqrt(var / c.n_test_users)).epsilon(1e-12));

    const json rj = json::parse(read_text_file((dir / "a" / "report.json").string()));
    CHECK(rj["format"] == "statmap.report");
    CHECK(rj["details"]["n_test_users"] == c.n_test_users);
    CHECK(rj["config"] == config_to_json(c));
}

TEST_CASE("lowering delta never raises a selected rate")
{
    ExperimentConfig lo = small_location();
    lo.delta = 0.01;
    ExperimentConfig hi = lo;
    hi.delta = 0.3;
    const auto a = run_location_experiment(lo);
    const auto b = run_location_experiment(hi);
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i)
    {
        REQUIRE(a.rows[i].user_id == b.rows[i].user_id);
        REQUIRE(a.rows[i].policy == b.rows[i].policy);
        CHECK(a.rows[i].rate <= b.rows[i].rate);
        CHECK(a.rows[i].true_ceps == b.rows[i].true_ceps);
    }
}

TEST_CASE("experiment stage failures carry the stage name")
{
    ExperimentConfig c = small_location();
    Dataset d = simulate_dataset(c, 1);
    d.users[3].power_samples.resize(5);
    const auto msg = thrown_message<InsufficientSamples>([&] { fit_location_map(c, d, 1); });
    CHECK(msg.find("user 3") != std::string::npos);
    d.users[3].location.reset();
    CHECK_THROWS_AS(fit_location_map(c, d, 1), ConfigError);
    ExperimentConfig wrong = small_location();
    wrong.mode = Mode::chart;
    CHECK_THROWS_AS(run_location_experiment(wrong), ConfigError);
    CHECK_THROWS_AS(run_chart_experiment(small_location()), ConfigError);
}

TEST_CASE("chart experiment is deterministic")
{
    const ExperimentConfig c = small_chart();
    const auto a = run_chart_experiment(c);
    const auto b = run_chart_experiment(c);
    CHECK(report_users_csv(a) == report_users_csv(b));
    CHECK(a.details.dump() == b.details.dump());
    CHECK(a.mode == Mode::chart);
    CHECK(a.rows.size() == 2 * static_cast<std::size_t>(c.n_test_users));
    CHECK(a.details.contains("epoch_loss"));
    bool moved = false;
    for (const auto &r : a.rows)
        moved = moved || r.latent_x != 0.0 || r.latent_y != 0.0;
    CHECK(moved);

    const auto d = simulate_dataset(c, 2);
    const auto t = train_chart(c, d, 2);
    CHECK(t.result.model.dims() == std::vector<int>{2 * 4 * 8 + 1, 16, 8, 2});
    const auto m = fit_latent_map(c, d, t.result.model, 2);
    CHECK(m.coordinates == "latent");
    CHECK(io::map_from_string(io::map_to_string(m)).coordinates == "latent");
}

TEST_CASE("mismatch demo tables share breakpoints")
{
    ExperimentConfig c;
    c.mismatch.oracle_samples = 1000000;
    c.mismatch.sample_sizes = {1000, 10000};
    const auto res = run_mismatch_demo(c);
    CHECK(std::is_sorted(res.breakpoints.begin(), res.breakpoints.end()));
    CHECK(std::adjacent_find(res.breakpoints.begin(), res.breakpoints.end()) == res.breakpoints.end());
    CHECK(res.curves.size() == 5);
    for (const auto &cv : res.curves)
    {
        REQUIRE(cv.cdf.size() == res.breakpoints.size());
        CHECK(std::is_sorted(cv.cdf.begin(), cv.cdf.end()));
        CHECK(cv.cdf.back() <= 1.0);
    }
    CHECK(res.curve("oracle", 0).cdf.back() == 1.0);
    CHECK(res.curve("rician", 1000).fit.has_value());
    CHECK(res.max_deviation(res.curve("empirical", 10000)) <
          statistics::dkw_band(10000, 0.99) + statistics::dkw_band(1000000, 0.99));

    const auto dir = scratch("mismatch");
    write_mismatch(res, c, dir.string());
    const auto lin = read_csv(dir / "cdf_linear.csv");
    const auto lg = read_csv(dir / "cdf_log.csv");
    REQUIRE(lin.size() == res.breakpoints.size() + 1);
    REQUIRE(lg.size() == lin.size());
    CHECK(lin[0] == lg[0]);
    CHECK(lin[0][1] == "oracle");
    for (std::size_t i = 1; i < lin.size(); ++i)
    {
        CHECK(lin[i][0] == lg[i][0]);
        for (std::size_t k = 1; k < lin[i].size(); ++k)
        {
            const double v = std::stod(lin[i][k]);
            if (v == 0.0)
                CHECK(lg[i][k] == "-inf");
            else
                CHECK(std::stod(lg[i][k]) == doctest::Approx(std::log10(v)).epsilon(1e-12));
        }
    }
    CHECK(fs::exists(dir / "rician_fit_N1000.csv"));
    CHECK(fs::exists(dir / "rician_fit_N10000.csv"));
    const auto summary = read_csv(dir / "mismatch_summary.csv");
    CHECK(summary.size() == 5);
    CHECK(summary[0][0] == "estimator");
}

TEST_CASE("rate queries")
{
    const auto q = parse_queries_csv("x,y\n1.5,-2\n\n3,4\r\n");
    REQUIRE(q.size() == 2);
    CHECK(q[0] == gpmap::Point2{1.5, -2.0});
    CHECK(q[1] == gpmap::Point2{3.0, 4.0});
    CHECK(parse_queries_csv("0,0\n").size() == 1);
    const auto msg = thrown_message<ParseError>([] { parse_queries_csv("x,y\n1,2\n1,abc\n"); });
    CHECK(msg.find("line 3") != std::string::npos);
    CHECK(msg.find("field y") != std::string::npos);
    CHECK_THROWS_AS(parse_queries_csv("12\n"), ParseError);

    const ExperimentConfig c = small_location();
    const auto m = fit_location_map(c, simulate_dataset(c, 4), 4);
    const auto csv = select_rates_csv(m, q, 0.05);
    std::stringstream ss(csv);
    std::string line;
    std::getline(ss, line);
    CHECK(line == "x,y,rate,policy");
    int rows = 0;
    while (std::getline(ss, line))
        ++rows;
    CHECK(rows == 4);
    CHECK(csv.find("map_quantile") != std::string::npos);
    CHECK(csv.find("nearest_neighbor") != std::string::npos);
}
