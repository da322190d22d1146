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

// Command-line front end. Talks to the library only through the C API.

#include "statmap/statmap.h"

#include "CLI11.hpp"

#include <cstdio>
#include <filesystem>
#include <string>

namespace
{
    struct Common
    {
        std::string config;
        std::string out = ".";
        std::uint64_t seed = 0;
        bool seed_set = false;
        bool full = false;
    };

    int exit_code(statmap_status s)
    {
        switch (s)
        {
        case STATMAP_OK:
            return 0;
        case STATMAP_ERR_CONFIG:
        case STATMAP_ERR_DOMAIN:
        case STATMAP_ERR_INSUFFICIENT_SAMPLES:
        case STATMAP_ERR_NULL_ARGUMENT:
            return 2;
        case STATMAP_ERR_NUMERICAL:
            return 3;
        default:
            return 1;
        }
    }

    // Thrown by check() to unwind to main with the status code.
    struct Failure
    {
        statmap_status status;
    };

    void check(statmap_status s, const char *what)
    {
        if (s != STATMAP_OK)
        {
            std::fprintf(stderr, "statmap: %s: %s: %s\n", what, statmap_status_name(s), statmap_last_error());
            throw Failure{s};
        }
    }

    template <class T, void (*Free)(T *)>
    struct Handle
    {
        T *p = nullptr;
        Handle() = default;
        Handle(const Handle &) = delete;
        Handle &operator=(const Handle &) = delete;
        ~Handle() { Free(p); }
    };

    using Config = Handle<statmap_config, statmap_config_free>;
    using Dataset = Handle<statmap_dataset, statmap_dataset_free>;
    using Map = Handle<statmap_map, statmap_map_free>;
    using Chart = Handle<statmap_chart, statmap_chart_free>;
    using Report = Handle<statmap_report, statmap_report_free>;

    void load_config(const Common &c, Config &cfg)
    {
        if (c.config.empty())
            check(statmap_config_default(&cfg.p), "config");
        else
            check(statmap_config_load(c.config.c_str(), &cfg.p), "config");
        if (c.full)
            check(statmap_config_apply_full_scale(cfg.p), "config");
        if (c.seed_set)
            check(statmap_config_set_seed(cfg.p, c.seed), "config");
        check(statmap_config_validate(cfg.p), "config");
    }

    std::string out_path(const Common &c, const char *name)
    {
        std::error_code ec;
        std::filesystem::create_directories(c.out, ec);
        if (ec)
        {
            std::fprintf(stderr, "statmap: cannot create %s: %s\n", c.out.c_str(), ec.message().c_str());
            throw Failure{STATMAP_ERR_IO};
        }
        return (std::filesystem::path(c.out) / name).string();
    }

    void add_common(CLI::App *sub, Common &c, bool with_full)
    {
        sub->add_option("--config", c.config, "experiment configuration (JSON)");
        sub->add_option("--out", c.out, "output directory");
        sub->add_option_function<std::uint64_t>(
            "--seed", [&c](std::uint64_t s) { c.seed = s, c.seed_set = true; }, "root seed (overrides the config)");
        if (with_full)
            sub->add_flag("--full", c.full, "full-scale settings: epsilon = delta = 1e-3");
    }
}

int main(int argc, char **argv)
{
    CLI::App app{"statmap: statistical radio maps for reliable rate selection"};
    app.set_version_flag("--version", std::string(statmap_version()));
    app.require_subcommand(1);

    Common c;
    std::string dataset_path, map_path, chart_path, queries_path;
    double delta = -1.0;

    auto *simulate = app.add_subcommand("simulate", "simulate training users and write dataset.jsonl");
    add_common(simulate, c, true);

    auto *fit_map = app.add_subcommand("fit-map", "fit a radio map and write map.json");
    add_common(fit_map, c, true);
    fit_map->add_option("--dataset", dataset_path, "training dataset (default <out>/dataset.jsonl)");
    fit_map->add_option("--chart", chart_path, "fit in the latent space of this chart");

    auto *train_chart = app.add_subcommand("train-chart", "train a channel chart and write chart.json");
    add_common(train_chart, c, true);
    train_chart->add_option("--dataset", dataset_path, "training dataset (default <out>/dataset.jsonl)");

    auto *select_rate = app.add_subcommand("select-rate", "select rates at query coordinates, write rates.csv");
    add_common(select_rate, c, false);
    select_rate->add_option("--map", map_path, "map file (default <out>/map.json)");
    select_rate->add_option("--queries", queries_path, "CSV with x,y per line")->required();
    select_rate->add_option("--delta", delta, "target meta-probability (default from the config)");

    auto *evaluate = app.add_subcommand("evaluate", "run the full experiment and write the report");
    add_common(evaluate, c, true);

    auto *mismatch = app.add_subcommand("mismatch-demo", "tabulate oracle, empirical and Rician CDFs");
    add_common(mismatch, c, true);

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try
    {
        Config cfg;
        load_config(c, cfg);
        auto dataset_or_default = [&] {
            return dataset_path.empty() ? out_path(c, "dataset.jsonl") : dataset_path;
        };

        if (simulate->parsed())
        {
            Dataset d;
            check(statmap_simulate(cfg.p, &d.p), "simulate");
            check(statmap_dataset_save(d.p, out_path(c, "dataset.jsonl").c_str()), "simulate");
        }
        else if (fit_map->parsed())
        {
            Dataset d;
            check(statmap_dataset_load(dataset_or_default().c_str(), &d.p), "fit-map");
            Chart ch;
            if (!chart_path.empty())
                check(statmap_chart_load(chart_path.c_str(), &ch.p), "fit-map");
            Map m;
            check(statmap_map_fit(cfg.p, d.p, ch.p, &m.p), "fit-map");
            check(statmap_map_save(m.p, out_path(c, "map.json").c_str()), "fit-map");
        }
        else if (train_chart->parsed())
        {
            Dataset d;
            check(statmap_dataset_load(dataset_or_default().c_str(), &d.p), "train-chart");
            Chart ch;
            check(statmap_chart_train(cfg.p, d.p, &ch.p), "train-chart");
            check(statmap_chart_save(ch.p, out_path(c, "chart.json").c_str()), "train-chart");
            check(statmap_chart_save_trace(ch.p, out_path(c, "chart_trace.csv").c_str()), "train-chart");
        }
        else if (select_rate->parsed())
        {
            if (delta < 0.0)
                check(statmap_config_delta(cfg.p, &delta), "select-rate");
            Map m;
            const std::string mp = map_path.empty() ? out_path(c, "map.json") : map_path;
            check(statmap_map_load(mp.c_str(), &m.p), "select-rate");
            check(statmap_select_rates_file(m.p, queries_path.c_str(), delta, out_path(c, "rates.csv").c_str()),
                  "select-rate");
        }
        else if (evaluate->parsed())
        {
            Report r;
            check(statmap_evaluate(cfg.p, &r.p), "evaluate");
            check(statmap_report_write(r.p, c.out.c_str()), "evaluate");
            double vm = 0.0, vb = 0.0, wall = 0.0;
            check(statmap_report_violation_fraction(r.p, STATMAP_POLICY_MAP_QUANTILE, &vm), "evaluate");
            check(statmap_report_violation_fraction(r.p, STATMAP_POLICY_NEAREST_NEIGHBOR, &vb), "evaluate");
            check(statmap_report_wall_time(r.p, &wall), "evaluate");
            std::printf("violation fraction: map %.4f, baseline %.4f (wall time %.1f s)\n", vm, vb, wall);
        }
        else if (mismatch->parsed())
        {
            check(statmap_mismatch_demo(cfg.p, c.out.c_str()), "mismatch-demo");
        }
    }
    catch (const Failure &f)
    {
        return exit_code(f.status);
    }
    return 0;
}
