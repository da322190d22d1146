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

#include "statmap/io.hpp"

#include "statmap/errors.hpp"

#include <fstream>
#include <sstream>

namespace statmap::io
{
    using nlohmann::json;

    namespace
    {
        // Field access that reports where a document went wrong.
        class Fields
        {
        public:
            Fields(const json &j, std::string where) : j_(j), where_(std::move(where))
            {
                if (!j_.is_object())
                    throw ParseError(where_ + ": expected a JSON object");
            }

            bool has(const char *key) const { return j_.contains(key); }

            const json &at(const char *key) const
            {
                auto it = j_.find(key);
                if (it == j_.end())
                    throw ParseError(where_ + ": missing field '" + key + "'");
                return *it;
            }

            template <class T>
            T get(const char *key) const
            {
                try
                {
                    return at(key).template get<T>();
                }
                catch (const json::exception &e)
                {
                    throw ParseError(where_ + ", field '" + key + "': " + e.what());
                }
            }

            const std::string &where() const noexcept { return where_; }

        private:
            const json &j_;
            std::string where_;
        };

        json parse_json(const std::string &text, const std::string &where)
        {
            try
            {
                return json::parse(text);
            }
            catch (const json::parse_error &e)
            {
                throw ParseError(where + ": " + e.what());
            }
        }

        void check_version(const Fields &f, int known)
        {
            const int v = f.get<int>("version");
            if (v != known)
                throw ParseError(f.where() + ": unsupported version " + std::to_string(v) + " (known: " +
                                 std::to_string(known) + ")");
        }

        void check_format(const Fields &f, const char *name)
        {
            const auto fmt = f.get<std::string>("format");
            if (fmt != name)
                throw ParseError(f.where() + ": format is '" + fmt + "', expected '" + name + "'");
        }
    }

    std::string dataset_record_line(const harness::UserRecord &rec)
    {
        json j = {{"version", kDatasetVersion}, {"user_id", rec.user_id}};
        if (rec.location)
        {
            j["x"] = rec.location->x;
            j["y"] = rec.location->y;
            j["z"] = rec.location->z;
        }
        j["power_samples"] = rec.power_samples;
        if (rec.csi)
        {
            const auto &h = *rec.csi;
            json re = json::array(), im = json::array();
            for (Eigen::Index a = 0; a < h.rows(); ++a)
            {
                std::vector<double> r(static_cast<std::size_t>(h.cols())), i(r.size());
                for (Eigen::Index s = 0; s < h.cols(); ++s)
                {
                    r[static_cast<std::size_t>(s)] = h(a, s).real();
                    i[static_cast<std::size_t>(s)] = h(a, s).imag();
                }
                re.push_back(r);
                im.push_back(i);
            }
            j["csi"] = {{"re", re}, {"im", im}};
        }
        return j.dump();
    }

    harness::UserRecord parse_dataset_record(const std::string &line, std::size_t line_no)
    {
        const std::string where = "dataset line " + std::to_string(line_no);
        const json j = parse_json(line, where);
        const Fields f(j, where);
        check_version(f, kDatasetVersion);
        harness::UserRecord rec;
        rec.user_id = f.get<std::int64_t>("user_id");
        if (f.has("x") || f.has("y") || f.has("z"))
            rec.location = propagation::Location{f.get<double>("x"), f.get<double>("y"), f.get<double>("z")};
        rec.power_samples = f.get<std::vector<double>>("power_samples");
        if (f.has("csi"))
        {
            const Fields c(f.at("csi"), where + ", field 'csi'");
            const auto re = c.get<std::vector<std::vector<double>>>("re");
            const auto im = c.get<std::vector<std::vector<double>>>("im");
            if (re.size() != im.size() || re.empty())
                throw ParseError(where + ", field 'csi': re/im row counts differ or are zero");
            const std::size_t cols = re.front().size();
            propagation::ChannelMatrix h(static_cast<Eigen::Index>(re.size()), static_cast<Eigen::Index>(cols));
            for (std::size_t a = 0; a < re.size(); ++a)
            {
                if (re[a].size() != cols || im[a].size() != cols)
                    throw ParseError(where + ", field 'csi': ragged row " + std::to_string(a));
                for (std::size_t s = 0; s < cols; ++s)
                    h(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(s)) = {re[a][s], im[a][s]};
            }
            rec.csi = std::move(h);
        }
        return rec;
    }

    harness::Dataset parse_dataset(std::istream &in)
    {
        harness::Dataset d;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line))
        {
            ++line_no;
            if (line.empty())
                continue;
            d.users.push_back(parse_dataset_record(line, line_no));
        }
        return d;
    }

    void save_dataset(const harness::Dataset &dataset, const std::string &path)
    {
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        if (!f)
            throw IoError("cannot open " + path + " for writing");
        for (const auto &u : dataset.users)
            f << dataset_record_line(u) << '\n';
        if (!f)
            throw IoError("write failed: " + path);
    }

    harness::Dataset load_dataset(const std::string &path)
    {
        std::ifstream f(path, std::ios::binary);
        if (!f)
            throw IoError("cannot open " + path);
        return parse_dataset(f);
    }

    std::string map_to_string(const harness::MapFile &map)
    {
        const auto &m = map.map;
        const auto &h = m.hyper();
        const auto &d = m.diagnostics();
        json coords = json::array();
        for (const auto &p : m.train().coords)
            coords.push_back({p.x, p.y});
        const json j = {{"format", "statmap.map"},
                        {"version", kMapVersion},
                        {"epsilon", map.epsilon},
                        {"coordinates", map.coordinates},
                        {"hyperparams",
                         {{"kernel", std::string(gpmap::kernel_name(h.family))},
                          {"prior_mean", h.prior_mean},
                          {"signal_var", h.signal_var},
                          {"length_scale", h.length_scale},
                          {"noise_var", h.noise_var}}},
                        {"coords", coords},
                        {"targets", m.train().targets},
                        {"diagnostics",
                         {{"log_marginal_likelihood", d.log_marginal_likelihood},
                          {"iterations", d.iterations},
                          {"evaluations", d.evaluations},
                          {"failed_restarts", d.failed_restarts},
                          {"iteration_cap_hit", d.iteration_cap_hit},
                          {"jitter", d.jitter}}},
                        {"kernel_checksum",
                         {{"sum", m.checksum().sum}, {"sum_squares", m.checksum().sum_squares}, {"trace", m.checksum().trace}}}};
        return j.dump(1) + "\n";
    }

    harness::MapFile map_from_string(const std::string &text)
    {
        const json j = parse_json(text, "map");
        const Fields f(j, "map");
        check_format(f, "statmap.map");
        check_version(f, kMapVersion);
        const Fields hf(f.at("hyperparams"), "map, field 'hyperparams'");
        gpmap::Hyperparams h{hf.get<double>("prior_mean"), hf.get<double>("signal_var"),
                             hf.get<double>("length_scale"), hf.get<double>("noise_var")};
        try
        {
            h.family = gpmap::parse_kernel(hf.get<std::string>("kernel"));
        }
        catch (const ConfigError &e)
        {
            throw ParseError(std::string("map, field 'hyperparams.kernel': ") + e.what());
        }
        gpmap::TrainingSet train;
        for (const auto &p : f.get<std::vector<std::vector<double>>>("coords"))
        {
            if (p.size() != 2)
                throw ParseError("map, field 'coords': expected [x, y] pairs");
            train.coords.push_back({p[0], p[1]});
        }
        train.targets = f.get<std::vector<double>>("targets");
        const Fields df(f.at("diagnostics"), "map, field 'diagnostics'");
        gpmap::FitDiagnostics diag;
        diag.log_marginal_likelihood = df.get<double>("log_marginal_likelihood");
        diag.iterations = df.get<int>("iterations");
        diag.evaluations = df.get<int>("evaluations");
        diag.failed_restarts = df.get<int>("failed_restarts");
        diag.iteration_cap_hit = df.get<bool>("iteration_cap_hit");
        diag.jitter = df.get<double>("jitter");
        const Fields cf(f.at("kernel_checksum"), "map, field 'kernel_checksum'");
        const gpmap::KernelChecksum stored{cf.get<double>("sum"), cf.get<double>("sum_squares"), cf.get<double>("trace")};

        auto build = [&] {
            try
            {
                return gpmap::FittedMap(h, std::move(train), diag);
            }
            catch (const ConfigError &e)
            {
                throw ParseError(std::string("map: ") + e.what());
            }
        };
        harness::MapFile out{build(), f.get<double>("epsilon"), f.get<std::string>("coordinates")};
        if (out.coordinates != "location" && out.coordinates != "latent")
            throw ParseError("map, field 'coordinates': expected \"location\" or \"latent\"");
        if (!gpmap::checksum_matches(out.map.checksum(), stored))
            throw ParseError("map: kernel matrix checksum mismatch (file corrupted or edited)");
        return out;
    }

    void save_map(const harness::MapFile &map, const std::string &path)
    {
        harness::write_text_file(path, map_to_string(map));
    }

    harness::MapFile load_map(const std::string &path)
    {
        return map_from_string(harness::read_text_file(path));
    }

    std::string chart_to_string(const chart::ChartModel &model)
    {
        json layers = json::array();
        for (std::size_t l = 0; l < model.num_layers(); ++l)
        {
            const auto &w = model.weights()[l];
            std::vector<double> flat;
            flat.reserve(static_cast<std::size_t>(w.size()));
            for (Eigen::Index r = 0; r < w.rows(); ++r)
                for (Eigen::Index c = 0; c < w.cols(); ++c)
                    flat.push_back(w(r, c));
            const auto &b = model.biases()[l];
            layers.push_back({{"weights", flat}, {"biases", std::vector<double>(b.data(), b.data() + b.size())}});
        }
        const json j = {{"format", "statmap.chart"}, {"version", kChartVersion}, {"dims", model.dims()}, {"layers", layers}};
        return j.dump() + "\n";
    }

    chart::ChartModel chart_from_string(const std::string &text)
    {
        const json j = parse_json(text, "chart");
        const Fields f(j, "chart");
        check_format(f, "statmap.chart");
        check_version(f, kChartVersion);
        const auto dims = f.get<std::vector<int>>("dims");
        const json &layers = f.at("layers");
        if (dims.size() < 2 || !layers.is_array() || layers.size() != dims.size() - 1)
            throw ParseError("chart: layer count does not match dims");
        std::vector<Eigen::MatrixXd> W;
        std::vector<Eigen::VectorXd> B;
        for (std::size_t l = 0; l + 1 < dims.size(); ++l)
        {
            const Fields lf(layers[l], "chart, layer " + std::to_string(l));
            const auto flat = lf.get<std::vector<double>>("weights");
            const auto bias = lf.get<std::vector<double>>("biases");
            if (dims[l] < 1 || dims[l + 1] < 1)
                throw ParseError("chart: dims must be positive");
            const std::size_t rows = static_cast<std::size_t>(dims[l + 1]), cols = static_cast<std::size_t>(dims[l]);
            if (flat.size() != rows * cols || bias.size() != rows)
                throw ParseError(lf.where() + ": weight or bias size does not match dims");
            Eigen::MatrixXd w(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
            for (std::size_t r = 0; r < rows; ++r)
                for (std::size_t c = 0; c < cols; ++c)
                    w(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = flat[r * cols + c];
            W.push_back(std::move(w));
            B.push_back(Eigen::Map<const Eigen::VectorXd>(bias.data(), static_cast<Eigen::Index>(bias.size())));
        }
        try
        {
            return chart::ChartModel(dims, std::move(W), std::move(B));
        }
        catch (const ConfigError &e)
        {
            throw ParseError(std::string("chart: ") + e.what());
        }
    }

    void save_chart(const chart::ChartModel &model, const std::string &path)
    {
        harness::write_text_file(path, chart_to_string(model));
    }

    chart::ChartModel load_chart(const std::string &path)
    {
        return chart_from_string(harness::read_text_file(path));
    }
}
