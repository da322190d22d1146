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

#ifndef STATMAP_IO_HPP
#define STATMAP_IO_HPP

#include "statmap/chart.hpp"
#include "statmap/harness.hpp"

#include <iosfwd>
#include <string>

// File formats. All documents carry a version number; readers reject
// versions they do not know.
//
// dataset (JSON Lines, one user per line):
//   {"version":1,"user_id":0,"x":..,"y":..,"z":..,"power_samples":[..],
//    "csi":{"re":[[..]],"im":[[..]]}}      x/y/z and csi are optional
//
// map (JSON):
//   {"format":"statmap.map","version":1,"epsilon":..,"coordinates":"location",
//    "hyperparams":{"kernel":..,..},"coords":[[x,y],..],"targets":[..],
//    "diagnostics":{..},"kernel_checksum":{"sum":..,"sum_squares":..,"trace":..}}
//
// chart (JSON):
//   {"format":"statmap.chart","version":1,"dims":[..],
//    "layers":[{"weights":[..row-major..],"biases":[..]},..]}

namespace statmap::io
{
    constexpr int kDatasetVersion = 1;
    constexpr int kMapVersion = 1;
    constexpr int kChartVersion = 1;

    std::string dataset_record_line(const harness::UserRecord &rec);
    harness::UserRecord parse_dataset_record(const std::string &line, std::size_t line_no);

    void save_dataset(const harness::Dataset &dataset, const std::string &path);
    harness::Dataset load_dataset(const std::string &path);
    harness::Dataset parse_dataset(std::istream &in);

    std::string map_to_string(const harness::MapFile &map);
    harness::MapFile map_from_string(const std::string &text);
    void save_map(const harness::MapFile &map, const std::string &path);
    harness::MapFile load_map(const std::string &path);

    std::string chart_to_string(const chart::ChartModel &model);
    chart::ChartModel chart_from_string(const std::string &text);
    void save_chart(const chart::ChartModel &model, const std::string &path);
    chart::ChartModel load_chart(const std::string &path);
}

#endif
