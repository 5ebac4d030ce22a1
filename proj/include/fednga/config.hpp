/*
 * Copyright 2026 The fednga Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fednga/simulator.hpp"

namespace fednga {

// Line-oriented "key = value" text; '#' starts a comment. Unknown keys,
// malformed values and out-of-range settings throw ValidationError naming
// the key. `task` is the only required key; CLI overrides ("key=value")
// take precedence over file values.
SimConfig parse_config(std::string_view text,
                       std::span<const std::string> overrides = {});
SimConfig parse_config_file(const std::filesystem::path& path,
                            std::span<const std::string> overrides = {});

// Every resolved field, one key per line, floats with 17 significant
// digits; parse_config(serialize_config(c)) == c.
std::string serialize_config(const SimConfig& config);

// The documented key table, in serialization order.
std::span<const std::string_view> config_keys();

std::string format_double(double value);

// Columns: t,eta,loss,grad_norm,gap,theta_max,accuracy,agg_time_ns. Empty
// cells for unmeasured values, LF line endings.
std::string records_csv(std::span<const RoundRecord> records);
void write_records_csv(std::span<const RoundRecord> records,
                       const std::filesystem::path& path);
std::vector<RoundRecord> read_records_csv(const std::filesystem::path& path);

struct ManifestInfo {
  std::string version;
  std::string command;
  std::string start_time;
  std::string end_time;
  std::map<std::string, std::string> outputs;
};

// Metadata as "#@ key=value" comment lines followed by the config echo, so
// the manifest itself parses back to the same SimConfig.
void write_manifest(const std::filesystem::path& path, const SimConfig& config,
                    const ManifestInfo& info);

// Metadata-only manifest for subcommands without a SimConfig (bench,
// gradcheck): the same "#@" lines plus one "#@ param.<key>=" line each.
void write_manifest(const std::filesystem::path& path, const ManifestInfo& info,
                    const std::map<std::string, std::string>& params);

std::string utc_timestamp();

inline constexpr std::string_view kVersion = "0.1.0";

}  // namespace fednga
