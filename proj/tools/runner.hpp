// Copyright 2026 The QNL Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace qnl::cli {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitConfig = 2, kExitRuntime = 3 };

struct RunOptions {
  std::string experiment;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;  // falls back to QNL_JOBS, then 1
  std::string out_dir = "qnl-out";
};

const std::vector<std::string>& experiment_names();

/// Runs one experiment end to end and writes its artifacts. Never throws;
/// failures map onto the exit codes above with a message on `err`.
int run(const RunOptions& options, std::ostream& out, std::ostream& err);

std::string sha256_hex(const std::string& bytes);

}  // namespace qnl::cli
