// crowd/cli.h

// Copyright 2026  crowd-attn authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef CROWD_CLI_H_
#define CROWD_CLI_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "crowd/dataset.h"
#include "crowd/gem.h"
#include "crowd/kernels.h"

namespace crowd {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitNotConverged = 2;
inline constexpr int kExitUsage = 64;

/// Method names accepted by --method.
const std::vector<std::string> &MethodNames();

struct MethodOptions {
  GemConfig gem;              // attention is overridden for a3c-na
  KernelChoice kernel;
  std::uint64_t seed = 0;
};

/// Runs one aggregator.  For a3c and a3c-na the fit is stored in *fit when
/// fit is not null.
AggregationResult RunMethod(const std::string &method, const Dataset &data,
                            const MethodOptions &options,
                            std::optional<FitResult> *fit = nullptr);

/// Entry point of the crowd-attn tool; returns the process exit code.
int RunCli(int argc, const char *const *argv);

}  // namespace crowd

#endif  // CROWD_CLI_H_
