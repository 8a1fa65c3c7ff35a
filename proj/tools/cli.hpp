// Copyright 2026 The twist Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include "json.hpp"

#include "twist/config.hpp"
#include "twist/orchestrator.hpp"

namespace twist::cli {

enum ExitCode { kOk = 0, kUsage = 2, kVerifyFailed = 3, kTrainAbort = 4 };

nlohmann::json to_json(const ModelConfig& c);
nlohmann::json to_json(const TrainConfig& c);
/// Overlays the keys present in j onto base; unknown keys are rejected.
ModelConfig model_from_json(const nlohmann::json& j, ModelConfig base = {});
TrainConfig train_from_json(const nlohmann::json& j, TrainConfig base = {});

/// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace twist::cli
