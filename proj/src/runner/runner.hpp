// Copyright (c) blt contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <exception>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "runner/config.hpp"

namespace blt::runner {

inline constexpr const char* kToolName = "blt";
#ifdef BLT_VERSION
inline constexpr const char* kToolVersion = BLT_VERSION;
#else
inline constexpr const char* kToolVersion = "0.0.0";
#endif

struct CsvArtifact {
  std::string name;  ///< file name inside output_dir
  std::string columns;
  std::string content;  ///< header line included
};

struct RunOutput {
  nlohmann::json report;
  std::vector<CsvArtifact> csv;  ///< filled only when config csv = true
};

/// Runs one subcommand. When output_dir is set, report.json and the CSV
/// artifacts are written there (IoError on failure). Module errors propagate.
RunOutput run(const RunConfig& config);

/// Parses and validates `raw`, then runs it.
RunOutput run(const nlohmann::json& raw);

/// {"error": {"code", "status", "message", "partial"}} for any exception;
/// status is the ErrorCode value (internal for non-blt exceptions).
nlohmann::json error_record(const std::exception_ptr& failure);
int error_status(const std::exception_ptr& failure);

}  // namespace blt::runner
