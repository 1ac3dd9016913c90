#pragma once

// Plain-text tables and CSV curves from persisted run artifacts.

#include "stct/nmc.hpp"
#include "stct/pipeline.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace stct::report {

struct TraceRow {
  int epoch = 0;  ///< 0 for a standalone NMC run
  nmc::NmcRecord record;
};

std::vector<TraceRow> parse_trace(const std::string& jsonl);
std::string trace_jsonl(const nmc::NmcTrace& trace);

std::string render_epochs(const pipeline::RunReport& report);
std::string render_trace(const std::vector<TraceRow>& rows);
std::string epochs_csv(const pipeline::RunReport& report);
std::string trace_csv(const std::vector<TraceRow>& rows);

struct Rendered {
  std::string table;
  std::string csv;
};

/// Reads report.jsonl if present, otherwise nmc_trace.jsonl or
/// metrics.jsonl. Throws UsageError when none exists.
Rendered render_directory(const std::filesystem::path& dir);

}  // namespace stct::report
