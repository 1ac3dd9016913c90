#include "stct/report.hpp"

#include "stct/errors.hpp"
#include "stct/io.hpp"

#include <json.hpp>

#include <cstdio>
#include <sstream>

namespace stct::report {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string fmt(const std::optional<double>& v, const char* spec = "%.4f") {
  if (!v) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, *v);
  return buf;
}

std::string csv_value(const std::optional<double>& v) {
  if (!v) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", *v);
  return buf;
}

std::string pad(const std::string& s, std::size_t w) { return s.size() >= w ? s : std::string(w - s.size(), ' ') + s; }

std::string table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = header[c].size();
    for (const auto& r : rows) width[c] = std::max(width[c], r[c].size());
  }
  std::ostringstream os;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t c = 0; c < cells.size(); ++c) os << (c ? "  " : "") << pad(cells[c], width[c]);
    os << '\n';
  };
  line(header);
  std::size_t total = 0;
  for (auto w : width) total += w;
  os << std::string(total + 2 * (width.size() - 1), '-') << '\n';
  for (const auto& r : rows) line(r);
  return os.str();
}

}  // namespace

std::vector<TraceRow> parse_trace(const std::string& jsonl) {
  std::vector<TraceRow> out;
  std::istringstream in(jsonl);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw FormatError("trace line " + std::to_string(number) + ": " + e.what(), -1);
    }
    if (j.contains("type") && j["type"] != "nmc_round") continue;
    TraceRow row;
    row.epoch = j.value("epoch", 0);
    row.record.round = j.at("round").get<int>();
    row.record.val_loss = j.at("val_loss").get<double>();
    row.record.agreement = j.at("agreement").get<double>();
    if (j.contains("label_acc") && !j["label_acc"].is_null()) row.record.label_acc = j["label_acc"].get<double>();
    out.push_back(row);
  }
  return out;
}

std::string trace_jsonl(const nmc::NmcTrace& trace) {
  std::string out;
  for (const auto& r : trace.records) {
    json j;
    j["round"] = r.round;
    j["val_loss"] = r.val_loss;
    j["agreement"] = r.agreement;
    if (r.label_acc) j["label_acc"] = *r.label_acc;
    out += j.dump() + "\n";
  }
  return out;
}

std::string render_epochs(const pipeline::RunReport& report) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& e : report.epochs) {
    rows.push_back({std::to_string(e.epoch), fmt(e.corrected_label_acc), fmt(e.selection_precision),
                    fmt(e.selection_recall), fmt(e.test_acc), std::to_string(e.nmc_rounds), std::to_string(e.selected),
                    fmt(e.srl_loss), fmt(e.wall_seconds, "%.2f")});
  }
  std::string out = table({"epoch", "label_acc", "precision", "recall", "test_acc", "nmc_rounds", "selected",
                           "srl_loss", "seconds"},
                          rows);
  const auto& s = report.summary;
  out += "\nnoisy label accuracy:     " + fmt(s.noisy_label_acc) + "\n";
  out += "final corrected accuracy: " + fmt(s.final_corrected_label_acc) + "\n";
  out += "final test accuracy:      " + fmt(s.final_test_acc) + "\n";
  return out;
}

std::string render_trace(const std::vector<TraceRow>& rows) {
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : rows) {
    cells.push_back({std::to_string(r.epoch), std::to_string(r.record.round), fmt(r.record.val_loss, "%.6g"),
                     fmt(r.record.agreement), fmt(r.record.label_acc)});
  }
  return table({"epoch", "round", "val_loss", "agreement", "label_acc"}, cells);
}

std::string epochs_csv(const pipeline::RunReport& report) {
  std::string out = "epoch,corrected_label_acc,selection_precision,selection_recall,test_acc,nmc_rounds,selected,srl_loss\n";
  for (const auto& e : report.epochs) {
    out += std::to_string(e.epoch) + "," + csv_value(e.corrected_label_acc) + "," + csv_value(e.selection_precision) +
           "," + csv_value(e.selection_recall) + "," + csv_value(e.test_acc) + "," + std::to_string(e.nmc_rounds) +
           "," + std::to_string(e.selected) + "," + csv_value(e.srl_loss) + "\n";
  }
  return out;
}

std::string trace_csv(const std::vector<TraceRow>& rows) {
  std::string out = "epoch,round,val_loss,agreement,label_acc\n";
  for (const auto& r : rows) {
    out += std::to_string(r.epoch) + "," + std::to_string(r.record.round) + "," + csv_value(r.record.val_loss) + "," +
           csv_value(r.record.agreement) + "," + csv_value(r.record.label_acc) + "\n";
  }
  return out;
}

Rendered render_directory(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw UsageError("not a directory: " + dir.string());
  Rendered out;
  if (fs::exists(dir / "report.jsonl")) {
    const auto rep = pipeline::RunReport::from_jsonl(io::read_text(dir / "report.jsonl"));
    out.table = render_epochs(rep);
    out.csv = epochs_csv(rep);
    if (fs::exists(dir / "metrics.jsonl")) {
      const auto rows = parse_trace(io::read_text(dir / "metrics.jsonl"));
      if (!rows.empty()) out.table += "\n" + render_trace(rows);
    }
    return out;
  }
  for (const char* name : {"nmc_trace.jsonl", "metrics.jsonl"}) {
    if (fs::exists(dir / name)) {
      const auto rows = parse_trace(io::read_text(dir / name));
      out.table = render_trace(rows);
      out.csv = trace_csv(rows);
      return out;
    }
  }
  throw UsageError("no report.jsonl, nmc_trace.jsonl or metrics.jsonl in " + dir.string());
}

}  // namespace stct::report
