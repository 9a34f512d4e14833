#include "mediatrix/report.hpp"

#include <algorithm>

#include "json.hpp"
#include "mediatrix/errors.hpp"
#include "mediatrix/value.hpp"

namespace mediatrix {

namespace {

using nlohmann::json;

json row_to_json(const ReportRow& row) {
  json out;
  out["label"] = row.label;
  if (row.value) out["value"] = *row.value;
  if (row.left_mean) out["left_mean"] = *row.left_mean;
  if (row.right_mean) out["right_mean"] = *row.right_mean;
  if (!row.condition.empty()) out["condition"] = row.condition;
  if (!row.annotation.empty()) out["annotation"] = row.annotation;
  if (row.estimate) out["estimate"] = *row.estimate;
  if (row.se) out["se"] = *row.se;
  if (row.n) out["n"] = *row.n;
  if (!row.method.empty()) out["method"] = row.method;
  if (row.z) out["z"] = *row.z;
  if (row.flagged) out["flagged"] = *row.flagged;
  if (!row.warnings.empty()) out["warnings"] = row.warnings;
  return out;
}

ReportRow row_from_json(const json& in) {
  ReportRow row;
  row.label = in.at("label").get<std::string>();
  if (in.contains("value")) row.value = in["value"].get<double>();
  if (in.contains("left_mean")) row.left_mean = in["left_mean"].get<double>();
  if (in.contains("right_mean")) row.right_mean = in["right_mean"].get<double>();
  if (in.contains("condition")) row.condition = in["condition"].get<std::string>();
  if (in.contains("annotation")) row.annotation = in["annotation"].get<std::string>();
  if (in.contains("estimate")) row.estimate = in["estimate"].get<double>();
  if (in.contains("se")) row.se = in["se"].get<double>();
  if (in.contains("n")) row.n = in["n"].get<std::size_t>();
  if (in.contains("method")) row.method = in["method"].get<std::string>();
  if (in.contains("z")) row.z = in["z"].get<double>();
  if (in.contains("flagged")) row.flagged = in["flagged"].get<bool>();
  if (in.contains("warnings")) row.warnings = in["warnings"].get<std::vector<std::string>>();
  return row;
}

}  // namespace

RungLine rung_line(const RungReport& rung) {
  RungLine line;
  line.name = rung.name;
  line.identified = rung.identified();
  line.assumption = rung.failed_assumption;
  line.witness = rung.witness;
  return line;
}

std::string report_to_json(const Report& report) {
  json out;
  out["schema_version"] = report.schema_version;
  out["command"] = report.command;
  if (!report.model.empty()) out["model"] = report.model;
  if (!report.rows.empty()) {
    json rows = json::array();
    for (const auto& row : report.rows) rows.push_back(row_to_json(row));
    out["rows"] = rows;
  }
  if (!report.ladder.empty()) {
    json ladder = json::array();
    for (const auto& line : report.ladder) {
      json entry;
      entry["name"] = line.name;
      entry["identified"] = line.identified;
      if (!line.assumption.empty()) entry["assumption"] = line.assumption;
      if (!line.witness.empty()) entry["witness"] = line.witness;
      ladder.push_back(entry);
    }
    out["ladder"] = ladder;
  }
  if (!report.notes.empty()) out["notes"] = report.notes;
  return out.dump(2) + "\n";
}

Report report_from_json(const std::string& text) {
  json in;
  try {
    in = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::ParseError, e.what());
  }
  try {
    Report report;
    report.schema_version = in.at("schema_version").get<int>();
    if (report.schema_version != 1) {
      fail(ErrorCode::SchemaError,
           "unsupported schema_version " + std::to_string(report.schema_version));
    }
    report.command = in.at("command").get<std::string>();
    if (in.contains("model")) report.model = in["model"].get<std::string>();
    if (in.contains("rows")) {
      for (const auto& row : in["rows"]) report.rows.push_back(row_from_json(row));
    }
    if (in.contains("ladder")) {
      for (const auto& entry : in["ladder"]) {
        RungLine line;
        line.name = entry.at("name").get<std::string>();
        line.identified = entry.at("identified").get<bool>();
        if (entry.contains("assumption"))
          line.assumption = entry["assumption"].get<std::string>();
        if (entry.contains("witness")) line.witness = entry["witness"].get<std::string>();
        report.ladder.push_back(line);
      }
    }
    if (in.contains("notes")) report.notes = in["notes"].get<std::vector<std::string>>();
    return report;
  } catch (const json::exception& e) {
    fail(ErrorCode::SchemaError, e.what());
  }
}

std::string format_number(double x) { return format_double(x); }

namespace {

std::string rung_text(const RungLine& line) {
  std::string out = "RUNG " + line.name + ": ";
  if (line.identified) return out + "IDENTIFIED";
  out += "NOT IDENTIFIED (" + line.assumption;
  if (!line.witness.empty()) out += "; witness: " + line.witness;
  return out + ")";
}

void render_table(std::string& out, const std::vector<std::string>& header,
                  const std::vector<std::vector<std::string>>& cells) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      width[c] = std::max(width[c], row[c].size());
    }
  }
  auto emit = [&](const std::vector<std::string>& row) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += "  ";
      out += row[c];
      if (c + 1 < row.size()) out.append(width[c] - row[c].size(), ' ');
    }
    out += "\n";
  };
  emit(header);
  for (const auto& row : cells) emit(row);
}

}  // namespace

std::string report_to_text(const Report& report) {
  std::string out;
  if (!report.model.empty()) out += "model: " + report.model + "\n";

  if (!report.rows.empty()) {
    bool any_truth = false, any_est = false, any_z = false, any_means = false;
    for (const auto& row : report.rows) {
      any_truth |= row.value.has_value();
      any_est |= row.estimate.has_value();
      any_z |= row.z.has_value();
      any_means |= row.left_mean.has_value();
    }
    std::vector<std::string> header{"effect"};
    if (any_truth) header.push_back(any_est ? "truth" : "value");
    if (any_means) {
      header.push_back("E[left]");
      header.push_back("E[right]");
    }
    if (any_est) header.push_back("estimate");
    if (any_est) header.push_back("se");
    if (any_z) header.push_back("z");
    bool any_extra = false;
    for (const auto& row : report.rows) {
      any_extra |= !row.condition.empty() || !row.annotation.empty() ||
                   row.flagged.value_or(false);
    }
    if (any_extra) header.push_back("");

    std::vector<std::vector<std::string>> cells;
    for (const auto& row : report.rows) {
      std::vector<std::string> line{row.label};
      if (any_truth) line.push_back(row.value ? format_number(*row.value) : "");
      if (any_means) {
        line.push_back(row.left_mean ? format_number(*row.left_mean) : "");
        line.push_back(row.right_mean ? format_number(*row.right_mean) : "");
      }
      if (any_est) {
        line.push_back(row.estimate ? format_number(*row.estimate) : "");
        line.push_back(row.se ? format_number(*row.se) : "-");
      }
      if (any_z) line.push_back(row.z ? format_number(*row.z) : "-");
      if (any_extra) {
        std::string extra;
        if (!row.condition.empty()) extra += "| " + row.condition;
        if (row.flagged.value_or(false)) {
          if (!extra.empty()) extra += " ";
          extra += "FLAG";
        }
        if (!row.annotation.empty()) {
          if (!extra.empty()) extra += " ";
          extra += row.annotation;
        }
        line.push_back(extra);
      }
      cells.push_back(std::move(line));
    }
    render_table(out, header, cells);
    for (const auto& row : report.rows) {
      for (const auto& warning : row.warnings) {
        out += "warning (" + row.label + "): " + warning + "\n";
      }
    }
  }

  for (const auto& line : report.ladder) out += rung_text(line) + "\n";
  for (const auto& note : report.notes) out += note + "\n";
  return out;
}

}  // namespace mediatrix
