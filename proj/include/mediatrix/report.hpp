#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mediatrix/identify.hpp"

namespace mediatrix {

// One printed row: an exact effect, an estimate, or a truth-vs-estimate
// comparison, depending on which fields are present.
struct ReportRow {
  std::string label;
  std::optional<double> value;       // exact (truth) value
  std::optional<double> left_mean;
  std::optional<double> right_mean;
  std::string condition;             // empty when unconditional
  std::string annotation;            // e.g. "NOT IDENTIFIED (...)"
  std::optional<double> estimate;
  std::optional<double> se;
  std::optional<std::size_t> n;
  std::string method;
  std::optional<double> z;           // compare: (estimate - value) / se
  std::optional<bool> flagged;       // compare: |z| > threshold
  std::vector<std::string> warnings;

  bool operator==(const ReportRow&) const = default;
};

struct RungLine {
  std::string name;
  bool identified = false;
  std::string assumption;  // failed assumption, empty when identified
  std::string witness;     // open path or offending node

  bool operator==(const RungLine&) const = default;
};

struct Report {
  int schema_version = 1;
  std::string command;  // truth | identify | simulate | estimate | compare
  std::string model;
  std::vector<ReportRow> rows;
  std::vector<RungLine> ladder;
  std::vector<std::string> notes;

  bool operator==(const Report&) const = default;
};

RungLine rung_line(const RungReport& rung);

std::string report_to_json(const Report& report);
Report report_from_json(const std::string& text);

// Fixed-width table / line rendering for terminals.
std::string report_to_text(const Report& report);

// Numbers in tables: shortest exact decimal form (matches Value printing).
std::string format_number(double x);

}  // namespace mediatrix
