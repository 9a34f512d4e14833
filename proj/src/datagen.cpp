#include "mediatrix/datagen.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "mediatrix/errors.hpp"
#include "mediatrix/rng.hpp"

namespace mediatrix {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::ParseError, "cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::ParseError, "cannot open " + path + " for writing");
  out << text;
  if (!out) fail(ErrorCode::ParseError, "write to " + path + " failed");
}

Value parse_cell(const std::string& text) {
  if (text.empty()) return Value::symbol("");
  const char* begin = text.c_str();
  char* end = nullptr;
  double x = std::strtod(begin, &end);
  if (end == begin + text.size()) return Value::number(x);
  return Value::symbol(text);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    std::string field = line.substr(start, comma == std::string::npos
                                               ? std::string::npos
                                               : comma - start);
    // Trim surrounding spaces; values never contain them.
    std::size_t a = field.find_first_not_of(" \t");
    std::size_t b = field.find_last_not_of(" \t");
    fields.push_back(a == std::string::npos ? "" : field.substr(a, b - a + 1));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

}  // namespace

Dataset sample_dataset(const Scm& scm, const SamplerConfig& config) {
  if (config.n < 1) fail(ErrorCode::SpecError, "sample_dataset needs n >= 1");

  std::vector<int> columns = scm.dataset_order();
  if (config.include_latents) {
    for (int v : scm.latents()) columns.push_back(v);
  }

  Dataset dataset;
  for (int v : columns) dataset.columns.push_back(scm.var(v).name);
  dataset.source = scm.name();
  dataset.seed = config.seed;
  dataset.declared_n = config.n;
  dataset.has_provenance = true;

  const int nv = scm.num_variables();
  std::vector<int> noise(nv);
  std::vector<int> values(nv);
  std::vector<int> parent_vals;
  dataset.rows.reserve(config.n);
  for (std::size_t i = 0; i < config.n; ++i) {
    Rng rng(derive_seed(config.seed, kStreamDataset, i));
    for (int v = 0; v < nv; ++v) noise[v] = rng.sample(scm.var(v).noise.probs);
    for (int v = 0; v < nv; ++v) {  // storage order is topological
      const auto& var = scm.var(v);
      parent_vals.clear();
      for (int p : var.parents) parent_vals.push_back(values[p]);
      values[v] = scm.lookup(v, parent_vals, noise[v]);
    }
    std::vector<Value> row;
    row.reserve(columns.size());
    for (int v : columns) row.push_back(scm.var(v).support[values[v]]);
    dataset.rows.push_back(std::move(row));
  }
  return dataset;
}

Scm read_scm(const std::string& path) {
  return load_scm_or_fail(scm_from_json_text(read_file(path)));
}

void write_scm(const Scm& scm, const std::string& path) {
  write_file(path, scm_to_json_text(scm));
}

std::string dataset_to_csv(const Dataset& dataset) {
  std::string out;
  if (dataset.has_provenance) {
    out += "# source: " + dataset.source + "\n";
    out += "# seed: " + std::to_string(dataset.seed) + "\n";
    out += "# n: " + std::to_string(dataset.declared_n) + "\n";
  }
  for (std::size_t i = 0; i < dataset.columns.size(); ++i) {
    if (i) out += ",";
    out += dataset.columns[i];
  }
  out += "\n";
  for (const auto& row : dataset.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ",";
      std::string cell = row[i].to_string();
      if (cell.find(',') != std::string::npos || cell.find('\n') != std::string::npos) {
        fail(ErrorCode::SpecError, "value " + cell + " cannot be written to CSV");
      }
      out += cell;
    }
    out += "\n";
  }
  return out;
}

Dataset dataset_from_csv(const std::string& text) {
  Dataset dataset;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  bool saw_header = false;
  bool saw_source = false, saw_seed = false, saw_n = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (saw_header) {
        fail(ErrorCode::ParseError,
             "line " + std::to_string(lineno) + ": comment after the header row");
      }
      std::string body = line.substr(1);
      std::size_t colon = body.find(':');
      if (colon == std::string::npos) continue;
      std::string key = body.substr(0, colon);
      std::string value = body.substr(colon + 1);
      auto trim = [](std::string& s) {
        std::size_t a = s.find_first_not_of(" \t");
        std::size_t b = s.find_last_not_of(" \t");
        s = a == std::string::npos ? "" : s.substr(a, b - a + 1);
      };
      trim(key);
      trim(value);
      if (key == "source") {
        dataset.source = value;
        saw_source = true;
      } else if (key == "seed") {
        dataset.seed = std::strtoull(value.c_str(), nullptr, 10);
        saw_seed = true;
      } else if (key == "n") {
        dataset.declared_n = std::strtoull(value.c_str(), nullptr, 10);
        saw_n = true;
      }
      continue;
    }
    std::vector<std::string> fields = split_csv_line(line);
    if (!saw_header) {
      for (const auto& name : fields) {
        if (name.empty()) {
          fail(ErrorCode::ParseError,
               "line " + std::to_string(lineno) + ": empty column name");
        }
      }
      dataset.columns = fields;
      saw_header = true;
      continue;
    }
    if (fields.size() != dataset.columns.size()) {
      fail(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": expected " +
                                      std::to_string(dataset.columns.size()) +
                                      " fields, found " + std::to_string(fields.size()));
    }
    std::vector<Value> row;
    row.reserve(fields.size());
    for (const auto& field : fields) row.push_back(parse_cell(field));
    dataset.rows.push_back(std::move(row));
  }
  if (!saw_header) fail(ErrorCode::ParseError, "no header row");
  dataset.has_provenance = saw_source && saw_seed && saw_n;
  return dataset;
}

Dataset read_dataset(const std::string& path) {
  return dataset_from_csv(read_file(path));
}

void write_dataset(const Dataset& dataset, const std::string& path) {
  write_file(path, dataset_to_csv(dataset));
}

void validate_dataset(const Scm& scm, const Dataset& dataset) {
  std::vector<int> observed = scm.dataset_order();
  if (dataset.columns.size() < observed.size()) {
    fail(ErrorCode::SchemaError,
         "dataset has " + std::to_string(dataset.columns.size()) +
             " columns; the model's observed schema has " +
             std::to_string(observed.size()));
  }
  std::vector<int> column_vars;
  for (std::size_t i = 0; i < dataset.columns.size(); ++i) {
    if (i < observed.size()) {
      const std::string& expected = scm.var(observed[i]).name;
      if (dataset.columns[i] != expected) {
        fail(ErrorCode::SchemaError, "dataset column " + std::to_string(i) + " is '" +
                                         dataset.columns[i] + "'; the model expects '" +
                                         expected + "'");
      }
      column_vars.push_back(observed[i]);
    } else {
      int var = scm.index_of(dataset.columns[i]);
      if (var < 0 || scm.var(var).role != Role::Latent) {
        fail(ErrorCode::SchemaError, "dataset column '" + dataset.columns[i] +
                                         "' is not a latent variable of the model");
      }
      column_vars.push_back(var);
    }
  }
  for (std::size_t r = 0; r < dataset.rows.size(); ++r) {
    const auto& row = dataset.rows[r];
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (scm.support_index(column_vars[i], row[i]) < 0) {
        fail(ErrorCode::SchemaError, "row " + std::to_string(r + 1) + ", column " +
                                         dataset.columns[i] + ": value " +
                                         row[i].to_string() +
                                         " is not in the declared support");
      }
    }
  }
}

}  // namespace mediatrix
