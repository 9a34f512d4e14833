#include "fixtures.hpp"

#include <cmath>
#include <functional>
#include <map>

#include "mediatrix/errors.hpp"

namespace mediatrix::fixtures {

namespace {

Value num(double x) { return Value::number(x); }
Value sym(const char* s) { return Value::symbol(s); }

std::vector<Value> num_range(int lo, int hi) {
  std::vector<Value> out;
  for (int x = lo; x <= hi; ++x) out.push_back(num(x));
  return out;
}

VariableSpec make_var(std::string name, Role role, std::vector<Value> support,
                      std::vector<std::string> parents,
                      std::vector<std::string> noise_symbols,
                      std::vector<double> noise_probs) {
  VariableSpec vs;
  vs.name = std::move(name);
  vs.role = role;
  vs.support = std::move(support);
  vs.parents = std::move(parents);
  vs.noise.symbols = std::move(noise_symbols);
  vs.noise.probs = std::move(noise_probs);
  return vs;
}

std::vector<std::string> uniform_symbols(const std::string& prefix, int k) {
  std::vector<std::string> out;
  for (int i = 0; i < k; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

std::vector<double> uniform_probs(int k) {
  return std::vector<double>(k, 1.0 / static_cast<double>(k));
}

const VariableSpec& find(const RawScm& raw, const std::string& name) {
  for (const auto& vs : raw.variables) {
    if (vs.name == name) return vs;
  }
  fail(ErrorCode::Internal, "fixture references unknown variable " + name);
}

using Row = std::map<std::string, Value>;

// Fills a variable's table by enumerating every parent-value combination
// and noise symbol through the supplied rule.
void fill_table(RawScm& raw, const std::string& name,
                const std::function<Value(const Row&, const std::string&)>& fn) {
  VariableSpec* vs = nullptr;
  for (auto& candidate : raw.variables) {
    if (candidate.name == name) vs = &candidate;
  }
  if (!vs) fail(ErrorCode::Internal, "fixture references unknown variable " + name);

  std::vector<const VariableSpec*> parents;
  for (const auto& parent : vs->parents) parents.push_back(&find(raw, parent));

  std::vector<std::size_t> idx(parents.size(), 0);
  while (true) {
    Row row;
    std::vector<Value> parent_values;
    for (std::size_t p = 0; p < parents.size(); ++p) {
      parent_values.push_back(parents[p]->support[idx[p]]);
      row[parents[p]->name] = parents[p]->support[idx[p]];
    }
    for (const auto& symbol : vs->noise.symbols) {
      vs->table.push_back(TableEntry{parent_values, symbol, fn(row, symbol)});
    }
    std::size_t d = parents.size();
    while (d > 0) {
      --d;
      if (++idx[d] < parents[d]->support.size()) break;
      idx[d] = 0;
      if (d == 0) return;
    }
    if (parents.empty()) return;
  }
}

double n(const Row& row, const std::string& name) { return row.at(name).number(); }

// The eight student profiles, in Table order.
const char* kPeople[8] = {"bo", "sam", "ian", "ben", "suri", "bill", "kat", "dre"};
const char* kMediatorLevels[3] = {"low", "medium", "high"};
const int kM0[8] = {0, 1, 0, 0, 0, 0, 2, 1};   // M(0) as level index
const int kM1[8] = {2, 2, 0, 1, 2, 1, 2, 2};   // M(1)
const int kY0[8] = {4, 7, 5, 8, 3, 6, 9, 4};   // Y(0) = Y(0, M(0))
const int kY10[8] = {7, 7, 7, 6, 3, 5, 8, 7};  // Y(1, M(0))
const int kY1[8] = {9, 8, 7, 7, 5, 7, 8, 8};   // Y(1) = Y(1, M(1))

int person_index(const Value& v) {
  for (int i = 0; i < 8; ++i) {
    if (v.symbol() == kPeople[i]) return i;
  }
  fail(ErrorCode::Internal, "unknown profile " + v.to_string());
}

int level_index(const Value& v) {
  for (int i = 0; i < 3; ++i) {
    if (v.symbol() == kMediatorLevels[i]) return i;
  }
  fail(ErrorCode::Internal, "unknown mediator level " + v.to_string());
}

// Potential-outcome columns pin Y for each (person, arm) at the mediator
// levels that actually occur; remaining levels take the value at the
// nearest pinned level (ties toward the lower level). This fills the
// structural table without changing any pinned quantity.
int college_y(int person, int arm, int m_idx) {
  std::map<int, int> pinned;
  if (arm == 0) {
    pinned[kM0[person]] = kY0[person];
  } else {
    pinned[kM0[person]] = kY10[person];
    pinned[kM1[person]] = kY1[person];
  }
  int best_value = 0;
  int best_distance = 99;
  for (const auto& [idx, y] : pinned) {
    int distance = std::abs(idx - m_idx);
    if (distance < best_distance) {
      best_distance = distance;
      best_value = y;
    }
  }
  return best_value;
}

std::vector<Value> people_support() {
  std::vector<Value> out;
  for (const char* person : kPeople) out.push_back(sym(person));
  return out;
}

std::vector<Value> level_support() {
  return {sym("low"), sym("medium"), sym("high")};
}

}  // namespace

RawScm collegeprep8_raw() {
  RawScm raw;
  raw.name = "collegeprep8";
  raw.description =
      "Eight students, one latent profile driving program participation, "
      "self-awareness, and college readiness.";

  raw.variables.push_back(make_var("U", Role::Latent, people_support(), {},
                                   uniform_symbols("u", 8), uniform_probs(8)));
  raw.variables.push_back(
      make_var("A", Role::Exposure, {num(0), num(1)}, {"U"}, {"-"}, {1.0}));
  raw.variables.push_back(
      make_var("M", Role::Mediator, level_support(), {"U", "A"}, {"-"}, {1.0}));
  raw.variables.push_back(
      make_var("Y", Role::Outcome, num_range(3, 9), {"U", "A", "M"}, {"-"}, {1.0}));

  fill_table(raw, "U", [](const Row&, const std::string& symbol) {
    return sym(kPeople[symbol.back() - '0']);
  });
  fill_table(raw, "A", [](const Row& row, const std::string&) {
    return num(person_index(row.at("U")) < 4 ? 1 : 0);
  });
  fill_table(raw, "M", [](const Row& row, const std::string&) {
    int person = person_index(row.at("U"));
    int arm = static_cast<int>(n(row, "A"));
    return sym(kMediatorLevels[arm == 0 ? kM0[person] : kM1[person]]);
  });
  fill_table(raw, "Y", [](const Row& row, const std::string&) {
    int person = person_index(row.at("U"));
    int arm = static_cast<int>(n(row, "A"));
    return num(college_y(person, arm, level_index(row.at("M"))));
  });
  return raw;
}

RawScm collegeprep8_unconfounded_raw() {
  RawScm raw;
  raw.name = "collegeprep8_unconfounded";
  raw.description =
      "College prep variant with the profile observed, exposure randomized "
      "within profile, and a noisy mediator; all rungs identified.";

  raw.variables.push_back(make_var("C", Role::Covariate, people_support(), {},
                                   uniform_symbols("u", 8), uniform_probs(8)));
  raw.variables.push_back(make_var("A", Role::Exposure, {num(0), num(1)}, {"C"},
                                   uniform_symbols("q", 10), uniform_probs(10)));
  raw.variables.push_back(make_var("M", Role::Mediator, level_support(), {"C", "A"},
                                   {"keep", "up1", "up2"}, {0.7, 0.15, 0.15}));
  raw.variables.push_back(
      make_var("Y", Role::Outcome, num_range(3, 9), {"C", "A", "M"}, {"-"}, {1.0}));

  fill_table(raw, "C", [](const Row&, const std::string& symbol) {
    return sym(kPeople[symbol.back() - '0']);
  });
  fill_table(raw, "A", [](const Row& row, const std::string& symbol) {
    int q = symbol.back() - '0';
    int cut = person_index(row.at("C")) < 4 ? 4 : 6;  // P(A=1|C) = .4 or .6
    return num(q < cut ? 1 : 0);
  });
  fill_table(raw, "M", [](const Row& row, const std::string& symbol) {
    int person = person_index(row.at("C"));
    int arm = static_cast<int>(n(row, "A"));
    int base = arm == 0 ? kM0[person] : kM1[person];
    int shift = symbol == "keep" ? 0 : (symbol == "up1" ? 1 : 2);
    return sym(kMediatorLevels[(base + shift) % 3]);
  });
  fill_table(raw, "Y", [](const Row& row, const std::string&) {
    int person = person_index(row.at("C"));
    int arm = static_cast<int>(n(row, "A"));
    return num(college_y(person, arm, level_index(row.at("M"))));
  });
  return raw;
}

RawScm l_model_raw() {
  RawScm raw;
  raw.name = "l_model";
  raw.description =
      "Exposure-induced confounder: A -> L, L -> M, L -> Y. Interventional "
      "effects identified, natural effects not.";

  raw.variables.push_back(
      make_var("C", Role::Covariate, {num(0), num(1)}, {}, {"c0", "c1"}, {0.5, 0.5}));
  raw.variables.push_back(make_var("A", Role::Exposure, {num(0), num(1)}, {"C"},
                                   uniform_symbols("q", 10), uniform_probs(10)));
  raw.variables.push_back(make_var("L", Role::IntermediateConfounder, {num(0), num(1)},
                                   {"A"}, {"e0", "e1"}, {0.5, 0.5}));
  raw.variables.push_back(make_var("M", Role::Mediator, {num(0), num(1)}, {"L"},
                                   uniform_symbols("k", 5), uniform_probs(5)));
  raw.variables.push_back(make_var("Y", Role::Outcome, num_range(0, 3),
                                   {"C", "A", "L", "M"}, {"-"}, {1.0}));

  fill_table(raw, "C", [](const Row&, const std::string& symbol) {
    return num(symbol == "c1" ? 1 : 0);
  });
  fill_table(raw, "A", [](const Row& row, const std::string& symbol) {
    int q = symbol.back() - '0';
    int cut = n(row, "C") > 0 ? 6 : 4;
    return num(q < cut ? 1 : 0);
  });
  fill_table(raw, "L", [](const Row& row, const std::string& symbol) {
    int flip = symbol == "e1" ? 1 : 0;
    return num(static_cast<int>(n(row, "A")) ^ flip);
  });
  fill_table(raw, "M", [](const Row& row, const std::string& symbol) {
    int flip = symbol == "k4" ? 1 : 0;  // flips with probability 0.2
    return num(static_cast<int>(n(row, "L")) ^ flip);
  });
  fill_table(raw, "Y", [](const Row& row, const std::string&) {
    double same = n(row, "L") == n(row, "M") ? 1 : 0;
    return num(n(row, "C") + n(row, "A") + same);
  });
  return raw;
}

RawScm bullying_raw() {
  RawScm raw;
  raw.name = "bullying";
  raw.description =
      "Disparity-style fixture: minority-group exposure, three-level bullying "
      "mediator, numeric well-being outcome.";

  raw.variables.push_back(
      make_var("C", Role::Covariate, {num(0), num(1)}, {}, {"c0", "c1"}, {0.6, 0.4}));
  raw.variables.push_back(make_var("A", Role::Exposure, {num(0), num(1)}, {"C"},
                                   uniform_symbols("q", 4), uniform_probs(4)));
  raw.variables.push_back(make_var("M", Role::Mediator, {num(0), num(1), num(2)},
                                   {"A", "C"}, uniform_symbols("b", 4),
                                   uniform_probs(4)));
  raw.variables.push_back(make_var("Y", Role::Outcome, num_range(1, 8),
                                   {"C", "A", "M"}, {"y0", "y1"}, {0.5, 0.5}));

  fill_table(raw, "C", [](const Row&, const std::string& symbol) {
    return num(symbol == "c1" ? 1 : 0);
  });
  fill_table(raw, "A", [](const Row& row, const std::string& symbol) {
    int q = symbol.back() - '0';
    int cut = n(row, "C") > 0 ? 2 : 1;  // P(A=1|C) = .5 or .25
    return num(q < cut ? 1 : 0);
  });
  fill_table(raw, "M", [](const Row& row, const std::string& symbol) {
    static const int tables[2][2][4] = {
        {{0, 0, 1, 2}, {0, 1, 1, 2}},  // A=0: C=0, C=1
        {{0, 1, 2, 2}, {0, 2, 2, 2}},  // A=1: C=0, C=1
    };
    int a = static_cast<int>(n(row, "A"));
    int c = static_cast<int>(n(row, "C"));
    return num(tables[a][c][symbol.back() - '0']);
  });
  fill_table(raw, "Y", [](const Row& row, const std::string& symbol) {
    double u = symbol == "y1" ? 1 : 0;
    double a = n(row, "A");
    return num(6 - 2 * n(row, "M") + n(row, "C") - (a > 0 ? 1 : 0) + u);
  });
  return raw;
}

RawScm nullmodel_raw() {
  RawScm raw;
  raw.name = "nullmodel";
  raw.description = "Outcome depends only on the covariate; every effect is zero.";

  raw.variables.push_back(
      make_var("C", Role::Covariate, {num(0), num(1)}, {}, {"c0", "c1"}, {0.5, 0.5}));
  raw.variables.push_back(
      make_var("A", Role::Exposure, {num(0), num(1)}, {}, {"a0", "a1"}, {0.5, 0.5}));
  raw.variables.push_back(make_var("M", Role::Mediator, {num(0), num(1)}, {"C"},
                                   uniform_symbols("k", 4), uniform_probs(4)));
  raw.variables.push_back(
      make_var("Y", Role::Outcome, num_range(0, 2), {"C"}, {"y0", "y1"}, {0.5, 0.5}));

  fill_table(raw, "C", [](const Row&, const std::string& symbol) {
    return num(symbol == "c1" ? 1 : 0);
  });
  fill_table(raw, "A", [](const Row&, const std::string& symbol) {
    return num(symbol == "a1" ? 1 : 0);
  });
  fill_table(raw, "M", [](const Row& row, const std::string& symbol) {
    int flip = symbol == "k3" ? 1 : 0;  // flips with probability 0.25
    return num(static_cast<int>(n(row, "C")) ^ flip);
  });
  fill_table(raw, "Y", [](const Row& row, const std::string& symbol) {
    return num(n(row, "C") + (symbol == "y1" ? 1 : 0));
  });
  return raw;
}

namespace {

RawScm linear_family(const std::string& name, const std::string& description,
                     const std::function<double(double a, double m, double c)>& outcome,
                     int y_max) {
  RawScm raw;
  raw.name = name;
  raw.description = description;

  raw.variables.push_back(
      make_var("C", Role::Covariate, {num(0), num(1)}, {}, {"c0", "c1"}, {0.5, 0.5}));
  raw.variables.push_back(
      make_var("A", Role::Exposure, {num(0), num(1)}, {}, {"a0", "a1"}, {0.5, 0.5}));
  raw.variables.push_back(make_var("M", Role::Mediator, num_range(0, 3), {"A", "C"},
                                   {"m0", "m1"}, {0.5, 0.5}));
  raw.variables.push_back(make_var("Y", Role::Outcome, num_range(0, y_max),
                                   {"A", "M", "C"}, {"y0", "y1"}, {0.5, 0.5}));

  fill_table(raw, "C", [](const Row&, const std::string& symbol) {
    return num(symbol == "c1" ? 1 : 0);
  });
  fill_table(raw, "A", [](const Row&, const std::string& symbol) {
    return num(symbol == "a1" ? 1 : 0);
  });
  fill_table(raw, "M", [](const Row& row, const std::string& symbol) {
    return num(n(row, "A") + n(row, "C") + (symbol == "m1" ? 1 : 0));
  });
  fill_table(raw, "Y", [outcome](const Row& row, const std::string& symbol) {
    double u = symbol == "y1" ? 1 : 0;
    return num(outcome(n(row, "A"), n(row, "M"), n(row, "C")) + u);
  });
  return raw;
}

}  // namespace

RawScm linear_noint_raw() {
  return linear_family(
      "linear_noint",
      "Exactly linear and interaction-free: the product of coefficients is "
      "consistent for NIE(1.).",
      [](double a, double m, double c) { return 1 + a + 2 * m + c; }, 10);
}

RawScm interaction_raw() {
  return linear_family(
      "interaction",
      "Strong exposure-mediator interaction: the product of coefficients is "
      "biased for NIE(1.).",
      [](double a, double m, double c) { return 1 + a + m + 3 * a * m + c; }, 16);
}

Scm fixture(const std::string& name) {
  RawScm raw;
  if (name == "collegeprep8") {
    raw = collegeprep8_raw();
  } else if (name == "collegeprep8_unconfounded") {
    raw = collegeprep8_unconfounded_raw();
  } else if (name == "l_model") {
    raw = l_model_raw();
  } else if (name == "bullying") {
    raw = bullying_raw();
  } else if (name == "nullmodel") {
    raw = nullmodel_raw();
  } else if (name == "linear_noint") {
    raw = linear_noint_raw();
  } else if (name == "interaction") {
    raw = interaction_raw();
  } else {
    fail(ErrorCode::Internal, "unknown fixture " + name);
  }
  return load_scm_or_fail(raw);
}

std::vector<std::string> fixture_names() {
  return {"collegeprep8", "collegeprep8_unconfounded", "l_model", "bullying",
          "nullmodel",    "linear_noint",              "interaction"};
}

}  // namespace mediatrix::fixtures
