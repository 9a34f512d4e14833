#pragma once

#include <string>
#include <variant>

namespace mediatrix {

// A point in a variable's support: either a finite-precision number or a
// categorical symbol. Numbers compare exactly (supports are finite lists,
// not measured data).
class Value {
 public:
  Value() : rep_(0.0) {}

  static Value number(double x) { return Value(x); }
  static Value symbol(std::string s) { return Value(std::move(s)); }

  bool is_number() const { return std::holds_alternative<double>(rep_); }
  bool is_symbol() const { return !is_number(); }

  double number() const { return std::get<double>(rep_); }
  const std::string& symbol() const { return std::get<std::string>(rep_); }

  // Numeric view used by estimators and outcome means.
  double as_number() const;

  bool operator==(const Value& o) const { return rep_ == o.rep_; }
  bool operator!=(const Value& o) const { return !(*this == o); }
  bool operator<(const Value& o) const { return rep_ < o.rep_; }

  // "low" stays "low"; numbers print shortest round-trip form (1.625, 7).
  std::string to_string() const;

 private:
  explicit Value(double x) : rep_(x) {}
  explicit Value(std::string s) : rep_(std::move(s)) {}
  std::variant<double, std::string> rep_;
};

// Shortest decimal text that parses back to exactly x.
std::string format_double(double x);

}  // namespace mediatrix
