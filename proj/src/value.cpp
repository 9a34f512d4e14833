#include "mediatrix/value.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "mediatrix/errors.hpp"

namespace mediatrix {

std::string format_double(double x) {
  if (x == 0.0) x = 0.0;  // normalize -0
  char buf[64];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

double Value::as_number() const {
  if (!is_number()) {
    fail(ErrorCode::EstimationError,
         "symbolic value '" + symbol() + "' has no numeric form");
  }
  return number();
}

std::string Value::to_string() const {
  return is_number() ? format_double(number()) : symbol();
}

}  // namespace mediatrix
