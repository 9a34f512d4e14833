#include "mediatrix/parse.hpp"

#include <cctype>
#include <cstdlib>

#include "mediatrix/errors.hpp"

namespace mediatrix {

namespace {

struct Cursor {
  const std::string& text;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }
  bool done() {
    skip_ws();
    return pos >= text.size();
  }
  char peek() {
    skip_ws();
    return pos < text.size() ? text[pos] : '\0';
  }
  bool accept(char c) {
    if (peek() != c) return false;
    ++pos;
    return true;
  }
  void expect(char c) {
    if (!accept(c)) {
      fail(ErrorCode::ParseError, std::string("expected '") + c + "' at position " +
                                      std::to_string(pos) + " in \"" + text + "\"");
    }
  }
  [[noreturn]] void error(const std::string& what) {
    fail(ErrorCode::ParseError,
         what + " at position " + std::to_string(pos) + " in \"" + text + "\"");
  }

  // Identifier / bare value token: letters, digits, and _.+-: (the symbol
  // charset), so numbers and symbols share one token rule.
  std::string token() {
    skip_ws();
    std::size_t start = pos;
    while (pos < text.size()) {
      char c = text[pos];
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' ||
          c == '+' || c == '-' || c == ':') {
        ++pos;
      } else {
        break;
      }
    }
    if (pos == start) error("expected a value or name");
    return text.substr(start, pos - start);
  }
};

Value value_from_token(const std::string& token) {
  const char* begin = token.c_str();
  char* end = nullptr;
  double x = std::strtod(begin, &end);
  if (end == begin + token.size()) return Value::number(x);
  return Value::symbol(token);
}

double number_from_token(Cursor& cur, const std::string& token) {
  const char* begin = token.c_str();
  char* end = nullptr;
  double x = std::strtod(begin, &end);
  if (end != begin + token.size()) cur.error("expected a number, found \"" + token + "\"");
  return x;
}

int exposure_arm(Cursor& cur, const std::string& token) {
  if (token == "0") return 0;
  if (token == "1") return 1;
  cur.error("expected exposure value 0 or 1, found \"" + token + "\"");
}

// Optional "|C" / "|." tail inside pot()/obs(); bare means marginal.
Conditioning parse_conditioning(Cursor& cur) {
  if (!cur.accept('|')) return Conditioning::None;
  if (cur.accept('.')) return Conditioning::None;
  std::string token = cur.token();
  if (token == "C") return Conditioning::Covariates;
  cur.error("expected '.' or 'C' after '|', found \"" + token + "\"");
}

MediatorDistributionSpec parse_spec(Cursor& cur);

MediatorDistributionSpec parse_spec_call(Cursor& cur, const std::string& head) {
  cur.expect('(');
  if (head == "point") {
    Value v = value_from_token(cur.token());
    cur.expect(')');
    return MediatorDistributionSpec::point_mass(std::move(v));
  }
  if (head == "pot" || head == "obs") {
    int arm = exposure_arm(cur, cur.token());
    Conditioning cond = parse_conditioning(cur);
    cur.expect(')');
    return head == "pot" ? MediatorDistributionSpec::potential_conditional(arm, cond)
                         : MediatorDistributionSpec::observed_conditional(arm, cond);
  }
  if (head == "mix") {
    std::vector<double> weights;
    std::vector<MediatorDistributionSpec> components;
    do {
      std::string w = cur.token();
      weights.push_back(number_from_token(cur, w));
      cur.expect('*');
      components.push_back(parse_spec(cur));
    } while (cur.accept(','));
    cur.expect(')');
    return MediatorDistributionSpec::mixture(std::move(weights), std::move(components));
  }
  cur.error("unknown distribution \"" + head + "\" (expected point, pot, obs, or mix)");
}

MediatorDistributionSpec parse_spec(Cursor& cur) {
  return parse_spec_call(cur, cur.token());
}

WorldSpec parse_world_cursor(Cursor& cur) {
  WorldSpec world;
  std::string first = cur.token();
  if (first == "natural" && cur.done()) return world;

  std::string name = first;
  while (true) {
    if (cur.accept('=')) {
      world.set(name, value_from_token(cur.token()));
    } else if (cur.accept('~')) {
      std::string head = cur.token();
      if (head == "pot") {
        // M~pot(a) is the unit-level potential; M~pot(a|C) and M~pot(a|.)
        // are stochastic draws.
        cur.expect('(');
        int arm = exposure_arm(cur, cur.token());
        if (cur.accept('|')) {
          Conditioning cond = Conditioning::Covariates;
          if (cur.accept('.')) {
            cond = Conditioning::None;
          } else {
            std::string token = cur.token();
            if (token != "C") cur.error("expected '.' or 'C' after '|'");
          }
          cur.expect(')');
          world.draw(name, MediatorDistributionSpec::potential_conditional(arm, cond));
        } else {
          cur.expect(')');
          world.potential_under(name, arm);
        }
      } else {
        world.draw(name, parse_spec_call(cur, head));
      }
    } else {
      cur.error("expected '=' or '~' after \"" + name + "\"");
    }
    if (cur.done()) return world;
    cur.expect(',');
    name = cur.token();
  }
}

}  // namespace

WorldSpec parse_world(const std::string& text) {
  Cursor cur{text};
  if (cur.done()) fail(ErrorCode::ParseError, "empty world text");
  WorldSpec world = parse_world_cursor(cur);
  if (!cur.done()) cur.error("unexpected trailing text");
  return world;
}

MediatorDistributionSpec parse_mediator_spec(const std::string& text) {
  Cursor cur{text};
  if (cur.done()) fail(ErrorCode::ParseError, "empty distribution text");
  MediatorDistributionSpec spec = parse_spec(cur);
  if (!cur.done()) cur.error("unexpected trailing text");
  return spec;
}

Condition parse_condition(const std::string& text) {
  Condition condition;
  Cursor cur{text};
  if (cur.done()) return condition;
  while (true) {
    std::string name = cur.token();
    cur.expect('=');
    condition.equalities.emplace_back(name, value_from_token(cur.token()));
    if (cur.done()) return condition;
    cur.expect(',');
  }
}

EffectQuery parse_contrast(const std::string& text) {
  std::size_t split = text.find("||");
  if (split == std::string::npos) {
    fail(ErrorCode::ParseError, "a contrast needs two worlds separated by \"||\"");
  }
  std::string left = text.substr(0, split);
  std::string rest = text.substr(split + 2);

  // A single '|' outside parentheses separates the optional condition;
  // the '|' inside pot(0|C) is parenthesized and never matches.
  std::string right = rest;
  std::string cond_text;
  int depth = 0;
  for (std::size_t i = 0; i < rest.size(); ++i) {
    char c = rest[i];
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == '|' && depth == 0) {
      right = rest.substr(0, i);
      cond_text = rest.substr(i + 1);
      break;
    }
  }

  EffectQuery query;
  query.left = parse_world(left);
  query.right = parse_world(right);
  Condition condition = parse_condition(cond_text);
  if (!condition.empty()) query.condition = condition;
  return query;
}

}  // namespace mediatrix
