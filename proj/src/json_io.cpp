#include <cmath>
#include <string>

#include "json.hpp"
#include "mediatrix/errors.hpp"
#include "mediatrix/scm.hpp"

namespace mediatrix {

namespace {

using nlohmann::json;

[[noreturn]] void schema_fail(const std::string& pointer, const std::string& what) {
  fail(ErrorCode::SchemaError, what + " (at " + (pointer.empty() ? "/" : pointer) + ")");
}

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                         const std::string& pointer) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) schema_fail(pointer + "/" + item.key(), "unknown key '" + item.key() + "'");
  }
}

const json& require_key(const json& obj, const char* key, const std::string& pointer) {
  auto it = obj.find(key);
  if (it == obj.end()) schema_fail(pointer, std::string("missing key '") + key + "'");
  return *it;
}

std::string require_string(const json& j, const std::string& pointer) {
  if (!j.is_string()) schema_fail(pointer, "expected a string");
  return j.get<std::string>();
}

Value value_from_json(const json& j, const std::string& pointer) {
  if (j.is_string()) return Value::symbol(j.get<std::string>());
  if (j.is_number()) return Value::number(j.get<double>());
  schema_fail(pointer, "expected a number or string value");
}

json value_to_json(const Value& v) {
  if (v.is_symbol()) return json(v.symbol());
  double x = v.number();
  if (std::nearbyint(x) == x && std::abs(x) < 9.0e15) {
    return json(static_cast<std::int64_t>(x));
  }
  return json(x);
}

}  // namespace

RawScm scm_from_json_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::ParseError, e.what());
  }
  if (!root.is_object()) schema_fail("", "model file must hold a JSON object");
  reject_unknown_keys(root, {"name", "description", "variables"}, "");

  RawScm raw;
  raw.name = require_string(require_key(root, "name", ""), "/name");
  if (root.contains("description")) {
    raw.description = require_string(root["description"], "/description");
  }
  const json& vars = require_key(root, "variables", "");
  if (!vars.is_array()) schema_fail("/variables", "expected an array");

  for (std::size_t i = 0; i < vars.size(); ++i) {
    const std::string vp = "/variables/" + std::to_string(i);
    const json& jvar = vars[i];
    if (!jvar.is_object()) schema_fail(vp, "expected an object");
    reject_unknown_keys(jvar, {"name", "role", "support", "parents", "noise", "table"}, vp);

    VariableSpec vs;
    vs.name = require_string(require_key(jvar, "name", vp), vp + "/name");
    std::string role = require_string(require_key(jvar, "role", vp), vp + "/role");
    auto parsed_role = role_from_name(role);
    if (!parsed_role) schema_fail(vp + "/role", "unknown role '" + role + "'");
    vs.role = *parsed_role;

    const json& support = require_key(jvar, "support", vp);
    if (!support.is_array()) schema_fail(vp + "/support", "expected an array");
    for (std::size_t k = 0; k < support.size(); ++k) {
      vs.support.push_back(value_from_json(support[k], vp + "/support/" + std::to_string(k)));
    }

    const json& parents = require_key(jvar, "parents", vp);
    if (!parents.is_array()) schema_fail(vp + "/parents", "expected an array");
    for (std::size_t k = 0; k < parents.size(); ++k) {
      vs.parents.push_back(
          require_string(parents[k], vp + "/parents/" + std::to_string(k)));
    }

    const json& noise = require_key(jvar, "noise", vp);
    if (!noise.is_object()) schema_fail(vp + "/noise", "expected an object");
    reject_unknown_keys(noise, {"symbols", "probs"}, vp + "/noise");
    const json& symbols = require_key(noise, "symbols", vp + "/noise");
    const json& probs = require_key(noise, "probs", vp + "/noise");
    if (!symbols.is_array()) schema_fail(vp + "/noise/symbols", "expected an array");
    if (!probs.is_array()) schema_fail(vp + "/noise/probs", "expected an array");
    for (std::size_t k = 0; k < symbols.size(); ++k) {
      vs.noise.symbols.push_back(
          require_string(symbols[k], vp + "/noise/symbols/" + std::to_string(k)));
    }
    for (std::size_t k = 0; k < probs.size(); ++k) {
      const json& p = probs[k];
      if (!p.is_number()) schema_fail(vp + "/noise/probs/" + std::to_string(k), "expected a number");
      vs.noise.probs.push_back(p.get<double>());
    }

    const json& table = require_key(jvar, "table", vp);
    if (!table.is_array()) schema_fail(vp + "/table", "expected an array");
    for (std::size_t k = 0; k < table.size(); ++k) {
      const std::string tp = vp + "/table/" + std::to_string(k);
      const json& jrow = table[k];
      if (!jrow.is_object()) schema_fail(tp, "expected an object");
      reject_unknown_keys(jrow, {"parents", "noise", "value"}, tp);
      TableEntry entry;
      const json& pvals = require_key(jrow, "parents", tp);
      if (!pvals.is_array()) schema_fail(tp + "/parents", "expected an array");
      for (std::size_t p = 0; p < pvals.size(); ++p) {
        entry.parent_values.push_back(
            value_from_json(pvals[p], tp + "/parents/" + std::to_string(p)));
      }
      entry.noise = require_string(require_key(jrow, "noise", tp), tp + "/noise");
      entry.value = value_from_json(require_key(jrow, "value", tp), tp + "/value");
      vs.table.push_back(std::move(entry));
    }
    raw.variables.push_back(std::move(vs));
  }
  return raw;
}

std::string scm_to_json_text(const Scm& scm) {
  RawScm raw = scm.to_raw();
  json root;
  root["name"] = raw.name;
  if (!raw.description.empty()) root["description"] = raw.description;
  json vars = json::array();
  for (const VariableSpec& vs : raw.variables) {
    json jvar;
    jvar["name"] = vs.name;
    jvar["role"] = role_name(vs.role);
    json support = json::array();
    for (const Value& v : vs.support) support.push_back(value_to_json(v));
    jvar["support"] = support;
    jvar["parents"] = vs.parents;
    jvar["noise"] = {{"symbols", vs.noise.symbols}, {"probs", vs.noise.probs}};
    json table = json::array();
    for (const TableEntry& entry : vs.table) {
      json jrow;
      json pvals = json::array();
      for (const Value& v : entry.parent_values) pvals.push_back(value_to_json(v));
      jrow["parents"] = pvals;
      jrow["noise"] = entry.noise;
      jrow["value"] = value_to_json(entry.value);
      table.push_back(jrow);
    }
    jvar["table"] = table;
    vars.push_back(jvar);
  }
  root["variables"] = vars;
  return root.dump(2) + "\n";
}

}  // namespace mediatrix
