#pragma once

#include <cstddef>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "ictmc/core.hpp"
#include "ictmc/errors.hpp"
#include "ictmc/operators.hpp"

// JSON file formats.
//
//   function: {"space": [labels...], "values": [reals...]}
//   model:    {"space": [labels...], "kind": "linear", "linear": {"rows": [[...], ...]}}
//             {"space": [labels...], "kind": "box",
//              "box": {"rows": [{"lower": {label: real}, "upper": {label: real},
//                                "exit_budget": [L, U] | null}, ...]}}
//
// Box rows list off-diagonal bounds only; missing entries default to [0, 0].

namespace ictmc::io {

using json = nlohmann::json;

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw InputError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InputError("'" + path + "' is not valid JSON: " + e.what());
  }
}

namespace detail {

inline double as_real(const json& j, const std::string& what) {
  if (!j.is_number())
    throw InputError(what + " must be a number");
  return j.get<double>();
}

inline SpacePtr parse_space(const json& doc) {
  if (!doc.is_object() || !doc.contains("space") || !doc["space"].is_array())
    throw InputError("document needs a \"space\" array of state labels");
  std::vector<std::string> labels;
  for (const auto& l : doc["space"]) {
    if (!l.is_string())
      throw InputError("state labels must be strings");
    labels.push_back(l.get<std::string>());
  }
  return make_space(std::move(labels));
}

} // namespace detail

inline Func parse_function(const json& doc) {
  SpacePtr space = detail::parse_space(doc);
  if (!doc.contains("values") || !doc["values"].is_array())
    throw InputError("function document needs a \"values\" array");
  std::vector<double> values;
  for (const auto& v : doc["values"])
    values.push_back(detail::as_real(v, "function value"));
  return Func(space, std::move(values));
}

inline json function_to_json(const Func& f) {
  return json{{"space", f.space().labels()},
              {"values", std::vector<double>(f.values().begin(), f.values().end())}};
}

/// A parsed but not yet validated model file.
struct ModelDocument {
  SpacePtr space;
  RateOperator::Kind kind = RateOperator::Kind::linear;
  std::vector<std::vector<double>> linear_rows;
  std::vector<BoxRow> box_rows;
};

inline ModelDocument parse_model_document(const json& doc) {
  ModelDocument m;
  m.space = detail::parse_space(doc);
  const std::size_t n = m.space->size();
  if (!doc.contains("kind") || !doc["kind"].is_string())
    throw InputError("model needs \"kind\": \"linear\" or \"box\"");
  const std::string kind = doc["kind"].get<std::string>();

  if (kind == "linear") {
    m.kind = RateOperator::Kind::linear;
    if (!doc.contains("linear") || !doc["linear"].contains("rows") ||
        !doc["linear"]["rows"].is_array())
      throw InputError("linear model needs \"linear\": {\"rows\": [[...], ...]}");
    for (const auto& row : doc["linear"]["rows"]) {
      if (!row.is_array())
        throw InputError("linear model rows must be arrays");
      std::vector<double> r;
      for (const auto& v : row)
        r.push_back(detail::as_real(v, "rate"));
      m.linear_rows.push_back(std::move(r));
    }
    if (m.linear_rows.size() != n)
      throw InputError("linear model needs one row per state");
    for (const auto& r : m.linear_rows)
      if (r.size() != n)
        throw InputError("linear model rows need one entry per state");
    return m;
  }

  if (kind != "box")
    throw InputError("unknown model kind '" + kind + "'");
  m.kind = RateOperator::Kind::box;
  if (!doc.contains("box") || !doc["box"].contains("rows") || !doc["box"]["rows"].is_array())
    throw InputError("box model needs \"box\": {\"rows\": [...]}");
  const json& rows = doc["box"]["rows"];
  if (rows.size() != n)
    throw InputError("box model needs one row per state");
  for (std::size_t x = 0; x < n; ++x) {
    const json& row = rows[x];
    if (!row.is_object())
      throw InputError("box rows must be objects");
    BoxRow br;
    br.rates.assign(n, Interval{});
    for (const char* side : {"lower", "upper"}) {
      if (!row.contains(side))
        continue;
      if (!row[side].is_object())
        throw InputError(std::string("box \"") + side + "\" must map labels to rates");
      for (const auto& [label, value] : row[side].items()) {
        const std::size_t y = m.space->index_of(label);
        if (y == x)
          throw InputError("box rows list off-diagonal rates only (row '" + m.space->label(x) +
                           "')");
        const double v = detail::as_real(value, "box bound");
        if (std::string(side) == "lower")
          br.rates[y].lower = v;
        else
          br.rates[y].upper = v;
      }
    }
    if (row.contains("exit_budget") && !row["exit_budget"].is_null()) {
      const json& b = row["exit_budget"];
      if (!b.is_array() || b.size() != 2)
        throw InputError("exit_budget must be [L, U] or null");
      br.exit_budget = Interval{detail::as_real(b[0], "budget"), detail::as_real(b[1], "budget")};
    }
    m.box_rows.push_back(std::move(br));
  }
  return m;
}

/// Builds the operator; `validate = false` keeps malformed linear matrices
/// as given so that they can be inspected by the axiom checkers.
inline RateOperator build_operator(const ModelDocument& m, bool validate = true) {
  if (m.kind == RateOperator::Kind::linear)
    return RateOperator(validate ? RateMatrix::from_rows(m.space, m.linear_rows)
                                 : RateMatrix::unchecked(m.space, m.linear_rows));
  return RateOperator(BoxRateSpec(m.space, m.box_rows));
}

inline RateOperator parse_model(const json& doc, bool validate = true) {
  return build_operator(parse_model_document(doc), validate);
}

inline json model_to_json(const RateOperator& op) {
  const StateSpace& space = *op.space_ptr();
  json doc{{"space", space.labels()}};
  if (const RateMatrix* m = op.matrix()) {
    doc["kind"] = "linear";
    doc["linear"] = json{{"rows", m->rows()}};
    return doc;
  }
  const BoxRateSpec& box = *op.box();
  json rows = json::array();
  for (std::size_t x = 0; x < box.size(); ++x) {
    json lower = json::object(), upper = json::object();
    for (std::size_t y = 0; y < box.size(); ++y) {
      if (y == x)
        continue;
      lower[space.label(y)] = box.lower(x, y);
      upper[space.label(y)] = box.upper(x, y);
    }
    json row{{"lower", lower}, {"upper", upper}, {"exit_budget", nullptr}};
    if (box.budget(x))
      row["exit_budget"] = json::array({box.budget(x)->lower, box.budget(x)->upper});
    rows.push_back(std::move(row));
  }
  doc["kind"] = "box";
  doc["box"] = json{{"rows", rows}};
  return doc;
}

inline Func read_function_file(const std::string& path) {
  return parse_function(read_json_file(path));
}

inline RateOperator read_model_file(const std::string& path, bool validate = true) {
  return parse_model(read_json_file(path), validate);
}

} // namespace ictmc::io
