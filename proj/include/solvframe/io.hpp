#ifndef SOLVFRAME_IO_HPP
#define SOLVFRAME_IO_HPP

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "algebra.hpp"
#include "orbit.hpp"

namespace solvframe {

using json = nlohmann::json;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// GroupSpec JSON schema:
///   dim_p, dim_m, basis_names (optional), brackets: [[i, j, k, c], ...]
///   with 1-based indices, lambda: [..] of length dim_p,
///   m_class: "commutative" | {"nilpotent": step} | {"general": bch_order}.
inline GroupSpec group_spec_from_json(const json& j) {
  auto require = [&](const char* key) -> const json& {
    if (!j.contains(key)) throw ConfigError(std::string("missing key \"") + key + "\"");
    return j.at(key);
  };
  int n1 = 0, n2 = 0;
  try {
    n1 = require("dim_p").get<int>();
    n2 = require("dim_m").get<int>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("dim_p/dim_m: ") + e.what());
  }
  if (n1 < 1 || n2 < 1) throw ConfigError("dim_p and dim_m must be positive");

  std::vector<std::string> names;
  if (j.contains("basis_names")) {
    try {
      names = j.at("basis_names").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
      throw ConfigError(std::string("basis_names: ") + e.what());
    }
    if (static_cast<int>(names.size()) != n1 + n2)
      throw ConfigError("basis_names must have length dim_p + dim_m");
  }

  std::vector<BracketEntry> entries;
  const json& br = require("brackets");
  if (!br.is_array()) throw ConfigError("brackets must be an array of [i, j, k, c]");
  for (std::size_t r = 0; r < br.size(); ++r) {
    const json& e = br.at(r);
    if (!e.is_array() || e.size() != 4)
      throw ConfigError("brackets[" + std::to_string(r) + "] must be [i, j, k, c]");
    int i, jj, k;
    double c;
    try {
      i = e.at(0).get<int>();
      jj = e.at(1).get<int>();
      k = e.at(2).get<int>();
      c = e.at(3).get<double>();
    } catch (const json::exception& ex) {
      throw ConfigError("brackets[" + std::to_string(r) + "]: " + ex.what());
    }
    if (i < 1 || i > n1 + n2 || jj < 1 || jj > n1 + n2 || k < 1 || k > n1 + n2)
      throw ConfigError("brackets[" + std::to_string(r) + "]: index out of range 1.." +
                        std::to_string(n1 + n2));
    entries.push_back({i, jj, k, c});
  }

  std::vector<double> lambda;
  try {
    lambda = require("lambda").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("lambda: ") + e.what());
  }
  if (static_cast<int>(lambda.size()) != n1)
    throw ConfigError("lambda must have length dim_p = " + std::to_string(n1));

  MClass mc = CommutativeClass{};
  if (j.contains("m_class")) {
    const json& m = j.at("m_class");
    if (m.is_string()) {
      if (m.get<std::string>() != "commutative")
        throw ConfigError("m_class string must be \"commutative\"");
    } else if (m.is_object() && m.contains("nilpotent")) {
      int step = 0;
      try {
        step = m.at("nilpotent").get<int>();
      } catch (const json::exception& e) {
        throw ConfigError(std::string("m_class.nilpotent: ") + e.what());
      }
      if (step < 1) throw ConfigError("m_class.nilpotent step must be >= 1");
      mc = NilpotentClass{step};
    } else if (m.is_object() && m.contains("general")) {
      int order = 8;
      try {
        order = m.at("general").get<int>();
      } catch (const json::exception& e) {
        throw ConfigError(std::string("m_class.general: ") + e.what());
      }
      if (order < 2) throw ConfigError("m_class.general bch_order must be >= 2");
      mc = GeneralClass{order};
    } else {
      throw ConfigError(
          "m_class must be \"commutative\", {\"nilpotent\": step} or {\"general\": order}");
    }
  }
  try {
    return make_group_spec(n1, n2, entries, std::move(lambda), mc, std::move(names));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

inline GroupSpec parse_group_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("malformed JSON in '" + path + "': " + e.what());
  }
  return group_spec_from_json(j);
}

inline json group_spec_to_json(const GroupSpec& s) {
  json j;
  j["dim_p"] = s.n1;
  j["dim_m"] = s.n2;
  j["basis_names"] = s.basis_names;
  json br = json::array();
  const int d = s.dim();
  for (int i = 0; i < d; ++i)
    for (int jj = 0; jj < d; ++jj)
      for (int k = 0; k < d; ++k)
        if (s.bracket(i, jj)[k] != 0.0)
          br.push_back({i + 1, jj + 1, k + 1, s.bracket(i, jj)[k]});
  j["brackets"] = br;
  j["lambda"] = s.lambda.coeffs;
  if (std::holds_alternative<CommutativeClass>(s.m_class))
    j["m_class"] = "commutative";
  else if (auto* n = std::get_if<NilpotentClass>(&s.m_class))
    j["m_class"] = {{"nilpotent", n->step}};
  else
    j["m_class"] = {{"general", std::get<GeneralClass>(s.m_class).bch_order}};
  return j;
}

inline json orbital_data_to_json(const OrbitalData& d) {
  json j;
  j["J"] = d.J;
  j["detD_J"] = d.chosen_det;
  json cands = json::array();
  for (const auto& c : d.candidates) cands.push_back({{"I", c.indices}, {"det", c.det}});
  j["candidates"] = cands;
  return j;
}

}  // namespace solvframe

#endif
