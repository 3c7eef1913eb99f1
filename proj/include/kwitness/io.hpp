#pragma once

// JSON serialization for instances, certificates and failure reports.
// Serialization is byte-deterministic: object keys are sorted by the json
// library, arrays follow the canonical position/registration orders, and
// scalars are decimal strings ("5", "-3/7"). Every file starts with
// "format": 1. Parsers accept integers where scalar strings are allowed and
// ignore a "failure" annotation block, so failure reports re-validate.

#include "kwitness/certificate.hpp"
#include "kwitness/multicomplex.hpp"
#include "kwitness/nil.hpp"
#include "kwitness/ring.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace kwitness {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace io {

using nlohmann::json;

inline const json& require(const json& j, const char* key, const std::string& ctx) {
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(ctx + ": missing field '" + key + "'");
  return *it;
}

inline BigInt bigint_from_json(const json& j, const std::string& ctx) {
  if (j.is_number_integer()) return BigInt(j.get<long long>());
  if (j.is_string()) {
    try {
      return BigInt(j.get<std::string>());
    } catch (const std::exception&) {
      throw ParseError(ctx + ": not an integer literal: " + j.get<std::string>());
    }
  }
  throw ParseError(ctx + ": expected integer or decimal string");
}

inline json scalar_to_json(const Scalar& s) { return s.str(); }

inline Scalar scalar_from_json(const json& j, const std::string& ctx) {
  if (j.is_number_integer()) return Scalar(BigInt(j.get<long long>()));
  if (!j.is_string()) throw ParseError(ctx + ": expected scalar string");
  const std::string text = j.get<std::string>();
  auto slash = text.find('/');
  try {
    if (slash == std::string::npos) return Scalar(BigInt(text));
    return Scalar(BigInt(text.substr(0, slash)), BigInt(text.substr(slash + 1)));
  } catch (const std::exception&) {
    throw ParseError(ctx + ": malformed scalar '" + text + "'");
  }
}

inline json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows; ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols; ++j) row.push_back(scalar_to_json(m.at(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_json(const json& j, const std::string& ctx) {
  if (!j.is_array()) throw ParseError(ctx + ": expected matrix (array of rows)");
  const int rows = static_cast<int>(j.size());
  int cols = -1;
  Matrix m;
  for (int i = 0; i < rows; ++i) {
    const json& row = j[static_cast<size_t>(i)];
    if (!row.is_array()) throw ParseError(ctx + ": row " + std::to_string(i) + " is not an array");
    if (cols < 0) {
      cols = static_cast<int>(row.size());
      m = Matrix(rows, cols);
    } else if (static_cast<int>(row.size()) != cols) {
      throw ParseError(ctx + ": row " + std::to_string(i) + " has " +
                       std::to_string(row.size()) + " entries, expected " + std::to_string(cols));
    }
    for (int c = 0; c < cols; ++c)
      m.at(i, c) = scalar_from_json(row[static_cast<size_t>(c)],
                                    ctx + ", row " + std::to_string(i));
  }
  if (rows == 0) m = Matrix(0, 0);
  return m;
}

inline json ring_to_json(const RingSpec& ring) {
  json j;
  j["kind"] = ring.is_local() ? "LocalizedIntegers" : "Integers";
  if (ring.is_local()) j["prime"] = ring.prime.str();
  return j;
}

inline RingSpec ring_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("ring: expected object");
  const std::string kind = require(j, "kind", "ring").get<std::string>();
  if (kind == "Integers") return RingSpec::integers();
  if (kind == "LocalizedIntegers") {
    BigInt p = bigint_from_json(require(j, "prime", "ring"), "ring.prime");
    try {
      return RingSpec::localized_at(p);
    } catch (const std::invalid_argument& e) {
      throw ParseError(std::string("ring: ") + e.what());
    }
  }
  throw ParseError("ring: unknown kind '" + kind + "'");
}

inline json position_to_json(const MultiIndex& x) {
  json a = json::array();
  for (int c : x) a.push_back(c);
  return a;
}

inline MultiIndex position_from_json(const json& j, const std::string& ctx) {
  if (!j.is_array()) throw ParseError(ctx + ": expected position array");
  MultiIndex x;
  for (const auto& c : j) {
    if (!c.is_number_integer()) throw ParseError(ctx + ": position entries must be integers");
    x.push_back(c.get<int>());
  }
  return x;
}

// instance body: dimension, ranks, differentials, nil (ring and format are
// carried by the enclosing file)
inline json instance_body_to_json(const NilMulticomplex& n) {
  json j;
  j["dimension"] = n.base.dimension;
  json ranks = json::array();
  for (const auto& [x, r] : n.base.ranks)
    ranks.push_back(json{{"position", position_to_json(x)}, {"rank", r}});
  j["ranks"] = std::move(ranks);
  json diffs = json::array();
  for (int dir = 1; dir <= n.base.dimension; ++dir) {
    json d = json::array(), dt = json::array();
    for (const auto& [key, mat] : n.base.diffs) {
      const auto& [kd, km, x] = key;
      if (kd != dir) continue;
      json entry{{"position", position_to_json(x)}, {"matrix", matrix_to_json(mat)}};
      (km == 0 ? d : dt).push_back(std::move(entry));
    }
    diffs.push_back(json{{"direction", dir}, {"d", std::move(d)}, {"dTilde", std::move(dt)}});
  }
  j["differentials"] = std::move(diffs);
  if (!n.nil.empty()) {
    json nil = json::array();
    for (const auto& [x, m] : n.nil)
      nil.push_back(json{{"position", position_to_json(x)}, {"matrix", matrix_to_json(m)}});
    j["nil"] = std::move(nil);
  }
  return j;
}

inline NilMulticomplex instance_body_from_json(const json& j, const RingSpec& ring,
                                               const std::string& ctx) {
  NilMulticomplex n;
  n.base.ring = ring;
  const json& dim = require(j, "dimension", ctx);
  if (!dim.is_number_integer()) throw ParseError(ctx + ": dimension must be an integer");
  n.base.dimension = dim.get<int>();
  if (n.base.dimension < 0) throw ParseError(ctx + ": dimension must be non-negative");
  for (const auto& entry : require(j, "ranks", ctx)) {
    MultiIndex x = position_from_json(require(entry, "position", ctx + ".ranks"), ctx + ".ranks");
    const json& r = require(entry, "rank", ctx + ".ranks");
    if (!r.is_number_integer() || r.get<int>() < 0)
      throw ParseError(ctx + ".ranks: rank must be a non-negative integer");
    n.base.set_rank(x, r.get<int>());
  }
  for (const auto& dblock : require(j, "differentials", ctx)) {
    const json& dirj = require(dblock, "direction", ctx + ".differentials");
    if (!dirj.is_number_integer())
      throw ParseError(ctx + ".differentials: direction must be an integer");
    int dir = dirj.get<int>();
    for (auto [field, mem] : {std::pair{"d", Member::D}, std::pair{"dTilde", Member::DTilde}}) {
      auto it = dblock.find(field);
      if (it == dblock.end()) continue;
      for (const auto& entry : *it) {
        const std::string where = ctx + ".differentials[" + std::to_string(dir) + "]." + field;
        MultiIndex x = position_from_json(require(entry, "position", where), where);
        n.base.set_diff(dir, mem, x, matrix_from_json(require(entry, "matrix", where), where));
      }
    }
  }
  if (auto it = j.find("nil"); it != j.end()) {
    for (const auto& entry : *it) {
      MultiIndex x = position_from_json(require(entry, "position", ctx + ".nil"), ctx + ".nil");
      n.set_nil(x, matrix_from_json(require(entry, "matrix", ctx + ".nil"), ctx + ".nil"));
    }
  }
  return n;
}

inline void check_format(const json& j, const std::string& ctx) {
  const json& f = require(j, "format", ctx);
  if (!f.is_number_integer() || f.get<int>() != 1)
    throw ParseError(ctx + ": unsupported format (expected 1)");
}

inline json instance_to_json(const NilMulticomplex& n) {
  json j = instance_body_to_json(n);
  j["format"] = 1;
  j["ring"] = ring_to_json(n.base.ring);
  return j;
}

inline NilMulticomplex instance_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("instance: expected top-level object");
  check_format(j, "instance");
  RingSpec ring = ring_from_json(require(j, "ring", "instance"));
  return instance_body_from_json(j, ring, "instance");
}

inline const char* step_kind_name(const RelationStep& s) {
  if (std::holds_alternative<ShortExactStep>(s)) return "ShortExact";
  if (std::holds_alternative<DiagonalStep>(s)) return "Diagonal";
  return "Isomorphism";
}

inline json position_matrices_to_json(const std::map<MultiIndex, Matrix>& m) {
  json a = json::array();
  for (const auto& [x, mat] : m)
    a.push_back(json{{"position", position_to_json(x)}, {"matrix", matrix_to_json(mat)}});
  return a;
}

inline std::map<MultiIndex, Matrix> position_matrices_from_json(const json& j,
                                                                const std::string& ctx) {
  if (!j.is_array()) throw ParseError(ctx + ": expected array of position/matrix entries");
  std::map<MultiIndex, Matrix> out;
  for (const auto& entry : j) {
    MultiIndex x = position_from_json(require(entry, "position", ctx), ctx);
    out[x] = matrix_from_json(require(entry, "matrix", ctx), ctx);
  }
  return out;
}

inline json certificate_to_json(const Certificate& cert) {
  json j;
  j["format"] = 1;
  j["ring"] = ring_to_json(cert.ring);
  json reg = json::array();
  for (const auto& id : cert.registry.order) {
    json obj = instance_body_to_json(*cert.registry.find(id));
    obj["id"] = id;
    reg.push_back(std::move(obj));
  }
  j["registry"] = std::move(reg);
  j["target"] = json{{"nu", cert.target_nu}, {"zero", cert.target_zero}};
  json steps = json::array();
  for (const auto& step : cert.steps) {
    json s;
    s["kind"] = step_kind_name(step);
    if (const auto* se = std::get_if<ShortExactStep>(&step)) {
      s["sub"] = se->sub;
      s["total"] = se->total;
      s["quotient"] = se->quotient;
      s["inclusion"] = position_matrices_to_json(se->inclusion);
      s["projection"] = position_matrices_to_json(se->projection);
      s["retraction"] = position_matrices_to_json(se->retraction);
    } else if (const auto* di = std::get_if<DiagonalStep>(&step)) {
      s["object"] = di->object;
      s["direction"] = di->direction;
    } else {
      const auto& iso = std::get<IsomorphismStep>(step);
      s["left"] = iso.left;
      s["right"] = iso.right;
      s["matrices"] = position_matrices_to_json(iso.matrices);
    }
    steps.push_back(std::move(s));
  }
  j["steps"] = std::move(steps);
  json claim = json::array();
  for (const auto& id : cert.registry.order) {
    auto it = cert.claim.terms.find(id);
    if (it == cert.claim.terms.end()) continue;
    claim.push_back(json{{"object", id}, {"coefficient", it->second.str()}});
  }
  // claim terms outside the registry are rejected by verify; keep them anyway
  for (const auto& [id, c] : cert.claim.terms)
    if (!cert.registry.find(id))
      claim.push_back(json{{"object", id}, {"coefficient", c.str()}});
  j["claim"] = std::move(claim);
  return j;
}

inline Certificate certificate_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("certificate: expected top-level object");
  check_format(j, "certificate");
  Certificate cert;
  cert.ring = ring_from_json(require(j, "ring", "certificate"));
  for (const auto& obj : require(j, "registry", "certificate")) {
    const std::string id = require(obj, "id", "certificate.registry").get<std::string>();
    NilMulticomplex n = instance_body_from_json(obj, cert.ring, "certificate.registry." + id);
    try {
      cert.registry.add_named(id, std::move(n));
    } catch (const std::invalid_argument& e) {
      throw ParseError(std::string("certificate.registry: ") + e.what());
    }
  }
  const json& target = require(j, "target", "certificate");
  cert.target_nu = require(target, "nu", "certificate.target").get<std::string>();
  cert.target_zero = require(target, "zero", "certificate.target").get<std::string>();
  for (const auto& s : require(j, "steps", "certificate")) {
    const std::string kind = require(s, "kind", "certificate.steps").get<std::string>();
    if (kind == "ShortExact") {
      ShortExactStep se;
      se.sub = require(s, "sub", "step").get<std::string>();
      se.total = require(s, "total", "step").get<std::string>();
      se.quotient = require(s, "quotient", "step").get<std::string>();
      se.inclusion = position_matrices_from_json(require(s, "inclusion", "step"), "step.inclusion");
      se.projection =
          position_matrices_from_json(require(s, "projection", "step"), "step.projection");
      se.retraction =
          position_matrices_from_json(require(s, "retraction", "step"), "step.retraction");
      cert.steps.emplace_back(std::move(se));
    } else if (kind == "Diagonal") {
      DiagonalStep di;
      di.object = require(s, "object", "step").get<std::string>();
      const json& dir = require(s, "direction", "step");
      if (!dir.is_number_integer()) throw ParseError("step: direction must be an integer");
      di.direction = dir.get<int>();
      cert.steps.emplace_back(di);
    } else if (kind == "Isomorphism") {
      IsomorphismStep iso;
      iso.left = require(s, "left", "step").get<std::string>();
      iso.right = require(s, "right", "step").get<std::string>();
      iso.matrices = position_matrices_from_json(require(s, "matrices", "step"), "step.matrices");
      cert.steps.emplace_back(std::move(iso));
    } else {
      throw ParseError("certificate.steps: unknown kind '" + kind + "'");
    }
  }
  for (const auto& term : require(j, "claim", "certificate")) {
    const std::string id = require(term, "object", "certificate.claim").get<std::string>();
    cert.claim.add(id, bigint_from_json(require(term, "coefficient", "certificate.claim"),
                                        "certificate.claim.coefficient"));
  }
  return cert;
}

// failure report: the (valid) instance the splitting failed on, annotated
inline json failure_report_to_json(const ReductionFailure& rf) {
  json j = instance_to_json(rf.instance);
  json details = json::array();
  for (const auto& f : rf.failure.details)
    details.push_back(json{{"kind", fail_kind_name(f.kind)}, {"detail", f.detail}});
  j["failure"] = json{{"strategy", strategy_name(rf.failure.strategy)},
                      {"exponent", rf.failure.exponent},
                      {"where", rf.failure.where},
                      {"depth", rf.depth},
                      {"details", std::move(details)}};
  return j;
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

inline json parse_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("JSON parse error: ") + e.what());
  }
}

inline json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_text(text);
}

inline void save_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << text;
}

inline NilMulticomplex load_instance(const std::string& path) {
  return instance_from_json(load_json(path));
}

inline Certificate load_certificate(const std::string& path) {
  return certificate_from_json(load_json(path));
}

}  // namespace io
}  // namespace kwitness
