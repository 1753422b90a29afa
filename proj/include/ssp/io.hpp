#pragma once

#include <charconv>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ssp/problem.hpp"
#include "ssp/solver.hpp"

namespace ssp {

using Json = nlohmann::json;

/// Shortest decimal that round-trips to the same double. Keeps CSV traces
/// diff-stable across runs and platforms.
inline std::string format_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace detail {

inline Vec json_vec(const Json& j, const std::string& field) {
  if (!j.is_array()) throw ConfigError(field + ": expected an array of numbers");
  Vec out;
  out.reserve(j.size());
  for (const Json& v : j) {
    if (!v.is_number()) throw ConfigError(field + ": expected an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

inline const Json& json_field(const Json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end()) throw ConfigError(std::string(name) + ": missing field");
  return *it;
}

inline double json_number(const Json& j, const char* name) {
  const Json& v = json_field(j, name);
  if (!v.is_number()) throw ConfigError(std::string(name) + ": expected a number");
  return v.get<double>();
}

inline int json_int(const Json& j, const char* name) {
  const Json& v = json_field(j, name);
  if (!v.is_number_integer()) throw ConfigError(std::string(name) + ": expected an integer");
  return v.get<int>();
}

inline std::string json_string(const Json& j, const char* name) {
  const Json& v = json_field(j, name);
  if (!v.is_string()) throw ConfigError(std::string(name) + ": expected a string");
  return v.get<std::string>();
}

inline SimpleSet set_from_json(const Json& j, int dim) {
  if (!j.is_object()) throw ConfigError("Y: expected an object");
  std::string type = json_string(j, "type");
  if (type == "whole_space") return SimpleSet::whole_space(dim);
  if (type == "box") {
    return SimpleSet::box(json_vec(json_field(j, "lower"), "Y.lower"),
                          json_vec(json_field(j, "upper"), "Y.upper"));
  }
  if (type == "ball") {
    return SimpleSet::ball(json_vec(json_field(j, "center"), "Y.center"),
                           json_number(j, "radius"));
  }
  if (type == "halfspace") {
    return SimpleSet::halfspace(json_vec(json_field(j, "normal"), "Y.normal"),
                                json_number(j, "offset"));
  }
  throw ConfigError("Y.type: unknown simple set '" + type + "'");
}

inline Json set_to_json(const SimpleSet& s) {
  Json j;
  j["type"] = s.kind();
  if (auto* b = s.get_if<SimpleSet::Box>()) {
    j["lower"] = b->lower;
    j["upper"] = b->upper;
  } else if (auto* b = s.get_if<SimpleSet::Ball>()) {
    j["center"] = b->center;
    j["radius"] = b->radius;
  } else if (auto* h = s.get_if<SimpleSet::Halfspace>()) {
    j["normal"] = h->normal;
    j["offset"] = h->offset;
  }
  return j;
}

inline ConstraintOracle oracle_from_json(const Json& j, int index) {
  const std::string where = "constraints[" + std::to_string(index) + "]";
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  std::string type = json_string(j, "type");
  if (type == "affine") {
    return ConstraintOracle::affine(json_vec(json_field(j, "a"), where + ".a"),
                                    json_number(j, "b"));
  }
  if (type == "ball") {
    return ConstraintOracle::ball_distance(json_vec(json_field(j, "center"), where + ".center"),
                                           json_number(j, "radius"));
  }
  if (type == "max_affine") {
    const Json& rows_json = json_field(j, "rows");
    if (!rows_json.is_array() || rows_json.empty()) {
      throw ConfigError(where + ".rows: expected a nonempty array of rows");
    }
    std::vector<Vec> rows;
    for (const Json& r : rows_json) rows.push_back(json_vec(r, where + ".rows"));
    return ConstraintOracle::max_affine(Mat::from_rows(rows),
                                        json_vec(json_field(j, "offsets"), where + ".offsets"));
  }
  throw ConfigError(where + ".type: unknown constraint '" + type + "'");
}

inline Json oracle_to_json(const ConstraintOracle& c) {
  Json j;
  j["type"] = c.kind();
  if (auto* a = c.get_if<ConstraintOracle::Affine>()) {
    j["a"] = a->a;
    j["b"] = a->b;
  } else if (auto* b = c.get_if<ConstraintOracle::BallDistance>()) {
    j["center"] = b->center;
    j["radius"] = b->radius;
  } else if (auto* m = c.get_if<ConstraintOracle::MaxAffine>()) {
    Json rows = Json::array();
    for (int i = 0; i < m->rows.rows(); ++i) rows.push_back(m->rows.row_vec(i));
    j["rows"] = std::move(rows);
    j["offsets"] = m->offsets;
  }
  return j;
}

inline SamplingPlan plan_from_json(const Json& sampling, Vec weights) {
  std::string scheme = json_string(sampling, "scheme");
  int batch_size = json_int(sampling, "batch_size");
  if (scheme == "iid") return SamplingPlan::iid(std::move(weights), batch_size);
  if (scheme == "without_replacement") {
    return SamplingPlan::without_replacement(std::move(weights), batch_size);
  }
  if (scheme == "partition") {
    const Json& blocks_json = json_field(sampling, "blocks");
    if (!blocks_json.is_array()) throw ConfigError("sampling.blocks: expected an array");
    std::vector<Minibatch> blocks;
    for (const Json& b : blocks_json) {
      if (!b.is_array()) throw ConfigError("sampling.blocks: expected arrays of indices");
      Minibatch mb;
      for (const Json& idx : b) {
        if (!idx.is_number_integer()) {
          throw ConfigError("sampling.blocks: expected arrays of indices");
        }
        mb.push_back(idx.get<int>());
      }
      blocks.push_back(std::move(mb));
    }
    SamplingPlan plan = SamplingPlan::partition(std::move(weights), std::move(blocks));
    if (plan.batch_size() != batch_size) {
      throw ConfigError("sampling.batch_size: does not match the partition block size");
    }
    return plan;
  }
  throw ConfigError("sampling.scheme: unknown scheme '" + scheme + "'");
}

}  // namespace detail

inline Json problem_to_json(const FeasibilityProblem& problem) {
  Json j;
  j["dim"] = problem.dim();
  j["Y"] = detail::set_to_json(problem.Y);
  Json constraints = Json::array();
  for (const ConstraintOracle& c : problem.oracles) {
    constraints.push_back(detail::oracle_to_json(c));
  }
  j["constraints"] = std::move(constraints);
  j["weights"] = problem.plan.weights();
  Json sampling;
  sampling["scheme"] = to_string(problem.plan.scheme());
  sampling["batch_size"] = problem.plan.batch_size();
  if (problem.plan.scheme() == Scheme::partition) sampling["blocks"] = problem.plan.blocks();
  j["sampling"] = std::move(sampling);
  if (problem.witness) j["witness"] = *problem.witness;
  return j;
}

inline FeasibilityProblem problem_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("problem: expected a JSON object");
  int dim = detail::json_int(j, "dim");
  if (dim < 1) throw ConfigError("dim: must be >= 1");

  SimpleSet y = detail::set_from_json(detail::json_field(j, "Y"), dim);
  if (y.dim() != dim) throw ConfigError("Y: dimension differs from dim");

  const Json& constraints_json = detail::json_field(j, "constraints");
  if (!constraints_json.is_array() || constraints_json.empty()) {
    throw ConfigError("constraints: expected a nonempty array");
  }
  std::vector<ConstraintOracle> oracles;
  int index = 0;
  for (const Json& c : constraints_json) {
    oracles.push_back(detail::oracle_from_json(c, index++));
  }

  Vec weights = detail::json_vec(detail::json_field(j, "weights"), "weights");
  if (weights.size() != oracles.size()) {
    throw ConfigError("weights: length differs from the constraint count");
  }
  SamplingPlan plan = detail::plan_from_json(detail::json_field(j, "sampling"),
                                             std::move(weights));

  std::optional<Vec> witness;
  if (j.contains("witness") && !j["witness"].is_null()) {
    witness = detail::json_vec(j["witness"], "witness");
  }
  return FeasibilityProblem::checked(std::move(oracles), std::move(y), std::move(plan),
                                     std::move(witness));
}

inline FeasibilityProblem load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open problem file: " + path);
  Json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("problem file " + path + ": " + e.what());
  }
  return problem_from_json(j);
}

inline void save_problem(const FeasibilityProblem& problem, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write problem file: " + path);
  out << problem_to_json(problem).dump(2) << "\n";
}

/// Fixed-column CSV of a convergence trace. Optional fields print as empty
/// cells; the column set never changes.
inline std::string trace_to_csv(const ConvergenceTrace& trace) {
  std::string out = "k,beta_k,LNk,max_residual,witness_dist_sq,G_exact\n";
  auto cell = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  for (const IterationRecord& rec : trace.records) {
    out += std::to_string(rec.k);
    out += ',';
    out += cell(rec.beta_k);
    out += ',';
    out += cell(rec.lnk);
    out += ',';
    out += format_double(rec.max_residual);
    out += ',';
    out += cell(rec.witness_dist_sq);
    out += ',';
    out += cell(rec.g_exact);
    out += '\n';
  }
  return out;
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write file: " + path);
  out << content;
}

}  // namespace ssp
