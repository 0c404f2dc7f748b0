#pragma once

#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "json.hpp"

#include "coneproj/harness.hpp"
#include "coneproj/polar.hpp"
#include "coneproj/projection.hpp"
#include "coneproj/sets.hpp"

namespace coneproj::io {

/// Parsed JSON object that remembers where it came from, for error messages.
struct Document {
  nlohmann::json value;
  std::string source;
};

inline Document parse(const std::string &text, const std::string &source) {
  try {
    return {nlohmann::json::parse(text), source};
  } catch (const nlohmann::json::parse_error &e) {
    fail(ErrorKind::invalid_input, source + ": malformed JSON (" + e.what() + ")");
  }
}

inline Document read_file(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    fail(ErrorKind::invalid_input, path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

namespace detail {

inline double number(const nlohmann::json &v, const std::string &field) {
  if (!v.is_number())
    fail(ErrorKind::invalid_input, field + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d))
    fail(ErrorKind::invalid_input, field + ": must be finite");
  return d;
}

inline Eigen::VectorXd array(const nlohmann::json &v, const std::string &field, std::optional<int> n) {
  if (!v.is_array())
    fail(ErrorKind::invalid_input, field + ": expected an array of numbers");
  if (n && static_cast<int>(v.size()) != *n)
    fail(ErrorKind::invalid_input,
         field + ": expected " + std::to_string(*n) + " entries, got " + std::to_string(v.size()));
  if (v.empty())
    fail(ErrorKind::invalid_input, field + ": must not be empty");
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i)
    out[static_cast<Eigen::Index>(i)] = number(v[i], field + "[" + std::to_string(i) + "]");
  return out;
}

inline std::vector<Eigen::VectorXd> rows(const nlohmann::json &doc, const std::string &field, std::optional<int> &n) {
  const auto &v = doc.at(field);
  if (!v.is_array() || v.empty())
    fail(ErrorKind::invalid_input, field + ": expected a non-empty array of arrays");
  std::vector<Eigen::VectorXd> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(array(v[i], field + "[" + std::to_string(i) + "]", n));
    n = static_cast<int>(out.back().size());
  }
  return out;
}

inline void reject_unknown(const nlohmann::json &doc, std::initializer_list<const char *> known,
                           const std::string &source) {
  for (const auto &[key, _] : doc.items()) {
    bool ok = false;
    for (const char *k : known)
      ok = ok || key == k;
    if (!ok)
      fail(ErrorKind::invalid_input, source + ": " + key + ": unknown field");
  }
}

} // namespace detail

/// Space header of an input file: optional "p" and "n".
struct Header {
  std::optional<double> p;
  std::optional<int> n;
};

inline Header read_header(const Document &d) {
  Header h;
  if (d.value.contains("p"))
    h.p = detail::number(d.value["p"], "p");
  if (d.value.contains("n")) {
    const auto &n = d.value["n"];
    if (!n.is_number_integer() || n.get<long long>() < 1)
      fail(ErrorKind::invalid_input, "n: expected a positive integer");
    h.n = n.get<int>();
  }
  return h;
}

/// Resolves the space from a file header and command-line values; they must
/// agree when both are given.
inline SpaceConfig resolve_space(const Header &h, std::optional<double> p, std::optional<int> n) {
  if (h.p && p && *h.p != *p)
    fail(ErrorKind::invalid_input, "p: file has " + std::to_string(*h.p) + " but --p is " + std::to_string(*p));
  if (h.n && n && *h.n != *n)
    fail(ErrorKind::invalid_input, "n: file has " + std::to_string(*h.n) + " but the input has dimension " +
                                       std::to_string(*n));
  const auto pp = p ? p : h.p;
  const auto nn = n ? n : h.n;
  if (!pp)
    fail(ErrorKind::invalid_input, "p: missing (give --p or a \"p\" field)");
  if (!nn)
    fail(ErrorKind::invalid_input, "n: missing");
  return SpaceConfig::make(*nn, *pp);
}

inline void require_object(const Document &d) {
  if (!d.value.is_object())
    fail(ErrorKind::invalid_input, d.source + ": expected a JSON object");
}

/// {"p", "n", "generators": [[...]], "facet_normals"?: [[...]]}
inline ConeSpec parse_cone(const Document &d, std::optional<int> &n) {
  require_object(d);
  detail::reject_unknown(d.value, {"p", "n", "generators", "facet_normals"}, d.source);
  if (!d.value.contains("generators"))
    fail(ErrorKind::invalid_input, "generators: missing");
  if (auto h = read_header(d); h.n)
    n = h.n;
  ConeSpec k;
  for (auto &g : detail::rows(d.value, "generators", n))
    k.generators.emplace_back(std::move(g));
  if (d.value.contains("facet_normals")) {
    std::vector<Covector> f;
    for (auto &a : detail::rows(d.value, "facet_normals", n))
      f.emplace_back(std::move(a));
    k.facet_normals = std::move(f);
  }
  return k;
}

/// {"p", "n", "basis": [[...]]} or {"p", "n", "kernel_of": [[...]]}
inline SubspaceSpec parse_subspace(const Document &d, std::optional<int> &n) {
  require_object(d);
  detail::reject_unknown(d.value, {"p", "n", "basis", "kernel_of"}, d.source);
  const bool has_basis = d.value.contains("basis"), has_kernel = d.value.contains("kernel_of");
  if (has_basis == has_kernel)
    fail(ErrorKind::invalid_input, "basis/kernel_of: exactly one of the two fields is required");
  if (auto h = read_header(d); h.n)
    n = h.n;
  if (has_basis) {
    std::vector<Vector> b;
    for (auto &v : detail::rows(d.value, "basis", n))
      b.emplace_back(std::move(v));
    return SubspaceSpec::from_basis(std::move(b));
  }
  std::vector<Covector> f;
  for (auto &a : detail::rows(d.value, "kernel_of", n))
    f.emplace_back(std::move(a));
  return SubspaceSpec::kernel_of(std::move(f));
}

struct HyperplaneSpec {
  Covector normal;
  std::optional<Side> side; // set: half-space H_-(a) or H_+(a)
};

/// {"p", "n", "normal": [...], "sign"?: "minus" | "plus"}
inline HyperplaneSpec parse_hyperplane(const Document &d, std::optional<int> &n) {
  require_object(d);
  detail::reject_unknown(d.value, {"p", "n", "normal", "sign"}, d.source);
  if (!d.value.contains("normal"))
    fail(ErrorKind::invalid_input, "normal: missing");
  if (auto h = read_header(d); h.n)
    n = h.n;
  HyperplaneSpec out{Covector(detail::array(d.value["normal"], "normal", n)), std::nullopt};
  n = out.normal.size();
  if (d.value.contains("sign")) {
    const auto &s = d.value["sign"];
    if (s == "minus")
      out.side = Side::minus;
    else if (s == "plus")
      out.side = Side::plus;
    else
      fail(ErrorKind::invalid_input, "sign: expected \"minus\" or \"plus\"");
  }
  return out;
}

inline Vector parse_point(const std::string &text, std::optional<int> n) {
  return Vector(detail::array(parse(text, "point").value, "point", n));
}

/// Overrides for any subset of the tolerance fields.
inline Tolerances parse_tolerances(const Document &d, Tolerances t = {}) {
  require_object(d);
  struct Field {
    const char *name;
    double Tolerances::*member;
  };
  static const Field fields[] = {
      {"duality", &Tolerances::duality},
      {"inversion", &Tolerances::inversion},
      {"rank", &Tolerances::rank},
      {"membership", &Tolerances::membership},
      {"solver", &Tolerances::solver},
      {"certificate", &Tolerances::certificate},
      {"subspace_certificate", &Tolerances::subspace_certificate},
      {"line_certificate", &Tolerances::line_certificate},
      {"uniqueness", &Tolerances::uniqueness},
      {"polar_residual", &Tolerances::polar_residual},
      {"dual_band_low", &Tolerances::dual_band_low},
      {"dual_band_high", &Tolerances::dual_band_high},
      {"witness", &Tolerances::witness},
      {"linearity", &Tolerances::linearity},
      {"exact", &Tolerances::exact},
  };
  for (const auto &[key, value] : d.value.items()) {
    if (key == "max_iter") {
      if (!value.is_number_integer() || value.get<long long>() < 1)
        fail(ErrorKind::invalid_input, "max_iter: expected a positive integer");
      t.max_iter = value.get<int>();
      continue;
    }
    bool found = false;
    for (const auto &f : fields) {
      if (key != f.name)
        continue;
      const double v = detail::number(value, key);
      if (!(v > 0.0))
        fail(ErrorKind::invalid_input, key + ": must be positive");
      t.*(f.member) = v;
      found = true;
    }
    if (!found)
      fail(ErrorKind::invalid_input, d.source + ": " + key + ": unknown tolerance");
  }
  return t;
}

/// Tolerances, with overrides from the file named by COMEPROJ_TOL_OVERRIDE.
inline Tolerances tolerances_from_env() {
  const char *path = std::getenv("COMEPROJ_TOL_OVERRIDE");
  if (path == nullptr || *path == '\0')
    return {};
  return parse_tolerances(read_file(path));
}

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

inline Json to_json(const SpaceConfig &s) { return Json{{"n", s.n}, {"p", s.p}, {"q", s.q}}; }

inline Json to_json(const ProjectionResult &r) {
  return Json{{"point", coneproj::to_json(r.point)},
              {"residual", coneproj::to_json(r.residual)},
              {"certificate_max", r.certificate_max},
              {"iterations", r.iterations},
              {"converged", r.converged}};
}

inline Json to_json(const PropertyReport &r) {
  return Json{{"suite", r.suite},
              {"space", to_json(r.space)},
              {"trials", r.trials},
              {"violations", r.violations},
              {"max_residual", r.max_residual},
              {"witness", r.witness ? *r.witness : Json(nullptr)},
              {"seed", r.seed},
              {"verdict", to_string(r.verdict)}};
}

inline Json to_json(const EquivalenceReport &r) {
  Json assertions = Json::array();
  for (const auto &a : r.assertions)
    assertions.push_back(Json{{"id", a.id}, {"statement", a.statement}, {"report", to_json(a.report)}});
  return Json{{"space", to_json(r.space)},
              {"seed", r.seed},
              {"assertions", std::move(assertions)},
              {"consistent", r.consistent},
              {"consistency_checked", r.consistency_checked}};
}

inline Json to_json(const PolarSample &s) {
  return Json{{"direction", coneproj::to_json(s.direction)},
              {"residual_norm", s.residual_norm},
              {"dual_certified", s.dual_certified}};
}

inline Json to_json(const ConvexityReport &r, const ConeSpec &k) {
  return Json{{"verdict", to_string(r.verdict)},
              {"trials", r.trials},
              {"max_dual_violation", r.max_dual_violation},
              {"witness", r.witness ? convexity_witness_json(k, *r.witness) : Json(nullptr)}};
}

inline std::string samples_csv(const std::vector<PolarSample> &samples) {
  std::ostringstream out;
  out.precision(17);
  if (samples.empty())
    return "residual_norm,dual_certified\n";
  const int n = samples.front().direction.size();
  for (int i = 0; i < n; ++i)
    out << "x" << i << ",";
  out << "residual_norm,dual_certified\n";
  for (const auto &s : samples) {
    for (int i = 0; i < n; ++i)
      out << s.direction[i] << ",";
    out << s.residual_norm << "," << (s.dual_certified ? 1 : 0) << "\n";
  }
  return out.str();
}

} // namespace coneproj::io
