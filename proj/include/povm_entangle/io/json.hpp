#pragma once

#include "povm_entangle/montecarlo.hpp"
#include "povm_entangle/witness.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace povm {

using json = nlohmann::json;

namespace io {

/// Reads a member, turning type and presence errors into InputError.
template <class T>
T field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw InputError(std::string("missing JSON field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InputError(std::string("JSON field '") + key + "': " + e.what());
  }
}

template <class T>
T field_or(const json& j, const char* key, T fallback) {
  return j.is_object() && j.contains(key) ? field<T>(j, key) : fallback;
}

/// NaN and infinities become null.
inline json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline double number_from(const json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (!j.is_number()) throw InputError("expected a number or null in JSON");
  return j.get<double>();
}

template <class Derived>
json real_rows(const Eigen::MatrixBase<Derived>& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(number(static_cast<double>(m(i, c))));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Eigen::MatrixXd real_rows_from(const json& j, Eigen::Index rows = -1, Eigen::Index cols = -1) {
  if (!j.is_array() || j.empty()) throw InputError("expected a nonempty array of rows");
  const auto r = static_cast<Eigen::Index>(j.size());
  if (!j[0].is_array()) throw InputError("expected a nonempty array of rows");
  const auto c = static_cast<Eigen::Index>(j[0].size());
  if ((rows >= 0 && r != rows) || (cols >= 0 && c != cols))
    throw InputError("matrix has shape " + std::to_string(r) + "x" + std::to_string(c) + ", expected " +
                     std::to_string(rows) + "x" + std::to_string(cols));
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    const json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != c) throw InputError("ragged matrix rows");
    for (Eigen::Index k = 0; k < c; ++k) m(i, k) = number_from(row[static_cast<std::size_t>(k)]);
  }
  return m;
}

/// {"re": rows, "im": rows}
template <class Derived>
json complex_matrix(const Eigen::MatrixBase<Derived>& m) {
  return json{{"re", real_rows(m.real())}, {"im", real_rows(m.imag())}};
}

inline CMatrix complex_matrix_from(const json& j, Eigen::Index rows = -1, Eigen::Index cols = -1) {
  const Eigen::MatrixXd re = real_rows_from(field<json>(j, "re"), rows, cols);
  const Eigen::MatrixXd im = real_rows_from(field<json>(j, "im"), re.rows(), re.cols());
  CMatrix m(re.rows(), re.cols());
  m.real() = re;
  m.imag() = im;
  return m;
}

inline json complex_vector(const Vec2c& v) {
  return json{{"re", {v(0).real(), v(1).real()}}, {"im", {v(0).imag(), v(1).imag()}}};
}

inline json grid(const QuasiGrid& g) { return real_rows(g); }
inline QuasiGrid grid_from(const json& j) { return real_rows_from(j, 6, 6); }

inline json local_labels() {
  json labels = json::array();
  for (const char* l : kLocalLabels) labels.push_back(l);
  return labels;
}

/// Pretty form used for every file the toolkit writes.
inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

inline json parse_text(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(origin + ": " + e.what());
  }
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline json read_json(const std::string& path) { return parse_text(read_text(path), path); }

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << text;
  if (!out) throw InputError("failed writing '" + path + "'");
}

}  // namespace io

// --- operators ---------------------------------------------------------------

inline void to_json(json& j, const HermitianOperator& op) {
  j = json{{"parties", op.parties()}, {"re", io::real_rows(op.matrix().real())},
           {"im", io::real_rows(op.matrix().imag())}};
}

inline void from_json(const json& j, HermitianOperator& op) {
  const auto parties = io::field<std::vector<int>>(j, "parties");
  op = HermitianOperator(io::complex_matrix_from(j), parties);
}

inline void to_json(json& j, const PovmSet& povm) {
  j = json{{"labels", povm.labels()}, {"elements", povm.elements()}};
}

inline void from_json(const json& j, PovmSet& povm) {
  const auto labels = io::field<std::vector<std::string>>(j, "labels");
  const json elems = io::field<json>(j, "elements");
  if (!elems.is_array()) throw InputError("'elements' must be an array");
  std::vector<HermitianOperator> ops;
  for (const auto& e : elems) ops.push_back(e.get<HermitianOperator>());
  povm = PovmSet(labels, std::move(ops));
}

inline void to_json(json& j, const PauliCorrelation& c) { j = io::real_rows(c.coeffs); }

// --- tomography --------------------------------------------------------------

inline void to_json(json& j, const BasisMap& map) {
  json alice = json::object(), bob = json::object();
  for (int i = 0; i < 6; ++i) {
    const std::string key(1, kPolarizationNames[i]);
    alice[key] = map.alice[i].name();
    bob[key] = map.bob[i].name();
  }
  j = json{{"alice", alice}, {"bob", bob}};
}

/// Keys may be given in any case; all six polarizations are required per side.
inline void from_json(const json& j, BasisMap& map) {
  for (const char* side : {"alice", "bob"}) {
    const json s = io::field<json>(j, side);
    if (!s.is_object()) throw InputError(std::string("basis map '") + side + "' must be an object");
    std::array<bool, 6> seen{};
    auto& target = std::string_view(side) == "alice" ? map.alice : map.bob;
    for (const auto& [key, value] : s.items()) {
      const int p = static_cast<int>(parse_polarization(key));
      if (seen[p]) throw InputError(std::string("basis map '") + side + "' repeats polarization " + key);
      if (!value.is_string()) throw InputError("basis map entries must be strings such as \"z+\"");
      seen[p] = true;
      target[p] = PauliState::parse(value.get<std::string>());
    }
    for (int p = 0; p < 6; ++p)
      if (!seen[p])
        throw InputError(std::string("basis map '") + side + "' lacks polarization " + kPolarizationNames[p]);
  }
  map.validate();
}

inline void to_json(json& j, const PhysicalityCorrection& c) {
  j = json{{"lambda", c.lambda}, {"p", c.p}, {"min_eigenvalue", c.min_eigenvalue}, {"povm", c.povm}};
}

// --- standard form and quasidistributions -------------------------------------

inline void to_json(json& j, const StandardForm& sf) {
  j = json{{"pi", sf.pi},
           {"filter_a", io::complex_matrix(sf.transform.filter_a)},
           {"filter_b", io::complex_matrix(sf.transform.filter_b)},
           {"rotation_a", io::complex_matrix(sf.transform.rotation_a)},
           {"rotation_b", io::complex_matrix(sf.transform.rotation_b)},
           {"residual", sf.residual},
           {"source_trace", sf.source_trace}};
}

inline void from_json(const json& j, StandardForm& sf) {
  sf.pi = io::field<std::array<double, 4>>(j, "pi");
  sf.transform.filter_a = io::complex_matrix_from(io::field<json>(j, "filter_a"), 2, 2);
  sf.transform.filter_b = io::complex_matrix_from(io::field<json>(j, "filter_b"), 2, 2);
  sf.transform.rotation_a = io::complex_matrix_from(io::field<json>(j, "rotation_a"), 2, 2);
  sf.transform.rotation_b = io::complex_matrix_from(io::field<json>(j, "rotation_b"), 2, 2);
  sf.residual = io::field<double>(j, "residual");
  sf.source_trace = io::field_or<double>(j, "source_trace", 4.0 * sf.pi[0]);
}

inline void to_json(json& j, const QuasiDistribution& q) {
  j = json{{"labels", io::local_labels()}, {"grid", io::grid(q.grid)}, {"q", q.q}, {"trace", q.trace}};
}

inline void from_json(const json& j, QuasiDistribution& q) {
  q.grid = io::grid_from(io::field<json>(j, "grid"));
  q.q = io::field<double>(j, "q");
  q.trace = io::field<double>(j, "trace");
}

inline void to_json(json& j, const NegativityReport& r) {
  j = json{{"max_negativity", r.max_negativity},
           {"cumulative_negativity", r.cumulative_negativity},
           {"q", r.q},
           {"verdict", to_string(r.verdict)}};
  if (r.significance) j["significance"] = io::grid(*r.significance);
}

inline void from_json(const json& j, NegativityReport& r) {
  r.max_negativity = io::field<double>(j, "max_negativity");
  r.cumulative_negativity = io::field<double>(j, "cumulative_negativity");
  r.q = io::field<double>(j, "q");
  const auto v = io::field<std::string>(j, "verdict");
  if (v != "entangled" && v != "separable") throw InputError("unknown verdict '" + v + "'");
  r.verdict = v == "entangled" ? Verdict::entangled : Verdict::separable;
  if (j.contains("significance")) r.significance = io::grid_from(j.at("significance"));
}

inline void to_json(json& j, const TildeDecomposition& t) {
  json a = json::array(), b = json::array();
  for (int k = 0; k < 6; ++k) {
    a.push_back(json{{"label", kLocalLabels[k]},
                     {"state", io::complex_vector(t.states_a[k])},
                     {"bloch", bloch_vector(t.states_a[k])},
                     {"norm", t.norms_a[k]}});
    b.push_back(json{{"label", kLocalLabels[k]},
                     {"state", io::complex_vector(t.states_b[k])},
                     {"bloch", bloch_vector(t.states_b[k])},
                     {"norm", t.norms_b[k]}});
  }
  j = json{{"alice", a}, {"bob", b}, {"weights", io::grid(t.weights)}};
}

// --- witness -----------------------------------------------------------------

inline void to_json(json& j, const WitnessResult& r) {
  j = json{{"lhs", r.lhs}, {"bound", r.bound}, {"margin", r.margin}, {"verdict", to_string(r.verdict)}};
  if (r.numeric_bound) j["numeric_bound"] = true;
}

inline void from_json(const json& j, WitnessResult& r) {
  r.lhs = io::field<double>(j, "lhs");
  r.bound = io::field<double>(j, "bound");
  r.margin = io::field<double>(j, "margin");
  const auto v = io::field<std::string>(j, "verdict");
  if (v != "entangled" && v != "inconclusive") throw InputError("unknown witness verdict '" + v + "'");
  r.verdict = v == "entangled" ? WitnessVerdict::entangled : WitnessVerdict::inconclusive;
  r.numeric_bound = io::field_or<bool>(j, "numeric_bound", false);
}

// --- Monte Carlo ---------------------------------------------------------------

/// The worker count is left out so reports do not depend on it.
inline void to_json(json& j, const McConfig& c) {
  j = json{{"sample_size", c.sample_size},
           {"inflation", c.inflation},
           {"seed", c.seed},
           {"margin", c.margin},
           {"max_excluded_fraction", c.max_excluded_fraction}};
}

inline void to_json(json& j, const ElementUncertainty& e) {
  j = json{{"label", e.label},
           {"labels", io::local_labels()},
           {"grid", io::grid(e.reference.grid)},
           {"q", e.reference.q},
           {"trace", e.reference.trace},
           {"std", io::grid(e.std)},
           {"significance", io::grid(e.significance)},
           {"peak_significance", e.peak_significance()},
           {"report", e.reference_report},
           {"sample",
            {{"mean", io::grid(e.mean)},
             {"q", {{"mean", e.q_mean}, {"std", e.q_std}}},
             {"max_negativity", {{"mean", e.max_negativity_mean}, {"std", e.max_negativity_std}}},
             {"cumulative_negativity", {{"mean", e.cumulative_negativity_mean}, {"std", e.cumulative_negativity_std}}}}},
           {"diagnostics", {{"relabelled_samples", e.relabelled_samples}}}};
}

inline void to_json(json& j, const UncertaintyReport& r) {
  j = json{{"config", r.config},
           {"reference_lambda", r.reference_lambda},
           {"reference_p", r.reference_p},
           {"elements", r.elements},
           {"diagnostics", {{"samples_used", r.samples_used}, {"samples_excluded", r.samples_excluded}}}};
}

}  // namespace povm
