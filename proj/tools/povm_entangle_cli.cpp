// povm-entangle: detector tomography to entanglement quasidistributions.
//
// Exit codes: 0 success, 1 usage, 2 invalid input, 3 numeric failure.

#include "povm_entangle.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using povm::json;

namespace {

constexpr const char* kVersion = POVM_ENTANGLE_VERSION;

struct Manifest {
  std::string command;
  json inputs = json::object();
  json config = json::object();
  std::optional<std::uint64_t> seed;

  json to_json() const {
    return json{{"command", command},
                {"version", kVersion},
                {"inputs", inputs},
                {"config", config},
                {"seed", seed ? json(*seed) : json(nullptr)}};
  }
};

std::uint64_t parse_seed(const std::string& text, const std::string& origin) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &used, 0);
  } catch (const std::exception&) {
    used = 0;
  }
  if (text.empty() || used != text.size() || text[0] == '-')
    throw povm::InputError(origin + ": seed '" + text + "' is not a nonnegative integer");
  return v;
}

/// Flag first, then the POVM_ENTANGLE_SEED environment variable, then `fallback`.
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, std::uint64_t fallback) {
  if (flag) return *flag;
  if (const char* env = std::getenv("POVM_ENTANGLE_SEED"); env && *env)
    return parse_seed(env, "POVM_ENTANGLE_SEED");
  return fallback;
}

std::optional<povm::BasisMap> load_basis_map(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return povm::io::read_json(path).get<povm::BasisMap>();
}

povm::PovmSet povm_from_json(const json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "bell") return povm::bell_detector_povm();
    throw povm::InputError("unknown built-in POVM '" + j.get<std::string>() + "'");
  }
  // Output of `reconstruct` carries the corrected set under "povm".
  if (j.is_object() && j.contains("povm")) return povm_from_json(j.at("povm"));
  return j.get<povm::PovmSet>();
}

/// "bell" or a JSON file.
povm::PovmSet load_povm(const std::string& spec) {
  if (spec == "bell") return povm::bell_detector_povm();
  return povm_from_json(povm::io::read_json(spec));
}

void emit(const std::string& path, const json& doc) {
  const std::string text = povm::io::dump(doc);
  if (path.empty() || path == "-")
    std::cout << text;
  else
    povm::io::write_text(path, text);
}

void ensure_directory(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw povm::InputError("cannot create output directory '" + dir + "'");
}

/// Outcome labels such as "AA+AD" are safe on common file systems; anything
/// else outside [A-Za-z0-9+_-] is replaced.
std::string file_stem(const std::string& label) {
  std::string s;
  for (char c : label) s += std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '-' ? c : '_';
  return s.empty() ? "element" : s;
}

void write_counts_with_manifest(const std::string& path, const povm::CoincidenceCounts& counts,
                                const Manifest& m) {
  if (povm::io::has_json_extension(path)) {
    json doc = povm::io::counts_to_json(counts);
    doc["manifest"] = m.to_json();
    povm::io::write_text(path, povm::io::dump(doc));
  } else {
    povm::io::write_text(path, "# manifest " + m.to_json().dump() + "\n" + povm::io::format_counts_csv(counts));
  }
}

// --- simulate -----------------------------------------------------------------

struct SimulateArgs {
  std::string povm = "bell";
  std::string model;
  std::optional<std::int64_t> counts;
  std::optional<double> eps;
  std::optional<double> perturbation;
  std::optional<std::uint64_t> seed;
  std::string basis_map;
  std::string out;
};

int cmd_simulate(const SimulateArgs& a) {
  povm::DetectorModel model;
  std::optional<std::uint64_t> model_seed;
  Manifest m{"simulate"};
  if (!a.model.empty()) {
    const json spec = povm::io::read_json(a.model);
    if (spec.contains("povm")) model.povm = povm_from_json(spec.at("povm"));
    model.eps = povm::io::field_or<double>(spec, "eps", model.eps);
    model.counts_per_setting = povm::io::field_or<std::int64_t>(spec, "counts_per_setting", model.counts_per_setting);
    model.perturbation = povm::io::field_or<double>(spec, "perturbation", model.perturbation);
    if (spec.contains("basis_map")) model.basis_map = spec.at("basis_map").get<povm::BasisMap>();
    if (spec.contains("seed")) model_seed = povm::io::field<std::uint64_t>(spec, "seed");
    m.inputs["model"] = a.model;
  }
  if (a.povm != "bell" || a.model.empty()) model.povm = load_povm(a.povm);
  if (a.counts) model.counts_per_setting = *a.counts;
  if (a.eps) model.eps = *a.eps;
  if (a.perturbation) model.perturbation = *a.perturbation;
  if (auto bm = load_basis_map(a.basis_map)) model.basis_map = *bm;
  model.validate();

  const std::uint64_t seed = resolve_seed(a.seed ? a.seed : model_seed, 1);
  model.perturbation_seed = seed;
  const povm::CoincidenceCounts counts = povm::draw_counts(model, seed);

  m.inputs["povm"] = a.povm;
  if (!a.basis_map.empty()) m.inputs["basis_map"] = a.basis_map;
  m.config = json{{"eps", model.eps},
                  {"counts_per_setting", model.counts_per_setting},
                  {"perturbation", model.perturbation},
                  {"basis_map", model.basis_map}};
  m.seed = seed;
  write_counts_with_manifest(a.out, counts, m);
  return 0;
}

// --- reconstruct --------------------------------------------------------------

struct ReconstructArgs {
  std::string counts;
  std::string basis_map;
  double margin = 1e-5;
  std::string out;
};

int cmd_reconstruct(const ReconstructArgs& a) {
  const auto counts = povm::io::read_counts(a.counts, load_basis_map(a.basis_map));
  const auto freqs = povm::relative_frequencies(counts);
  const auto corr = povm::reconstruct_correlations(freqs);
  const auto raw = povm::reconstruct_povm(freqs);
  const auto fixed = povm::physicality_correct(raw, a.margin);

  Manifest m{"reconstruct"};
  m.inputs["counts"] = a.counts;
  if (!a.basis_map.empty()) m.inputs["basis_map"] = a.basis_map;
  m.config = json{{"margin", a.margin}, {"basis_map", counts.basis_map()}};

  const double residual = fixed.povm.completeness_residual();
  if (residual > 1e-6)
    std::cerr << "warning: completeness residual " << residual << " exceeds 1e-6\n";

  json correlations = json::object(), bell = json::object(), min_eig = json::object();
  for (std::size_t k = 0; k < raw.size(); ++k) {
    const auto& label = raw.labels()[k];
    correlations[label] = corr[k];
    min_eig[label] = povm::min_eigenvalue(raw[k]);
    const auto match = povm::closest_bell(fixed.povm[k]);
    bell[label] = json{{"bell", match.label}, {"overlap", match.overlap}};
  }
  const json doc{{"manifest", m.to_json()},
                 {"outcomes", counts.outcomes()},
                 {"correlations", correlations},
                 {"raw_povm", raw},
                 {"raw_min_eigenvalues", min_eig},
                 {"lambda", fixed.lambda},
                 {"p", fixed.p},
                 {"margin", a.margin},
                 {"completeness_residual", residual},
                 {"closest_bell", bell},
                 {"povm", fixed.povm}};
  emit(a.out, doc);
  return 0;
}

// --- quasidist ------------------------------------------------------------------

struct QuasidistArgs {
  std::string povm;
  std::string counts;
  std::string basis_map;
  double margin = 1e-5;
  std::string out;
};

int cmd_quasidist(const QuasidistArgs& a) {
  if (a.povm.empty() == a.counts.empty()) throw povm::InputError("give exactly one of --povm or --counts");
  Manifest m{"quasidist"};
  povm::PovmSet set;
  json correction = nullptr;
  if (!a.povm.empty()) {
    set = load_povm(a.povm);
    m.inputs["povm"] = a.povm;
  } else {
    const auto counts = povm::io::read_counts(a.counts, load_basis_map(a.basis_map));
    const auto fixed = povm::physicality_correct(povm::reconstruct_povm(povm::relative_frequencies(counts)), a.margin);
    set = fixed.povm;
    correction = json{{"lambda", fixed.lambda}, {"p", fixed.p}};
    m.inputs["counts"] = a.counts;
    if (!a.basis_map.empty()) m.inputs["basis_map"] = a.basis_map;
    m.config["margin"] = a.margin;
  }
  const povm::StandardFormOptions opts;
  m.config["standard_form"] = json{{"iteration_target", opts.iteration_target},
                                   {"residual_tolerance", opts.residual_tolerance},
                                   {"max_iterations", opts.max_iterations}};
  ensure_directory(a.out);

  json summary = json::array();
  int failures = 0;
  for (std::size_t k = 0; k < set.size(); ++k) {
    const std::string& label = set.labels()[k];
    const std::string stem = file_stem(label);
    try {
      const auto sf = povm::to_standard_form(set[k], opts);
      const auto qd = povm::optimal_quasidistribution(sf);
      const auto tilde = povm::back_transform(sf, qd);
      const auto report = povm::negativity_report(qd);
      const json doc{{"manifest", m.to_json()},
                     {"label", label},
                     {"standard_form", sf},
                     {"quasidistribution", qd},
                     {"local_states", tilde},
                     {"report", report}};
      povm::io::write_text((fs::path(a.out) / (stem + ".json")).string(), povm::io::dump(doc));
      povm::io::write_text((fs::path(a.out) / (stem + ".svg")).string(),
                           povm::io::quasidistribution_svg("Quasidistribution of element " + label, qd.grid, {},
                                                           &tilde));
      summary.push_back(json{{"label", label}, {"status", "ok"}, {"file", stem + ".json"}, {"report", report}});
    } catch (const povm::NumericError& e) {
      ++failures;
      std::cerr << "element " << label << ": " << e.what() << "\n";
      summary.push_back(json{{"label", label}, {"status", "failed"}, {"error", e.what()}});
    }
  }
  json doc{{"manifest", m.to_json()}, {"elements", summary}};
  if (!correction.is_null()) doc["correction"] = correction;
  povm::io::write_text((fs::path(a.out) / "summary.json").string(), povm::io::dump(doc));
  return failures == static_cast<int>(set.size()) ? 3 : 0;
}

// --- errors ---------------------------------------------------------------------

struct ErrorsArgs {
  std::string counts;
  std::string basis_map;
  int samples = 10000;
  double inflation = 1.05;
  double margin = 1e-5;
  int workers = 1;
  std::optional<std::uint64_t> seed;
  std::string out;
};

int cmd_errors(const ErrorsArgs& a) {
  const auto counts = povm::io::read_counts(a.counts, load_basis_map(a.basis_map));
  povm::McConfig cfg;
  cfg.sample_size = a.samples;
  cfg.inflation = a.inflation;
  cfg.margin = a.margin;
  cfg.workers = a.workers;
  cfg.seed = resolve_seed(a.seed, cfg.seed);
  const auto report = povm::propagate(counts, cfg);

  Manifest m{"errors"};
  m.inputs["counts"] = a.counts;
  if (!a.basis_map.empty()) m.inputs["basis_map"] = a.basis_map;
  m.config = cfg;
  m.seed = cfg.seed;
  ensure_directory(a.out);

  json doc = report;
  doc["manifest"] = m.to_json();
  povm::io::write_text((fs::path(a.out) / "errors.json").string(), povm::io::dump(doc));
  for (const auto& e : report.elements)
    povm::io::write_text((fs::path(a.out) / (file_stem(e.label) + ".svg")).string(),
                         povm::io::quasidistribution_svg("Quasidistribution of element " + e.label + " (1 sigma bars)",
                                                         e.reference.grid, e.std));
  return 0;
}

// --- witness --------------------------------------------------------------------

struct WitnessArgs {
  std::string family;
  std::optional<int> n;
  std::optional<int> d;
  std::optional<double> eps;
  bool lambda = false;
  bool numeric = false;
  std::string povm;
  std::string input;
  int restarts = 64;
  int workers = 1;
  std::optional<std::uint64_t> seed;
  std::string out;
};

int cmd_witness(WitnessArgs a) {
  Manifest m{"witness"};
  if (!a.input.empty()) {
    const json spec = povm::io::read_json(a.input);
    a.family = povm::io::field_or<std::string>(spec, "family", a.family);
    if (spec.contains("n")) a.n = povm::io::field<int>(spec, "n");
    if (spec.contains("d")) a.d = povm::io::field<int>(spec, "d");
    if (spec.contains("eps")) a.eps = povm::io::field<double>(spec, "eps");
    m.inputs["spec"] = a.input;
  }

  povm::SeparabilityOptions numeric;
  numeric.restarts = a.restarts;
  numeric.workers = a.workers;
  numeric.seed = resolve_seed(a.seed, numeric.seed);
  const json numeric_config{{"restarts", numeric.restarts},
                            {"tolerance", numeric.tolerance},
                            {"max_sweeps", numeric.max_sweeps}};

  if (a.lambda) {
    const int n = a.n.value_or(2), d = a.d.value_or(2);
    const auto l = povm::lambda_operator(n, d);
    const auto eig = povm::hermitian_eigenvalues(l.matrix());
    m.config = json{{"n", n}, {"d", d}};
    json doc{{"n", n},
             {"d", d},
             {"analytic_gmax", povm::lambda_gmax_analytic(n, d)},
             {"spectrum", {{"min", eig.minCoeff()}, {"max", eig.maxCoeff()}}}};
    if (a.numeric) {
      const auto r = povm::separability_eigenvalue_numeric(l, numeric);
      m.config["numeric"] = numeric_config;
      m.seed = numeric.seed;
      doc["numeric"] = json{{"gmax", r.gmax}, {"converged_restarts", r.converged_restarts}, {"restarts", r.restarts}};
    }
    doc["manifest"] = m.to_json();
    emit(a.out, doc);
    return 0;
  }

  if (a.family != "ghz" && a.family != "me")
    throw povm::InputError("--family must be 'ghz' or 'me' (or use --lambda)");
  const bool ghz = a.family == "ghz";
  const int size = ghz ? a.n.value_or(2) : a.d.value_or(2);
  const povm::ProbeState probe = ghz ? povm::ghz_probe(size) : povm::me_probe(size);
  const double threshold = ghz ? povm::ghz_noise_threshold(size) : povm::me_noise_threshold(size);
  m.config = json{{"family", a.family}, {ghz ? "n" : "d", size}};

  json doc{{"family", a.family}, {ghz ? "n" : "d", size}, {"noise_threshold", threshold}};
  if (!a.povm.empty()) {
    const auto set = load_povm(a.povm);
    m.inputs["povm"] = a.povm;
    json results = json::object();
    for (std::size_t k = 0; k < set.size(); ++k) results[set.labels()[k]] = povm::witness_evaluate(set[k], probe);
    doc["elements"] = results;
  } else {
    if (!a.eps) throw povm::InputError("--eps is required unless --povm or --lambda is given");
    const auto element = ghz ? povm::noisy_ghz_element(size, *a.eps) : povm::noisy_me_element(size, *a.eps);
    m.config["eps"] = *a.eps;
    doc["eps"] = *a.eps;
    doc["result"] = povm::witness_evaluate(element, probe);
  }
  doc["manifest"] = m.to_json();
  emit(a.out, doc);
  return 0;
}

// --- combine --------------------------------------------------------------------

struct CombineArgs {
  std::string counts;
  std::string groups;
  std::string basis_map;
  std::string out;
};

int cmd_combine(const CombineArgs& a) {
  const auto counts = povm::io::read_counts(a.counts, load_basis_map(a.basis_map));
  const auto merged = povm::combine_outcomes(counts, povm::parse_groups(a.groups));
  Manifest m{"combine"};
  m.inputs["counts"] = a.counts;
  if (!a.basis_map.empty()) m.inputs["basis_map"] = a.basis_map;
  m.config = json{{"groups", a.groups}};
  write_counts_with_manifest(a.out, merged, m);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Detector tomography, standard forms and entanglement quasidistributions of two-qubit POVMs"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Draw synthetic coincidence counts from a detector model");
  s->add_option("--povm", sim.povm, "POVM: 'bell' or a JSON file")->capture_default_str();
  s->add_option("--model", sim.model, "Model spec JSON {povm, eps, counts_per_setting, seed}");
  s->add_option("--counts", sim.counts, "Counts per probe setting (default 10000)");
  s->add_option("--eps", sim.eps, "White-noise weight in [0, 1]");
  s->add_option("--perturbation", sim.perturbation, "Weight of random frequency perturbation in [0, 1]");
  s->add_option("--seed", sim.seed, "Random seed (falls back to POVM_ENTANGLE_SEED)");
  s->add_option("--basis-map", sim.basis_map, "Basis map override JSON");
  s->add_option("-o,--out", sim.out, "Output counts file (.csv or .json)")->required();

  ReconstructArgs rec;
  auto* r = app.add_subcommand("reconstruct", "Reconstruct the POVM from coincidence counts");
  r->add_option("--counts", rec.counts, "Counts file (.csv or .json)")->required();
  r->add_option("--basis-map", rec.basis_map, "Basis map override JSON");
  r->add_option("--margin", rec.margin, "Extra noise margin added to the negativity")->capture_default_str();
  r->add_option("-o,--out", rec.out, "Output JSON (stdout if omitted)");

  QuasidistArgs qd;
  auto* q = app.add_subcommand("quasidist", "Standard forms and quasidistributions per POVM element");
  q->add_option("--povm", qd.povm, "POVM: 'bell', a POVM JSON or a reconstruct output");
  q->add_option("--counts", qd.counts, "Counts file; reconstructs and corrects first");
  q->add_option("--basis-map", qd.basis_map, "Basis map override JSON");
  q->add_option("--margin", qd.margin, "Noise margin for --counts input")->capture_default_str();
  q->add_option("-o,--out", qd.out, "Output directory")->required();

  ErrorsArgs err;
  auto* e = app.add_subcommand("errors", "Monte Carlo uncertainties of the quasidistributions");
  e->add_option("--counts", err.counts, "Counts file (.csv or .json)")->required();
  e->add_option("--basis-map", err.basis_map, "Basis map override JSON");
  e->add_option("--samples", err.samples, "Monte Carlo sample size")->capture_default_str();
  e->add_option("--inflation", err.inflation, "Factor on the standard deviations")->capture_default_str();
  e->add_option("--margin", err.margin, "Noise margin of the physicality correction")->capture_default_str();
  e->add_option("--workers", err.workers, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  e->add_option("--seed", err.seed, "Random seed (falls back to POVM_ENTANGLE_SEED)");
  e->add_option("-o,--out", err.out, "Output directory")->required();

  WitnessArgs wit;
  auto* w = app.add_subcommand("witness", "Entanglement test with GHZ or maximally entangled probe states");
  w->add_option("--family", wit.family, "Probe family: ghz or me");
  w->add_option("-n", wit.n, "Number of parties (ghz, lambda)");
  w->add_option("-d", wit.d, "Local dimension (me, lambda)");
  w->add_option("--eps", wit.eps, "Noise weight of the test element");
  w->add_flag("--lambda", wit.lambda, "Report the separability eigenvalue of the correlation operator");
  w->add_flag("--numeric", wit.numeric, "Also compute the separability eigenvalue numerically");
  w->add_option("--povm", wit.povm, "Apply the probe to every element of this POVM");
  w->add_option("--input", wit.input, "JSON spec {family, n, d, eps}");
  w->add_option("--restarts", wit.restarts, "Random restarts of the numeric solver")->capture_default_str();
  w->add_option("--workers", wit.workers, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  w->add_option("--seed", wit.seed, "Seed of the numeric solver (falls back to POVM_ENTANGLE_SEED)");
  w->add_option("-o,--out", wit.out, "Output JSON (stdout if omitted)");

  CombineArgs com;
  auto* c = app.add_subcommand("combine", "Merge outcomes into coarser POVM elements");
  c->add_option("--counts", com.counts, "Counts file (.csv or .json)")->required();
  c->add_option("--groups", com.groups, "Partition of the outcomes, e.g. \"AA+AD,DA+DD\"")->required();
  c->add_option("--basis-map", com.basis_map, "Basis map override JSON");
  c->add_option("-o,--out", com.out, "Output counts file (.csv or .json)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& ok) {
    return app.exit(ok);
  } catch (const CLI::ParseError& pe) {
    app.exit(pe);
    return 1;
  }

  try {
    if (*s) return cmd_simulate(sim);
    if (*r) return cmd_reconstruct(rec);
    if (*q) return cmd_quasidist(qd);
    if (*e) return cmd_errors(err);
    if (*w) return cmd_witness(wit);
    if (*c) return cmd_combine(com);
  } catch (const povm::InputError& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  } catch (const povm::ConvergenceError& ex) {
    std::cerr << "numeric failure: " << ex.what() << " (residual " << ex.residual() << ")\n";
    return 3;
  } catch (const povm::NumericError& ex) {
    std::cerr << "numeric failure: " << ex.what() << "\n";
    return 3;
  } catch (const json::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }
  return 1;
}
