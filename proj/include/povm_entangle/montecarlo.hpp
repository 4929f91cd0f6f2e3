#pragma once

#include "povm_entangle/parallel.hpp"
#include "povm_entangle/quasidist.hpp"
#include "povm_entangle/simulate.hpp"
#include "povm_entangle/tomography.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <tuple>

namespace povm {

struct McConfig {
  int sample_size = 10000;
  /// Multiplies the standard deviations (the Cholesky factor), not the covariance.
  double inflation = 1.05;
  std::uint64_t seed = 20230101;
  int workers = 1;
  double margin = 1e-5;
  /// Largest tolerated fraction of samples whose reconstruction fails.
  double max_excluded_fraction = 0.01;
  StandardFormOptions standard_form;

  void validate() const {
    if (sample_size < 2) throw InputError("Monte Carlo sample size must be at least 2");
    if (!(inflation > 0.0)) throw InputError("uncertainty inflation must be positive");
    if (workers < 1) throw InputError("worker count must be at least 1");
  }
};

/// Multinomial covariance of the frequency estimate from `total` counts:
/// (delta_kk' p_k - p_k p_k') / (total - 1).
inline Eigen::MatrixXd counting_covariance(const Eigen::VectorXd& p, std::int64_t total) {
  if (total < 2) throw InputError("covariance needs at least 2 counts");
  Eigen::MatrixXd s = Eigen::MatrixXd(p.asDiagonal()) - p * p.transpose();
  return s / static_cast<double>(total - 1);
}

/// Draws Gaussian frequency samples with mean p and covariance
/// inflation^2 Sigma per probe pair; sample i of pair j always comes from the
/// same random substream.
class FrequencySampler {
 public:
  FrequencySampler(RelativeFrequencies freqs, const McConfig& cfg) : freqs_(std::move(freqs)), cfg_(cfg) {
    cfg_.validate();
    const auto K = static_cast<Eigen::Index>(freqs_.num_outcomes());
    factors_.reserve(kProbePairs);
    for (int pair = 0; pair < kProbePairs; ++pair) {
      Eigen::VectorXd p(K);
      for (Eigen::Index k = 0; k < K; ++k) p(k) = freqs_.at(pair, k);
      // eigen-factor with eigenvalue floor 0: Sigma is singular (rows sum to 0)
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(counting_covariance(p, freqs_.totals[pair]));
      const Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
      factors_.push_back(es.eigenvectors() * root.asDiagonal());
    }
  }

  /// Gaussian draw before projection onto the simplex.
  RelativeFrequencies raw(std::size_t index) const {
    RelativeFrequencies out = freqs_;
    const auto K = static_cast<Eigen::Index>(freqs_.num_outcomes());
    for (int pair = 0; pair < kProbePairs; ++pair) {
      auto rng = substream(cfg_.seed, static_cast<std::uint64_t>(pair), index);
      std::normal_distribution<double> normal;
      Eigen::VectorXd z(K);
      for (Eigen::Index k = 0; k < K; ++k) z(k) = normal(rng);
      const Eigen::VectorXd delta = cfg_.inflation * (factors_[pair] * z);
      for (Eigen::Index k = 0; k < K; ++k) out.at(pair, k) += delta(k);
    }
    return out;
  }

  /// Draw clipped at zero and renormalized per probe pair.
  RelativeFrequencies sample(std::size_t index) const {
    RelativeFrequencies out = raw(index);
    const std::size_t K = out.num_outcomes();
    for (int pair = 0; pair < kProbePairs; ++pair) {
      double sum = 0.0;
      for (std::size_t k = 0; k < K; ++k) sum += (out.at(pair, k) = std::max(0.0, out.at(pair, k)));
      for (std::size_t k = 0; k < K; ++k) out.at(pair, k) /= sum;
    }
    return out;
  }

 private:
  RelativeFrequencies freqs_;
  McConfig cfg_;
  std::vector<Eigen::MatrixXd> factors_;
};

/// One POVM element taken through standard form to its quasidistribution.
struct ElementAnalysis {
  StandardForm standard_form;
  QuasiDistribution quasi;
};

struct PovmAnalysis {
  PhysicalityCorrection correction;
  std::vector<ElementAnalysis> elements;
};

/// Frequencies -> correlation matrices -> POVM -> white-noise correction ->
/// standard form -> optimal quasidistribution, for every element.
inline PovmAnalysis analyze_frequencies(const RelativeFrequencies& freqs, double margin,
                                        const StandardFormOptions& opts = {}) {
  PovmAnalysis out;
  out.correction = physicality_correct(reconstruct_povm(freqs), margin);
  for (const auto& e : out.correction.povm.elements()) {
    StandardForm sf = to_standard_form(e, opts);
    QuasiDistribution q = optimal_quasidistribution(sf);
    out.elements.push_back({std::move(sf), std::move(q)});
  }
  return out;
}

/// Relabelling of a grid: axis blocks permuted and, per axis, Bob's +/- labels
/// swapped (equivalent to flipping the sign of pi_w).
struct GridRelabel {
  std::array<int, 3> axis{0, 1, 2};  // block i of the result comes from block axis[i]
  std::array<bool, 3> swap{false, false, false};

  bool is_identity() const { return axis == std::array<int, 3>{0, 1, 2} && swap == std::array<bool, 3>{}; }

  QuasiGrid apply(const QuasiGrid& g) const {
    QuasiGrid out = QuasiGrid::Zero();
    for (int i = 0; i < 3; ++i)
      for (int sa = 0; sa < 2; ++sa)
        for (int sb = 0; sb < 2; ++sb) {
          const int src_b = swap[i] ? 1 - sb : sb;
          out(2 * i + sa, 2 * i + sb) = g(2 * axis[i] + sa, 2 * axis[i] + src_b);
        }
    return out;
  }
};

/// Relabelling of `sample` with the largest overlap with `reference`; the
/// identity wins ties.
inline GridRelabel best_relabel(const QuasiGrid& sample, const QuasiGrid& reference) {
  GridRelabel best;
  double best_overlap = sample.cwiseProduct(reference).sum();
  GridRelabel cand;
  do {
    for (int s = 0; s < 8; ++s) {
      for (int i = 0; i < 3; ++i) cand.swap[i] = (s >> i) & 1;
      if (cand.is_identity()) continue;
      const double ov = cand.apply(sample).cwiseProduct(reference).sum();
      if (ov > best_overlap + 1e-12) {
        best_overlap = ov;
        best = cand;
      }
    }
  } while (std::next_permutation(cand.axis.begin(), cand.axis.end()));
  return best;
}

struct ElementUncertainty {
  std::string label;
  QuasiDistribution reference;  // from the measured frequencies
  NegativityReport reference_report;
  QuasiGrid mean = QuasiGrid::Zero();          // sample mean, a diagnostic for estimator bias
  QuasiGrid std = QuasiGrid::Zero();
  QuasiGrid significance = QuasiGrid::Zero();  // -reference/std on negative entries, NaN elsewhere
  double q_mean = 0, q_std = 0;
  double max_negativity_mean = 0, max_negativity_std = 0;
  double cumulative_negativity_mean = 0, cumulative_negativity_std = 0;
  int relabelled_samples = 0;

  /// Largest significance over the grid (0 when no reference entry is negative).
  double peak_significance() const {
    double best = 0.0;
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j)
        if (std::isfinite(significance(i, j))) best = std::max(best, significance(i, j));
    return best;
  }
};

struct UncertaintyReport {
  McConfig config;
  double reference_p = 0.0;
  double reference_lambda = 0.0;
  std::vector<ElementUncertainty> elements;
  int samples_used = 0;
  int samples_excluded = 0;
};

namespace detail {

struct SampleOutcome {
  bool ok = false;
  std::vector<QuasiGrid> grids;
  std::vector<double> q;
};

/// Mean and sample standard deviation.
inline std::pair<double, double> moments(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

}  // namespace detail

/// Monte Carlo propagation of counting noise through the full reconstruction.
/// Values are the point estimates from the measured frequencies; the sample
/// supplies their standard deviations.
/// Samples that fail (e.g. filtering does not converge) are excluded and
/// counted; more than `max_excluded_fraction` of them is an error.
inline UncertaintyReport propagate(const CoincidenceCounts& counts, const McConfig& cfg) {
  cfg.validate();
  const RelativeFrequencies freqs = relative_frequencies(counts);
  const PovmAnalysis reference = analyze_frequencies(freqs, cfg.margin, cfg.standard_form);
  const std::size_t K = reference.elements.size();

  const FrequencySampler sampler(freqs, cfg);
  std::vector<detail::SampleOutcome> samples(cfg.sample_size);
  parallel_for(samples.size(), cfg.workers, [&](std::size_t i) {
    auto& out = samples[i];
    try {
      const PovmAnalysis a = analyze_frequencies(sampler.sample(i), cfg.margin, cfg.standard_form);
      for (const auto& e : a.elements) {
        out.grids.push_back(e.quasi.grid);
        out.q.push_back(e.quasi.q);
      }
      out.ok = true;
    } catch (const NumericError&) {
      out.ok = false;
    }
  });

  UncertaintyReport report;
  report.config = cfg;
  report.reference_p = reference.correction.p;
  report.reference_lambda = reference.correction.lambda;
  for (const auto& s : samples) (s.ok ? report.samples_used : report.samples_excluded) += 1;
  if (report.samples_excluded > cfg.max_excluded_fraction * cfg.sample_size)
    throw NumericError(std::to_string(report.samples_excluded) + " of " + std::to_string(cfg.sample_size) +
                       " Monte Carlo samples failed to reconstruct");
  if (report.samples_used < 2) throw NumericError("fewer than two usable Monte Carlo samples");

  for (std::size_t k = 0; k < K; ++k) {
    ElementUncertainty eu;
    eu.label = reference.correction.povm.labels()[k];
    eu.reference = reference.elements[k].quasi;
    std::array<std::vector<double>, 36> cell;
    std::vector<double> q, maxneg, cumneg;
    for (const auto& s : samples) {
      if (!s.ok) continue;
      const GridRelabel relabel = best_relabel(s.grids[k], eu.reference.grid);
      if (!relabel.is_identity()) ++eu.relabelled_samples;
      const QuasiGrid g = relabel.apply(s.grids[k]);
      for (int c = 0; c < 36; ++c) cell[c].push_back(g(c / 6, c % 6));
      q.push_back(s.q[k]);
      maxneg.push_back(std::min(0.0, g.minCoeff()));
      cumneg.push_back(g.unaryExpr([](double v) { return v < 0 ? v : 0.0; }).sum());
    }
    for (int c = 0; c < 36; ++c) {
      const int i = c / 6, j = c % 6;
      std::tie(eu.mean(i, j), eu.std(i, j)) = detail::moments(cell[c]);
    }
    eu.reference_report = negativity_report(eu.reference, eu.std);
    eu.significance = *eu.reference_report.significance;
    std::tie(eu.q_mean, eu.q_std) = detail::moments(q);
    std::tie(eu.max_negativity_mean, eu.max_negativity_std) = detail::moments(maxneg);
    std::tie(eu.cumulative_negativity_mean, eu.cumulative_negativity_std) = detail::moments(cumneg);
    report.elements.push_back(std::move(eu));
  }
  return report;
}

}  // namespace povm
