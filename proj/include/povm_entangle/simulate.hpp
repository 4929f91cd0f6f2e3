#pragma once

#include "povm_entangle/tomography.hpp"

#include <cstdint>
#include <random>

namespace povm {

/// Ideal Bell measurement with detector outcome labels: AA, AD, DA, DD project
/// onto the Bell states 0, x, z, y respectively.
inline PovmSet bell_detector_povm() {
  const PovmSet bell = bell_povm();
  return PovmSet({"AA", "AD", "DA", "DD"}, {bell.at("0"), bell.at("x"), bell.at("z"), bell.at("y")});
}

/// Synthetic detector for tomography runs.
struct DetectorModel {
  PovmSet povm = bell_detector_povm();
  /// White-noise weight: each element becomes eps 1 + (1 - eps) Pi_k, rescaled
  /// so the set stays complete.
  double eps = 0.0;
  std::int64_t counts_per_setting = 10000;
  BasisMap basis_map = BasisMap::standard();
  /// Weight m of an additive zero-sum frequency perturbation
  /// p -> (1 - m) p + m r with r a random point of the simplex per probe pair.
  /// Breaks Born-rule consistency so the reconstruction becomes indefinite.
  double perturbation = 0.0;
  std::uint64_t perturbation_seed = 1;

  void validate() const {
    require_noise_fraction(eps);
    if (!povm[0].is_two_qubit()) throw InputError("detector model needs a two-qubit POVM");
    if (counts_per_setting < 1) throw InputError("counts per setting must be at least 1");
    if (!(perturbation >= 0.0 && perturbation <= 1.0)) throw InputError("perturbation weight must lie in [0, 1]");
    basis_map.validate();
  }
};

inline PovmSet noisy_povm(const PovmSet& povm, double eps) {
  require_noise_fraction(eps);
  if (eps == 0.0) return povm;
  const auto dim = povm[0].dim();
  const double norm = eps * static_cast<double>(povm.size()) + (1.0 - eps);
  std::vector<HermitianOperator> out;
  for (const auto& e : povm.elements())
    out.push_back(HermitianOperator::hermitized(
        (eps * CMatrix::Identity(dim, dim) + (1.0 - eps) * e.matrix()) / norm, e.parties()));
  return PovmSet(povm.labels(), std::move(out));
}

inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return std::mt19937_64(seq);
}

/// Born-rule frequencies p_k(a,b) = <a,b|Pi_k|a,b> of the model, with the
/// probe states taken from the basis map.
inline RelativeFrequencies expected_frequencies(const DetectorModel& model) {
  model.validate();
  const PovmSet povm = noisy_povm(model.povm, model.eps);
  const std::size_t K = povm.size();
  RelativeFrequencies f;
  f.outcomes = povm.labels();
  f.basis_map = model.basis_map;
  f.probs.assign(K * kProbePairs, 0.0);
  f.totals.assign(kProbePairs, model.counts_per_setting);
  for (int pair = 0; pair < kProbePairs; ++pair) {
    const CVector psi = kron(CVector(model.basis_map.alice_state(static_cast<Polarization>(pair / 6))),
                             CVector(model.basis_map.bob_state(static_cast<Polarization>(pair % 6))));
    double sum = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      double p = psi.dot(povm[k].matrix() * psi).real();
      if (p < -1e-12) throw InputError("POVM element " + povm.labels()[k] + " gives a negative probability");
      p = std::max(p, 0.0);
      f.at(pair, k) = p;
      sum += p;
    }
    for (std::size_t k = 0; k < K; ++k) f.at(pair, k) /= sum;
  }
  if (model.perturbation > 0.0) {
    for (int pair = 0; pair < kProbePairs; ++pair) {
      auto rng = substream(model.perturbation_seed, static_cast<std::uint64_t>(pair), 0x9e37);
      std::exponential_distribution<double> expo(1.0);
      std::vector<double> r(K);
      double total = 0.0;
      for (auto& v : r) total += (v = expo(rng));
      for (std::size_t k = 0; k < K; ++k)
        f.at(pair, k) = (1.0 - model.perturbation) * f.at(pair, k) + model.perturbation * r[k] / total;
    }
  }
  return f;
}

/// One multinomial draw of the configured total per probe pair, from
/// per-pair random substreams.
inline CoincidenceCounts draw_counts(const DetectorModel& model, std::uint64_t seed) {
  const RelativeFrequencies f = expected_frequencies(model);
  const std::size_t K = f.num_outcomes();
  std::vector<std::int64_t> counts(K * kProbePairs, 0);
  for (int pair = 0; pair < kProbePairs; ++pair) {
    auto rng = substream(seed, static_cast<std::uint64_t>(pair));
    std::int64_t remaining = model.counts_per_setting;
    double mass = 1.0;
    for (std::size_t k = 0; k < K; ++k) {
      std::int64_t c = remaining;
      if (k + 1 < K) {
        const double prob = mass > 0 ? std::clamp(f.at(pair, k) / mass, 0.0, 1.0) : 0.0;
        c = std::binomial_distribution<std::int64_t>(remaining, prob)(rng);
      }
      counts[pair * K + k] = c;
      remaining -= c;
      mass -= f.at(pair, k);
    }
  }
  return CoincidenceCounts(f.outcomes, std::move(counts), f.basis_map);
}

}  // namespace povm
