#pragma once

#include "povm_entangle/pauli.hpp"
#include "povm_entangle/reference.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <set>
#include <string_view>

namespace povm {

/// Probe polarizations, in the column order of the sampling matrices.
enum class Polarization : int { H = 0, V, D, A, R, L };

inline constexpr std::array<char, 6> kPolarizationNames{'H', 'V', 'D', 'A', 'R', 'L'};
inline constexpr std::array<const char*, 4> kDefaultOutcomes{"AA", "AD", "DA", "DD"};
inline constexpr int kProbePairs = 36;

inline Polarization parse_polarization(std::string_view s) {
  if (s.size() == 1) {
    const char c = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    for (int i = 0; i < 6; ++i)
      if (kPolarizationNames[i] == c) return static_cast<Polarization>(i);
  }
  throw InputError("unknown polarization label '" + std::string(s) + "' (expected one of H,V,D,A,R,L)");
}

inline std::string pair_name(int pair) {
  return std::string{kPolarizationNames[pair / 6], ',', kPolarizationNames[pair % 6]};
}

inline int pair_index(Polarization a, Polarization b) { return static_cast<int>(a) * 6 + static_cast<int>(b); }

/// Eigenstate |w_sign> of a Pauli matrix, axis in {1,2,3} = {x,y,z}.
struct PauliState {
  int axis = 3;
  int sign = 1;

  friend bool operator==(const PauliState&, const PauliState&) = default;

  std::string name() const { return std::string{"xyz"[axis - 1], sign > 0 ? '+' : '-'}; }
  Vec2c vector() const { return pauli_eigenstate(axis, sign); }

  static PauliState parse(std::string_view s) {
    if (s.size() == 2 && (s[1] == '+' || s[1] == '-')) {
      const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(s[0])));
      if (c == 'x' || c == 'y' || c == 'z') return {c - 'x' + 1, s[1] == '+' ? 1 : -1};
    }
    throw InputError("unknown Pauli eigenstate '" + std::string(s) + "' (expected e.g. z+)");
  }
};

/// Per-subsystem assignment of the six probe polarizations to Pauli eigenstates.
struct BasisMap {
  std::array<PauliState, 6> alice;
  std::array<PauliState, 6> bob;

  friend bool operator==(const BasisMap&, const BasisMap&) = default;

  /// Alice H/V, Bob D/A computational bases.
  static BasisMap standard() {
    // order H, V, D, A, R, L
    return BasisMap{{{{3, 1}, {3, -1}, {1, 1}, {1, -1}, {2, -1}, {2, 1}}},
                    {{{1, 1}, {1, -1}, {3, 1}, {3, -1}, {2, 1}, {2, -1}}}};
  }

  void validate() const {
    for (const auto* side : {&alice, &bob}) {
      std::set<std::pair<int, int>> seen;
      for (const auto& s : *side) {
        if (s.axis < 1 || s.axis > 3 || (s.sign != 1 && s.sign != -1))
          throw InputError("basis map contains an invalid Pauli eigenstate");
        seen.insert({s.axis, s.sign});
      }
      if (seen.size() != 6) throw InputError("basis map is not a bijection onto the six Pauli eigenstates");
    }
  }

  Vec2c alice_state(Polarization p) const { return alice[static_cast<int>(p)].vector(); }
  Vec2c bob_state(Polarization p) const { return bob[static_cast<int>(p)].vector(); }
};

/// Coincidence counts E_k(a,b) for every probe pair (a,b) and outcome k.
class CoincidenceCounts {
 public:
  CoincidenceCounts() = default;

  /// `counts` is indexed [pair * K + k] with pair = a * 6 + b.
  CoincidenceCounts(std::vector<std::string> outcomes, std::vector<std::int64_t> counts,
                    BasisMap map = BasisMap::standard())
      : outcomes_(std::move(outcomes)), counts_(std::move(counts)), map_(map) {
    map_.validate();
    if (outcomes_.empty()) throw InputError("counts need at least one outcome");
    if (std::set<std::string>(outcomes_.begin(), outcomes_.end()).size() != outcomes_.size())
      throw InputError("duplicate outcome labels");
    if (counts_.size() != outcomes_.size() * kProbePairs)
      throw InputError("counts must cover all 36 probe pairs for every outcome");
    for (auto c : counts_)
      if (c < 0) throw InputError("coincidence counts must be nonnegative");
  }

  const std::vector<std::string>& outcomes() const noexcept { return outcomes_; }
  std::size_t num_outcomes() const noexcept { return outcomes_.size(); }
  const BasisMap& basis_map() const noexcept { return map_; }
  const std::vector<std::int64_t>& raw() const noexcept { return counts_; }

  std::int64_t at(int pair, std::size_t k) const { return counts_[pair * outcomes_.size() + k]; }

  std::int64_t total(int pair) const {
    std::int64_t s = 0;
    for (std::size_t k = 0; k < outcomes_.size(); ++k) s += at(pair, k);
    return s;
  }

  friend bool operator==(const CoincidenceCounts&, const CoincidenceCounts&) = default;

 private:
  std::vector<std::string> outcomes_;
  std::vector<std::int64_t> counts_;
  BasisMap map_;
};

/// p_k(a,b) = E_k(a,b) / E(a,b), with the totals kept for covariance estimates.
struct RelativeFrequencies {
  std::vector<std::string> outcomes;
  std::vector<double> probs;  // [pair * K + k]
  std::vector<std::int64_t> totals;  // [pair]
  BasisMap basis_map = BasisMap::standard();

  std::size_t num_outcomes() const noexcept { return outcomes.size(); }
  double at(int pair, std::size_t k) const { return probs[pair * outcomes.size() + k]; }
  double& at(int pair, std::size_t k) { return probs[pair * outcomes.size() + k]; }

  /// 6x6 matrix P_k = [p_k(a,b)].
  Eigen::Matrix<double, 6, 6> matrix(std::size_t k) const {
    Eigen::Matrix<double, 6, 6> m;
    for (int pair = 0; pair < kProbePairs; ++pair) m(pair / 6, pair % 6) = at(pair, k);
    return m;
  }
};

inline RelativeFrequencies relative_frequencies(const CoincidenceCounts& counts) {
  RelativeFrequencies f;
  f.outcomes = counts.outcomes();
  f.basis_map = counts.basis_map();
  f.probs.resize(counts.raw().size());
  f.totals.resize(kProbePairs);
  const std::size_t K = counts.num_outcomes();
  for (int pair = 0; pair < kProbePairs; ++pair) {
    const std::int64_t total = counts.total(pair);
    if (total <= 0) throw InputError("probe pair (" + pair_name(pair) + ") has zero total counts");
    f.totals[pair] = total;
    for (std::size_t k = 0; k < K; ++k)
      f.at(pair, k) = static_cast<double>(counts.at(pair, k)) / static_cast<double>(total);
  }
  return f;
}

using SamplingMatrix = Eigen::Matrix<double, 4, 6>;

/// Row 0 resolves the identity with weight 1/3 on every probe; row w carries
/// +1 at the probe mapped to w+ and -1 at the probe mapped to w-.
inline std::pair<SamplingMatrix, SamplingMatrix> sampling_matrices(const BasisMap& map) {
  map.validate();
  auto build = [](const std::array<PauliState, 6>& side) {
    SamplingMatrix s = SamplingMatrix::Zero();
    s.row(0).setConstant(1.0 / 3.0);
    for (int col = 0; col < 6; ++col) s(side[col].axis, col) = side[col].sign;
    return s;
  };
  return {build(map.alice), build(map.bob)};
}

/// C_k = S_A P_k S_B^T / 4 for each outcome.
inline std::vector<PauliCorrelation> reconstruct_correlations(const RelativeFrequencies& freqs) {
  const auto [sa, sb] = sampling_matrices(freqs.basis_map);
  std::vector<PauliCorrelation> out(freqs.num_outcomes());
  for (std::size_t k = 0; k < out.size(); ++k) out[k].coeffs = 0.25 * sa * freqs.matrix(k) * sb.transpose();
  return out;
}

inline PovmSet reconstruct_povm(const RelativeFrequencies& freqs) {
  std::vector<HermitianOperator> elements;
  for (const auto& c : reconstruct_correlations(freqs)) elements.push_back(pauli_compose(c));
  return PovmSet(freqs.outcomes, std::move(elements));
}

struct PhysicalityCorrection {
  PovmSet povm;
  double p = 0.0;       // white-noise mixing probability
  double lambda = 0.0;  // largest negative eigenvalue magnitude, margin included
  double min_eigenvalue = 0.0;  // before correction, over all elements
};

/// Eigenvalues at or above -1e-12 count as nonnegative.
inline constexpr double kIndefinitenessThreshold = 1e-12;

/// Mixes every element with white noise, Pi_k -> (1-p) Pi_k + (p/K) 1 for K
/// outcomes, so that all elements become positive definite and their sum stays
/// the identity. p = lambda / (lambda + 1/K) where lambda is the largest
/// negative eigenvalue magnitude plus `margin`; nothing is mixed when no
/// element is indefinite.
inline PhysicalityCorrection physicality_correct(const PovmSet& povm, double margin = 1e-5) {
  if (povm.completeness_residual() > kCompletenessTolerance)
    throw InputError("physicality correction needs a complete POVM");
  PhysicalityCorrection out;
  out.min_eigenvalue = std::numeric_limits<double>::infinity();
  for (const auto& e : povm.elements()) out.min_eigenvalue = std::min(out.min_eigenvalue, min_eigenvalue(e));
  const double negative = std::max(0.0, -out.min_eigenvalue);
  if (negative <= kIndefinitenessThreshold) {
    out.povm = povm;
    return out;
  }
  const auto dim = povm[0].dim();
  const double white = 1.0 / static_cast<double>(povm.size());
  out.lambda = negative + margin;
  out.p = out.lambda / (out.lambda + white);
  std::vector<HermitianOperator> mixed;
  for (const auto& e : povm.elements())
    mixed.push_back(
        HermitianOperator::hermitized((1.0 - out.p) * e.matrix() + out.p * white * CMatrix::Identity(dim, dim),
                                      e.parties()));
  out.povm = PovmSet(povm.labels(), std::move(mixed));
  return out;
}

/// Splits "AA+AD,DA+DD" into groups of outcome labels (case-insensitive).
inline std::vector<std::vector<std::string>> parse_groups(std::string_view spec) {
  std::vector<std::vector<std::string>> groups(1);
  std::string token;
  auto flush = [&] {
    if (token.empty()) throw InputError("empty outcome label in grouping '" + std::string(spec) + "'");
    groups.back().push_back(token);
    token.clear();
  };
  for (char c : spec) {
    if (c == ',') {
      flush();
      groups.emplace_back();
    } else if (c == '+') {
      flush();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      token.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    }
  }
  flush();
  return groups;
}

/// Sums counts within each group. Groups must partition the outcome labels;
/// the merged outcome is labelled by joining its members with '+'.
inline CoincidenceCounts combine_outcomes(const CoincidenceCounts& counts,
                                          const std::vector<std::vector<std::string>>& groups) {
  const auto& labels = counts.outcomes();
  std::vector<int> owner(labels.size(), -1);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].empty()) throw InputError("empty outcome group");
    for (const auto& name : groups[g]) {
      auto it = std::find(labels.begin(), labels.end(), name);
      if (it == labels.end()) throw InputError("grouping names unknown outcome '" + name + "'");
      auto& o = owner[it - labels.begin()];
      if (o != -1) throw InputError("outcome '" + name + "' appears in more than one group");
      o = static_cast<int>(g);
    }
  }
  for (std::size_t k = 0; k < labels.size(); ++k)
    if (owner[k] == -1) throw InputError("grouping does not cover outcome '" + labels[k] + "'");

  std::vector<std::string> merged_labels;
  for (const auto& g : groups) {
    std::string name;
    for (const auto& member : g) name += (name.empty() ? "" : "+") + member;
    merged_labels.push_back(name);
  }
  std::vector<std::int64_t> merged(groups.size() * kProbePairs, 0);
  for (int pair = 0; pair < kProbePairs; ++pair)
    for (std::size_t k = 0; k < labels.size(); ++k) merged[pair * groups.size() + owner[k]] += counts.at(pair, k);
  return CoincidenceCounts(std::move(merged_labels), std::move(merged), counts.basis_map());
}

struct BellMatch {
  std::string label;
  double overlap = 0.0;  // tr(Pi Pi_w)
};

/// Ideal Bell projector with the largest Hilbert-Schmidt overlap.
inline BellMatch closest_bell(const HermitianOperator& op) {
  const PovmSet bell = bell_povm();
  BellMatch best{"", -std::numeric_limits<double>::infinity()};
  for (std::size_t w = 0; w < bell.size(); ++w) {
    const double ov = hs_inner(op, bell[w]);
    if (ov > best.overlap) best = {bell.labels()[w], ov};
  }
  return best;
}

}  // namespace povm
