#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "bidd/dgp/mechanism.hpp"
#include "bidd/dgp/pair_dataset.hpp"

namespace bidd {

enum class NoiseFamily { Gaussian, Uniform };

std::string_view to_string(NoiseFamily f);
NoiseFamily parse_noise_family(std::string_view text);

/// Chain X -> Z_1 -> ... -> Z_T -> Y with additive noise at every node.
/// mechanisms[j] maps Z_j to Z_{j+1} (Z_0 = X, Z_{T+1} = Y).
struct DGPSpec {
  std::size_t mediators = 0;
  NoiseFamily noise = NoiseFamily::Gaussian;
  double cause_variance = 1.0;
  double mediator_noise_variance = 0.5;
  double effect_noise_variance = 1.0;
  std::vector<MechanismSpec> mechanisms;
  std::size_t n = 1000;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Spec whose mechanisms all have `kind`, each edge with freshly drawn parameters
/// from the seed's mechanism stream.
DGPSpec make_dgp_spec(MechanismKind kind, NoiseFamily noise, std::size_t mediators,
                      std::size_t n, std::uint64_t seed, std::size_t hidden = 16);

/// Samples (X, Y) without standardization; mediators are discarded.
PairDataset generate_raw(const DGPSpec& spec);

/// generate_raw followed by per-column standardization. truth = AtoB.
PairDataset generate(const DGPSpec& spec);

}  // namespace bidd
