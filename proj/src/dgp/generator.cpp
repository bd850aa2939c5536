#include "bidd/dgp/generator.hpp"

#include <cmath>
#include <string>

#include "../common/text.hpp"
#include "bidd/error.hpp"
#include "bidd/numerics/sampling.hpp"

namespace bidd {

namespace {

// Stream ids: 0 cause, j for the noise of mediator j, T + 1 effect noise.
constexpr std::uint64_t kMechanismStream = 0x6d656368ULL;

std::vector<double> draw_noise(Rng& rng, NoiseFamily family, double variance, std::size_t n) {
  return family == NoiseFamily::Gaussian ? sample_gaussian(rng, 0.0, variance, n)
                                         : sample_uniform_centered(rng, variance, n);
}

}  // namespace

std::string_view to_string(NoiseFamily f) {
  return f == NoiseFamily::Gaussian ? "gaussian" : "uniform";
}

NoiseFamily parse_noise_family(std::string_view text) {
  const std::string s = detail::lower(text);
  if (s == "gaussian" || s == "gauss" || s == "normal") return NoiseFamily::Gaussian;
  if (s == "uniform" || s == "unif") return NoiseFamily::Uniform;
  throw ConfigError("unknown noise family '" + std::string(text) + "'");
}

void DGPSpec::validate() const {
  if (mechanisms.size() != mediators + 1) {
    throw ConfigError("DGP spec with " + std::to_string(mediators) + " mediators needs " +
                      std::to_string(mediators + 1) + " mechanisms, got " +
                      std::to_string(mechanisms.size()));
  }
  for (double v : {cause_variance, mediator_noise_variance, effect_noise_variance}) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("DGP variances must be positive");
  }
  if (n < 2) throw ConfigError("DGP sample count must be >= 2");
  for (const auto& m : mechanisms) m.validate();
}

DGPSpec make_dgp_spec(MechanismKind kind, NoiseFamily noise, std::size_t mediators,
                      std::size_t n, std::uint64_t seed, std::size_t hidden) {
  DGPSpec spec;
  spec.mediators = mediators;
  spec.noise = noise;
  spec.n = n;
  spec.seed = seed;
  Rng rng = Rng::derive(seed, kMechanismStream);
  for (std::size_t j = 0; j <= mediators; ++j) {
    spec.mechanisms.push_back(random_mechanism(rng, kind, hidden));
  }
  return spec;
}

PairDataset generate_raw(const DGPSpec& spec) {
  spec.validate();
  const std::size_t n = spec.n;
  Rng cause_rng = Rng::derive(spec.seed, 0);
  std::vector<double> x = draw_noise(cause_rng, spec.noise, spec.cause_variance, n);

  std::vector<double> z = x;
  for (std::size_t j = 1; j <= spec.mediators + 1; ++j) {
    const bool effect = j == spec.mediators + 1;
    Rng noise_rng = Rng::derive(spec.seed, j);
    const auto eps = draw_noise(noise_rng, spec.noise,
                                effect ? spec.effect_noise_variance : spec.mediator_noise_variance, n);
    const MechanismSpec& f = spec.mechanisms[j - 1];
    for (std::size_t i = 0; i < n; ++i) z[i] = apply_mechanism(f, z[i]) + eps[i];
  }

  PairDataset out;
  out.a = std::move(x);
  out.b = std::move(z);
  out.truth = Direction::AtoB;
  out.standardized = false;
  out.provenance = "dgp:" + std::string(to_string(spec.mechanisms.front().kind)) + "/" +
                   std::string(to_string(spec.noise)) + "/T=" + std::to_string(spec.mediators) +
                   "/seed=" + std::to_string(spec.seed);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(out.b[i])) throw NumericError("DGP produced a non-finite effect value");
  }
  return out;
}

PairDataset generate(const DGPSpec& spec) {
  PairDataset out = generate_raw(spec);
  standardize(out);
  return out;
}

}  // namespace bidd
