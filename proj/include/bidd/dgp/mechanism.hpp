#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "bidd/numerics/rng.hpp"

namespace bidd {

enum class MechanismKind { Linear, Quadratic, Tanh, NeuralNet };

std::string_view to_string(MechanismKind kind);
MechanismKind parse_mechanism_kind(std::string_view text);

/// One noise-free link function f of the mediator chain.
///   Linear:    slope * x + offset
///   Quadratic: x^2
///   Tanh:      tanh(x + offset)
///   NeuralNet: sum_h tanh(x * w_in[h] + b_h[h]) * w_out[h]
struct MechanismSpec {
  MechanismKind kind = MechanismKind::Linear;
  double slope = 1.0;
  double offset = 0.0;
  std::vector<double> w_in;
  std::vector<double> b_h;
  std::vector<double> w_out;

  static MechanismSpec linear(double slope, double offset);
  static MechanismSpec quadratic();
  static MechanismSpec tanh(double offset);

  /// Throws ConfigError on mismatched network vector sizes or non-finite parameters.
  void validate() const;
};

double apply_mechanism(const MechanismSpec& m, double x);

/// Parameters drawn as slope ~ U(-5, 5), offset ~ U(-3, 3) (Linear);
/// offset ~ U(-1, 1) (Tanh); all network weights ~ U(-5, 5) with `hidden` units.
MechanismSpec random_mechanism(Rng& rng, MechanismKind kind, std::size_t hidden = 16);

}  // namespace bidd
