#include "bidd/dgp/mechanism.hpp"

#include <cmath>
#include <string>

#include "../common/text.hpp"
#include "bidd/error.hpp"

namespace bidd {

std::string_view to_string(MechanismKind kind) {
  switch (kind) {
    case MechanismKind::Linear: return "linear";
    case MechanismKind::Quadratic: return "quadratic";
    case MechanismKind::Tanh: return "tanh";
    case MechanismKind::NeuralNet: return "nn";
  }
  return "?";
}

MechanismKind parse_mechanism_kind(std::string_view text) {
  const std::string s = detail::lower(text);
  if (s == "linear") return MechanismKind::Linear;
  if (s == "quadratic") return MechanismKind::Quadratic;
  if (s == "tanh") return MechanismKind::Tanh;
  if (s == "nn" || s == "neuralnet" || s == "neural_net") return MechanismKind::NeuralNet;
  throw ConfigError("unknown mechanism '" + std::string(text) + "'");
}

MechanismSpec MechanismSpec::linear(double slope, double offset) {
  MechanismSpec m;
  m.kind = MechanismKind::Linear;
  m.slope = slope;
  m.offset = offset;
  return m;
}

MechanismSpec MechanismSpec::quadratic() {
  MechanismSpec m;
  m.kind = MechanismKind::Quadratic;
  m.slope = 0.0;
  return m;
}

MechanismSpec MechanismSpec::tanh(double offset) {
  MechanismSpec m;
  m.kind = MechanismKind::Tanh;
  m.slope = 0.0;
  m.offset = offset;
  return m;
}

void MechanismSpec::validate() const {
  if (!std::isfinite(slope) || !std::isfinite(offset)) {
    throw ConfigError("mechanism parameters must be finite");
  }
  if (kind == MechanismKind::NeuralNet) {
    if (w_in.empty() || w_in.size() != b_h.size() || w_in.size() != w_out.size()) {
      throw ConfigError("neural-net mechanism needs equal, non-empty w_in/b_h/w_out");
    }
    for (const auto* v : {&w_in, &b_h, &w_out}) {
      for (double w : *v) {
        if (!std::isfinite(w)) throw ConfigError("neural-net weights must be finite");
      }
    }
  }
}

double apply_mechanism(const MechanismSpec& m, double x) {
  switch (m.kind) {
    case MechanismKind::Linear: return m.slope * x + m.offset;
    case MechanismKind::Quadratic: return x * x;
    case MechanismKind::Tanh: return std::tanh(x + m.offset);
    case MechanismKind::NeuralNet: {
      double s = 0.0;
      for (std::size_t h = 0; h < m.w_in.size(); ++h) {
        s += std::tanh(x * m.w_in[h] + m.b_h[h]) * m.w_out[h];
      }
      return s;
    }
  }
  return 0.0;
}

MechanismSpec random_mechanism(Rng& rng, MechanismKind kind, std::size_t hidden) {
  switch (kind) {
    case MechanismKind::Linear: {
      const double slope = rng.uniform(-5.0, 5.0);
      const double offset = rng.uniform(-3.0, 3.0);
      return MechanismSpec::linear(slope, offset);
    }
    case MechanismKind::Quadratic: return MechanismSpec::quadratic();
    case MechanismKind::Tanh: return MechanismSpec::tanh(rng.uniform(-1.0, 1.0));
    case MechanismKind::NeuralNet: {
      if (hidden == 0) throw ConfigError("neural-net mechanism needs hidden >= 1");
      MechanismSpec m;
      m.kind = MechanismKind::NeuralNet;
      m.slope = 0.0;
      m.w_in.resize(hidden);
      m.b_h.resize(hidden);
      m.w_out.resize(hidden);
      for (auto& w : m.w_in) w = rng.uniform(-5.0, 5.0);
      for (auto& w : m.b_h) w = rng.uniform(-5.0, 5.0);
      for (auto& w : m.w_out) w = rng.uniform(-5.0, 5.0);
      return m;
    }
  }
  throw ConfigError("unknown mechanism kind");
}

}  // namespace bidd
