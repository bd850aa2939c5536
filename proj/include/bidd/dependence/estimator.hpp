#pragma once

#include <span>
#include <string>

#include "bidd/dependence/hsic.hpp"
#include "bidd/dependence/ksg.hpp"

namespace bidd {

/// A dependence measure used as the mutual-information surrogate.
struct Estimator {
  enum class Kind { Hsic, Ksg };

  Kind kind = Kind::Hsic;
  HsicConfig hsic;
  KsgConfig ksg;

  static Estimator make_hsic(double bandwidth_scale = 1.0);
  static Estimator make_ksg(std::size_t k = 3);

  /// "hsic", "hsic(scale=0.5)", "ksg(k=3)", ...
  std::string name() const;
  /// "hsic" or "ksg"
  std::string family() const;
  void validate() const;
  double operator()(std::span<const double> x, std::span<const double> y) const;
};

/// Parses "hsic", "ksg", "hsic:0.5", "ksg:10".
Estimator parse_estimator(const std::string& text);

}  // namespace bidd
