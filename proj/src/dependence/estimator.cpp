#include "bidd/dependence/estimator.hpp"

#include <charconv>
#include <sstream>

#include "../common/text.hpp"
#include "bidd/error.hpp"

namespace bidd {

Estimator Estimator::make_hsic(double bandwidth_scale) {
  Estimator e;
  e.kind = Kind::Hsic;
  e.hsic.bandwidth_scale = bandwidth_scale;
  return e;
}

Estimator Estimator::make_ksg(std::size_t k) {
  Estimator e;
  e.kind = Kind::Ksg;
  e.ksg.k = k;
  return e;
}

std::string Estimator::family() const { return kind == Kind::Hsic ? "hsic" : "ksg"; }

std::string Estimator::name() const {
  std::ostringstream os;
  if (kind == Kind::Hsic) {
    os << "hsic";
    if (hsic.bandwidth_scale != 1.0) os << "(scale=" << hsic.bandwidth_scale << ')';
  } else {
    os << "ksg(k=" << ksg.k << ')';
  }
  return os.str();
}

void Estimator::validate() const {
  if (kind == Kind::Hsic) {
    hsic.validate();
  } else {
    ksg.validate();
  }
}

double Estimator::operator()(std::span<const double> x, std::span<const double> y) const {
  return kind == Kind::Hsic ? bidd::hsic(x, y, hsic) : ksg_mi(x, y, ksg);
}

Estimator parse_estimator(const std::string& text) {
  const std::string t = detail::lower(detail::trim(text));
  const auto colon = t.find(':');
  const std::string family = t.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : t.substr(colon + 1);
  if (family == "hsic") {
    if (arg.empty()) return Estimator::make_hsic();
    double scale = 0.0;
    const auto r = std::from_chars(arg.data(), arg.data() + arg.size(), scale);
    if (r.ec != std::errc() || r.ptr != arg.data() + arg.size()) {
      throw ConfigError("bad hsic bandwidth scale '" + arg + "'");
    }
    Estimator e = Estimator::make_hsic(scale);
    e.validate();
    return e;
  }
  if (family == "ksg") {
    if (arg.empty()) return Estimator::make_ksg();
    std::size_t k = 0;
    const auto r = std::from_chars(arg.data(), arg.data() + arg.size(), k);
    if (r.ec != std::errc() || r.ptr != arg.data() + arg.size()) {
      throw ConfigError("bad ksg neighbour count '" + arg + "'");
    }
    Estimator e = Estimator::make_ksg(k);
    e.validate();
    return e;
  }
  throw ConfigError("unknown estimator '" + text + "' (expected hsic or ksg)");
}

}  // namespace bidd
