#include "bidd/dgp/io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "../common/text.hpp"
#include "bidd/error.hpp"

namespace bidd {

using nlohmann::json;

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

void write_pair_csv(const PairDataset& data, std::ostream& out) {
  data.validate();
  out << "a,b\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    out << format_double(data.a[i]) << ',' << format_double(data.b[i]) << '\n';
  }
}

void write_pair_csv(const PairDataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open '" + path + "' for writing");
  write_pair_csv(data, out);
}

PairDataset read_pair_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || detail::trim(line) != "a,b") {
    throw FormatError("pair CSV must start with the header 'a,b'");
  }
  PairDataset out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view row = detail::trim(line);
    if (row.empty()) continue;
    const auto comma = row.find(',');
    if (comma == std::string_view::npos) {
      throw FormatError("pair CSV line " + std::to_string(lineno) + ": expected two values");
    }
    double a = 0.0, b = 0.0;
    const auto fa = row.substr(0, comma);
    const auto fb = row.substr(comma + 1);
    auto ra = std::from_chars(fa.data(), fa.data() + fa.size(), a);
    auto rb = std::from_chars(fb.data(), fb.data() + fb.size(), b);
    if (ra.ec != std::errc{} || rb.ec != std::errc{} || ra.ptr != fa.data() + fa.size() ||
        rb.ptr != fb.data() + fb.size()) {
      throw FormatError("pair CSV line " + std::to_string(lineno) + ": unparsable number");
    }
    out.a.push_back(a);
    out.b.push_back(b);
  }
  return out;
}

json to_json(const MechanismSpec& m) {
  json j;
  j["kind"] = std::string(to_string(m.kind));
  switch (m.kind) {
    case MechanismKind::Linear:
      j["slope"] = m.slope;
      j["offset"] = m.offset;
      break;
    case MechanismKind::Quadratic: break;
    case MechanismKind::Tanh: j["offset"] = m.offset; break;
    case MechanismKind::NeuralNet:
      j["w_in"] = m.w_in;
      j["b_h"] = m.b_h;
      j["w_out"] = m.w_out;
      break;
  }
  return j;
}

MechanismSpec mechanism_from_json(const json& j) {
  try {
    MechanismSpec m;
    m.kind = parse_mechanism_kind(j.at("kind").get<std::string>());
    switch (m.kind) {
      case MechanismKind::Linear:
        m.slope = j.at("slope").get<double>();
        m.offset = j.at("offset").get<double>();
        break;
      case MechanismKind::Quadratic: m.slope = 0.0; break;
      case MechanismKind::Tanh:
        m.slope = 0.0;
        m.offset = j.at("offset").get<double>();
        break;
      case MechanismKind::NeuralNet:
        m.slope = 0.0;
        m.w_in = j.at("w_in").get<std::vector<double>>();
        m.b_h = j.at("b_h").get<std::vector<double>>();
        m.w_out = j.at("w_out").get<std::vector<double>>();
        break;
    }
    m.validate();
    return m;
  } catch (const json::exception& e) {
    throw FormatError(std::string("mechanism JSON: ") + e.what());
  }
}

json to_json(const DGPSpec& spec) {
  json j;
  j["mediators"] = spec.mediators;
  j["noise"] = std::string(to_string(spec.noise));
  j["cause_variance"] = spec.cause_variance;
  j["mediator_noise_variance"] = spec.mediator_noise_variance;
  j["effect_noise_variance"] = spec.effect_noise_variance;
  j["n"] = spec.n;
  j["seed"] = spec.seed;
  j["mechanisms"] = json::array();
  for (const auto& m : spec.mechanisms) j["mechanisms"].push_back(to_json(m));
  return j;
}

DGPSpec dgp_spec_from_json(const json& j) {
  try {
    const auto mediators = j.value("mediators", std::size_t{0});
    const auto noise = parse_noise_family(j.value("noise", std::string("gaussian")));
    const auto n = j.value("n", std::size_t{1000});
    const auto seed = j.value("seed", std::uint64_t{0});
    DGPSpec spec;
    if (j.contains("mechanisms")) {
      spec.mediators = mediators;
      spec.noise = noise;
      spec.n = n;
      spec.seed = seed;
      for (const auto& m : j.at("mechanisms")) spec.mechanisms.push_back(mechanism_from_json(m));
    } else {
      const auto kind = parse_mechanism_kind(j.at("mechanism").get<std::string>());
      spec = make_dgp_spec(kind, noise, mediators, n, seed, j.value("hidden", std::size_t{16}));
    }
    spec.cause_variance = j.value("cause_variance", 1.0);
    spec.mediator_noise_variance = j.value("mediator_noise_variance", 0.5);
    spec.effect_noise_variance = j.value("effect_noise_variance", 1.0);
    spec.validate();
    return spec;
  } catch (const json::exception& e) {
    throw FormatError(std::string("DGP spec JSON: ") + e.what());
  }
}

}  // namespace bidd
