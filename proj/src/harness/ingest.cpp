#include "bidd/harness/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>

#include "bidd/error.hpp"

namespace bidd {

namespace {

std::vector<std::string_view> tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  auto sep = [](char c) { return c == ',' || c == ';' || c == ' ' || c == '\t' || c == '\r'; };
  while (i < line.size()) {
    while (i < line.size() && sep(line[i])) ++i;
    std::size_t j = i;
    while (j < line.size() && !sep(line[j])) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::optional<double> parse_number(std::string_view tok) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec == std::errc::result_out_of_range) return tok.front() == '-' ? -HUGE_VAL : HUGE_VAL;
  if (ec != std::errc() || ptr != tok.data() + tok.size()) return std::nullopt;
  return v;
}

}  // namespace

RealPair ingest_pair_stream(std::istream& in, const std::string& name, std::size_t cap, Rng& rng) {
  if (cap < kMinIngestRows) throw ParameterError("row cap must be at least 50");
  RealPair pair;
  pair.name = name;
  std::vector<double> a, b;
  std::string line;
  std::size_t lineno = 0;
  bool seen_data = false;
  bool warned_columns = false;
  while (std::getline(in, line)) {
    ++lineno;
    const auto tok = tokens(line);
    if (tok.empty()) continue;
    std::vector<double> vals;
    vals.reserve(tok.size());
    bool ok = true;
    for (auto t : tok) {
      const auto v = parse_number(t);
      if (!v) {
        ok = false;
        break;
      }
      vals.push_back(*v);
    }
    if (!ok) {
      if (!seen_data && lineno == 1) continue;  // header
      throw IngestionError(name + ": unparsable value", lineno);
    }
    seen_data = true;
    if (vals.size() < 2) throw IngestionError(name + ": fewer than two columns", lineno);
    if (vals.size() > 2 && !warned_columns) {
      pair.warnings.push_back(name + ": " + std::to_string(vals.size()) +
                              " columns, using the first two");
      warned_columns = true;
    }
    ++pair.rows_read;
    if (!std::isfinite(vals[0]) || !std::isfinite(vals[1])) {
      ++pair.rows_dropped;
      continue;
    }
    a.push_back(vals[0]);
    b.push_back(vals[1]);
  }
  if (in.bad()) throw IngestionError(name + ": read error");
  if (pair.rows_dropped > 0) {
    pair.warnings.push_back(name + ": dropped " + std::to_string(pair.rows_dropped) +
                            " non-finite rows");
  }
  if (a.size() < kMinIngestRows) {
    throw IngestionError(name + ": " + std::to_string(a.size()) + " usable rows, need at least " +
                         std::to_string(kMinIngestRows));
  }
  if (a.size() > cap) {
    std::vector<std::size_t> idx(a.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < cap; ++i) {
      std::swap(idx[i], idx[i + rng.below(idx.size() - i)]);
    }
    idx.resize(cap);
    std::sort(idx.begin(), idx.end());
    std::vector<double> sa(cap), sb(cap);
    for (std::size_t i = 0; i < cap; ++i) {
      sa[i] = a[idx[i]];
      sb[i] = b[idx[i]];
    }
    a.swap(sa);
    b.swap(sb);
  }
  pair.raw.a = std::move(a);
  pair.raw.b = std::move(b);
  pair.raw.provenance = name;
  pair.data = pair.raw;
  standardize(pair.data);
  return pair;
}

RealPair ingest_pair_file(const std::filesystem::path& path, std::size_t cap, Rng& rng) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open " + path.string());
  return ingest_pair_stream(in, path.filename().string(), cap, rng);
}

}  // namespace bidd
