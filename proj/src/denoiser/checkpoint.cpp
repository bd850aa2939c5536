#include "bidd/denoiser/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <string_view>
#include <vector>

#include "bidd/error.hpp"
#include "bidd/numerics/rng.hpp"

namespace bidd {

namespace {

constexpr char kMagic[8] = {'B', 'I', 'D', 'D', 'C', 'K', 'P', 'T'};

void put_u64(std::vector<char>& buf, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u32(std::vector<char>& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class Reader {
 public:
  explicit Reader(const std::vector<char>& buf) : buf_(buf) {}
  std::uint64_t u64() { return read(8); }
  void skip(std::size_t bytes) {
    if (pos_ + bytes > buf_.size()) throw FormatError("checkpoint truncated");
    pos_ += bytes;
  }
  std::uint32_t u32() { return static_cast<std::uint32_t>(read(4)); }
  std::size_t position() const { return pos_; }

 private:
  std::uint64_t read(std::size_t bytes) {
    if (pos_ + bytes > buf_.size()) throw FormatError("checkpoint truncated");
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < bytes; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf_[pos_ + i])) << (8 * i);
    }
    pos_ += bytes;
    return v;
  }
  const std::vector<char>& buf_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const DenoiserModel& model, std::ostream& out) {
  const DenoiserConfig& c = model.config();
  std::vector<char> buf(kMagic, kMagic + sizeof kMagic);
  put_u32(buf, kCheckpointVersion);
  for (std::uint64_t v : {c.width, c.cond_widths[0], c.cond_widths[1], c.cond_widths[2],
                          c.time_embed_dim, c.n_res_blocks, c.res_expand, c.t_max}) {
    put_u64(buf, v);
  }
  put_u64(buf, model.parameter_count());
  for (double p : model.parameters()) put_u64(buf, std::bit_cast<std::uint64_t>(p));
  put_u64(buf, fnv1a64({buf.data(), buf.size()}));
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw FormatError("failed writing checkpoint");
}

void save_checkpoint(const DenoiserModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open '" + path + "' for writing");
  save_checkpoint(model, out);
}

DenoiserModel load_checkpoint(std::istream& in) {
  std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (buf.size() < sizeof kMagic + 8 || std::memcmp(buf.data(), kMagic, sizeof kMagic) != 0) {
    throw FormatError("not a checkpoint (bad magic)");
  }
  const std::size_t body = buf.size() - 8;
  std::uint64_t stored = 0;
  for (int i = 0; i < 8; ++i) {
    stored |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[body + i])) << (8 * i);
  }
  if (stored != fnv1a64({buf.data(), body})) throw FormatError("checkpoint checksum mismatch");

  Reader r(buf);
  r.skip(sizeof kMagic);
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  }
  DenoiserConfig c;
  c.width = r.u64();
  c.cond_widths = {r.u64(), r.u64(), r.u64()};
  c.time_embed_dim = r.u64();
  c.n_res_blocks = r.u64();
  c.res_expand = r.u64();
  c.t_max = r.u64();
  DenoiserModel model(c);
  const std::uint64_t count = r.u64();
  if (count != model.parameter_count()) {
    throw FormatError("checkpoint parameter count " + std::to_string(count) +
                      " does not match its config (" + std::to_string(model.parameter_count()) + ")");
  }
  if (r.position() + count * 8 != body) throw FormatError("checkpoint payload size mismatch");
  auto params = model.parameters();
  for (auto& p : params) p = std::bit_cast<double>(r.u64());
  return model;
}

DenoiserModel load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open checkpoint '" + path + "'");
  return load_checkpoint(in);
}

}  // namespace bidd
