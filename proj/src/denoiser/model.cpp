#include "bidd/denoiser/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bidd/error.hpp"
#include "bidd/numerics/fast_math.hpp"
#include "bidd/numerics/kernels.hpp"

namespace bidd {

namespace {

constexpr std::size_t kPredictChunk = 4096;

LinearLayer make_layer(std::size_t in, std::size_t out, std::size_t& cursor) {
  LinearLayer l{in, out, cursor, cursor + in * out};
  cursor += l.parameter_count();
  return l;
}

MatrixView mutable_weight(std::vector<double>& grads, const LinearLayer& l) {
  return {grads.data() + l.weight, l.out, l.in, l.in};
}

// y = x W^T + b
void linear_forward(const DenoiserModel& model, const LinearLayer& l, ConstMatrixView x,
                    Matrix& y) {
  y.resize(x.rows, l.out);
  kernels::gemm(x, model.weight(l).t(), y.view());
  kernels::add_row_vector(y.view(), model.bias(l));
}

// dW += dy^T x, db += colsum(dy), and dx = dy W (or dx += dy W when accumulate_dx).
void linear_backward(const DenoiserModel& model, const LinearLayer& l, ConstMatrixView x,
                     ConstMatrixView dy, std::vector<double>& grads, MatrixView* dx,
                     bool accumulate_dx) {
  kernels::gemm(dy.t(), x, mutable_weight(grads, l), 1.0, 1.0);
  kernels::column_sums(dy, std::span<double>(grads.data() + l.bias, l.out), true);
  if (dx != nullptr) kernels::gemm(dy, model.weight(l), *dx, 1.0, accumulate_dx ? 1.0 : 0.0);
}

void silu_inplace(const Matrix& z, Matrix& h) {
  h.resize(z.rows(), z.cols());
  silu(z.data().data(), h.data().data(), z.data().size());
}

// g *= silu'(z)
void silu_backward(const Matrix& z, std::span<double> g) {
  bidd::silu_backward(z.data().data(), g.data(), z.data().size());
}

void relu(const Matrix& z, Matrix& h) {
  h.resize(z.rows(), z.cols());
  const auto zs = z.data();
  auto hs = h.data();
  for (std::size_t i = 0; i < zs.size(); ++i) hs[i] = zs[i] > 0.0 ? zs[i] : 0.0;
}

void relu_backward(const Matrix& z, std::span<double> g) {
  const auto zs = z.data();
  for (std::size_t i = 0; i < zs.size(); ++i) {
    if (!(zs[i] > 0.0)) g[i] = 0.0;
  }
}

void check_inputs(const DenoiserModel& model, std::span<const double> noised,
                  std::span<const double> condition, std::span<const std::size_t> timesteps) {
  if (noised.size() != condition.size() || noised.size() != timesteps.size()) {
    throw ParameterError("denoiser forward: input lengths differ");
  }
  const std::size_t t_max = model.config().t_max;
  for (std::size_t i = 0; i < noised.size(); ++i) {
    if (!std::isfinite(noised[i]) || !std::isfinite(condition[i])) {
      throw NumericError("denoiser forward: non-finite input at row " + std::to_string(i));
    }
    if (timesteps[i] < 1 || timesteps[i] > t_max) {
      throw ParameterError("denoiser forward: timestep " + std::to_string(timesteps[i]) +
                           " outside [1, " + std::to_string(t_max) + "]");
    }
  }
}

// Column blocks [input | condition | time] of the first expand weight.
struct ExpandSplit {
  ConstMatrixView w_in, w_cond, w_time;
};

ExpandSplit split_first_expand(const DenoiserModel& model) {
  const DenoiserConfig& cfg = model.config();
  const LinearLayer& l = model.blocks()[0].expand;
  const double* w = model.parameters().data() + l.weight;
  const std::size_t d = l.in, c_out = cfg.cond_widths[2];
  return {{w, l.out, cfg.width, d, 1},
          {w + cfg.width, l.out, c_out, d, 1},
          {w + cfg.width + c_out, l.out, cfg.width, d, 1}};
}

// The concat entering the first block is affine in the noised scalar, so its
// expand layer reduces to a u + cond_out W_c^T + (time table)[t] + bias.
void first_expand_forward(const DenoiserModel& model, const ForwardCache& c, Matrix& z) {
  const auto params = model.parameters();
  const LinearLayer& l = model.blocks()[0].expand;
  const LinearLayer& in = model.input_proj();
  const ExpandSplit ws = split_first_expand(model);
  const std::size_t h = l.out, w = model.config().width, c_out = ws.w_cond.cols;

  std::vector<double> u(h), shift(params.begin() + static_cast<std::ptrdiff_t>(l.bias),
                                  params.begin() + static_cast<std::ptrdiff_t>(l.bias + h));
  for (std::size_t j = 0; j < h; ++j) {
    double su = 0.0, sb = 0.0;
    for (std::size_t q = 0; q < w; ++q) {
      su += ws.w_in(j, q) * params[in.weight + q];
      sb += ws.w_in(j, q) * params[in.bias + q];
    }
    u[j] = su;
    shift[j] += sb;
  }
  std::vector<double> wc(c_out * h);
  for (std::size_t q = 0; q < c_out; ++q) {
    for (std::size_t j = 0; j < h; ++j) wc[q * h + j] = ws.w_cond(j, q);
  }
  Matrix time_table(c.time_h2.rows(), h);
  kernels::gemm(c.time_h2.cview(), ws.w_time.t(), time_table.view());

  z.resize(c.rows, h);
  for (std::size_t i = 0; i < c.rows; ++i) {
    auto zr = z.row(i);
    const auto tr = time_table.row(c.time_row[i]);
    const auto cr = c.cond_out.row(i);
    const double a = c.noised[i];
    for (std::size_t j = 0; j < h; ++j) zr[j] = tr[j] + shift[j] + a * u[j];
    for (std::size_t q = 0; q < c_out; ++q) {
      const double cq = cr[q];
      const double* wq = wc.data() + q * h;
      for (std::size_t j = 0; j < h; ++j) zr[j] += cq * wq[j];
    }
  }
}

// Backward of first_expand_forward. Adds the weight and bias gradients of the
// expand layer and of the input projection, accumulates into the condition
// columns of dx, and into d_time (one row per distinct timestep).
void first_expand_backward(const DenoiserModel& model, const ForwardCache& c, const Matrix& dz,
                           std::vector<double>& grads, Matrix& dx, Matrix& d_time) {
  const auto params = model.parameters();
  const LinearLayer& l = model.blocks()[0].expand;
  const LinearLayer& in = model.input_proj();
  const ExpandSplit ws = split_first_expand(model);
  const std::size_t h = l.out, w = model.config().width, c_out = ws.w_cond.cols, d = l.in;
  const std::size_t n = c.rows;

  std::vector<double> s_a(h, 0.0), s_1(h, 0.0);
  Matrix per_time(c.time_h2.rows(), h);
  for (std::size_t i = 0; i < n; ++i) {
    const auto g = dz.row(i);
    auto pt = per_time.row(c.time_row[i]);
    const double a = c.noised[i];
    for (std::size_t j = 0; j < h; ++j) {
      s_a[j] += a * g[j];
      s_1[j] += g[j];
      pt[j] += g[j];
    }
  }

  double* gw = grads.data() + l.weight;
  for (std::size_t j = 0; j < h; ++j) {
    grads[l.bias + j] += s_1[j];
    for (std::size_t q = 0; q < w; ++q) {
      gw[j * d + q] += s_a[j] * params[in.weight + q] + s_1[j] * params[in.bias + q];
    }
  }
  for (std::size_t q = 0; q < w; ++q) {
    double sw = 0.0, sb = 0.0;
    for (std::size_t j = 0; j < h; ++j) {
      sw += ws.w_in(j, q) * s_a[j];
      sb += ws.w_in(j, q) * s_1[j];
    }
    grads[in.weight + q] += sw;
    grads[in.bias + q] += sb;
  }

  kernels::gemm(dz.cview().t(), c.cond_out.cview(), MatrixView{gw + w, h, c_out, d}, 1.0, 1.0);
  kernels::gemm(per_time.cview().t(), c.time_h2.cview(), MatrixView{gw + w + c_out, h, w, d}, 1.0,
                1.0);
  kernels::gemm(dz.cview(), ws.w_cond, MatrixView{dx.data().data() + w, n, c_out, d}, 1.0, 1.0);
  kernels::gemm(per_time.cview(), ws.w_time, d_time.view(), 1.0, 1.0);
}

}  // namespace

DenoiserConfig DenoiserConfig::paper() { return DenoiserConfig{}; }

DenoiserConfig DenoiserConfig::desk() {
  DenoiserConfig c;
  c.width = 128;
  c.n_res_blocks = 1;
  return c;
}

void DenoiserConfig::validate() const {
  if (width == 0 || time_embed_dim == 0 || res_expand == 0 || t_max == 0 ||
      cond_widths[0] == 0 || cond_widths[1] == 0 || cond_widths[2] == 0) {
    throw ConfigError("denoiser widths must all be >= 1");
  }
  if (time_embed_dim % 2 != 0) throw ConfigError("time embedding dimension must be even");
}

DenoiserModel::DenoiserModel(const DenoiserConfig& config) : config_(config) {
  config_.validate();
  std::size_t cursor = 0;
  const std::size_t w = config_.width;
  const std::size_t d = config_.concat_width();
  input_ = make_layer(1, w, cursor);
  cond_[0] = make_layer(1, config_.cond_widths[0], cursor);
  cond_[1] = make_layer(config_.cond_widths[0], config_.cond_widths[1], cursor);
  cond_[2] = make_layer(config_.cond_widths[1], config_.cond_widths[2], cursor);
  time_[0] = make_layer(config_.time_embed_dim, w, cursor);
  time_[1] = make_layer(w, w, cursor);
  for (std::size_t r = 0; r < config_.n_res_blocks; ++r) {
    ResidualBlock b;
    b.expand = make_layer(d, config_.hidden_width(), cursor);
    b.contract = make_layer(config_.hidden_width(), d, cursor);
    blocks_.push_back(b);
  }
  output_[0] = make_layer(d, w, cursor);
  output_[1] = make_layer(w, 1, cursor);
  params_.assign(cursor, 0.0);
}

StageCounts DenoiserModel::stage_counts() const {
  StageCounts s;
  s.input = input_.parameter_count();
  for (const auto& l : cond_) s.condition += l.parameter_count();
  for (const auto& l : time_) s.time += l.parameter_count();
  for (const auto& b : blocks_) s.residual += b.expand.parameter_count() + b.contract.parameter_count();
  for (const auto& l : output_) s.output += l.parameter_count();
  return s;
}

DenoiserModel init_params(Rng& rng, const DenoiserConfig& config) {
  DenoiserModel model(config);
  auto params = model.parameters();
  auto init_layer = [&](const LinearLayer& l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(l.in));
    for (std::size_t i = 0; i < l.parameter_count(); ++i) {
      params[l.weight + i] = rng.uniform(-bound, bound);
    }
  };
  init_layer(model.input_proj());
  for (const auto& l : model.cond_layers()) init_layer(l);
  for (const auto& l : model.time_layers()) init_layer(l);
  for (const auto& b : model.blocks()) {
    init_layer(b.expand);
    init_layer(b.contract);
  }
  for (const auto& l : model.output_layers()) init_layer(l);
  return model;
}

std::vector<double> time_embed(double t, std::size_t dim) {
  if (dim == 0 || dim % 2 != 0) {
    throw ConfigError("time embedding dimension must be even and >= 2, got " + std::to_string(dim));
  }
  std::vector<double> out(dim);
  const double d = static_cast<double>(dim);
  for (std::size_t j = 0; j < dim / 2; ++j) {
    const double freq = std::pow(10000.0, -2.0 * static_cast<double>(j) / d);
    out[2 * j] = std::sin(t * freq);
    out[2 * j + 1] = std::cos(t * freq);
  }
  return out;
}

void forward(const DenoiserModel& model, std::span<const double> noised,
             std::span<const double> condition, std::span<const std::size_t> timesteps,
             ForwardCache& c) {
  check_inputs(model, noised, condition, timesteps);
  const DenoiserConfig& cfg = model.config();
  const std::size_t n = noised.size();
  const std::size_t w = cfg.width;
  const std::size_t c_out = cfg.cond_widths[2];
  const std::size_t d = cfg.concat_width();
  const auto params = model.parameters();

  c.rows = n;
  c.noised.assign(noised.begin(), noised.end());
  c.condition.assign(condition.begin(), condition.end());

  // Time path runs once per distinct timestep.
  std::vector<std::size_t> distinct(timesteps.begin(), timesteps.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  std::vector<std::size_t> row_of(cfg.t_max + 1, 0);
  for (std::size_t r = 0; r < distinct.size(); ++r) row_of[distinct[r]] = r;
  c.time_row.resize(n);
  for (std::size_t i = 0; i < n; ++i) c.time_row[i] = row_of[timesteps[i]];

  c.time_embedding.resize(distinct.size(), cfg.time_embed_dim);
  for (std::size_t r = 0; r < distinct.size(); ++r) {
    const auto e = time_embed(static_cast<double>(distinct[r]), cfg.time_embed_dim);
    std::copy(e.begin(), e.end(), c.time_embedding.row(r).begin());
  }
  linear_forward(model, model.time_layers()[0], c.time_embedding.cview(), c.time_z1);
  silu_inplace(c.time_z1, c.time_h1);
  linear_forward(model, model.time_layers()[1], c.time_h1.cview(), c.time_z2);
  silu_inplace(c.time_z2, c.time_h2);

  // Condition path.
  const auto& cl = model.cond_layers();
  c.cond_z1.resize(n, cl[0].out);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < cl[0].out; ++j) {
      c.cond_z1(i, j) = condition[i] * params[cl[0].weight + j] + params[cl[0].bias + j];
    }
  }
  relu(c.cond_z1, c.cond_h1);
  linear_forward(model, cl[1], c.cond_h1.cview(), c.cond_z2);
  relu(c.cond_z2, c.cond_h2);
  linear_forward(model, cl[2], c.cond_h2.cview(), c.cond_out);
  const Matrix& cond_out = c.cond_out;

  // Concatenate [input projection | condition | time].
  const auto& in = model.input_proj();
  const auto& blocks = model.blocks();
  c.block_input.resize(std::max<std::size_t>(blocks.size(), 1));
  Matrix& x0 = c.block_input[0];
  x0.resize(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = x0.row(i);
    for (std::size_t j = 0; j < w; ++j) row[j] = noised[i] * params[in.weight + j] + params[in.bias + j];
    for (std::size_t j = 0; j < c_out; ++j) row[w + j] = cond_out(i, j);
    const auto trow = c.time_h2.row(c.time_row[i]);
    std::copy(trow.begin(), trow.end(), row.begin() + static_cast<std::ptrdiff_t>(w + c_out));
  }

  // Residual trunk.
  c.block_z.resize(blocks.size());
  c.block_h.resize(blocks.size());
  for (std::size_t r = 0; r < blocks.size(); ++r) {
    const Matrix& x = c.block_input[r];
    if (r == 0) {
      first_expand_forward(model, c, c.block_z[0]);
    } else {
      linear_forward(model, blocks[r].expand, x.cview(), c.block_z[r]);
    }
    silu_inplace(c.block_z[r], c.block_h[r]);
    Matrix& next = r + 1 < blocks.size() ? c.block_input[r + 1] : c.trunk_out;
    next = x;
    kernels::gemm(c.block_h[r].cview(), model.weight(blocks[r].contract).t(), next.view(), 1.0, 1.0);
    kernels::add_row_vector(next.view(), model.bias(blocks[r].contract));
  }
  if (blocks.empty()) c.trunk_out = x0;

  // Output head.
  const auto& ol = model.output_layers();
  linear_forward(model, ol[0], c.trunk_out.cview(), c.out_z);
  silu_inplace(c.out_z, c.out_h);
  c.prediction.assign(n, params[ol[1].bias]);
  for (std::size_t i = 0; i < n; ++i) {
    const auto h = c.out_h.row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < w; ++j) s += h[j] * params[ol[1].weight + j];
    c.prediction[i] += s;
  }
}

ForwardCache forward(const DenoiserModel& model, std::span<const double> noised,
                     std::span<const double> condition, std::span<const std::size_t> timesteps) {
  ForwardCache c;
  forward(model, noised, condition, timesteps, c);
  return c;
}

double forward_one(const DenoiserModel& model, double noised, double condition,
                   std::size_t timestep) {
  const std::size_t t[1] = {timestep};
  return forward(model, {&noised, 1}, {&condition, 1}, t).prediction[0];
}

std::vector<double> predict(const DenoiserModel& model, std::span<const double> noised,
                            std::span<const double> condition,
                            std::span<const std::size_t> timesteps, ForwardCache* workspace) {
  check_inputs(model, noised, condition, timesteps);
  ForwardCache local;
  ForwardCache& c = workspace != nullptr ? *workspace : local;
  std::vector<double> out;
  out.reserve(noised.size());
  for (std::size_t start = 0; start < noised.size(); start += kPredictChunk) {
    const std::size_t len = std::min(kPredictChunk, noised.size() - start);
    forward(model, noised.subspan(start, len), condition.subspan(start, len),
            timesteps.subspan(start, len), c);
    out.insert(out.end(), c.prediction.begin(), c.prediction.end());
  }
  return out;
}

std::vector<double> backward(const DenoiserModel& model, const ForwardCache& c,
                             std::span<const double> loss_grad) {
  if (loss_grad.size() != c.rows || c.out_h.rows() != c.rows) {
    throw ParameterError("denoiser backward: cache and gradient shapes differ");
  }
  const DenoiserConfig& cfg = model.config();
  const std::size_t n = c.rows;
  const std::size_t w = cfg.width;
  const std::size_t c_out = cfg.cond_widths[2];
  const std::size_t d = cfg.concat_width();
  const auto params = model.parameters();
  std::vector<double> grads(model.parameter_count(), 0.0);

  // Output head.
  const auto& ol = model.output_layers();
  Matrix d_out(n, w);
  for (std::size_t i = 0; i < n; ++i) {
    const double g = loss_grad[i];
    grads[ol[1].bias] += g;
    const auto h = c.out_h.row(i);
    auto row = d_out.row(i);
    for (std::size_t j = 0; j < w; ++j) {
      grads[ol[1].weight + j] += g * h[j];
      row[j] = g * params[ol[1].weight + j];
    }
  }
  silu_backward(c.out_z, d_out.data());
  Matrix dx(n, d);
  MatrixView dx_view = dx.view();
  linear_backward(model, ol[0], c.trunk_out.cview(), d_out.cview(), grads, &dx_view, false);

  // Residual trunk, last block first. dx holds d loss / d (output of block r).
  const auto& blocks = model.blocks();
  Matrix dh;
  Matrix d_t2(c.time_h2.rows(), w);
  for (std::size_t r = blocks.size(); r-- > 0;) {
    dh.resize(n, blocks[r].contract.in);
    MatrixView dh_view = dh.view();
    linear_backward(model, blocks[r].contract, c.block_h[r].cview(), dx.cview(), grads, &dh_view,
                    false);
    silu_backward(c.block_z[r], dh.data());
    if (r == 0) {
      first_expand_backward(model, c, dh, grads, dx, d_t2);
    } else {
      linear_backward(model, blocks[r].expand, c.block_input[r].cview(), dh.cview(), grads,
                      &dx_view, true);
    }
  }

  // Input projection.
  const auto& in = model.input_proj();
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = dx.row(i);
    for (std::size_t j = 0; j < w; ++j) {
      grads[in.weight + j] += row[j] * c.noised[i];
      grads[in.bias + j] += row[j];
    }
  }

  // Condition path.
  const auto& cl = model.cond_layers();
  const ConstMatrixView d_cond{dx.data().data() + w, n, c_out, d, 1};
  Matrix d_h2(n, cl[2].in);
  MatrixView d_h2_view = d_h2.view();
  linear_backward(model, cl[2], c.cond_h2.cview(), d_cond, grads, &d_h2_view, false);
  relu_backward(c.cond_z2, d_h2.data());
  Matrix d_h1(n, cl[1].in);
  MatrixView d_h1_view = d_h1.view();
  linear_backward(model, cl[1], c.cond_h1.cview(), d_h2.cview(), grads, &d_h1_view, false);
  relu_backward(c.cond_z1, d_h1.data());
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = d_h1.row(i);
    for (std::size_t j = 0; j < cl[0].out; ++j) {
      grads[cl[0].weight + j] += row[j] * c.condition[i];
      grads[cl[0].bias + j] += row[j];
    }
  }

  // Time path: gather per-sample gradients onto the distinct-timestep table.
  const auto& tl = model.time_layers();
  for (std::size_t i = 0; i < n; ++i) {
    const auto src = dx.row(i).subspan(w + c_out, w);
    auto dst = d_t2.row(c.time_row[i]);
    for (std::size_t j = 0; j < w; ++j) dst[j] += src[j];
  }
  silu_backward(c.time_z2, d_t2.data());
  Matrix d_t1(c.time_h1.rows(), w);
  MatrixView d_t1_view = d_t1.view();
  linear_backward(model, tl[1], c.time_h1.cview(), d_t2.cview(), grads, &d_t1_view, false);
  silu_backward(c.time_z1, d_t1.data());
  linear_backward(model, tl[0], c.time_embedding.cview(), d_t1.cview(), grads, nullptr, false);
  return grads;
}

double mse_loss(std::span<const double> prediction, std::span<const double> target,
                std::vector<double>* grad) {
  if (prediction.size() != target.size() || prediction.empty()) {
    throw ParameterError("mse_loss: prediction and target lengths differ or are empty");
  }
  const double inv_n = 1.0 / static_cast<double>(prediction.size());
  double loss = 0.0;
  if (grad != nullptr) grad->resize(prediction.size());
  for (std::size_t i = 0; i < prediction.size(); ++i) {
    const double diff = prediction[i] - target[i];
    loss += diff * diff;
    if (grad != nullptr) (*grad)[i] = 2.0 * diff * inv_n;
  }
  return loss * inv_n;
}

}  // namespace bidd
