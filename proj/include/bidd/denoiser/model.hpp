#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "bidd/numerics/matrix.hpp"
#include "bidd/numerics/rng.hpp"

namespace bidd {

/// Shape of the noise-prediction MLP eps(a_t, b, t).
///
///   a_t  -> Linear(1 -> width)
///   b    -> Linear(1 -> c0) ReLU -> Linear(c0 -> c1) ReLU -> Linear(c1 -> c2)
///   t    -> sinusoidal(time_embed_dim) -> Linear(. -> width) SiLU -> Linear(width -> width) SiLU
///   concat (width + c2 + width) -> n_res_blocks x [x += Linear(expand*D -> D)(SiLU(Linear(D -> expand*D)(x)))]
///   -> Linear(D -> width) SiLU -> Linear(width -> 1)
struct DenoiserConfig {
  std::size_t width = 512;
  std::array<std::size_t, 3> cond_widths{16, 32, 4};
  std::size_t time_embed_dim = 16;
  std::size_t n_res_blocks = 2;
  std::size_t res_expand = 2;
  std::size_t t_max = 256;

  /// Full-size network (9,260,893 parameters).
  static DenoiserConfig paper();
  /// Width 128 with one residual block, for fast runs.
  static DenoiserConfig desk();

  std::size_t concat_width() const { return width + cond_widths[2] + width; }
  std::size_t hidden_width() const { return res_expand * concat_width(); }
  /// Throws ConfigError on zero widths or an odd time embedding dimension.
  void validate() const;

  bool operator==(const DenoiserConfig&) const = default;
};

/// Offsets of one affine layer y = x W^T + b inside the flat parameter vector.
/// W is stored row-major as [out x in].
struct LinearLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::size_t weight = 0;
  std::size_t bias = 0;

  std::size_t parameter_count() const { return in * out + out; }
};

/// Parameter counts per architectural stage.
struct StageCounts {
  std::size_t input = 0;
  std::size_t condition = 0;
  std::size_t time = 0;
  std::size_t residual = 0;
  std::size_t output = 0;

  std::size_t total() const { return input + condition + time + residual + output; }
};

/// All learnable parameters in one contiguous vector, addressed through LinearLayer offsets.
class DenoiserModel {
 public:
  struct ResidualBlock {
    LinearLayer expand;
    LinearLayer contract;
  };

  /// Zero-initialized parameters.
  explicit DenoiserModel(const DenoiserConfig& config);

  const DenoiserConfig& config() const noexcept { return config_; }
  std::span<double> parameters() noexcept { return params_; }
  std::span<const double> parameters() const noexcept { return params_; }
  std::size_t parameter_count() const noexcept { return params_.size(); }
  StageCounts stage_counts() const;

  const LinearLayer& input_proj() const { return input_; }
  const std::array<LinearLayer, 3>& cond_layers() const { return cond_; }
  const std::array<LinearLayer, 2>& time_layers() const { return time_; }
  const std::vector<ResidualBlock>& blocks() const { return blocks_; }
  const std::array<LinearLayer, 2>& output_layers() const { return output_; }

  ConstMatrixView weight(const LinearLayer& l) const {
    return {params_.data() + l.weight, l.out, l.in, l.in, 1};
  }
  std::span<const double> bias(const LinearLayer& l) const {
    return {params_.data() + l.bias, l.out};
  }

 private:
  DenoiserConfig config_;
  LinearLayer input_;
  std::array<LinearLayer, 3> cond_;
  std::array<LinearLayer, 2> time_;
  std::vector<ResidualBlock> blocks_;
  std::array<LinearLayer, 2> output_;
  std::vector<double> params_;
};

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for every weight and bias.
DenoiserModel init_params(Rng& rng, const DenoiserConfig& config);

/// Interleaved sinusoidal embedding [sin(t w_0), cos(t w_0), sin(t w_1), ...]
/// with w_j = 10000^(-2j/dim). Throws ConfigError for odd or zero dim.
std::vector<double> time_embed(double t, std::size_t dim);

/// Activations kept by forward() for backward().
struct ForwardCache {
  std::size_t rows = 0;
  std::vector<double> noised;
  std::vector<double> condition;
  std::vector<std::size_t> time_row;  // row of the timestep table used by each sample
  Matrix cond_z1, cond_h1, cond_z2, cond_h2, cond_out;
  Matrix time_embedding, time_z1, time_h1, time_z2, time_h2;  // one row per distinct timestep
  std::vector<Matrix> block_input;  // x entering block r; block_input[0] is the concat
  std::vector<Matrix> block_z, block_h;
  Matrix trunk_out;
  Matrix out_z, out_h;
  std::vector<double> prediction;
};

/// Batched forward pass. Throws NumericError on non-finite inputs and
/// ParameterError on a timestep outside [1, t_max] or mismatched lengths.
ForwardCache forward(const DenoiserModel& model, std::span<const double> noised,
                     std::span<const double> condition, std::span<const std::size_t> timesteps);

/// Same, reusing the buffers already held by cache.
void forward(const DenoiserModel& model, std::span<const double> noised,
             std::span<const double> condition, std::span<const std::size_t> timesteps,
             ForwardCache& cache);

/// Single-sample convenience wrapper.
double forward_one(const DenoiserModel& model, double noised, double condition,
                   std::size_t timestep);

/// Predictions only, evaluated in row chunks to bound memory. A workspace
/// kept across calls avoids reallocating the activation buffers.
std::vector<double> predict(const DenoiserModel& model, std::span<const double> noised,
                            std::span<const double> condition,
                            std::span<const std::size_t> timesteps,
                            ForwardCache* workspace = nullptr);

/// Gradient of sum_i loss_grad[i] * prediction[i] with respect to every
/// parameter, laid out like DenoiserModel::parameters().
std::vector<double> backward(const DenoiserModel& model, const ForwardCache& cache,
                             std::span<const double> loss_grad);

/// Mean squared error (1/n) sum (target - prediction)^2 and its gradient
/// with respect to the predictions.
double mse_loss(std::span<const double> prediction, std::span<const double> target,
                std::vector<double>* grad);

}  // namespace bidd
