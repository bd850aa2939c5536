#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bidd/decision/profile.hpp"
#include "bidd/dgp/pair_dataset.hpp"

namespace bidd {

/// Silverman's rule 1.06 min(sd, IQR / 1.34) n^(-1/5).
double silverman_bandwidth(std::span<const double> x);

/// Out-of-fold Nadaraya-Watson predictions of y from x with a Gaussian
/// kernel. Row i belongs to fold i mod folds; each fold is predicted from the
/// others with the Silverman bandwidth of the training part. Throws
/// ParameterError when a bandwidth is zero.
std::vector<double> cross_fitted_regression(std::span<const double> x, std::span<const double> y,
                                            std::size_t folds = 5);

/// The column with the smaller marginal variance is the cause. Refuses
/// standardized data (ParameterError). Equal variances give AtoB with tie.
DirectionVerdict baseline_var_sort(const PairDataset& raw);

/// Lower out-of-fold regression MSE wins; losses equal to 1e-12 give AtoB with tie.
DirectionVerdict baseline_mse_min(const PairDataset& data);

/// Smaller HSIC(residual, regressor) wins; equal values give AtoB with tie.
DirectionVerdict baseline_resid_indep(const PairDataset& data);

}  // namespace bidd
