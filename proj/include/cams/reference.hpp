#pragma once

#include <span>

#include "cams/core.hpp"

namespace cams::ref {

/// Serial reference implementations of the sensing-risk kernels: plain loops
/// over the sample set, no caching, no structure fast paths, no threads.
/// Kept as the independent baseline for the parallel engine's tests and for
/// the benchmark target.

double ecrb_objective(const SensingModel& model, const VectorXd& weights,
                      std::span<const ParamVec> samples, const CovMatrix& q);

MatrixXcd ecrb_gradient(const SensingModel& model, const VectorXd& weights,
                        std::span<const ParamVec> samples, const CovMatrix& q);

double bcrb_objective(const SensingModel& model, const VectorXd& weights,
                      std::span<const ParamVec> samples, const CovMatrix& q);

}  // namespace cams::ref
