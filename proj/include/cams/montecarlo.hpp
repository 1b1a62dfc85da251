#pragma once

#include <string>
#include <vector>

#include "cams/core.hpp"

namespace cams {

/// Almost-constant covariance codebook: every codeword's empirical
/// covariance lies within the delta band of the target.
struct Codebook {
    std::vector<MatrixXcd> codewords;  // each M x N, columns are symbols
    CovMatrix target_q;
    double delta_band = 0.0;  // absolute band half-width
};

/// Uncentered sample second moment (1/N) sum x_n x_n^H.
MatrixXcd empirical_covariance(const MatrixXcd& x_seq);

/// Rejection-sample m_n codewords of n i.i.d. CN(0, q) symbols from the
/// delta band around q. Throws BandTooTight after 10^4 attempts per word.
Codebook generate_codebook(const CovMatrix& q, int n, int m_n, double delta, RngStream& rng);

/// z_n = G(theta) x_n + upsilon_n with circularly-symmetric sensor noise.
MatrixXcd simulate_sensor(const SensingModel& model, const ParamVec& theta,
                          const MatrixXcd& x_seq, RngStream& rng);

/// Grid search over the prior support plus golden-section refinement of the
/// codeword-matched least-squares cost. Scalar-parameter models only.
double ml_estimate_doa(const MatrixXcd& z_seq, const MatrixXcd& x_seq,
                       const SensingModel& model, const Prior& prior, int grid_size);

struct MmseEstimate {
    double theta = 0.0;
    bool ml_fallback = false;  // posterior underflowed; ML value returned
};

/// Conditional-mean estimate by trapezoidal quadrature on the support grid;
/// the log-likelihood is max-normalized before exponentiation.
MmseEstimate mmse_estimate_doa(const MatrixXcd& z_seq, const MatrixXcd& x_seq,
                               const SensingModel& model, const Prior& prior, int grid_size);

/// Exact least squares for the linear OFDM sensing model.
VectorXcd ls_estimate_ofdm(const MatrixXcd& z_seq, const MatrixXcd& x_seq, int k);

struct InfoDensityStats {
    double mean = 0.0;
    double std_error = 0.0;
    std::vector<double> per_trial;  // per-trial block averages
};

/// Block averages of the information density over i.i.d. (x, y) draws.
InfoDensityStats empirical_info_density_mean(const UserChannel& user, const CovMatrix& q,
                                             int n, int trials, RngStream& rng);

/// Fraction of i.i.d. CN(0, q) length-n sequences whose empirical covariance
/// leaves the absolute delta band.
double concentration_out_rate(const CovMatrix& q, int n, double delta, int trials,
                              RngStream& rng);

enum class McEstimator { automatic, ml, mmse, ls };

struct McRunConfig {
    int n_block = 512;
    int trials = 2000;
    double delta_band = 0.35;  // relative: delta = delta_band * lambda_max(q)
    int grid_size = 2048;
    int codebook_size = 16;
    int concentration_trials = 1000;
    McEstimator estimator = McEstimator::automatic;
};

struct TrialRecord {
    int trial = 0;
    ParamVec theta;
    ParamVec theta_hat;
    double sq_err = 0.0;
};

struct McSummary {
    double n_mse_empirical = 0.0;  // block length times mean squared error
    double ecrb_predicted = 0.0;   // trial-averaged CRB at codeword covariances
    double ratio = 0.0;
    double concentration_rate = 0.0;
    double chebyshev_bound = 0.0;
    int n_block = 0;
    std::string estimator;
};

/// Finite-block validation run: constrained codebook, sensor simulation,
/// estimation, and the concentration check, all from the scenario seed.
McSummary run_mse_experiment(const Scenario& scenario, const CovMatrix& q,
                             const McRunConfig& cfg,
                             std::vector<TrialRecord>* records = nullptr);

}  // namespace cams
