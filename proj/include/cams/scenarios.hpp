#pragma once

#include <complex>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "cams/core.hpp"

namespace cams {

/// Raised-cosine tapered uniform prior on (-s, s); kappa = 1 is uniform.
struct TaperedUniformPrior {
    double s = M_PI / 2;
    double kappa = 0.7;
};

/// Beta prior rescaled onto [theta_min, theta_max].
struct BetaPriorSpec {
    double s1 = 5.5;
    double s2 = 15.0;
    double theta_min = -M_PI / 2;
    double theta_max = M_PI / 2;
};

using DoaPrior = std::variant<TaperedUniformPrior, BetaPriorSpec>;

/// ULA DoA estimation case study: single-antenna user, point target.
struct DoaConfig {
    int m_tx = 16;
    int t_rx = 16;
    double user_aod = 0.0;                      // phi
    std::complex<double> beta{1.0, 0.0};        // user channel gain
    std::complex<double> lambda_gain{1.0, 0.0}; // back-scatter gain
    DoaPrior prior = TaperedUniformPrior{};
    double comm_snr_db = 15.0;  // P / sigma^2_omega
    double sens_snr_db = -25.0; // P / sigma^2_upsilon
    double power = 1.0;
    int prior_samples = 512;
    std::uint64_t seed = 0;
};

/// Cyclic-prefix OFDM case study: sub-carriers as the vector dimension.
struct OfdmConfig {
    int k_sub = 64;
    double alpha = 10.0;  // delay spread of the exponential power delay profile
    std::uint64_t phase_seed = 1;
    double comm_snr_db = 10.0;
    double sens_snr_db = -10.0;
    double power = 0.0;  // 0 -> defaults to k_sub
    int prior_samples = 512;
    std::uint64_t seed = 0;
};

/// [1, e^{i pi sin t}, ..., e^{i (n-1) pi sin t}]; half-wavelength ULA.
VectorXcd steering_vector(int n, double theta);

double tapered_uniform_pdf(double theta, double s, double kappa);
double beta_prior_pdf(double theta, double s1, double s2, double theta_min, double theta_max);

Prior make_tapered_uniform_prior(double s, double kappa);
Prior make_beta_prior(double s1, double s2, double theta_min, double theta_max);

Scenario build_doa(const DoaConfig& cfg);
Scenario build_ofdm(const OfdmConfig& cfg);

/// Unitary DFT matrix used by the OFDM scenario.
MatrixXcd dft_matrix(int k);

/// Normalized beamforming gain b(theta) = v^H Q v / (M power) on a grid.
std::vector<std::pair<double, double>> beam_pattern(const CovMatrix& q, double power,
                                                    std::span<const double> grid);

}  // namespace cams
