#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cams/rng.hpp"

namespace cams {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

/// Target parameter vector. Real-parameter models keep the imaginary parts
/// at zero; complex-parameter models use the full value.
using ParamVec = VectorXcd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct InvalidInput : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct SingularFim : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BandTooTight : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnexcitedSubcarrier : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline MatrixXcd hermitian_part(const MatrixXcd& a) { return 0.5 * (a + a.adjoint()); }

bool is_hermitian(const MatrixXcd& m, double tol = 1e-12);
double min_eigenvalue(const MatrixXcd& hermitian);

/// Hermitian PSD input covariance. Construction symmetrizes and clips
/// negative eigenvalues (tolerance 1e-10 on the minimum eigenvalue).
class CovMatrix {
public:
    CovMatrix() = default;
    explicit CovMatrix(const MatrixXcd& m);

    /// For matrices produced by code that already guarantees Hermitian PSD
    /// (projections, eigenvalue reconstruction); skips the eigensolve.
    static CovMatrix from_psd_unchecked(MatrixXcd m);

    const MatrixXcd& matrix() const { return m_; }
    int dim() const { return static_cast<int>(m_.rows()); }
    double trace() const { return m_.trace().real(); }

private:
    struct unchecked_tag {};
    CovMatrix(MatrixXcd m, unchecked_tag) : m_(std::move(m)) {}
    MatrixXcd m_;
};

/// Frobenius-nearest PSD matrix: symmetrize, clip negative eigenvalues.
CovMatrix project_psd(const MatrixXcd& m);

/// Frobenius-nearest point of {Q >= 0, tr Q <= power}: eigenvalues are
/// projected onto the capped simplex, eigenvectors preserved.
CovMatrix project_trace_ball(const MatrixXcd& m, double power);

struct UserChannel {
    MatrixXcd H;             // L x M
    double noise_var = 1.0;  // sigma^2_omega
};
void validate(const UserChannel& user);

enum class ParamKind { real, complex };

struct SensingModel {
    int param_dim = 0;  // K
    ParamKind param_kind = ParamKind::real;
    std::function<MatrixXcd(const ParamVec&)> g;        // theta -> T x M
    std::function<MatrixXcd(const ParamVec&, int)> dg;  // (theta, i) -> dG/dtheta_i
    double noise_var = 1.0;                             // sigma^2_upsilon
    int out_dim = 0;                                    // T

    // Structure hints consumed by the ECRB engine. fim_theta_free means the
    // conditional FIM does not depend on theta (linear sensing maps);
    // diagonal_dg means every dG/dtheta_i is diagonal (T == M).
    bool fim_theta_free = false;
    bool diagonal_dg = false;
};
void validate(const SensingModel& model);

/// Largest relative error of dg against central finite differences of g at
/// theta, over all parameter directions. Step 1e-6 * (1 + |theta|).
double sensing_derivative_error(const SensingModel& model, const ParamVec& theta);

struct Prior {
    std::function<std::vector<ParamVec>(RngStream&, int)> sample;
    std::function<double(const ParamVec&)> pdf;  // empty when unavailable
    // Box support on the real parts; +-inf for unbounded components.
    VectorXd support_lo, support_hi;
};

struct Weights {
    VectorXd a;
    static Weights ones(int k) { return Weights{VectorXd::Ones(k)}; }
};

struct Scenario {
    UserChannel user;
    SensingModel sensing;
    Prior prior;
    double power = 1.0;  // tr Q <= power
    Weights weights;
    int prior_samples = 512;  // SAA sample count S
    std::uint64_t seed = 0;
};
void validate(const Scenario& scenario);

/// The scenario's fixed SAA sample set; deterministic in scenario.seed.
std::vector<ParamVec> draw_prior_samples(const Scenario& scenario);

enum class SolveStatus { optimal, infeasible, max_iter };
const char* to_string(SolveStatus s);

/// One point of the capacity-MSE curve.
struct TradeoffPoint {
    double delta = 0.0;      // MSE constraint level
    double rate_bits = 0.0;  // log base 2
    CovMatrix q_opt;
    double kkt_residual = 0.0;
    double lambda_sensing = 0.0;  // multiplier of the MSE constraint
    double nu_power = 0.0;        // multiplier of the power constraint
    SolveStatus status = SolveStatus::optimal;
};

}  // namespace cams
