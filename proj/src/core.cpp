#include "cams/core.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>

#include "cams/parallel.hpp"

namespace cams {

namespace {
std::atomic<int> g_max_threads{0};
}

int max_threads() {
    int n = g_max_threads.load(std::memory_order_relaxed);
#ifdef _OPENMP
    if (n <= 0) n = omp_get_max_threads();
#else
    if (n <= 0) n = 1;
#endif
    return n;
}

void set_max_threads(int n) { g_max_threads.store(n, std::memory_order_relaxed); }

double pairwise_sum(std::span<const double> xs) {
    if (xs.size() <= 8) {
        double acc = 0.0;
        for (double x : xs) acc += x;
        return acc;
    }
    const std::size_t half = xs.size() / 2;
    return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

bool is_hermitian(const MatrixXcd& m, double tol) {
    if (m.rows() != m.cols()) return false;
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

double min_eigenvalue(const MatrixXcd& hermitian) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(hermitian, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

CovMatrix::CovMatrix(const MatrixXcd& m) { *this = project_psd(m); }

CovMatrix CovMatrix::from_psd_unchecked(MatrixXcd m) {
    return CovMatrix(std::move(m), unchecked_tag{});
}

CovMatrix project_psd(const MatrixXcd& m) {
    if (m.rows() != m.cols()) throw InvalidInput("project_psd: matrix must be square");
    if (!m.allFinite()) throw InvalidInput("project_psd: non-finite entries");
    const MatrixXcd h = hermitian_part(m);
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(h);
    VectorXd ev = es.eigenvalues().cwiseMax(0.0);
    MatrixXcd out = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
    return CovMatrix::from_psd_unchecked(hermitian_part(out));
}

namespace {

// Euclidean projection of x onto {y >= 0, sum y <= cap}.
VectorXd project_capped_simplex(VectorXd x, double cap) {
    VectorXd clipped = x.cwiseMax(0.0);
    if (clipped.sum() <= cap) return clipped;
    // Active budget: find tau with sum max(x_i - tau, 0) = cap.
    std::vector<double> sorted(x.data(), x.data() + x.size());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double cum = 0.0;
    double tau = 0.0;
    for (std::size_t k = 0; k < sorted.size(); ++k) {
        cum += sorted[k];
        const double t = (cum - cap) / static_cast<double>(k + 1);
        if (k + 1 == sorted.size() || t >= sorted[k + 1]) {
            tau = t;
            break;
        }
    }
    return (x.array() - tau).cwiseMax(0.0).matrix();
}

}  // namespace

CovMatrix project_trace_ball(const MatrixXcd& m, double power) {
    if (!(power > 0.0)) throw InvalidInput("project_trace_ball: power must be positive");
    if (m.rows() != m.cols()) throw InvalidInput("project_trace_ball: matrix must be square");
    if (!m.allFinite()) throw InvalidInput("project_trace_ball: non-finite entries");
    const MatrixXcd h = hermitian_part(m);
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(h);
    VectorXd ev = project_capped_simplex(es.eigenvalues(), power);
    MatrixXcd out = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
    return CovMatrix::from_psd_unchecked(hermitian_part(out));
}

void validate(const UserChannel& user) {
    if (!user.H.allFinite()) throw InvalidInput("UserChannel: non-finite H");
    if (!(user.noise_var > 0.0)) throw InvalidInput("UserChannel: noise_var must be positive");
}

void validate(const SensingModel& model) {
    if (model.param_dim < 1) throw InvalidInput("SensingModel: param_dim must be positive");
    if (model.out_dim < 1) throw InvalidInput("SensingModel: out_dim must be positive");
    if (!(model.noise_var > 0.0)) throw InvalidInput("SensingModel: noise_var must be positive");
    if (!model.g || !model.dg) throw InvalidInput("SensingModel: g and dg required");
}

double sensing_derivative_error(const SensingModel& model, const ParamVec& theta) {
    const double h = 1e-6 * (1.0 + theta.norm());
    double worst = 0.0;
    for (int i = 0; i < model.param_dim; ++i) {
        ParamVec hi = theta, lo = theta;
        hi(i) += h;
        lo(i) -= h;
        const MatrixXcd fd = (model.g(hi) - model.g(lo)) / (2.0 * h);
        const MatrixXcd an = model.dg(theta, i);
        const double scale = std::max(an.norm(), 1e-300);
        worst = std::max(worst, (fd - an).norm() / scale);
    }
    return worst;
}

void validate(const Scenario& scenario) {
    validate(scenario.user);
    validate(scenario.sensing);
    if (!(scenario.power > 0.0)) throw InvalidInput("Scenario: power must be positive");
    if (scenario.prior_samples < 1) throw InvalidInput("Scenario: prior_samples must be positive");
    if (scenario.weights.a.size() != scenario.sensing.param_dim)
        throw InvalidInput("Scenario: weights dimension mismatch");
    if ((scenario.weights.a.array() < 0.0).any())
        throw InvalidInput("Scenario: weights must be nonnegative");
    if (!scenario.prior.sample) throw InvalidInput("Scenario: prior sampler required");
    // The user channel and sensing map must share the transmit dimension M.
    RngStream rng = RngStream(scenario.seed).substream(stream::prior);
    const std::vector<ParamVec> probe = scenario.prior.sample(rng, 1);
    if (probe.empty()) throw InvalidInput("Scenario: prior sampler returned nothing");
    const MatrixXcd g0 = scenario.sensing.g(probe.front());
    if (g0.cols() != scenario.user.H.cols())
        throw InvalidInput("Scenario: H column count must match sensing map column count");
    if (g0.rows() != scenario.sensing.out_dim)
        throw InvalidInput("Scenario: sensing map row count must match out_dim");
}

std::vector<ParamVec> draw_prior_samples(const Scenario& scenario) {
    RngStream rng = RngStream(scenario.seed).substream(stream::prior);
    return scenario.prior.sample(rng, scenario.prior_samples);
}

const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::optimal: return "optimal";
        case SolveStatus::infeasible: return "infeasible";
        case SolveStatus::max_iter: return "max_iter";
    }
    return "unknown";
}

}  // namespace cams
