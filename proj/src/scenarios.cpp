#include "cams/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace cams {

using std::complex;

VectorXcd steering_vector(int n, double theta) {
    VectorXcd v(n);
    const double w = M_PI * std::sin(theta);
    for (int i = 0; i < n; ++i) v(i) = std::polar(1.0, w * static_cast<double>(i));
    return v;
}

double tapered_uniform_pdf(double theta, double s, double kappa) {
    const double at = std::abs(theta);
    const double norm = 1.0 / (s * (1.0 + kappa));
    if (kappa >= 1.0) return at <= s ? norm : 0.0;  // taper region is empty
    if (at < s * kappa) return norm;
    if (at <= s)
        return norm * 0.5 * (1.0 + std::cos(M_PI * (at - s * kappa) / (s * (1.0 - kappa))));
    return 0.0;
}

double beta_prior_pdf(double theta, double s1, double s2, double theta_min, double theta_max) {
    if (theta < theta_min || theta > theta_max) return 0.0;
    const double range = theta_max - theta_min;
    const double log_b = std::lgamma(s1) + std::lgamma(s2) - std::lgamma(s1 + s2);
    const double lp = (s1 - 1.0) * std::log(theta - theta_min) +
                      (s2 - 1.0) * std::log(theta_max - theta) -
                      (s1 + s2 - 1.0) * std::log(range) - log_b;
    return std::exp(lp);
}

namespace {

ParamVec scalar_param(double x) {
    ParamVec v(1);
    v(0) = complex<double>(x, 0.0);
    return v;
}

// Precomputed inverse CDF over a uniform grid; linear interpolation.
struct GridInverseCdf {
    std::vector<double> grid, cdf;

    double sample(double u) const {
        const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
        if (it == cdf.begin()) return grid.front();
        if (it == cdf.end()) return grid.back();
        const std::size_t hi = static_cast<std::size_t>(it - cdf.begin());
        const std::size_t lo = hi - 1;
        const double span = cdf[hi] - cdf[lo];
        const double t = span > 0.0 ? (u - cdf[lo]) / span : 0.5;
        return grid[lo] + t * (grid[hi] - grid[lo]);
    }
};

GridInverseCdf build_inverse_cdf(double lo, double hi, const std::function<double(double)>& pdf,
                                 int points) {
    GridInverseCdf out;
    out.grid.resize(points);
    out.cdf.resize(points);
    const double step = (hi - lo) / static_cast<double>(points - 1);
    for (int i = 0; i < points; ++i) out.grid[i] = lo + step * i;
    out.cdf[0] = 0.0;
    for (int i = 1; i < points; ++i) {
        const double a = pdf(out.grid[i - 1]);
        const double b = pdf(out.grid[i]);
        out.cdf[i] = out.cdf[i - 1] + 0.5 * (a + b) * step;
    }
    const double total = out.cdf.back();
    for (double& c : out.cdf) c /= total;
    return out;
}

constexpr int kInverseCdfPoints = 4096;

}  // namespace

Prior make_tapered_uniform_prior(double s, double kappa) {
    if (!(s > 0.0)) throw InvalidInput("tapered uniform prior: s must be positive");
    if (kappa < 0.0 || kappa > 1.0) throw InvalidInput("tapered uniform prior: kappa in [0,1]");
    auto pdf1 = [s, kappa](double t) { return tapered_uniform_pdf(t, s, kappa); };
    auto inv = std::make_shared<GridInverseCdf>(build_inverse_cdf(-s, s, pdf1, kInverseCdfPoints));
    Prior prior;
    prior.sample = [inv](RngStream& rng, int count) {
        std::vector<ParamVec> out;
        out.reserve(count);
        for (int i = 0; i < count; ++i) out.push_back(scalar_param(inv->sample(rng.uniform())));
        return out;
    };
    prior.pdf = [s, kappa](const ParamVec& t) {
        return tapered_uniform_pdf(t(0).real(), s, kappa);
    };
    prior.support_lo = VectorXd::Constant(1, -s);
    prior.support_hi = VectorXd::Constant(1, s);
    return prior;
}

Prior make_beta_prior(double s1, double s2, double theta_min, double theta_max) {
    if (!(s1 > 0.0) || !(s2 > 0.0)) throw InvalidInput("beta prior: shape parameters positive");
    if (!(theta_min < theta_max)) throw InvalidInput("beta prior: empty support");
    Prior prior;
    prior.sample = [s1, s2, theta_min, theta_max](RngStream& rng, int count) {
        std::vector<ParamVec> out;
        out.reserve(count);
        for (int i = 0; i < count; ++i) {
            const double b = rng.beta(s1, s2);
            out.push_back(scalar_param(theta_min + b * (theta_max - theta_min)));
        }
        return out;
    };
    prior.pdf = [s1, s2, theta_min, theta_max](const ParamVec& t) {
        return beta_prior_pdf(t(0).real(), s1, s2, theta_min, theta_max);
    };
    prior.support_lo = VectorXd::Constant(1, theta_min);
    prior.support_hi = VectorXd::Constant(1, theta_max);
    return prior;
}

Scenario build_doa(const DoaConfig& cfg) {
    if (cfg.m_tx < 1 || cfg.t_rx < 1) throw InvalidInput("build_doa: array sizes must be >= 1");
    if (!(std::abs(cfg.user_aod) < M_PI / 2)) throw InvalidInput("build_doa: |phi| < pi/2");
    if (!(cfg.power > 0.0)) throw InvalidInput("build_doa: power must be positive");

    const int m = cfg.m_tx;
    const int t = cfg.t_rx;
    const complex<double> lambda = cfg.lambda_gain;

    Scenario sc;
    sc.power = cfg.power;
    sc.seed = cfg.seed;
    sc.prior_samples = cfg.prior_samples;
    sc.weights = Weights::ones(1);

    sc.user.H = cfg.beta * steering_vector(m, cfg.user_aod).adjoint();  // 1 x M
    sc.user.noise_var = cfg.power / std::pow(10.0, cfg.comm_snr_db / 10.0);

    sc.sensing.param_dim = 1;
    sc.sensing.param_kind = ParamKind::real;
    sc.sensing.out_dim = t;
    sc.sensing.noise_var = cfg.power / std::pow(10.0, cfg.sens_snr_db / 10.0);
    sc.sensing.g = [m, t, lambda](const ParamVec& theta) -> MatrixXcd {
        const double th = theta(0).real();
        return lambda * (steering_vector(t, th) * steering_vector(m, th).adjoint());
    };
    // dG/dtheta = i pi cos(theta) (T G - G M), i.e. entrywise (row - col) scaling.
    sc.sensing.dg = [m, t, lambda](const ParamVec& theta, int) -> MatrixXcd {
        const double th = theta(0).real();
        const MatrixXcd g = lambda * (steering_vector(t, th) * steering_vector(m, th).adjoint());
        const complex<double> c(0.0, M_PI * std::cos(th));
        MatrixXcd out(t, m);
        for (int r = 0; r < t; ++r)
            for (int cidx = 0; cidx < m; ++cidx)
                out(r, cidx) = c * static_cast<double>(r - cidx) * g(r, cidx);
        return out;
    };

    if (const auto* tu = std::get_if<TaperedUniformPrior>(&cfg.prior)) {
        sc.prior = make_tapered_uniform_prior(tu->s, tu->kappa);
    } else {
        const auto& bp = std::get<BetaPriorSpec>(cfg.prior);
        if (!(bp.s1 > 1.0) || !(bp.s2 > 1.0))
            throw InvalidInput("build_doa: beta shapes must exceed 1 for regularity");
        sc.prior = make_beta_prior(bp.s1, bp.s2, bp.theta_min, bp.theta_max);
    }
    validate(sc);
    return sc;
}

MatrixXcd dft_matrix(int k) {
    MatrixXcd f(k, k);
    const double scale = 1.0 / std::sqrt(static_cast<double>(k));
    for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b)
            f(a, b) = scale * std::polar(1.0, -2.0 * M_PI * a * b / static_cast<double>(k));
    return f;
}

Scenario build_ofdm(const OfdmConfig& cfg) {
    if (cfg.k_sub < 1) throw InvalidInput("build_ofdm: k_sub must be >= 1");
    if (!(cfg.alpha > 0.0)) throw InvalidInput("build_ofdm: alpha must be positive");
    const int k = cfg.k_sub;
    const double power = cfg.power > 0.0 ? cfg.power : static_cast<double>(k);

    // Exponential power delay profile with uniform random phases, normalized
    // to unit energy per sub-carrier.
    RngStream phases = RngStream(cfg.phase_seed).substream(stream::channel_phase);
    VectorXcd h(k);
    for (int i = 0; i < k; ++i)
        h(i) = std::polar(std::exp(-static_cast<double>(i) / (2.0 * cfg.alpha)),
                          phases.uniform(0.0, 2.0 * M_PI));
    h *= std::sqrt(static_cast<double>(k)) / h.norm();

    const MatrixXcd f = dft_matrix(k);

    Scenario sc;
    sc.power = power;
    sc.seed = cfg.seed;
    sc.prior_samples = cfg.prior_samples;
    sc.weights = Weights::ones(k);

    sc.user.H = MatrixXcd((f * h).asDiagonal());
    sc.user.noise_var = power / std::pow(10.0, cfg.comm_snr_db / 10.0);

    auto fmat = std::make_shared<const MatrixXcd>(f);
    sc.sensing.param_dim = k;
    sc.sensing.param_kind = ParamKind::complex;
    sc.sensing.out_dim = k;
    sc.sensing.noise_var = power / std::pow(10.0, cfg.sens_snr_db / 10.0);
    sc.sensing.fim_theta_free = true;
    sc.sensing.diagonal_dg = true;
    sc.sensing.g = [fmat](const ParamVec& theta) -> MatrixXcd {
        return MatrixXcd(((*fmat) * theta).asDiagonal());
    };
    sc.sensing.dg = [fmat](const ParamVec&, int i) -> MatrixXcd {
        return MatrixXcd(fmat->col(i).asDiagonal());
    };

    // The FIM is theta-free, so the prior only feeds the Monte Carlo module;
    // i.i.d. CN(0,1) taps give a closed-form cross-check there.
    sc.prior.sample = [k](RngStream& rng, int count) {
        std::vector<ParamVec> out;
        out.reserve(count);
        for (int i = 0; i < count; ++i) {
            ParamVec v(k);
            for (int j = 0; j < k; ++j) v(j) = rng.cnormal();
            out.push_back(std::move(v));
        }
        return out;
    };
    sc.prior.pdf = [k](const ParamVec& t) {
        return std::exp(-t.squaredNorm() - k * std::log(M_PI));
    };
    sc.prior.support_lo = VectorXd::Constant(k, -kInf);
    sc.prior.support_hi = VectorXd::Constant(k, kInf);
    validate(sc);
    return sc;
}

std::vector<std::pair<double, double>> beam_pattern(const CovMatrix& q, double power,
                                                    std::span<const double> grid) {
    if (!(power > 0.0)) throw InvalidInput("beam_pattern: power must be positive");
    const int m = q.dim();
    std::vector<std::pair<double, double>> out;
    out.reserve(grid.size());
    for (double theta : grid) {
        const VectorXcd v = steering_vector(m, theta);
        const double b = (v.dot(q.matrix() * v)).real() / (static_cast<double>(m) * power);
        out.emplace_back(theta, std::max(b, 0.0));
    }
    return out;
}

}  // namespace cams
