#include "cams/montecarlo.hpp"

#include <algorithm>
#include <cmath>

#include "cams/information.hpp"
#include "cams/parallel.hpp"

namespace cams {

namespace {

// CN(0, q) sampler via the eigenvalue square root; rank-deficient q draws
// stay in the range space by construction.
struct GaussianSampler {
    MatrixXcd a;  // M x r

    explicit GaussianSampler(const CovMatrix& q) {
        Eigen::SelfAdjointEigenSolver<MatrixXcd> es(q.matrix());
        const VectorXd ev = es.eigenvalues();
        const double cut = 1e-14 * std::max(ev.maxCoeff(), 0.0);
        std::vector<int> keep;
        for (int i = 0; i < ev.size(); ++i)
            if (ev(i) > cut) keep.push_back(i);
        a.resize(q.dim(), static_cast<int>(keep.size()));
        for (std::size_t j = 0; j < keep.size(); ++j)
            a.col(static_cast<int>(j)) =
                es.eigenvectors().col(keep[j]) * std::sqrt(ev(keep[j]));
    }

    MatrixXcd draw(int n, RngStream& rng) const {
        MatrixXcd u(a.cols(), n);
        for (int c = 0; c < n; ++c)
            for (int r = 0; r < a.cols(); ++r) u(r, c) = rng.cnormal();
        return a * u;
    }
};

double max_abs_eig(const MatrixXcd& hermitian) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(hermitian, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

bool in_band(const MatrixXcd& q_hat, const CovMatrix& q, double delta) {
    return max_abs_eig(q_hat - q.matrix()) <= delta;
}

}  // namespace

MatrixXcd empirical_covariance(const MatrixXcd& x_seq) {
    if (x_seq.cols() < 1) throw InvalidInput("empirical_covariance: need at least one symbol");
    return (x_seq * x_seq.adjoint()) / static_cast<double>(x_seq.cols());
}

Codebook generate_codebook(const CovMatrix& q, int n, int m_n, double delta, RngStream& rng) {
    if (!(delta > 0.0)) throw InvalidInput("generate_codebook: delta must be positive");
    if (n < 1 || m_n < 1) throw InvalidInput("generate_codebook: n and m_n must be positive");
    const GaussianSampler sampler(q);
    constexpr int kMaxAttempts = 10000;
    Codebook book;
    book.target_q = q;
    book.delta_band = delta;
    book.codewords.reserve(m_n);
    for (int w = 0; w < m_n; ++w) {
        RngStream word_rng = rng.substream({stream::codebook, static_cast<std::uint64_t>(w)});
        bool accepted = false;
        for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
            MatrixXcd x = sampler.draw(n, word_rng);
            if (in_band(empirical_covariance(x), q, delta)) {
                book.codewords.push_back(std::move(x));
                accepted = true;
                break;
            }
        }
        if (!accepted)
            throw BandTooTight("generate_codebook: attempt cap reached; increase delta or n");
    }
    return book;
}

MatrixXcd simulate_sensor(const SensingModel& model, const ParamVec& theta,
                          const MatrixXcd& x_seq, RngStream& rng) {
    const MatrixXcd g = model.g(theta);
    if (g.cols() != x_seq.rows()) throw InvalidInput("simulate_sensor: dimension mismatch");
    MatrixXcd z = g * x_seq;
    const double sd = std::sqrt(model.noise_var);
    for (Eigen::Index c = 0; c < z.cols(); ++c)
        for (Eigen::Index r = 0; r < z.rows(); ++r) z(r, c) += sd * rng.cnormal();
    return z;
}

namespace {

// Least-squares cost seen through sufficient statistics:
//   sum_n ||z_n - G x_n||^2 = z2 - 2 Re tr(B^H G) + tr(G^H G C)
// with B = Z X^H and C = X X^H, so each candidate theta costs O(T M^2).
struct MlSufficientStats {
    MatrixXcd b;  // T x M
    MatrixXcd c;  // M x M
    double z2 = 0.0;

    MlSufficientStats(const MatrixXcd& z_seq, const MatrixXcd& x_seq)
        : b(z_seq * x_seq.adjoint()), c(x_seq * x_seq.adjoint()), z2(z_seq.squaredNorm()) {}

    double cost(const MatrixXcd& g) const {
        const double cross = (b.conjugate().cwiseProduct(g)).sum().real();
        const double quad = ((g * c).cwiseProduct(g.conjugate())).sum().real();
        return z2 - 2.0 * cross + quad;
    }

    double cost_cached(const MatrixXcd& g, const MatrixXcd& gg) const {
        const double cross = (b.conjugate().cwiseProduct(g)).sum().real();
        const double quad = (gg.conjugate().cwiseProduct(c)).sum().real();
        return z2 - 2.0 * cross + quad;
    }
};

// Reusable scalar-parameter grid: candidate G(theta) and G^H G per point.
struct DoaCostGrid {
    std::vector<double> thetas;
    std::vector<MatrixXcd> g;
    std::vector<MatrixXcd> gg;

    DoaCostGrid(const SensingModel& model, const Prior& prior, int grid_size) {
        if (model.param_dim != 1)
            throw InvalidInput("scalar-parameter grid requires param_dim == 1");
        if (grid_size < 2) throw InvalidInput("grid_size must be >= 2");
        const double lo = prior.support_lo(0);
        const double hi = prior.support_hi(0);
        if (!std::isfinite(lo) || !std::isfinite(hi))
            throw InvalidInput("scalar grid search needs a bounded prior support");
        thetas.resize(grid_size);
        g.resize(grid_size);
        gg.resize(grid_size);
        for (int i = 0; i < grid_size; ++i) {
            thetas[i] = lo + (hi - lo) * static_cast<double>(i) /
                                 static_cast<double>(grid_size - 1);
            ParamVec t(1);
            t(0) = thetas[i];
            g[i] = model.g(t);
            gg[i] = g[i].adjoint() * g[i];
        }
    }
};

double golden_refine(const SensingModel& model, const MlSufficientStats& stats, double lo,
                     double hi, int iters) {
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    auto eval = [&](double th) {
        ParamVec t(1);
        t(0) = th;
        return stats.cost(model.g(t));
    };
    double a = lo, b = hi;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = eval(x1), f2 = eval(x2);
    for (int i = 0; i < iters; ++i) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = eval(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = eval(x2);
        }
    }
    return 0.5 * (a + b);
}

double ml_estimate_on_grid(const DoaCostGrid& grid, const SensingModel& model,
                           const MlSufficientStats& stats) {
    const int n = static_cast<int>(grid.thetas.size());
    int best = 0;
    double best_cost = kInf;
    for (int i = 0; i < n; ++i) {
        const double c = stats.cost_cached(grid.g[i], grid.gg[i]);
        if (c < best_cost) {
            best_cost = c;
            best = i;
        }
    }
    const double step = grid.thetas[1] - grid.thetas[0];
    const double lo = std::max(grid.thetas.front(), grid.thetas[best] - step);
    const double hi = std::min(grid.thetas.back(), grid.thetas[best] + step);
    return golden_refine(model, stats, lo, hi, 40);
}

}  // namespace

double ml_estimate_doa(const MatrixXcd& z_seq, const MatrixXcd& x_seq,
                       const SensingModel& model, const Prior& prior, int grid_size) {
    const DoaCostGrid grid(model, prior, grid_size);
    return ml_estimate_on_grid(grid, model, MlSufficientStats(z_seq, x_seq));
}

MmseEstimate mmse_estimate_doa(const MatrixXcd& z_seq, const MatrixXcd& x_seq,
                               const SensingModel& model, const Prior& prior, int grid_size) {
    if (!prior.pdf) throw InvalidInput("mmse_estimate_doa: prior pdf required");
    const DoaCostGrid grid(model, prior, grid_size);
    const MlSufficientStats stats(z_seq, x_seq);
    const int n = static_cast<int>(grid.thetas.size());
    std::vector<double> loglike(n);
    double max_ll = -kInf;
    for (int i = 0; i < n; ++i) {
        loglike[i] = -stats.cost_cached(grid.g[i], grid.gg[i]) / model.noise_var;
        max_ll = std::max(max_ll, loglike[i]);
    }
    double num = 0.0, den = 0.0;
    for (int i = 0; i < n; ++i) {
        ParamVec t(1);
        t(0) = grid.thetas[i];
        const double trap = (i == 0 || i == n - 1) ? 0.5 : 1.0;
        const double w = trap * std::exp(loglike[i] - max_ll) * prior.pdf(t);
        num += w * grid.thetas[i];
        den += w;
    }
    MmseEstimate out;
    if (!(den > 0.0) || !std::isfinite(num / den)) {
        out.theta = ml_estimate_on_grid(grid, model, stats);
        out.ml_fallback = true;
        return out;
    }
    out.theta = num / den;
    return out;
}

VectorXcd ls_estimate_ofdm(const MatrixXcd& z_seq, const MatrixXcd& x_seq, int k) {
    if (x_seq.rows() != k || z_seq.rows() != k || x_seq.cols() != z_seq.cols())
        throw InvalidInput("ls_estimate_ofdm: dimension mismatch");
    const VectorXd d = x_seq.cwiseAbs2().rowwise().sum();
    if ((d.array() <= 0.0).any())
        throw UnexcitedSubcarrier("ls_estimate_ofdm: a sub-carrier carries no power");
    VectorXcd s(k);
    for (int r = 0; r < k; ++r) s(r) = x_seq.row(r).conjugate().cwiseProduct(z_seq.row(r)).sum();
    // theta_hat = F^H (s ./ d): the normal matrix diagonalizes in frequency.
    const VectorXcd phi = s.cwiseQuotient(d.cast<std::complex<double>>());
    MatrixXcd f(k, k);
    const double scale = 1.0 / std::sqrt(static_cast<double>(k));
    for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b)
            f(a, b) = scale * std::polar(1.0, -2.0 * M_PI * a * b / static_cast<double>(k));
    return f.adjoint() * phi;
}

InfoDensityStats empirical_info_density_mean(const UserChannel& user, const CovMatrix& q,
                                             int n, int trials, RngStream& rng) {
    if (n < 1 || trials < 1)
        throw InvalidInput("empirical_info_density_mean: n and trials must be positive");
    validate(user);
    const GaussianSampler xs(q);
    const Eigen::Index l = user.H.rows();
    const MatrixXcd sy = user.noise_var * MatrixXcd::Identity(l, l) +
                         user.H * q.matrix() * user.H.adjoint();
    const Eigen::LLT<MatrixXcd> llt(hermitian_part(sy));
    double log_det = 0.0;
    for (Eigen::Index i = 0; i < l; ++i) log_det += 2.0 * std::log(llt.matrixLLT()(i, i).real());
    const double offset = log_det - static_cast<double>(l) * std::log(user.noise_var);
    const double sd = std::sqrt(user.noise_var);

    InfoDensityStats stats;
    stats.per_trial.resize(trials);
    const std::uint64_t base = rng.key();
    parallel_for(trials, [&](std::ptrdiff_t t) {
        RngStream local =
            RngStream(base).substream({stream::info_density, static_cast<std::uint64_t>(t)});
        std::vector<double> vals(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            const MatrixXcd x = xs.draw(1, local);
            VectorXcd y = user.H * x.col(0);
            for (Eigen::Index r = 0; r < l; ++r) y(r) += sd * local.cnormal();
            const double quad = y.dot(llt.solve(y)).real();
            const VectorXcd res = y - user.H * x.col(0);
            vals[static_cast<std::size_t>(i)] =
                offset + quad - res.squaredNorm() / user.noise_var;
        }
        stats.per_trial[static_cast<std::size_t>(t)] =
            pairwise_sum(vals) / static_cast<double>(n);
    });
    stats.mean = pairwise_sum(stats.per_trial) / static_cast<double>(trials);
    if (trials > 1) {
        double ss = 0.0;
        for (double m : stats.per_trial) ss += (m - stats.mean) * (m - stats.mean);
        stats.std_error = std::sqrt(ss / (static_cast<double>(trials) *
                                          static_cast<double>(trials - 1)));
    }
    return stats;
}

double concentration_out_rate(const CovMatrix& q, int n, double delta, int trials,
                              RngStream& rng) {
    if (!(delta > 0.0)) throw InvalidInput("concentration_out_rate: delta must be positive");
    const GaussianSampler sampler(q);
    std::vector<double> out(static_cast<std::size_t>(trials));
    const std::uint64_t base = rng.key();
    parallel_for(trials, [&](std::ptrdiff_t t) {
        RngStream local =
            RngStream(base).substream({stream::band_check, static_cast<std::uint64_t>(t)});
        const MatrixXcd x = sampler.draw(n, local);
        out[static_cast<std::size_t>(t)] = in_band(empirical_covariance(x), q, delta) ? 0.0 : 1.0;
    });
    return pairwise_sum(out) / static_cast<double>(trials);
}

McSummary run_mse_experiment(const Scenario& scenario, const CovMatrix& q,
                             const McRunConfig& cfg, std::vector<TrialRecord>* records) {
    validate(scenario);
    if (cfg.n_block < 1 || cfg.trials < 1 || cfg.codebook_size < 1)
        throw InvalidInput("run_mse_experiment: sizes must be positive");

    McEstimator est = cfg.estimator;
    if (est == McEstimator::automatic)
        est = scenario.sensing.param_kind == ParamKind::complex ? McEstimator::ls
                                                                : McEstimator::ml;
    const bool scalar = scenario.sensing.param_dim == 1 &&
                        scenario.sensing.param_kind == ParamKind::real;
    if ((est == McEstimator::ml || est == McEstimator::mmse) && !scalar)
        throw InvalidInput("run_mse_experiment: ml/mmse need a scalar real parameter");

    RngStream root(scenario.seed);
    const double lambda_max = max_abs_eig(q.matrix());
    const double delta_abs = cfg.delta_band * lambda_max;
    RngStream cb_rng = root.substream(stream::codebook);
    const Codebook book = generate_codebook(q, cfg.n_block, cfg.codebook_size, delta_abs, cb_rng);

    // Per-codeword empirical covariances drive both the simulation and the
    // predicted risk, matching the conditional structure of the bound.
    std::vector<CovMatrix> q_hats;
    q_hats.reserve(book.codewords.size());
    for (const MatrixXcd& x : book.codewords)
        q_hats.push_back(CovMatrix(empirical_covariance(x)));

    std::shared_ptr<const DoaCostGrid> grid;
    if (est == McEstimator::ml || est == McEstimator::mmse)
        grid = std::make_shared<DoaCostGrid>(scenario.sensing, scenario.prior, cfg.grid_size);

    std::vector<double> sq_errs(static_cast<std::size_t>(cfg.trials));
    std::vector<double> preds(static_cast<std::size_t>(cfg.trials));
    std::vector<TrialRecord> recs(records != nullptr ? cfg.trials : 0);
    const std::uint64_t base = root.key();
    const VectorXd& weights = scenario.weights.a;

    parallel_for(cfg.trials, [&](std::ptrdiff_t t) {
        RngStream trial_rng =
            RngStream(base).substream({stream::trial, static_cast<std::uint64_t>(t)});
        RngStream prior_rng = trial_rng.substream(1);
        RngStream noise_rng = trial_rng.substream(2);
        const ParamVec theta = scenario.prior.sample(prior_rng, 1).front();
        const int w = static_cast<int>(t % book.codewords.size());
        const MatrixXcd& x = book.codewords[static_cast<std::size_t>(w)];
        const MatrixXcd z = simulate_sensor(scenario.sensing, theta, x, noise_rng);

        ParamVec theta_hat(theta.size());
        switch (est) {
            case McEstimator::ls:
                theta_hat = ls_estimate_ofdm(z, x, scenario.sensing.param_dim);
                break;
            case McEstimator::mmse:
                theta_hat(0) = mmse_estimate_doa(z, x, scenario.sensing, scenario.prior,
                                                 cfg.grid_size)
                                   .theta;
                break;
            case McEstimator::ml:
            default:
                theta_hat(0) =
                    ml_estimate_on_grid(*grid, scenario.sensing, MlSufficientStats(z, x));
                break;
        }
        double err = 0.0;
        for (Eigen::Index i = 0; i < theta.size(); ++i)
            err += weights(i) * std::norm(theta_hat(i) - theta(i));
        sq_errs[static_cast<std::size_t>(t)] = err;

        // Conditional CRB at this trial's parameter and codeword covariance.
        const FimMatrix j = conditional_fim(scenario.sensing, theta,
                                            q_hats[static_cast<std::size_t>(w)]);
        Eigen::SelfAdjointEigenSolver<MatrixXcd> es(j.entries);
        const VectorXd ev = es.eigenvalues();
        const double tr = std::max(ev.sum(), 0.0);
        double crb = kInf;
        if (tr > 0.0 && ev.minCoeff() > 1e-12 * tr / static_cast<double>(j.entries.rows())) {
            const MatrixXcd inv = es.eigenvectors() * ev.cwiseInverse().asDiagonal() *
                                  es.eigenvectors().adjoint();
            crb = (weights.array() * inv.diagonal().real().array()).sum();
        }
        preds[static_cast<std::size_t>(t)] = crb;

        if (records != nullptr) {
            TrialRecord& r = recs[static_cast<std::size_t>(t)];
            r.trial = static_cast<int>(t);
            r.theta = theta;
            r.theta_hat = theta_hat;
            r.sq_err = err;
        }
    });

    McSummary summary;
    summary.n_block = cfg.n_block;
    summary.n_mse_empirical =
        static_cast<double>(cfg.n_block) * pairwise_sum(sq_errs) / cfg.trials;
    summary.ecrb_predicted = pairwise_sum(preds) / cfg.trials;
    summary.ratio = summary.n_mse_empirical / summary.ecrb_predicted;
    RngStream conc_rng = root.substream(stream::band_check);
    summary.concentration_rate =
        concentration_out_rate(q, cfg.n_block, delta_abs, cfg.concentration_trials, conc_rng);
    const double dp = cfg.delta_band;
    summary.chebyshev_bound = 1.0 / (dp * dp * static_cast<double>(cfg.n_block));
    switch (est) {
        case McEstimator::ls: summary.estimator = "ls"; break;
        case McEstimator::mmse: summary.estimator = "mmse"; break;
        default: summary.estimator = "ml"; break;
    }
    if (records != nullptr) *records = std::move(recs);
    return summary;
}

}  // namespace cams
