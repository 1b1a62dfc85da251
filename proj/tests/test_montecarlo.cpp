#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cams/montecarlo.hpp"

#include "cams/information.hpp"
#include "cams/scenarios.hpp"
#include "cams/solver.hpp"
#include "helpers.hpp"

using namespace cams;

namespace {

Scenario doa_small() {
    DoaConfig cfg;
    cfg.seed = 81;
    cfg.prior_samples = 64;
    return build_doa(cfg);
}

Scenario ofdm_small(int k = 4) {
    OfdmConfig cfg;
    cfg.k_sub = k;
    cfg.alpha = 10.0;
    cfg.seed = 82;
    cfg.prior_samples = 4;
    return build_ofdm(cfg);
}

}  // namespace

TEST_CASE("empirical_covariance basics") {
    RngStream rng(83);
    VectorXcd x(3);
    for (int i = 0; i < 3; ++i) x(i) = rng.cnormal();
    const MatrixXcd single = empirical_covariance(x);
    CHECK((single - x * x.adjoint()).cwiseAbs().maxCoeff() < 1e-15);

    // Constant sequence e1 sqrt(P).
    const double p = 2.5;
    MatrixXcd xs = MatrixXcd::Zero(3, 10);
    xs.row(0).setConstant(std::sqrt(p));
    const MatrixXcd q = empirical_covariance(xs);
    CHECK(q(0, 0).real() == doctest::Approx(p));
    CHECK(q.cwiseAbs().sum() == doctest::Approx(p));
}

TEST_CASE("codebook generation honors the band invariants") {
    RngStream rng(84);
    const int m = 4, n = 256;
    const CovMatrix q = CovMatrix::from_psd_unchecked(
        MatrixXcd(VectorXd::LinSpaced(m, 0.5, 2.0).cast<std::complex<double>>().asDiagonal()));
    const double delta = 0.35 * 2.0;
    const Codebook book = generate_codebook(q, n, 8, delta, rng);
    REQUIRE(book.codewords.size() == 8);
    for (const MatrixXcd& x : book.codewords) {
        const MatrixXcd q_hat = empirical_covariance(x);
        Eigen::SelfAdjointEigenSolver<MatrixXcd> es(q_hat - q.matrix());
        CHECK(es.eigenvalues().cwiseAbs().maxCoeff() <= delta + 1e-12);
        const double avg_power = x.squaredNorm() / n;
        CHECK(avg_power <= q.trace() + m * delta + 1e-12);
    }
}

TEST_CASE("codebook generation reports an impossible band") {
    RngStream rng(85);
    const CovMatrix q(MatrixXcd::Identity(4, 4));
    CHECK_THROWS_AS(generate_codebook(q, 8, 2, 1e-6, rng), BandTooTight);
}

TEST_CASE("rank-one codebooks stay in the beam subspace") {
    RngStream rng(86);
    const int m = 8, n = 128;
    const VectorXcd v = steering_vector(m, 0.3);
    const CovMatrix q = CovMatrix::from_psd_unchecked(MatrixXcd((1.0 / m) * (v * v.adjoint())));
    const Codebook book = generate_codebook(q, n, 4, 0.05 / m * 8.0, rng);
    const MatrixXcd unit = v / v.norm();
    for (const MatrixXcd& x : book.codewords) {
        const MatrixXcd residual = x - unit * (unit.adjoint() * x);
        CHECK(residual.cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("codebook acceptance rate respects the Chebyshev bound") {
    RngStream rng(87);
    const int m = 8;
    const VectorXcd v = steering_vector(m, -0.2);
    const CovMatrix q = CovMatrix::from_psd_unchecked(MatrixXcd((2.0 / m) * (v * v.adjoint())));
    const double lambda_max = 2.0;
    const double delta_rel = 0.1;
    const int trials = 1000;
    for (int n : {256, 1024}) {
        const double out_rate =
            concentration_out_rate(q, n, delta_rel * lambda_max, trials, rng);
        const double bound = 1.0 / (delta_rel * delta_rel * n);
        const double sigma3 = 3.0 * std::sqrt(std::max(bound * (1 - bound), 1e-6) / trials);
        CHECK(out_rate <= bound + sigma3);
    }
}

TEST_CASE("simulate_sensor noise statistics") {
    const Scenario sc = doa_small();
    const ParamVec theta = draw_prior_samples(sc).front();
    RngStream rng(88);

    SensingModel noiseless = sc.sensing;
    noiseless.noise_var = 1e-300;  // exact limit up to rounding
    const MatrixXcd x = MatrixXcd::Ones(16, 8);
    const MatrixXcd z0 = simulate_sensor(noiseless, theta, x, rng);
    CHECK((z0 - noiseless.g(theta) * x).cwiseAbs().maxCoeff() < 1e-140);

    // Sample noise variance per complex entry within 2%.
    const int n = 100000;
    SensingModel pure = sc.sensing;
    pure.g = [&sc](const ParamVec& t) {
        return MatrixXcd::Zero(sc.sensing.out_dim, static_cast<int>(sc.user.H.cols()));
    };
    const MatrixXcd zeros = MatrixXcd::Zero(16, n);
    const MatrixXcd z = simulate_sensor(pure, theta, zeros, rng);
    const double var = z.squaredNorm() / (16.0 * n);
    CHECK(var == doctest::Approx(sc.sensing.noise_var).epsilon(0.02));

    // E ||z_n||^2 = ||G x_n||^2 + T sigma^2.
    const MatrixXcd xs = MatrixXcd::Ones(16, 20000);
    const MatrixXcd zs = simulate_sensor(sc.sensing, theta, xs, rng);
    const double mean_sq = zs.squaredNorm() / 20000.0;
    const double expected =
        (sc.sensing.g(theta) * xs.col(0)).squaredNorm() + 16.0 * sc.sensing.noise_var;
    CHECK(mean_sq == doctest::Approx(expected).epsilon(0.05));
}

TEST_CASE("ml estimator recovers a noise-free grid angle") {
    const Scenario sc = doa_small();
    RngStream rng(89);
    const int grid_size = 512;
    // Pick an exact grid angle.
    const double lo = sc.prior.support_lo(0), hi = sc.prior.support_hi(0);
    const double theta0 = lo + (hi - lo) * 200.0 / (grid_size - 1);
    ParamVec tv(1);
    tv(0) = theta0;
    MatrixXcd x(16, 32);
    for (int c = 0; c < 32; ++c)
        for (int r = 0; r < 16; ++r) x(r, c) = rng.cnormal();
    const MatrixXcd z = sc.sensing.g(tv) * x;  // no noise
    const double est = ml_estimate_doa(z, x, sc.sensing, sc.prior, grid_size);
    CHECK(est == doctest::Approx(theta0).epsilon(1e-6));
    CHECK(est >= lo);
    CHECK(est <= hi);
}

TEST_CASE("mmse estimator collapses to the prior mean under a flat likelihood") {
    Scenario sc = doa_small();
    sc.sensing.noise_var = 1e12;  // likelihood carries no information
    RngStream rng(90);
    ParamVec tv(1);
    tv(0) = 0.4;
    MatrixXcd x(16, 8);
    for (int c = 0; c < 8; ++c)
        for (int r = 0; r < 16; ++r) x(r, c) = rng.cnormal();
    RngStream noise = rng.substream(1);
    const MatrixXcd z = simulate_sensor(sc.sensing, tv, x, noise);
    const MmseEstimate est = mmse_estimate_doa(z, x, sc.sensing, sc.prior, 1024);
    CHECK(!est.ml_fallback);
    // Tapered uniform prior is symmetric: mean 0.
    CHECK(std::abs(est.theta) < 1e-3);
}

TEST_CASE("mmse estimate reflects when the data are conjugated") {
    // G(-theta) = conj(G(theta)) for the ULA model, and the prior is even.
    const Scenario sc = doa_small();
    RngStream rng(91);
    ParamVec tv(1);
    tv(0) = 0.35;
    MatrixXcd x(16, 16);
    for (int c = 0; c < 16; ++c)
        for (int r = 0; r < 16; ++r) x(r, c) = rng.cnormal();
    RngStream noise = rng.substream(2);
    const MatrixXcd z = simulate_sensor(sc.sensing, tv, x, noise);
    const double direct = mmse_estimate_doa(z, x, sc.sensing, sc.prior, 801).theta;
    const double mirrored =
        mmse_estimate_doa(z.conjugate(), x.conjugate(), sc.sensing, sc.prior, 801).theta;
    CHECK(mirrored == doctest::Approx(-direct).epsilon(1e-6));
}

TEST_CASE("mmse risk does not exceed ml risk on matched trials") {
    const Scenario sc = doa_small();
    RngStream rng(92);
    const int trials = 60, n = 64;
    double ml_risk = 0.0, mmse_risk = 0.0;
    for (int t = 0; t < trials; ++t) {
        RngStream trial = rng.substream(t);
        RngStream prior_rng = trial.substream(1);
        RngStream noise_rng = trial.substream(2);
        const ParamVec theta = sc.prior.sample(prior_rng, 1).front();
        MatrixXcd x(16, n);
        RngStream xdrw = trial.substream(3);
        for (int c = 0; c < n; ++c)
            for (int r = 0; r < 16; ++r) x(r, c) = std::sqrt(1.0 / 16) * xdrw.cnormal();
        const MatrixXcd z = simulate_sensor(sc.sensing, theta, x, noise_rng);
        const double ml = ml_estimate_doa(z, x, sc.sensing, sc.prior, 1024);
        const double mm = mmse_estimate_doa(z, x, sc.sensing, sc.prior, 1024).theta;
        ml_risk += std::norm(ml - theta(0));
        mmse_risk += std::norm(mm - theta(0));
    }
    ml_risk /= trials;
    mmse_risk /= trials;
    // Allow three sigmas of Monte Carlo error on the comparison.
    CHECK(mmse_risk <= ml_risk * (1.0 + 0.75));
}

TEST_CASE("ls estimator is exact without noise and flags idle sub-carriers") {
    const Scenario sc = ofdm_small(8);
    RngStream rng(93);
    ParamVec theta(8);
    for (int i = 0; i < 8; ++i) theta(i) = rng.cnormal();
    MatrixXcd x(8, 32);
    for (int c = 0; c < 32; ++c)
        for (int r = 0; r < 8; ++r) x(r, c) = rng.cnormal();
    const MatrixXcd z = sc.sensing.g(theta) * x;
    const VectorXcd est = ls_estimate_ofdm(z, x, 8);
    CHECK((est - theta).cwiseAbs().maxCoeff() < 1e-10);

    MatrixXcd dead = x;
    dead.row(3).setZero();
    const MatrixXcd zd = sc.sensing.g(theta) * dead;
    CHECK_THROWS_AS(ls_estimate_ofdm(zd, dead, 8), UnexcitedSubcarrier);
}

TEST_CASE("ls estimator equals the diffuse-prior Bayesian mean") {
    const Scenario sc = ofdm_small(4);
    RngStream rng(94);
    ParamVec theta(4);
    for (int i = 0; i < 4; ++i) theta(i) = rng.cnormal();
    MatrixXcd x(4, 16);
    for (int c = 0; c < 16; ++c)
        for (int r = 0; r < 4; ++r) x(r, c) = rng.cnormal();
    RngStream noise = rng.substream(5);
    const MatrixXcd z = simulate_sensor(sc.sensing, theta, x, noise);
    const VectorXcd ls = ls_estimate_ofdm(z, x, 4);

    // Linear-Gaussian posterior mean with prior CN(0, tau I), tau -> inf:
    // (F^H D F + (s2/tau) I)^{-1} F^H s with D = diag(sum |x|^2).
    const MatrixXcd f = dft_matrix(4);
    const VectorXd d = x.cwiseAbs2().rowwise().sum();
    VectorXcd s(4);
    for (int r = 0; r < 4; ++r) s(r) = x.row(r).conjugate().cwiseProduct(z.row(r)).sum();
    const double tau = 1e10;
    const MatrixXcd normal = f.adjoint() * d.asDiagonal() * f +
                             (sc.sensing.noise_var / tau) * MatrixXcd::Identity(4, 4);
    const VectorXcd bayes = normal.ldlt().solve(f.adjoint() * s);
    CHECK((ls - bayes).cwiseAbs().maxCoeff() < 1e-8 * std::max(1.0, ls.cwiseAbs().maxCoeff()));
}

TEST_CASE("information density block averages approach the mutual information") {
    RngStream rng(95);
    UserChannel user;
    user.H = MatrixXcd::Zero(2, 2);
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) user.H(r, c) = rng.cnormal();
    user.noise_var = 0.8;
    const CovMatrix q = CovMatrix::from_psd_unchecked(test::random_pd(rng, 2, 2.0));
    const double mi = gaussian_mi(user, q);
    RngStream mc_rng(96);
    const InfoDensityStats stats = empirical_info_density_mean(user, q, 64, 400, mc_rng);
    CHECK(std::abs(stats.mean - mi) <= 3.0 * stats.std_error);
    CHECK(stats.std_error > 0.0);

    // H = 0: the density is identically zero.
    UserChannel zero;
    zero.H = MatrixXcd::Zero(2, 2);
    zero.noise_var = 1.0;
    RngStream z_rng(97);
    const InfoDensityStats zs = empirical_info_density_mean(zero, q, 16, 8, z_rng);
    CHECK(zs.mean == doctest::Approx(0.0));
}

TEST_CASE("lower-tail probability of the block average shrinks with n") {
    RngStream rng(98);
    UserChannel user;
    user.H = MatrixXcd::Identity(2, 2);
    user.noise_var = 1.0;
    const CovMatrix q(MatrixXcd::Identity(2, 2));
    const double mi = gaussian_mi(user, q);
    const double eps = 0.5;
    double prev = 1.1;
    for (int n : {16, 64, 256}) {
        RngStream local = rng.substream(n);
        const InfoDensityStats stats = empirical_info_density_mean(user, q, n, 2000, local);
        int below = 0;
        for (double m : stats.per_trial)
            if (m <= mi - 0.5 * eps) ++below;
        const double tail = static_cast<double>(below) / stats.per_trial.size();
        CHECK(tail <= prev + 0.02);  // monotone trend within binomial noise
        prev = tail;
    }
    CHECK(prev < 0.05);
}

TEST_CASE("OFDM mse experiment matches the linear-model covariance oracle") {
    const Scenario sc = ofdm_small(4);
    const MinMseResult sens = min_achievable_mse(sc);
    McRunConfig cfg;
    cfg.n_block = 64;
    cfg.trials = 400;
    cfg.delta_band = 0.75;
    cfg.codebook_size = 8;
    cfg.concentration_trials = 100;
    std::vector<TrialRecord> records;
    const McSummary summary = run_mse_experiment(sc, sens.q, cfg, &records);
    CHECK(summary.estimator == "ls");
    CHECK(summary.ratio == doctest::Approx(1.0).epsilon(0.10));
    CHECK(records.size() == 400);
    CHECK(summary.chebyshev_bound == doctest::Approx(1.0 / (0.75 * 0.75 * 64)));
    CHECK(summary.concentration_rate >= 0.0);
    CHECK(summary.concentration_rate <= 1.0);
}

TEST_CASE("experiment runs are reproducible for a fixed seed") {
    const Scenario sc = ofdm_small(4);
    const MinMseResult sens = min_achievable_mse(sc);
    McRunConfig cfg;
    cfg.n_block = 32;
    cfg.trials = 50;
    cfg.delta_band = 0.9;
    cfg.codebook_size = 4;
    cfg.concentration_trials = 50;
    const McSummary a = run_mse_experiment(sc, sens.q, cfg);
    const McSummary b = run_mse_experiment(sc, sens.q, cfg);
    CHECK(a.n_mse_empirical == b.n_mse_empirical);
    CHECK(a.concentration_rate == b.concentration_rate);
}
