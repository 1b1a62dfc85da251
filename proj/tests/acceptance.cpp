// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one pass/fail line per criterion. Exit code is the number of
// failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "cams/config.hpp"
#include "cams/montecarlo.hpp"
#include "cams/reference.hpp"
#include "helpers.hpp"

using namespace cams;

namespace {

int g_failures = 0;

void criterion(int number, const std::string& name, const std::function<bool(std::string&)>& fn) {
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
        ok = fn(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %2d [%s] %s (%s, %.1fs)\n", number, ok ? "PASS" : "FAIL",
                name.c_str(), detail.c_str(), secs);
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

Scenario paper_doa_tapered(double phi = 0.0) {
    DoaConfig cfg;
    cfg.m_tx = 16;
    cfg.t_rx = 16;
    cfg.user_aod = phi;
    cfg.comm_snr_db = 15.0;
    cfg.sens_snr_db = -25.0;
    cfg.prior = TaperedUniformPrior{M_PI / 2, 0.7};
    cfg.prior_samples = 512;
    cfg.seed = 2024;
    return build_doa(cfg);
}

Scenario paper_doa_beta(double phi) {
    DoaConfig cfg;
    cfg.m_tx = 16;
    cfg.t_rx = 16;
    cfg.user_aod = phi;
    cfg.comm_snr_db = 15.0;
    cfg.sens_snr_db = -25.0;
    cfg.prior = BetaPriorSpec{5.5, 15.0, -M_PI / 2, M_PI / 2};
    cfg.prior_samples = 512;
    cfg.seed = 2025;
    return build_doa(cfg);
}

Scenario paper_ofdm(double alpha, int k = 64) {
    OfdmConfig cfg;
    cfg.k_sub = k;
    cfg.alpha = alpha;
    cfg.comm_snr_db = 10.0;
    cfg.sens_snr_db = -10.0;
    cfg.phase_seed = 11;
    cfg.seed = 2026;
    cfg.prior_samples = 64;
    return build_ofdm(cfg);
}

bool curve_shape_ok(const SweepResult& sweep, std::string& detail) {
    for (std::size_t i = 1; i < sweep.points.size(); ++i) {
        if (sweep.points[i].rate_bits < sweep.points[i - 1].rate_bits - 1e-6) {
            detail = "rate decreased at point " + std::to_string(i);
            return false;
        }
    }
    // Midpoint concavity: rate(mid) at least the chord in log-delta.
    for (std::size_t i = 1; i + 1 < sweep.points.size(); ++i) {
        const double d0 = sweep.deltas[i - 1], d1 = sweep.deltas[i], d2 = sweep.deltas[i + 1];
        const double t = (d1 - d0) / (d2 - d0);
        const double chord =
            (1 - t) * sweep.points[i - 1].rate_bits + t * sweep.points[i + 1].rate_bits;
        if (sweep.points[i].rate_bits < chord - 1e-5) {
            detail = "chord test failed at point " + std::to_string(i);
            return false;
        }
    }
    return true;
}

}  // namespace

int main() {
    std::printf("acceptance suite: capacity-MSE toolkit\n");

    criterion(1, "OFDM sensing-optimal endpoint (closed form)", [](std::string& detail) {
        for (int k : {4, 16, 64}) {
            OfdmConfig cfg;
            cfg.k_sub = k;
            cfg.alpha = 10.0;
            cfg.seed = 91;
            cfg.prior_samples = 4;
            const Scenario sc = build_ofdm(cfg);
            const MinMseResult r = min_achievable_mse(sc);
            const double expected = sc.sensing.noise_var * k * k / sc.power;
            const double rel = std::abs(r.delta_min - expected) / expected;
            if (r.status != SolveStatus::optimal || rel > 1e-6) {
                detail = "K=" + std::to_string(k) + " rel err " + format_full(rel);
                return false;
            }
            const VectorXd p = r.q.matrix().diagonal().real();
            for (int i = 0; i < k; ++i)
                if (std::abs(p(i) - sc.power / k) > 1e-6 * (sc.power / k)) {
                    detail = "unequal power at K=" + std::to_string(k);
                    return false;
                }
        }
        detail = "delta_min = sigma^2 K^2 / P for K in {4,16,64}";
        return true;
    });

    criterion(2, "OFDM FIM identity vs DFT closed form", [](std::string& detail) {
        const Scenario sc = paper_ofdm(10.0, 16);
        const MatrixXcd f = dft_matrix(16);
        RngStream rng(92);
        const ParamVec theta = draw_prior_samples(sc).front();
        double worst = 0.0;
        for (int trial = 0; trial < 20; ++trial) {
            const MatrixXcd q = test::random_psd(rng, 16, sc.power);
            const MatrixXcd j =
                conditional_fim(sc.sensing, theta, CovMatrix::from_psd_unchecked(q)).entries;
            MatrixXcd dq = MatrixXcd::Zero(16, 16);
            dq.diagonal() = q.diagonal();
            const MatrixXcd expected = (f.adjoint() * dq * f) / sc.sensing.noise_var;
            worst = std::max(worst, (j - expected).cwiseAbs().maxCoeff());
        }
        detail = "max entry error " + format_full(worst);
        return worst <= 1e-10;
    });

    criterion(3, "DoA FIM matches the scan-rate closed form", [](std::string& detail) {
        const Scenario sc = paper_doa_tapered();
        RngStream rng(93);
        const MatrixXd t_pos = VectorXd::LinSpaced(16, 0, 15).asDiagonal();
        const MatrixXd m_pos = VectorXd::LinSpaced(16, 0, 15).asDiagonal();
        double worst = 0.0;
        for (int trial = 0; trial < 50; ++trial) {
            const double theta = rng.uniform(-M_PI / 2 * 0.999, M_PI / 2 * 0.999);
            const MatrixXcd q = test::random_psd(rng, 16, sc.power);
            ParamVec tv(1);
            tv(0) = theta;
            const double engine =
                conditional_fim(sc.sensing, tv, CovMatrix::from_psd_unchecked(q))
                    .entries(0, 0)
                    .real();
            const MatrixXcd g = steering_vector(16, theta) * steering_vector(16, theta).adjoint();
            const MatrixXcd gt = t_pos * g - g * m_pos;
            const double closed = 2.0 * M_PI * M_PI / sc.sensing.noise_var *
                                  std::cos(theta) * std::cos(theta) *
                                  (gt * q * gt.adjoint()).trace().real();
            worst = std::max(worst, std::abs(engine - closed) / closed);
        }
        detail = "max rel err " + format_full(worst);
        return worst <= 1e-10;
    });

    criterion(4, "communication-only capacity (beamforming)", [](std::string& detail) {
        const Scenario sc = paper_doa_tapered();
        const TradeoffPoint pt = capacity_only(sc);
        const double expected = std::log2(1.0 + 16.0 * std::pow(10.0, 1.5));
        const double err = std::abs(pt.rate_bits - expected);
        detail = "rate " + format_full(pt.rate_bits) + " bits, err " + format_full(err);
        return err <= 1e-9;
    });

    // Criteria 5, 6, 9, and 13 share the sweeps below.
    SolverConfig cfg;
    const Scenario doa = paper_doa_tapered();
    SweepResult doa_sweep;
    criterion(5, "BCRB bound strictly above ECRB curve (DoA), equal on OFDM",
              [&](std::string& detail) {
                  doa_sweep = sweep_curve(doa, 8, cfg, true);
                  double max_gap = 0.0;
                  for (std::size_t i = 0; i < doa_sweep.points.size(); ++i) {
                      if (doa_sweep.points[i].status != SolveStatus::optimal ||
                          doa_sweep.bcrb_points[i].status != SolveStatus::optimal) {
                          detail = "non-optimal sweep point " + std::to_string(i);
                          return false;
                      }
                      const double gap = doa_sweep.bcrb_points[i].rate_bits -
                                         doa_sweep.points[i].rate_bits;
                      if (gap < -1e-6) {
                          detail = "bound below curve at point " + std::to_string(i);
                          return false;
                      }
                      if (i > 0 && i + 1 < doa_sweep.points.size())
                          max_gap = std::max(max_gap, gap);
                  }
                  if (max_gap <= cfg.kkt_tol) {
                      detail = "no strict interior gap (max " + format_full(max_gap) + ")";
                      return false;
                  }
                  // OFDM: theta-free FIM, the two formulations coincide.
                  const Scenario ofdm = paper_ofdm(10.0);
                  const SweepResult os = sweep_curve(ofdm, 4, cfg, true);
                  for (std::size_t i = 0; i < os.points.size(); ++i) {
                      const double rel = std::abs(os.points[i].rate_bits -
                                                  os.bcrb_points[i].rate_bits) /
                                         std::max(os.points[i].rate_bits, 1e-12);
                      if (rel > 1e-6) {
                          detail = "OFDM curves differ by " + format_full(rel);
                          return false;
                      }
                  }
                  detail = "max interior gap " + format_full(max_gap) + " bits";
                  return true;
              });

    const Scenario ofdm_sel = paper_ofdm(10.0);
    SweepResult ofdm_sweep;
    criterion(6, "curve shape: nondecreasing and concave", [&](std::string& detail) {
        ofdm_sweep = sweep_curve(ofdm_sel, 8, cfg, false);
        if (!curve_shape_ok(doa_sweep, detail)) {
            detail = "DoA sweep: " + detail;
            return false;
        }
        if (!curve_shape_ok(ofdm_sweep, detail)) {
            detail = "OFDM sweep: " + detail;
            return false;
        }
        detail = "both sweeps monotone and concave";
        return true;
    });

    criterion(7, "Lemma 1 property suite (monotone, convex)", [&](std::string& detail) {
        RngStream rng(97);
        double worst = 0.0;
        for (const Scenario* sc : {&doa, &ofdm_sel}) {
            const int m = static_cast<int>(sc->user.H.cols());
            const std::vector<ParamVec> samples = draw_prior_samples(*sc);
            EcrbObjective ecrb(make_fim_cache(*sc, samples), sc->weights.a);
            for (int trial = 0; trial < 50; ++trial) {
                const MatrixXcd q2 = test::random_pd(rng, m, sc->power);
                const MatrixXcd q1 =
                    q2 + test::random_psd(rng, m, sc->power * rng.uniform());
                worst = std::max(worst, ecrb.value(q1) - ecrb.value(q2));

                const MatrixXcd qa = test::random_pd(rng, m, sc->power);
                const MatrixXcd qb = test::random_pd(rng, m, sc->power);
                const double alpha = rng.uniform();
                const double chord = alpha * ecrb.value(qa) + (1 - alpha) * ecrb.value(qb);
                worst = std::max(worst,
                                 ecrb.value(alpha * qa + (1 - alpha) * qb) - chord);
            }
        }
        detail = "max violation " + format_full(worst);
        return worst <= 1e-9;
    });

    criterion(8, "analytic gradients vs central differences", [&](std::string& detail) {
        RngStream rng(98);
        double worst = 0.0;
        for (const Scenario* sc : {&doa, &ofdm_sel}) {
            const int m = static_cast<int>(sc->user.H.cols());
            const std::vector<ParamVec> samples = draw_prior_samples(*sc);
            EcrbObjective ecrb(make_fim_cache(*sc, samples), sc->weights.a);
            for (int trial = 0; trial < 20; ++trial) {
                const MatrixXcd q = test::random_pd(rng, m, sc->power);
                const CovMatrix qc = CovMatrix::from_psd_unchecked(q);
                // Step 1e-5: below that, difference round-off dominates at
                // the K = 64 objective scale.
                worst = std::max(
                    worst, test::gradient_check(
                               [&](const MatrixXcd& x) {
                                   return gaussian_mi(sc->user,
                                                      CovMatrix::from_psd_unchecked(x));
                               },
                               mi_gradient(sc->user, qc), q, rng, 2, 1e-5));
                worst = std::max(worst,
                                 test::gradient_check(
                                     [&](const MatrixXcd& x) { return ecrb.value(x); },
                                     ecrb.gradient(q), q, rng, 2, 1e-5));
            }
        }
        detail = "max rel err " + format_full(worst);
        return worst <= 1e-5;
    });

    criterion(9, "general PSD solver agrees with the OFDM solver", [&](std::string& detail) {
        double worst = 0.0;
        int used = 0;
        for (std::size_t i : {0, 2, 4, 6, 7}) {
            ++used;
            const double delta = ofdm_sweep.deltas[i];
            const TradeoffPoint special = solve_ofdm(ofdm_sel, delta, cfg);
            if (special.status != SolveStatus::optimal ||
                ofdm_sweep.points[i].status != SolveStatus::optimal) {
                detail = "non-optimal point at delta " + format_full(delta);
                return false;
            }
            worst = std::max(worst, std::abs(special.rate_bits -
                                             ofdm_sweep.points[i].rate_bits) /
                                        special.rate_bits);
        }
        detail = "max rel rate gap " + format_full(worst) + " over " +
                 std::to_string(used) + " deltas";
        return worst <= 1e-4 && used == 5;
    });

    criterion(10, "finite-block OFDM MSE matches the covariance oracle",
              [](std::string& detail) {
                  OfdmConfig ocfg;
                  ocfg.k_sub = 4;
                  ocfg.alpha = 10.0;
                  ocfg.seed = 100;
                  ocfg.prior_samples = 4;
                  const Scenario sc = build_ofdm(ocfg);
                  const MinMseResult sens = min_achievable_mse(sc);
                  McRunConfig mc;
                  mc.n_block = 64;
                  mc.trials = 2000;
                  mc.delta_band = 0.75;
                  mc.codebook_size = 16;
                  const McSummary s = run_mse_experiment(sc, sens.q, mc);
                  detail = "ratio " + format_full(s.ratio);
                  return s.ratio >= 0.97 && s.ratio <= 1.03;
              });

    criterion(11, "finite-block DoA ML tracks the ECRB", [](std::string& detail) {
        // Documented operating point: Beta(5.5, 15) prior, -20 dB sensing
        // SNR, N = 512. The Beta tails keep every per-theta CRB bounded and
        // N * J(theta) stays above the ML sidelobe-confusion threshold for
        // all plausible draws; the tapered-uniform prior at the paper's
        // -25 dB sits in the threshold region at this block length.
        DoaConfig dcfg;
        dcfg.m_tx = 16;
        dcfg.t_rx = 16;
        dcfg.comm_snr_db = 15.0;
        dcfg.sens_snr_db = -20.0;
        dcfg.prior = BetaPriorSpec{5.5, 15.0, -M_PI / 2, M_PI / 2};
        dcfg.prior_samples = 256;
        dcfg.seed = 101;
        const Scenario sc = build_doa(dcfg);
        const MinMseResult sens = min_achievable_mse(sc);
        McRunConfig mc;
        mc.n_block = 512;
        mc.trials = 2000;
        mc.delta_band = 0.35;
        mc.codebook_size = 16;
        mc.grid_size = 2048;
        const McSummary s = run_mse_experiment(sc, sens.q, mc);
        detail = "ratio " + format_full(s.ratio) + " at N=512, -20 dB, Beta prior";
        return s.ratio >= 0.85 && s.ratio <= 1.15;
    });

    criterion(12, "empirical covariance concentration (Chebyshev)", [](std::string& detail) {
        // Rank-one beamforming target: the band check reduces to the scalar
        // exponential concentration the bound is derived from.
        const Scenario sc = paper_doa_tapered();
        const TradeoffPoint cap = capacity_only(sc);
        const double delta_rel = 0.1;
        const double lambda_max = sc.power;  // rank-one beamformer
        RngStream rng(102);
        std::string parts;
        for (int n : {64, 256, 1024}) {
            RngStream local = rng.substream(n);
            const double rate =
                concentration_out_rate(cap.q_opt, n, delta_rel * lambda_max, 1000, local);
            const double bound = 1.0 / (delta_rel * delta_rel * n);
            const double sigma =
                std::sqrt(std::max(std::min(bound, 1.0) * (1.0 - std::min(bound, 1.0)), 0.0) /
                          1000.0);
            parts += " N=" + std::to_string(n) + ":" + format_full(rate);
            if (rate > std::min(bound, 1.0) + 3.0 * sigma) {
                detail = "rate " + format_full(rate) + " exceeds bound " + format_full(bound) +
                         " at N=" + std::to_string(n);
                return false;
            }
        }
        detail = "out-of-band rates" + parts;
        return true;
    });

    criterion(13, "qualitative figure behavior", [&](std::string& detail) {
        // Aligned vs misaligned user: limited vs pronounced trade-off.
        const SweepResult aligned = sweep_curve(paper_doa_beta(-M_PI / 4), 8, cfg, false);
        const SweepResult misaligned = sweep_curve(paper_doa_beta(M_PI / 4), 8, cfg, false);
        auto spread = [](const SweepResult& s) {
            double lo = kInf, hi = -kInf;
            for (const TradeoffPoint& pt : s.points) {
                lo = std::min(lo, pt.rate_bits);
                hi = std::max(hi, pt.rate_bits);
            }
            return hi - lo;
        };
        const double s_aligned = spread(aligned);
        const double s_misaligned = spread(misaligned);
        if (!(s_aligned <= s_misaligned / 3.0)) {
            detail = "aligned spread " + format_full(s_aligned) + " vs misaligned " +
                     format_full(s_misaligned);
            return false;
        }
        // Frequency-flat OFDM: no trade-off.
        const SweepResult flat = sweep_curve(paper_ofdm(0.1), 8, cfg, false);
        const double flat_spread = spread(flat);
        const double capacity = flat.points.back().rate_bits;
        if (!(flat_spread <= 0.005 * capacity)) {
            detail = "flat OFDM spread " + format_full(flat_spread / capacity);
            return false;
        }
        // Selective OFDM: the capacity-only point has unbounded MSE.
        const TradeoffPoint cap = capacity_only(ofdm_sel);
        if (std::isfinite(cap.delta) || !ofdm_sweep.open_ended) {
            detail = "selective OFDM comm point should have infinite MSE";
            return false;
        }
        detail = "spreads: aligned " + format_full(s_aligned) + ", misaligned " +
                 format_full(s_misaligned) + ", flat " + format_full(flat_spread);
        return true;
    });

    std::printf("%d of 13 criteria passed\n", 13 - g_failures);
    return g_failures;
}
