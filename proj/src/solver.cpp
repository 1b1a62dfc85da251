#include "cams/solver.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>

namespace cams {

namespace {

constexpr double kLn2 = 0.6931471805599453;
// Relative slack below delta_min before a target is declared infeasible;
// delta_min is itself an SAA quantity.
constexpr double kInfeasibleMargin = 1e-6;

double frob_inner(const MatrixXcd& a, const MatrixXcd& b) {
    // tr(a^H b); real for Hermitian arguments.
    return (a.conjugate().cwiseProduct(b)).sum().real();
}

struct PgaResult {
    MatrixXcd q;
    double value = -kInf;
    double residual = kInf;
    bool converged = false;
    int iters = 0;
};

// Scaled projected-gradient mapping norm; zero exactly at a constrained
// stationary point of an ascent problem with gradient g.
double stationarity_residual(const MatrixXcd& q, const MatrixXcd& g, double power) {
    const MatrixXcd d = g / (1.0 + g.norm());
    const CovMatrix proj = project_trace_ball(q + d, power);
    return (q - proj.matrix()).norm() / (1.0 + q.norm());
}

// Maximize value(q) over {q >= 0, tr q <= power} by projected gradient
// ascent with Armijo backtracking. q0 must have a finite objective.
// step_io carries the accepted step across warm-started calls.
PgaResult pga_maximize(const std::function<double(const MatrixXcd&)>& value,
                       const std::function<MatrixXcd(const MatrixXcd&)>& gradient,
                       MatrixXcd q0, double power, const SolverConfig& cfg, double tol,
                       double* step_io = nullptr) {
    PgaResult res;
    res.q = std::move(q0);
    res.value = value(res.q);
    if (!std::isfinite(res.value)) return res;

    double step = step_io != nullptr && *step_io > 0.0 ? *step_io : cfg.step_init;
    for (int iter = 0; iter < cfg.max_inner; ++iter) {
        res.iters = iter;
        const MatrixXcd g = gradient(res.q);
        res.residual = stationarity_residual(res.q, g, power);
        if (res.residual <= tol) {
            res.converged = true;
            if (step_io != nullptr) *step_io = step;
            return res;
        }
        bool accepted = false;
        double t = step;
        for (int ls = 0; ls < 80; ++ls) {
            const CovMatrix trial = project_trace_ball(res.q + t * g, power);
            const double gain = frob_inner(g, trial.matrix() - res.q);
            const double f_new = value(trial.matrix());
            if (std::isfinite(f_new) && f_new >= res.value + cfg.armijo * gain && gain >= 0.0) {
                res.q = trial.matrix();
                res.value = f_new;
                step = std::min(t * 2.0, 1e12);
                accepted = true;
                break;
            }
            t *= 0.5;
            if (t < 1e-20) break;
        }
        if (!accepted) break;  // stalled; residual already current
    }
    if (step_io != nullptr) *step_io = step;
    return res;
}

struct MiProblem {
    const UserChannel* user;
    double mi(const MatrixXcd& q) const {
        return gaussian_mi(*user, CovMatrix::from_psd_unchecked(q));
    }
    MatrixXcd mi_grad(const MatrixXcd& q) const {
        return mi_gradient(*user, CovMatrix::from_psd_unchecked(q));
    }
};

// Blend toward the scaled identity until the risk is finite; the FIM is
// linear in Q, so mixing in a full-rank component removes singularity.
MatrixXcd make_risk_finite(const RiskObjective& risk, MatrixXcd q, double power) {
    const int m = static_cast<int>(q.rows());
    const MatrixXcd center = (power / m) * MatrixXcd::Identity(m, m);
    double eps = 0.0;
    while (!std::isfinite(risk.value(q))) {
        eps = eps == 0.0 ? 0.05 : eps * 2.0;
        if (eps >= 1.0) return center;
        q = (1.0 - eps) * q + eps * center;
    }
    return q;
}

MinMseResult min_mse_impl(const Scenario& scenario, const RiskObjective& risk,
                          const SolverConfig& cfg) {
    const int m = static_cast<int>(scenario.user.H.cols());
    const MatrixXcd q0 = (scenario.power / m) * MatrixXcd::Identity(m, m);
    const PgaResult r = pga_maximize(
        [&](const MatrixXcd& q) { return -risk.value(q); },
        [&](const MatrixXcd& q) { return MatrixXcd(-risk.gradient(q)); }, q0, scenario.power,
        cfg, 0.5 * cfg.kkt_tol);
    MinMseResult out;
    out.delta_min = -r.value;
    out.q = CovMatrix::from_psd_unchecked(r.q);
    out.residual = r.residual;
    out.status = r.converged ? SolveStatus::optimal : SolveStatus::max_iter;
    return out;
}

struct WaterFilling {
    MatrixXcd q;
    double rate_nats = 0.0;
    double nu = 0.0;  // power multiplier, nats per unit power
};

WaterFilling water_fill(const UserChannel& user, double power) {
    const int m = static_cast<int>(user.H.cols());
    Eigen::JacobiSVD<MatrixXcd> svd(user.H, Eigen::ComputeThinV);
    const VectorXd sv = svd.singularValues();
    WaterFilling out;
    out.q = MatrixXcd::Zero(m, m);
    std::vector<double> cost;  // noise-to-gain per mode, ascending
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > 1e-13 * sv(0)) cost.push_back(user.noise_var / (sv(i) * sv(i)));
    }
    if (cost.empty()) return out;  // H == 0
    // Water level over the k strongest modes.
    double level = 0.0;
    std::size_t active = 0;
    double cum = 0.0;
    for (std::size_t k = 0; k < cost.size(); ++k) {
        cum += cost[k];
        const double mu = (power + cum) / static_cast<double>(k + 1);
        if (k + 1 == cost.size() || mu <= cost[k + 1]) {
            level = mu;
            active = k + 1;
            break;
        }
    }
    VectorXd p = VectorXd::Zero(sv.size());
    for (std::size_t k = 0; k < active; ++k) {
        p(static_cast<Eigen::Index>(k)) = level - cost[k];
        out.rate_nats += std::log(level / cost[k]);
    }
    const MatrixXcd v = svd.matrixV();
    out.q = v * p.asDiagonal() * v.adjoint();
    out.q = hermitian_part(out.q);
    out.nu = 1.0 / level;
    return out;
}

struct SolveOptions {
    const MinMseResult* min_mse = nullptr;   // precomputed sensing endpoint
    const MatrixXcd* warm = nullptr;         // inner-start covariance
};

double power_multiplier(const MatrixXcd& grad_lagr, const MatrixXcd& q, double power) {
    const double tr = q.trace().real();
    if (tr < power * (1.0 - 1e-9) || tr <= 0.0) return 0.0;
    return std::max(0.0, frob_inner(grad_lagr, q) / tr);
}

TradeoffPoint solve_constrained(const Scenario& scenario, const RiskObjective& risk,
                                double delta, const SolverConfig& cfg,
                                const SolveOptions& opts) {
    validate(cfg);
    if (!(delta > 0.0)) throw InvalidInput("solve: delta must be positive");
    const MiProblem mi{&scenario.user};
    const double power = scenario.power;

    MinMseResult min_mse_local;
    const MinMseResult* min_mse = opts.min_mse;
    if (min_mse == nullptr) {
        min_mse_local = min_mse_impl(scenario, risk, cfg);
        min_mse = &min_mse_local;
    }

    TradeoffPoint pt;
    pt.delta = delta;

    if (delta < min_mse->delta_min * (1.0 - kInfeasibleMargin)) {
        pt.status = SolveStatus::infeasible;
        pt.rate_bits = 0.0;
        pt.kkt_residual = kInf;
        return pt;
    }

    // Constraint-inactive branch first: water-filling is cheap and exact.
    const WaterFilling wf = water_fill(scenario.user, power);
    const double risk_cap = risk.value(wf.q);
    if (risk_cap <= delta) {
        pt.rate_bits = wf.rate_nats / kLn2;
        pt.q_opt = CovMatrix::from_psd_unchecked(wf.q);
        pt.lambda_sensing = 0.0;
        pt.nu_power = wf.nu;
        pt.kkt_residual = 0.0;
        pt.status = SolveStatus::optimal;
        return pt;
    }

    // Sensing-optimal endpoint: the bisection target coincides with the
    // minimum of the constraint function. The multiplier blows up as the
    // curve's slope diverges at delta_min; take the smallest lambda whose
    // Lagrangian stationarity matches the converged descent residual.
    if (delta <= min_mse->delta_min * (1.0 + 2.0 * cfg.kkt_tol)) {
        const MatrixXcd q = min_mse->q.matrix();
        const MatrixXcd g_mi = mi.mi_grad(q);
        const MatrixXcd g_risk = risk.gradient(q);
        const double fit = std::max(0.0, frob_inner(g_mi, g_risk) / frob_inner(g_risk, g_risk));
        double best_lambda = fit > 0.0 ? fit : 1.0;
        double best_res = kInf;
        for (double lam = std::max(fit, 1.0) * 1e-3; lam < 1e18; lam *= 4.0) {
            const MatrixXcd d = (g_mi - lam * g_risk) / (1.0 + lam);
            const double r = stationarity_residual(q, d, power);
            if (r < best_res) {
                best_res = r;
                best_lambda = lam;
            }
            if (r <= 0.5 * cfg.kkt_tol) break;
        }
        pt.rate_bits = mi.mi(q) / kLn2;
        pt.q_opt = min_mse->q;
        pt.lambda_sensing = best_lambda;
        pt.nu_power = power_multiplier(g_mi - best_lambda * g_risk, q, power);
        pt.kkt_residual = best_res;
        pt.status = (min_mse->status == SolveStatus::optimal && best_res <= cfg.kkt_tol)
                        ? SolveStatus::optimal
                        : SolveStatus::max_iter;
        return pt;
    }

    // Dual bisection on the sensing multiplier.
    MatrixXcd warm = opts.warm != nullptr ? *opts.warm : wf.q;
    struct Eval {
        MatrixXcd q;
        double risk_val = kInf;
        double mi_val = 0.0;
        double residual = kInf;
        bool converged = false;
    };
    double warm_step = 0.0;
    // The dual target |ecrb - delta| <= kkt_tol * delta needs the inner risk
    // values resolved beyond kkt_tol; only the finishing evaluations pay for
    // that, bracketing runs at a loose cut.
    const double inner_tol = 0.05 * cfg.kkt_tol;
    const double coarse_tol = 20.0 * inner_tol;
    auto eval_lambda = [&](double lam, double tol) {
        const MatrixXcd q0 = make_risk_finite(risk, warm, power);
        const PgaResult r = pga_maximize(
            [&](const MatrixXcd& q) {
                const double rv = risk.value(q);
                return std::isfinite(rv) ? mi.mi(q) - lam * rv : -kInf;
            },
            [&](const MatrixXcd& q) {
                return MatrixXcd((mi.mi_grad(q) - lam * risk.gradient(q)) / (1.0 + lam));
            },
            q0, power, cfg, tol, &warm_step);
        Eval e;
        e.q = r.q;
        e.risk_val = risk.value(r.q);
        e.mi_val = mi.mi(r.q);
        e.residual = r.residual;
        e.converged = r.converged;
        warm = r.q;
        return e;
    };

    const MatrixXcd g_mi0 = mi.mi_grad(make_risk_finite(risk, warm, power));
    double lam_hi = (1.0 + g_mi0.norm()) /
                    (1.0 + risk.gradient(make_risk_finite(risk, warm, power)).norm());
    lam_hi = std::max(lam_hi * 1e-3, 1e-12);
    double lam_lo = 0.0;
    Eval best;  // feasible point with the largest rate seen so far
    Eval e_hi;
    int outer = 0;
    bool bracketed = false;
    for (; outer < cfg.max_outer; ++outer) {
        e_hi = eval_lambda(lam_hi, coarse_tol);
        if (e_hi.risk_val <= delta) {
            bracketed = true;
            break;
        }
        lam_lo = lam_hi;
        lam_hi *= cfg.dual_bracket_growth;
    }

    Eval final = e_hi;
    double lambda = lam_hi;
    if (bracketed) {
        // Coarse bisection narrows the bracket, the tight pass lands on the
        // constraint level.
        bool tight = false;
        double mid = lam_hi;
        Eval e = e_hi;
        for (; outer < cfg.max_outer; ++outer) {
            if (!tight && std::abs(e.risk_val - delta) <= 10.0 * cfg.kkt_tol * delta)
                tight = true;
            mid = 0.5 * (lam_lo + lam_hi);
            e = eval_lambda(mid, tight ? inner_tol : coarse_tol);
            if (e.risk_val <= delta) {
                lam_hi = mid;
                if (tight && (best.q.size() == 0 || e.mi_val > best.mi_val)) best = e;
            } else {
                lam_lo = mid;
            }
            final = e;
            lambda = mid;
            if (tight && std::abs(e.risk_val - delta) <= cfg.kkt_tol * delta) break;
            if (lam_hi - lam_lo <= 1e-14 * lam_hi) {
                if (tight) break;
                tight = true;
            }
        }
        if (!final.converged || final.residual > inner_tol) {
            // Make sure the reported point was solved at the tight cut.
            final = eval_lambda(lambda, inner_tol);
            if (final.risk_val <= delta && (best.q.size() == 0 || final.mi_val > best.mi_val))
                best = final;
        }
    }

    // Prefer the strictly feasible side if bisection stopped on the other.
    if (final.risk_val > delta * (1.0 + cfg.kkt_tol) && best.q.size() != 0) {
        final = best;
        lambda = lam_hi;
    }

    const double comp_res = std::abs(final.risk_val - delta) / delta;
    pt.rate_bits = final.mi_val / kLn2;
    pt.q_opt = CovMatrix::from_psd_unchecked(final.q);
    pt.lambda_sensing = lambda;
    pt.nu_power = power_multiplier(mi.mi_grad(final.q) - lambda * risk.gradient(final.q),
                                   final.q, power);
    pt.kkt_residual = std::max(final.residual, comp_res);
    pt.status = (bracketed && final.converged && comp_res <= cfg.kkt_tol &&
                 final.residual <= cfg.kkt_tol)
                    ? SolveStatus::optimal
                    : SolveStatus::max_iter;
    return pt;
}

}  // namespace

void validate(const SolverConfig& cfg) {
    if (!(cfg.kkt_tol > 0.0)) throw InvalidInput("SolverConfig: kkt_tol must be positive");
    if (cfg.max_outer < 1 || cfg.max_inner < 1)
        throw InvalidInput("SolverConfig: iteration limits must be positive");
    if (!(cfg.step_init > 0.0)) throw InvalidInput("SolverConfig: step_init must be positive");
    if (!(cfg.armijo > 0.0 && cfg.armijo < 1.0))
        throw InvalidInput("SolverConfig: armijo must lie in (0,1)");
    if (!(cfg.dual_bracket_growth > 1.0))
        throw InvalidInput("SolverConfig: dual_bracket_growth must exceed 1");
}

TradeoffPoint capacity_only(const Scenario& scenario) {
    validate(scenario);
    const WaterFilling wf = water_fill(scenario.user, scenario.power);
    const std::vector<ParamVec> samples = draw_prior_samples(scenario);
    EcrbObjective ecrb(make_fim_cache(scenario, samples), scenario.weights.a);
    TradeoffPoint pt;
    pt.delta = ecrb.value(wf.q);
    pt.rate_bits = wf.rate_nats / kLn2;
    pt.q_opt = CovMatrix::from_psd_unchecked(wf.q);
    pt.lambda_sensing = 0.0;
    pt.nu_power = wf.nu;
    pt.kkt_residual = 0.0;
    pt.status = SolveStatus::optimal;
    return pt;
}

MinMseResult min_achievable_mse(const Scenario& scenario, const SolverConfig& cfg) {
    validate(scenario);
    validate(cfg);
    const std::vector<ParamVec> samples = draw_prior_samples(scenario);
    EcrbObjective ecrb(make_fim_cache(scenario, samples), scenario.weights.a);
    return min_mse_impl(scenario, ecrb, cfg);
}

TradeoffPoint solve_capacity_mse(const Scenario& scenario, double delta,
                                 const SolverConfig& cfg) {
    validate(scenario);
    const std::vector<ParamVec> samples = draw_prior_samples(scenario);
    EcrbObjective ecrb(make_fim_cache(scenario, samples), scenario.weights.a);
    return solve_constrained(scenario, ecrb, delta, cfg, SolveOptions{});
}

namespace {

VectorXd diagonal_gains(const Scenario& scenario) {
    const MatrixXcd& h = scenario.user.H;
    if (h.rows() != h.cols()) throw InvalidInput("solve_ofdm: H must be square diagonal");
    MatrixXcd off = h;
    off.diagonal().setZero();
    if (off.cwiseAbs().maxCoeff() > 1e-12 * h.cwiseAbs().maxCoeff())
        throw InvalidInput("solve_ofdm: H must be diagonal");
    return h.diagonal().cwiseAbs2();
}

// Root of g/(sw2 + p g) + mu sv2 / p^2 = nu on (0, cap]; the left side is
// strictly decreasing in p and unbounded at 0+.
double stationary_power(double gain, double sw2, double mu, double sv2, double nu, double cap) {
    auto lhs = [&](double p) { return gain / (sw2 + p * gain) + mu * sv2 / (p * p); };
    if (lhs(cap) >= nu) return cap;
    double lo = cap, hi = cap;
    while (lhs(lo) < nu) lo *= 0.5;  // cap already checked; find a lower bracket
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (lhs(mid) >= nu)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= 1e-15 * hi) break;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TradeoffPoint solve_ofdm(const Scenario& scenario, double delta, const SolverConfig& cfg) {
    validate(scenario);
    validate(cfg);
    if (!(delta > 0.0)) throw InvalidInput("solve_ofdm: delta must be positive");
    const VectorXd gains = diagonal_gains(scenario);
    const int k = static_cast<int>(gains.size());
    const double p_total = scenario.power;
    const double sw2 = scenario.user.noise_var;
    const double sv2 = scenario.sensing.noise_var;

    TradeoffPoint pt;
    pt.delta = delta;

    const double delta_min = sv2 * static_cast<double>(k) * static_cast<double>(k) / p_total;
    if (delta < delta_min * (1.0 - 1e-12)) {
        pt.status = SolveStatus::infeasible;
        pt.kkt_residual = kInf;
        return pt;
    }

    auto fill_point = [&](const VectorXd& p, double mu, double nu, double res,
                          SolveStatus status) {
        double rate = 0.0;
        for (int i = 0; i < k; ++i) rate += std::log1p(p(i) * gains(i) / sw2);
        pt.rate_bits = rate / kLn2;
        MatrixXcd q = MatrixXcd::Zero(k, k);
        q.diagonal() = p.cast<std::complex<double>>();
        pt.q_opt = CovMatrix::from_psd_unchecked(std::move(q));
        pt.lambda_sensing = mu;
        pt.nu_power = nu;
        pt.kkt_residual = res;
        pt.status = status;
    };

    // mu = 0: plain water-filling over sub-carriers.
    std::vector<double> cost(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) cost[i] = gains(i) > 0.0 ? sw2 / gains(i) : kInf;
    std::vector<double> sorted = cost;
    std::sort(sorted.begin(), sorted.end());
    double level = 0.0, cum = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (!std::isfinite(sorted[i])) {
            level = (p_total + cum) / static_cast<double>(i);
            break;
        }
        cum += sorted[i];
        const double mu_lvl = (p_total + cum) / static_cast<double>(i + 1);
        if (i + 1 == sorted.size() || mu_lvl <= sorted[i + 1]) {
            level = mu_lvl;
            break;
        }
    }
    VectorXd p_wf(k);
    for (int i = 0; i < k; ++i) p_wf(i) = std::max(level - cost[i], 0.0);
    double mse_wf = 0.0;
    for (int i = 0; i < k; ++i) mse_wf += p_wf(i) > 0.0 ? sv2 / p_wf(i) : kInf;
    if (mse_wf <= delta) {
        fill_point(p_wf, 0.0, 1.0 / level, 0.0, SolveStatus::optimal);
        return pt;
    }

    if (delta <= delta_min * (1.0 + 2.0 * cfg.kkt_tol)) {
        // Equal power: the sensing-optimal endpoint.
        const VectorXd p = VectorXd::Constant(k, p_total / k);
        // Multipliers from per-subcarrier stationarity averaged in k.
        const double pk = p_total / k;
        double nu = 0.0;
        for (int i = 0; i < k; ++i) nu += gains(i) / (sw2 + pk * gains(i));
        nu /= static_cast<double>(k);
        fill_point(p, 0.0, nu, 0.0, SolveStatus::optimal);
        pt.lambda_sensing = nu * pk * pk / sv2;  // makes stationarity hold on average
        return pt;
    }

    // Two-level dual: nu clears the power budget for a given mu; mu is then
    // bisected until the sensing constraint is met.
    auto powers_for = [&](double mu, double nu) {
        VectorXd p(k);
        for (int i = 0; i < k; ++i)
            p(i) = stationary_power(gains(i), sw2, mu, sv2, nu, p_total);
        return p;
    };
    auto nu_for = [&](double mu) {
        double nu_lo = 1e-12, nu_hi = 1.0;
        while (powers_for(mu, nu_hi).sum() > p_total) nu_hi *= 4.0;
        while (powers_for(mu, nu_lo).sum() < p_total) nu_lo *= 0.25;
        for (int it = 0; it < 200; ++it) {
            const double mid = std::sqrt(nu_lo * nu_hi);
            if (powers_for(mu, mid).sum() > p_total)
                nu_lo = mid;
            else
                nu_hi = mid;
            if (nu_hi - nu_lo <= 1e-14 * nu_hi) break;
        }
        return nu_hi;
    };
    auto mse_for = [&](double mu, double* nu_out, VectorXd* p_out) {
        const double nu = nu_for(mu);
        const VectorXd p = powers_for(mu, nu);
        if (nu_out) *nu_out = nu;
        if (p_out) *p_out = p;
        double mse = 0.0;
        for (int i = 0; i < k; ++i) mse += sv2 / p(i);
        return mse;
    };

    double mu_lo = 0.0, mu_hi = std::max(sv2 / (p_total * p_total), 1e-12);
    int outer = 0;
    for (; outer < cfg.max_outer; ++outer) {
        if (mse_for(mu_hi, nullptr, nullptr) <= delta) break;
        mu_lo = mu_hi;
        mu_hi *= cfg.dual_bracket_growth;
    }
    double nu_final = 0.0;
    VectorXd p_final;
    double mse_final = kInf;
    double mu_final = mu_hi;
    for (; outer < cfg.max_outer; ++outer) {
        const double mid = 0.5 * (mu_lo + mu_hi);
        mse_final = mse_for(mid, &nu_final, &p_final);
        mu_final = mid;
        if (std::abs(mse_final - delta) <= cfg.kkt_tol * delta) break;
        if (mse_final > delta)
            mu_lo = mid;
        else
            mu_hi = mid;
        if (mu_hi - mu_lo <= 1e-15 * mu_hi) break;
    }
    if (p_final.size() == 0) mse_final = mse_for(mu_hi, &nu_final, &p_final);

    const double comp_res = std::abs(mse_final - delta) / delta;
    const double power_res = std::abs(p_final.sum() - p_total) / p_total;
    fill_point(p_final, mu_final, nu_final, std::max(comp_res, power_res),
               comp_res <= cfg.kkt_tol && power_res <= cfg.kkt_tol ? SolveStatus::optimal
                                                                   : SolveStatus::max_iter);
    return pt;
}

SweepResult sweep_curve(const Scenario& scenario, int n_points, const SolverConfig& cfg,
                        bool include_bcrb) {
    validate(scenario);
    validate(cfg);
    if (n_points < 2) throw InvalidInput("sweep_curve: n_points must be >= 2");

    const std::vector<ParamVec> samples = draw_prior_samples(scenario);
    auto cache = make_fim_cache(scenario, samples);
    EcrbObjective ecrb(cache, scenario.weights.a);
    BcrbObjective bcrb(cache, scenario.weights.a);

    SweepResult sweep;
    const MinMseResult min_ecrb = min_mse_impl(scenario, ecrb, cfg);
    if (!std::isfinite(min_ecrb.delta_min))
        throw InvalidInput("sweep_curve: sensing risk is unbounded for this scenario");
    sweep.delta_min = min_ecrb.delta_min;

    const WaterFilling wf = water_fill(scenario.user, scenario.power);
    sweep.delta_comm = ecrb.value(wf.q);
    sweep.open_ended = !std::isfinite(sweep.delta_comm);
    const double delta_max =
        sweep.open_ended ? 10.0 * sweep.delta_min : std::max(sweep.delta_comm, sweep.delta_min);

    sweep.deltas.resize(n_points);
    const double log_lo = std::log(sweep.delta_min);
    const double log_hi = std::log(std::max(delta_max, sweep.delta_min));
    for (int i = 0; i < n_points; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(n_points - 1);
        sweep.deltas[i] = std::exp(log_lo + t * (log_hi - log_lo));
    }

    MatrixXcd warm = min_ecrb.q.matrix();
    for (int i = 0; i < n_points; ++i) {
        SolveOptions opts;
        opts.min_mse = &min_ecrb;
        opts.warm = &warm;
        TradeoffPoint pt = solve_constrained(scenario, ecrb, sweep.deltas[i], cfg, opts);
        if (pt.status != SolveStatus::infeasible) warm = pt.q_opt.matrix();
        sweep.points.push_back(std::move(pt));
    }

    if (include_bcrb) {
        const MinMseResult min_bcrb = min_mse_impl(scenario, bcrb, cfg);
        MatrixXcd warm_b = min_bcrb.q.matrix();
        for (int i = 0; i < n_points; ++i) {
            SolveOptions opts;
            opts.min_mse = &min_bcrb;
            opts.warm = &warm_b;
            TradeoffPoint pt = solve_constrained(scenario, bcrb, sweep.deltas[i], cfg, opts);
            if (pt.status != SolveStatus::infeasible) warm_b = pt.q_opt.matrix();
            sweep.bcrb_points.push_back(std::move(pt));
        }
    }
    return sweep;
}

}  // namespace cams
