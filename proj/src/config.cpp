#include "cams/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace cams {

using nlohmann::json;

namespace {

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& where) {
    for (const auto& item : obj.items()) {
        bool ok = false;
        for (const char* key : allowed)
            if (item.key() == key) ok = true;
        if (!ok) throw ConfigError("unknown key '" + item.key() + "' in " + where);
    }
}

double get_num(const json& obj, const char* key, double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) throw ConfigError(std::string("expected number for ") + key);
    return obj[key].get<double>();
}

int get_int(const json& obj, const char* key, int fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number_integer())
        throw ConfigError(std::string("expected integer for ") + key);
    return obj[key].get<int>();
}

std::uint64_t get_u64(const json& obj, const char* key, std::uint64_t fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number_unsigned() && !obj[key].is_number_integer())
        throw ConfigError(std::string("expected integer for ") + key);
    return obj[key].get<std::uint64_t>();
}

bool get_bool(const json& obj, const char* key, bool fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_boolean()) throw ConfigError(std::string("expected bool for ") + key);
    return obj[key].get<bool>();
}

std::complex<double> get_complex(const json& obj, const char* key,
                                 std::complex<double> fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj[key];
    if (v.is_number()) return {v.get<double>(), 0.0};
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
        return {v[0].get<double>(), v[1].get<double>()};
    throw ConfigError(std::string("expected number or [re, im] for ") + key);
}

DoaConfig parse_doa(const json& obj) {
    check_keys(obj,
               {"m_tx", "t_rx", "user_aod", "beta", "lambda_gain", "prior", "comm_snr_db",
                "sens_snr_db", "power", "prior_samples"},
               "scenario.doa");
    DoaConfig cfg;
    cfg.m_tx = get_int(obj, "m_tx", cfg.m_tx);
    cfg.t_rx = get_int(obj, "t_rx", cfg.t_rx);
    cfg.user_aod = get_num(obj, "user_aod", cfg.user_aod);
    cfg.beta = get_complex(obj, "beta", cfg.beta);
    cfg.lambda_gain = get_complex(obj, "lambda_gain", cfg.lambda_gain);
    cfg.comm_snr_db = get_num(obj, "comm_snr_db", cfg.comm_snr_db);
    cfg.sens_snr_db = get_num(obj, "sens_snr_db", cfg.sens_snr_db);
    cfg.power = get_num(obj, "power", cfg.power);
    cfg.prior_samples = get_int(obj, "prior_samples", cfg.prior_samples);
    if (obj.contains("prior")) {
        const json& p = obj["prior"];
        if (!p.is_object() || p.size() != 1)
            throw ConfigError("prior must hold exactly one of tapered_uniform / beta");
        if (p.contains("tapered_uniform")) {
            const json& t = p["tapered_uniform"];
            check_keys(t, {"s", "kappa"}, "prior.tapered_uniform");
            TaperedUniformPrior tu;
            tu.s = get_num(t, "s", tu.s);
            tu.kappa = get_num(t, "kappa", tu.kappa);
            cfg.prior = tu;
        } else if (p.contains("beta")) {
            const json& b = p["beta"];
            check_keys(b, {"s1", "s2", "theta_min", "theta_max"}, "prior.beta");
            BetaPriorSpec bp;
            bp.s1 = get_num(b, "s1", bp.s1);
            bp.s2 = get_num(b, "s2", bp.s2);
            bp.theta_min = get_num(b, "theta_min", bp.theta_min);
            bp.theta_max = get_num(b, "theta_max", bp.theta_max);
            cfg.prior = bp;
        } else {
            throw ConfigError("prior must be tapered_uniform or beta");
        }
    }
    if (cfg.m_tx < 1 || cfg.t_rx < 1) throw ConfigError("doa array sizes must be >= 1");
    if (!(std::abs(cfg.user_aod) < M_PI / 2)) throw ConfigError("doa user_aod must be in (-pi/2, pi/2)");
    if (!(cfg.power > 0.0)) throw ConfigError("doa power must be positive");
    if (cfg.prior_samples < 1) throw ConfigError("doa prior_samples must be positive");
    if (const auto* tu = std::get_if<TaperedUniformPrior>(&cfg.prior)) {
        if (!(tu->s > 0.0) || tu->kappa < 0.0 || tu->kappa > 1.0)
            throw ConfigError("tapered_uniform needs s > 0 and kappa in [0,1]");
    } else {
        const auto& bp = std::get<BetaPriorSpec>(cfg.prior);
        if (!(bp.s1 > 1.0) || !(bp.s2 > 1.0) || !(bp.theta_min < bp.theta_max))
            throw ConfigError("beta prior needs s1, s2 > 1 and theta_min < theta_max");
    }
    return cfg;
}

OfdmConfig parse_ofdm(const json& obj) {
    check_keys(obj,
               {"k_sub", "alpha", "phase_seed", "comm_snr_db", "sens_snr_db", "power",
                "prior_samples"},
               "scenario.ofdm");
    OfdmConfig cfg;
    cfg.k_sub = get_int(obj, "k_sub", cfg.k_sub);
    cfg.alpha = get_num(obj, "alpha", cfg.alpha);
    cfg.phase_seed = get_u64(obj, "phase_seed", cfg.phase_seed);
    cfg.comm_snr_db = get_num(obj, "comm_snr_db", cfg.comm_snr_db);
    cfg.sens_snr_db = get_num(obj, "sens_snr_db", cfg.sens_snr_db);
    cfg.power = get_num(obj, "power", cfg.power);
    cfg.prior_samples = get_int(obj, "prior_samples", cfg.prior_samples);
    if (cfg.k_sub < 1) throw ConfigError("ofdm k_sub must be >= 1");
    if (!(cfg.alpha > 0.0)) throw ConfigError("ofdm alpha must be positive");
    if (cfg.power < 0.0) throw ConfigError("ofdm power must be positive (0 selects k_sub)");
    if (cfg.prior_samples < 1) throw ConfigError("ofdm prior_samples must be positive");
    return cfg;
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(e.what());
    }
    if (!root.is_object()) throw ConfigError("top-level config must be an object");
    check_keys(root, {"seed", "scenario", "solver", "sweep", "montecarlo", "output"}, "config");

    RunConfig cfg;
    cfg.seed = get_u64(root, "seed", cfg.seed);
    if (const char* env = std::getenv("CAMS_SEED")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end == env || *end != '\0') throw ConfigError("CAMS_SEED must be an integer");
        cfg.seed = static_cast<std::uint64_t>(v);
    }

    if (!root.contains("scenario") || !root["scenario"].is_object() ||
        root["scenario"].size() != 1)
        throw ConfigError("scenario must hold exactly one of doa / ofdm");
    const json& sc = root["scenario"];
    if (sc.contains("doa"))
        cfg.scenario = parse_doa(sc["doa"]);
    else if (sc.contains("ofdm"))
        cfg.scenario = parse_ofdm(sc["ofdm"]);
    else
        throw ConfigError("scenario must be doa or ofdm");

    if (root.contains("solver")) {
        const json& s = root["solver"];
        check_keys(s,
                   {"kkt_tol", "max_outer", "max_inner", "step_init", "armijo",
                    "dual_bracket_growth"},
                   "solver");
        cfg.solver.kkt_tol = get_num(s, "kkt_tol", cfg.solver.kkt_tol);
        cfg.solver.max_outer = get_int(s, "max_outer", cfg.solver.max_outer);
        cfg.solver.max_inner = get_int(s, "max_inner", cfg.solver.max_inner);
        cfg.solver.step_init = get_num(s, "step_init", cfg.solver.step_init);
        cfg.solver.armijo = get_num(s, "armijo", cfg.solver.armijo);
        cfg.solver.dual_bracket_growth =
            get_num(s, "dual_bracket_growth", cfg.solver.dual_bracket_growth);
        validate(cfg.solver);
    }
    if (root.contains("sweep")) {
        const json& s = root["sweep"];
        check_keys(s, {"n_points", "include_bcrb"}, "sweep");
        cfg.sweep.n_points = get_int(s, "n_points", cfg.sweep.n_points);
        cfg.sweep.include_bcrb = get_bool(s, "include_bcrb", cfg.sweep.include_bcrb);
        if (cfg.sweep.n_points < 2) throw ConfigError("sweep.n_points must be >= 2");
    }
    if (root.contains("montecarlo")) {
        const json& m = root["montecarlo"];
        check_keys(m, {"n_block", "trials", "delta_band", "grid_size"}, "montecarlo");
        cfg.montecarlo.n_block = get_int(m, "n_block", cfg.montecarlo.n_block);
        cfg.montecarlo.trials = get_int(m, "trials", cfg.montecarlo.trials);
        cfg.montecarlo.delta_band = get_num(m, "delta_band", cfg.montecarlo.delta_band);
        cfg.montecarlo.grid_size = get_int(m, "grid_size", cfg.montecarlo.grid_size);
        if (cfg.montecarlo.n_block < 1 || cfg.montecarlo.trials < 1)
            throw ConfigError("montecarlo sizes must be positive");
        if (!(cfg.montecarlo.delta_band > 0.0))
            throw ConfigError("montecarlo.delta_band must be positive");
    }
    if (root.contains("output")) {
        const json& o = root["output"];
        check_keys(o, {"dir", "format"}, "output");
        if (o.contains("dir")) cfg.output.dir = o["dir"].get<std::string>();
        if (o.contains("format")) {
            const std::string f = o["format"].get<std::string>();
            if (f == "csv")
                cfg.output.format = OutputFormat::csv;
            else if (f == "json")
                cfg.output.format = OutputFormat::json;
            else
                throw ConfigError("output.format must be csv or json");
        }
    }
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_run_config(buf.str());
}

Scenario build_scenario(const RunConfig& cfg) {
    if (const auto* doa = std::get_if<DoaConfig>(&cfg.scenario)) {
        DoaConfig d = *doa;
        d.seed = cfg.seed;
        return build_doa(d);
    }
    OfdmConfig o = std::get<OfdmConfig>(cfg.scenario);
    o.seed = cfg.seed;
    return build_ofdm(o);
}

std::string format_full(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (std::isnan(x)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

namespace {

json number_or_marker(double x) {
    if (std::isfinite(x)) return x;
    return x > 0 ? json("inf") : json("-inf");
}

}  // namespace

std::string cov_to_json(const CovMatrix& q) {
    json out;
    out["dim"] = q.dim();
    json entries = json::array();
    for (int r = 0; r < q.dim(); ++r)
        for (int c = 0; c < q.dim(); ++c) {
            const std::complex<double> v = q.matrix()(r, c);
            entries.push_back(json::array({v.real(), v.imag()}));
        }
    out["entries"] = std::move(entries);
    return out.dump();
}

CovMatrix cov_from_json(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(e.what());
    }
    if (!root.contains("dim") || !root.contains("entries"))
        throw ConfigError("covariance JSON needs dim and entries");
    const int dim = root["dim"].get<int>();
    const json& entries = root["entries"];
    if (!entries.is_array() || static_cast<int>(entries.size()) != dim * dim)
        throw ConfigError("covariance JSON entry count mismatch");
    MatrixXcd m(dim, dim);
    int idx = 0;
    for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c) {
            const json& e = entries[idx++];
            m(r, c) = std::complex<double>(e[0].get<double>(), e[1].get<double>());
        }
    return CovMatrix(m);
}

std::string tradeoff_to_json(const TradeoffPoint& pt) {
    json out;
    out["delta"] = number_or_marker(pt.delta);
    out["rate_bits"] = number_or_marker(pt.rate_bits);
    out["kkt_residual"] = number_or_marker(pt.kkt_residual);
    out["lambda_sensing"] = number_or_marker(pt.lambda_sensing);
    out["nu_power"] = number_or_marker(pt.nu_power);
    out["status"] = to_string(pt.status);
    out["q_opt"] = json::parse(cov_to_json(pt.q_opt));
    return out.dump(2);
}

std::string mc_summary_to_json(const McSummary& s) {
    json out;
    out["n_mse_empirical"] = number_or_marker(s.n_mse_empirical);
    out["ecrb_predicted"] = number_or_marker(s.ecrb_predicted);
    out["ratio"] = number_or_marker(s.ratio);
    out["concentration_rate"] = s.concentration_rate;
    out["chebyshev_bound"] = number_or_marker(s.chebyshev_bound);
    out["n_block"] = s.n_block;
    out["estimator"] = s.estimator;
    return out.dump(2);
}

}  // namespace cams
