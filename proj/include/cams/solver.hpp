#pragma once

#include <vector>

#include "cams/core.hpp"
#include "cams/information.hpp"

namespace cams {

struct SolverConfig {
    double kkt_tol = 1e-6;
    int max_outer = 200;    // dual bracket/bisection steps
    int max_inner = 5000;   // projected-gradient iterations per dual value
    double step_init = 1.0;
    double armijo = 0.5;
    double dual_bracket_growth = 4.0;
};
void validate(const SolverConfig& cfg);

/// Maximize mutual information subject to tr Q <= P only: SVD of H plus
/// exact water-filling. The delta field reports the ECRB at the optimum.
TradeoffPoint capacity_only(const Scenario& scenario);

struct MinMseResult {
    double delta_min = 0.0;
    CovMatrix q;
    SolveStatus status = SolveStatus::optimal;
    double residual = 0.0;
};

/// Minimize the ECRB over {Q >= 0, tr Q <= P} by projected gradient descent.
MinMseResult min_achievable_mse(const Scenario& scenario, const SolverConfig& cfg = {});

/// One point of C(Delta): dual bisection on the sensing multiplier with an
/// inner projected gradient ascent.
TradeoffPoint solve_capacity_mse(const Scenario& scenario, double delta,
                                 const SolverConfig& cfg = {});

/// OFDM-specialized solver: diagonal Q, per-subcarrier dual stationarity.
TradeoffPoint solve_ofdm(const Scenario& scenario, double delta, const SolverConfig& cfg = {});

struct SweepResult {
    std::vector<double> deltas;
    std::vector<TradeoffPoint> points;       // ECRB-constrained, C(Delta)
    std::vector<TradeoffPoint> bcrb_points;  // BCRB-constrained bound C^ub
    double delta_min = 0.0;
    double delta_comm = kInf;  // ECRB at the capacity-only point
    bool open_ended = false;   // delta_comm infinite; capped at 10 delta_min
};

/// Log-spaced sweep over [delta_min, delta_comm] with one shared prior
/// sample set (common random numbers) and warm starts between points.
SweepResult sweep_curve(const Scenario& scenario, int n_points, const SolverConfig& cfg = {},
                        bool include_bcrb = true);

}  // namespace cams
