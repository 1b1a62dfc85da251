#pragma once

#include <memory>
#include <span>
#include <vector>

#include "cams/core.hpp"

namespace cams {

/// K x K Fisher information of the sensor observation given input covariance
/// Q. Real symmetric PSD for real parameters, Hermitian PSD for complex ones.
struct FimMatrix {
    MatrixXcd entries;
    ParamKind kind = ParamKind::real;
};

/// Gaussian mutual information log det(I + H Q H^H / sigma^2), in nats.
double gaussian_mi(const UserChannel& user, const CovMatrix& q);

/// Gradient of gaussian_mi in Q: H^H (sigma^2 I + H Q H^H)^{-1} H.
MatrixXcd mi_gradient(const UserChannel& user, const CovMatrix& q);

/// log f(y|x) - log f(y) for the Gaussian channel with input covariance q.
double information_density(const UserChannel& user, const CovMatrix& q,
                           const VectorXcd& x, const VectorXcd& y);

/// Conditional FIM J(theta|Q). Real kind: J_ij = (2/s2) Re tr(dG_j Q dG_i^H);
/// complex kind drops the factor 2 and the real part.
FimMatrix conditional_fim(const SensingModel& model, const ParamVec& theta, const CovMatrix& q);

/// Per-(model, sample set) evaluation engine. Caches the derivative matrices
/// dG_i(theta_s) once, exploits scalar-parameter and diagonal-derivative
/// structure, and evaluates samples in parallel with index-ordered reduction.
class FimCache {
public:
    FimCache(const SensingModel& model, std::span<const ParamVec> samples);

    int sample_count() const { return static_cast<int>(n_samples_); }
    int param_dim() const { return k_; }
    int input_dim() const { return m_; }
    double noise_var() const { return noise_var_; }
    double kind_factor() const { return factor_; }  // c / sigma^2

    /// J(theta_s | q), Hermitian.
    MatrixXcd fim(int s, const MatrixXcd& q) const;

    /// Herm(sum_ij W_ij dG_j^H dG_i) at sample s; the per-sample gradient of
    /// tr(A J^{-1}) is -(c/sigma^2) times this with W = J^{-1} A J^{-1}.
    MatrixXcd gradient_term(int s, const MatrixXcd& w) const;

    /// Diagonal derivative stack whose column matrix is unitary (the OFDM
    /// DFT): J diagonalizes analytically, no eigensolve needed.
    bool unitary_diagonal() const { return unitary_diagonal_; }
    /// Per-sample weight spectrum u_k = sum_i a_i |D_ki|^2 for that path.
    VectorXd unitary_weight_spectrum(int s, const VectorXd& weights) const;

private:
    enum class Mode { generic, scalar_param, diagonal };
    Mode mode_ = Mode::generic;
    std::size_t n_samples_ = 0;
    int k_ = 0, m_ = 0, t_ = 0;
    double noise_var_ = 1.0;
    double factor_ = 1.0;
    ParamKind kind_ = ParamKind::real;

    std::vector<std::vector<MatrixXcd>> dgs_;  // generic: [s][i] T x M
    std::vector<MatrixXcd> b_;                 // scalar_param: dG^H dG per sample
    std::vector<MatrixXcd> cols_;              // diagonal: M x K, column i = diag(dG_i)
    bool unitary_diagonal_ = false;
};

/// Sensing-risk objective over a fixed SAA sample set: value is +inf when any
/// required FIM is singular, gradient throws SingularFim there.
class RiskObjective {
public:
    virtual ~RiskObjective() = default;
    virtual double value(const MatrixXcd& q) const = 0;
    virtual MatrixXcd gradient(const MatrixXcd& q) const = 0;
};

/// (1/S) sum_s tr(A J(theta_s|Q)^{-1})  -- the ECRB constraint function.
class EcrbObjective final : public RiskObjective {
public:
    EcrbObjective(std::shared_ptr<const FimCache> cache, VectorXd weights);
    double value(const MatrixXcd& q) const override;
    MatrixXcd gradient(const MatrixXcd& q) const override;

private:
    std::shared_ptr<const FimCache> cache_;
    VectorXd weights_;
};

/// tr(A ((1/S) sum_s J(theta_s|Q))^{-1})  -- the BCRB-based bound.
class BcrbObjective final : public RiskObjective {
public:
    BcrbObjective(std::shared_ptr<const FimCache> cache, VectorXd weights);
    double value(const MatrixXcd& q) const override;
    MatrixXcd gradient(const MatrixXcd& q) const override;

private:
    std::shared_ptr<const FimCache> cache_;
    VectorXd weights_;
};

std::shared_ptr<const FimCache> make_fim_cache(const Scenario& scenario,
                                               std::span<const ParamVec> samples);

double ecrb_objective(const Scenario& scenario, std::span<const ParamVec> theta_samples,
                      const CovMatrix& q);
MatrixXcd ecrb_gradient(const Scenario& scenario, std::span<const ParamVec> theta_samples,
                        const CovMatrix& q);
double bcrb_objective(const Scenario& scenario, std::span<const ParamVec> theta_samples,
                      const CovMatrix& q);

}  // namespace cams
