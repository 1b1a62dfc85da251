#include "cams/information.hpp"

#include <cmath>

#include "cams/parallel.hpp"

namespace cams {

namespace {

// Cholesky of sigma^2 I + H Q H^H; always positive definite.
Eigen::LLT<MatrixXcd> output_cov_llt(const UserChannel& user, const CovMatrix& q) {
    const MatrixXcd s = user.noise_var * MatrixXcd::Identity(user.H.rows(), user.H.rows()) +
                        user.H * q.matrix() * user.H.adjoint();
    Eigen::LLT<MatrixXcd> llt(hermitian_part(s));
    if (llt.info() != Eigen::Success)
        throw InvalidInput("output covariance not positive definite");
    return llt;
}

double log_det_from_llt(const Eigen::LLT<MatrixXcd>& llt) {
    double acc = 0.0;
    const auto& l = llt.matrixLLT();
    for (Eigen::Index i = 0; i < l.rows(); ++i) acc += 2.0 * std::log(l(i, i).real());
    return acc;
}

void check_dims(const UserChannel& user, const CovMatrix& q) {
    if (q.dim() != user.H.cols()) throw InvalidInput("input covariance dimension mismatch");
}

}  // namespace

double gaussian_mi(const UserChannel& user, const CovMatrix& q) {
    check_dims(user, q);
    const Eigen::LLT<MatrixXcd> llt = output_cov_llt(user, q);
    const double ld = log_det_from_llt(llt) -
                      static_cast<double>(user.H.rows()) * std::log(user.noise_var);
    return std::max(ld, 0.0);
}

MatrixXcd mi_gradient(const UserChannel& user, const CovMatrix& q) {
    check_dims(user, q);
    const Eigen::LLT<MatrixXcd> llt = output_cov_llt(user, q);
    const MatrixXcd x = llt.solve(user.H);
    return hermitian_part(user.H.adjoint() * x);
}

double information_density(const UserChannel& user, const CovMatrix& q,
                           const VectorXcd& x, const VectorXcd& y) {
    check_dims(user, q);
    if (x.size() != user.H.cols() || y.size() != user.H.rows())
        throw InvalidInput("information_density: vector dimension mismatch");
    const Eigen::LLT<MatrixXcd> llt = output_cov_llt(user, q);
    const double log_det_sy = log_det_from_llt(llt);
    const double quad_y = y.dot(llt.solve(y)).real();
    const VectorXcd r = y - user.H * x;
    const double l = static_cast<double>(user.H.rows());
    return log_det_sy - l * std::log(user.noise_var) + quad_y - r.squaredNorm() / user.noise_var;
}

FimMatrix conditional_fim(const SensingModel& model, const ParamVec& theta, const CovMatrix& q) {
    const int k = model.param_dim;
    std::vector<MatrixXcd> dgs(k);
    for (int i = 0; i < k; ++i) dgs[i] = model.dg(theta, i);
    MatrixXcd j(k, k);
    for (int jcol = 0; jcol < k; ++jcol) {
        const MatrixXcd c = dgs[jcol] * q.matrix();
        for (int i = 0; i < k; ++i) {
            // tr(dG_j Q dG_i^H) as a Frobenius inner product.
            const std::complex<double> t = (dgs[i].conjugate().cwiseProduct(c)).sum();
            j(i, jcol) = (model.param_kind == ParamKind::real)
                             ? std::complex<double>(2.0 * t.real() / model.noise_var, 0.0)
                             : t / model.noise_var;
        }
    }
    return FimMatrix{hermitian_part(j), model.param_kind};
}

FimCache::FimCache(const SensingModel& model, std::span<const ParamVec> samples) {
    if (samples.empty()) throw InvalidInput("FimCache: empty sample set");
    k_ = model.param_dim;
    t_ = model.out_dim;
    noise_var_ = model.noise_var;
    kind_ = model.param_kind;
    factor_ = (kind_ == ParamKind::real ? 2.0 : 1.0) / noise_var_;
    // With a theta-free FIM every sample produces the same matrix; keep one.
    n_samples_ = model.fim_theta_free ? 1 : samples.size();

    std::vector<std::vector<MatrixXcd>> dgs(n_samples_);
    for (std::size_t s = 0; s < n_samples_; ++s) {
        dgs[s].resize(k_);
        for (int i = 0; i < k_; ++i) dgs[s][i] = model.dg(samples[s], i);
    }
    m_ = static_cast<int>(dgs[0][0].cols());

    if (model.diagonal_dg) {
        for (const auto& per_sample : dgs)
            for (const auto& d : per_sample) {
                if (d.rows() != d.cols()) throw InvalidInput("diagonal_dg hint: dG not square");
                if ((d - MatrixXcd(d.diagonal().asDiagonal())).cwiseAbs().maxCoeff() > 1e-14)
                    throw InvalidInput("diagonal_dg hint: dG has off-diagonal entries");
            }
        mode_ = Mode::diagonal;
        cols_.resize(n_samples_);
        for (std::size_t s = 0; s < n_samples_; ++s) {
            cols_[s].resize(m_, k_);
            for (int i = 0; i < k_; ++i) cols_[s].col(i) = dgs[s][i].diagonal();
        }
        // With a square unitary column matrix the FIM eigenvalues are the
        // input-covariance diagonal up to the kind factor.
        unitary_diagonal_ = m_ == k_;
        for (std::size_t s = 0; s < n_samples_ && unitary_diagonal_; ++s)
            unitary_diagonal_ =
                (cols_[s].adjoint() * cols_[s] - MatrixXcd::Identity(k_, k_))
                    .cwiseAbs()
                    .maxCoeff() <= 1e-12;
        return;
    }
    if (k_ == 1) {
        mode_ = Mode::scalar_param;
        b_.resize(n_samples_);
        for (std::size_t s = 0; s < n_samples_; ++s)
            b_[s] = dgs[s][0].adjoint() * dgs[s][0];
        return;
    }
    mode_ = Mode::generic;
    dgs_ = std::move(dgs);
}

MatrixXcd FimCache::fim(int s, const MatrixXcd& q) const {
    switch (mode_) {
        case Mode::scalar_param: {
            const double t = (b_[s].conjugate().cwiseProduct(q)).sum().real();
            MatrixXcd j(1, 1);
            j(0, 0) = factor_ * t;
            return j;
        }
        case Mode::diagonal: {
            const VectorXd qd = q.diagonal().real();
            MatrixXcd j = factor_ * (cols_[s].adjoint() * qd.asDiagonal() * cols_[s]);
            if (kind_ == ParamKind::real) j = j.real().cast<std::complex<double>>();
            return hermitian_part(j);
        }
        case Mode::generic:
        default: {
            const auto& dgs = dgs_[s];
            MatrixXcd j(k_, k_);
            for (int jc = 0; jc < k_; ++jc) {
                const MatrixXcd c = dgs[jc] * q;
                for (int i = 0; i < k_; ++i) {
                    const std::complex<double> t = (dgs[i].conjugate().cwiseProduct(c)).sum();
                    j(i, jc) = (kind_ == ParamKind::real)
                                   ? std::complex<double>(factor_ * t.real(), 0.0)
                                   : factor_ * t;
                }
            }
            return hermitian_part(j);
        }
    }
}

MatrixXcd FimCache::gradient_term(int s, const MatrixXcd& w) const {
    switch (mode_) {
        case Mode::scalar_param:
            return w(0, 0).real() * b_[s];
        case Mode::diagonal: {
            // Entry k of the diagonal result is row_k(D) W row_k(D)^H.
            const MatrixXcd dw = cols_[s] * w;
            const VectorXd diag = dw.cwiseProduct(cols_[s].conjugate()).rowwise().sum().real();
            MatrixXcd out = MatrixXcd::Zero(m_, m_);
            out.diagonal() = diag.cast<std::complex<double>>();
            return out;
        }
        case Mode::generic:
        default: {
            const auto& dgs = dgs_[s];
            MatrixXcd acc = MatrixXcd::Zero(m_, m_);
            for (int jc = 0; jc < k_; ++jc) {
                MatrixXcd e = MatrixXcd::Zero(t_, m_);
                for (int i = 0; i < k_; ++i) e += w(i, jc) * dgs[i];
                acc += dgs[jc].adjoint() * e;
            }
            return hermitian_part(acc);
        }
    }
}

VectorXd FimCache::unitary_weight_spectrum(int s, const VectorXd& weights) const {
    return (cols_[s].cwiseAbs2() * weights).eval();
}

namespace {

struct FimInverse {
    bool singular = false;
    MatrixXcd inv;      // valid when !singular
    double trace_a_inv = 0.0;
};

// Invert a Hermitian PSD FIM; singular when any eigenvalue falls below the
// scale-free threshold 1e-12 tr(J)/K.
FimInverse invert_fim(const MatrixXcd& j, const VectorXd& weights, bool need_inverse) {
    FimInverse out;
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(j);
    const VectorXd ev = es.eigenvalues();
    const double tr = std::max(ev.sum(), 0.0);
    const double rank_tol = 1e-12 * tr / static_cast<double>(j.rows());
    if (!(tr > 0.0) || ev.minCoeff() <= rank_tol) {
        out.singular = true;
        return out;
    }
    const MatrixXcd v = es.eigenvectors();
    const MatrixXcd inv = v * ev.cwiseInverse().asDiagonal() * v.adjoint();
    out.trace_a_inv = (weights.array() * inv.diagonal().real().array()).sum();
    if (need_inverse) out.inv = inv;
    return out;
}

MatrixXcd weighted_w(const MatrixXcd& j_inv, const VectorXd& weights) {
    // W = J^{-1} A J^{-1} with A = diag(weights).
    return j_inv * weights.asDiagonal() * j_inv;
}

}  // namespace

EcrbObjective::EcrbObjective(std::shared_ptr<const FimCache> cache, VectorXd weights)
    : cache_(std::move(cache)), weights_(std::move(weights)) {
    if (weights_.size() != cache_->param_dim())
        throw InvalidInput("EcrbObjective: weights dimension mismatch");
}

double EcrbObjective::value(const MatrixXcd& q) const {
    const int n = cache_->sample_count();
    std::vector<double> vals(static_cast<std::size_t>(n));
    std::vector<char> singular(static_cast<std::size_t>(n), 0);
    parallel_for(n, [&](std::ptrdiff_t s) {
        const FimInverse r = invert_fim(cache_->fim(static_cast<int>(s), q), weights_, false);
        singular[s] = r.singular ? 1 : 0;
        vals[s] = r.trace_a_inv;
    });
    for (char c : singular)
        if (c) return kInf;
    return pairwise_sum(vals) / static_cast<double>(n);
}

MatrixXcd EcrbObjective::gradient(const MatrixXcd& q) const {
    const int n = cache_->sample_count();
    const int m = cache_->input_dim();
    std::vector<MatrixXcd> terms(static_cast<std::size_t>(n));
    std::vector<char> singular(static_cast<std::size_t>(n), 0);
    parallel_for(n, [&](std::ptrdiff_t s) {
        const FimInverse r = invert_fim(cache_->fim(static_cast<int>(s), q), weights_, true);
        if (r.singular) {
            singular[s] = 1;
            return;
        }
        terms[s] = cache_->gradient_term(static_cast<int>(s), weighted_w(r.inv, weights_));
    });
    for (char c : singular)
        if (c) throw SingularFim("ecrb_gradient: singular FIM at a prior sample");
    MatrixXcd acc = MatrixXcd::Zero(m, m);
    for (const MatrixXcd& t : terms) acc += t;
    return -(cache_->kind_factor() / static_cast<double>(n)) * acc;
}

BcrbObjective::BcrbObjective(std::shared_ptr<const FimCache> cache, VectorXd weights)
    : cache_(std::move(cache)), weights_(std::move(weights)) {
    if (weights_.size() != cache_->param_dim())
        throw InvalidInput("BcrbObjective: weights dimension mismatch");
}

namespace {

MatrixXcd mean_fim(const FimCache& cache, const MatrixXcd& q) {
    const int n = cache.sample_count();
    std::vector<MatrixXcd> js(static_cast<std::size_t>(n));
    parallel_for(n, [&](std::ptrdiff_t s) { js[s] = cache.fim(static_cast<int>(s), q); });
    MatrixXcd acc = MatrixXcd::Zero(cache.param_dim(), cache.param_dim());
    for (const MatrixXcd& j : js) acc += j;
    return acc / static_cast<double>(n);
}

}  // namespace

double BcrbObjective::value(const MatrixXcd& q) const {
    const FimInverse r = invert_fim(mean_fim(*cache_, q), weights_, false);
    return r.singular ? kInf : r.trace_a_inv;
}

MatrixXcd BcrbObjective::gradient(const MatrixXcd& q) const {
    const FimInverse r = invert_fim(mean_fim(*cache_, q), weights_, true);
    if (r.singular) throw SingularFim("bcrb gradient: singular averaged FIM");
    const MatrixXcd w = weighted_w(r.inv, weights_);
    const int n = cache_->sample_count();
    const int m = cache_->input_dim();
    std::vector<MatrixXcd> terms(static_cast<std::size_t>(n));
    parallel_for(n, [&](std::ptrdiff_t s) {
        terms[s] = cache_->gradient_term(static_cast<int>(s), w);
    });
    MatrixXcd acc = MatrixXcd::Zero(m, m);
    for (const MatrixXcd& t : terms) acc += t;
    return -(cache_->kind_factor() / static_cast<double>(n)) * acc;
}

std::shared_ptr<const FimCache> make_fim_cache(const Scenario& scenario,
                                               std::span<const ParamVec> samples) {
    return std::make_shared<FimCache>(scenario.sensing, samples);
}

double ecrb_objective(const Scenario& scenario, std::span<const ParamVec> theta_samples,
                      const CovMatrix& q) {
    if (theta_samples.empty()) throw InvalidInput("ecrb_objective: empty sample set");
    return EcrbObjective(make_fim_cache(scenario, theta_samples), scenario.weights.a)
        .value(q.matrix());
}

MatrixXcd ecrb_gradient(const Scenario& scenario, std::span<const ParamVec> theta_samples,
                        const CovMatrix& q) {
    if (theta_samples.empty()) throw InvalidInput("ecrb_gradient: empty sample set");
    return EcrbObjective(make_fim_cache(scenario, theta_samples), scenario.weights.a)
        .gradient(q.matrix());
}

double bcrb_objective(const Scenario& scenario, std::span<const ParamVec> theta_samples,
                      const CovMatrix& q) {
    if (theta_samples.empty()) throw InvalidInput("bcrb_objective: empty sample set");
    return BcrbObjective(make_fim_cache(scenario, theta_samples), scenario.weights.a)
        .value(q.matrix());
}

}  // namespace cams
