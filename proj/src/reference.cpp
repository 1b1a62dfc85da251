#include "cams/reference.hpp"

#include "cams/information.hpp"

namespace cams::ref {

namespace {

struct Inverted {
    bool singular = false;
    MatrixXcd inv;
};

Inverted invert(const MatrixXcd& j) {
    Inverted out;
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(j);
    const VectorXd ev = es.eigenvalues();
    const double tr = std::max(ev.sum(), 0.0);
    if (!(tr > 0.0) || ev.minCoeff() <= 1e-12 * tr / static_cast<double>(j.rows())) {
        out.singular = true;
        return out;
    }
    out.inv = es.eigenvectors() * ev.cwiseInverse().asDiagonal() * es.eigenvectors().adjoint();
    return out;
}

}  // namespace

double ecrb_objective(const SensingModel& model, const VectorXd& weights,
                      std::span<const ParamVec> samples, const CovMatrix& q) {
    double acc = 0.0;
    for (const ParamVec& theta : samples) {
        const Inverted r = invert(conditional_fim(model, theta, q).entries);
        if (r.singular) return kInf;
        acc += (weights.array() * r.inv.diagonal().real().array()).sum();
    }
    return acc / static_cast<double>(samples.size());
}

MatrixXcd ecrb_gradient(const SensingModel& model, const VectorXd& weights,
                        std::span<const ParamVec> samples, const CovMatrix& q) {
    const int k = model.param_dim;
    const int m = static_cast<int>(q.dim());
    const double c = (model.param_kind == ParamKind::real ? 2.0 : 1.0) / model.noise_var;
    MatrixXcd acc = MatrixXcd::Zero(m, m);
    for (const ParamVec& theta : samples) {
        const Inverted r = invert(conditional_fim(model, theta, q).entries);
        if (r.singular) throw SingularFim("reference ecrb_gradient: singular FIM");
        const MatrixXcd w = r.inv * weights.asDiagonal() * r.inv;
        std::vector<MatrixXcd> dgs(k);
        for (int i = 0; i < k; ++i) dgs[i] = model.dg(theta, i);
        MatrixXcd term = MatrixXcd::Zero(m, m);
        for (int jc = 0; jc < k; ++jc)
            for (int i = 0; i < k; ++i) term += w(i, jc) * (dgs[jc].adjoint() * dgs[i]);
        acc += hermitian_part(term);
    }
    return -(c / static_cast<double>(samples.size())) * acc;
}

double bcrb_objective(const SensingModel& model, const VectorXd& weights,
                      std::span<const ParamVec> samples, const CovMatrix& q) {
    const int k = model.param_dim;
    MatrixXcd mean = MatrixXcd::Zero(k, k);
    for (const ParamVec& theta : samples) mean += conditional_fim(model, theta, q).entries;
    mean /= static_cast<double>(samples.size());
    const Inverted r = invert(mean);
    if (r.singular) return kInf;
    return (weights.array() * r.inv.diagonal().real().array()).sum();
}

}  // namespace cams::ref
