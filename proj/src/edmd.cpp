#include "koopman/edmd.hpp"

namespace koopman {

SnapshotPair lift_snapshots(const SnapshotPair& pair, const Dictionary& dict)
{
    if (pair.rows() != dict.input_dim())
        throw ShapeError("lift_snapshots: dictionary expects " + std::to_string(dict.input_dim()) +
                         " observables, snapshots have " + std::to_string(pair.rows()));
    SnapshotPair out;
    out.x = dict.lift(pair.x);
    out.xp = dict.lift(pair.xp);
    out.col_times = pair.col_times;
    return out;
}

CVector EdmdModel::eigenfunctions(const Vector& z) const
{
    const Vector coords = svd.u.transpose() * dictionary(z);
    return b_coeffs * coords.cast<std::complex<double>>();
}

EdmdModel fit_edmd(const SnapshotPair& pair, const Dictionary& dict, double rtol)
{
    if (pair.cols() < 1)
        throw ShapeError("fit_edmd: need at least one snapshot pair");
    require_finite(pair.x, "fit_edmd");
    require_finite(pair.xp, "fit_edmd");
    const SnapshotPair lifted = lift_snapshots(pair, dict);

    EdmdModel model;
    model.dictionary = dict;
    model.observable_dim = pair.rows();
    model.svd = svd_truncated(lifted.x, rtol);

    const auto& svd = model.svd;
    const Vector inv_sigma = svd.sigma.cwiseInverse();
    model.k_hat = svd.u.transpose() * lifted.xp * svd.w * inv_sigma.asDiagonal();
    model.eigen = eig(model.k_hat);

    const double lifted_scale = lifted.xp.norm();
    const double lifted_error = (lifted.xp - model.lifted_operator() * lifted.x).norm();
    model.lifted_residual = lifted_scale > 0 ? lifted_error / lifted_scale : lifted_error;

    // Observables expanded in the dictionary by least squares.
    model.d_coeffs = pair.x * pinv(lifted.x, rtol);
    const double obs_scale = pair.x.norm();
    const double obs_error = (pair.x - model.d_coeffs * lifted.x).norm();
    model.d_residual = obs_scale > 0 ? obs_error / obs_scale : obs_error;

    const CMatrix& p = model.eigen.vectors;
    if (condition_number(p) >= singular_condition) {
        model.modes_available = false;
        model.b_coeffs = pinv(p);
        return model;
    }
    model.b_coeffs = p.inverse();
    model.modes_v = model.d_coeffs.cast<std::complex<double>>() * svd.u.cast<std::complex<double>>() * p;
    return model;
}

std::complex<double> eval_eigenfunction(const EdmdModel& model, Index i, const Vector& z)
{
    if (i < 0 || i >= model.eigen.size())
        throw ShapeError("eval_eigenfunction: index " + std::to_string(i) + " out of range");
    const Vector coords = model.svd.u.transpose() * model.dictionary(z);
    return model.b_coeffs.row(i) * coords.cast<std::complex<double>>();
}

Prediction predict(const EdmdModel& model, const Vector& g0, Index steps)
{
    if (!model.modes_available)
        throw ConditioningError("predict: EDMD modes unavailable because the eigenvector matrix is singular");
    if (g0.size() != model.observable_dim)
        throw ShapeError("predict: initial observable has dimension " + std::to_string(g0.size()) +
                         ", model expects " + std::to_string(model.observable_dim));
    return spectral_predict(model.eigen.values, model.modes_v, model.eigenfunctions(g0), steps);
}

}  // namespace koopman
