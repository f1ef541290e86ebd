#include "koopman/dmd.hpp"

namespace koopman {

namespace {

void check_pair(const SnapshotPair& pair, const char* who)
{
    if (pair.x.size() == 0)
        throw ShapeError(std::string(who) + ": empty snapshot pair");
    if (pair.x.rows() != pair.xp.rows() || pair.x.cols() != pair.xp.cols())
        throw ShapeError(std::string(who) + ": x and xp differ in shape");
    require_finite(pair.x, who);
    require_finite(pair.xp, who);
}

double relative(double num, double den) { return den > 0 ? num / den : num; }

}  // namespace

CVector project_onto_modes(const CMatrix& modes, const Vector& g, bool* rank_deficient)
{
    if (g.size() != modes.rows())
        throw ShapeError("prediction: initial observable has dimension " + std::to_string(g.size()) + ", model expects " +
                         std::to_string(modes.rows()));
    if (rank_deficient)
        *rank_deficient = modes.cols() > 0 && condition_number(modes) >= singular_condition;
    if (modes.cols() == 0)
        return CVector(0);
    return pinv(modes) * g.cast<std::complex<double>>();
}

Prediction spectral_predict(const CVector& eigenvalues, const CMatrix& modes, const CVector& phi0, Index steps)
{
    if (eigenvalues.size() != modes.cols() || phi0.size() != modes.cols())
        throw ShapeError("spectral_predict: eigenvalue, mode and coefficient counts differ");
    Prediction out;
    if (steps <= 0)
        return out;
    CVector phi = phi0;
    out.steps.reserve(static_cast<std::size_t>(steps));
    for (Index m = 1; m <= steps; ++m) {
        phi = eigenvalues.cwiseProduct(phi);
        const CVector g = modes * phi;
        out.max_imag_residue = std::max(out.max_imag_residue, g.size() ? g.imag().cwiseAbs().maxCoeff() : 0.0);
        out.steps.emplace_back(g.real());
    }
    return out;
}

CompanionFit fit_companion(const SnapshotPair& pair)
{
    check_pair(pair, "fit_companion");
    const Index n = pair.cols();
    if (n > 1 && pair.xp.leftCols(n - 1) != pair.x.rightCols(n - 1))
        throw ConfigError("fit_companion: snapshots must be consecutive samples of one trajectory");

    // Krylov columns past the numerical rank are linear combinations of the earlier ones.
    const Index rank = svd_truncated(pair.x, default_rtol).rank();
    const Matrix window = pair.x.leftCols(rank);
    if (condition_number(window) >= singular_condition)
        throw ConditioningError("fit_companion: leading snapshot window is rank-deficient; use SVD-based DMD instead");

    const Vector target = pair.xp.col(rank - 1);
    const Vector c = pinv(window) * target;

    CompanionFit fit;
    fit.window = rank;
    fit.c_matrix = Matrix::Zero(rank, rank);
    fit.c_matrix.diagonal(-1).setOnes();
    fit.c_matrix.col(rank - 1) = c;
    fit.fit_residual = relative((window * c - target).norm(), target.norm());

    const auto pairs = eig(fit.c_matrix);
    fit.eigenvalues = pairs.values;
    fit.vandermonde_t.resize(rank, rank);
    for (Index i = 0; i < rank; ++i) {
        std::complex<double> power = 1.0;
        for (Index j = 0; j < rank; ++j) {
            fit.vandermonde_t(i, j) = power;
            power *= fit.eigenvalues(i);
        }
    }
    if (condition_number(fit.vandermonde_t) >= singular_condition)
        throw ConditioningError("fit_companion: repeated eigenvalues make the Vandermonde matrix singular");
    fit.modes = window.cast<std::complex<double>>() * fit.vandermonde_t.inverse();
    return fit;
}

Prediction predict(const CompanionFit& fit, const Vector& g0, Index steps)
{
    bool deficient = false;
    const CVector phi = project_onto_modes(fit.modes, g0, &deficient);
    Prediction out = spectral_predict(fit.eigenvalues, fit.modes, phi, steps);
    out.projection_warning = deficient;
    return out;
}

CVector KoopmanModel::eigenfunctions(const Vector& g) const
{
    if (g.size() != eigenfunction_rows.cols())
        throw ShapeError("eigenfunctions: observable dimension mismatch");
    return eigenfunction_rows * g.cast<std::complex<double>>();
}

KoopmanModel fit_svd_dmd(const SnapshotPair& pair, double rtol)
{
    check_pair(pair, "fit_svd_dmd");

    KoopmanModel model;
    model.observable_dim = pair.rows();
    model.degenerate = pair.cols() < 2;
    model.svd = svd_truncated(pair.x, rtol);

    const auto& svd = model.svd;
    const Vector inv_sigma = svd.sigma.cwiseInverse();
    const Matrix projected = pair.xp * svd.w * inv_sigma.asDiagonal();
    model.k_hat = svd.u.transpose() * projected;

    const auto pairs = eig(model.k_hat);
    model.eigenvalues = pairs.values;
    model.eigenvectors_p = pairs.vectors;
    for (Index i = 0; i < model.eigenvalues.size(); ++i)
        if (std::abs(model.eigenvalues(i)) < zero_eigenvalue_tol)
            model.zero_modes.push_back(i);

    const CMatrix p_inv = condition_number(model.eigenvectors_p) < singular_condition
                              ? CMatrix(model.eigenvectors_p.inverse())
                              : pinv(model.eigenvectors_p);
    model.eigenfunction_rows = p_inv * svd.u.transpose().cast<std::complex<double>>();
    model.modes_v = dmd_modes(model, pair);

    const double scale = pair.xp.norm();
    model.fit_residual = relative((pair.xp - model.full_operator() * pair.x).norm(), scale);
    const CMatrix phi = model.eigenfunction_rows * pair.x.cast<std::complex<double>>();
    const CMatrix rebuilt = model.modes_v * model.eigenvalues.asDiagonal() * phi;
    model.reconstruction_residual = relative((pair.xp.cast<std::complex<double>>() - rebuilt).norm(), scale);
    return model;
}

CMatrix dmd_modes(const KoopmanModel& model, const SnapshotPair& pair)
{
    if (pair.cols() != model.svd.w.rows() || pair.rows() != model.observable_dim)
        throw ShapeError("dmd_modes: snapshot pair does not match the fitted model");
    const Vector inv_sigma = model.svd.sigma.cwiseInverse();
    const CMatrix lifted = (pair.xp * model.svd.w * inv_sigma.asDiagonal()).cast<std::complex<double>>();
    CMatrix modes = CMatrix::Zero(pair.rows(), model.eigenvalues.size());
    for (Index i = 0; i < model.eigenvalues.size(); ++i) {
        const auto lambda = model.eigenvalues(i);
        if (std::abs(lambda) < zero_eigenvalue_tol)
            continue;
        modes.col(i) = lifted * model.eigenvectors_p.col(i) / lambda;
    }
    return modes;
}

Prediction predict(const KoopmanModel& model, const Vector& g0, Index steps)
{
    bool deficient = false;
    const CVector phi = project_onto_modes(model.modes_v, g0, &deficient);
    Prediction out = spectral_predict(model.eigenvalues, model.modes_v, phi, steps);
    out.projection_warning = deficient || !model.zero_modes.empty();
    return out;
}

std::vector<EmbeddingSweepEntry> sweep_embedding_depth(const Trajectory& traj, const std::vector<Index>& depths,
                                                       double rtol)
{
    std::vector<EmbeddingSweepEntry> out;
    for (Index h : depths) {
        const auto model = fit_svd_dmd(snapshot_pairs(delay_embed(traj, h)), rtol);
        out.push_back({h, model.svd.rank(), model.fit_residual});
    }
    return out;
}

}  // namespace koopman
