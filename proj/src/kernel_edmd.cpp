#include "koopman/kernel_edmd.hpp"

namespace koopman {

std::pair<Matrix, Matrix> gram_matrices(const SnapshotPair& pair, const Kernel& kern)
{
    if (pair.x.size() == 0)
        throw ShapeError("gram_matrices: empty snapshot pair");
    if (pair.x.rows() != pair.xp.rows() || pair.x.cols() != pair.xp.cols())
        throw ShapeError("gram_matrices: x and xp differ in shape");
    return {gram(kern, pair.x, pair.x), gram(kern, pair.x, pair.xp)};
}

CVector KernelModel::eigenfunctions(const Vector& z) const
{
    const Vector k = kernel_row(kernel, z, training_x);
    const Vector coords = sigma.cwiseInverse().asDiagonal() * (q_eigvecs.transpose() * k);
    return left_vectors.transpose() * coords.cast<std::complex<double>>();
}

KernelModel fit_kernel_edmd(const SnapshotPair& pair, const Kernel& kern, double rtol)
{
    if (!(rtol >= 0.0 && rtol < 1.0))
        throw ParameterError("fit_kernel_edmd: rtol must lie in [0, 1)");
    require_finite(pair.x, "fit_kernel_edmd");
    require_finite(pair.xp, "fit_kernel_edmd");

    KernelModel model;
    model.kernel = kern;
    model.training_x = pair.x;
    model.observable_dim = pair.rows();
    std::tie(model.g_gram, model.a_gram) = gram_matrices(pair, kern);

    Eigen::SelfAdjointEigenSolver<Matrix> solver(model.g_gram);
    if (solver.info() != Eigen::Success)
        throw ConditioningError("fit_kernel_edmd: Gram eigendecomposition failed");

    // Eigenvalues arrive ascending; Σ is the square root of the clamped eigenvalues.
    const Index n = model.g_gram.rows();
    const Vector s = solver.eigenvalues().reverse().cwiseMax(0.0).cwiseSqrt();
    if (!(s(0) > 0))
        throw EmptyRankError("fit_kernel_edmd: Gram matrix is numerically zero");
    Index rank = 0;
    while (rank < n && s(rank) > rtol * s(0))
        ++rank;
    model.sigma = s.head(rank);
    model.q_eigvecs = solver.eigenvectors().rowwise().reverse().leftCols(rank);

    const Vector inv_sigma = model.sigma.cwiseInverse();
    model.k_hat_u = inv_sigma.asDiagonal() * model.q_eigvecs.transpose() * model.a_gram * model.q_eigvecs *
                    inv_sigma.asDiagonal();
    model.eigen = eig(model.k_hat_u);

    const CMatrix& v = model.eigen.vectors;
    model.singular_eigenvectors = condition_number(v) >= singular_condition;
    model.left_vectors = model.singular_eigenvectors ? CMatrix(pinv(v).transpose()) : CMatrix(v.inverse().transpose());

    bool used_pinv = false;
    model.modes = kernel_modes(model, pair.x, &used_pinv);
    model.singular_eigenvectors = model.singular_eigenvectors || used_pinv;
    return model;
}

std::complex<double> kernel_eigenfunction(const KernelModel& model, Index i, const Vector& z)
{
    if (i < 0 || i >= model.eigen.size())
        throw ShapeError("kernel_eigenfunction: index " + std::to_string(i) + " out of range");
    if (z.size() != model.training_x.rows())
        throw ShapeError("kernel_eigenfunction: dimension mismatch");
    return model.eigenfunctions(z)(i);
}

CMatrix kernel_modes(const KernelModel& model, const Matrix& observed_x, bool* used_pinv)
{
    if (observed_x.cols() != model.q_eigvecs.rows())
        throw ShapeError("kernel_modes: observed columns must align with the training snapshots");
    const bool singular = condition_number(model.left_vectors) >= singular_condition;
    if (used_pinv)
        *used_pinv = singular;
    const CMatrix inv_t = singular ? CMatrix(pinv(model.left_vectors).transpose())
                                   : CMatrix(model.left_vectors.inverse().transpose());
    const Matrix projected = observed_x * model.q_eigvecs * model.sigma.cwiseInverse().asDiagonal();
    return projected.cast<std::complex<double>>() * inv_t;
}

Prediction predict(const KernelModel& model, const Vector& g0, Index steps)
{
    if (g0.size() != model.modes.rows())
        throw ShapeError("predict: initial observable has dimension " + std::to_string(g0.size()) +
                         ", model expects " + std::to_string(model.modes.rows()));
    return spectral_predict(model.eigen.values, model.modes, model.eigenfunctions(g0), steps);
}

}  // namespace koopman
