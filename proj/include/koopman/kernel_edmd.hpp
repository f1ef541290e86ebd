#pragma once

#include <utility>

#include "koopman/dataset.hpp"
#include "koopman/dictionary.hpp"
#include "koopman/dmd.hpp"

namespace koopman {

/// Kernel EDMD: the lifted snapshot matrix is only accessed through the kernel.
///
/// G = Q Σ² Qᵀ is the Gram matrix of the training columns and K̂_U = Σ⁻¹ Qᵀ Â Q Σ⁻¹
/// is the operator restricted to the span of the lifted data. Eigenfunctions use the
/// left eigenvectors of K̂_U, stored column-wise in left_vectors (V_L = V⁻ᵀ).
struct KernelModel {
    Kernel kernel;
    Matrix g_gram;
    Matrix a_gram;
    Matrix q_eigvecs;
    Vector sigma;
    Matrix k_hat_u;
    EigenPairs<double> eigen;
    CMatrix left_vectors;
    Matrix training_x;
    CMatrix modes;
    Index observable_dim = 0;

    /// Set when V was too ill-conditioned to invert and a pseudoinverse was used.
    bool singular_eigenvectors = false;

    Index rank() const { return sigma.size(); }

    /// Every eigenfunction evaluated at z.
    CVector eigenfunctions(const Vector& z) const;
};

/// G(i, j) = k(xᵢ, xⱼ) and Â(i, j) = k(xᵢ, x'ⱼ).
std::pair<Matrix, Matrix> gram_matrices(const SnapshotPair& pair, const Kernel& kern);

KernelModel fit_kernel_edmd(const SnapshotPair& pair, const Kernel& kern, double rtol = default_rtol);

std::complex<double> kernel_eigenfunction(const KernelModel& model, Index i, const Vector& z);

/// observed_x · Q · Σ⁻¹ · V_L⁻ᵀ; columns are Koopman modes in observable space.
CMatrix kernel_modes(const KernelModel& model, const Matrix& observed_x, bool* used_pinv = nullptr);

Prediction predict(const KernelModel& model, const Vector& g0, Index steps);

}  // namespace koopman
