#pragma once

#include <string>
#include <vector>

#include "koopman/dataset.hpp"
#include "koopman/numerics.hpp"

namespace koopman {

/// Eigenvalues below this magnitude get a zero mode instead of a division by λ.
inline constexpr double zero_eigenvalue_tol = 1e-12;
/// Matrices above this condition number are treated as singular.
inline constexpr double singular_condition = 1e12;

/// Multi-step forecast in observable space.
struct Prediction {
    std::vector<Vector> steps;
    /// Largest imaginary part discarded from the outputs.
    double max_imag_residue = 0.0;
    /// Set when the eigenfunction coefficients came from a rank-deficient projection.
    bool projection_warning = false;
};

/// g_m = Σᵢ λᵢᵐ φᵢ vᵢ for m = 1..steps.
Prediction spectral_predict(const CVector& eigenvalues, const CMatrix& modes, const CVector& phi0, Index steps);

/// Least-squares expansion coefficients of g in the columns of modes.
CVector project_onto_modes(const CMatrix& modes, const Vector& g, bool* rank_deficient = nullptr);

/// Companion-matrix fit X' = X C on the leading full-rank Krylov window.
struct CompanionFit {
    Matrix c_matrix;
    CVector eigenvalues;
    /// Row i holds 1, λᵢ, λᵢ², ...
    CMatrix vandermonde_t;
    /// X T⁻¹, so that column t of the window equals Σᵢ λᵢᵗ modes.col(i).
    CMatrix modes;
    /// Number of snapshot columns in the window.
    Index window = 0;
    double fit_residual = 0.0;
};

CompanionFit fit_companion(const SnapshotPair& pair);

Prediction predict(const CompanionFit& fit, const Vector& g0, Index steps);

/// Reduced operator and spectral decomposition from SVD-based DMD.
struct KoopmanModel {
    Matrix k_hat;
    CVector eigenvalues;
    CMatrix eigenvectors_p;
    CMatrix modes_v;
    /// P⁻¹ Uᵀ: row i evaluates the i-th eigenfunction on an observable vector.
    CMatrix eigenfunction_rows;
    SvdFactors<double> svd;
    std::string algorithm_tag = "dmd";
    Index observable_dim = 0;

    /// Indices whose eigenvalue is numerically zero; their modes are zero columns.
    std::vector<Index> zero_modes;
    bool degenerate = false;
    /// ‖X' − Â X‖_F / ‖X'‖_F with Â = U K̂ Uᵀ.
    double fit_residual = 0.0;
    /// ‖X' − V Λ Φ(X)‖_F / ‖X'‖_F.
    double reconstruction_residual = 0.0;

    /// U K̂ Uᵀ, the operator in the original observable coordinates.
    Matrix full_operator() const { return svd.u * k_hat * svd.u.transpose(); }

    CVector eigenfunctions(const Vector& g) const;
};

KoopmanModel fit_svd_dmd(const SnapshotPair& pair, double rtol = default_rtol);

/// vᵢ = (1/λᵢ) X' W Σ⁻¹ pᵢ. Columns for numerically zero λᵢ are left at zero.
CMatrix dmd_modes(const KoopmanModel& model, const SnapshotPair& pair);

Prediction predict(const KoopmanModel& model, const Vector& g0, Index steps);

struct EmbeddingSweepEntry {
    Index depth;
    Index rank;
    double fit_residual;
};

/// Fits SVD-DMD at each embedding depth and reports the one-step residual.
std::vector<EmbeddingSweepEntry> sweep_embedding_depth(const Trajectory& traj, const std::vector<Index>& depths,
                                                       double rtol = default_rtol);

}  // namespace koopman
