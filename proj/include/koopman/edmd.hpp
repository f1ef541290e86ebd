#pragma once

#include "koopman/dataset.hpp"
#include "koopman/dictionary.hpp"
#include "koopman/dmd.hpp"

namespace koopman {

/// Explicit EDMD fit on dictionary-lifted snapshots.
///
/// The regression runs on the rank retained by the SVD of the lifted matrix Θ = U Σ Wᵀ.
/// K̂ is stored in those reduced coordinates, B = P⁻¹ acts on Uᵀθ(z), and the modes
/// V = D·U·P map eigenfunction values back to observables.
struct EdmdModel {
    Dictionary dictionary;
    Matrix k_hat;
    EigenPairs<double> eigen;
    CMatrix b_coeffs;
    Matrix d_coeffs;
    CMatrix modes_v;
    SvdFactors<double> svd;
    Index observable_dim = 0;

    /// False when P is numerically singular; modes_v is then empty.
    bool modes_available = true;
    /// ‖Θ' − Â Θ‖_F / ‖Θ'‖_F; large values mean the dictionary span is not invariant.
    double lifted_residual = 0.0;
    /// ‖X − D Θ‖_F / ‖X‖_F for the observable expansion.
    double d_residual = 0.0;

    /// U K̂ Uᵀ in dictionary coordinates.
    Matrix lifted_operator() const { return svd.u * k_hat * svd.u.transpose(); }

    /// Every eigenfunction evaluated at z: B Uᵀ θ(z).
    CVector eigenfunctions(const Vector& z) const;
};

SnapshotPair lift_snapshots(const SnapshotPair& pair, const Dictionary& dict);

EdmdModel fit_edmd(const SnapshotPair& pair, const Dictionary& dict, double rtol = default_rtol);

std::complex<double> eval_eigenfunction(const EdmdModel& model, Index i, const Vector& z);

Prediction predict(const EdmdModel& model, const Vector& g0, Index steps);

}  // namespace koopman
