#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "koopman/errors.hpp"

namespace koopman {

using Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Default relative threshold for discarding singular values.
inline constexpr double default_rtol = 1e-10;

/// Thin SVD restricted to the retained rank: m ≈ u · diag(sigma) · wᵀ.
template <typename Scalar>
struct SvdFactors {
    using RealScalar = typename Eigen::NumTraits<Scalar>::Real;

    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> u;
    Eigen::Matrix<RealScalar, Eigen::Dynamic, 1> sigma;
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> w;

    Index rank() const { return sigma.size(); }

    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> reconstruct() const
    {
        return u * sigma.template cast<Scalar>().asDiagonal() * w.adjoint();
    }
};

/// Eigenvalues with unit-norm eigenvectors stored column-wise.
template <typename RealScalar>
struct EigenPairs {
    using Complex = std::complex<RealScalar>;

    Eigen::Matrix<Complex, Eigen::Dynamic, 1> values;
    Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic> vectors;

    Index size() const { return values.size(); }
};

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m, const char* what)
{
    if (!m.allFinite())
        throw ParameterError(std::string(what) + ": matrix contains NaN or Inf");
}

/// Keeps exactly the singular values above rtol times the largest one.
template <typename Derived>
SvdFactors<typename Derived::Scalar> svd_truncated(const Eigen::MatrixBase<Derived>& m,
                                                   double rtol = default_rtol)
{
    using Scalar = typename Derived::Scalar;
    using PlainMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    if (m.size() == 0)
        throw ShapeError("svd_truncated: empty matrix");
    if (!(rtol >= 0.0 && rtol < 1.0))
        throw ParameterError("svd_truncated: rtol must lie in [0, 1)");
    require_finite(m, "svd_truncated");

    Eigen::BDCSVD<PlainMatrix> svd(PlainMatrix(m), Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || !(s(0) > 0))
        throw EmptyRankError("svd_truncated: matrix is numerically zero");

    const auto threshold = rtol * s(0);
    Index rank = 0;
    while (rank < s.size() && s(rank) > threshold)
        ++rank;

    SvdFactors<Scalar> out;
    out.u = svd.matrixU().leftCols(rank);
    out.sigma = s.head(rank);
    out.w = svd.matrixV().leftCols(rank);
    return out;
}

/// Moore–Penrose pseudoinverse through the truncated SVD. A zero matrix maps to zeros.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>
pinv(const Eigen::MatrixBase<Derived>& m, double rtol = default_rtol)
{
    using Scalar = typename Derived::Scalar;
    using PlainMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    if (m.size() == 0)
        throw ShapeError("pinv: empty matrix");
    require_finite(m, "pinv");

    Eigen::BDCSVD<PlainMatrix> svd(PlainMatrix(m), Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    PlainMatrix out = PlainMatrix::Zero(m.cols(), m.rows());
    if (s.size() == 0 || !(s(0) > 0))
        return out;
    const auto threshold = rtol * s(0);
    for (Index i = 0; i < s.size() && s(i) > threshold; ++i)
        out += (svd.matrixV().col(i) / Scalar(s(i))) * svd.matrixU().col(i).adjoint();
    return out;
}

/// Ratio of largest to smallest singular value; infinity when rank-deficient.
template <typename Derived>
double condition_number(const Eigen::MatrixBase<Derived>& m)
{
    using PlainMatrix = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    if (m.size() == 0)
        return 0.0;
    const Eigen::BDCSVD<PlainMatrix> svd{PlainMatrix(m)};
    const auto& s = svd.singularValues();
    const double smallest = static_cast<double>(s(s.size() - 1));
    if (s.size() < std::min(m.rows(), m.cols()) || !(smallest > 0))
        return std::numeric_limits<double>::infinity();
    return static_cast<double>(s(0)) / smallest;
}

/// Unit 2-norm, first non-negligible component rotated onto the positive real axis.
template <typename Derived>
void normalize_eigenvector(Eigen::MatrixBase<Derived>&& v)
{
    using RealScalar = typename Eigen::NumTraits<typename Derived::Scalar>::Real;
    const RealScalar norm = v.norm();
    if (!(norm > 0))
        return;
    v /= norm;
    const RealScalar tiny = RealScalar(1e-10);
    for (Index k = 0; k < v.size(); ++k) {
        if (std::abs(v(k)) > tiny) {
            v *= std::conj(v(k)) / std::abs(v(k));
            break;
        }
    }
}

/// Orders eigenvalues by descending modulus, ties broken by descending imaginary part.
template <typename RealScalar>
std::vector<Index> spectral_order(const Eigen::Matrix<std::complex<RealScalar>, Eigen::Dynamic, 1>& values)
{
    std::vector<Index> order(static_cast<std::size_t>(values.size()));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
        const RealScalar ma = std::abs(values(a));
        const RealScalar mb = std::abs(values(b));
        if (ma != mb)
            return ma > mb;
        return values(a).imag() > values(b).imag();
    });
    return order;
}

/// Eigen-decomposition of a real square matrix, sorted and normalized.
template <typename Derived>
EigenPairs<typename Derived::Scalar> eig(const Eigen::MatrixBase<Derived>& m)
{
    using Scalar = typename Derived::Scalar;
    using PlainMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    static_assert(!Eigen::NumTraits<Scalar>::IsComplex, "eig expects a real matrix");

    if (m.rows() != m.cols())
        throw ShapeError("eig: matrix must be square");
    require_finite(m, "eig");

    EigenPairs<Scalar> out;
    if (m.rows() == 0)
        return out;

    Eigen::EigenSolver<PlainMatrix> solver(PlainMatrix(m), true);
    if (solver.info() != Eigen::Success)
        throw ConditioningError("eig: eigenvalue iteration did not converge");

    const auto values = solver.eigenvalues();
    const auto vectors = solver.eigenvectors();
    const auto order = spectral_order<Scalar>(values);

    out.values.resize(values.size());
    out.vectors.resize(vectors.rows(), vectors.cols());
    for (std::size_t k = 0; k < order.size(); ++k) {
        const auto j = static_cast<Index>(k);
        out.values(j) = values(order[k]);
        out.vectors.col(j) = vectors.col(order[k]);
        normalize_eigenvector(out.vectors.col(j));
    }
    return out;
}

/// Largest relative residual ‖M vᵢ − λᵢ vᵢ‖ / ‖M‖_F over all pairs.
template <typename Derived, typename RealScalar>
double eig_residual(const Eigen::MatrixBase<Derived>& m, const EigenPairs<RealScalar>& pairs)
{
    const auto mc = m.template cast<std::complex<RealScalar>>().eval();
    const double scale = std::max(static_cast<double>(m.norm()), std::numeric_limits<double>::min());
    double worst = 0.0;
    for (Index i = 0; i < pairs.size(); ++i) {
        const auto r = (mc * pairs.vectors.col(i) - pairs.values(i) * pairs.vectors.col(i)).norm();
        worst = std::max(worst, static_cast<double>(r) / scale);
    }
    return worst;
}

}  // namespace koopman
