#pragma once

#include <complex>
#include <limits>
#include <random>
#include <vector>

#include "koopman/numerics.hpp"

namespace testing {

using namespace koopman;

// Largest distance after greedily pairing each entry of a with its nearest unused entry of b.
// Infinity when the sizes differ.
inline double spectrum_distance(const CVector& a, const CVector& b)
{
    if (a.size() != b.size())
        return std::numeric_limits<double>::infinity();
    std::vector<bool> used(static_cast<std::size_t>(b.size()), false);
    double worst = 0.0;
    for (Index i = 0; i < a.size(); ++i) {
        Index best = -1;
        double best_d = std::numeric_limits<double>::infinity();
        for (Index j = 0; j < b.size(); ++j) {
            const double d = std::abs(a(i) - b(j));
            if (!used[static_cast<std::size_t>(j)] && d < best_d) {
                best = j;
                best_d = d;
            }
        }
        used[static_cast<std::size_t>(best)] = true;
        worst = std::max(worst, best_d);
    }
    return worst;
}

inline CVector nonzero_part(const CVector& values, double tol)
{
    std::vector<std::complex<double>> kept;
    for (Index i = 0; i < values.size(); ++i)
        if (std::abs(values(i)) > tol)
            kept.push_back(values(i));
    return Eigen::Map<const CVector>(kept.data(), static_cast<Index>(kept.size()));
}

inline double distance_to(const CVector& values, std::complex<double> target)
{
    double best = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < values.size(); ++i)
        best = std::min(best, std::abs(values(i) - target));
    return best;
}

// Sine of the angle between two complex directions, ignoring scale and phase.
inline double subspace_angle(const CVector& a, const CVector& b)
{
    const CVector ua = a.normalized();
    const CVector ub = b.normalized();
    return (ub - ua * ua.dot(ub)).norm();
}

inline CVector to_complex(std::initializer_list<std::complex<double>> values)
{
    CVector out(static_cast<Index>(values.size()));
    Index i = 0;
    for (auto v : values)
        out(i++) = v;
    return out;
}

inline Matrix random_matrix(Index rows, Index cols, std::mt19937_64& rng)
{
    std::normal_distribution<double> normal;
    Matrix m(rows, cols);
    for (Index i = 0; i < m.size(); ++i)
        m(i) = normal(rng);
    return m;
}

}  // namespace testing
