#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "koopman/numerics.hpp"

namespace koopman {

/// Exponent vector of one monomial, one entry per input variable.
using Exponents = std::vector<int>;

/// All monomials of total degree <= degree, grouped by degree and in descending
/// lexicographic exponent order within a degree: 1, x1, x2, x1², x1x2, x2², ...
std::vector<Exponents> monomial_exponents(Index dim, int degree);

/// Coefficient of a^e b^e in the expansion of (1 + aᵀb)^degree.
double multinomial_weight(const Exponents& e, int degree);

struct NamedFunction {
    std::string name;
    std::function<double(const Vector&)> eval;
};

/// Finite set of scalar observables θ₁..θ_k.
class Dictionary {
public:
    enum class Kind { identity, polynomial, rbf, custom };

    static Dictionary identity(Index dim);
    /// Weighted monomials carry sqrt(multinomial_weight) so that θ(a)ᵀθ(b) = (1 + aᵀb)^degree.
    static Dictionary polynomial(Index dim, int degree, bool weighted = false);
    static Dictionary rbf(Matrix centers, double width);
    static Dictionary custom(Index dim, std::vector<NamedFunction> functions);

    Kind kind() const { return kind_; }
    Index input_dim() const { return input_dim_; }
    Index output_dim() const;
    int degree() const { return degree_; }
    bool weighted() const { return weighted_; }
    double width() const { return width_; }
    const Matrix& centers() const { return centers_; }
    const std::vector<Exponents>& exponents() const { return exponents_; }
    /// Scale applied to each monomial (all ones unless weighted).
    const Vector& monomial_scale() const { return scale_; }

    std::vector<std::string> names() const;
    /// Round-trips through parse_dictionary, except for custom dictionaries.
    std::string spec() const;

    template <typename Derived>
    Vector operator()(const Eigen::MatrixBase<Derived>& z) const
    {
        if (z.size() != input_dim_)
            throw ShapeError("dictionary: expected input of dimension " + std::to_string(input_dim_) + ", got " +
                             std::to_string(z.size()));
        return evaluate(Vector(z));
    }

    /// Applies θ to every column.
    Matrix lift(const Matrix& columns) const;

private:
    Vector evaluate(const Vector& z) const;

    Kind kind_ = Kind::identity;
    Index input_dim_ = 0;
    int degree_ = 1;
    bool weighted_ = false;
    double width_ = 1.0;
    Matrix centers_;
    std::vector<Exponents> exponents_;
    Vector scale_;
    std::vector<NamedFunction> functions_;
};

inline Vector eval_dictionary(const Dictionary& dict, const Vector& z) { return dict(z); }

/// Parses `identity`, `poly:α`, `wpoly:α` or `rbf:σ:N`. RBF centers are a uniformly
/// strided subsample of the training columns.
Dictionary parse_dictionary(std::string_view spec, const Matrix& training_columns);

/// Kernel standing in for an implicit dictionary inner product.
struct Kernel {
    enum class Kind { polynomial, gaussian, paper_rbf };

    Kind kind = Kind::gaussian;
    int degree = 1;
    double sigma = 1.0;

    static Kernel polynomial(int degree);
    static Kernel gaussian(double sigma);
    /// exp(−‖a−b‖/σ²), with the unsquared norm.
    static Kernel paper_rbf(double sigma);

    std::string spec() const;
};

/// Parses `poly:α`, `gaussian:σ` or `paper_rbf:σ`.
Kernel parse_kernel(std::string_view spec);

template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar eval_kernel(const Kernel& kern, const Eigen::MatrixBase<DerivedA>& a,
                                      const Eigen::MatrixBase<DerivedB>& b)
{
    using Scalar = typename DerivedA::Scalar;
    if (a.size() != b.size())
        throw ShapeError("eval_kernel: arguments differ in dimension");
    switch (kern.kind) {
    case Kernel::Kind::polynomial:
        return std::pow(Scalar(1) + a.dot(b), kern.degree);
    case Kernel::Kind::gaussian:
        return std::exp(-(a - b).squaredNorm() / Scalar(kern.sigma * kern.sigma));
    case Kernel::Kind::paper_rbf:
        return std::exp(-(a - b).norm() / Scalar(kern.sigma * kern.sigma));
    }
    return Scalar(0);
}

/// out(i, j) = k(column i of a, column j of b).
Matrix gram(const Kernel& kern, const Matrix& a, const Matrix& b);

/// Kernel evaluations of z against every column of columns.
Vector kernel_row(const Kernel& kern, const Vector& z, const Matrix& columns);

}  // namespace koopman
