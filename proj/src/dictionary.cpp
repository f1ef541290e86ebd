#include "koopman/dictionary.hpp"

#include <charconv>

#include "koopman/dataset.hpp"

namespace koopman {

namespace {

void append_degree(Index dim, int remaining, Exponents& current, std::size_t var, std::vector<Exponents>& out)
{
    if (var + 1 == static_cast<std::size_t>(dim)) {
        current[var] = remaining;
        out.push_back(current);
        return;
    }
    for (int e = remaining; e >= 0; --e) {
        current[var] = e;
        append_degree(dim, remaining - e, current, var + 1, out);
    }
}

double factorial(int n)
{
    double f = 1.0;
    for (int k = 2; k <= n; ++k)
        f *= k;
    return f;
}

std::vector<std::string_view> split_spec(std::string_view spec)
{
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const auto colon = spec.find(':', start);
        parts.push_back(spec.substr(start, colon == std::string_view::npos ? colon : colon - start));
        if (colon == std::string_view::npos)
            break;
        start = colon + 1;
    }
    return parts;
}

template <typename T>
T parse_field(std::string_view text, std::string_view spec)
{
    T value{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size())
        throw ConfigError("malformed spec '" + std::string(spec) + "'");
    return value;
}

int parse_degree(std::string_view text, std::string_view spec)
{
    const int degree = parse_field<int>(text, spec);
    if (degree < 1)
        throw ParameterError("polynomial degree must be at least 1 in '" + std::string(spec) + "'");
    return degree;
}

void require_width(double width)
{
    if (!(width > 0) || !std::isfinite(width))
        throw ParameterError("kernel width must be positive");
}

}  // namespace

std::vector<Exponents> monomial_exponents(Index dim, int degree)
{
    if (dim < 1 || degree < 0)
        throw ShapeError("monomial_exponents: need dim >= 1 and degree >= 0");
    std::vector<Exponents> out;
    Exponents current(static_cast<std::size_t>(dim), 0);
    for (int d = 0; d <= degree; ++d)
        append_degree(dim, d, current, 0, out);
    return out;
}

double multinomial_weight(const Exponents& e, int degree)
{
    int total = 0;
    double denom = 1.0;
    for (int k : e) {
        total += k;
        denom *= factorial(k);
    }
    if (total > degree)
        return 0.0;
    return factorial(degree) / (factorial(degree - total) * denom);
}

Dictionary Dictionary::identity(Index dim)
{
    if (dim < 1)
        throw ShapeError("identity dictionary needs dim >= 1");
    Dictionary d;
    d.kind_ = Kind::identity;
    d.input_dim_ = dim;
    return d;
}

Dictionary Dictionary::polynomial(Index dim, int degree, bool weighted)
{
    if (degree < 1)
        throw ParameterError("polynomial dictionary needs degree >= 1");
    Dictionary d;
    d.kind_ = Kind::polynomial;
    d.input_dim_ = dim;
    d.degree_ = degree;
    d.weighted_ = weighted;
    d.exponents_ = monomial_exponents(dim, degree);
    d.scale_ = Vector::Ones(static_cast<Index>(d.exponents_.size()));
    if (weighted)
        for (std::size_t k = 0; k < d.exponents_.size(); ++k)
            d.scale_(static_cast<Index>(k)) = std::sqrt(multinomial_weight(d.exponents_[k], degree));
    return d;
}

Dictionary Dictionary::rbf(Matrix centers, double width)
{
    require_width(width);
    if (centers.size() == 0)
        throw ShapeError("rbf dictionary needs at least one center");
    require_finite(centers, "rbf centers");
    Dictionary d;
    d.kind_ = Kind::rbf;
    d.input_dim_ = centers.rows();
    d.width_ = width;
    d.centers_ = std::move(centers);
    return d;
}

Dictionary Dictionary::custom(Index dim, std::vector<NamedFunction> functions)
{
    if (dim < 1 || functions.empty())
        throw ShapeError("custom dictionary needs dim >= 1 and at least one function");
    Dictionary d;
    d.kind_ = Kind::custom;
    d.input_dim_ = dim;
    d.functions_ = std::move(functions);
    return d;
}

Index Dictionary::output_dim() const
{
    switch (kind_) {
    case Kind::identity:
        return input_dim_;
    case Kind::polynomial:
        return static_cast<Index>(exponents_.size());
    case Kind::rbf:
        return centers_.cols();
    case Kind::custom:
        return static_cast<Index>(functions_.size());
    }
    return 0;
}

std::vector<std::string> Dictionary::names() const
{
    std::vector<std::string> out;
    switch (kind_) {
    case Kind::identity:
        for (Index i = 0; i < input_dim_; ++i)
            out.push_back("z" + std::to_string(i + 1));
        break;
    case Kind::polynomial:
        for (const auto& e : exponents_) {
            std::string name;
            for (std::size_t i = 0; i < e.size(); ++i) {
                if (e[i] == 0)
                    continue;
                if (!name.empty())
                    name += '*';
                name += "z" + std::to_string(i + 1);
                if (e[i] > 1)
                    name += '^' + std::to_string(e[i]);
            }
            out.push_back(name.empty() ? "1" : name);
        }
        break;
    case Kind::rbf:
        for (Index c = 0; c < centers_.cols(); ++c)
            out.push_back("rbf" + std::to_string(c + 1));
        break;
    case Kind::custom:
        for (const auto& f : functions_)
            out.push_back(f.name);
        break;
    }
    return out;
}

std::string Dictionary::spec() const
{
    switch (kind_) {
    case Kind::identity:
        return "identity";
    case Kind::polynomial:
        return (weighted_ ? "wpoly:" : "poly:") + std::to_string(degree_);
    case Kind::rbf:
        return "rbf:" + format_double(width_) + ":" + std::to_string(centers_.cols());
    case Kind::custom:
        return "custom";
    }
    return {};
}

Vector Dictionary::evaluate(const Vector& z) const
{
    switch (kind_) {
    case Kind::identity:
        return z;
    case Kind::polynomial: {
        Vector out(output_dim());
        for (std::size_t k = 0; k < exponents_.size(); ++k) {
            double value = scale_(static_cast<Index>(k));
            for (std::size_t i = 0; i < exponents_[k].size(); ++i)
                for (int p = 0; p < exponents_[k][i]; ++p)
                    value *= z(static_cast<Index>(i));
            out(static_cast<Index>(k)) = value;
        }
        return out;
    }
    case Kind::rbf: {
        Vector out(centers_.cols());
        for (Index c = 0; c < centers_.cols(); ++c)
            out(c) = std::exp(-(z - centers_.col(c)).squaredNorm() / (width_ * width_));
        return out;
    }
    case Kind::custom: {
        Vector out(output_dim());
        for (std::size_t k = 0; k < functions_.size(); ++k)
            out(static_cast<Index>(k)) = functions_[k].eval(z);
        return out;
    }
    }
    return {};
}

Matrix Dictionary::lift(const Matrix& columns) const
{
    if (columns.rows() != input_dim_)
        throw ShapeError("dictionary: expected " + std::to_string(input_dim_) + " rows, got " +
                         std::to_string(columns.rows()));
    Matrix out(output_dim(), columns.cols());
    for (Index j = 0; j < columns.cols(); ++j)
        out.col(j) = evaluate(columns.col(j));
    return out;
}

Dictionary parse_dictionary(std::string_view spec, const Matrix& training_columns)
{
    const auto parts = split_spec(spec);
    const Index dim = training_columns.rows();
    if (parts[0] == "identity" && parts.size() == 1)
        return Dictionary::identity(dim);
    if ((parts[0] == "poly" || parts[0] == "wpoly") && parts.size() == 2)
        return Dictionary::polynomial(dim, parse_degree(parts[1], spec), parts[0] == "wpoly");
    if (parts[0] == "rbf" && parts.size() == 3) {
        const double width = parse_field<double>(parts[1], spec);
        const Index count = parse_field<Index>(parts[2], spec);
        require_width(width);
        if (count < 1 || count > training_columns.cols())
            throw ConfigError("rbf: center count must lie in [1, number of snapshots]");
        Matrix centers(dim, count);
        for (Index c = 0; c < count; ++c)
            centers.col(c) = training_columns.col(c * training_columns.cols() / count);
        return Dictionary::rbf(std::move(centers), width);
    }
    throw ConfigError("unknown dictionary spec '" + std::string(spec) + "'");
}

Kernel Kernel::polynomial(int degree)
{
    if (degree < 1)
        throw ParameterError("polynomial kernel needs degree >= 1");
    return Kernel{Kind::polynomial, degree, 1.0};
}

Kernel Kernel::gaussian(double sigma)
{
    require_width(sigma);
    return Kernel{Kind::gaussian, 1, sigma};
}

Kernel Kernel::paper_rbf(double sigma)
{
    require_width(sigma);
    return Kernel{Kind::paper_rbf, 1, sigma};
}

std::string Kernel::spec() const
{
    switch (kind) {
    case Kind::polynomial:
        return "poly:" + std::to_string(degree);
    case Kind::gaussian:
        return "gaussian:" + format_double(sigma);
    case Kind::paper_rbf:
        return "paper_rbf:" + format_double(sigma);
    }
    return {};
}

Kernel parse_kernel(std::string_view spec)
{
    const auto parts = split_spec(spec);
    if (parts.size() == 2) {
        if (parts[0] == "poly")
            return Kernel::polynomial(parse_degree(parts[1], spec));
        if (parts[0] == "gaussian")
            return Kernel::gaussian(parse_field<double>(parts[1], spec));
        if (parts[0] == "paper_rbf")
            return Kernel::paper_rbf(parse_field<double>(parts[1], spec));
    }
    throw ConfigError("unknown kernel spec '" + std::string(spec) + "'");
}

Matrix gram(const Kernel& kern, const Matrix& a, const Matrix& b)
{
    if (a.rows() != b.rows())
        throw ShapeError("gram: column dimensions differ");
    Matrix out(a.cols(), b.cols());
    for (Index j = 0; j < b.cols(); ++j)
        for (Index i = 0; i < a.cols(); ++i)
            out(i, j) = eval_kernel(kern, a.col(i), b.col(j));
    return out;
}

Vector kernel_row(const Kernel& kern, const Vector& z, const Matrix& columns)
{
    if (z.size() != columns.rows())
        throw ShapeError("kernel_row: dimension mismatch");
    Vector out(columns.cols());
    for (Index j = 0; j < columns.cols(); ++j)
        out(j) = eval_kernel(kern, columns.col(j), z);
    return out;
}

}  // namespace koopman
