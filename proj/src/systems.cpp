#include "koopman/systems.hpp"

#include <map>
#include <numbers>
#include <random>

namespace koopman {

namespace {

constexpr double divergence_bound = 1e12;

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};

Index state_dim(const SystemKind& kind)
{
    return std::visit(Overloaded{
                          [](const systems::Linear& s) { return s.a.rows(); },
                          [](const systems::Rotation&) { return Index{2}; },
                          [](const systems::QuadraticInvariant&) { return Index{2}; },
                          [](const systems::ForcedLinear& s) { return s.a.rows(); },
                      },
                      kind);
}

void validate(const SystemSpec& spec)
{
    std::visit(Overloaded{
                   [](const systems::Linear& s) {
                       if (s.a.rows() != s.a.cols() || s.a.size() == 0)
                           throw ShapeError("linear system: A must be square");
                   },
                   [](const systems::Rotation& s) {
                       if (!(std::abs(s.theta) < std::numbers::pi))
                           throw ParameterError("rotation: |theta| must be below pi");
                   },
                   [](const systems::QuadraticInvariant& s) {
                       if (std::abs(s.mu) > 1.0 || std::abs(s.lambda) > 1.0)
                           throw ParameterError("quadratic system: |mu| and |lambda| must not exceed 1");
                   },
                   [](const systems::ForcedLinear& s) {
                       if (s.a.rows() != s.a.cols() || s.a.size() == 0)
                           throw ShapeError("forced system: A must be square");
                       if (s.b_in.rows() != s.a.rows() || s.b_in.cols() < 1)
                           throw ShapeError("forced system: B must have as many rows as A");
                       if (s.hold < 1)
                           throw ParameterError("forced system: hold must be at least 1");
                   },
               },
               spec.kind);
    if (spec.initial_state.size() != state_dim(spec.kind))
        throw ShapeError("initial state has dimension " + std::to_string(spec.initial_state.size()) + ", system needs " +
                         std::to_string(state_dim(spec.kind)));
    if (spec.steps < 1)
        throw ParameterError("simulate: steps must be at least 1");
}

Matrix rotation_matrix(double theta)
{
    Matrix r(2, 2);
    r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
    return r;
}

// Sparse polynomial: exponent vector -> coefficient.
using Polynomial = std::map<Exponents, double>;

Polynomial multiply(const Polynomial& a, const Polynomial& b)
{
    Polynomial out;
    for (const auto& [ea, ca] : a)
        for (const auto& [eb, cb] : b) {
            Exponents e(ea.size());
            for (std::size_t i = 0; i < e.size(); ++i)
                e[i] = ea[i] + eb[i];
            out[e] += ca * cb;
        }
    return out;
}

Polynomial linear_form(const Eigen::Ref<const Vector>& coeffs)
{
    Polynomial p;
    for (Index j = 0; j < coeffs.size(); ++j) {
        if (coeffs(j) == 0.0)
            continue;
        Exponents e(static_cast<std::size_t>(coeffs.size()), 0);
        e[static_cast<std::size_t>(j)] = 1;
        p[e] = coeffs(j);
    }
    return p;
}

std::optional<std::vector<Polynomial>> map_polynomials(const SystemSpec& spec)
{
    const auto from_matrix = [](const Matrix& a) {
        std::vector<Polynomial> f;
        for (Index i = 0; i < a.rows(); ++i)
            f.push_back(linear_form(a.row(i).transpose()));
        return f;
    };
    return std::visit(Overloaded{
                          [&](const systems::Linear& s) -> std::optional<std::vector<Polynomial>> {
                              return from_matrix(s.a);
                          },
                          [&](const systems::Rotation& s) -> std::optional<std::vector<Polynomial>> {
                              if (!s.observe_full)
                                  return std::nullopt;
                              return from_matrix(rotation_matrix(s.theta));
                          },
                          [](const systems::QuadraticInvariant& s) -> std::optional<std::vector<Polynomial>> {
                              std::vector<Polynomial> f(2);
                              f[0][Exponents{1, 0}] = s.mu;
                              f[1][Exponents{0, 1}] = s.lambda;
                              f[1][Exponents{2, 0}] = s.c;
                              return f;
                          },
                          [](const systems::ForcedLinear&) -> std::optional<std::vector<Polynomial>> {
                              return std::nullopt;
                          },
                      },
                      spec.kind);
}

}  // namespace

Vector step_map(const SystemKind& kind, const Vector& x)
{
    return std::visit(Overloaded{
                          [&](const systems::Linear& s) -> Vector { return s.a * x; },
                          [&](const systems::Rotation& s) -> Vector { return rotation_matrix(s.theta) * x; },
                          [&](const systems::QuadraticInvariant& s) -> Vector {
                              Vector next(2);
                              next << s.mu * x(0), s.lambda * x(1) + s.c * x(0) * x(0);
                              return next;
                          },
                          [&](const systems::ForcedLinear& s) -> Vector { return s.a * x; },
                      },
                      kind);
}

Trajectory simulate(const SystemSpec& spec)
{
    validate(spec);
    const Index n = spec.steps + 1;
    Matrix states(spec.initial_state.size(), n);
    Matrix inputs;
    std::optional<std::uint64_t> seed;

    if (const auto* forced = std::get_if<systems::ForcedLinear>(&spec.kind)) {
        std::mt19937_64 rng(forced->seed);
        std::uniform_real_distribution<double> dist(-forced->amplitude, forced->amplitude);
        inputs.resize(forced->b_in.cols(), n);
        for (Index t = 0; t < n; ++t) {
            if (t % forced->hold == 0)
                for (Index i = 0; i < inputs.rows(); ++i)
                    inputs(i, t) = dist(rng);
            else
                inputs.col(t) = inputs.col(t - 1);
        }
        seed = forced->seed;
    }

    states.col(0) = spec.initial_state;
    for (Index t = 1; t < n; ++t) {
        Vector next = step_map(spec.kind, states.col(t - 1));
        if (const auto* forced = std::get_if<systems::ForcedLinear>(&spec.kind))
            next += forced->b_in * inputs.col(t - 1);
        if (!next.allFinite() || next.cwiseAbs().maxCoeff() > divergence_bound)
            throw DivergenceError("simulate: trajectory left [-1e12, 1e12] at step " + std::to_string(t));
        states.col(t) = next;
    }

    if (const auto* rot = std::get_if<systems::Rotation>(&spec.kind); rot && !rot->observe_full)
        states = Matrix(states.topRows(1));

    Trajectory traj(1.0, std::move(states), std::move(inputs));
    traj.seed = seed;
    return traj;
}

std::optional<LiftOracle> exact_lift_oracle(const SystemSpec& spec, const Dictionary& dict)
{
    const auto map = map_polynomials(spec);
    if (!map)
        return std::nullopt;
    const Index dim = static_cast<Index>(map->size());
    if (dict.input_dim() != dim)
        return std::nullopt;

    std::vector<Exponents> basis;
    Vector scale;
    if (dict.kind() == Dictionary::Kind::polynomial) {
        basis = dict.exponents();
        scale = dict.monomial_scale();
    } else if (dict.kind() == Dictionary::Kind::identity) {
        for (Index i = 0; i < dim; ++i) {
            Exponents e(static_cast<std::size_t>(dim), 0);
            e[static_cast<std::size_t>(i)] = 1;
            basis.push_back(e);
        }
        scale = Vector::Ones(dim);
    } else {
        return std::nullopt;
    }

    std::map<Exponents, Index> position;
    for (std::size_t k = 0; k < basis.size(); ++k)
        position[basis[k]] = static_cast<Index>(k);

    // Image of each basis monomial under the map, as a polynomial in the state.
    std::vector<Polynomial> images;
    for (const auto& e : basis) {
        Polynomial image{{Exponents(static_cast<std::size_t>(dim), 0), 1.0}};
        for (std::size_t i = 0; i < e.size(); ++i)
            for (int p = 0; p < e[i]; ++p)
                image = multiply(image, (*map)[i]);
        images.push_back(std::move(image));
    }

    std::vector<bool> closed(basis.size(), true);
    for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t k = 0; k < basis.size(); ++k) {
            if (!closed[k])
                continue;
            for (const auto& [e, coeff] : images[k]) {
                const auto it = position.find(e);
                if (coeff != 0.0 && (it == position.end() || !closed[static_cast<std::size_t>(it->second)])) {
                    closed[k] = false;
                    changed = true;
                    break;
                }
            }
        }
    }

    for (std::size_t k = 0; k < basis.size(); ++k) {
        int total = 0;
        for (int p : basis[k])
            total += p;
        if (total == 1 && !closed[k])
            return std::nullopt;
    }

    LiftOracle oracle;
    std::map<Index, Index> compact;
    for (std::size_t k = 0; k < basis.size(); ++k)
        if (closed[k]) {
            compact[static_cast<Index>(k)] = static_cast<Index>(oracle.indices.size());
            oracle.indices.push_back(static_cast<Index>(k));
        }
    oracle.complete = oracle.indices.size() == basis.size();

    const auto size = static_cast<Index>(oracle.indices.size());
    oracle.l = Matrix::Zero(size, size);
    for (Index a = 0; a < size; ++a) {
        const Index k = oracle.indices[static_cast<std::size_t>(a)];
        for (const auto& [e, coeff] : images[static_cast<std::size_t>(k)]) {
            if (coeff == 0.0)
                continue;
            const Index target = position.at(e);
            oracle.l(a, compact.at(target)) += coeff * scale(k) / scale(target);
        }
    }
    return oracle;
}

Matrix random_stable_matrix(Index n, std::uint64_t seed)
{
    if (n < 1)
        throw ShapeError("random_stable_matrix: n must be positive");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> modulus(0.55, 0.95);
    std::uniform_real_distribution<double> angle(0.3, 2.5);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<Index> pair_count(0, n / 2);
    std::normal_distribution<double> normal(0.0, 1.0);

    while (true) {
        const Index pairs = pair_count(rng);
        Matrix block = Matrix::Zero(n, n);
        std::vector<std::complex<double>> spectrum;
        Index at = 0;
        for (Index p = 0; p < pairs; ++p, at += 2) {
            const double r = modulus(rng);
            const double a = angle(rng);
            block.block(at, at, 2, 2) = r * rotation_matrix(a);
            spectrum.push_back(std::polar(r, a));
            spectrum.push_back(std::polar(r, -a));
        }
        for (; at < n; ++at) {
            const double value = (unit(rng) < 0.5 ? -1.0 : 1.0) * modulus(rng);
            block(at, at) = value;
            spectrum.emplace_back(value, 0.0);
        }

        bool separated = true;
        for (std::size_t i = 0; i < spectrum.size() && separated; ++i)
            for (std::size_t j = i + 1; j < spectrum.size(); ++j)
                if (std::abs(spectrum[i] - spectrum[j]) < 0.1) {
                    separated = false;
                    break;
                }
        if (!separated)
            continue;

        Matrix basis(n, n);
        for (Index i = 0; i < basis.size(); ++i)
            basis(i) = normal(rng);
        if (condition_number(basis) > 20.0)
            continue;
        return basis * block * basis.inverse();
    }
}

Vector random_vector(Index n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector v(n);
    for (Index i = 0; i < n; ++i)
        v(i) = normal(rng);
    return v;
}

}  // namespace koopman
