#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "koopman/dataset.hpp"
#include "koopman/dictionary.hpp"

namespace koopman {

namespace systems {

struct Linear {
    Matrix a;
};

struct Rotation {
    double theta = 0.0;
    /// When false only the first coordinate is emitted.
    bool observe_full = true;
};

/// x₁⁺ = μ x₁, x₂⁺ = λ x₂ + c x₁².
struct QuadraticInvariant {
    double mu = 0.9;
    double lambda = 0.5;
    double c = 1.0;
};

/// x⁺ = A x + B u with a piecewise-constant pseudo-random input.
struct ForcedLinear {
    Matrix a;
    Matrix b_in;
    /// Samples each input value is held for.
    Index hold = 5;
    double amplitude = 1.0;
    std::uint64_t seed = 0;
};

}  // namespace systems

using SystemKind = std::variant<systems::Linear, systems::Rotation, systems::QuadraticInvariant, systems::ForcedLinear>;

struct SystemSpec {
    SystemKind kind;
    Vector initial_state;
    Index steps = 0;
};

/// Iterates the map `steps` times (dt = 1) and records steps + 1 samples.
Trajectory simulate(const SystemSpec& spec);

/// Image of the state under one step of the map, ignoring inputs.
Vector step_map(const SystemKind& kind, const Vector& x);

/// Exact linear action of the map on a polynomial dictionary.
struct LiftOracle {
    /// θ_S(x⁺) = L θ_S(x) on the closed sub-dictionary S.
    Matrix l;
    /// Positions of S inside the full dictionary output.
    std::vector<Index> indices;
    /// True when S is the whole dictionary.
    bool complete = false;
};

/// Composes the map with every monomial and keeps the largest subset whose images stay in
/// its own span. Unavailable unless that subset contains every linear monomial.
std::optional<LiftOracle> exact_lift_oracle(const SystemSpec& spec, const Dictionary& dict);

/// Seeded stable matrix with well-separated eigenvalues of modulus in [0.55, 0.95].
Matrix random_stable_matrix(Index n, std::uint64_t seed);

/// Seeded standard-normal vector.
Vector random_vector(Index n, std::uint64_t seed);

}  // namespace koopman
