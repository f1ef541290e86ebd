#include <doctest.h>

#include <numbers>

#include "koopman/systems.hpp"
#include "support.hpp"

using namespace koopman;

namespace {

Vector vec(std::initializer_list<double> values)
{
    Vector v(static_cast<Index>(values.size()));
    Index i = 0;
    for (double x : values)
        v(i++) = x;
    return v;
}

Matrix diag(std::initializer_list<double> values) { return vec(values).asDiagonal(); }

}  // namespace

TEST_CASE("linear system: diagonal powers")
{
    const auto traj = simulate({systems::Linear{diag({0.9, 0.5})}, vec({1, 1}), 3});
    Matrix expected(2, 4);
    expected << 1, 0.9, 0.81, 0.729, 1, 0.5, 0.25, 0.125;
    CHECK(traj.length() == 4);
    CHECK(traj.dt() == 1.0);
    CHECK((traj.states() - expected).norm() < 1e-15);
    CHECK_FALSE(traj.has_inputs());
}

TEST_CASE("quadratic system: one step")
{
    const auto traj = simulate({systems::QuadraticInvariant{0.9, 0.5, 1.0}, vec({1, 0}), 1});
    CHECK(traj.states().col(1) == vec({0.9, 1.0}));
}

TEST_CASE("rotation observed through the first coordinate")
{
    const auto traj = simulate({systems::Rotation{0.5, false}, vec({1, 0}), 20});
    REQUIRE(traj.state_dim() == 1);
    for (Index t = 0; t < traj.length(); ++t)
        CHECK(traj.states()(0, t) == doctest::Approx(std::cos(0.5 * static_cast<double>(t))).epsilon(1e-13));
    const auto full = simulate({systems::Rotation{0.5, true}, vec({1, 0}), 5});
    CHECK(full.state_dim() == 2);
    CHECK(full.states()(1, 1) == doctest::Approx(std::sin(0.5)));
}

TEST_CASE("invalid specs")
{
    CHECK_THROWS_AS(simulate({systems::Linear{Matrix::Ones(2, 3)}, vec({1, 1}), 3}), ShapeError);
    CHECK_THROWS_AS(simulate({systems::Linear{diag({0.5, 0.5})}, vec({1}), 3}), ShapeError);
    CHECK_THROWS_AS(simulate({systems::Rotation{std::numbers::pi, true}, vec({1, 0}), 3}), ParameterError);
    CHECK_THROWS_AS(simulate({systems::QuadraticInvariant{1.1, 0.5, 1.0}, vec({1, 0}), 3}), ParameterError);
    CHECK_THROWS_AS(simulate({systems::Linear{diag({0.5})}, vec({1}), 0}), ParameterError);
    CHECK_THROWS_AS(simulate({systems::ForcedLinear{diag({0.5, 0.5}), Matrix::Ones(3, 1)}, vec({1, 1}), 3}),
                    ShapeError);
    CHECK_THROWS_AS(simulate({systems::ForcedLinear{diag({0.5}), Matrix::Ones(1, 1), 0}, vec({1}), 3}),
                    ParameterError);
}

TEST_CASE("divergence is reported")
{
    CHECK_THROWS_AS(simulate({systems::Linear{diag({10.0})}, vec({1}), 20}), DivergenceError);
}

TEST_CASE("forced system: held inputs, recorded seed, reproducibility")
{
    const systems::ForcedLinear forced{diag({0.9, 0.5}), (Matrix(2, 1) << 1.0, 0.5).finished(), 4, 2.0, 77};
    const auto traj = simulate({forced, vec({0, 0}), 19});
    REQUIRE(traj.input_dim() == 1);
    REQUIRE(traj.seed.has_value());
    CHECK(*traj.seed == 77u);
    for (Index t = 0; t < traj.length(); ++t) {
        CHECK(std::abs(traj.inputs()(0, t)) <= 2.0);
        if (t % 4 != 0)
            CHECK(traj.inputs()(0, t) == traj.inputs()(0, t - 1));
    }
    for (Index t = 1; t < traj.length(); ++t) {
        const Vector expected = forced.a * traj.states().col(t - 1) + forced.b_in * traj.inputs().col(t - 1);
        CHECK((traj.states().col(t) - expected).norm() < 1e-15);
    }
    CHECK(simulate({forced, vec({0, 0}), 19}).inputs() == traj.inputs());
    auto other = forced;
    other.seed = 78;
    CHECK(simulate({other, vec({0, 0}), 19}).inputs() != traj.inputs());
}

TEST_CASE("oracle: linear map with an affine dictionary")
{
    Matrix a(2, 2);
    a << 0.5, 0.2, -0.1, 0.7;
    const auto oracle = exact_lift_oracle({systems::Linear{a}, vec({1, 1}), 1}, Dictionary::polynomial(2, 1));
    REQUIRE(oracle);
    CHECK(oracle->complete);
    Matrix expected = Matrix::Zero(3, 3);
    expected(0, 0) = 1.0;
    expected.bottomRightCorner(2, 2) = a;
    CHECK((oracle->l - expected).norm() < 1e-15);
    CVector truth(3);
    truth << 1.0, eig(a).values;
    CHECK(testing::spectrum_distance(eig(oracle->l).values, truth) < 1e-14);
}

TEST_CASE("oracle: quadratic system")
{
    const SystemSpec spec{systems::QuadraticInvariant{0.9, 0.5, 1.0}, vec({1, 0}), 1};
    const auto oracle = exact_lift_oracle(spec, Dictionary::polynomial(2, 2));
    REQUIRE(oracle);
    // x1·x2 and x2² map to cubics and quartics, so only {1, x1, x2, x1²} closes.
    CHECK_FALSE(oracle->complete);
    CHECK(oracle->indices == std::vector<Index>{0, 1, 2, 3});
    const auto values = eig(oracle->l).values;
    for (double lambda : {1.0, 0.9, 0.5, 0.81})
        CHECK(testing::distance_to(values, lambda) < 1e-14);

    CHECK_FALSE(exact_lift_oracle(spec, Dictionary::polynomial(2, 1)));
    CHECK_FALSE(exact_lift_oracle(spec, Dictionary::identity(2)));
    CHECK(exact_lift_oracle(spec, Dictionary::polynomial(2, 3)));
}

TEST_CASE("oracle: unavailable cases")
{
    CHECK_FALSE(exact_lift_oracle({systems::Rotation{0.3, false}, vec({1, 0}), 1}, Dictionary::polynomial(1, 2)));
    CHECK_FALSE(exact_lift_oracle({systems::ForcedLinear{diag({0.5}), Matrix::Ones(1, 1)}, vec({1}), 1},
                                  Dictionary::polynomial(1, 2)));
    CHECK_FALSE(exact_lift_oracle({systems::Linear{diag({0.5, 0.5})}, vec({1, 1}), 1}, Dictionary::polynomial(3, 2)));
    Matrix centers = Matrix::Zero(2, 1);
    CHECK_FALSE(exact_lift_oracle({systems::Linear{diag({0.5, 0.5})}, vec({1, 1}), 1}, Dictionary::rbf(centers, 1.0)));
}

TEST_CASE("property: oracle consistency along simulated trajectories")
{
    std::vector<SystemSpec> specs{
        {systems::QuadraticInvariant{0.9, 0.5, 1.0}, vec({0.8, -0.3}), 12},
        {systems::QuadraticInvariant{-0.7, 0.95, 2.0}, vec({0.5, 0.1}), 12},
        {systems::Rotation{1.0, true}, vec({0.3, 0.9}), 12},
    };
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const Index n = 2 + static_cast<Index>(seed % 2);
        specs.push_back({systems::Linear{random_stable_matrix(n, seed)}, random_vector(n, seed + 50), 12});
    }
    for (const auto& spec : specs)
        for (int degree = 1; degree <= 3; ++degree)
            for (bool weighted : {false, true}) {
                const auto traj = simulate(spec);
                const auto dict = Dictionary::polynomial(traj.state_dim(), degree, weighted);
                const auto oracle = exact_lift_oracle(spec, dict);
                if (!oracle)
                    continue;
                for (Index t = 0; t + 1 < traj.length(); ++t) {
                    const Vector now = dict(traj.states().col(t));
                    const Vector next = dict(traj.states().col(t + 1));
                    Vector s_now(static_cast<Index>(oracle->indices.size()));
                    Vector s_next(s_now.size());
                    for (std::size_t k = 0; k < oracle->indices.size(); ++k) {
                        s_now(static_cast<Index>(k)) = now(oracle->indices[k]);
                        s_next(static_cast<Index>(k)) = next(oracle->indices[k]);
                    }
                    CHECK((s_next - oracle->l * s_now).norm() <= 1e-12 * std::max(1.0, s_next.norm()));
                }
            }
}

TEST_CASE("random stable matrices")
{
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Index n = 2 + static_cast<Index>(seed % 5);
        const Matrix a = random_stable_matrix(n, seed);
        CHECK(a == random_stable_matrix(n, seed));
        const auto values = eig(a).values;
        for (Index i = 0; i < n; ++i) {
            CHECK(std::abs(values(i)) >= 0.55 - 1e-10);
            CHECK(std::abs(values(i)) <= 0.95 + 1e-10);
            for (Index j = i + 1; j < n; ++j)
                CHECK(std::abs(values(i) - values(j)) >= 0.1 - 1e-8);
        }
    }
    CHECK_THROWS_AS(random_stable_matrix(0, 1), ShapeError);
    CHECK(random_vector(4, 9) == random_vector(4, 9));
}

TEST_CASE("step_map ignores inputs")
{
    const systems::ForcedLinear forced{diag({0.5}), Matrix::Ones(1, 1)};
    CHECK(step_map(forced, vec({2})) == vec({1}));
}
