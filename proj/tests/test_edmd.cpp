#include <doctest.h>

#include "koopman/edmd.hpp"
#include "koopman/systems.hpp"
#include "support.hpp"

using namespace koopman;
using testing::distance_to;
using testing::spectrum_distance;

namespace {

SystemSpec quadratic_spec(Index steps, Vector x0 = (Vector(2) << 1.0, 0.5).finished())
{
    return SystemSpec{systems::QuadraticInvariant{0.9, 0.5, 1.0}, std::move(x0), steps};
}

// Six pairs make the degree-2 lifted matrix square, so the regression interpolates the closed rows.
SnapshotPair quadratic_pairs() { return snapshot_pairs(simulate(quadratic_spec(6))); }

Matrix diag_a()
{
    Matrix a = Matrix::Zero(2, 2);
    a.diagonal() << 0.9, 0.5;
    return a;
}

SnapshotPair linear_pairs(const Matrix& a, const Vector& x0, Index steps)
{
    return snapshot_pairs(simulate(SystemSpec{systems::Linear{a}, x0, steps}));
}

// max over eigenpairs of max_t |φ(z_{t+1}) − λφ(z_t)| / max_t |φ(z_t)|
double functional_equation_error(const EdmdModel& model, const SnapshotPair& pair)
{
    double worst = 0.0;
    for (Index i = 0; i < model.eigen.size(); ++i) {
        double err = 0.0, scale = 0.0;
        for (Index t = 0; t < pair.cols(); ++t) {
            const auto now = eval_eigenfunction(model, i, pair.x.col(t));
            const auto next = eval_eigenfunction(model, i, pair.xp.col(t));
            err = std::max(err, std::abs(next - model.eigen.values(i) * now));
            scale = std::max(scale, std::abs(now));
        }
        worst = std::max(worst, scale > 0 ? err / scale : err);
    }
    return worst;
}

}  // namespace

TEST_CASE("lift_snapshots")
{
    SnapshotPair pair;
    pair.x = Matrix::Constant(1, 1, 2.0);
    pair.xp = Matrix::Constant(1, 1, 4.0);
    pair.col_times = {0};
    const auto lifted = lift_snapshots(pair, Dictionary::polynomial(1, 2));
    CHECK(lifted.x == (Matrix(3, 1) << 1, 2, 4).finished());
    CHECK(lifted.xp == (Matrix(3, 1) << 1, 4, 16).finished());

    const auto same = lift_snapshots(pair, Dictionary::identity(1));
    CHECK(same.x == pair.x);
    CHECK(same.xp == pair.xp);

    const auto q = quadratic_pairs();
    CHECK(lift_snapshots(q, Dictionary::polynomial(2, 2)).rows() == 6);
    CHECK_THROWS_AS(lift_snapshots(q, Dictionary::polynomial(3, 2)), ShapeError);
}

TEST_CASE("identity dictionary reduces to svd-dmd")
{
    const auto pair = linear_pairs(diag_a(), (Vector(2) << 1.0, 0.7).finished(), 9);
    const auto e = fit_edmd(pair, Dictionary::identity(2));
    const auto d = fit_svd_dmd(pair);
    CHECK(spectrum_distance(e.eigen.values, d.eigenvalues) < 1e-8);
    CHECK(spectrum_distance(e.eigen.values, testing::to_complex({0.9, 0.5})) < 1e-12);
}

TEST_CASE("quadratic system with a degree-2 dictionary")
{
    const auto pair = quadratic_pairs();
    const auto model = fit_edmd(pair, Dictionary::polynomial(2, 2));
    for (double lambda : {0.9, 0.5, 0.81})
        CHECK(distance_to(model.eigen.values, lambda) < 1e-6);
    CHECK(model.lifted_residual < 1e-8);
    CHECK(model.modes_available);
    CHECK(functional_equation_error(model, pair) < 1e-6);

    // Every eigenvalue of the exact operator on the closed sub-dictionary is recovered.
    const auto oracle = exact_lift_oracle(quadratic_spec(6), Dictionary::polynomial(2, 2));
    REQUIRE(oracle);
    const auto exact = eig(oracle->l).values;
    for (Index i = 0; i < exact.size(); ++i)
        CHECK(distance_to(model.eigen.values, exact(i)) < 1e-6);
}

TEST_CASE("quadratic eigenfunction for 0.81 matches the oracle's left eigenvector")
{
    const auto spec = quadratic_spec(6);
    const auto dict = Dictionary::polynomial(2, 2);
    const auto model = fit_edmd(snapshot_pairs(simulate(spec)), dict);
    const auto oracle = *exact_lift_oracle(spec, dict);

    // Left eigenvector of L for 0.81: wᵀL = 0.81 wᵀ.
    const auto left = eig(Matrix(oracle.l.transpose()));
    Index j = 0;
    for (Index k = 0; k < left.size(); ++k)
        if (std::abs(left.values(k) - 0.81) < std::abs(left.values(j) - 0.81))
            j = k;
    Index i = 0;
    for (Index k = 0; k < model.eigen.size(); ++k)
        if (std::abs(model.eigen.values(k) - 0.81) < std::abs(model.eigen.values(i) - 0.81))
            i = k;

    std::mt19937_64 rng(7);
    const Matrix pts = testing::random_matrix(2, 10, rng);
    CVector fitted(10), exact(10);
    for (Index t = 0; t < 10; ++t) {
        const Vector theta = dict(pts.col(t));
        Vector sub(static_cast<Index>(oracle.indices.size()));
        for (std::size_t k = 0; k < oracle.indices.size(); ++k)
            sub(static_cast<Index>(k)) = theta(oracle.indices[k]);
        fitted(t) = eval_eigenfunction(model, i, pts.col(t));
        exact(t) = left.vectors.col(j).dot(sub.cast<std::complex<double>>());
    }
    CHECK(testing::subspace_angle(fitted, exact) < 1e-6);
}

TEST_CASE("degree-1 dictionary exposes the span violation")
{
    const auto model = fit_edmd(snapshot_pairs(simulate(quadratic_spec(30))), Dictionary::polynomial(2, 1));
    CHECK(model.lifted_residual > 1e-3);
}

TEST_CASE("fixed point gives the constant eigenfunction")
{
    Matrix states = Matrix::Constant(2, 5, 0.3);
    const auto pair = snapshot_pairs(Trajectory(1.0, states));
    const auto model = fit_edmd(pair, Dictionary::polynomial(2, 2));
    REQUIRE(model.eigen.size() == 1);
    CHECK(std::abs(model.eigen.values(0) - 1.0) < 1e-10);
}

TEST_CASE("eigenfunctions of a diagonal linear system are coordinate functionals")
{
    const auto pair = linear_pairs(diag_a(), (Vector(2) << 1.0, 0.7).finished(), 9);
    const auto model = fit_edmd(pair, Dictionary::identity(2));
    REQUIRE(std::abs(model.eigen.values(0) - 0.9) < 1e-12);
    // φ for 0.9 is proportional to z₁: vanishes on e₂ and scales linearly in z₁.
    CHECK(std::abs(eval_eigenfunction(model, 0, Vector::Unit(2, 1))) < 1e-12);
    const auto unit = eval_eigenfunction(model, 0, Vector::Unit(2, 0));
    CHECK(std::abs(eval_eigenfunction(model, 0, (Vector(2) << 3.0, 0.0).finished()) - 3.0 * unit) < 1e-12);
}

TEST_CASE("eigenfunction at zero is the constant coefficient")
{
    const auto pair = quadratic_pairs();
    const auto model = fit_edmd(pair, Dictionary::polynomial(2, 2));
    const CMatrix b_theta = model.b_coeffs * model.svd.u.transpose().cast<std::complex<double>>();
    for (Index i = 0; i < model.eigen.size(); ++i)
        CHECK(std::abs(eval_eigenfunction(model, i, Vector::Zero(2)) - b_theta(i, 0)) < 1e-14);
}

TEST_CASE("eval_eigenfunction errors")
{
    const auto model = fit_edmd(quadratic_pairs(), Dictionary::polynomial(2, 2));
    CHECK_THROWS_AS(eval_eigenfunction(model, model.eigen.size(), Vector::Zero(2)), ShapeError);
    CHECK_THROWS_AS(eval_eigenfunction(model, -1, Vector::Zero(2)), ShapeError);
    CHECK_THROWS_AS(eval_eigenfunction(model, 0, Vector::Zero(3)), ShapeError);
    CHECK_THROWS_AS(fit_edmd(SnapshotPair{Matrix(2, 0), Matrix(2, 0), {}}, Dictionary::identity(2)), ShapeError);
}

TEST_CASE("structural invariants: B P = I, D θ = g, V φ = D θ")
{
    const auto pair = quadratic_pairs();
    const auto model = fit_edmd(pair, Dictionary::polynomial(2, 2));
    const Index r = model.eigen.size();
    CHECK((model.b_coeffs * model.eigen.vectors - CMatrix::Identity(r, r)).norm() < 1e-8);
    CHECK(model.d_residual < 1e-10);
    for (Index t = 0; t < pair.cols(); ++t) {
        const Vector g = pair.x.col(t);
        const Vector d_theta = model.d_coeffs * model.dictionary(g);
        CHECK((d_theta - g).norm() <= 1e-8 * g.norm());
        const CVector v_phi = model.modes_v * model.eigenfunctions(g);
        CHECK((v_phi - d_theta.cast<std::complex<double>>()).norm() <= 1e-8 * g.norm());
    }
}

TEST_CASE("property: functional equation and mode reconstruction on invariant linear data")
{
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        const Index n = 2 + static_cast<Index>(seed % 2);
        const int degree = 1 + static_cast<int>(seed % 3);
        const Matrix a = random_stable_matrix(n, 300 + seed);
        std::vector<SnapshotPair> parts;
        for (std::uint64_t k = 0; k < 8; ++k)
            parts.push_back(linear_pairs(a, random_vector(n, 400 + 10 * seed + k), 3));
        const auto pair = concat_pairs(parts);
        const auto model = fit_edmd(pair, Dictionary::polynomial(n, degree, true));
        CHECK(model.lifted_residual < 1e-8);
        CHECK(functional_equation_error(model, pair) < 1e-6);
        REQUIRE(model.modes_available);
        for (Index t = 0; t < pair.cols(); ++t) {
            const Vector g = pair.x.col(t);
            CHECK((model.modes_v * model.eigenfunctions(g) - g.cast<std::complex<double>>()).norm() <= 1e-6 * g.norm());
        }
        // Identity-dictionary equivalence on the same data.
        CHECK(spectrum_distance(fit_edmd(pair, Dictionary::identity(n)).eigen.values, fit_svd_dmd(pair).eigenvalues) <
              1e-8);
    }
}

TEST_CASE("predict with an EDMD model tracks the quadratic system")
{
    const auto pair = quadratic_pairs();
    const auto model = fit_edmd(pair, Dictionary::polynomial(2, 2));
    const Vector x0 = pair.x.col(0);
    const auto p = predict(model, x0, 5);
    Vector x = x0;
    for (const auto& step : p.steps) {
        x = step_map(systems::QuadraticInvariant{}, x);
        CHECK((step - x).norm() < 1e-6);
    }
    CHECK_THROWS_AS(predict(model, Vector::Zero(3), 2), ShapeError);
}

TEST_CASE("duplicated basis functions are absorbed by truncation")
{
    const auto pair = linear_pairs(diag_a(), (Vector(2) << 1.0, 0.7).finished(), 9);
    const auto dict = Dictionary::custom(2, {{"a", [](const Vector& z) { return z(0); }},
                                             {"a again", [](const Vector& z) { return z(0); }},
                                             {"b", [](const Vector& z) { return z(1); }}});
    const auto model = fit_edmd(pair, dict);
    CHECK(model.svd.rank() == 2);
    CHECK(spectrum_distance(model.eigen.values, testing::to_complex({0.9, 0.5})) < 1e-10);
}
