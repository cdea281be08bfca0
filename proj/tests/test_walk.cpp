#include "prwdkc/io.hpp"
#include "prwdkc/rng.hpp"
#include "prwdkc/walk.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>
#include <vector>

using namespace prwdkc;

namespace {

Digraph ring_digraph(Index n, Real extra_p, uint64_t seed) {
    Rng rng(seed);
    std::vector<Eigen::Triplet<Real>> triplets;
    for (Index i = 0; i < n; ++i) {
        triplets.emplace_back(i, (i + 1) % n, 0.5 + rng.uniform());
        triplets.emplace_back((i + 1) % n, i, 0.5 + rng.uniform());  // in-degrees stay positive
        for (Index j = 0; j < n; ++j)
            if (j != i && rng.uniform() < extra_p) triplets.emplace_back(i, j, 0.5 + rng.uniform());
    }
    SpMatrix w(n, n);
    w.setFromTriplets(triplets.begin(), triplets.end());
    return Digraph(std::move(w));
}

Digraph random_undirected(Index n, Real p, uint64_t seed) {
    Rng rng(seed);
    std::vector<Eigen::Triplet<Real>> triplets;
    for (Index i = 0; i < n; ++i) {
        const Index j = (i + 1) % n;
        const Real w = 0.5 + rng.uniform();
        triplets.emplace_back(i, j, w);
        triplets.emplace_back(j, i, w);
    }
    for (Index i = 0; i < n; ++i)
        for (Index j = i + 2; j < n; ++j)
            if (rng.uniform() < p) {
                const Real w = 0.5 + rng.uniform();
                triplets.emplace_back(i, j, w);
                triplets.emplace_back(j, i, w);
            }
    SpMatrix w(n, n);
    w.setFromTriplets(triplets.begin(), triplets.end());
    return Digraph(std::move(w));
}

VertexMeasure random_measure(Index n, uint64_t seed) {
    Rng rng(seed);
    Vector v(n);
    for (Index i = 0; i < n; ++i) v(i) = 0.2 + 2.0 * rng.uniform();
    return {v, VertexMeasure::Tag::uniform};
}

Matrix eq1_laplacian(const Matrix& p, const Vector& nu, const Vector& xi) {
    // I - (I + D_{xi/nu})^{-1} (P + D_nu^{-1} P^T D_nu), transcribed verbatim
    const Index n = p.rows();
    const Vector scale = (Vector::Ones(n).array() + xi.array() / nu.array()).inverse();
    const Matrix inner = p + Matrix(nu.array().inverse().matrix().asDiagonal()) * p.transpose() *
                                 Matrix(nu.asDiagonal());
    return Matrix::Identity(n, n) - scale.asDiagonal() * inner;
}

}  // namespace

TEST_CASE("natural transition on the undirected 2-path", "[walk]") {
    std::vector<Eigen::Triplet<Real>> t{{0, 1, 1.0}, {1, 0, 1.0}};
    const TransitionMatrix p = natural_transition(Digraph::from_triplets(2, t), Direction::out);
    Matrix expected(2, 2);
    expected << 0, 1, 1, 0;
    REQUIRE((p.to_dense() - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("natural transition on a directed 3-cycle is a shift permutation", "[walk]") {
    std::vector<Eigen::Triplet<Real>> t{{0, 1, 2.0}, {1, 2, 3.0}, {2, 0, 4.0}};
    const Matrix p = natural_transition(Digraph::from_triplets(3, t), Direction::out).to_dense();
    Matrix expected(3, 3);
    expected << 0, 1, 0, 0, 0, 1, 1, 0, 0;
    REQUIRE((p - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("natural transition times out-degree reproduces the adjacency", "[walk]") {
    const Digraph g = ring_digraph(6, 0.3, 11);
    const Matrix p = natural_transition(g, Direction::out).to_dense();
    const Matrix w(g.adjacency());
    for (Index i = 0; i < 6; ++i)
        REQUIRE((p.row(i) * g.out_degrees()(i) - w.row(i)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("zero-degree vertices error by name or get the self-loop patch", "[walk]") {
    std::vector<Eigen::Triplet<Real>> t{{0, 1, 1.0}};  // vertex 1 has no out-edge
    const Digraph g = Digraph::from_triplets(2, t);
    REQUIRE_THROWS_WITH(natural_transition(g, Direction::out, ZeroDegreePolicy::error),
                        Catch::Matchers::ContainsSubstring("vertex 1"));
    const Matrix p = natural_transition(g, Direction::out, ZeroDegreePolicy::self_loop).to_dense();
    REQUIRE(p(1, 1) == 1.0);
    REQUIRE(p(0, 1) == 1.0);
}

TEST_CASE("mix_transition endpoints and arithmetic", "[walk]") {
    const Digraph g = ring_digraph(4, 0.4, 17);
    const TransitionMatrix p_out = natural_transition(g, Direction::out);
    const TransitionMatrix p_in = natural_transition(g, Direction::in);
    REQUIRE((mix_transition(p_out, p_in, 1.0).to_dense() - p_out.to_dense())
                .cwiseAbs()
                .maxCoeff() == 0.0);
    REQUIRE((mix_transition(p_out, p_in, 0.0).to_dense() - p_in.to_dense())
                .cwiseAbs()
                .maxCoeff() == 0.0);

    const TransitionMatrix mixed = mix_transition(p_out, p_in, 0.3);
    const Matrix expected = 0.3 * p_out.to_dense() + 0.7 * p_in.to_dense();
    REQUIRE((mixed.to_dense() - expected).cwiseAbs().maxCoeff() <= 1e-15);
    REQUIRE(mixed.max_row_sum_deviation() <= 1e-12);
    REQUIRE_THROWS_AS(mix_transition(p_out, p_in, -0.1), Error);
}

TEST_CASE("power vertex measure special cases", "[walk]") {
    const Digraph g = ring_digraph(5, 0.3, 23);

    const VertexMeasure uniform = power_vertex_measure(g, {7, 0.5, 0.0});
    REQUIRE((uniform.values.array() == 1.0).all());  // alpha = 0

    const VertexMeasure t0 = power_vertex_measure(g, {0, 0.5, 2.0});
    REQUIRE((t0.values.array() - std::pow(0.2, 2.0)).abs().maxCoeff() <= 1e-15);

    std::vector<Eigen::Triplet<Real>> cyc{{0, 1, 1.0}, {1, 2, 1.0}, {2, 0, 1.0}};
    const VertexMeasure cycle =
        power_vertex_measure(Digraph::from_triplets(3, cyc), {2, 1.0, 1.0});
    REQUIRE((cycle.values.array() - 1.0 / 3.0).abs().maxCoeff() <= 1e-15);
}

TEST_CASE("alt power measure: symmetric star converges to the degree measure", "[walk]") {
    std::vector<Eigen::Triplet<Real>> t;
    for (Index leaf = 1; leaf < 4; ++leaf) {
        t.emplace_back(0, leaf, 1.0);
        t.emplace_back(leaf, 0, 1.0);
    }
    const Digraph star = Digraph::from_triplets(4, t);
    const VertexMeasure nu = alt_power_vertex_measure(star, {50, 0.5, 1.0});
    Vector expected(4);
    expected << 0.5, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0;
    REQUIRE((nu.values - expected).cwiseAbs().maxCoeff() <= 1e-12);

    const VertexMeasure uniform = alt_power_vertex_measure(star, {50, 0.5, 0.0});
    REQUIRE((uniform.values.array() == 1.0).all());
}

TEST_CASE("xi measure identities and oracle", "[walk]") {
    // doubly stochastic: xi = nu for uniform nu
    std::vector<Eigen::Triplet<Real>> cyc{{0, 1, 1.0}, {1, 2, 1.0}, {2, 0, 1.0}};
    const TransitionMatrix perm =
        natural_transition(Digraph::from_triplets(3, cyc), Direction::out);
    const VertexMeasure uniform = VertexMeasure::uniform(3);
    REQUIRE((xi_measure(uniform, perm).values - uniform.values).cwiseAbs().maxCoeff() <= 1e-15);

    // undirected graph with nu = d: xi = d
    const Digraph und = random_undirected(7, 0.4, 3);
    const VertexMeasure deg = VertexMeasure::degree(und);
    const TransitionMatrix p = natural_transition(und, Direction::out);
    REQUIRE((xi_measure(deg, p).values - deg.values).cwiseAbs().maxCoeff() <= 1e-12);

    // random digraph vs explicit vector-matrix product
    const Digraph g = ring_digraph(6, 0.3, 41);
    const TransitionMatrix pg = natural_transition(g, Direction::out);
    const VertexMeasure nu = random_measure(6, 5);
    const Vector expected = pg.to_dense().transpose() * nu.values;
    REQUIRE((xi_measure(nu, pg).values - expected.cwiseMax(kMeasureFloor)).cwiseAbs().maxCoeff() <=
            1e-14);
}

TEST_CASE("parametrized walk: undirected degree measure is a fixed point", "[walk]") {
    const Digraph g = random_undirected(9, 0.35, 13);
    const TransitionMatrix p = natural_transition(g, Direction::out);
    auto [p_nu, mu] = parametrized_walk(p, VertexMeasure::degree(g));
    REQUIRE((p_nu.to_dense() - p.to_dense()).cwiseAbs().maxCoeff() <= 1e-12);
    REQUIRE((mu.values - 2.0 * g.out_degrees()).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("parametrized walk on the patched directed 2-path matches hand arithmetic", "[walk]") {
    std::vector<Eigen::Triplet<Real>> t{{0, 1, 1.0}};
    const Digraph g = Digraph::from_triplets(2, t);
    const TransitionMatrix p = natural_transition(g, Direction::out, ZeroDegreePolicy::self_loop);
    auto [p_nu, mu] = parametrized_walk(p, VertexMeasure::uniform(2));

    // P = [[0,1],[0,1]], nu = 1: M = P + P^T = [[0,1],[1,2]], xi = (0,2);
    // xi_0 floors to 1e-12 with the floor mass moved onto M_00.
    Matrix expected(2, 2);
    const Real mu0 = 1.0 + kMeasureFloor;
    expected << kMeasureFloor / mu0, 1.0 / mu0, 1.0 / 3.0, 2.0 / 3.0;
    REQUIRE((p_nu.to_dense() - expected).cwiseAbs().maxCoeff() <= 1e-15);
    REQUIRE(p_nu.max_row_sum_deviation() <= 1e-10);
    REQUIRE(mu.values(0) == Catch::Approx(mu0));
    REQUIRE(mu.values(1) == Catch::Approx(3.0));
}

TEST_CASE("parametrized walk is stochastic and reversible on random digraphs", "[walk]") {
    for (uint64_t seed = 0; seed < 25; ++seed) {
        const Digraph g = ring_digraph(8 + seed % 5, 0.25, 100 + seed);
        const TransitionMatrix p = natural_transition(g, Direction::out);
        const VertexMeasure nu = random_measure(g.size(), 200 + seed);
        auto [p_nu, mu] = parametrized_walk(p, nu);

        REQUIRE(p_nu.max_row_sum_deviation() <= 1e-10);
        const Matrix balance = mu.values.asDiagonal() * p_nu.to_dense();
        REQUIRE((balance - balance.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
        REQUIRE(mu.values.minCoeff() >= kMeasureFloor);
    }
}

TEST_CASE("parametrized walk is invariant under uniform rescaling of nu", "[walk]") {
    const Digraph g = ring_digraph(7, 0.3, 57);
    const TransitionMatrix p = natural_transition(g, Direction::out);
    const VertexMeasure nu = random_measure(7, 8);
    VertexMeasure scaled = nu;
    scaled.values *= 37.5;
    auto [a, mu_a] = parametrized_walk(p, nu);
    auto [b, mu_b] = parametrized_walk(p, scaled);
    REQUIRE((a.to_dense() - b.to_dense()).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("argmax of the power measure is alpha-invariant", "[walk]") {
    const Digraph g = ring_digraph(9, 0.3, 71);
    Index reference = -1;
    for (Real alpha : {0.2, 0.5, 1.0, 2.0, 3.5}) {
        const VertexMeasure nu = power_vertex_measure(g, {5, 0.7, alpha});
        Index argmax;
        nu.values.maxCoeff(&argmax);
        if (reference < 0) reference = argmax;
        REQUIRE(argmax == reference);
    }
}

TEST_CASE("modified walk reduces to the natural walk on undirected graphs", "[walk]") {
    const Digraph g = random_undirected(8, 0.4, 19);
    auto [p_nu, mu] = modified_parametrized_walk(g, VertexMeasure::uniform(8));
    const Matrix p = natural_transition(g, Direction::out).to_dense();
    REQUIRE((p_nu.to_dense() - p).cwiseAbs().maxCoeff() <= 1e-12);
    REQUIRE((mu.values - 2.0 * g.out_degrees()).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("modified walk is stochastic on the karate club graph", "[walk]") {
    const Digraph karate = read_edge_list(std::string(PRWDKC_DATA_DIR) + "/karate.edges");
    REQUIRE(karate.size() == 34);
    auto [p_nu, mu] = modified_parametrized_walk(karate, VertexMeasure::uniform(34));
    REQUIRE(p_nu.max_row_sum_deviation() <= 1e-10);
}

TEST_CASE("modified walk matches the explicit 3x3 evaluation", "[walk]") {
    std::vector<Eigen::Triplet<Real>> t{{0, 1, 1.0}, {1, 2, 1.0}, {2, 0, 1.0}, {0, 2, 1.0}};
    const Digraph g = Digraph::from_triplets(3, t);
    auto [p_nu, mu] = modified_parametrized_walk(g, VertexMeasure::uniform(3));

    // W+W^T = [[0,1,2],[1,0,1],[2,1,0]], nu~ = (2,1,1), xi = (1,1,2)
    Matrix expected(3, 3);
    expected << 0.0, 1.0 / 3.0, 2.0 / 3.0, 0.5, 0.0, 0.5, 2.0 / 3.0, 1.0 / 3.0, 0.0;
    REQUIRE((p_nu.to_dense() - expected).cwiseAbs().maxCoeff() <= 1e-15);
    Vector expected_mu(3);
    expected_mu << 3.0, 2.0, 3.0;
    REQUIRE((mu.values - expected_mu).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("generalized rw laplacian equals both defining routes", "[walk]") {
    const Digraph g = ring_digraph(8, 0.3, 83);
    const TransitionMatrix p = natural_transition(g, Direction::out);
    const VertexMeasure nu = random_measure(8, 21);
    auto [p_nu, mu] = parametrized_walk(p, nu);

    const Matrix l = generalized_rw_laplacian(p_nu);
    REQUIRE((l.rowwise().sum()).cwiseAbs().maxCoeff() <= 1e-10);
    REQUIRE((l - (Matrix::Identity(8, 8) - p_nu.to_dense())).cwiseAbs().maxCoeff() == 0.0);

    const Vector xi = xi_measure(nu, p).values;
    REQUIRE((l - eq1_laplacian(p.to_dense(), nu.values, xi)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("generalized rw laplacian on the 2-vertex symmetric graph", "[walk]") {
    std::vector<Eigen::Triplet<Real>> t{{0, 1, 1.0}, {1, 0, 1.0}};
    const Digraph g = Digraph::from_triplets(2, t);
    const TransitionMatrix p = natural_transition(g, Direction::out);
    auto [p_nu, mu] = parametrized_walk(p, VertexMeasure::degree(g));
    Matrix expected(2, 2);
    expected << 1, -1, -1, 1;
    REQUIRE((generalized_rw_laplacian(p_nu) - expected).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("generalized laplacian symmetry, row sums, and undirected identity", "[walk]") {
    const Digraph g = ring_digraph(7, 0.35, 91);
    const TransitionMatrix p = natural_transition(g, Direction::out);
    const VertexMeasure nu = random_measure(7, 33);

    const Matrix l = generalized_laplacian(p, nu, LaplacianForm::unnormalized);
    REQUIRE((l - l.transpose()).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(std::abs(Vector::Ones(7).transpose() * l * Vector::Ones(7)) <= 1e-10);
    REQUIRE(l.rowwise().sum().cwiseAbs().maxCoeff() <= 1e-10);

    const Matrix ln = generalized_laplacian(p, nu, LaplacianForm::normalized);
    REQUIRE((ln - ln.transpose()).cwiseAbs().maxCoeff() == 0.0);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(ln);
    REQUIRE(eig.eigenvalues().minCoeff() >= -1e-10);
    REQUIRE(eig.eigenvalues().maxCoeff() <= 2.0 + 1e-10);

    // undirected with nu = d: L_(nu) = 2 (D - W)
    const Digraph und = random_undirected(6, 0.5, 27);
    const Matrix lu = generalized_laplacian(natural_transition(und, Direction::out),
                                            VertexMeasure::degree(und),
                                            LaplacianForm::unnormalized);
    const Matrix expected =
        2.0 * (Matrix(und.out_degrees().asDiagonal()) - Matrix(und.adjacency()));
    REQUIRE((lu - expected).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("stationary distribution closed form and power-iteration oracle", "[walk]") {
    // undirected, nu = d: pi proportional to degree
    const Digraph und = random_undirected(8, 0.4, 39);
    const TransitionMatrix p = natural_transition(und, Direction::out);
    auto [p_nu, mu] = parametrized_walk(p, VertexMeasure::degree(und));
    const VertexMeasure pi = stationary_distribution(p_nu, mu);
    const Vector expected = und.out_degrees() / und.out_degrees().sum();
    REQUIRE((pi.values - expected).cwiseAbs().maxCoeff() <= 1e-12);

    // uniform nu on a regular undirected graph: uniform pi
    std::vector<Eigen::Triplet<Real>> cyc;
    for (Index i = 0; i < 6; ++i) {
        cyc.emplace_back(i, (i + 1) % 6, 1.0);
        cyc.emplace_back((i + 1) % 6, i, 1.0);
    }
    const Digraph ring = Digraph::from_triplets(6, cyc);
    auto [p_ring, mu_ring] = parametrized_walk(natural_transition(ring, Direction::out),
                                               VertexMeasure::uniform(6));
    const VertexMeasure pi_ring = stationary_distribution(p_ring, mu_ring);
    REQUIRE((pi_ring.values.array() - 1.0 / 6.0).abs().maxCoeff() <= 1e-12);

    // random digraph: agree with plain power iteration from the uniform start
    const Digraph g = ring_digraph(9, 0.3, 47);
    auto [pg_nu, mug] = parametrized_walk(natural_transition(g, Direction::out),
                                          random_measure(9, 3));
    const VertexMeasure pig = stationary_distribution(pg_nu, mug);
    Vector v = Vector::Constant(9, 1.0 / 9.0);
    const Matrix dense = pg_nu.to_dense();
    for (int it = 0; it < 20000; ++it) v = dense.transpose() * v;
    REQUIRE((v - pig.values).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("measures reject non-positive entries", "[walk]") {
    const Digraph g = ring_digraph(4, 0.2, 1);
    const TransitionMatrix p = natural_transition(g, Direction::out);
    VertexMeasure bad = VertexMeasure::uniform(4);
    bad.values(2) = 0.0;
    REQUIRE_THROWS_AS(parametrized_walk(p, bad), Error);
    bad.values(2) = -1.0;
    REQUIRE_THROWS_AS(modified_parametrized_walk(g, bad), Error);
}
