#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "test_support.hpp"

#include "optdmd/diagnostics.hpp"
#include "optdmd/error.hpp"
#include "optdmd/harness.hpp"
#include "optdmd/optdmd.hpp"

using namespace optdmd;
using namespace std::complex_literals;

namespace {

OptDmdOutput run(const SnapshotSet& data, Index r, OptDmdVariant v, std::optional<CVector> init = std::nullopt) {
    OptDmdConfig cfg;
    cfg.rank = r;
    cfg.variant = v;
    cfg.init_alpha = std::move(init);
    OptDmdOutput out = fit(data, cfg);
    testing::check_monotone(out.solution);
    for (Index j = 0; j < out.result.modes.cols(); ++j)
        CHECK(std::abs(out.result.modes.col(j).norm() - 1.0) <= 1e-12);
    CHECK((out.result.amplitudes.array() >= 0.0).all());
    return out;
}

// Sum_i b_i phi_i exp(alpha_i t) on the grid, with unit modes.
SnapshotSet exponential_data(const CVector& alpha, const CMatrix& modes, const CVector& b, const TimeGrid& g) {
    const CMatrix phi = build_phi(alpha, g).phi;
    return {modes * b.asDiagonal() * phi.transpose(), g};
}

double objective(const CMatrix& h, const CMatrix& phi) {
    const CMatrix b = lstsq(phi, h);
    return (h - phi * b).norm();
}

}  // namespace

TEST_SUITE("optdmd") {

TEST_CASE("snapshot set validation and pairs") {
    SnapshotSet s{CMatrix::Ones(2, 3), TimeGrid::equispaced(3, 0.5)};
    CHECK_NOTHROW(s.validate());
    const SnapshotPairs p = s.pairs();
    CHECK(p.x.cols() == 2);
    CHECK(p.dt == doctest::Approx(0.5));
    SnapshotSet bad{CMatrix::Ones(2, 4), TimeGrid::equispaced(3, 0.5)};
    CHECK_THROWS_AS(bad.validate(), Error);
    SnapshotSet uneven{CMatrix::Ones(2, 3), TimeGrid(std::vector<double>{0.0, 0.1, 0.5})};
    try {
        uneven.pairs();
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DegenerateGrid);
    }
    SnapshotSet nonfinite{CMatrix::Ones(2, 3), TimeGrid::equispaced(3, 0.5)};
    nonfinite.states(1, 1) = std::nan("");
    CHECK_THROWS_AS(nonfinite.validate(), Error);
}

TEST_CASE("init_alpha on constant data") {
    CMatrix z(3, 6);
    for (Index j = 0; j < 6; ++j) z.col(j) << 1.0, -2.0, 0.5;
    const CVector a = init_alpha({z, TimeGrid::equispaced(6, 0.1)}, 1);
    CHECK(std::abs(a(0)) <= 1e-14);
}

TEST_CASE("init_alpha trapezoid fixed point for a scalar exponential") {
    const double dt = 0.1;
    CMatrix z(1, 21);
    for (Index j = 0; j <= 20; ++j) z(0, j) = std::exp(-1.0 * j * dt);
    const CVector a = init_alpha({z, TimeGrid::equispaced(21, dt)}, 1);
    const double e = std::exp(-dt);
    const double closed = (2 / dt) * (e - 1) / (e + 1);
    CHECK(std::abs(a(0) - closed) <= 1e-12);
    CHECK(std::abs(closed - (2 / dt) * std::tanh(-dt / 2)) <= 1e-15);
    CHECK(closed == doctest::Approx(-0.9991672).epsilon(1e-6));
}

TEST_CASE("init_alpha on noise-free Example 1") {
    const GeneratedData gen = gen_example1(64, 0.1, 0.0, 0);
    const CVector a = init_alpha(gen.data, 2);
    const double w = (2 / 0.1) * std::tan(0.05);
    CVector want(2);
    want << cplx(0, w), cplx(0, -w);
    CHECK(eigenvalue_match_error(a, want) <= 1e-10);
    CHECK(w == doctest::Approx(1.000834).epsilon(1e-6));
}

TEST_CASE("init_alpha rank too large") {
    try {
        init_alpha(gen_example1(10, 0.1, 0.0, 0).data, 3);
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::RankTooLarge);
    }
}

TEST_CASE("optimized_dmd on noise-free Example 1") {
    const GeneratedData gen = gen_example1(64, 0.1, 0.0, 0);
    const OptDmdOutput out = run(gen.data, 2, OptDmdVariant::Full);
    CHECK(eigenvalue_match_error(out.result.eigenvalues, gen.truth.eigenvalues) <= 1e-6);
    CHECK(out.result.method == DmdMethod::Optimized);
}

TEST_CASE("optimized_dmd recovers a known exponential triple") {
    std::mt19937_64 rng(17);
    CVector alpha(3);
    alpha << cplx(-0.1, 2.0), cplx(-0.5, -1.0), cplx(0.2, 0.0);
    CMatrix modes = testing::random_complex(5, 3, rng);
    for (Index j = 0; j < 3; ++j) modes.col(j).normalize();
    CVector b(3);
    b << 3.0, 2.0, 1.0;
    const SnapshotSet data = exponential_data(alpha, modes, b, TimeGrid::equispaced(40, 0.1));
    const OptDmdOutput out = run(data, 3, OptDmdVariant::Full);
    const DmdResult& r = out.result;
    REQUIRE(r.rank() == 3);
    for (Index i = 0; i < 3; ++i) {
        CHECK(std::abs(r.eigenvalues(i) - alpha(i)) <= 1e-7);
        CHECK(std::abs(r.amplitudes(i) - std::abs(b(i))) <= 1e-7);
        CHECK(testing::phase_free_distance(r.modes.col(i), modes.col(i)) <= 1e-7);
    }
}

TEST_CASE("optimized_dmd on a constant signal") {
    CVector z0(3);
    z0 << 1.0, -2.0, 2.0;
    CMatrix z(3, 8);
    for (Index j = 0; j < 8; ++j) z.col(j) = z0;
    CVector a0(1);
    a0 << 0.0;
    const OptDmdOutput out = run({z, TimeGrid::equispaced(8, 0.3)}, 1, OptDmdVariant::Full, a0);
    CHECK(std::abs(out.result.eigenvalues(0)) <= 1e-12);
    CHECK(std::abs(out.result.amplitudes(0) - 3.0) <= 1e-12);
    CHECK(testing::phase_free_distance(out.result.modes.col(0), z0 / 3.0) <= 1e-12);
}

TEST_CASE("optimized_dmd works on an uneven grid") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(0.0, 6.0);
    std::vector<double> t(50);
    for (double& x : t) x = u(rng);
    std::sort(t.begin(), t.end());
    const TimeGrid g(t);
    RMatrix z(2, 50);
    for (Index j = 0; j < 50; ++j) z.col(j) = example1_state(g[j]);
    const OptDmdOutput out = run({z.cast<cplx>(), g}, 2, OptDmdVariant::Full);
    CHECK(eigenvalue_match_error(out.result.eigenvalues, example_truth(Example::Ex1Sensor).eigenvalues) <= 1e-6);
}

TEST_CASE("config errors") {
    const GeneratedData gen = gen_example1(20, 0.1, 0.0, 0);
    OptDmdConfig cfg;
    cfg.rank = 2;
    cfg.init_alpha = CVector::Zero(3);
    try {
        fit(gen.data, cfg);
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::LengthMismatch);
    }
    cfg.init_alpha.reset();
    cfg.rank = 0;
    CHECK_THROWS_AS(fit(gen.data, cfg), Error);
}

TEST_CASE("approximate variant on noise-free Example 2") {
    const GeneratedData gen = gen_example2(128, 0.0, 0);
    const OptDmdOutput out = run(gen.data, 4, OptDmdVariant::Approximate);
    CHECK(eigenvalue_match_error(out.result.eigenvalues, gen.truth.eigenvalues) <= 1e-6);
    CHECK(out.result.method == DmdMethod::ApproxOptimized);
}

TEST_CASE("full and approximate variants agree on exact-rank data") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        std::mt19937_64 rng(300 + seed);
        const Index r = 2 + static_cast<Index>(seed % 3);
        CVector alpha(r);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (Index i = 0; i < r; ++i) alpha(i) = cplx(0.2 * u(rng), 3.0 * u(rng));
        CMatrix modes = testing::random_complex(6, r, rng);
        for (Index j = 0; j < r; ++j) modes.col(j).normalize();
        CVector b(r);
        for (Index i = 0; i < r; ++i) b(i) = 1.0 + i;
        const SnapshotSet data = exponential_data(alpha, modes, b, TimeGrid::equispaced(30, 0.1));
        const OptDmdOutput full = run(data, r, OptDmdVariant::Full);
        const OptDmdOutput appr = run(data, r, OptDmdVariant::Approximate);
        CAPTURE(seed);
        CHECK(eigenvalue_match_error(full.result.eigenvalues, appr.result.eigenvalues) <= 1e-8);
        const CVector ordered = match_eigenvalues(appr.result.eigenvalues, full.result.eigenvalues);
        for (Index i = 0; i < r; ++i) {
            Index k = 0;
            while (appr.result.eigenvalues(k) != ordered(i)) ++k;
            CHECK(std::abs(full.result.amplitudes(i) - appr.result.amplitudes(k)) <= 1e-6);
            CHECK(testing::phase_free_distance(full.result.modes.col(i), appr.result.modes.col(k)) <= 1e-6);
        }
    }
}

TEST_CASE("approximate variant matches log of exact DMD on noise-free linear data") {
    const GeneratedData gen = gen_example1(30, 0.1, 0.0, 0);
    const DmdResult ex = exact_dmd(gen.data.pairs(), 2);
    const OptDmdOutput appr = run(gen.data, 2, OptDmdVariant::Approximate);
    CHECK(eigenvalue_match_error(appr.result.eigenvalues, discrete_to_continuous(ex.discrete_eigs, 0.1)) <= 1e-6);
}

TEST_CASE("truncated and full fits satisfy the reconstruction inequality") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const GeneratedData gen = gen_example2(64, 0.25, seed);
        const Index r = 4;
        const CMatrix xt = gen.data.states.transpose();
        const OptDmdOutput full = run(gen.data, r, OptDmdVariant::Full);
        const OptDmdOutput appr = run(gen.data, r, OptDmdVariant::Approximate);

        Eigen::BDCSVD<CMatrix> svd(gen.data.states, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const CMatrix ur = svd.matrixU().leftCols(r);
        const CMatrix xr = ur * svd.singularValues().head(r).asDiagonal() * svd.matrixV().leftCols(r).adjoint();
        const CMatrix b_breve = appr.solution.b * ur.transpose();
        const double lhs = (xt - build_phi(appr.solution.alpha, gen.data.grid).phi * b_breve).norm();
        const double trunc = (gen.data.states - xr).norm();
        const double fit_full = (xt - build_phi(full.solution.alpha, gen.data.grid).phi * full.solution.b).norm();
        CAPTURE(seed);
        CHECK(lhs <= 2 * trunc + fit_full);
    }
}

TEST_CASE("objective unchanged by a joint permutation of snapshots and times") {
    std::mt19937_64 rng(29);
    const GeneratedData gen = gen_example1(25, 0.1, 0.1, 4);
    CVector alpha(2);
    alpha << cplx(0.01, 0.98), cplx(-0.02, -1.01);
    const CMatrix h = gen.data.states.transpose();
    const CMatrix phi = build_phi(alpha, gen.data.grid).phi;
    std::vector<Index> perm(25);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    CMatrix hp(25, 2), phip(25, 2);
    for (Index i = 0; i < 25; ++i) {
        hp.row(i) = h.row(perm[i]);
        phip.row(i) = phi.row(perm[i]);
    }
    CHECK(std::abs(objective(h, phi) - objective(hp, phip)) <= 1e-12);
}

TEST_CASE("approximate optimized DMD beats exact DMD on Example 2 hidden eigenvalues") {
    double opt_err = 0.0, exact_err = 0.0;
    const CVector truth = example_truth(Example::Ex2Hidden).eigenvalues;
    REQUIRE(truth(2).real() < 0.0);
    for (std::uint64_t trial = 0; trial < 100; ++trial) {
        const GeneratedData gen = gen_example2(128, 0.5, trial_seed(0, 128, 0.25, static_cast<Index>(trial)));
        const OptDmdOutput appr = run(gen.data, 4, OptDmdVariant::Approximate);
        const DmdResult ex = exact_dmd(gen.data.pairs(), 4);
        const CVector mo = match_eigenvalues(appr.result.eigenvalues, truth);
        const CVector me = match_eigenvalues(ex.eigenvalues, truth);
        opt_err += (mo.tail(2) - truth.tail(2)).norm();
        exact_err += (me.tail(2) - truth.tail(2)).norm();
    }
    CHECK(opt_err < exact_err);
}

}
