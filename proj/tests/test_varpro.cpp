#include <cmath>
#include <random>

#include "doctest.h"
#include "test_support.hpp"

#include "optdmd/error.hpp"
#include "optdmd/expbasis.hpp"
#include "optdmd/harness.hpp"
#include "optdmd/optdmd.hpp"
#include "optdmd/varpro.hpp"

using namespace optdmd;
using namespace std::complex_literals;

namespace {

CVector stacked_residual(const CMatrix& h, const CVector& alpha, const TimeGrid& g) {
    const Projection p = project_residual(h, alpha, g, 1e-12);
    return p.p.reshaped();
}

CMatrix fd_jacobian(const CMatrix& h, const CVector& alpha, const TimeGrid& g, double step) {
    CMatrix j(h.size(), alpha.size());
    for (Index c = 0; c < alpha.size(); ++c) {
        CVector ap = alpha, am = alpha;
        ap(c) += step;
        am(c) -= step;
        j.col(c) = (stacked_residual(h, ap, g) - stacked_residual(h, am, g)) / (2 * step);
    }
    return j;
}

}  // namespace

TEST_SUITE("varpro") {

TEST_CASE("options validation") {
    VarProOptions o;
    CHECK_NOTHROW(o.validate());
    o.nu_up = 1.0;
    CHECK_THROWS_AS(o.validate(), Error);
    o = {};
    o.max_outer_iters = 0;
    CHECK_THROWS_AS(o.validate(), Error);
}

TEST_CASE("project_residual on exact span and zero data") {
    std::mt19937_64 rng(3);
    const TimeGrid g = TimeGrid::equispaced(7, 0.2);
    CVector alpha(2);
    alpha << cplx(-0.5, 1.0), cplx(0.2, -2.0);
    const CMatrix c = testing::random_complex(2, 3, rng);
    const CMatrix h = build_phi(alpha, g).phi * c;
    const Projection p = project_residual(h, alpha, g, 1e-12);
    CHECK((p.b - c).norm() <= 1e-12 * c.norm());
    CHECK(p.p.norm() <= 1e-12 * h.norm());

    const Projection z = project_residual(CMatrix::Zero(7, 3), alpha, g, 1e-12);
    CHECK(z.b.norm() == 0.0);
    CHECK(z.p.norm() == 0.0);
}

TEST_CASE("project_residual matches normal equations") {
    std::mt19937_64 rng(4);
    const TimeGrid g = TimeGrid::equispaced(6, 0.3);
    CVector alpha(2);
    alpha << cplx(-0.4, 0.7), cplx(0.3, -1.5);
    const CMatrix h = testing::random_complex(6, 3, rng);
    const CMatrix phi = build_phi(alpha, g).phi;
    const CMatrix normal = phi.adjoint() * phi;
    const CMatrix b = normal.fullPivLu().solve(phi.adjoint() * h);
    const Projection p = project_residual(h, alpha, g, 1e-12);
    CHECK((p.b - b).norm() <= 1e-10 * b.norm());
    CHECK((p.p - (h - phi * b)).norm() <= 1e-10 * h.norm());
    CHECK(p.residual_norm() <= h.norm());
}

TEST_CASE("project_residual shape errors") {
    const TimeGrid g = TimeGrid::equispaced(4, 0.1);
    CVector alpha = CVector::Zero(2);
    CHECK_THROWS_AS(project_residual(CMatrix::Zero(5, 2), alpha, g, 1e-12), Error);
    CHECK_THROWS_AS(project_residual(CMatrix::Zero(4, 2), CVector::Zero(5), g, 1e-12), Error);
}

TEST_CASE("projection residual invariant under orthogonal state rotation") {
    std::mt19937_64 rng(8);
    const TimeGrid g = TimeGrid::equispaced(9, 0.15);
    CVector alpha(2);
    alpha << cplx(-0.1, 1.3), cplx(0.05, -0.6);
    const CMatrix h = testing::random_real(9, 4, rng).cast<cplx>();
    const RMatrix q = testing::random_orthogonal(4, rng);
    const double a = project_residual(h, alpha, g, 1e-12).residual_norm();
    const double b = project_residual(h * q.transpose().cast<cplx>(), alpha, g, 1e-12).residual_norm();
    CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, a));
}

TEST_CASE("jacobian of zero data is zero") {
    const TimeGrid g = TimeGrid::equispaced(5, 0.1);
    CVector alpha(2);
    alpha << cplx(0.0, 1.0), cplx(-1.0, 0.0);
    const CMatrix h = CMatrix::Zero(5, 2);
    const Projection p = project_residual(h, alpha, g, 1e-12);
    for (JacobianMode m : {JacobianMode::Full, JacobianMode::Kaufman}) {
        const CMatrix j = jacobian(h, alpha, g, p, m);
        CHECK(j.rows() == 10);
        CHECK(j.cols() == 2);
        CHECK(j.norm() == 0.0);
    }
}

TEST_CASE("full jacobian matches central finite differences over 10 seeds") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        std::mt19937_64 rng(100 + seed);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        const TimeGrid g = TimeGrid::equispaced(8, 0.25);
        CVector alpha(2);
        alpha << cplx(0.3 * u(rng), 1.0 + u(rng)), cplx(0.3 * u(rng), -2.0 + u(rng));
        const CMatrix h = testing::random_complex(8, 4, rng);
        const Projection p = project_residual(h, alpha, g, 1e-12);
        const CMatrix j = jacobian(h, alpha, g, p, JacobianMode::Full);
        const CMatrix fd = fd_jacobian(h, alpha, g, 1e-6);
        CAPTURE(seed);
        CHECK(testing::rel_diff(j, fd) <= 1e-5);
    }
}

TEST_CASE("Kaufman equals Full on zero-residual data") {
    std::mt19937_64 rng(21);
    const TimeGrid g = TimeGrid::equispaced(10, 0.1);
    CVector alpha(3);
    alpha << cplx(-0.2, 1.0), cplx(0.1, -3.0), cplx(-1.0, 0.0);
    const CMatrix h = build_phi(alpha, g).phi * testing::random_complex(3, 4, rng);
    const Projection p = project_residual(h, alpha, g, 1e-12);
    const CMatrix full = jacobian(h, alpha, g, p, JacobianMode::Full);
    const CMatrix kauf = jacobian(h, alpha, g, p, JacobianMode::Kaufman);
    CHECK((full - kauf).norm() <= 1e-12 * full.norm());
}

TEST_CASE("lm_step examples") {
    const CMatrix j = CMatrix::Identity(2, 2);
    CVector rho(2);
    rho << 1.0, 0.0;
    const RVector scale = RVector::Ones(2);
    const CVector d0 = lm_step(j, rho, 0.0, scale);
    CHECK(std::abs(d0(0) - 1.0) < 1e-15);
    CHECK(std::abs(d0(1)) < 1e-15);
    const CVector d1 = lm_step(j, rho, 1.0, scale);
    CHECK(std::abs(d1(0) - 0.5) < 1e-15);
    CHECK(std::abs(d1(1)) < 1e-15);
}

TEST_CASE("lm_step shrinks as nu grows") {
    std::mt19937_64 rng(9);
    const CMatrix j = testing::random_complex(12, 3, rng);
    const CVector rho = testing::random_complex(12, 1, rng);
    const RVector scale = column_scaling(j);
    double prev = lm_step(j, rho, 0.0, scale).norm();
    for (double nu : {1.0, 10.0, 100.0, 1000.0}) {
        const double n = lm_step(j, rho, nu, scale).norm();
        CHECK(n < prev);
        prev = n;
    }
}

TEST_CASE("lm_step with a zero Jacobian column uses unit scale") {
    CMatrix j = CMatrix::Zero(3, 2);
    j(0, 0) = 2.0;
    CVector rho(3);
    rho << 2.0, 0.0, 0.0;
    const CVector d = lm_step(j, rho, 0.5, column_scaling(j));
    CHECK(d.allFinite());
    CHECK(std::abs(d(1)) == 0.0);
}

TEST_CASE("solve_varpro starting at a zero-residual optimum") {
    std::mt19937_64 rng(13);
    const TimeGrid g = TimeGrid::equispaced(12, 0.1);
    CVector alpha(2);
    alpha << cplx(-0.3, 2.0), cplx(0.1, -1.0);
    const CMatrix c = testing::random_complex(2, 3, rng);
    const CMatrix h = build_phi(alpha, g).phi * c;
    const VarProSolution s = solve_varpro(h, g, alpha);
    testing::check_monotone(s);
    CHECK(s.status == SolveStatus::Converged);
    CHECK((s.alpha - alpha).norm() <= 1e-12);
    CHECK((s.b - c).norm() <= 1e-10 * c.norm());
}

TEST_CASE("solve_varpro recovers a single decaying exponential") {
    const TimeGrid g = TimeGrid::equispaced(11, 0.1);
    CVector truth(1);
    truth << -1.0;
    const CMatrix h = build_phi(truth, g).phi * 2.5;
    CVector a0(1);
    a0 << -0.5;
    const VarProSolution s = solve_varpro(h, g, a0);
    testing::check_monotone(s);
    CHECK(std::abs(s.alpha(0) + 1.0) <= 1e-8);
    CHECK(s.status == SolveStatus::Converged);
}

TEST_CASE("solve_varpro on noise-free Example 1") {
    const GeneratedData gen = gen_example1(64, 0.1, 0.0, 0);
    const CVector a0 = init_alpha(gen.data, 2);
    for (JacobianMode mode : {JacobianMode::Full, JacobianMode::Kaufman}) {
        VarProOptions o;
        o.jacobian_mode = mode;
        const VarProSolution s = solve_varpro(gen.data.states.transpose(), gen.data.grid, a0, o);
        testing::check_monotone(s);
        const cplx lo = s.alpha(0).imag() > 0 ? s.alpha(0) : s.alpha(1);
        const cplx hi = s.alpha(0).imag() > 0 ? s.alpha(1) : s.alpha(0);
        CHECK(std::abs(lo - 1.0i) <= 1e-6);
        CHECK(std::abs(hi + 1.0i) <= 1e-6);
    }
}

TEST_CASE("solver invariants on noisy instances") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const GeneratedData gen = gen_example1(40, 0.1, 0.1, seed);
        const CMatrix h = gen.data.states.transpose();
        const CVector a0 = init_alpha(gen.data, 2);
        const VarProSolution s = solve_varpro(h, gen.data.grid, a0);
        CAPTURE(seed);
        testing::check_monotone(s);
        const Projection p = project_residual(h, s.alpha, gen.data.grid, 1e-12);
        CHECK((p.b - s.b).norm() <= 1e-12 * std::max(1.0, p.b.norm()));
        CHECK(p.residual_norm() <= h.norm());
        CHECK(std::abs(p.residual_norm() - s.residual_history.back()) <= 1e-12 * h.norm());
    }
}

TEST_CASE("solve_varpro honours the iteration cap") {
    const GeneratedData gen = gen_example1(64, 0.1, 0.3, 1);
    CVector a0(2);
    a0 << cplx(-2.0, 0.2), cplx(-2.0, -0.2);
    VarProOptions o;
    o.max_outer_iters = 1;
    o.rel_tol = 1e-300;
    o.grad_tol = 1e-300;
    const VarProSolution s = solve_varpro(gen.data.states.transpose(), gen.data.grid, a0, o);
    testing::check_monotone(s);
    CHECK(s.iterations <= 1);
    CHECK(s.status != SolveStatus::Converged);
}

}
