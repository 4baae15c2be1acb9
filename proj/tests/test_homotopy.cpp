#include <gtest/gtest.h>

#include <numbers>

#include "fnlab/experiments.hpp"
#include "fnlab/homotopy.hpp"
#include "test_support.hpp"

using namespace fnlab;
using fnlab::testing::spectral_norm;

namespace {

TowerConfig small_tower() {
    TowerConfig c;
    c.radius = 1;
    c.dims = {2, 3, 2, 4};
    c.seed = 5;
    return c;
}

}  // namespace

TEST(Endpoints, ThetaVectorFixedByPiOne) {
    const auto e = build_endpoints(2, 1);
    EXPECT_EQ(e.space_dim, 1 + 2 * 17);
    Vector v = Vector::Zero(e.space_dim);
    v[0] = 1.0;
    for (int i = 1; i <= 2; ++i) EXPECT_EQ((e.pi1.generator(i).apply(v) - v).norm(), 0.0);
}

TEST(Endpoints, PermutationsAreUnitary) {
    const auto e = build_endpoints(2, 2);
    EXPECT_LE(unitarity_check(e.pi0, 1e-15).deviation, 1e-15);
    EXPECT_LE(unitarity_check(e.pi1, 1e-15).deviation, 1e-15);
}

TEST(Endpoints, PiZeroDefectsBounded) {
    for (int r : {1, 2, 3}) {
        const auto e = build_endpoints(r, 3);
        const auto ball = ball_enumerate(r);
        const auto b = static_cast<Index>(ball.size());
        const std::size_t bound = 2 * static_cast<std::size_t>(std::pow(3, r)) + 1;
        for (int i = 0; i < 2; ++i) {
            EXPECT_LE(e.pi0_defects[static_cast<std::size_t>(i)].size(), bound);
            // columns that differ from blockwise translation
            const auto trans = ball_translation(ball, r, static_cast<std::uint8_t>(2 * i));
            std::size_t differ = 0;
            for (Index j = 0; j < e.space_dim; ++j) {
                Index expect = -1;
                if (j > 0) {
                    const Index off = j <= b ? 1 : 1 + b;
                    const Index t = trans[static_cast<std::size_t>(j - off)];
                    expect = t >= 0 ? off + t : -1;
                }
                differ += (e.pi0_images[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] != expect) ? 1 : 0;
            }
            EXPECT_LE(differ, bound);
        }
    }
}

TEST(PiFamily, LogarithmReproducesRelativePermutation) {
    const PiFamily f(build_endpoints(2, 4));
    for (int i = 1; i <= 2; ++i) {
        const Matrix p0 = to_dense(f.endpoints().pi0.generator(i));
        const Matrix p1 = to_dense(f.endpoints().pi1.generator(i));
        const Matrix expk = to_dense(f.geodesic_factor(i, 1.0));
        EXPECT_LE((expk - p0.adjoint() * p1).cwiseAbs().maxCoeff(), 1e-10);
        // K is skew-Hermitian with spectrum in [-pi, pi]
        const Matrix k = to_dense(f.log(i).log_operator());
        EXPECT_LE((k + k.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LE(spectral_norm(k), std::numbers::pi + 1e-12);
    }
}

TEST(PiFamily, EndpointsAndUnitarity) {
    const PiFamily f(build_endpoints(2, 5));
    const UnitaryRep s0 = pi_s(f, 0.0);
    EXPECT_EQ((to_dense(s0.generator(1)) - to_dense(f.endpoints().pi0.generator(1))).cwiseAbs().maxCoeff(), 0.0);
    for (int i = 1; i <= 2; ++i) {
        const Matrix path1 = to_dense(f.endpoints().pi0.generator(i)) * to_dense(f.geodesic_factor(i, 1.0));
        EXPECT_LE((path1 - to_dense(f.endpoints().pi1.generator(i))).cwiseAbs().maxCoeff(), 1e-10);
    }
    for (double s : {0.1, 0.5, 0.93}) EXPECT_LE(unitarity_check(pi_s(f, s), 1e-10).deviation, 1e-10);
    EXPECT_THROW(pi_s(f, -0.1), std::domain_error);
    EXPECT_THROW(pi_s(f, 1.5), std::domain_error);
}

TEST(PiFamily, GeodesicLipschitzBound) {
    const PiFamily f(build_endpoints(3, 6));
    for (int i = 1; i <= 2; ++i) {
        const double d = spectral_norm(to_dense(pi_s(f, 0.6).generator(i)) - to_dense(pi_s(f, 0.4).generator(i)));
        EXPECT_LE(d, std::numbers::pi * 0.2 + 1e-9);
        EXPECT_NEAR(f.generator_distance(i, 0.4, 0.6), d, 1e-10);
    }
    rng::CounterRng g(7);
    for (int trial = 0; trial < 10; ++trial) {
        const double a = rng::uniform01(g);
        const double b = rng::uniform01(g);
        EXPECT_LE(f.generator_distance(1, a, b), std::numbers::pi * std::abs(a - b) + 1e-12);
    }
}

TEST(PiFamily, CycleLogBookkeeping) {
    const auto c = CycleLog::from_permutation({1, 2, 0, 3, 5, 4});
    ASSERT_EQ(c.cycles.size(), 2u);
    EXPECT_EQ(c.support(), 5);
    EXPECT_EQ(c.moved_rank(), 3);
    // an eigenvalue -1 takes the angle +pi
    const auto th = CycleLog::angles(2);
    EXPECT_EQ(th[1], std::numbers::pi);
}

TEST(Tower, ScheduleAtZeroIsAllTailValued) {
    const Tower tw(small_tower());
    const auto s = tw.schedule(0.0);
    for (const auto& b : s) EXPECT_EQ(b.s, 1.0);
    EXPECT_EQ(s[0].kind, BlockKind::moving);
    EXPECT_THROW(tw.schedule(-0.5), std::domain_error);
    EXPECT_THROW(tw.schedule(3.5), std::domain_error);
}

TEST(Tower, ScheduleInsideInterval) {
    const Tower tw(small_tower());
    const auto s = tw.schedule(1.25);
    EXPECT_EQ(s[0].kind, BlockKind::prefix);
    EXPECT_EQ(s[0].s, 0.0);
    EXPECT_EQ(s[1].kind, BlockKind::moving);
    EXPECT_DOUBLE_EQ(s[1].s, 0.75);
    EXPECT_EQ(s[2].kind, BlockKind::tail);
    EXPECT_EQ(s[3].s, 1.0);
    const auto j = schedule_to_json(s, 1.25);
    EXPECT_EQ(j["blocks"].size(), 4u);
    EXPECT_EQ(j["blocks"][1]["kind"], "moving");
}

TEST(Tower, IntegerJunctionsAgree) {
    const Tower tw(small_tower());
    for (double m : {1.0, 2.0, 3.0}) {
        const auto l = tw.schedule(m, Side::left);
        const auto r = tw.schedule(m, Side::right);
        for (std::size_t k = 0; k < l.size(); ++k) {
            EXPECT_EQ(l[k].s, r[k].s);
            EXPECT_EQ(l[k].s, k < static_cast<std::size_t>(m) ? 0.0 : 1.0);
        }
        EXPECT_EQ(junction_residual(tw, kesten_element(2), m, 3), 0.0);
    }
}

TEST(Tower, TailBlockEvalMatchesTensorBasis) {
    const Tower tw(small_tower());
    const RingElement a = kesten_element(2);
    for (std::size_t k = 0; k < 4; ++k) {
        const Matrix direct = to_dense(rep_eval(tw.block_rep(k, 1.0), a));
        const Matrix split = to_dense(tw.block_eval(k, 1.0, a));
        EXPECT_LE((direct - split).cwiseAbs().maxCoeff(), 1e-15);
        // the first dim(sigma) coordinates carry sigma_k(a)
        const Index d = tw.config().dims[k];
        const Matrix sig = to_dense(rep_eval(tw.sigma().reps[k], a));
        EXPECT_EQ((direct.topLeftCorner(d, d) - sig).cwiseAbs().maxCoeff(), 0.0);
        EXPECT_GE(spectral_norm(direct), spectral_norm(sig) - 1e-10);
    }
}

TEST(Tower, RhoTUnitaryAndContinuous) {
    const Tower tw(small_tower());
    EXPECT_EQ(tw.total_dim(), 11 * (2 + 3 + 2 + 4));
    for (double t : {0.0, 0.4, 1.0, 2.7, 3.0}) {
        EXPECT_LE(unitarity_check(tw.rho_t(t), 1e-9).deviation, 1e-9) << t;
    }
    for (auto [t1, t2] : {std::pair{1.1, 1.18}, {2.3, 2.4}, {0.0, 0.05}}) {
        const UnitaryRep r1 = tw.rho_t(t1);
        const UnitaryRep r2 = tw.rho_t(t2);
        for (int i = 1; i <= 2; ++i) {
            const double d = spectral_norm(to_dense(r1.generator(i)) - to_dense(r2.generator(i)));
            EXPECT_LE(d, std::numbers::pi * std::abs(t1 - t2) + 1e-8);
        }
    }
}

TEST(Tower, RhoEvalEqualsRepEvalOfRhoT) {
    const Tower tw(small_tower());
    const RingElement a = kesten_element(2);
    for (double t : {0.0, 1.5, 3.0}) {
        const Matrix x = to_dense(tw.rho_eval(t, a));
        const Matrix y = to_dense(rep_eval(tw.rho_t(t), a));
        EXPECT_LE((x - y).cwiseAbs().maxCoeff(), 1e-14);
    }
}

TEST(Tower, ConfigValidation) {
    TowerConfig c;
    c.dims = {4};
    EXPECT_THROW(Tower{c}, std::invalid_argument);
    c.dims = {4, 0};
    EXPECT_THROW(Tower{c}, std::invalid_argument);
    c.dims = {4, 4};
    c.radius = 0;
    EXPECT_THROW(Tower{c}, std::invalid_argument);
}
