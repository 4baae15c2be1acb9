#include <gtest/gtest.h>

#include <complex>

#include "fnlab/words.hpp"
#include "test_support.hpp"

using namespace fnlab;
using fnlab::testing::brute_reduce;
using fnlab::testing::random_element;
using fnlab::testing::random_letters;
using fnlab::testing::random_word;

namespace {

const Word g1 = Word::generator(1);
const Word g1i = Word::generator(1, -1);
const Word g2 = Word::generator(2);
const Word g2i = Word::generator(2, -1);

void expect_close(const RingElement& x, const RingElement& y, double tol = 1e-12) {
    for (const auto& [w, a] : x.terms()) EXPECT_LE(std::abs(a - y.coefficient(w)), tol) << w.to_string();
    for (const auto& [w, a] : y.terms()) EXPECT_LE(std::abs(a - x.coefficient(w)), tol) << w.to_string();
}

}  // namespace

TEST(Word, MultiplicationCancels) {
    EXPECT_TRUE((g1 * g1i).is_identity());
    EXPECT_EQ(word_mul(g1 * g2, g2i * g1), g1 * g1);
    EXPECT_EQ((g1 * g1).to_string(), "1 1");
    EXPECT_EQ(Word{} * g2, g2);
}

TEST(Word, Inverse) {
    EXPECT_TRUE(word_inv(Word{}).is_identity());
    EXPECT_EQ(word_inv(Word::parse("1 -2")), Word::parse("2 -1"));
}

TEST(Word, ParseAndPrint) {
    EXPECT_EQ(Word::parse("1 -2 1").to_string(), "1 -2 1");
    EXPECT_EQ(Word::parse("1 -1 2"), g2);
    EXPECT_TRUE(Word::parse("").is_identity());
    EXPECT_THROW(Word::parse("1 0"), std::invalid_argument);
    EXPECT_THROW(Word::parse("1 x"), std::invalid_argument);
}

TEST(Word, AssociativityAgainstBruteReduction) {
    rng::CounterRng g(11);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto lu = random_letters(g, 6);
        const auto lv = random_letters(g, 6);
        const auto lw = random_letters(g, 6);
        const Word u = Word::from_letters(lu);
        const Word v = Word::from_letters(lv);
        const Word w = Word::from_letters(lw);
        ASSERT_TRUE(u.is_reduced() && v.is_reduced() && w.is_reduced());
        EXPECT_EQ((u * v) * w, u * (v * w));

        std::vector<Letter> all = lu;
        all.insert(all.end(), lv.begin(), lv.end());
        all.insert(all.end(), lw.begin(), lw.end());
        EXPECT_EQ(u * v * w, Word::from_letters(brute_reduce(all)));
        EXPECT_TRUE((u * v * w).is_reduced());
    }
}

TEST(Word, InverseProperties) {
    rng::CounterRng g(12);
    for (int trial = 0; trial < 1000; ++trial) {
        const Word w = random_word(g, 10);
        EXPECT_EQ(word_inv(word_inv(w)), w);
        EXPECT_EQ(word_mul(w, word_inv(w)).length(), 0U);
        EXPECT_TRUE(word_inv(w).is_reduced());
    }
}

TEST(Ball, SmallSizes) {
    EXPECT_EQ(ball_enumerate(0).size(), 1U);
    EXPECT_TRUE(ball_enumerate(0)[0].is_identity());
    EXPECT_EQ(ball_enumerate(1).size(), 5U);
    EXPECT_EQ(ball_enumerate(2).size(), 17U);
}

TEST(Ball, CountOrderAndIndex) {
    for (int r = 0; r <= 10; ++r) {
        std::size_t expect = 2;
        for (int i = 0; i < r; ++i) expect *= 3;
        --expect;
        const auto ball = ball_enumerate(r);
        ASSERT_EQ(ball.size(), expect) << "radius " << r;
        EXPECT_EQ(ball_size(r), expect);
        if (r == 6) {
            for (std::size_t i = 0; i < ball.size(); ++i) {
                ASSERT_TRUE(ball[i].is_reduced());
                ASSERT_EQ(ball_index(ball[i]), i);
                if (i > 0) {
                    ASSERT_LT(ball[i - 1], ball[i]);
                }
            }
        }
    }
}

TEST(Ball, CapIsEnforced) {
    EXPECT_THROW(ball_enumerate(5, 100), ResourceError);
    EXPECT_THROW(ball_enumerate(-1), std::invalid_argument);
}

TEST(Ring, Multiplication) {
    const RingElement x = RingElement::delta(g1, {2.0, 1.0}) + RingElement::delta(g2i, 0.5);
    EXPECT_EQ(x * RingElement::identity(), x);

    const RingElement s = RingElement::delta(g1) + RingElement::delta(g1i);
    const RingElement sq = s * s;
    EXPECT_EQ(sq.support_size(), 3U);
    EXPECT_EQ(sq.coefficient(g1 * g1), cplx(1.0));
    EXPECT_EQ(sq.coefficient(Word{}), cplx(2.0));
    EXPECT_EQ(sq.coefficient(g1i * g1i), cplx(1.0));
}

TEST(Ring, ZeroCoefficientsAreDropped) {
    RingElement x = RingElement::delta(g1, 1.0);
    x.add(g1, -1.0);
    EXPECT_TRUE(x.is_zero());
    const RingElement y = RingElement::delta(g1) * RingElement::delta(g2, 0.0);
    EXPECT_TRUE(y.is_zero());
}

TEST(Ring, Star) {
    const RingElement x = RingElement::delta(g1, {0.0, 1.0});
    const RingElement sx = ring_star(x);
    EXPECT_EQ(sx.support_size(), 1U);
    EXPECT_EQ(sx.coefficient(g1i), cplx(0.0, -1.0));
    EXPECT_EQ(ring_star(kesten_element(2)), kesten_element(2));
}

TEST(Ring, AxiomsOnRandomInputs) {
    rng::CounterRng g(13);
    for (int trial = 0; trial < 100; ++trial) {
        const RingElement x = random_element(g, 4, 3);
        const RingElement y = random_element(g, 4, 3);
        const RingElement z = random_element(g, 4, 3);
        const cplx c{rng::gaussian(g), rng::gaussian(g)};
        expect_close((x * y) * z, x * (y * z));
        expect_close(x * (y + z), x * y + x * z);
        expect_close(ring_star(x * y), ring_star(y) * ring_star(x));
        expect_close(ring_star(c * x), std::conj(c) * ring_star(x));
        EXPECT_EQ(ring_star(ring_star(x)), x);
        EXPECT_LE((x * y).support_size(), x.support_size() * y.support_size());
    }
}

TEST(Ring, KestenElement) {
    const RingElement a = kesten_element(2);
    EXPECT_EQ(a.support_size(), 4U);
    for (const auto& [w, c] : a.terms()) {
        EXPECT_EQ(w.length(), 1U);
        EXPECT_EQ(c, cplx(0.25));
    }
    EXPECT_EQ(a.coefficient_sum(), cplx(1.0));
    EXPECT_DOUBLE_EQ(a.l1_norm(), 1.0);
    EXPECT_EQ(kesten_element(3).support_size(), 6U);
    EXPECT_THROW(kesten_element(0), std::invalid_argument);
}

TEST(Ring, JsonRoundTrip) {
    rng::CounterRng g(14);
    for (int trial = 0; trial < 20; ++trial) {
        const RingElement x = random_element(g, 5, 4);
        const auto j = to_json(x);
        EXPECT_EQ(ring_element_from_json(nlohmann::json::parse(j.dump())), x);
    }
    const auto j = to_json(RingElement::delta(Word::parse("1 -2 1"), {1.5, -2.0}));
    EXPECT_EQ(j.dump(), R"([{"word":"1 -2 1","re":1.5,"im":-2.0}])");
}
