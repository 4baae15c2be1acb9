/**
 * @file regular.hpp
 * @brief Finite stand-ins for the left regular representation of F_2.
 *
 * Three routes:
 *  - compression_eval: the exact section P_R lambda(a) P_R on the ball B_R.
 *    Its norm is a lower bound for ||lambda(a)||, nondecreasing in R.
 *  - unitarized_regular: left translation on B_R completed to a permutation by
 *    a seeded random matching of the boundary words.
 *  - radial_oracle: the Kesten element restricted to radial functions, a
 *    symmetric tridiagonal matrix whose top eigenvalue tends to sqrt(3)/2.
 */
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "fnlab/linear_operator.hpp"
#include "fnlab/repcore.hpp"
#include "fnlab/rng.hpp"
#include "fnlab/words.hpp"

namespace fnlab {

/// Sparse operator with entries <delta_v, lambda(a) delta_w> = alpha_{v w^{-1}} for v, w in B_R.
inline LinearOperator compression_eval(int radius, const RingElement& a, std::size_t cap = default_ball_cap) {
    if (a.max_generator() > 2) throw std::invalid_argument("compression_eval: element uses a generator beyond g2");
    if (radius >= 0 && a.max_length() > static_cast<std::size_t>(radius)) {
        std::clog << "fnlab: compression radius " << radius << " is shorter than the longest word ("
                  << a.max_length() << ")\n";
    }
    const std::vector<Word> ball = ball_enumerate(radius, cap);
    std::vector<Eigen::Triplet<cplx, Index>> entries;
    entries.reserve(ball.size() * a.support_size());
    for (std::size_t j = 0; j < ball.size(); ++j) {
        for (const auto& [u, alpha] : a.terms()) {
            const Word v = word_mul(u, ball[j]);
            if (v.length() <= static_cast<std::size_t>(radius)) {
                entries.emplace_back(static_cast<Index>(ball_index(v)), static_cast<Index>(j), alpha);
            }
        }
    }
    return sparse_operator(static_cast<Index>(ball.size()), entries);
}

/// Completes a partial injection (entries -1 are undefined) to a permutation: undefined
/// sources, in index order, are sent to a uniformly shuffled list of the unused targets.
/// Returns the (source, target) pairs that were added.
inline std::vector<std::pair<Index, Index>> complete_permutation(std::vector<Index>& image, rng::CounterRng& g) {
    const auto n = static_cast<Index>(image.size());
    std::vector<char> hit(image.size(), 0);
    std::vector<Index> sources;
    for (Index j = 0; j < n; ++j) {
        const Index i = image[static_cast<std::size_t>(j)];
        if (i < 0) {
            sources.push_back(j);
        } else {
            if (i >= n || hit[static_cast<std::size_t>(i)]) throw std::logic_error("complete_permutation: not injective");
            hit[static_cast<std::size_t>(i)] = 1;
        }
    }
    std::vector<Index> targets;
    for (Index i = 0; i < n; ++i) {
        if (!hit[static_cast<std::size_t>(i)]) targets.push_back(i);
    }
    rng::shuffle(targets, g);
    std::vector<std::pair<Index, Index>> matched;
    matched.reserve(sources.size());
    for (std::size_t k = 0; k < sources.size(); ++k) {
        image[static_cast<std::size_t>(sources[k])] = targets[k];
        matched.emplace_back(sources[k], targets[k]);
    }
    return matched;
}

/// Left translation by a generator on B_R; words leaving the ball map to -1.
inline std::vector<Index> ball_translation(const std::vector<Word>& ball, int radius, std::uint8_t code) {
    const Word g = Word::generator(code / 2 + 1, (code & 1U) ? -1 : 1);
    std::vector<Index> image(ball.size(), -1);
    for (std::size_t j = 0; j < ball.size(); ++j) {
        const Word v = word_mul(g, ball[j]);
        if (v.length() <= static_cast<std::size_t>(radius)) image[j] = static_cast<Index>(ball_index(v));
    }
    return image;
}

struct UnitarizedRegular {
    int radius = 0;
    std::uint64_t seed = 0;
    /// images[i][j] = index of the image of ball word j under the permutation for g_{i+1}
    std::array<std::vector<Index>, 2> images;
    /// boundary sources re-matched by the random bijection, per generator
    std::array<std::vector<std::pair<Index, Index>>, 2> defects;
    UnitaryRep rep;
};

inline UnitarizedRegular unitarized_regular(int radius, std::uint64_t seed, std::size_t cap = default_ball_cap) {
    if (radius < 1) throw std::invalid_argument("unitarized_regular: radius must be at least 1");
    const std::vector<Word> ball = ball_enumerate(radius, cap);
    UnitarizedRegular u;
    u.radius = radius;
    u.seed = seed;
    for (int i = 0; i < 2; ++i) {
        rng::CounterRng g(rng::derive_seed(seed, static_cast<std::uint64_t>(i)));
        auto image = ball_translation(ball, radius, static_cast<std::uint8_t>(2 * i));
        u.defects[static_cast<std::size_t>(i)] = complete_permutation(image, g);
        u.images[static_cast<std::size_t>(i)] = std::move(image);
    }
    u.rep = UnitaryRep(permutation_operator(u.images[0]), permutation_operator(u.images[1]));
    return u;
}

inline nlohmann::ordered_json defects_to_json(const UnitarizedRegular& u) {
    const std::vector<Word> ball = ball_enumerate(u.radius);
    nlohmann::ordered_json j;
    j["radius"] = u.radius;
    j["seed"] = u.seed;
    auto gens = nlohmann::ordered_json::array();
    for (int i = 0; i < 2; ++i) {
        auto pairs = nlohmann::ordered_json::array();
        for (const auto& [s, t] : u.defects[static_cast<std::size_t>(i)]) {
            pairs.push_back({{"source", ball[static_cast<std::size_t>(s)].to_string()},
                             {"target", ball[static_cast<std::size_t>(t)].to_string()},
                             {"source_index", s},
                             {"target_index", t}});
        }
        gens.push_back({{"generator", i + 1}, {"matching", pairs}});
    }
    j["generators"] = gens;
    return j;
}

/// Top eigenvalue of the levels x levels radial matrix of g1+g1^-1+g2+g2^-1 (off-diagonal 2,
/// then sqrt(3)), divided by 4. Computed by Sturm-sequence bisection.
inline double radial_oracle(std::size_t levels) {
    if (levels < 2) throw std::invalid_argument("radial_oracle: need at least two levels");
    auto count_below = [&](double x) {
        // Number of eigenvalues < x from the LDL^T pivots of T - x I.
        std::size_t count = 0;
        double d = -x;
        if (d < 0) ++count;
        for (std::size_t i = 1; i < levels; ++i) {
            const double b2 = (i == 1) ? 4.0 : 3.0;
            if (d == 0.0) d = -1e-300;
            d = -x - b2 / d;
            if (d < 0) ++count;
        }
        return count;
    };
    double lo = 0.0;
    double hi = 2.0 + 2.0 * std::sqrt(3.0);
    for (int it = 0; it < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (count_below(mid) == levels) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return 0.5 * (lo + hi) / 4.0;
}

}  // namespace fnlab
