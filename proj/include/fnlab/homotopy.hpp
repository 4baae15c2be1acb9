/**
 * @file homotopy.hpp
 * @brief A truncated path of representations pi_s, s in [0, 1], from a
 *        regular-like endpoint pi_0 to pi_1 = theta (+) L (+) L, and the tower
 *        rho_t built from it and a Haar sequence sigma_k.
 *
 * Both endpoints are permutation representations on C (+) l2(B_R) (+) l2(B_R).
 * The path is the geodesic pi_s(g) = pi_0(g) exp(s K_g) with
 * K_g = Log(pi_0(g)^H pi_1(g)). Because pi_0(g)^H pi_1(g) is a permutation, its
 * principal logarithm splits over the cycles of the permutation: on a cycle of
 * length m it is the circulant with eigenvalues i*theta_k, theta_k = -2 pi k / m
 * wrapped into (-pi, pi] (so an eigenvalue -1 gets angle +pi).
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "fnlab/linear_operator.hpp"
#include "fnlab/randreps.hpp"
#include "fnlab/regular.hpp"
#include "fnlab/repcore.hpp"
#include "fnlab/rng.hpp"

namespace fnlab {

struct Endpoints {
    int radius = 0;
    std::uint64_t seed = 0;
    Index space_dim = 0;  ///< 1 + 2 |B_R|; basis vector 0 carries theta
    std::array<std::vector<Index>, 2> pi0_images;
    std::array<std::vector<Index>, 2> pi1_images;
    /// columns of pi_0(g_i) that were re-matched (differ from blockwise translation)
    std::array<std::vector<std::pair<Index, Index>>, 2> pi0_defects;
    UnitarizedRegular regular;
    UnitaryRep pi0;
    UnitaryRep pi1;
};

inline Endpoints build_endpoints(int radius, std::uint64_t seed) {
    if (radius < 1) throw std::invalid_argument("build_endpoints: radius must be at least 1");
    Endpoints e;
    e.radius = radius;
    e.seed = seed;
    const std::vector<Word> ball = ball_enumerate(radius);
    const auto b = static_cast<Index>(ball.size());
    e.space_dim = 1 + 2 * b;
    e.regular = unitarized_regular(radius, rng::derive_seed(seed, 0x4c));
    for (std::size_t i = 0; i < 2; ++i) {
        const auto trans = ball_translation(ball, radius, static_cast<std::uint8_t>(2 * i));
        std::vector<Index> image0(static_cast<std::size_t>(e.space_dim), -1);
        std::vector<Index> image1(static_cast<std::size_t>(e.space_dim), -1);
        image1[0] = 0;
        for (Index copy = 0; copy < 2; ++copy) {
            const Index off = 1 + copy * b;
            for (Index j = 0; j < b; ++j) {
                const Index t = trans[static_cast<std::size_t>(j)];
                if (t >= 0) image0[static_cast<std::size_t>(off + j)] = off + t;
                image1[static_cast<std::size_t>(off + j)] = off + e.regular.images[i][static_cast<std::size_t>(j)];
            }
        }
        rng::CounterRng g(rng::derive_seed(seed, 0x7030 + i));
        e.pi0_defects[i] = complete_permutation(image0, g);
        e.pi0_images[i] = std::move(image0);
        e.pi1_images[i] = std::move(image1);
    }
    e.pi0 = UnitaryRep(permutation_operator(e.pi0_images[0]), permutation_operator(e.pi0_images[1]));
    e.pi1 = UnitaryRep(permutation_operator(e.pi1_images[0]), permutation_operator(e.pi1_images[1]));
    return e;
}

/// Cycle decomposition of a permutation P (P e_j = e_{perm[j]}) and its principal logarithm.
struct CycleLog {
    Index dim = 0;
    /// nontrivial cycles (length >= 2), each listed as c_0, c_1 = perm[c_0], ...
    std::vector<std::vector<Index>> cycles;

    static CycleLog from_permutation(const std::vector<Index>& perm) {
        CycleLog c;
        c.dim = static_cast<Index>(perm.size());
        std::vector<char> seen(perm.size(), 0);
        for (std::size_t j = 0; j < perm.size(); ++j) {
            if (seen[j]) continue;
            std::vector<Index> cyc;
            for (auto k = static_cast<Index>(j); !seen[static_cast<std::size_t>(k)]; k = perm[static_cast<std::size_t>(k)]) {
                seen[static_cast<std::size_t>(k)] = 1;
                cyc.push_back(k);
            }
            if (cyc.size() >= 2) c.cycles.push_back(std::move(cyc));
        }
        return c;
    }

    /// Principal angles of a length-m cycle: theta_k = -2 pi k / m in (-pi, pi].
    static std::vector<double> angles(Index m) {
        std::vector<double> th(static_cast<std::size_t>(m));
        for (Index k = 0; k < m; ++k) {
            double t = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(m);
            if (t <= -std::numbers::pi) t += 2.0 * std::numbers::pi;
            th[static_cast<std::size_t>(k)] = t;
        }
        return th;
    }

    /// Circulant f(S) on a length-m cycle, where f acts on the eigenvalue exp(i theta_k) of the shift.
    template <class F>
    static Matrix cycle_function(Index m, F&& f) {
        const auto th = angles(m);
        std::vector<cplx> omega(static_cast<std::size_t>(m));
        for (Index r = 0; r < m; ++r) {
            omega[static_cast<std::size_t>(r)] =
                std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(r) / static_cast<double>(m));
        }
        std::vector<cplx> col(static_cast<std::size_t>(m));
        for (Index d = 0; d < m; ++d) {
            cplx acc{};
            for (Index k = 0; k < m; ++k) acc += f(th[static_cast<std::size_t>(k)]) * omega[static_cast<std::size_t>((d * k) % m)];
            col[static_cast<std::size_t>(d)] = acc / static_cast<double>(m);
        }
        Matrix c(m, m);
        for (Index j = 0; j < m; ++j) {
            for (Index l = 0; l < m; ++l) c(j, l) = col[static_cast<std::size_t>(((j - l) % m + m) % m)];
        }
        return c;
    }

    /// exp(s K) as a matrix-free operator.
    [[nodiscard]] LinearOperator exp_operator(double s) const {
        std::vector<Matrix> blocks;
        blocks.reserve(cycles.size());
        for (const auto& cyc : cycles) {
            blocks.push_back(cycle_function(static_cast<Index>(cyc.size()), [s](double th) { return std::polar(1.0, s * th); }));
        }
        return LinearOperator(std::make_shared<CyclePhaseForm>(dim, cycles, std::move(blocks)));
    }

    /// The skew-Hermitian logarithm K itself.
    [[nodiscard]] LinearOperator log_operator() const {
        std::vector<Matrix> blocks;
        blocks.reserve(cycles.size());
        for (const auto& cyc : cycles) {
            blocks.push_back(cycle_function(static_cast<Index>(cyc.size()), [](double th) { return cplx{0.0, th}; }));
        }
        return LinearOperator(std::make_shared<CyclePhaseForm>(dim, cycles, std::move(blocks), 0.0));
    }

    /// ||exp(s2 K) - exp(s1 K)|| = max_k |exp(i s2 theta_k) - exp(i s1 theta_k)|, exactly.
    [[nodiscard]] double exp_distance(double s1, double s2) const {
        double d = 0.0;
        for (const auto& cyc : cycles) {
            for (double th : angles(static_cast<Index>(cyc.size()))) {
                d = std::max(d, 2.0 * std::abs(std::sin(0.5 * (s2 - s1) * th)));
            }
        }
        return d;
    }

    /// rank(exp(sK) - I) for s in (0, 1]: each cycle loses its invariant (constant) vector.
    [[nodiscard]] Index moved_rank() const {
        Index r = 0;
        for (const auto& cyc : cycles) r += static_cast<Index>(cyc.size()) - 1;
        return r;
    }

    [[nodiscard]] Index support() const {
        Index r = 0;
        for (const auto& cyc : cycles) r += static_cast<Index>(cyc.size());
        return r;
    }
};

class PiFamily {
public:
    explicit PiFamily(Endpoints endpoints) : endpoints_(std::move(endpoints)) {
        for (std::size_t i = 0; i < 2; ++i) {
            const auto& p0 = endpoints_.pi0_images[i];
            const auto& p1 = endpoints_.pi1_images[i];
            std::vector<Index> p0inv(p0.size());
            for (std::size_t j = 0; j < p0.size(); ++j) p0inv[static_cast<std::size_t>(p0[j])] = static_cast<Index>(j);
            std::vector<Index> rel(p0.size());
            for (std::size_t j = 0; j < p0.size(); ++j) rel[j] = p0inv[static_cast<std::size_t>(p1[j])];
            logs_[i] = CycleLog::from_permutation(rel);
        }
    }

    [[nodiscard]] const Endpoints& endpoints() const noexcept { return endpoints_; }
    [[nodiscard]] Index dim() const noexcept { return endpoints_.space_dim; }
    /// Logarithm data of pi_0(g_i)^H pi_1(g_i), i in {1, 2}.
    [[nodiscard]] const CycleLog& log(int i) const { return logs_.at(static_cast<std::size_t>(i - 1)); }

    /// exp(s K_i).
    [[nodiscard]] LinearOperator geodesic_factor(int i, double s) const { return log(i).exp_operator(s); }

    /// ||pi_{s2}(g_i) - pi_{s1}(g_i)||, exact from the spectrum of K_i.
    [[nodiscard]] double generator_distance(int i, double s1, double s2) const { return log(i).exp_distance(s1, s2); }

private:
    Endpoints endpoints_;
    std::array<CycleLog, 2> logs_;
};

/// pi_s(g_i) = pi_0(g_i) exp(s K_i); the endpoints are returned exactly at s = 0 and s = 1.
inline UnitaryRep pi_s(const PiFamily& family, double s) {
    if (!(s >= 0.0 && s <= 1.0)) throw std::domain_error("pi_s: s must lie in [0, 1]");
    if (s == 0.0) return family.endpoints().pi0;
    if (s == 1.0) return family.endpoints().pi1;
    const auto& p0 = family.endpoints().pi0;
    return {compose({p0.generator(1), family.geodesic_factor(1, s)}), compose({p0.generator(2), family.geodesic_factor(2, s)})};
}

// ---------------------------------------------------------------------------
// The tower rho_t

struct TowerConfig {
    int radius = 3;
    std::vector<Index> dims{8, 12, 16, 20, 24};
    std::uint64_t seed = 0;

    [[nodiscard]] std::size_t blocks() const noexcept { return dims.size(); }
    [[nodiscard]] double t_max() const noexcept { return static_cast<double>(dims.size()) - 1.0; }

    void validate() const {
        if (radius < 1) throw std::invalid_argument("tower: radius must be at least 1");
        if (dims.size() < 2) throw std::invalid_argument("tower: need at least two blocks");
        for (Index d : dims) {
            if (d < 1) throw std::invalid_argument("tower: block dimensions must be positive");
        }
    }
};

enum class BlockKind { prefix, moving, tail };

inline const char* to_string(BlockKind k) {
    switch (k) {
        case BlockKind::prefix: return "prefix";
        case BlockKind::moving: return "moving";
        case BlockKind::tail: return "tail";
    }
    return "?";
}

struct BlockSpec {
    std::size_t index = 0;  ///< 0-based block index k; the block is pi_s (x) sigma_{k+1}
    BlockKind kind = BlockKind::tail;
    double s = 1.0;
    friend bool operator==(const BlockSpec&, const BlockSpec&) = default;
};

/// Which interval formula to use at an integer t.
enum class Side { left, right };

class Tower {
public:
    explicit Tower(TowerConfig config, int threads = 1)
        : config_((config.validate(), std::move(config))),
          family_(build_endpoints(config_.radius, rng::derive_seed(config_.seed, 0x7069))),
          sigma_(sigma_sequence(config_.dims, rng::derive_seed(config_.seed, 0x7369), threads)) {
        for (std::size_t k = 0; k < config_.blocks(); ++k) {
            prefix_.push_back(tensor(family_.endpoints().pi0, sigma_.reps[k]));
            tail_.push_back(tensor(family_.endpoints().pi1, sigma_.reps[k]));
        }
    }

    [[nodiscard]] const TowerConfig& config() const noexcept { return config_; }
    [[nodiscard]] const PiFamily& family() const noexcept { return family_; }
    [[nodiscard]] const SigmaSequence& sigma() const noexcept { return sigma_; }
    [[nodiscard]] double t_max() const noexcept { return config_.t_max(); }

    /// Block schedule of rho_t: for t in [n, n+1], blocks k < n are pi_0 (x) sigma, block n moves
    /// with s = n + 1 - t, blocks k > n are pi_1 (x) sigma.
    [[nodiscard]] std::vector<BlockSpec> schedule(double t, Side side = Side::right) const {
        if (!(t >= 0.0 && t <= t_max())) {
            throw std::domain_error("rho_t: t = " + std::to_string(t) + " outside [0, " + std::to_string(t_max()) + "]");
        }
        auto n = static_cast<std::size_t>(std::floor(t));
        const bool integer = static_cast<double>(n) == t;
        if (integer && n > 0 && (side == Side::left || n + 1 >= config_.blocks())) --n;
        std::vector<BlockSpec> blocks(config_.blocks());
        for (std::size_t k = 0; k < blocks.size(); ++k) {
            blocks[k].index = k;
            if (k < n) {
                blocks[k].kind = BlockKind::prefix;
                blocks[k].s = 0.0;
            } else if (k == n) {
                blocks[k].kind = BlockKind::moving;
                blocks[k].s = static_cast<double>(n) + 1.0 - t;
            } else {
                blocks[k].kind = BlockKind::tail;
                blocks[k].s = 1.0;
            }
        }
        return blocks;
    }

    /// pi_s (x) sigma_{k+1}; endpoint blocks are shared objects.
    [[nodiscard]] UnitaryRep block_rep(std::size_t k, double s) const {
        if (s == 0.0) return prefix_.at(k);
        if (s == 1.0) return tail_.at(k);
        return tensor(pi_s(family_, s), sigma_.reps.at(k));
    }

    /// (pi_s (x) sigma_{k+1})(a). At s = 1 the block is returned in its direct-sum shape
    /// sigma(a) (+) (L (x) sigma)(a) (+) (L (x) sigma)(a), the same operator in the same basis,
    /// with the two equal summands sharing one node.
    [[nodiscard]] LinearOperator block_eval(std::size_t k, double s, const RingElement& a) const {
        if (s != 1.0) return rep_eval(block_rep(k, s), a);
        const UnitaryRep& sigma = sigma_.reps.at(k);
        const LinearOperator lower = rep_eval(tensor(family_.endpoints().regular.rep, sigma), a);
        return block_diag({rep_eval(sigma, a), lower, lower});
    }

    /// rho_t(a) as a BlockDiag over the tower blocks, each block from block_eval.
    [[nodiscard]] LinearOperator rho_eval(double t, const RingElement& a, Side side = Side::right) const {
        std::vector<LinearOperator> blocks;
        for (const auto& b : schedule(t, side)) blocks.push_back(block_eval(b.index, b.s, a));
        return block_diag(std::move(blocks));
    }

    [[nodiscard]] UnitaryRep rho_t(double t, Side side = Side::right) const {
        std::vector<UnitaryRep> blocks;
        for (const auto& b : schedule(t, side)) blocks.push_back(block_rep(b.index, b.s));
        return direct_sum(std::move(blocks));
    }

    [[nodiscard]] Index block_dim(std::size_t k) const { return family_.dim() * config_.dims.at(k); }
    [[nodiscard]] Index total_dim() const {
        Index n = 0;
        for (std::size_t k = 0; k < config_.blocks(); ++k) n += block_dim(k);
        return n;
    }

private:
    TowerConfig config_;
    PiFamily family_;
    SigmaSequence sigma_;
    std::vector<UnitaryRep> prefix_;
    std::vector<UnitaryRep> tail_;
};

inline nlohmann::ordered_json schedule_to_json(const std::vector<BlockSpec>& schedule, double t) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& b : schedule) {
        arr.push_back({{"block", b.index + 1}, {"kind", to_string(b.kind)}, {"s", b.s}});
    }
    return {{"t", t}, {"blocks", arr}};
}

}  // namespace fnlab
