/**
 * @file words.hpp
 * @brief Reduced words in the free group and its complex group ring.
 *
 * A Word is stored as a packed sequence of letter codes. The code of the
 * letter g_i^{+1} is 2(i-1), the code of g_i^{-1} is 2(i-1)+1, so the inverse
 * of a letter is obtained by flipping the lowest bit. Words order
 * length-major, then lexicographically by code ("shortlex"); the ball
 * enumeration and every operator indexed by the ball rely on this order.
 */
#pragma once

#include <algorithm>
#include <compare>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace fnlab {

using cplx = std::complex<double>;

/// Raised when a construction would exceed a configured size cap.
class ResourceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Letter {
    int generator = 1;  ///< 1-based generator index
    int sign = 1;       ///< +1 or -1

    [[nodiscard]] constexpr std::uint8_t code() const noexcept {
        return static_cast<std::uint8_t>(2 * (generator - 1) + (sign < 0 ? 1 : 0));
    }
    [[nodiscard]] static constexpr Letter from_code(std::uint8_t c) noexcept {
        return Letter{c / 2 + 1, (c & 1U) ? -1 : 1};
    }
    [[nodiscard]] constexpr Letter inverse() const noexcept { return Letter{generator, -sign}; }
    friend constexpr bool operator==(Letter, Letter) = default;
};

inline constexpr std::uint8_t inverse_code(std::uint8_t c) noexcept { return c ^ 1U; }

class Word {
public:
    Word() = default;

    /// Freely reduces an arbitrary letter sequence.
    static Word from_letters(const std::vector<Letter>& letters) {
        Word w;
        for (const Letter& l : letters) {
            if (l.generator < 1 || l.generator > 127 || (l.sign != 1 && l.sign != -1)) {
                throw std::invalid_argument("invalid letter");
            }
            w.push_reduced(l.code());
        }
        return w;
    }

    static Word generator(int index, int sign = 1) { return from_letters({Letter{index, sign}}); }

    /// Parses the signed-letter form "1 -2 1"; the empty string is the identity.
    static Word parse(std::string_view text) {
        std::istringstream in{std::string(text)};
        std::vector<Letter> letters;
        long v = 0;
        while (in >> v) {
            if (v == 0 || v > 127 || v < -127) {
                throw std::invalid_argument("invalid letter '" + std::to_string(v) + "' in word");
            }
            letters.push_back(Letter{static_cast<int>(v < 0 ? -v : v), v < 0 ? -1 : 1});
        }
        if (!in.eof()) {
            throw std::invalid_argument("malformed word '" + std::string(text) + "'");
        }
        return from_letters(letters);
    }

    [[nodiscard]] std::size_t length() const noexcept { return codes_.size(); }
    [[nodiscard]] bool is_identity() const noexcept { return codes_.empty(); }
    [[nodiscard]] const std::vector<std::uint8_t>& codes() const noexcept { return codes_; }
    [[nodiscard]] Letter letter(std::size_t i) const { return Letter::from_code(codes_.at(i)); }

    [[nodiscard]] int max_generator() const noexcept {
        int g = 0;
        for (auto c : codes_) g = std::max(g, c / 2 + 1);
        return g;
    }

    [[nodiscard]] bool is_reduced() const noexcept {
        for (std::size_t i = 1; i < codes_.size(); ++i) {
            if (codes_[i] == inverse_code(codes_[i - 1])) return false;
        }
        return true;
    }

    [[nodiscard]] std::string to_string() const {
        std::string s;
        for (std::size_t i = 0; i < codes_.size(); ++i) {
            if (i) s += ' ';
            const Letter l = Letter::from_code(codes_[i]);
            s += std::to_string(l.sign * l.generator);
        }
        return s;
    }

    friend bool operator==(const Word&, const Word&) = default;
    friend std::strong_ordering operator<=>(const Word& a, const Word& b) {
        if (auto c = a.codes_.size() <=> b.codes_.size(); c != 0) return c;
        return a.codes_ <=> b.codes_;
    }

    friend Word word_mul(const Word& a, const Word& b) {
        Word w = a;
        for (auto c : b.codes_) w.push_reduced(c);
        return w;
    }

    friend Word word_inv(const Word& a) {
        Word w;
        w.codes_.reserve(a.codes_.size());
        for (auto it = a.codes_.rbegin(); it != a.codes_.rend(); ++it) w.codes_.push_back(inverse_code(*it));
        return w;
    }

private:
    void push_reduced(std::uint8_t c) {
        if (!codes_.empty() && codes_.back() == inverse_code(c)) {
            codes_.pop_back();
        } else {
            codes_.push_back(c);
        }
    }

    std::vector<std::uint8_t> codes_;
};

inline Word operator*(const Word& a, const Word& b) { return word_mul(a, b); }

// ---------------------------------------------------------------------------
// Balls in the Cayley graph of F_2

inline constexpr std::size_t default_ball_cap = 4'000'000;

/// |B_R| = 2*3^R - 1 for the free group on two generators.
inline std::size_t ball_size(int radius) {
    if (radius < 0) throw std::invalid_argument("radius must be nonnegative");
    std::size_t p = 1;
    for (int i = 0; i < radius; ++i) {
        if (p > (std::numeric_limits<std::size_t>::max() / 3)) throw ResourceError("ball size overflow");
        p *= 3;
    }
    return 2 * p - 1;
}

/// Position of a reduced F_2 word in ball_enumerate order.
inline std::size_t ball_index(const Word& w) {
    const auto& c = w.codes();
    const std::size_t n = c.size();
    if (n == 0) return 0;
    std::size_t rank = 0;
    for (std::size_t j = 0; j < n; ++j) {
        if (c[j] > 3) throw std::invalid_argument("ball_index: word uses a generator beyond g2");
        std::size_t r = c[j];
        if (j > 0) {
            const std::uint8_t forbidden = inverse_code(c[j - 1]);
            if (c[j] > forbidden) --r;
            rank = rank * 3 + r;
        } else {
            rank = r;
        }
    }
    return ball_size(static_cast<int>(n) - 1) + rank;
}

/// All reduced words of length <= radius, shortlex order.
inline std::vector<Word> ball_enumerate(int radius, std::size_t cap = default_ball_cap) {
    const std::size_t size = ball_size(radius);
    if (size > cap) {
        throw ResourceError("ball of radius " + std::to_string(radius) + " has " + std::to_string(size) +
                            " words, above the cap " + std::to_string(cap));
    }
    std::vector<Word> ball;
    ball.reserve(size);
    ball.emplace_back();
    std::size_t sphere_begin = 0;
    for (int r = 1; r <= radius; ++r) {
        const std::size_t sphere_end = ball.size();
        for (std::size_t i = sphere_begin; i < sphere_end; ++i) {
            const Word base = ball[i];
            for (std::uint8_t c = 0; c < 4; ++c) {
                if (!base.is_identity() && c == inverse_code(base.codes().back())) continue;
                ball.push_back(word_mul(base, Word::generator(c / 2 + 1, (c & 1U) ? -1 : 1)));
            }
        }
        sphere_begin = sphere_end;
    }
    return ball;
}

// ---------------------------------------------------------------------------
// Group ring

class RingElement {
public:
    using Terms = std::map<Word, cplx>;

    RingElement() = default;

    static RingElement delta(const Word& w, cplx coefficient = 1.0) {
        RingElement x;
        x.add(w, coefficient);
        return x;
    }
    static RingElement identity() { return delta(Word{}); }

    RingElement& add(const Word& w, cplx coefficient) {
        auto [it, inserted] = terms_.try_emplace(w, coefficient);
        if (!inserted) it->second += coefficient;
        if (it->second == cplx{0.0, 0.0}) terms_.erase(it);
        return *this;
    }

    [[nodiscard]] const Terms& terms() const noexcept { return terms_; }
    [[nodiscard]] std::size_t support_size() const noexcept { return terms_.size(); }
    [[nodiscard]] bool is_zero() const noexcept { return terms_.empty(); }

    [[nodiscard]] cplx coefficient(const Word& w) const {
        auto it = terms_.find(w);
        return it == terms_.end() ? cplx{} : it->second;
    }

    /// Image under the trivial representation.
    [[nodiscard]] cplx coefficient_sum() const {
        cplx s{};
        for (const auto& [w, a] : terms_) s += a;
        return s;
    }

    /// sum |alpha_w|, which bounds the norm under every unitary representation.
    [[nodiscard]] double l1_norm() const {
        double s = 0.0;
        for (const auto& [w, a] : terms_) s += std::abs(a);
        return s;
    }

    [[nodiscard]] std::size_t max_length() const noexcept {
        std::size_t n = 0;
        for (const auto& [w, a] : terms_) n = std::max(n, w.length());
        return n;
    }

    [[nodiscard]] int max_generator() const noexcept {
        int g = 0;
        for (const auto& [w, a] : terms_) g = std::max(g, w.max_generator());
        return g;
    }

    friend RingElement operator+(const RingElement& x, const RingElement& y) {
        RingElement z = x;
        for (const auto& [w, a] : y.terms_) z.add(w, a);
        return z;
    }

    friend RingElement operator*(cplx c, const RingElement& x) {
        RingElement z;
        if (c == cplx{}) return z;
        for (const auto& [w, a] : x.terms_) z.add(w, c * a);
        return z;
    }

    friend RingElement ring_mul(const RingElement& x, const RingElement& y) {
        RingElement z;
        for (const auto& [u, a] : x.terms_) {
            for (const auto& [v, b] : y.terms_) z.add(word_mul(u, v), a * b);
        }
        return z;
    }
    friend RingElement operator*(const RingElement& x, const RingElement& y) { return ring_mul(x, y); }

    friend RingElement ring_star(const RingElement& x) {
        RingElement z;
        for (const auto& [w, a] : x.terms_) z.add(word_inv(w), std::conj(a));
        return z;
    }

    friend bool operator==(const RingElement&, const RingElement&) = default;

private:
    Terms terms_;
};

/// (1/2k) * sum_i (g_i + g_i^{-1}).
inline RingElement kesten_element(int k = 2) {
    if (k < 1) throw std::invalid_argument("kesten_element: k must be positive");
    RingElement a;
    const double c = 1.0 / (2.0 * k);
    for (int i = 1; i <= k; ++i) {
        a.add(Word::generator(i, 1), c);
        a.add(Word::generator(i, -1), c);
    }
    return a;
}

// ---------------------------------------------------------------------------
// JSON: list of {word, re, im}

inline nlohmann::ordered_json to_json(const RingElement& x) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& [w, a] : x.terms()) {
        arr.push_back({{"word", w.to_string()}, {"re", a.real()}, {"im", a.imag()}});
    }
    return arr;
}

inline RingElement ring_element_from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw std::invalid_argument("ring element JSON must be an array");
    RingElement x;
    for (const auto& t : j) {
        x.add(Word::parse(t.at("word").get<std::string>()),
              cplx{t.at("re").get<double>(), t.value("im", 0.0)});
    }
    return x;
}

}  // namespace fnlab
