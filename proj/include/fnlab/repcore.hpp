/**
 * @file repcore.hpp
 * @brief Unitary representations of F_2 given by generator images, and their
 *        combinators (direct sum, tensor product, contragredient).
 *
 * Since F_2 is free, any pair of unitaries defines a representation. Ring
 * elements are evaluated matrix-free: a word costs one generator matvec per
 * letter.
 */
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "fnlab/linear_operator.hpp"
#include "fnlab/rng.hpp"
#include "fnlab/words.hpp"

namespace fnlab {

/// Dimensions above this are refused by tensor products and diagonal evaluations.
inline constexpr Index default_tensor_cap = 20'000'000;

class UnitaryRep {
public:
    UnitaryRep() = default;
    UnitaryRep(LinearOperator g1, LinearOperator g2, std::vector<UnitaryRep> blocks = {})
        : gens_{std::move(g1), std::move(g2)}, blocks_(std::move(blocks)) {
        if (!gens_[0].valid() || !gens_[1].valid()) throw std::invalid_argument("UnitaryRep: missing generator image");
        if (gens_[0].dim() != gens_[1].dim()) throw std::invalid_argument("UnitaryRep: generator dimensions differ");
    }

    static UnitaryRep from_matrices(Matrix u1, Matrix u2) {
        return {dense_operator(std::move(u1)), dense_operator(std::move(u2))};
    }

    [[nodiscard]] Index dim() const noexcept { return gens_[0].dim(); }
    /// Image of g_i, i in {1, 2}.
    [[nodiscard]] const LinearOperator& generator(int i) const { return gens_.at(static_cast<std::size_t>(i - 1)); }
    [[nodiscard]] const std::array<LinearOperator, 2>& generators() const noexcept { return gens_; }
    /// Summands when the representation was built by direct_sum; empty otherwise.
    [[nodiscard]] const std::vector<UnitaryRep>& blocks() const noexcept { return blocks_; }

private:
    std::array<LinearOperator, 2> gens_;
    std::vector<UnitaryRep> blocks_;
};

inline UnitaryRep trivial_rep() {
    return UnitaryRep::from_matrices(Matrix::Identity(1, 1), Matrix::Identity(1, 1));
}

inline LinearOperator rep_eval(const UnitaryRep& rep, const RingElement& a) {
    if (a.max_generator() > 2) throw std::invalid_argument("rep_eval: element uses a generator beyond g2");
    std::vector<LinCombForm::Term> terms;
    terms.reserve(a.support_size());
    for (const auto& [w, c] : a.terms()) terms.emplace_back(c, w);
    if (terms.empty()) terms.emplace_back(cplx{0.0, 0.0}, Word{});
    return lin_comb(rep.generators(), std::move(terms));
}

/// rep_eval factored over the summands of a direct sum, as a BlockDiag operator.
inline LinearOperator rep_eval_blockwise(const UnitaryRep& rep, const RingElement& a) {
    if (rep.blocks().empty()) return block_diag({rep_eval(rep, a)});
    std::vector<LinearOperator> blocks;
    blocks.reserve(rep.blocks().size());
    for (const auto& b : rep.blocks()) blocks.push_back(rep_eval(b, a));
    return block_diag(std::move(blocks));
}

inline UnitaryRep direct_sum(std::vector<UnitaryRep> reps) {
    if (reps.empty()) throw std::invalid_argument("direct_sum: no summands");
    std::vector<LinearOperator> g1;
    std::vector<LinearOperator> g2;
    for (const auto& r : reps) {
        g1.push_back(r.generator(1));
        g2.push_back(r.generator(2));
    }
    return {block_diag(std::move(g1)), block_diag(std::move(g2)), std::move(reps)};
}

enum class TensorStorage { matrix_free, dense };

inline UnitaryRep tensor(const UnitaryRep& a, const UnitaryRep& b, TensorStorage storage = TensorStorage::matrix_free,
                         Index cap = default_tensor_cap) {
    if (a.dim() > 0 && b.dim() > cap / a.dim()) {
        throw ResourceError("tensor: dimension " + std::to_string(a.dim()) + " x " + std::to_string(b.dim()) +
                            " exceeds the cap " + std::to_string(cap));
    }
    if (storage == TensorStorage::dense) {
        const Index n = a.dim() * b.dim();
        if (n > dense_threshold) {
            throw ResourceError("tensor: dense storage requested above the dense threshold");
        }
        std::array<Matrix, 2> u;
        for (int i = 0; i < 2; ++i) {
            const Matrix ua = to_dense(a.generators()[static_cast<std::size_t>(i)]);
            const Matrix ub = to_dense(b.generators()[static_cast<std::size_t>(i)]);
            Matrix k(n, n);
            for (Index r = 0; r < ua.rows(); ++r) {
                for (Index c = 0; c < ua.cols(); ++c) {
                    k.block(r * ub.rows(), c * ub.cols(), ub.rows(), ub.cols()) = ua(r, c) * ub;
                }
            }
            u[static_cast<std::size_t>(i)] = std::move(k);
        }
        return UnitaryRep::from_matrices(std::move(u[0]), std::move(u[1]));
    }
    return {tensor_prod(a.generator(1), b.generator(1)), tensor_prod(a.generator(2), b.generator(2))};
}

inline UnitaryRep contragredient(const UnitaryRep& rep) {
    std::vector<UnitaryRep> blocks;
    blocks.reserve(rep.blocks().size());
    for (const auto& b : rep.blocks()) blocks.push_back(contragredient(b));
    return {rep.generator(1).conjugate(), rep.generator(2).conjugate(), std::move(blocks)};
}

/// (A (x) B)(Delta(a)) = sum_w alpha_w A(w) (x) B(w), built term by term.
inline LinearOperator eval_diag_tensor(const UnitaryRep& a, const UnitaryRep& b, const RingElement& x,
                                       Index cap = default_tensor_cap) {
    if (a.dim() > 0 && b.dim() > cap / a.dim()) {
        throw ResourceError("eval_diag_tensor: dimension exceeds the cap " + std::to_string(cap));
    }
    if (x.max_generator() > 2) throw std::invalid_argument("eval_diag_tensor: element uses a generator beyond g2");
    std::vector<SumForm::Term> terms;
    for (const auto& [w, c] : x.terms()) {
        const RingElement dw = RingElement::delta(w);
        terms.emplace_back(c, tensor_prod(rep_eval(a, dw), rep_eval(b, dw)));
    }
    if (terms.empty()) terms.emplace_back(cplx{}, tensor_prod(rep_eval(a, {}), rep_eval(b, {})));
    return operator_sum(std::move(terms));
}

struct UnitarityReport {
    double deviation = 0.0;  ///< max_i ||U_i^H U_i - I|| (dense) or its randomized estimate
    bool passed = false;
    bool dense = false;
};

inline UnitarityReport unitarity_check(const UnitaryRep& rep, double tol, std::uint64_t seed = 0, int probes = 4) {
    if (!(tol > 0.0)) throw std::invalid_argument("unitarity_check: tol must be positive");
    UnitarityReport report;
    const Index n = rep.dim();
    if (n <= dense_threshold) {
        report.dense = true;
        for (const auto& g : rep.generators()) {
            const Matrix u = to_dense(g);
            const Matrix d = u.adjoint() * u - Matrix::Identity(n, n);
            Eigen::SelfAdjointEigenSolver<Matrix> es(d, Eigen::EigenvaluesOnly);
            report.deviation = std::max(report.deviation, es.eigenvalues().cwiseAbs().maxCoeff());
        }
    } else {
        rng::CounterRng g(rng::derive_seed(seed, 0x756e6974ULL));
        for (const auto& u : rep.generators()) {
            for (int p = 0; p < probes; ++p) {
                Vector x(n);
                for (Index i = 0; i < n; ++i) x[i] = rng::complex_gaussian(g);
                x.normalize();
                const Vector y = u.apply_adjoint(u.apply(x));
                report.deviation = std::max(report.deviation, (y - x).norm());
            }
        }
    }
    report.passed = report.deviation <= tol;
    return report;
}

}  // namespace fnlab
