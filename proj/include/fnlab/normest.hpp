/**
 * @file normest.hpp
 * @brief Operator norms of matrix-free operators.
 *
 * The norm is the square root of the top eigenvalue of A^H A, found by
 * Lanczos with full reorthogonalization (explicitly restarted from the best
 * Ritz vector once the Krylov cap is reached). Small operators go through a
 * dense Hermitian eigensolve instead. Every estimate carries a certified lower
 * bound ||A x|| for the returned unit vector x.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "fnlab/linear_operator.hpp"
#include "fnlab/parallel.hpp"
#include "fnlab/rng.hpp"

namespace fnlab {

enum class NormMethod { power, lanczos, dense };
enum class NormStrategy { automatic, power, lanczos, dense };

inline const char* to_string(NormMethod m) {
    switch (m) {
        case NormMethod::power: return "power";
        case NormMethod::lanczos: return "lanczos";
        case NormMethod::dense: return "dense";
    }
    return "?";
}

struct NormOptions {
    double tol = 1e-10;  ///< relative Ritz residual on A^H A
    int maxiter = 4000;  ///< cap on applications of A^H A
    std::uint64_t seed = 0;
    int krylov_cap = 400;
    Index dense_threshold = fnlab::dense_threshold;
    NormStrategy strategy = NormStrategy::automatic;
    bool keep_vector = false;  ///< return the unit Ritz vector in NormEstimate::vector
};

struct NormEstimate {
    double value = 0.0;
    NormMethod method = NormMethod::dense;
    int iterations = 0;
    double residual = 0.0;
    double certified_lower = 0.0;
    bool converged = false;
    /// Top Ritz value of A^H A at each convergence check (nondecreasing within a Krylov cycle).
    std::vector<double> ritz_history;
    /// Right singular vector estimate; empty unless NormOptions::keep_vector.
    Vector vector;
};

namespace detail {

inline Vector random_unit_vector(Index n, std::uint64_t seed) {
    rng::CounterRng g(rng::derive_seed(seed, 0x6c616e637a6f73ULL));
    Vector x(n);
    for (Index i = 0; i < n; ++i) x[i] = rng::complex_gaussian(g);
    return x.normalized();
}

inline double certify(const LinearOperator& op, const Vector& x) {
    const double nx = x.norm();
    if (nx == 0.0) return 0.0;
    return op.apply(x).norm() / nx;
}

inline NormEstimate dense_norm(const LinearOperator& op, bool keep_vector = false) {
    NormEstimate est;
    est.method = NormMethod::dense;
    est.converged = true;
    const Index n = op.dim();
    if (n == 0) return est;
    const Matrix a = to_dense(op, n);
    const Matrix h = a.adjoint() * a;
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    if (es.info() != Eigen::Success) throw std::runtime_error("dense_norm: eigensolver failed");
    const double top = std::max(es.eigenvalues()[n - 1], 0.0);
    const Vector v = es.eigenvectors().col(n - 1);
    est.certified_lower = (a * v).norm();
    est.value = std::max(std::sqrt(top), est.certified_lower);
    est.ritz_history.push_back(top);
    if (keep_vector) est.vector = v;
    return est;
}

inline NormEstimate power_norm(const LinearOperator& op, const NormOptions& opts, std::optional<Vector> start) {
    NormEstimate est;
    est.method = NormMethod::power;
    Vector x = start ? start->normalized() : random_unit_vector(op.dim(), opts.seed);
    double prev = 0.0;
    for (int it = 1; it <= opts.maxiter; ++it) {
        Vector w = op.apply_adjoint(op.apply(x));
        const double rq = x.dot(w).real();
        est.iterations = it;
        est.ritz_history.push_back(rq);
        est.residual = (w - rq * x).norm();
        const double nw = w.norm();
        if (nw == 0.0) {
            est.converged = true;
            break;
        }
        x = w / nw;
        if (std::abs(rq - prev) <= opts.tol * std::max(rq, std::numeric_limits<double>::min()) &&
            est.residual <= std::sqrt(opts.tol) * std::max(rq, 1e-300)) {
            est.converged = true;
            break;
        }
        prev = rq;
    }
    est.certified_lower = certify(op, x);
    est.value = std::max(std::sqrt(std::max(prev, 0.0)), est.certified_lower);
    if (opts.keep_vector) est.vector = std::move(x);
    return est;
}

inline NormEstimate lanczos_norm(const LinearOperator& op, const NormOptions& opts, std::optional<Vector> start) {
    NormEstimate est;
    est.method = NormMethod::lanczos;
    const Index n = op.dim();
    const Index kmax = std::max<Index>(1, std::min<Index>(opts.krylov_cap, n));
    Matrix basis(n, kmax);
    Vector x = start ? start->normalized() : random_unit_vector(n, opts.seed);
    Vector w(n);
    Vector tmp(n);
    double theta = 0.0;
    int matvecs = 0;

    while (true) {
        std::vector<double> alpha;
        std::vector<double> beta;
        basis.col(0) = x;
        Eigen::VectorXd ritz_vec;
        Index j = 0;
        bool stop = false;
        for (;; ++j) {
            op.apply(basis.col(j), tmp, false);
            op.apply(tmp, w, true);
            ++matvecs;
            const double a = basis.col(j).dot(w).real();
            w -= a * basis.col(j);
            if (j > 0) w -= beta.back() * basis.col(j - 1);
            // Classical Gram-Schmidt against the whole basis, repeated when it cancels too much.
            double b = w.norm();
            for (int pass = 0; pass < 3; ++pass) {
                const Vector h = basis.leftCols(j + 1).adjoint() * w;
                w.noalias() -= basis.leftCols(j + 1) * h;
                const double nb = w.norm();
                const bool enough = nb > 0.7071 * b;
                b = nb;
                if (enough) break;
            }
            alpha.push_back(a);
            beta.push_back(b);

            const bool last = (j + 1 == kmax) || matvecs >= opts.maxiter;
            const bool breakdown = b <= 1e-13 * std::max(std::abs(a), theta);
            if (j < 40 || j % 5 == 4 || last || breakdown) {
                const auto m = static_cast<Index>(alpha.size());
                Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(alpha.data(), m);
                Eigen::VectorXd sub = Eigen::Map<const Eigen::VectorXd>(beta.data(), m).head(m - 1);
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
                es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
                theta = std::max(es.eigenvalues()[m - 1], 0.0);
                ritz_vec = es.eigenvectors().col(m - 1);
                est.residual = b * std::abs(ritz_vec[m - 1]);
                est.ritz_history.push_back(theta);
                if (breakdown || est.residual <= opts.tol * std::max(theta, std::numeric_limits<double>::min())) {
                    est.converged = true;
                    stop = true;
                }
                if (last) stop = true;
            }
            if (stop) break;
            basis.col(j + 1) = w / b;
        }
        x = basis.leftCols(j + 1) * ritz_vec.cast<cplx>();
        x.normalize();
        if (est.converged || matvecs >= opts.maxiter) break;
    }
    est.iterations = matvecs;
    est.certified_lower = certify(op, x);
    est.value = std::max(std::sqrt(theta), est.certified_lower);
    if (opts.keep_vector) est.vector = std::move(x);
    return est;
}

}  // namespace detail

/// Raises an estimate with the lower bound ||A x|| / ||x|| of an explicit witness vector.
inline void certify_with(NormEstimate& est, const LinearOperator& op, const Vector& witness) {
    const double w = detail::certify(op, witness);
    est.certified_lower = std::max(est.certified_lower, w);
    est.value = std::max(est.value, est.certified_lower);
}

/// ||lambda(a)|| for the normalized symmetric generator sum in F_k.
inline double kesten_formula(int k) {
    if (k < 1) throw std::invalid_argument("kesten_formula: k must be positive");
    return std::sqrt(2.0 * k - 1.0) / k;
}

/// Largest singular value of op. In automatic mode a block-diagonal operator is handled
/// block by block; strategy lanczos forces one Krylov run over the whole space.
inline NormEstimate opnorm(const LinearOperator& op, const NormOptions& opts = {}, std::optional<Vector> start = {});

struct BlockNormTable {
    NormEstimate overall;
    std::vector<NormEstimate> blocks;
    std::size_t argmax = 0;
};

/// Norm of a block-diagonal operator as the max of its block norms.
/// witnesses[b], when present and nonempty, certifies block b from below.
inline BlockNormTable block_max_norm(const LinearOperator& op, const NormOptions& opts = {},
                                     const std::vector<Vector>& witnesses = {}, int threads = 1) {
    const auto* bd = op.as<BlockDiagForm>();
    if (!bd) throw std::invalid_argument("block_max_norm: operator is not block-diagonal");
    const auto& blocks = bd->blocks();
    BlockNormTable table;
    // Blocks that share a node are solved once, at the first occurrence.
    std::vector<std::size_t> first(blocks.size());
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        first[b] = b;
        for (std::size_t c = 0; c < b; ++c) {
            if (&blocks[c].node() == &blocks[b].node()) {
                first[b] = c;
                break;
            }
        }
    }
    table.blocks = parallel_map(blocks.size(), threads, [&](std::size_t b) {
        if (first[b] != b) return NormEstimate{};
        NormOptions o = opts;
        o.seed = rng::derive_seed(opts.seed, b);
        return opnorm(blocks[b], o);
    });
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        if (first[b] != b) table.blocks[b] = table.blocks[first[b]];
        if (b < witnesses.size() && witnesses[b].size() == blocks[b].dim()) certify_with(table.blocks[b], blocks[b], witnesses[b]);
    }
    for (std::size_t b = 0; b < table.blocks.size(); ++b) {
        if (table.blocks[b].value > table.blocks[table.argmax].value) table.argmax = b;
    }
    table.overall = table.blocks[table.argmax];
    if (opts.keep_vector) {
        // pad the winning block's vector out to the whole space
        Index off = 0;
        for (std::size_t b = 0; b < table.argmax; ++b) off += blocks[b].dim();
        Vector full = Vector::Zero(op.dim());
        full.segment(off, blocks[table.argmax].dim()) = table.overall.vector;
        table.overall.vector = std::move(full);
    }
    for (const auto& e : table.blocks) {
        table.overall.converged = table.overall.converged && e.converged;
    }
    return table;
}

/// Largest singular value of op.
inline NormEstimate opnorm(const LinearOperator& op, const NormOptions& opts, std::optional<Vector> start) {
    if (!(opts.tol > 0.0)) throw std::invalid_argument("opnorm: tol must be positive");
    if (op.dim() == 0) {
        NormEstimate empty;
        empty.converged = true;
        return empty;
    }
    if (start && start->size() != op.dim()) throw std::invalid_argument("opnorm: start vector has the wrong size");
    switch (opts.strategy) {
        case NormStrategy::dense: return detail::dense_norm(op, opts.keep_vector);
        case NormStrategy::power: return detail::power_norm(op, opts, std::move(start));
        case NormStrategy::lanczos: break;
        case NormStrategy::automatic:
            if (op.dim() <= opts.dense_threshold) return detail::dense_norm(op, opts.keep_vector);
            if (op.as<BlockDiagForm>() && !start) return block_max_norm(op, opts).overall;
            break;
    }
    return detail::lanczos_norm(op, opts, std::move(start));
}

}  // namespace fnlab
