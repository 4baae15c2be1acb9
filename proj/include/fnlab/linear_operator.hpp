/**
 * @file linear_operator.hpp
 * @brief Immutable matrix-free square operators.
 *
 * A LinearOperator is a shared handle to an immutable node. Nodes act on a
 * block of column vectors (dim x k, column-major) either directly or through
 * their adjoint. Evaluation is single-threaded with a fixed reduction order,
 * so repeated applications reproduce the same bits.
 */
#pragma once

#include <array>
#include <bit>
#include <complex>
#include <cstdint>
#include <istream>
#include <memory>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "fnlab/words.hpp"

namespace fnlab {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using MatrixCRef = Eigen::Ref<const Matrix, 0, Eigen::OuterStride<>>;
using MatrixRef = Eigen::Ref<Matrix, 0, Eigen::OuterStride<>>;
using SparseMatrix = Eigen::SparseMatrix<cplx, Eigen::RowMajor, Index>;

/// Matrices above this dimension are never materialized implicitly.
inline constexpr Index dense_threshold = 512;

enum class OperatorForm { dense, sparse_coords, block_diag, tensor_prod, lin_comb, sum, compose, cycle_phase };

inline const char* to_string(OperatorForm f) {
    switch (f) {
        case OperatorForm::dense: return "dense";
        case OperatorForm::sparse_coords: return "sparse_coords";
        case OperatorForm::block_diag: return "block_diag";
        case OperatorForm::tensor_prod: return "tensor_prod";
        case OperatorForm::lin_comb: return "lin_comb";
        case OperatorForm::sum: return "sum";
        case OperatorForm::compose: return "compose";
        case OperatorForm::cycle_phase: return "cycle_phase";
    }
    return "?";
}

class OperatorNode {
public:
    virtual ~OperatorNode() = default;
    [[nodiscard]] virtual Index dim() const noexcept = 0;
    [[nodiscard]] virtual OperatorForm form() const noexcept = 0;
    /// y = A x (or A^H x). x and y are dim x k and must not alias.
    virtual void apply(MatrixCRef x, MatrixRef y, bool adjoint) const = 0;
    /// Entrywise complex conjugate of the operator.
    [[nodiscard]] virtual std::shared_ptr<const OperatorNode> conjugate() const = 0;
};

class LinearOperator {
public:
    LinearOperator() = default;
    explicit LinearOperator(std::shared_ptr<const OperatorNode> node) : node_(std::move(node)) {
        if (!node_) throw std::invalid_argument("LinearOperator: null node");
    }

    [[nodiscard]] bool valid() const noexcept { return static_cast<bool>(node_); }
    [[nodiscard]] Index dim() const noexcept { return node_ ? node_->dim() : 0; }
    [[nodiscard]] OperatorForm form() const { return node().form(); }
    [[nodiscard]] const OperatorNode& node() const {
        if (!node_) throw std::logic_error("LinearOperator: empty handle");
        return *node_;
    }

    template <class Node>
    [[nodiscard]] const Node* as() const noexcept {
        return dynamic_cast<const Node*>(node_.get());
    }

    void apply(MatrixCRef x, MatrixRef y, bool adjoint = false) const {
        if (x.rows() != dim() || y.rows() != dim() || x.cols() != y.cols()) {
            throw std::invalid_argument("LinearOperator::apply: dimension mismatch");
        }
        node_->apply(x, y, adjoint);
    }

    [[nodiscard]] Vector apply(const Vector& x) const {
        Vector y(dim());
        apply(x, y, false);
        return y;
    }
    [[nodiscard]] Vector apply_adjoint(const Vector& x) const {
        Vector y(dim());
        apply(x, y, true);
        return y;
    }
    [[nodiscard]] Matrix apply_block(const Matrix& x, bool adjoint = false) const {
        Matrix y(dim(), x.cols());
        apply(x, y, adjoint);
        return y;
    }

    [[nodiscard]] LinearOperator conjugate() const { return LinearOperator(node().conjugate()); }

private:
    std::shared_ptr<const OperatorNode> node_;
};

// ---------------------------------------------------------------------------
// Forms

class DenseForm final : public OperatorNode {
public:
    explicit DenseForm(Matrix m) : m_(std::move(m)) {
        if (m_.rows() != m_.cols()) throw std::invalid_argument("DenseForm: matrix must be square");
    }
    Index dim() const noexcept override { return m_.rows(); }
    OperatorForm form() const noexcept override { return OperatorForm::dense; }
    void apply(MatrixCRef x, MatrixRef y, bool adjoint) const override {
        if (adjoint) {
            y.noalias() = m_.adjoint() * x;
        } else {
            y.noalias() = m_ * x;
        }
    }
    std::shared_ptr<const OperatorNode> conjugate() const override {
        return std::make_shared<DenseForm>(m_.conjugate());
    }
    [[nodiscard]] const Matrix& matrix() const noexcept { return m_; }

private:
    Matrix m_;
};

class SparseForm final : public OperatorNode {
public:
    explicit SparseForm(SparseMatrix a) : a_(std::move(a)) {
        if (a_.rows() != a_.cols()) throw std::invalid_argument("SparseForm: matrix must be square");
        a_.makeCompressed();
        ah_ = SparseMatrix(a_.adjoint());
        ah_.makeCompressed();
    }
    Index dim() const noexcept override { return a_.rows(); }
    OperatorForm form() const noexcept override { return OperatorForm::sparse_coords; }
    void apply(MatrixCRef x, MatrixRef y, bool adjoint) const override {
        const SparseMatrix& a = adjoint ? ah_ : a_;
        // Row-by-row accumulation; every column sees the same order.
        for (Index i = 0; i < a.outerSize(); ++i) {
            auto row = y.row(i);
            row.setZero();
            for (SparseMatrix::InnerIterator it(a, i); it; ++it) row += it.value() * x.row(it.index());
        }
    }
    std::shared_ptr<const OperatorNode> conjugate() const override {
        return std::make_shared<SparseForm>(SparseMatrix(a_.conjugate()));
    }
    [[nodiscard]] const SparseMatrix& matrix() const noexcept { return a_; }

private:
    SparseMatrix a_;
    SparseMatrix ah_;
};

class BlockDiagForm final : public OperatorNode {
public:
    explicit BlockDiagForm(std::vector<LinearOperator> blocks) : blocks_(std::move(blocks)) {
        if (blocks_.empty()) throw std::invalid_argument("BlockDiagForm: no blocks");
        offsets_.reserve(blocks_.size() + 1);
        offsets_.push_back(0);
        for (const auto& b : blocks_) offsets_.push_back(offsets_.back() + b.dim());
    }
    Index dim() const noexcept override { return offsets_.back(); }
    OperatorForm form() const noexcept override { return OperatorForm::block_diag; }
    void apply(MatrixCRef x, MatrixRef y, bool adjoint) const override {
        for (std::size_t b = 0; b < blocks_.size(); ++b) {
            const Index off = offsets_[b];
            const Index n = blocks_[b].dim();
            blocks_[b].apply(x.middleRows(off, n), y.middleRows(off, n), adjoint);
        }
    }
    std::shared_ptr<const OperatorNode> conjugate() const override {
        std::vector<LinearOperator> c;
        c.reserve(blocks_.size());
        for (const auto& b : blocks_) c.push_back(b.conjugate());
        return std::make_shared<BlockDiagForm>(std::move(c));
    }
    [[nodiscard]] const std::vector<LinearOperator>& blocks() const noexcept { return blocks_; }
    [[nodiscard]] Index offset(std::size_t b) const { return offsets_.at(b); }

private:
    std::vector<LinearOperator> blocks_;
    std::vector<Index> offsets_;
};

/// Kronecker product A (x) B on C^a (x) C^b; basis index i*b + j.
class TensorProdForm final : public OperatorNode {
public:
    TensorProdForm(LinearOperator a, LinearOperator b) : a_(std::move(a)), b_(std::move(b)) {}
    Index dim() const noexcept override { return a_.dim() * b_.dim(); }
    OperatorForm form() const noexcept override { return OperatorForm::tensor_prod; }
    void apply(MatrixCRef x, MatrixRef y, bool adjoint) const override {
        const Index na = a_.dim();
        const Index nb = b_.dim();
        Matrix z(nb, na);
        Matrix zt(na, nb);
        Matrix w(na, nb);
        for (Index c = 0; c < x.cols(); ++c) {
            // Column c reshaped to nb x na: X(j, i) = x[i*nb + j], so Y = B X A^T.
            Eigen::Map<const Matrix> xc(x.col(c).data(), nb, na);
            b_.apply(xc, z, adjoint);
            zt = z.transpose();
            a_.apply(zt, w, adjoint);
            Eigen::Map<Matrix> yc(y.col(c).data(), nb, na);
            yc = w.transpose();
        }
    }
    std::shared_ptr<const OperatorNode> conjugate() const override {
        return std::make_shared<TensorProdForm>(a_.conjugate(), b_.conjugate());
    }
    [[nodiscard]] const LinearOperator& left() const noexcept { return a_; }
    [[nodiscard]] const LinearOperator& right() const noexcept { return b_; }

private:
    LinearOperator a_;
    LinearOperator b_;
};

/// sum_w alpha_w U(w), each word evaluated as a chain of generator matvecs.
class LinCombForm final : public OperatorNode {
public:
    using Term = std::pair<cplx, Word>;

    LinCombForm(std::array<LinearOperator, 2> gens, std::vector<Term> terms)
        : gens_(std::move(gens)), terms_(std::move(terms)) {
        if (!gens_[0].valid() || !gens_[1].valid() || gens_[0].dim() != gens_[1].dim()) {
            throw std::invalid_argument("LinCombForm: generator images must share a dimension");
        }
        for (const auto& [c, w] : terms_) {
            if (w.max_generator() > 2) throw std::invalid_argument("LinCombForm: word uses a generator beyond g2");
        }
    }
    Index dim() const noexcept override { return gens_[0].dim(); }
    OperatorForm form() const noexcept override { return OperatorForm::lin_comb; }
    void apply(MatrixCRef x, MatrixRef y, bool adjoint) const override {
        y.setZero();
        Matrix cur(x.rows(), x.cols());
        Matrix nxt(x.rows(), x.cols());
        for (const auto& [coef, w] : terms_) {
            const auto& codes = w.codes();
            const std::size_t n = codes.size();
            if (n == 0) {
                y += (adjoint ? std::conj(coef) : coef) * x;
                continue;
            }
            // U(w) = U(l_0)...U(l_{n-1}); U(w)^H = U(l_{n-1})^H...U(l_0)^H.
            for (std::size_t step = 0; step < n; ++step) {
                const std::uint8_t c = adjoint ? codes[step] : codes[n - 1 - step];
                const bool inverse = (c & 1U) != 0;
                const LinearOperator& g = gens_[c / 2];
                if (step == 0) {
                    g.apply(x, cur, inverse != adjoint);
                } else {
                    g.apply(cur, nxt, inverse != adjoint);
                    cur.swap(nxt);
                }
            }
            y += (adjoint ? std::conj(coef) : coef) * cur;
        }
    }
    std::shared_ptr<const OperatorNode> conjugate() const override {
        std::vector<Term> t;
        t.reserve(terms_.size());
        for (const auto& [c, w] : terms_) t.emplace_back(std::conj(c), w);
        return std::make_shared<LinCombForm>(std::array{gens_[0].conjugate(), gens_[1].conjugate()}, std::move(t));
    }
    [[nodiscard]] const std::array<LinearOperator, 2>& generators() const noexcept { return gens_; }
    [[nodiscard]] const std::vector<Term>& terms() const noexcept { return terms_; }

private:
    std::array<LinearOperator, 2> gens_;
    std::vector<Term> terms_;
};

/// sum_j c_j A_j.
class SumForm final : public OperatorNode {
public:
    using Term = std::pair<cplx, LinearOperator>;

    explicit SumForm(std::vector<Term> terms) : terms_(std::move(terms)) {
        if (terms_.empty()) throw std::invalid_argument("SumForm: no terms");
        for (const auto& [c, op] : terms_) {
            if (op.dim() != terms_.front().second.dim()) throw std::invalid_argument("SumForm: dimension mismatch");
        }
    }
    Index dim() const noexcept override { return terms_.front().second.dim(); }
    OperatorForm form() const noexcept override { return OperatorForm::sum; }
    void apply(MatrixCRef x, MatrixRef y, bool adjoint) const override {
        y.setZero();
        Matrix tmp(x.rows(), x.cols());
        for (const auto& [c, op] : terms_) {
            op.apply(x, tmp, adjoint);
            y += (adjoint ? std::conj(c) : c) * tmp;
        }
    }
    std::shared_ptr<const OperatorNode> conjugate() const override {
        std::vector<Term> t;
        t.reserve(terms_.size());
        for (const auto& [c, op] : terms_) t.emplace_back(std::conj(c), op.conjugate());
        return std::make_shared<SumForm>(std::move(t));
    }
    [[nodiscard]] const std::vector<Term>& terms() const noexcept { return terms_; }

private:
    std::vector<Term> terms_;
};

/// F_0 F_1 ... F_{m-1}.
class ComposeForm final : public OperatorNode {
public:
    explicit ComposeForm(std::vector<LinearOperator> factors) : factors_(std::move(factors)) {
        if (factors_.empty()) throw std::invalid_argument("ComposeForm: no factors");
        for (const auto& f : factors_) {
            if (f.dim() != factors_.front().dim()) throw std::invalid_argument("ComposeForm: dimension mismatch");
        }
    }
    Index dim() const noexcept override { return factors_.front().dim(); }
    OperatorForm form() const noexcept override { return OperatorForm::compose; }
    void apply(MatrixCRef x, MatrixRef y, bool adjoint) const override {
        const std::size_t m = factors_.size();
        Matrix cur = x;
        Matrix nxt(x.rows(), x.cols());
        for (std::size_t step = 0; step < m; ++step) {
            const LinearOperator& f = adjoint ? factors_[step] : factors_[m - 1 - step];
            f.apply(cur, nxt, adjoint);
            cur.swap(nxt);
        }
        y = cur;
    }
    std::shared_ptr<const OperatorNode> conjugate() const override {
        std::vector<LinearOperator> c;
        c.reserve(factors_.size());
        for (const auto& f : factors_) c.push_back(f.conjugate());
        return std::make_shared<ComposeForm>(std::move(c));
    }
    [[nodiscard]] const std::vector<LinearOperator>& factors() const noexcept { return factors_; }

private:
    std::vector<LinearOperator> factors_;
};

/// `rest` times the identity outside the listed cycles; on cycle c (basis indices
/// cycles[c][0..m-1]) acts by the m x m matrix blocks[c] in the cycle's own ordering.
class CyclePhaseForm final : public OperatorNode {
public:
    CyclePhaseForm(Index dim, std::vector<std::vector<Index>> cycles, std::vector<Matrix> blocks, cplx rest = 1.0)
        : dim_(dim), cycles_(std::move(cycles)), blocks_(std::move(blocks)), rest_(rest) {
        if (cycles_.size() != blocks_.size()) throw std::invalid_argument("CyclePhaseForm: cycle/block count mismatch");
        for (std::size_t c = 0; c < cycles_.size(); ++c) {
            const auto m = static_cast<Index>(cycles_[c].size());
            if (blocks_[c].rows() != m || blocks_[c].cols() != m) {
                throw std::invalid_argument("CyclePhaseForm: block size does not match its cycle");
            }
        }
    }
    Index dim() const noexcept override { return dim_; }
    OperatorForm form() const noexcept override { return OperatorForm::cycle_phase; }
    void apply(MatrixCRef x, MatrixRef y, bool adjoint) const override {
        if (rest_ == cplx{1.0, 0.0}) {
            y = x;
        } else {
            y = (adjoint ? std::conj(rest_) : rest_) * x;
        }
        Vector in;
        Vector out;
        for (std::size_t c = 0; c < cycles_.size(); ++c) {
            const auto& idx = cycles_[c];
            const auto m = static_cast<Index>(idx.size());
            in.resize(m);
            out.resize(m);
            for (Index col = 0; col < x.cols(); ++col) {
                for (Index k = 0; k < m; ++k) in[k] = x(idx[k], col);
                if (adjoint) {
                    out.noalias() = blocks_[c].adjoint() * in;
                } else {
                    out.noalias() = blocks_[c] * in;
                }
                for (Index k = 0; k < m; ++k) y(idx[k], col) = out[k];
            }
        }
    }
    std::shared_ptr<const OperatorNode> conjugate() const override {
        std::vector<Matrix> b;
        b.reserve(blocks_.size());
        for (const auto& m : blocks_) b.push_back(m.conjugate());
        return std::make_shared<CyclePhaseForm>(dim_, cycles_, std::move(b), std::conj(rest_));
    }
    [[nodiscard]] const std::vector<std::vector<Index>>& cycles() const noexcept { return cycles_; }
    [[nodiscard]] const std::vector<Matrix>& blocks() const noexcept { return blocks_; }

private:
    Index dim_;
    std::vector<std::vector<Index>> cycles_;
    std::vector<Matrix> blocks_;
    cplx rest_;
};

// ---------------------------------------------------------------------------
// Constructors

inline LinearOperator dense_operator(Matrix m) { return LinearOperator(std::make_shared<DenseForm>(std::move(m))); }

inline LinearOperator sparse_operator(Index n, const std::vector<Eigen::Triplet<cplx, Index>>& entries) {
    SparseMatrix a(n, n);
    a.setFromTriplets(entries.begin(), entries.end());
    return LinearOperator(std::make_shared<SparseForm>(std::move(a)));
}

/// P e_j = e_{image[j]}.
inline LinearOperator permutation_operator(const std::vector<Index>& image) {
    const auto n = static_cast<Index>(image.size());
    std::vector<Eigen::Triplet<cplx, Index>> entries;
    entries.reserve(image.size());
    std::vector<char> hit(image.size(), 0);
    for (Index j = 0; j < n; ++j) {
        const Index i = image[static_cast<std::size_t>(j)];
        if (i < 0 || i >= n || hit[static_cast<std::size_t>(i)]) {
            throw std::invalid_argument("permutation_operator: not a permutation");
        }
        hit[static_cast<std::size_t>(i)] = 1;
        entries.emplace_back(i, j, cplx{1.0, 0.0});
    }
    return sparse_operator(n, entries);
}

inline LinearOperator identity_operator(Index n) {
    std::vector<Index> id(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) id[static_cast<std::size_t>(i)] = i;
    return permutation_operator(id);
}

inline LinearOperator block_diag(std::vector<LinearOperator> blocks) {
    return LinearOperator(std::make_shared<BlockDiagForm>(std::move(blocks)));
}

inline LinearOperator tensor_prod(LinearOperator a, LinearOperator b) {
    return LinearOperator(std::make_shared<TensorProdForm>(std::move(a), std::move(b)));
}

inline LinearOperator lin_comb(std::array<LinearOperator, 2> gens, std::vector<LinCombForm::Term> terms) {
    return LinearOperator(std::make_shared<LinCombForm>(std::move(gens), std::move(terms)));
}

inline LinearOperator operator_sum(std::vector<SumForm::Term> terms) {
    return LinearOperator(std::make_shared<SumForm>(std::move(terms)));
}

inline LinearOperator scaled(cplx c, LinearOperator op) { return operator_sum({{c, std::move(op)}}); }

inline LinearOperator compose(std::vector<LinearOperator> factors) {
    return LinearOperator(std::make_shared<ComposeForm>(std::move(factors)));
}

// ---------------------------------------------------------------------------
// Dense materialization and the flat binary format

inline Matrix to_dense(const LinearOperator& op, Index cap = dense_threshold) {
    if (op.dim() > cap) {
        throw ResourceError("to_dense: dimension " + std::to_string(op.dim()) + " exceeds the dense cap " +
                            std::to_string(cap));
    }
    const Matrix id = Matrix::Identity(op.dim(), op.dim());
    return op.apply_block(id);
}

namespace detail {
inline std::uint64_t to_little_endian(std::uint64_t v) noexcept {
    if constexpr (std::endian::native == std::endian::little) {
        return v;
    } else {
        std::uint64_t r = 0;
        for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffU) << (8 * (7 - i));
        return r;
    }
}
}  // namespace detail

/// Row-major sequence of (re, im) little-endian IEEE-754 doubles, no header.
inline void write_dense_binary(std::ostream& out, const Matrix& m) {
    for (Index i = 0; i < m.rows(); ++i) {
        for (Index j = 0; j < m.cols(); ++j) {
            for (double part : {m(i, j).real(), m(i, j).imag()}) {
                const std::uint64_t le = detail::to_little_endian(std::bit_cast<std::uint64_t>(part));
                out.write(reinterpret_cast<const char*>(&le), sizeof le);
            }
        }
    }
    if (!out) throw std::runtime_error("write_dense_binary: stream error");
}

inline Matrix read_dense_binary(std::istream& in, Index rows, Index cols) {
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        for (Index j = 0; j < cols; ++j) {
            double parts[2];
            for (double& part : parts) {
                std::uint64_t le = 0;
                in.read(reinterpret_cast<char*>(&le), sizeof le);
                if (!in) throw std::runtime_error("read_dense_binary: truncated stream");
                part = std::bit_cast<double>(detail::to_little_endian(le));
            }
            m(i, j) = cplx{parts[0], parts[1]};
        }
    }
    return m;
}

}  // namespace fnlab
