/**
 * @file randreps.hpp
 * @brief Haar-random finite-dimensional representations of F_2.
 *
 * A pair of independent Haar unitaries is the random model for the sequence
 * sigma_n whose norms ||sigma_n(a)|| approach ||lambda(a)|| (strong
 * convergence). Each member of a sequence is keyed by (seed, position), so
 * members can be drawn in any order or in parallel.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/QR>

#include "fnlab/normest.hpp"
#include "fnlab/parallel.hpp"
#include "fnlab/repcore.hpp"
#include "fnlab/rng.hpp"

namespace fnlab {

/// Ginibre matrix -> QR -> Q diag(r_ii/|r_ii|), so the triangular factor has positive real diagonal.
inline Matrix haar_unitary(Index n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("haar_unitary: dimension must be positive");
    rng::CounterRng g(seed);
    Matrix z(n, n);
    for (Index j = 0; j < n; ++j) {
        for (Index i = 0; i < n; ++i) z(i, j) = rng::complex_gaussian(g);
    }
    Eigen::HouseholderQR<Matrix> qr(z);
    Matrix q = qr.householderQ() * Matrix::Identity(n, n);
    const Matrix& r = qr.matrixQR();
    for (Index j = 0; j < n; ++j) {
        const cplx d = r(j, j);
        const double ad = std::abs(d);
        q.col(j) *= (ad == 0.0) ? cplx{1.0, 0.0} : d / ad;
    }
    return q;
}

struct SigmaSequence {
    std::vector<Index> dims;
    std::uint64_t seed = 0;
    std::vector<UnitaryRep> reps;
};

/// Key of member `position` of the sequence seeded by `seed`.
inline std::uint64_t sigma_key(std::uint64_t seed, std::size_t position) {
    return rng::derive_seed(seed, 0x7369676d61000000ULL + position);
}

inline UnitaryRep haar_rep(Index n, std::uint64_t key) {
    return UnitaryRep::from_matrices(haar_unitary(n, rng::derive_seed(key, 1)), haar_unitary(n, rng::derive_seed(key, 2)));
}

inline SigmaSequence sigma_sequence(const std::vector<Index>& dims, std::uint64_t seed, int threads = 1) {
    if (dims.empty()) throw std::invalid_argument("sigma_sequence: no dimensions");
    SigmaSequence s{dims, seed, {}};
    s.reps = parallel_map(dims.size(), threads, [&](std::size_t k) { return haar_rep(dims[k], sigma_key(seed, k)); });
    return s;
}

struct GapSample {
    Index dim = 0;
    std::uint64_t seed = 0;
    NormEstimate norm;
};

struct GapReport {
    double reference = 0.0;
    std::vector<GapSample> samples;   ///< dim-major, then seed order
    std::vector<Index> dims;
    std::vector<double> running_max;  ///< max over all samples with dim <= dims[i]
    std::vector<double> medians;      ///< per-dim median over seeds
    double final_deviation = 0.0;     ///< |running_max.back() - reference|
};

inline double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return (v.size() % 2) ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

/// Norm samples ||sigma(a)|| over dims x seeds against a reference value of ||lambda(a)||.
/// The sample for (dims[i], seeds[s]) is member i of sigma_sequence(dims, seeds[s]).
inline GapReport haagerup_gap_report(const RingElement& a, const std::vector<Index>& dims,
                                     const std::vector<std::uint64_t>& seeds, double reference,
                                     const NormOptions& opts = {}, int threads = 1) {
    if (dims.empty() || seeds.empty()) throw std::invalid_argument("haagerup_gap_report: empty dims or seeds");
    GapReport rep;
    rep.reference = reference;
    rep.dims = dims;
    const std::size_t tasks = dims.size() * seeds.size();
    rep.samples = parallel_map(tasks, threads, [&](std::size_t t) {
        const std::size_t i = t / seeds.size();
        const std::size_t s = t % seeds.size();
        const UnitaryRep sigma = haar_rep(dims[i], sigma_key(seeds[s], i));
        NormOptions o = opts;
        o.seed = rng::derive_seed(seeds[s], 0x6e6f726dULL + i);
        return GapSample{dims[i], seeds[s], opnorm(rep_eval(sigma, a), o)};
    });
    double run = 0.0;
    for (std::size_t i = 0; i < dims.size(); ++i) {
        std::vector<double> vals;
        for (std::size_t s = 0; s < seeds.size(); ++s) vals.push_back(rep.samples[i * seeds.size() + s].norm.value);
        run = std::max(run, *std::max_element(vals.begin(), vals.end()));
        rep.running_max.push_back(run);
        rep.medians.push_back(median(vals));
    }
    rep.final_deviation = std::abs(rep.running_max.back() - reference);
    return rep;
}

}  // namespace fnlab
