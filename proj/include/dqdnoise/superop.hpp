// superop.hpp: vectorized Liouvillian with labeled jump channels, counting-field
// deformation and eigendecomposition.

#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#ifndef lapack_complex_double
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#endif
#include <lapacke.h>

#include "dqdnoise/error.hpp"
#include "dqdnoise/model.hpp"

namespace dqdnoise {

using SparseMatrix = Eigen::SparseMatrix<cplx>;
using Triplet = Eigen::Triplet<cplx>;

// Jump channels: the completely positive "sandwich" part of each dissipator.
enum class Channel { in, e, b, b_abs };

inline constexpr std::array<Channel, 4> kAllChannels{Channel::in, Channel::e, Channel::b, Channel::b_abs};

inline std::string_view to_string(Channel c) {
    switch (c) {
    case Channel::in: return "in";
    case Channel::e: return "e";
    case Channel::b: return "b";
    case Channel::b_abs: return "b_abs";
    }
    return "?";
}

inline Channel channel_from_string(std::string_view name) {
    for (Channel c : kAllChannels)
        if (to_string(c) == name) return c;
    throw std::invalid_argument("unknown channel id '" + std::string(name) + "'");
}

// Electron emission into the right lead and phonon emission into the bath.
inline bool is_counted(Channel c) { return c == Channel::e || c == Channel::b; }

// Column stacking: vec(rho)[i + D j] = rho(i, j), so vec(A rho B) = (B^T ⊗ A) vec(rho).
inline Vector vectorize(const Matrix& rho) {
    if (rho.rows() != rho.cols()) throw std::invalid_argument("vectorize expects a square matrix");
    return Eigen::Map<const Vector>(rho.data(), rho.size());
}

inline Matrix devectorize(const Vector& v) {
    const auto d = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(v.size()))));
    if (d * d != v.size()) throw std::invalid_argument("vector length is not a perfect square");
    return Eigen::Map<const Matrix>(v.data(), d, d);
}

inline Matrix devectorize(const Vector& v, Eigen::Index dim) {
    if (dim * dim != v.size()) throw std::invalid_argument("vector length does not match dimension");
    return Eigen::Map<const Matrix>(v.data(), dim, dim);
}

// Tr[devectorize(v)].
inline cplx vec_trace(const Vector& v, Eigen::Index dim) {
    cplx t{0.0, 0.0};
    for (Eigen::Index k = 0; k < dim; ++k) t += v[k * (dim + 1)];
    return t;
}

// Vectorized identity, the left null vector of any trace-preserving generator.
inline Vector trace_functional(Eigen::Index dim) { return vectorize(Matrix::Identity(dim, dim)); }

namespace detail {

// Sparse (X ⊗ Y) from dense factors, skipping exact zeros.
inline void kron_triplets(const Matrix& X, const Matrix& Y, cplx scale, std::vector<Triplet>& out) {
    std::vector<std::pair<std::pair<Eigen::Index, Eigen::Index>, cplx>> xs, ys;
    for (Eigen::Index j = 0; j < X.cols(); ++j)
        for (Eigen::Index i = 0; i < X.rows(); ++i)
            if (X(i, j) != cplx{}) xs.push_back({{i, j}, X(i, j)});
    for (Eigen::Index j = 0; j < Y.cols(); ++j)
        for (Eigen::Index i = 0; i < Y.rows(); ++i)
            if (Y(i, j) != cplx{}) ys.push_back({{i, j}, Y(i, j)});
    for (const auto& [xi, xv] : xs)
        for (const auto& [yi, yv] : ys)
            out.emplace_back(static_cast<int>(xi.first * Y.rows() + yi.first),
                             static_cast<int>(xi.second * Y.cols() + yi.second), scale * xv * yv);
}

inline SparseMatrix from_triplets(Eigen::Index n, const std::vector<Triplet>& t) {
    SparseMatrix m(n, n);
    m.setFromTriplets(t.begin(), t.end());
    m.makeCompressed();
    return m;
}

// rate * X rho X^dag
inline SparseMatrix sandwich(const Matrix& X, double rate) {
    std::vector<Triplet> t;
    if (rate != 0.0) kron_triplets(X.conjugate(), X, cplx{rate, 0.0}, t);
    return from_triplets(X.rows() * X.rows(), t);
}

// -rate/2 {X^dag X, rho}
inline void anticommutator_triplets(const Matrix& X, double rate, std::vector<Triplet>& t) {
    if (rate == 0.0) return;
    const Eigen::Index d = X.rows();
    const Matrix XdX = X.adjoint() * X;
    const Matrix I = Matrix::Identity(d, d);
    kron_triplets(I, XdX, cplx{-0.5 * rate, 0.0}, t);
    kron_triplets(XdX.transpose(), I, cplx{-0.5 * rate, 0.0}, t);
}

} // namespace detail

struct LiouvillianSpectrum {
    Vector alphas;          // eigenvalues alpha_k
    Matrix right;           // V, columns are right eigenvectors
    Matrix left;            // V^{-1}, rows are left eigenvectors
    Eigen::Index zero_index{0};
    int near_zero_count{0};        // eigenvalues with |alpha| <= 1e-8
    double biorthogonality_error{0.0}; // ||V^{-1} V - 1||_max
    double max_real_part{0.0};

    bool diagonalizable(double tol = 1e-8) const { return biorthogonality_error <= tol; }
    bool unique_stationary() const { return near_zero_count == 1; }
};

class Superoperator {
public:
    Superoperator() = default;
    Superoperator(Eigen::Index dim_rho, SparseMatrix base, std::map<Channel, SparseMatrix> channels)
        : dim_rho_(dim_rho), base_(std::move(base)), channels_(std::move(channels)) {
        for (Channel c : kAllChannels)
            if (!channels_.count(c)) channels_.emplace(c, SparseMatrix(base_.rows(), base_.cols()));
        total_ = assemble();
    }

    Eigen::Index dim_rho() const noexcept { return dim_rho_; }
    Eigen::Index size() const noexcept { return total_.rows(); }
    const SparseMatrix& total() const noexcept { return total_; }
    const SparseMatrix& base() const noexcept { return base_; }
    const SparseMatrix& channel(Channel c) const { return channels_.at(c); }
    const std::map<Channel, SparseMatrix>& channels() const noexcept { return channels_; }

    // base + in + e + b + b_abs, in this order.
    SparseMatrix assemble() const {
        SparseMatrix sum = base_;
        for (Channel c : kAllChannels) sum = sum + channels_.at(c);
        sum.makeCompressed();
        return sum;
    }

    Vector apply(const Vector& v) const { return total_ * v; }
    Matrix apply(const Matrix& rho) const { return devectorize(Vector(total_ * vectorize(rho)), dim_rho_); }

    // Full dense eigendecomposition, computed once and shared between copies.
    const LiouvillianSpectrum& spectrum() const;

private:
    struct SpectrumCache {
        std::once_flag once;
        LiouvillianSpectrum value;
    };

    Eigen::Index dim_rho_{0};
    SparseMatrix base_;
    std::map<Channel, SparseMatrix> channels_;
    SparseMatrix total_;
    std::shared_ptr<SpectrumCache> cache_ = std::make_shared<SpectrumCache>();
};

// n̄ = e^{-omega_b/T} / (1 - e^{-omega_b/T}), exactly 0 at T = 0.
inline double thermal_occupation(double omega_b, double temperature) {
    if (!(omega_b > 0)) throw std::invalid_argument("omega_b must be > 0");
    if (!(temperature >= 0)) throw std::invalid_argument("temperature must be >= 0");
    if (temperature == 0.0) return 0.0;
    const double x = std::exp(-omega_b / temperature);
    return x / (1.0 - x);
}

// L rho = -i[H, rho] + Gamma_L D[s_L^dag] + Gamma_R D[s_R] + gamma_b (1+n̄) D[a] + gamma_b n̄ D[a^dag].
// The sandwich term of each dissipator is stored as its channel; everything else is base.
struct JumpTerm {
    Channel channel;
    Matrix op;   // X
    double rate; // rate * (X rho X^dag - {X^dag X, rho} / 2)
};

// -i[H, rho] plus the listed dissipators. Sandwich parts go to their channel,
// anticommutators and the Hamiltonian to base.
inline Superoperator lindblad_superoperator(const Matrix& H, const std::vector<JumpTerm>& jumps) {
    const Eigen::Index d = H.rows();
    const Matrix I = Matrix::Identity(d, d);
    const cplx minus_i{0.0, -1.0};
    std::vector<Triplet> t;
    detail::kron_triplets(I, H, minus_i, t);
    detail::kron_triplets(H.transpose(), I, -minus_i, t);
    for (const JumpTerm& j : jumps) detail::anticommutator_triplets(j.op, j.rate, t);
    // structural diagonal, so frequency shifts never change the sparsity pattern
    for (Eigen::Index k = 0; k < d * d; ++k) t.emplace_back(static_cast<int>(k), static_cast<int>(k), cplx{});
    SparseMatrix base = detail::from_triplets(d * d, t);

    std::map<Channel, SparseMatrix> channels;
    for (const JumpTerm& j : jumps) {
        if (channels.count(j.channel)) throw std::invalid_argument("one jump term per channel");
        channels.emplace(j.channel, detail::sandwich(j.op, j.rate));
    }
    return Superoperator(d, std::move(base), std::move(channels));
}

inline Superoperator build_liouvillian(const Matrix& H, const ModelParams& p) {
    p.validate();
    const HilbertSpace space = HilbertSpace::transport(p.n_fock);
    const Eigen::Index d = space.dim();
    if (H.rows() != d || H.cols() != d)
        throw std::invalid_argument("Hamiltonian dimension does not match n_fock");
    const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
    if (max_hermiticity_defect(H) > 1e-12 * scale) throw std::invalid_argument("Hamiltonian is not Hermitian");

    const OperatorSet o = build_operators(space);
    const double nbar = thermal_occupation(p.omega_b, p.temperature);
    return lindblad_superoperator(H, {{Channel::in, o.s_L.adjoint(), p.gamma_L},
                                      {Channel::e, o.s_R, p.gamma_R},
                                      {Channel::b, o.a, p.gamma_b * (1.0 + nbar)},
                                      {Channel::b_abs, o.a_dag, p.gamma_b * nbar}});
}

// The resonator n̄ line in the grouping that pairs both sandwich terms with one rate:
// n̄ gamma_b [ -a^dag a rho + a rho a^dag + a^dag rho a - rho a^dag a ].
// Kept for comparison only; it differs from the detailed-balance form used by
// build_liouvillian by n̄ gamma_b {[a, a^dag], rho}/2 and does not preserve the trace.
inline SparseMatrix printed_thermal_line(const ModelParams& p) {
    const HilbertSpace space = HilbertSpace::transport(p.n_fock);
    const OperatorSet o = build_operators(space);
    const double nbar = thermal_occupation(p.omega_b, p.temperature);
    const Eigen::Index d = space.dim();
    const Matrix I = Matrix::Identity(d, d);
    const cplx r{nbar * p.gamma_b, 0.0};
    std::vector<Triplet> t;
    detail::kron_triplets(I, o.number, -r, t);
    detail::kron_triplets(o.a_dag.transpose(), o.a, r, t);
    detail::kron_triplets(o.a.transpose(), o.a_dag, r, t);
    detail::kron_triplets(o.number.transpose(), I, -r, t);
    return detail::from_triplets(d * d, t);
}

// The n̄ part of build_liouvillian's thermal dissipator, for comparison with printed_thermal_line.
inline SparseMatrix detailed_balance_thermal_line(const ModelParams& p) {
    const HilbertSpace space = HilbertSpace::transport(p.n_fock);
    const OperatorSet o = build_operators(space);
    const double rate = p.gamma_b * thermal_occupation(p.omega_b, p.temperature);
    std::vector<Triplet> t;
    detail::anticommutator_triplets(o.a, rate, t);
    detail::anticommutator_triplets(o.a_dag, rate, t);
    SparseMatrix m = detail::from_triplets(space.dim() * space.dim(), t);
    return m + detail::sandwich(o.a, rate) + detail::sandwich(o.a_dag, rate);
}

// M(s) = base + sum_c s_c * channel_c, with multipliers only for counted channels
// (all others fixed at 1). M(1, ..., 1) reproduces L exactly.
inline Superoperator counting_liouvillian(const Superoperator& L, const std::map<Channel, double>& multipliers) {
    for (const auto& [c, s] : multipliers) {
        if (!is_counted(c))
            throw std::invalid_argument("channel '" + std::string(to_string(c)) + "' is not a counted channel");
        if (!std::isfinite(s)) throw std::invalid_argument("counting multiplier must be finite");
    }
    std::map<Channel, SparseMatrix> scaled;
    for (Channel c : kAllChannels) {
        auto it = multipliers.find(c);
        if (it == multipliers.end() || it->second == 1.0)
            scaled.emplace(c, L.channel(c));
        else
            scaled.emplace(c, SparseMatrix(cplx{it->second, 0.0} * L.channel(c)));
    }
    return Superoperator(L.dim_rho(), L.base(), std::move(scaled));
}

inline LiouvillianSpectrum diagonalize(const SparseMatrix& L) {
    Matrix dense = Matrix(L);
    const Eigen::Index n = dense.rows();
    LiouvillianSpectrum out;
    out.alphas.resize(n);
    out.right.resize(n, n);
    const lapack_int info =
        LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'V', static_cast<lapack_int>(n), dense.data(), static_cast<lapack_int>(n),
                      out.alphas.data(), nullptr, 1, out.right.data(), static_cast<lapack_int>(n));
    if (info != 0) throw NumericalError("Liouvillian eigendecomposition did not converge");
    Eigen::PartialPivLU<Matrix> lu(out.right);
    out.left = lu.inverse();
    out.biorthogonality_error = (out.left * out.right - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
    if (!std::isfinite(out.biorthogonality_error)) out.biorthogonality_error = INFINITY;

    out.zero_index = 0;
    out.max_real_part = -INFINITY;
    for (Eigen::Index k = 0; k < n; ++k) {
        if (std::abs(out.alphas[k]) < std::abs(out.alphas[out.zero_index])) out.zero_index = k;
        if (std::abs(out.alphas[k]) <= 1e-8) ++out.near_zero_count;
        out.max_real_part = std::max(out.max_real_part, out.alphas[k].real());
    }
    return out;
}

inline const LiouvillianSpectrum& Superoperator::spectrum() const {
    std::call_once(cache_->once, [this] { cache_->value = diagonalize(total_); });
    return cache_->value;
}

inline const LiouvillianSpectrum& spectrum(const Superoperator& L) { return L.spectrum(); }

// Convenience: Hamiltonian of the model plus its Liouvillian.
inline Superoperator build_model_liouvillian(const ModelParams& p) {
    return build_liouvillian(build_hamiltonian(p, HilbertSpace::transport(p.n_fock)), p);
}

} // namespace dqdnoise
