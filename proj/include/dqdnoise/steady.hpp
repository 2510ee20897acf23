// steady.hpp: stationary state and single-time observables.

#pragma once

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SparseLU>

#include "dqdnoise/error.hpp"
#include "dqdnoise/model.hpp"
#include "dqdnoise/superop.hpp"

namespace dqdnoise {

inline constexpr double kPositivityTolerance = 1e-9;
inline constexpr double kResidualTolerance = 1e-10;

struct SteadyState {
    Matrix rho;              // Hermitian, unit trace
    double residual{0.0};    // ||L vec(rho)||_max against the unmodified generator
    double min_eigenvalue{0.0};
    std::string method{"trace-row-sparse-lu"};

    Eigen::Index dim() const noexcept { return rho.rows(); }
    int n_fock() const noexcept { return static_cast<int>(rho.rows() / 3 - 1); }
};

namespace detail {

using SparseLUSolver = Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>;

// L with the row of rho(0,0) replaced by the vectorized trace. Since the
// diagonal rows of a trace-preserving L sum to zero, this row is redundant and
// the replacement pins the otherwise free stationary component.
inline SparseMatrix trace_augmented(const SparseMatrix& L, Eigen::Index dim_rho) {
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(L.nonZeros() + dim_rho));
    for (Eigen::Index col = 0; col < L.outerSize(); ++col)
        for (SparseMatrix::InnerIterator it(L, col); it; ++it)
            if (it.row() != 0) t.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    for (Eigen::Index k = 0; k < dim_rho; ++k) t.emplace_back(0, static_cast<int>(k * (dim_rho + 1)), cplx{1.0, 0.0});
    return from_triplets(L.rows(), t);
}

} // namespace detail

// Solves L rho = 0 with Tr rho = 1 by replacing one redundant row with the trace
// constraint. Result is Hermitized and renormalized; the residual is measured
// against the original L.
inline SteadyState solve_steady_state(const Superoperator& L) {
    const Eigen::Index d = L.dim_rho();
    const SparseMatrix A = detail::trace_augmented(L.total(), d);
    detail::SparseLUSolver lu;
    lu.analyzePattern(A);
    lu.factorize(A);
    if (lu.info() != Eigen::Success)
        throw NumericalError("steady state: trace-augmented generator is singular (degenerate stationary subspace?)");

    Vector b = Vector::Zero(A.rows());
    b[0] = 1.0;
    const Vector x = lu.solve(b);
    if (lu.info() != Eigen::Success || !x.allFinite())
        throw NumericalError("steady state: linear solve failed (degenerate stationary subspace?)");

    SteadyState ss;
    Matrix rho = devectorize(x, d);
    rho = 0.5 * (rho + rho.adjoint()).eval();
    rho /= rho.trace().real();
    ss.rho = rho;
    ss.residual = (L.total() * vectorize(ss.rho)).cwiseAbs().maxCoeff();

    // A degenerate stationary subspace leaves the augmented system numerically
    // singular; the solve then returns a non-stationary vector.
    const double aug_residual = (A * x - b).cwiseAbs().maxCoeff();
    if (aug_residual > 1e-8 || ss.residual > kResidualTolerance) {
        std::ostringstream os;
        os << "steady state did not converge: residual " << ss.residual << " (augmented " << aug_residual
           << "), stationary state may be degenerate";
        throw NumericalError(os.str());
    }

    Eigen::SelfAdjointEigenSolver<Matrix> es(ss.rho, Eigen::EigenvaluesOnly);
    ss.min_eigenvalue = es.eigenvalues().minCoeff();
    if (ss.min_eigenvalue < -kPositivityTolerance) {
        std::ostringstream os;
        os << "steady state not positive (min eigenvalue " << ss.min_eigenvalue
           << "); increase the Fock cutoff n_fock";
        throw NumericalError(os.str());
    }
    return ss;
}

inline double expectation(const Matrix& op, const SteadyState& ss) { return (op * ss.rho).trace().real(); }
inline cplx expectation_complex(const Matrix& op, const SteadyState& ss) { return (op * ss.rho).trace(); }

// Tr[C vec(rho)] for a superoperator part C.
inline double channel_flux(const SparseMatrix& C, const SteadyState& ss) {
    return vec_trace(Vector(C * vectorize(ss.rho)), ss.dim()).real();
}

struct Currents {
    double electron; // I_e, right-lead emission
    double phonon;   // I_b, emission into the resonator bath
    double inflow;   // I_in, left-lead injection
};

inline Currents currents(const SteadyState& ss, const Superoperator& L) {
    return {channel_flux(L.channel(Channel::e), ss), channel_flux(L.channel(Channel::b), ss),
            channel_flux(L.channel(Channel::in), ss)};
}

struct FanoNumber {
    double value; // (<n^2> - <n>^2) / <n>, 0 when vacuum
    bool vacuum;  // <n> < 1e-12
};

inline FanoNumber fano_number(const SteadyState& ss) {
    const OperatorSet o = build_operators(HilbertSpace::transport(ss.n_fock()));
    const double n1 = expectation(o.number, ss);
    const double n2 = expectation(o.number * o.number, ss);
    if (n1 < 1e-12) return {0.0, true};
    return {(n2 - n1 * n1) / n1, false};
}

struct QuadratureMoments {
    cplx mean_a;
    cplx mean_a2;
    double mean_n;
};

inline QuadratureMoments quadrature_moments(const SteadyState& ss) {
    const OperatorSet o = build_operators(HilbertSpace::transport(ss.n_fock()));
    return {expectation_complex(o.a, ss), expectation_complex(o.a * o.a, ss), expectation(o.number, ss)};
}

// Normal-ordered variance <:(ΔQ)^2:> of Q = a e^{-i phi} + a^dag e^{i phi}.
inline double quadrature_variance(const QuadratureMoments& m, double phi) {
    const cplx c = m.mean_a2 - m.mean_a * m.mean_a;
    return 2.0 * (c * std::polar(1.0, -2.0 * phi)).real() + 2.0 * (m.mean_n - std::norm(m.mean_a));
}

inline double quadrature_variance(const SteadyState& ss, double phi) {
    return quadrature_variance(quadrature_moments(ss), phi);
}

struct QuadratureMinimum {
    double phi_star; // in [0, pi)
    double value;
};

inline QuadratureMinimum min_quadrature_variance(const QuadratureMoments& m) {
    const cplx c = m.mean_a2 - m.mean_a * m.mean_a;
    const double value = 2.0 * (m.mean_n - std::norm(m.mean_a)) - 2.0 * std::abs(c);
    double phi = 0.5 * (std::arg(c) - std::numbers::pi);
    phi = std::fmod(phi, std::numbers::pi);
    if (phi < 0) phi += std::numbers::pi;
    if (phi >= std::numbers::pi) phi = 0.0;
    return {phi, value};
}

inline QuadratureMinimum min_quadrature_variance(const SteadyState& ss) {
    return min_quadrature_variance(quadrature_moments(ss));
}

struct MomentReport {
    double current_e{0.0};
    double current_b{0.0};
    double current_in{0.0};
    double mean_n{0.0};
    double mean_n2{0.0};
    double fano_q{0.0};
    bool vacuum{false};
    QuadratureMinimum quad_min{0.0, 0.0};
    cplx mean_a{};
    cplx mean_a2{};
    double residual{0.0};
    double min_eigenvalue{0.0};
};

inline MomentReport moment_report(const SteadyState& ss, const Superoperator& L) {
    const OperatorSet o = build_operators(HilbertSpace::transport(ss.n_fock()));
    MomentReport r;
    const Currents c = currents(ss, L);
    r.current_e = c.electron;
    r.current_b = c.phonon;
    r.current_in = c.inflow;
    r.mean_n = expectation(o.number, ss);
    r.mean_n2 = expectation(o.number * o.number, ss);
    const FanoNumber f = fano_number(ss);
    r.fano_q = f.value;
    r.vacuum = f.vacuum;
    const QuadratureMoments qm = quadrature_moments(ss);
    r.mean_a = qm.mean_a;
    r.mean_a2 = qm.mean_a2;
    r.quad_min = min_quadrature_variance(qm);
    r.residual = ss.residual;
    r.min_eigenvalue = ss.min_eigenvalue;
    return r;
}

} // namespace dqdnoise
