// model.hpp: truncated transport-qubit ⊗ Fock space, operators, Hamiltonians and
// closed-form Jaynes–Cummings spectroscopy.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace dqdnoise {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Physical parameters of one run. Units: hbar = k_B = e = 1, omega_b sets the scale.
struct ModelParams {
    double epsilon{0.0};     // dot detuning
    double delta{0.0};       // coherent L<->R tunneling
    double g{0.0};           // dot-resonator coupling
    double omega_b{1.0};     // resonator frequency
    double gamma_L{0.0};     // left lead injection rate
    double gamma_R{0.0};     // right lead emission rate
    double gamma_b{0.0};     // resonator damping
    double temperature{0.0}; // resonator bath temperature
    int n_fock{6};           // highest retained number state

    bool operator==(const ModelParams&) const = default;

    void validate() const {
        auto finite = [](double x) { return std::isfinite(x); };
        if (!finite(epsilon) || !finite(delta) || !finite(g) || !finite(omega_b) || !finite(gamma_L) ||
            !finite(gamma_R) || !finite(gamma_b) || !finite(temperature))
            throw std::invalid_argument("model parameters must be finite");
        if (gamma_L < 0 || gamma_R < 0 || gamma_b < 0)
            throw std::invalid_argument("rates must be >= 0");
        if (omega_b <= 0) throw std::invalid_argument("omega_b must be > 0");
        if (temperature < 0) throw std::invalid_argument("temperature must be >= 0");
        if (n_fock < 1) throw std::invalid_argument("n_fock must be >= 1");
    }
};

// Dot labels of the transport qubit. The two-level (spin) space uses 0 = up, 1 = down.
enum class DotState : int { empty = 0, left = 1, right = 2 };

// Product space dot ⊗ Fock with index = dot_state * (n_fock + 1) + n.
class HilbertSpace {
public:
    static HilbertSpace transport(int n_fock) { return HilbertSpace(n_fock, 3); }
    static HilbertSpace two_level(int n_fock) { return HilbertSpace(n_fock, 2); }

    int n_fock() const noexcept { return n_fock_; }
    int n_levels() const noexcept { return n_fock_ + 1; }
    int dot_dim() const noexcept { return dot_dim_; }
    int dim() const noexcept { return dot_dim_ * (n_fock_ + 1); }

    int index(int dot_state, int n) const {
        if (dot_state < 0 || dot_state >= dot_dim_ || n < 0 || n > n_fock_)
            throw std::out_of_range("basis label out of range");
        return dot_state * (n_fock_ + 1) + n;
    }
    int index(DotState s, int n) const { return index(static_cast<int>(s), n); }

    std::pair<int, int> label(int idx) const {
        if (idx < 0 || idx >= dim()) throw std::out_of_range("basis index out of range");
        return {idx / (n_fock_ + 1), idx % (n_fock_ + 1)};
    }

    bool operator==(const HilbertSpace&) const = default;

private:
    HilbertSpace(int n_fock, int dot_dim) : n_fock_(n_fock), dot_dim_(dot_dim) {
        if (n_fock < 1) throw std::invalid_argument("n_fock must be >= 1");
    }

    int n_fock_;
    int dot_dim_;
};

namespace detail {

inline Matrix kron(const Matrix& A, const Matrix& B) {
    Matrix out(A.rows() * B.rows(), A.cols() * B.cols());
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < A.cols(); ++j)
            out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return out;
}

inline Matrix dot_unit(int dot_dim, int i, int j) {
    Matrix m = Matrix::Zero(dot_dim, dot_dim);
    m(i, j) = 1.0;
    return m;
}

inline Matrix fock_annihilation(int n_levels) {
    Matrix a = Matrix::Zero(n_levels, n_levels);
    for (int n = 1; n < n_levels; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

} // namespace detail

struct OperatorSet {
    Matrix identity;
    Matrix a, a_dag, number;
    Matrix sigma_z, sigma_x;
    Matrix s_L, s_R;     // |0><L|, |0><R|
    Matrix P0, P_L, P_R; // dot projectors
};

// Hard truncation: a|0> = 0 and a_dag maps the top number state to zero.
inline OperatorSet build_operators(const HilbertSpace& space) {
    if (space.dot_dim() != 3) throw std::invalid_argument("build_operators expects the 3-level transport space");
    using detail::dot_unit;
    const int nb = space.n_levels();
    const Matrix I3 = Matrix::Identity(3, 3);
    const Matrix Ib = Matrix::Identity(nb, nb);
    const Matrix a1 = detail::fock_annihilation(nb);

    OperatorSet ops;
    ops.identity = Matrix::Identity(space.dim(), space.dim());
    ops.a = detail::kron(I3, a1);
    ops.a_dag = ops.a.adjoint();
    ops.number = ops.a_dag * ops.a;
    ops.P0 = detail::kron(dot_unit(3, 0, 0), Ib);
    ops.P_L = detail::kron(dot_unit(3, 1, 1), Ib);
    ops.P_R = detail::kron(dot_unit(3, 2, 2), Ib);
    ops.sigma_z = ops.P_L - ops.P_R;
    ops.sigma_x = detail::kron(dot_unit(3, 1, 2) + dot_unit(3, 2, 1), Ib);
    ops.s_L = detail::kron(dot_unit(3, 0, 1), Ib);
    ops.s_R = detail::kron(dot_unit(3, 0, 2), Ib);
    return ops;
}

inline double max_hermiticity_defect(const Matrix& H) {
    return (H - H.adjoint()).cwiseAbs().maxCoeff();
}

// H = eps sz + Delta sx + g sz (a + a^dag) + omega_b a^dag a
inline Matrix build_hamiltonian(const ModelParams& p, const HilbertSpace& space) {
    p.validate();
    const OperatorSet o = build_operators(space);
    return p.epsilon * o.sigma_z + p.delta * o.sigma_x + p.g * o.sigma_z * (o.a + o.a_dag) +
           p.omega_b * o.number;
}

// Rotating-wave form g(sx+ a + sx- a^dag) + omega_b a^dag a + Delta sx, with
// sx± = (sz ∓ i sy)/2. epsilon is ignored.
inline Matrix build_jc_hamiltonian(const ModelParams& p, const HilbertSpace& space) {
    p.validate();
    const OperatorSet o = build_operators(space);
    const cplx I{0.0, 1.0};
    // sy = -i|L><R| + i|R><L|
    const Matrix sigma_y = detail::kron(-I * detail::dot_unit(3, 1, 2) + I * detail::dot_unit(3, 2, 1),
                                        Matrix::Identity(space.n_levels(), space.n_levels()));
    const Matrix sx_plus = 0.5 * (o.sigma_z - I * sigma_y);
    const Matrix sx_minus = 0.5 * (o.sigma_z + I * sigma_y);
    return p.g * (sx_plus * o.a + sx_minus * o.a_dag) + p.omega_b * o.number + p.delta * o.sigma_x;
}

// Spin-resonator variant on 2-level ⊗ Fock (no vacancy, no leads):
// H = -Sigma sz/2 + omega_b a^dag a + lambda (a + a^dag) sx
inline Matrix build_spin_hamiltonian(double sigma_gap, double omega_b, double lambda_coupling,
                                     const HilbertSpace& space) {
    if (space.dot_dim() != 2)
        throw std::invalid_argument("spin Hamiltonian lives on the 2-level space, not the transport space");
    using detail::dot_unit;
    const int nb = space.n_levels();
    const Matrix Ib = Matrix::Identity(nb, nb);
    const Matrix a = detail::kron(Matrix::Identity(2, 2), detail::fock_annihilation(nb));
    const Matrix sz = detail::kron(dot_unit(2, 0, 0) - dot_unit(2, 1, 1), Ib);
    const Matrix sx = detail::kron(dot_unit(2, 0, 1) + dot_unit(2, 1, 0), Ib);
    return -0.5 * sigma_gap * sz + omega_b * a.adjoint() * a + lambda_coupling * (a + a.adjoint()) * sx;
}

struct EnergySpectrum {
    std::vector<double> eigenvalues; // ascending
    std::vector<double> gaps;        // eigenvalues[k] - eigenvalues[0], k >= 1
};

inline EnergySpectrum energy_spectrum(const Matrix& H) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(H, Eigen::EigenvaluesOnly);
    EnergySpectrum out;
    const auto& ev = es.eigenvalues();
    out.eigenvalues.assign(ev.data(), ev.data() + ev.size());
    std::sort(out.eigenvalues.begin(), out.eigenvalues.end());
    for (std::size_t k = 1; k < out.eigenvalues.size(); ++k)
        out.gaps.push_back(out.eigenvalues[k] - out.eigenvalues[0]);
    return out;
}

// Spectrum of H restricted to the singly-occupied (L, R) sector.
inline EnergySpectrum charge_sector_spectrum(const Matrix& H, const HilbertSpace& space) {
    const int nb = space.n_levels();
    const int off = space.index(DotState::left, 0);
    return energy_spectrum(H.block(off, off, 2 * nb, 2 * nb));
}

struct MultipletEnergies {
    double plus;
    double minus;
};

// Eigenvalues of the block coupling |n, 1_x> and |n+1, 0_x>.
inline MultipletEnergies jc_multiplet_energies(const ModelParams& p, int n) {
    if (n < 0) throw std::invalid_argument("multiplet index must be >= 0");
    const double h11 = n * p.omega_b + p.delta;
    const double h22 = (n + 1) * p.omega_b - p.delta;
    const double off = p.g * std::sqrt(static_cast<double>(n + 1));
    const double mean = 0.5 * (h11 + h22);
    const double half = 0.5 * std::sqrt((h22 - h11) * (h22 - h11) + 4.0 * off * off);
    return {mean + half, mean - half};
}

struct ResonanceBranches {
    double upper;   // |omega_b/2 + sqrt(Omega^2 + 4g^2)/2 + Delta|
    double lower;   // |omega_b/2 - sqrt(Omega^2 + 4g^2)/2 + Delta|
    double central; // 2 Delta
};

// Predicted noise-resonance frequencies E_± - E_0 with E_0 = -Delta, Omega = omega_b - 2 Delta.
inline ResonanceBranches resonance_branches(const ModelParams& p) {
    const double detuning = p.omega_b - 2.0 * p.delta;
    const double root = std::sqrt(detuning * detuning + 4.0 * p.g * p.g);
    return {std::abs(0.5 * p.omega_b + 0.5 * root + p.delta), std::abs(0.5 * p.omega_b - 0.5 * root + p.delta),
            2.0 * p.delta};
}

struct CollapseTrace {
    std::vector<double> times;
    std::vector<double> p_left;
    std::vector<double> coefficients;
};

inline std::vector<double> equal_weights(int count) {
    if (count < 1) throw std::invalid_argument("need at least one number state");
    return std::vector<double>(static_cast<std::size_t>(count), 1.0 / std::sqrt(static_cast<double>(count)));
}

// z^n e^{-z} / n!, renormalized to unit total probability.
inline std::vector<double> coherent_weights(double z, int n_max) {
    if (n_max < 0 || !(z >= 0)) throw std::invalid_argument("coherent weights need z >= 0 and n_max >= 0");
    std::vector<double> c(static_cast<std::size_t>(n_max + 1));
    double term = std::exp(-z);
    for (int n = 0; n <= n_max; ++n) {
        if (n > 0) term *= z / n;
        c[static_cast<std::size_t>(n)] = term;
    }
    double norm = 0.0;
    for (double x : c) norm += x * x;
    norm = std::sqrt(norm);
    for (double& x : c) x /= norm;
    return c;
}

// P_L(t) = sum_n { C_n cos[(-g(sqrt(n+1) - sqrt(n)) t - 2 t Delta) / 2] }^2
inline CollapseTrace p_left_analytic(std::span<const double> coefficients, const ModelParams& p,
                                     std::span<const double> times) {
    double norm = 0.0;
    for (double c : coefficients) norm += c * c;
    if (coefficients.empty() || std::abs(norm - 1.0) > 1e-10)
        throw std::invalid_argument("number-state amplitudes must satisfy sum |C_n|^2 = 1");

    CollapseTrace out;
    out.times.assign(times.begin(), times.end());
    out.coefficients.assign(coefficients.begin(), coefficients.end());
    out.p_left.reserve(times.size());
    for (double t : times) {
        double pl = 0.0;
        for (std::size_t n = 0; n < coefficients.size(); ++n) {
            const double dn = std::sqrt(static_cast<double>(n + 1)) - std::sqrt(static_cast<double>(n));
            const double c = coefficients[n] * std::cos(0.5 * (-p.g * dn * t - 2.0 * t * p.delta));
            pl += c * c;
        }
        out.p_left.push_back(pl);
    }
    return out;
}

struct SpinEstimate {
    double field_mT;
    double rabi_Hz;
};

// Electron gyromagnetic conversion, 28 GHz per tesla.
inline constexpr double kElectronGyromagneticHzPerTesla = 28.0e9;

inline SpinEstimate spin_estimates(double field_gradient_mT_per_nm, double x_zp_nm) {
    if (!(field_gradient_mT_per_nm > 0) || !(x_zp_nm > 0))
        throw std::invalid_argument("field gradient and zero-point motion must be positive");
    const double field_mT = field_gradient_mT_per_nm * x_zp_nm;
    return {field_mT, kElectronGyromagneticHzPerTesla * field_mT * 1e-3};
}

} // namespace dqdnoise
