// noise.hpp: symmetrized finite-frequency current noise S(omega)_{i,j}.
//
// Three independent routes:
//   resolvent  S/2 = Re{-Tr[J_i R J_j rho] - Tr[J_j R J_i rho]} + delta_ij Tr[J_i rho],
//              R(omega) = Q (i omega + L)^{-1} Q, P = rho ⊗ 1, Q = 1 - P
//   eigen      S/2I = 1 - 2 sum_k c_k alpha_k / (omega^2 + alpha_k^2)   (diagnostic)
//   macdonald  time-domain integration of the counting-moment equations (oracle)
// plus a zero-frequency finite-difference check on the counting-field generator.
// Charge e = 1 throughout, so S(omega) -> 2 I at high frequency.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseLU>

#include "dqdnoise/error.hpp"
#include "dqdnoise/steady.hpp"
#include "dqdnoise/superop.hpp"

namespace dqdnoise {

enum class NoiseMethod { resolvent, eigen, macdonald };
enum class Normalization { raw, fano };

inline std::string_view to_string(NoiseMethod m) {
    switch (m) {
    case NoiseMethod::resolvent: return "resolvent";
    case NoiseMethod::eigen: return "eigen";
    case NoiseMethod::macdonald: return "macdonald";
    }
    return "?";
}

inline NoiseMethod method_from_string(std::string_view s) {
    for (NoiseMethod m : {NoiseMethod::resolvent, NoiseMethod::eigen, NoiseMethod::macdonald})
        if (to_string(m) == s) return m;
    throw std::invalid_argument("unknown noise method '" + std::string(s) + "'");
}

inline std::string_view to_string(Normalization n) { return n == Normalization::raw ? "raw" : "fano"; }

inline Normalization normalization_from_string(std::string_view s) {
    if (s == "raw") return Normalization::raw;
    if (s == "fano") return Normalization::fano;
    throw std::invalid_argument("unknown normalization '" + std::string(s) + "'");
}

struct ChannelPair {
    Channel i{Channel::e};
    Channel j{Channel::e};

    bool diagonal() const noexcept { return i == j; }
    std::string name() const { return std::string(to_string(i)) + "," + std::string(to_string(j)); }
    bool operator==(const ChannelPair&) const = default;
};

inline ChannelPair pair_from_string(std::string_view s) {
    const auto comma = s.find(',');
    if (comma == std::string_view::npos) throw std::invalid_argument("channel pair must look like 'e,b'");
    ChannelPair p{channel_from_string(s.substr(0, comma)), channel_from_string(s.substr(comma + 1))};
    if (!is_counted(p.i) || !is_counted(p.j))
        throw std::invalid_argument("noise pairs are built from the counted channels e and b");
    return p;
}

struct NoiseSpectrum {
    ChannelPair pair;
    std::vector<double> omegas;
    std::vector<double> values;
    Normalization normalization{Normalization::fano};
    NoiseMethod method{NoiseMethod::resolvent};
};

// Projected resolvent R(omega) with a per-frequency factorization cache.
// Not thread-safe; give each worker its own instance.
class ResolventSolver {
public:
    ResolventSolver(Superoperator L, SteadyState ss)
        : L_(std::move(L)), ss_(std::move(ss)), rho_vec_(vectorize(ss_.rho)), shifted_(L_.total()) {
        shifted_.makeCompressed();
        for (Channel c : kAllChannels) fluxes_[static_cast<int>(c)] = channel_flux(L_.channel(c), ss_);
    }

    const Superoperator& liouvillian() const noexcept { return L_; }
    const SteadyState& steady_state() const noexcept { return ss_; }
    double current(Channel c) const { return fluxes_[static_cast<int>(c)]; }

    // P y = rho Tr[y]
    Vector project_P(const Vector& y) const { return rho_vec_ * vec_trace(y, ss_.dim()); }
    Vector project_Q(const Vector& y) const { return y - project_P(y); }

    // R(omega) y = Q (i omega + L)^{-1} Q y. At omega = 0 the inverse is taken on
    // range Q (traceless matrices) through the trace-augmented system.
    Vector apply(double omega, const Vector& y) {
        Vector qy = project_Q(y);
        if (omega == 0.0) {
            factor_zero();
            qy[0] = 0.0; // trace row: Tr x = 0
            Vector x = lu_zero_.solve(qy);
            check_solution(x, omega);
            return project_Q(x);
        }
        factor(omega);
        Vector x = lu_.solve(qy);
        check_solution(x, omega);
        return project_Q(x);
    }

    // Raw symmetrized S(omega)_{i,j}.
    double noise(Channel i, Channel j, double omega) {
        const Eigen::Index d = ss_.dim();
        const Vector Jj_rho = L_.channel(j) * rho_vec_;
        const cplx t1 = vec_trace(Vector(L_.channel(i) * apply(omega, Jj_rho)), d);
        cplx t2 = t1;
        if (i != j) {
            const Vector Ji_rho = L_.channel(i) * rho_vec_;
            t2 = vec_trace(Vector(L_.channel(j) * apply(omega, Ji_rho)), d);
        }
        double s = -(t1 + t2).real();
        if (i == j) s += current(i);
        return 2.0 * s;
    }

    double noise(ChannelPair p, double omega) { return noise(p.i, p.j, omega); }

private:
    using LU = Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>;

    void factor(double omega) {
        if (have_factor_ && omega == cached_omega_) return;
        shifted_ = L_.total();
        for (Eigen::Index k = 0; k < shifted_.rows(); ++k) shifted_.coeffRef(k, k) += cplx{0.0, omega};
        if (!analyzed_) {
            lu_.analyzePattern(shifted_);
            analyzed_ = true;
        }
        lu_.factorize(shifted_);
        if (lu_.info() != Eigen::Success) fail(omega);
        cached_omega_ = omega;
        have_factor_ = true;
    }

    void factor_zero() {
        if (have_zero_) return;
        const SparseMatrix A = detail::trace_augmented(L_.total(), ss_.dim());
        lu_zero_.analyzePattern(A);
        lu_zero_.factorize(A);
        if (lu_zero_.info() != Eigen::Success) fail(0.0);
        have_zero_ = true;
    }

    void check_solution(const Vector& x, double omega) const {
        if (!x.allFinite()) fail(omega);
    }

    [[noreturn]] static void fail(double omega) {
        std::ostringstream os;
        os << "resolvent: projected system singular at omega = " << omega;
        throw NumericalError(os.str());
    }

    Superoperator L_;
    SteadyState ss_;
    Vector rho_vec_;
    double fluxes_[4]{};
    SparseMatrix shifted_;
    LU lu_;
    LU lu_zero_;
    bool analyzed_{false};
    bool have_factor_{false};
    bool have_zero_{false};
    double cached_omega_{0.0};
};

inline double noise_resolvent(const Superoperator& L, const SteadyState& ss, Channel i, Channel j, double omega) {
    ResolventSolver solver(L, ss);
    return solver.noise(i, j, omega);
}

inline double normalize_noise(double raw, ChannelPair pair, Normalization n, double current_i) {
    if (n == Normalization::raw) return raw;
    if (!pair.diagonal()) throw std::invalid_argument("fano normalization is defined for i = j only");
    if (!(std::abs(current_i) > 0.0)) throw NumericalError("fano normalization with zero current");
    return raw / (2.0 * current_i);
}

inline NoiseSpectrum noise_spectrum_resolvent(ResolventSolver& solver, ChannelPair pair,
                                              const std::vector<double>& omegas, Normalization n) {
    NoiseSpectrum out{pair, omegas, {}, n, NoiseMethod::resolvent};
    out.values.reserve(omegas.size());
    for (double w : omegas) out.values.push_back(normalize_noise(solver.noise(pair, w), pair, n, solver.current(pair.i)));
    return out;
}

// Eigen-expansion weights c_k = (1^T J r_k)(l_k . J rho) / I with r_k, l_k the
// right/left eigenvectors; summed over all k except the stationary one.
class EigenExpansion {
public:
    EigenExpansion(const Superoperator& L, Channel channel) {
        const LiouvillianSpectrum& sp = L.spectrum();
        if (!sp.diagonalizable())
            throw NumericalError("eigen-expansion unavailable: Liouvillian not diagonalizable within tolerance");
        const Eigen::Index d = L.dim_rho();
        Vector rho = sp.right.col(sp.zero_index);
        rho /= vec_trace(rho, d);
        const SparseMatrix& J = L.channel(channel);
        const Vector J_rho = J * rho;
        current_ = vec_trace(J_rho, d).real();
        if (!(current_ > 0.0)) throw NumericalError("eigen-expansion needs a nonzero current");
        const Vector left_J_rho = sp.left * J_rho;
        const Eigen::RowVectorXcd trJ = trace_functional(d).transpose() * J;
        const Eigen::RowVectorXcd trJ_right = trJ * sp.right;
        for (Eigen::Index k = 0; k < sp.alphas.size(); ++k) {
            if (k == sp.zero_index) continue;
            alphas_.push_back(sp.alphas[k]);
            weights_.push_back(trJ_right[k] * left_J_rho[k] / current_);
        }
    }

    double current() const noexcept { return current_; }

    // Normalized S/2I, complex before the conjugate-pair cancellation.
    cplx evaluate(double omega) const {
        cplx sum{0.0, 0.0};
        for (std::size_t k = 0; k < alphas_.size(); ++k)
            sum += weights_[k] * alphas_[k] / (omega * omega + alphas_[k] * alphas_[k]);
        return 1.0 - 2.0 * sum;
    }

private:
    std::vector<cplx> alphas_;
    std::vector<cplx> weights_;
    double current_{0.0};
};

struct EigenNoiseValue {
    double value;             // normalized S/2I
    double imaginary_residue; // discarded
    bool warning;             // residue above 1e-8
};

inline EigenNoiseValue noise_eigen_expansion(const EigenExpansion& ex, double omega) {
    const cplx v = ex.evaluate(omega);
    return {v.real(), std::abs(v.imag()), std::abs(v.imag()) > 1e-8};
}

inline EigenNoiseValue noise_eigen_expansion(const Superoperator& L, Channel channel, double omega) {
    return noise_eigen_expansion(EigenExpansion(L, channel), omega);
}

struct MacDonaldOptions {
    double t_max{0.0};              // integration horizon
    double dt{0.02};                // RK4 step
    double tail_tolerance{1e-7};    // admissible remaining integral, relative to |S|
    double max_extension{4.0};      // horizon may grow to max_extension * t_max before failing
};

struct MacDonaldResult {
    double value;          // raw S(omega)
    double t_used;
    double tail_estimate;  // estimated remaining integral beyond t_used, relative
};

// Slowest relaxation rate, for choosing t_max (uses the cached dense spectrum).
inline double slowest_relaxation_rate(const Superoperator& L) {
    const LiouvillianSpectrum& sp = L.spectrum();
    double slow = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < sp.alphas.size(); ++k)
        if (k != sp.zero_index) slow = std::min(slow, std::abs(sp.alphas[k].real()));
    return slow;
}

// Horizon 16 / slowest rate (tail below e^-16 of the slowest mode's weight) and a
// step resolving the fastest mode. The 0.1 cap keeps the RK4 error near 1e-6
// relative for modes at the resonator frequency.
inline MacDonaldOptions auto_macdonald_options(const Superoperator& L) {
    const LiouvillianSpectrum& sp = L.spectrum();
    double slow = std::numeric_limits<double>::infinity();
    double fast = 0.0;
    for (Eigen::Index k = 0; k < sp.alphas.size(); ++k) {
        if (k == sp.zero_index) continue;
        slow = std::min(slow, std::abs(sp.alphas[k].real()));
        fast = std::max(fast, std::abs(sp.alphas[k]));
    }
    if (!(slow > 0) || !std::isfinite(slow))
        throw NumericalError("macdonald: a relaxation mode does not decay; no finite horizon exists");
    MacDonaldOptions o;
    o.t_max = 16.0 / slow;
    o.dt = std::min(0.1, 1.0 / std::max(fast, 1e-300));
    return o;
}

// MacDonald route: with n_i the counted jumps, S/(2 omega) = int_0^inf sin(omega tau)
// d/dtau(<n_i n_j> - tau^2 I_i I_j). One integration by parts gives
//   S/2 = delta_ij I_i + int_0^inf cos(omega tau) f'(tau) dtau,
//   f'(tau) = Tr[J_i rho_j'] + Tr[J_j rho_i'] - 2 I_i I_j,
// where rho_i(tau) = sum_n n_i rho^(n) obeys d rho_i/dtau = L rho_i + J_i rho_ss with
// rho_i(0) = 0. The secular part is removed exactly: sigma_i = rho_i - I_i tau rho_ss obeys
//   d sigma_i/dtau = L sigma_i + (J_i - I_i) rho_ss,   f' = Tr[J_i sigma_j'] + Tr[J_j sigma_i'],
// so f' decays to a true round-off floor instead of a cancellation that grows with tau.
// sigma and the cosine integral are stepped by fixed-step RK4; no inverse is formed.
inline MacDonaldResult noise_macdonald_oracle(const Superoperator& L, const SteadyState& ss, Channel i, Channel j,
                                              double omega, const MacDonaldOptions& opt) {
    if (!(opt.t_max > 0) || !(opt.dt > 0) || opt.dt > opt.t_max || !(opt.max_extension >= 1.0))
        throw std::invalid_argument("macdonald: need 0 < dt <= t_max and max_extension >= 1");
    const SparseMatrix& M = L.total();
    const SparseMatrix& Ji = L.channel(i);
    const SparseMatrix& Jj = L.channel(j);
    const Eigen::Index d = ss.dim();
    const bool same = (i == j);
    const double Ii = channel_flux(Ji, ss);
    const double Ij = channel_flux(Jj, ss);
    const Vector rho = vectorize(ss.rho);
    const Vector src_i = Ji * rho - Ii * rho;
    const Vector src_j = same ? Vector() : Vector(Jj * rho - Ij * rho);

    struct State {
        Vector sig_i, sig_j;
        double acc{0.0};
    };
    auto tr = [d](const Vector& v) { return vec_trace(v, d).real(); };

    // returns derivative and f'(tau)
    auto deriv = [&](double tau, const State& s, State& ds, double& fprime) {
        ds.sig_i = M * s.sig_i + src_i;
        if (!same) ds.sig_j = M * s.sig_j + src_j;
        const Vector& dj = same ? ds.sig_i : ds.sig_j;
        fprime = tr(Ji * dj) + tr(Jj * ds.sig_i);
        ds.acc = std::cos(omega * tau) * fprime;
    };
    auto axpy = [same](const State& s, double h, const State& k) {
        State out;
        out.sig_i = s.sig_i + h * k.sig_i;
        if (!same) out.sig_j = s.sig_j + h * k.sig_j;
        out.acc = s.acc + h * k.acc;
        return out;
    };

    State s;
    s.sig_i = Vector::Zero(rho.size());
    if (!same) s.sig_j = Vector::Zero(rho.size());

    const auto steps0 = static_cast<long>(std::ceil(opt.t_max / opt.dt));
    const double h = opt.t_max / static_cast<double>(steps0);
    const double t_cap = opt.max_extension * opt.t_max;
    // envelope of |f'| over fixed-length windows for the tail test
    const long window = std::max<long>(1, steps0 / 20);
    const double wlen = static_cast<double>(window) * h;
    double env_prev = 0.0, env_last = 0.0, env_cur = 0.0, env_first = 0.0;

    State k1, k2, k3, k4;
    double f1 = 0, f2 = 0, f3 = 0, f4 = 0;
    double tau = 0.0;
    long n = 0;
    long target = steps0;
    for (;;) {
        for (; n < target; ++n) {
            deriv(tau, s, k1, f1);
            deriv(tau + 0.5 * h, axpy(s, 0.5 * h, k1), k2, f2);
            deriv(tau + 0.5 * h, axpy(s, 0.5 * h, k2), k3, f3);
            deriv(tau + h, axpy(s, h, k3), k4, f4);
            s.sig_i += (h / 6.0) * (k1.sig_i + 2.0 * k2.sig_i + 2.0 * k3.sig_i + k4.sig_i);
            if (!same) s.sig_j += (h / 6.0) * (k1.sig_j + 2.0 * k2.sig_j + 2.0 * k3.sig_j + k4.sig_j);
            s.acc += (h / 6.0) * (k1.acc + 2.0 * k2.acc + 2.0 * k3.acc + k4.acc);
            tau = static_cast<double>(n + 1) * h;
            env_cur = std::max(env_cur, std::abs(f4));
            if ((n + 1) % window == 0) {
                if (n + 1 == window) env_first = env_cur;
                env_prev = env_last;
                env_last = env_cur;
                env_cur = 0.0;
            }
        }

        const double half = (same ? Ii : 0.0) + s.acc;
        // shot-noise scale keeps the tail test meaningful when S itself vanishes (g = 0 cross pair)
        const double scale = std::max({std::abs(half), std::sqrt(Ii * Ij), 1e-300});
        // Remaining integral of an exponentially decaying envelope: A / rate.
        double remaining;
        double rate = 0.0;
        if (env_last == 0.0) {
            remaining = 0.0;
        } else if (env_last <= 1e-12 * env_first || env_last * wlen <= 1e-12 * scale) {
            // integrand has decayed into round-off, where the window envelope no longer shrinks;
            // the second test covers integrands that start at round-off (a channel that never fires)
            remaining = env_last * wlen;
        } else if (env_prev > env_last) {
            rate = std::log(env_prev / env_last) / wlen;
            remaining = env_last / rate;
        } else {
            remaining = std::numeric_limits<double>::infinity();
        }
        const double rel_tail = remaining / scale;
        if (rel_tail <= opt.tail_tolerance) return {2.0 * half, tau, rel_tail};

        double suggest = 2.0 * tau;
        if (rate > 0 && std::isfinite(rel_tail)) suggest = tau + std::log(rel_tail / opt.tail_tolerance) / rate + wlen;
        if (tau >= t_cap * (1.0 - 1e-12) || !std::isfinite(suggest)) {
            std::ostringstream os;
            os << "macdonald: integral not converged at t = " << tau << " (relative tail " << rel_tail << "); try t_max >= "
               << suggest;
            throw NumericalError(os.str());
        }
        // continue on the same step grid; whole windows keep the envelope bookkeeping aligned
        const double next = std::min(suggest, t_cap);
        target = static_cast<long>(std::ceil(next / h / static_cast<double>(window))) * window;
        target = std::max(target, n + window);
    }
}

// Abel-regularized sine transform of the linear term 2 tau I_i I_j that the
// generating-function form leaves out: int_0^inf sin(omega tau) 2 tau c e^{-eta tau} dtau,
// computed by the same fixed-step quadrature used above. Tends to 0 as eta -> 0 for omega != 0.
inline double omitted_linear_term(double omega, double coefficient, double eta, double dt) {
    if (!(eta > 0) || !(dt > 0)) throw std::invalid_argument("need eta > 0 and dt > 0");
    const double t_end = 40.0 / eta;
    const auto steps = static_cast<long>(std::ceil(t_end / dt));
    const double h = t_end / static_cast<double>(steps);
    auto f = [&](double t) { return std::sin(omega * t) * 2.0 * t * coefficient * std::exp(-eta * t); };
    double sum = 0.5 * (f(0.0) + f(t_end));
    for (long n = 1; n < steps; ++n) sum += f(static_cast<double>(n) * h);
    return sum * h;
}

struct CountingCheck {
    double noise;             // raw S(0) = 2 (d_si d_sj + delta_ij d_si) lambda
    double second_derivative; // d_si d_sj lambda
    double first_derivative;  // d_si lambda (equals I_i)
    double step;
};

namespace detail {

// Stationary eigenvalue of M(s) via lambda = sum_c (s_c - 1) Tr[J_c v] / Tr[v],
// which follows from 1^T L = 0. v comes from inverse iteration.
inline double counting_eigenvalue(const Superoperator& L, const std::map<Channel, double>& s, const Vector& guess) {
    bool trivial = true;
    for (const auto& [c, val] : s)
        if (val != 1.0) trivial = false;
    if (trivial) return 0.0;

    const Superoperator Ms = counting_liouvillian(L, s);
    const Eigen::Index d = L.dim_rho();

    auto lambda_of = [&](const Vector& v) {
        const cplx tv = vec_trace(v, d);
        cplx sum{0.0, 0.0};
        for (const auto& [c, val] : s)
            if (val != 1.0) sum += (val - 1.0) * vec_trace(Vector(L.channel(c) * v), d);
        return (sum / tv).real();
    };

    // Unshifted first. A channel that never fires leaves M(s) exactly singular
    // (lambda = 0), so the retry shifts by a tiny positive amount; the iteration
    // still converges to the eigenvalue closest to zero.
    const double tiny = 1e-10 * Ms.total().coeffs().cwiseAbs().maxCoeff();
    for (double shift : {0.0, tiny}) {
        SparseMatrix A = Ms.total();
        if (shift != 0.0) {
            SparseMatrix I(A.rows(), A.cols());
            I.setIdentity();
            A -= cplx{shift, 0.0} * I;
        }
        Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
        lu.analyzePattern(A);
        lu.factorize(A);
        if (lu.info() != Eigen::Success) continue;

        Vector v = guess;
        double lam = lambda_of(v);
        bool ok = true;
        for (int it = 0; it < 50; ++it) {
            Vector next = lu.solve(v);
            const cplx tn = vec_trace(next, d);
            if (!next.allFinite() || std::abs(tn) == 0.0) {
                ok = false;
                break;
            }
            next /= tn;
            const double lam_next = lambda_of(next);
            const double change = std::abs(lam_next - lam);
            v = std::move(next);
            lam = lam_next;
            if (change <= 1e-15 * std::abs(lam) && it > 0) break;
        }
        if (ok) return lam;
    }
    throw NumericalError("counting check: M(s) is singular and shifted inverse iteration failed");
}

inline CountingCheck counting_fd(const Superoperator& L, const SteadyState& ss, Channel i, Channel j, double h) {
    const Vector guess = vectorize(ss.rho);
    auto lam = [&](double si, double sj) {
        std::map<Channel, double> s;
        if (i == j) {
            s[i] = si;
        } else {
            s[i] = si;
            s[j] = sj;
        }
        return counting_eigenvalue(L, s, guess);
    };
    CountingCheck out{};
    out.step = h;
    if (i == j) {
        const double lp = lam(1.0 + h, 1.0);
        const double lm = lam(1.0 - h, 1.0);
        out.second_derivative = (lp + lm) / (h * h);
        out.first_derivative = (lp - lm) / (2.0 * h);
        out.noise = 2.0 * (out.second_derivative + out.first_derivative);
    } else {
        const double pp = lam(1.0 + h, 1.0 + h), pm = lam(1.0 + h, 1.0 - h);
        const double mp = lam(1.0 - h, 1.0 + h), mm = lam(1.0 - h, 1.0 - h);
        out.second_derivative = (pp - pm - mp + mm) / (4.0 * h * h);
        out.first_derivative = (lam(1.0 + h, 1.0) - lam(1.0 - h, 1.0)) / (2.0 * h);
        out.noise = 2.0 * out.second_derivative;
    }
    return out;
}

} // namespace detail

// Zero-frequency S_{i,j} from central finite differences of the stationary
// eigenvalue of the counting generator M(s) at s = 1. Retries with a wider step
// when the step-halving estimates disagree.
inline CountingCheck counting_fd_check(const Superoperator& L, const SteadyState& ss, Channel i, Channel j,
                                       double h = 1e-4) {
    if (!is_counted(i) || !is_counted(j)) throw std::invalid_argument("counting check needs counted channels");
    for (double step : {h, 10.0 * h, 100.0 * h}) {
        const CountingCheck a = detail::counting_fd(L, ss, i, j, step);
        const CountingCheck b = detail::counting_fd(L, ss, i, j, 0.5 * step);
        const double scale = std::max({std::abs(a.noise), std::abs(b.noise), 1e-300});
        // central differences: the halved step is four times more accurate
        if (std::abs(a.noise - b.noise) <= 1e-5 * scale || std::abs(a.noise - b.noise) <= 1e-14) {
            CountingCheck r = a;
            r.noise = (4.0 * b.noise - a.noise) / 3.0;
            r.second_derivative = (4.0 * b.second_derivative - a.second_derivative) / 3.0;
            r.first_derivative = (4.0 * b.first_derivative - a.first_derivative) / 3.0;
            return r;
        }
    }
    throw NumericalError("counting check: finite differences ill-conditioned for all steps tried");
}

struct Peak {
    double omega;
    double height;
};

// Strict three-point local maxima, refined by the parabola through the three samples.
inline std::vector<Peak> find_peaks(const std::vector<double>& omegas, const std::vector<double>& values) {
    if (omegas.size() != values.size()) throw std::invalid_argument("find_peaks: size mismatch");
    std::vector<Peak> peaks;
    for (std::size_t k = 1; k + 1 < values.size(); ++k) {
        const double y0 = values[k - 1], y1 = values[k], y2 = values[k + 1];
        if (!(y1 > y0 && y1 > y2)) continue;
        const double x0 = omegas[k - 1], x1 = omegas[k], x2 = omegas[k + 1];
        // Lagrange parabola vertex
        const double d01 = (y1 - y0) / (x1 - x0);
        const double d12 = (y2 - y1) / (x2 - x1);
        const double a = (d12 - d01) / (x2 - x0);
        Peak p{x1, y1};
        if (a < 0) {
            const double b = d01 - a * (x0 + x1);
            const double xv = -b / (2.0 * a);
            if (xv > x0 && xv < x2) {
                p.omega = xv;
                p.height = a * xv * xv + b * xv + (y0 - a * x0 * x0 - b * x0);
            }
        }
        peaks.push_back(p);
    }
    return peaks;
}

inline std::vector<Peak> find_peaks(const NoiseSpectrum& s) { return find_peaks(s.omegas, s.values); }

// Peak closest to target, if any.
inline std::optional<Peak> nearest_peak(const std::vector<Peak>& peaks, double target) {
    std::optional<Peak> best;
    for (const Peak& p : peaks)
        if (!best || std::abs(p.omega - target) < std::abs(best->omega - target)) best = p;
    return best;
}

inline std::vector<double> linspace(double start, double stop, int count) {
    if (count < 2) throw std::invalid_argument("linspace needs count >= 2");
    std::vector<double> out(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) out[static_cast<std::size_t>(k)] = start + (stop - start) * k / (count - 1);
    return out;
}

} // namespace dqdnoise
