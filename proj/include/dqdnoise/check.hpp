// check.hpp: self-check suite over analytic limits, structural invariants of the
// generator and spectra, and the cross-method triangle, evaluated on figure presets.

#pragma once

#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dqdnoise/io.hpp"
#include "dqdnoise/model.hpp"
#include "dqdnoise/noise.hpp"
#include "dqdnoise/steady.hpp"
#include "dqdnoise/superop.hpp"
#include "dqdnoise/sweep.hpp"

namespace dqdnoise {

struct CheckRow {
    std::string name;
    std::string scope;
    double measured{0.0}; // error or margin; compared with tolerance
    double tolerance{0.0};
    bool passed{false};
    std::string detail;
};

struct CheckReport {
    std::vector<CheckRow> rows;

    bool all_passed() const {
        return std::all_of(rows.begin(), rows.end(), [](const CheckRow& r) { return r.passed; });
    }
    std::size_t failures() const {
        return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [](const CheckRow& r) { return !r.passed; }));
    }

    std::string table() const {
        std::ostringstream os;
        char buf[256];
        std::snprintf(buf, sizeof buf, "%-4s  %-34s  %-26s  %-12s  %-9s  %s\n", "ok", "invariant", "scope", "measured",
                      "tolerance", "detail");
        os << buf;
        for (const CheckRow& r : rows) {
            std::snprintf(buf, sizeof buf, "%-4s  %-34s  %-26s  %-12.3e  %-9.1e  %s\n", r.passed ? "PASS" : "FAIL",
                          r.name.c_str(), r.scope.c_str(), r.measured, r.tolerance, r.detail.c_str());
            os << buf;
        }
        os << (all_passed() ? "all invariants passed" : std::to_string(failures()) + " invariant(s) failed") << " ("
           << rows.size() << " checks)\n";
        return os.str();
    }
};

// Reduced cutoffs: dense spectra scale as D^6 and the time-domain oracle as its
// horizon; both properties hold at any truncation.
inline constexpr int kSpectralCheckCutoff = 6;
inline constexpr int kTriangleCutoff = 4;

struct SamplePoint {
    ModelParams params;
    double omega;
    std::string label;
};

// Five points per preset: evenly spaced along a single parameter axis, or the
// four corners plus the centre of a two-parameter grid. The production cutoff is
// applied by the caller.
inline std::vector<SamplePoint> preset_samples(const SweepSpec& spec) {
    std::vector<const AxisSpec*> params;
    const AxisSpec* omega_axis = nullptr;
    for (const AxisSpec& a : spec.axes) {
        if (a.axis == Axis::omega) omega_axis = &a;
        else params.push_back(&a);
    }
    auto pick = [](const std::vector<double>& g, double frac) {
        return g[static_cast<std::size_t>(std::lround(frac * static_cast<double>(g.size() - 1)))];
    };
    const double fracs[5] = {0.0, 0.25, 0.5, 0.75, 1.0};
    const std::vector<double> omegas = omega_axis ? omega_axis->grid() : std::vector<double>{};
    std::vector<SamplePoint> out;
    auto label = [](const ModelParams& p, double w) {
        std::ostringstream os;
        os << "g=" << p.g << " d=" << p.delta << " e=" << p.epsilon << " T=" << p.temperature << " w=" << w;
        return os.str();
    };
    for (int k = 0; k < 5; ++k) {
        ModelParams p = spec.base;
        if (params.size() == 1) {
            apply_axis(p, params[0]->axis, pick(params[0]->grid(), fracs[k]));
        } else if (params.size() == 2) {
            const double f1 = k == 4 ? 0.5 : (k / 2 == 0 ? 0.0 : 1.0);
            const double f2 = k == 4 ? 0.5 : (k % 2 == 0 ? 0.0 : 1.0);
            apply_axis(p, params[0]->axis, pick(params[0]->grid(), f1));
            apply_axis(p, params[1]->axis, pick(params[1]->grid(), f2));
        }
        // fixed mid-band frequency for pure parameter grids keeps the check at finite omega
        const double w = omega_axis ? pick(omegas, fracs[(k + 2) % 5]) : (spec.omega != 0.0 ? spec.omega : 0.5);
        out.push_back({p, w, label(p, w)});
    }
    return out;
}

namespace detail {

inline CheckRow make_row(std::string name, std::string scope, double measured, double tol, std::string detail = {}) {
    return {std::move(name), std::move(scope), measured, tol, measured <= tol, std::move(detail)};
}

// Hermitian random matrix with a fixed seed.
inline Matrix random_hermitian(Eigen::Index d, std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Matrix m(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) m(i, j) = cplx{n(rng), n(rng)};
    return 0.5 * (m + m.adjoint());
}

// Single resonant level: 0 -> R at Gamma_L (counted as in), R -> 0 at Gamma_R (counted as e).
inline Superoperator single_level_liouvillian(double gamma_L, double gamma_R) {
    Matrix fill = Matrix::Zero(2, 2), empty = Matrix::Zero(2, 2);
    fill(1, 0) = 1.0;
    empty(0, 1) = 1.0;
    return lindblad_superoperator(Matrix::Zero(2, 2), {{Channel::in, fill, gamma_L}, {Channel::e, empty, gamma_R}});
}

} // namespace detail

// Closed-form limits: thermal occupation, decoupled thermal resonator moments,
// g = 0 factorization, single-level Fano factor, charge conservation.
inline void check_analytic_limits(CheckReport& rep) {
    using detail::make_row;
    const double expected_nbar[3] = {0.0, 0.5819767, 1.5414941};
    for (int k = 0; k < 3; ++k) {
        const double T = static_cast<double>(k);
        rep.rows.push_back(make_row("thermal_occupation", "T=" + std::to_string(k),
                                    std::abs(thermal_occupation(1.0, T) - expected_nbar[k]), 5e-8));
    }

    for (double T : {0.5, 1.0, 2.0}) {
        const double nbar = thermal_occupation(1.0, T);
        ModelParams p;
        p.delta = 0.5;
        p.gamma_L = p.gamma_R = 0.01;
        p.gamma_b = 0.05;
        p.temperature = T;
        // geometric tail (nbar/(1+nbar))^N below 1e-15
        p.n_fock = static_cast<int>(std::ceil(std::log(1e-15) / std::log(nbar / (1.0 + nbar)))) + 5;
        const Superoperator L = build_model_liouvillian(p);
        const SteadyState ss = solve_steady_state(L);
        std::ostringstream scope;
        scope << "g=0 T=" << T;
        rep.rows.push_back(make_row("fano_q = 1 + nbar", scope.str(), std::abs(fano_number(ss).value - (1.0 + nbar)), 1e-8));
        double worst = 0.0;
        const QuadratureMoments m = quadrature_moments(ss);
        for (int s = 0; s < 16; ++s)
            worst = std::max(worst, std::abs(quadrature_variance(m, s * std::numbers::pi / 16) - 2.0 * nbar));
        rep.rows.push_back(make_row("quadrature variance = 2 nbar", scope.str(), worst, 1e-8));

        // rho_ss = rho_dot ⊗ rho_thermal
        const Eigen::Index nf = p.n_fock + 1;
        Matrix dot = Matrix::Zero(3, 3);
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                for (Eigen::Index n = 0; n < nf; ++n) dot(a, b) += ss.rho(a * nf + n, b * nf + n);
        Matrix thermal = Matrix::Zero(nf, nf);
        const double x = nbar / (1.0 + nbar);
        double z = 0.0;
        for (Eigen::Index n = 0; n < nf; ++n) z += std::pow(x, static_cast<double>(n));
        for (Eigen::Index n = 0; n < nf; ++n) thermal(n, n) = std::pow(x, static_cast<double>(n)) / z;
        rep.rows.push_back(make_row("g=0 factorization", scope.str(), (ss.rho - detail::kron(dot, thermal)).cwiseAbs().maxCoeff(), 1e-8));
    }

    for (auto [gl, gr] : {std::pair{0.01, 0.01}, std::pair{0.1, 0.001}, std::pair{0.3, 0.7}}) {
        const Superoperator L = detail::single_level_liouvillian(gl, gr);
        const SteadyState ss = solve_steady_state(L);
        ResolventSolver solver(L, ss);
        const double fano = solver.noise(Channel::e, Channel::e, 0.0) / (2.0 * solver.current(Channel::e));
        const double expected = (gl * gl + gr * gr) / ((gl + gr) * (gl + gr));
        std::ostringstream scope;
        scope << "GL=" << gl << " GR=" << gr;
        rep.rows.push_back(make_row("single-level S(0)/2I", scope.str(), std::abs(fano - expected), 1e-10));
    }

    // JC spectroscopy oracles
    {
        ModelParams p;
        p.delta = 0.5;
        p.g = 0.2;
        p.n_fock = 4;
        const HilbertSpace space = HilbertSpace::transport(p.n_fock);
        const Matrix H = build_jc_hamiltonian(p, space);
        const EnergySpectrum es = charge_sector_spectrum(H, space);
        const MultipletEnergies m = jc_multiplet_energies(p, 0);
        const double err = std::max(std::abs(es.eigenvalues[1] - m.minus), std::abs(es.eigenvalues[2] - m.plus));
        rep.rows.push_back(make_row("JC doublet = multiplet energies", "d=0.5 g=0.2", err, 1e-10));
        const ResonanceBranches rb = resonance_branches(ModelParams{0, 0.5, 0.4, 1.0});
        rep.rows.push_back(make_row("resonance branches 2d+-g, 2d", "d=0.5 g=0.4",
                                    std::max({std::abs(rb.upper - 1.4), std::abs(rb.lower - 0.6), std::abs(rb.central - 1.0)}),
                                    1e-15));
    }
}

// Generator, steady-state and spectrum invariants at one parameter point.
inline void check_structural(CheckReport& rep, const SamplePoint& sp, int cutoff, const std::string& tag) {
    using detail::make_row;
    ModelParams p = sp.params;
    p.n_fock = cutoff;
    const std::string scope = tag;
    const Superoperator L = build_model_liouvillian(p);
    const Eigen::Index d = L.dim_rho();

    const Eigen::RowVectorXcd left = trace_functional(d).transpose() * L.total();
    rep.rows.push_back(make_row("trace preservation", scope, left.cwiseAbs().maxCoeff(), 1e-10));

    std::mt19937_64 rng(0x5eed);
    double herm = 0.0, trace = 0.0;
    for (int k = 0; k < 3; ++k) {
        const Matrix rho = detail::random_hermitian(d, rng);
        const Matrix out = L.apply(rho);
        herm = std::max(herm, (out - out.adjoint()).cwiseAbs().maxCoeff());
        trace = std::max(trace, std::abs(out.trace()));
    }
    rep.rows.push_back(make_row("hermiticity preservation", scope, herm, 1e-10));
    rep.rows.push_back(make_row("trace of L(rho) vanishes", scope, trace, 1e-10));

    const SparseMatrix diff = L.assemble() - L.total();
    rep.rows.push_back(make_row("channel completeness", scope, diff.nonZeros() ? diff.coeffs().cwiseAbs().maxCoeff() : 0.0, 0.0));

    const SteadyState ss = solve_steady_state(L);
    rep.rows.push_back(make_row("steady residual", scope, ss.residual, kResidualTolerance));
    rep.rows.push_back(make_row("steady positivity", scope, std::max(0.0, -ss.min_eigenvalue), kPositivityTolerance));
    rep.rows.push_back(make_row("steady unit trace", scope, std::abs(ss.rho.trace() - 1.0), 1e-12));
    const Currents c = currents(ss, L);
    rep.rows.push_back(make_row("charge conservation I_in = I_e", scope, std::abs(c.inflow - c.electron), 1e-10));
    rep.rows.push_back(make_row("quadrature variance >= 0", scope, std::max(0.0, -min_quadrature_variance(ss).value), 1e-9));

    ResolventSolver solver(L, ss);
    double sym = 0.0;
    for (ChannelPair pr : {ChannelPair{Channel::e, Channel::e}, ChannelPair{Channel::b, Channel::b}, ChannelPair{Channel::e, Channel::b}}) {
        const double w = sp.omega == 0.0 ? 0.5 : sp.omega;
        sym = std::max(sym, std::abs(solver.noise(pr, w) - solver.noise(pr, -w)));
    }
    rep.rows.push_back(make_row("S(w) = S(-w)", scope, sym, 1e-8));
    if (c.electron > kCurrentFloor) {
        const double hi = solver.noise(Channel::e, Channel::e, 1e3 * p.omega_b) / (2.0 * c.electron);
        rep.rows.push_back(make_row("high-frequency S_ee/2I_e -> 1", scope, std::abs(hi - 1.0), 1e-3));
    }

    ModelParams ps = p;
    ps.n_fock = std::min(cutoff, kSpectralCheckCutoff);
    const Superoperator Ls = build_model_liouvillian(ps);
    const LiouvillianSpectrum& spec = Ls.spectrum();
    const std::string sscope = scope + " N=" + std::to_string(ps.n_fock);
    rep.rows.push_back(make_row("eigenvalues in left half-plane", sscope, std::max(0.0, spec.max_real_part), 1e-10));
    rep.rows.push_back(make_row("unique stationary eigenvalue", sscope, std::abs(spec.near_zero_count - 1), 0.0,
                                std::to_string(spec.near_zero_count) + " with |alpha| <= 1e-8"));
    double conj = 0.0;
    for (Eigen::Index k = 0; k < spec.alphas.size(); ++k) {
        if (std::abs(spec.alphas[k].imag()) < 1e-8) continue;
        double best = INFINITY;
        for (Eigen::Index l = 0; l < spec.alphas.size(); ++l) best = std::min(best, std::abs(spec.alphas[l] - std::conj(spec.alphas[k])));
        conj = std::max(conj, best);
    }
    rep.rows.push_back(make_row("conjugate eigenvalue pairs", sscope, conj, 1e-10));
}

struct TriangleResult {
    double resolvent;
    double macdonald;
    double resolvent_zero;
    double counting;
};

// Resolvent against the time-domain oracle (at omega) and against counting-field
// finite differences (at omega = 0).
inline TriangleResult method_triangle(const ModelParams& p, ChannelPair pair, double omega, int triangle_cutoff) {
    TriangleResult t{};
    {
        const Superoperator L = build_model_liouvillian(p);
        const SteadyState ss = solve_steady_state(L);
        ResolventSolver solver(L, ss);
        t.resolvent_zero = solver.noise(pair, 0.0);
        t.counting = counting_fd_check(L, ss, pair.i, pair.j).noise;
    }
    ModelParams q = p;
    q.n_fock = std::min(p.n_fock, triangle_cutoff);
    const Superoperator L = build_model_liouvillian(q);
    const SteadyState ss = solve_steady_state(L);
    ResolventSolver solver(L, ss);
    t.resolvent = solver.noise(pair, omega);
    t.macdonald = noise_macdonald_oracle(L, ss, pair.i, pair.j, omega, auto_macdonald_options(L)).value;
    return t;
}

inline double relative_error(double a, double b) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

inline ChannelPair preset_pair(const SweepSpec& s) {
    switch (s.quantities.front()) {
    case Quantity::S_bb: return {Channel::b, Channel::b};
    case Quantity::S_eb: return {Channel::e, Channel::b};
    default: return {Channel::e, Channel::e};
    }
}

inline void check_triangle(CheckReport& rep, const SweepSpec& spec, int cutoff) {
    const ChannelPair pair = preset_pair(spec);
    for (const SamplePoint& sp : preset_samples(spec)) {
        ModelParams p = sp.params;
        p.n_fock = cutoff;
        const std::string scope = spec.preset + " " + sp.label;
        try {
            const TriangleResult t = method_triangle(p, pair, sp.omega, kTriangleCutoff);
            // pairs with no counted flux (g = 0 phonon noise) are compared absolutely
            const bool tiny = std::max(std::abs(t.resolvent), std::abs(t.macdonald)) < 1e-12;
            rep.rows.push_back(detail::make_row("resolvent vs macdonald (" + pair.name() + ")", scope,
                                                tiny ? std::abs(t.resolvent - t.macdonald) : relative_error(t.resolvent, t.macdonald),
                                                tiny ? 1e-12 : 1e-5));
            const bool tiny0 = std::max(std::abs(t.resolvent_zero), std::abs(t.counting)) < 1e-12;
            rep.rows.push_back(detail::make_row("resolvent(0) vs counting fd", scope,
                                                tiny0 ? std::abs(t.resolvent_zero - t.counting)
                                                      : relative_error(t.resolvent_zero, t.counting),
                                                tiny0 ? 1e-10 : 1e-4));
        } catch (const std::exception& e) {
            rep.rows.push_back({"method triangle", scope, INFINITY, 0.0, false, e.what()});
        }
    }
}

// fast: analytic limits plus structural invariants on the fig2 preset.
// full: every preset, plus the method triangle.
inline CheckReport run_checks(CheckLevel level, const std::vector<std::string>& presets = {},
                              const std::function<void(const std::string&)>& progress = {}) {
    CheckReport rep;
    check_analytic_limits(rep);
    std::vector<std::string> names = presets;
    if (names.empty()) names = level == CheckLevel::fast ? std::vector<std::string>{"fig2"} : preset_names();
    for (const std::string& name : names) {
        if (progress) progress(name);
        const SweepSpec spec = preset(name);
        const int cutoff = sweep_cutoff(spec).cutoff;
        for (const SamplePoint& sp : preset_samples(spec)) {
            try {
                check_structural(rep, sp, cutoff, name + " " + sp.label);
            } catch (const std::exception& e) {
                rep.rows.push_back({"structural", name + " " + sp.label, INFINITY, 0.0, false, e.what()});
            }
        }
        if (level == CheckLevel::full) check_triangle(rep, spec, cutoff);
    }
    return rep;
}

} // namespace dqdnoise
