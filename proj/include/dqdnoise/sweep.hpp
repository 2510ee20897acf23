// sweep.hpp: parameter grids, Fock-cutoff convergence and figure presets.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "dqdnoise/error.hpp"
#include "dqdnoise/model.hpp"
#include "dqdnoise/noise.hpp"
#include "dqdnoise/steady.hpp"
#include "dqdnoise/superop.hpp"

namespace dqdnoise {

enum class Axis { omega, g, delta, epsilon, T };
enum class Quantity { S_ee, S_bb, S_eb, I_e, I_b, F_Q, quad_min };

inline constexpr std::array<Axis, 5> kAllAxes{Axis::omega, Axis::g, Axis::delta, Axis::epsilon, Axis::T};
inline constexpr std::array<Quantity, 7> kAllQuantities{Quantity::S_ee, Quantity::S_bb, Quantity::S_eb, Quantity::I_e,
                                                        Quantity::I_b,  Quantity::F_Q,  Quantity::quad_min};

inline std::string_view to_string(Axis a) {
    switch (a) {
    case Axis::omega: return "omega";
    case Axis::g: return "g";
    case Axis::delta: return "delta";
    case Axis::epsilon: return "epsilon";
    case Axis::T: return "T";
    }
    return "?";
}

inline std::string_view to_string(Quantity q) {
    switch (q) {
    case Quantity::S_ee: return "S_ee";
    case Quantity::S_bb: return "S_bb";
    case Quantity::S_eb: return "S_eb";
    case Quantity::I_e: return "I_e";
    case Quantity::I_b: return "I_b";
    case Quantity::F_Q: return "F_Q";
    case Quantity::quad_min: return "quad_min";
    }
    return "?";
}

inline Axis axis_from_string(std::string_view s) {
    for (Axis a : kAllAxes)
        if (to_string(a) == s) return a;
    throw std::invalid_argument("unknown sweep axis '" + std::string(s) + "'");
}

inline Quantity quantity_from_string(std::string_view s) {
    for (Quantity q : kAllQuantities)
        if (to_string(q) == s) return q;
    throw std::invalid_argument("unknown sweep quantity '" + std::string(s) + "'");
}

inline bool is_noise_quantity(Quantity q) { return q == Quantity::S_ee || q == Quantity::S_bb || q == Quantity::S_eb; }

// Either an evenly spaced range or an explicit value list (values wins when non-empty).
struct AxisSpec {
    Axis axis{Axis::omega};
    double start{0.0};
    double stop{0.0};
    int count{0};
    std::vector<double> values;

    std::vector<double> grid() const {
        if (!values.empty()) return values;
        return linspace(start, stop, count);
    }
    std::size_t size() const { return values.empty() ? static_cast<std::size_t>(std::max(count, 0)) : values.size(); }
    bool operator==(const AxisSpec&) const = default;
};

inline AxisSpec range_axis(Axis a, double start, double stop, int count) { return {a, start, stop, count, {}}; }
inline AxisSpec value_axis(Axis a, std::vector<double> values) { return {a, 0.0, 0.0, 0, std::move(values)}; }

struct SweepSpec {
    std::string preset;             // empty for user-defined sweeps
    ModelParams base;
    std::vector<AxisSpec> axes;     // 1 or 2; axes[0] is the outer (row) index
    std::vector<Quantity> quantities{Quantity::S_ee};
    double omega{0.0};              // noise frequency when omega is not an axis
    int cutoff_start{1};            // first rung of the Fock ladder
    int cutoff_max{40};
    std::optional<int> fixed_cutoff; // skips the ladder when set
    bool fail_fast{false};

    void validate() const {
        base.validate();
        if (axes.empty() || axes.size() > 2) throw std::invalid_argument("sweep needs 1 or 2 axes");
        if (axes.size() == 2 && axes[0].axis == axes[1].axis) throw std::invalid_argument("sweep axes must be distinct");
        for (const AxisSpec& a : axes) {
            if (a.size() < 2) throw std::invalid_argument("sweep axis '" + std::string(to_string(a.axis)) + "': counts >= 2");
            for (double v : a.grid())
                if (!std::isfinite(v)) throw std::invalid_argument("sweep axis values must be finite");
            if (a.axis == Axis::T)
                for (double v : a.grid())
                    if (v < 0) throw std::invalid_argument("sweep axis T must be >= 0");
        }
        if (quantities.empty()) throw std::invalid_argument("sweep needs at least one quantity");
        if (cutoff_start < 1 || cutoff_max < cutoff_start) throw std::invalid_argument("need 1 <= cutoff_start <= cutoff_max");
        if (fixed_cutoff && *fixed_cutoff < 1) throw std::invalid_argument("fock cutoff must be >= 1");
    }

    bool has_axis(Axis a) const {
        return std::any_of(axes.begin(), axes.end(), [a](const AxisSpec& s) { return s.axis == a; });
    }
    bool operator==(const SweepSpec&) const = default;
};

inline void apply_axis(ModelParams& p, Axis a, double v) {
    switch (a) {
    case Axis::g: p.g = v; break;
    case Axis::delta: p.delta = v; break;
    case Axis::epsilon: p.epsilon = v; break;
    case Axis::T: p.temperature = v; break;
    case Axis::omega: break;
    }
}

struct ConvergenceReport {
    int cutoff{0};
    double max_change{0.0};          // relative probe change N -> N+3 at the accepted cutoff
    std::vector<double> ladder;      // change at every rung tried
    bool monotone{true};             // ladder non-increasing
};

using Probe = std::function<std::vector<double>(const ModelParams&)>;

// I_e and <n>.
inline std::vector<double> default_probe(const ModelParams& p) {
    const Superoperator L = build_model_liouvillian(p);
    const SteadyState ss = solve_steady_state(L);
    const OperatorSet o = build_operators(HilbertSpace::transport(p.n_fock));
    return {channel_flux(L.channel(Channel::e), ss), expectation(o.number, ss)};
}

inline constexpr double kConvergenceTolerance = 1e-6;
inline constexpr double kConvergenceFloor = 1e-12;

inline double relative_change(const std::vector<double>& a, const std::vector<double>& b) {
    double worst = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double diff = std::abs(a[k] - b[k]);
        if (diff <= kConvergenceFloor) continue;
        worst = std::max(worst, diff / std::max(std::abs(a[k]), std::abs(b[k])));
    }
    return worst;
}

// Smallest N >= start with |probe(N+3) - probe(N)| < 1e-6 relative.
inline ConvergenceReport fock_convergence(ModelParams p, int start = 1, int cap = 40, const Probe& probe = default_probe) {
    if (start < 1 || cap < start) throw std::invalid_argument("fock_convergence: need 1 <= start <= cap");
    ConvergenceReport r;
    std::map<int, std::vector<double>> cache;
    auto eval = [&](int n) -> const std::vector<double>& {
        auto it = cache.find(n);
        if (it != cache.end()) return it->second;
        p.n_fock = n;
        return cache.emplace(n, probe(p)).first->second;
    };
    for (int n = start; n <= cap; ++n) {
        const double change = relative_change(eval(n), eval(n + 3));
        if (!r.ladder.empty() && change > r.ladder.back() * (1.0 + 1e-9) + kConvergenceFloor) r.monotone = false;
        r.ladder.push_back(change);
        cache.erase(n);
        if (change < kConvergenceTolerance) {
            r.cutoff = n;
            r.max_change = change;
            return r;
        }
    }
    std::ostringstream os;
    os << "fock cutoff did not converge by N = " << cap << " (last relative change " << r.ladder.back() << ")";
    throw NumericalError(os.str());
}

struct GridResult {
    SweepSpec spec;
    std::vector<std::vector<double>> axis_values;
    // row-major over (axis1, axis2); nullopt marks a failed point
    std::map<Quantity, std::vector<std::optional<double>>> data;
    std::vector<std::string> failures; // "index: message", in grid order
    int cutoff_used{0};
    ConvergenceReport convergence;

    std::size_t rows() const { return axis_values.empty() ? 0 : axis_values[0].size(); }
    std::size_t cols() const { return axis_values.size() < 2 ? 1 : axis_values[1].size(); }
    std::optional<double> at(Quantity q, std::size_t i, std::size_t j = 0) const { return data.at(q)[i * cols() + j]; }
};

inline constexpr double kCurrentFloor = 1e-12;

// Per-point evaluation for one set of model parameters over a list of frequencies.
// One steady state and one resolvent factorization pattern are shared across frequencies.
struct PointEvaluator {
    explicit PointEvaluator(const ModelParams& p)
        : L(build_model_liouvillian(p)), ss(solve_steady_state(L)), solver(L, ss) {}

    std::optional<double> value(Quantity q, double omega) {
        switch (q) {
        case Quantity::S_ee: {
            const double I = solver.current(Channel::e);
            if (!(I > kCurrentFloor)) return std::nullopt;
            return solver.noise(Channel::e, Channel::e, omega) / (2.0 * I);
        }
        case Quantity::S_bb: {
            const double I = solver.current(Channel::b);
            if (!(I > kCurrentFloor)) return std::nullopt;
            return solver.noise(Channel::b, Channel::b, omega) / (2.0 * I);
        }
        case Quantity::S_eb: return solver.noise(Channel::e, Channel::b, omega);
        case Quantity::I_e: return solver.current(Channel::e);
        case Quantity::I_b: return solver.current(Channel::b);
        case Quantity::F_Q: return fano_number(ss).value;
        case Quantity::quad_min: return min_quadrature_variance(ss).value;
        }
        return std::nullopt;
    }

    Superoperator L;
    SteadyState ss;
    ResolventSolver solver;
};

// Cutoff for a sweep: the ladder is run at every corner of the parameter axes.
inline ConvergenceReport sweep_cutoff(const SweepSpec& spec) {
    if (spec.fixed_cutoff) return {*spec.fixed_cutoff, 0.0, {}, true};
    std::vector<ModelParams> corners{spec.base};
    for (const AxisSpec& a : spec.axes) {
        if (a.axis == Axis::omega) continue;
        const std::vector<double> g = a.grid();
        const auto [lo, hi] = std::minmax_element(g.begin(), g.end());
        std::vector<ModelParams> next;
        for (const ModelParams& c : corners)
            for (double v : {*lo, *hi}) {
                ModelParams q = c;
                apply_axis(q, a.axis, v);
                next.push_back(q);
            }
        corners = std::move(next);
    }
    ConvergenceReport worst;
    for (const ModelParams& c : corners) {
        ConvergenceReport r = fock_convergence(c, spec.cutoff_start, spec.cutoff_max);
        if (r.cutoff > worst.cutoff || worst.ladder.empty()) {
            const bool mono = worst.monotone && r.monotone;
            worst = r;
            worst.monotone = mono;
        } else {
            worst.monotone = worst.monotone && r.monotone;
        }
    }
    return worst;
}

inline int default_workers() {
    if (const char* env = std::getenv("DQDNOISE_WORKERS")) {
        try {
            const int n = std::stoi(env);
            if (n >= 1) return n;
        } catch (const std::exception&) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

// Evaluates every grid point. Output is independent of worker count: each
// work unit is a fixed slice of the grid computed from scratch.
inline GridResult run_sweep(const SweepSpec& spec, int workers = 1) {
    spec.validate();
    if (workers < 1) throw std::invalid_argument("workers must be >= 1");

    GridResult out;
    out.spec = spec;
    for (const AxisSpec& a : spec.axes) out.axis_values.push_back(a.grid());
    out.convergence = sweep_cutoff(spec);
    out.cutoff_used = out.convergence.cutoff;

    const std::size_t rows = out.rows(), cols = out.cols();
    const std::size_t total = rows * cols;
    for (Quantity q : spec.quantities) out.data[q].assign(total, std::nullopt);
    std::vector<std::string> errors(total);

    // Work units: one per parameter point, holding all frequencies of that point.
    // A pure frequency sweep is split into frequency chunks instead.
    const int omega_axis = spec.axes[0].axis == Axis::omega ? 0 : (spec.axes.size() == 2 && spec.axes[1].axis == Axis::omega ? 1 : -1);
    struct Unit {
        ModelParams params;
        std::vector<std::size_t> cells;
        std::vector<double> omegas;
    };
    std::vector<Unit> units;
    auto params_for = [&](std::size_t i, std::size_t j) {
        ModelParams p = spec.base;
        p.n_fock = out.cutoff_used;
        apply_axis(p, spec.axes[0].axis, out.axis_values[0][i]);
        if (spec.axes.size() == 2) apply_axis(p, spec.axes[1].axis, out.axis_values[1][j]);
        return p;
    };
    auto omega_for = [&](std::size_t i, std::size_t j) {
        if (omega_axis == 0) return out.axis_values[0][i];
        if (omega_axis == 1) return out.axis_values[1][j];
        return spec.omega;
    };
    if (omega_axis < 0) {
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j) units.push_back({params_for(i, j), {i * cols + j}, {spec.omega}});
    } else if (spec.axes.size() == 1) {
        const std::size_t chunk = std::max<std::size_t>(1, (rows + 4 * workers - 1) / (4 * workers));
        for (std::size_t s = 0; s < rows; s += chunk) {
            Unit u{params_for(0, 0), {}, {}};
            for (std::size_t i = s; i < std::min(rows, s + chunk); ++i) {
                u.cells.push_back(i);
                u.omegas.push_back(out.axis_values[0][i]);
            }
            units.push_back(std::move(u));
        }
    } else {
        const std::size_t outer = omega_axis == 0 ? cols : rows;
        const std::size_t inner = omega_axis == 0 ? rows : cols;
        for (std::size_t o = 0; o < outer; ++o) {
            Unit u;
            for (std::size_t k = 0; k < inner; ++k) {
                const std::size_t i = omega_axis == 0 ? k : o;
                const std::size_t j = omega_axis == 0 ? o : k;
                if (k == 0) u.params = params_for(i, j);
                u.cells.push_back(i * cols + j);
                u.omegas.push_back(omega_for(i, j));
            }
            units.push_back(std::move(u));
        }
    }

    std::atomic<std::size_t> next{0};
    std::atomic<bool> abort{false};
    auto work = [&] {
        for (;;) {
            if (spec.fail_fast && abort.load()) return;
            const std::size_t u = next.fetch_add(1);
            if (u >= units.size()) return;
            const Unit& unit = units[u];
            std::optional<PointEvaluator> ev;
            try {
                ev.emplace(unit.params);
            } catch (const std::exception& e) {
                for (std::size_t c : unit.cells) errors[c] = e.what();
                abort = true;
                continue;
            }
            for (std::size_t k = 0; k < unit.cells.size(); ++k) {
                const std::size_t c = unit.cells[k];
                try {
                    for (Quantity q : spec.quantities) {
                        const std::optional<double> v = ev->value(q, unit.omegas[k]);
                        if (v && !std::isfinite(*v)) throw NumericalError("non-finite value");
                        out.data.at(q)[c] = v;
                    }
                } catch (const std::exception& e) {
                    for (Quantity q : spec.quantities) out.data.at(q)[c] = std::nullopt;
                    errors[c] = e.what();
                    abort = true;
                }
            }
        }
    };
    const int n_threads = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(workers), units.size()));
    if (n_threads <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(work);
        for (std::thread& t : pool) t.join();
    }

    for (std::size_t c = 0; c < total; ++c) {
        if (errors[c].empty()) continue;
        if (spec.fail_fast) throw NumericalError("sweep point " + std::to_string(c) + " failed: " + errors[c]);
        out.failures.push_back(std::to_string(c) + ": " + errors[c]);
    }
    return out;
}

inline const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names{"fig2",  "fig3",  "fig4a", "fig4b", "fig5a",
                                                "fig5b", "fig5c", "fig6a", "fig6b", "fig6c"};
    return names;
}

// Starting rung of the Fock ladder by the largest temperature in the sweep.
inline int preset_cutoff_start(double max_temperature) {
    if (max_temperature <= 0.0) return 6;
    if (max_temperature <= 1.0) return 15;
    return 25;
}

// Figure presets. Model parameters are the caption values; grid densities are our
// desk-scale choices.
inline SweepSpec preset(std::string_view name) {
    SweepSpec s;
    s.preset = std::string(name);
    ModelParams& p = s.base;
    p.omega_b = 1.0;
    p.epsilon = 0.0;
    p.temperature = 0.0;

    auto resonant = [&] {
        p.gamma_L = 0.01;
        p.gamma_R = 0.01;
        p.delta = 0.5;
        p.gamma_b = 0.05;
    };
    auto zero_freq = [&] {
        p.gamma_L = 0.1;
        p.gamma_R = 0.001;
        p.delta = 0.1;
        p.gamma_b = 0.01;
    };

    double t_max = 0.0;
    if (name == "fig2") {
        resonant();
        s.axes = {range_axis(Axis::g, 0.0, 0.4, 21), range_axis(Axis::omega, 0.2, 1.8, 321)};
        s.quantities = {Quantity::S_ee};
    } else if (name == "fig3") {
        resonant();
        p.g = 0.4;
        s.axes = {value_axis(Axis::T, {0.0, 0.5, 1.0}), range_axis(Axis::omega, 0.2, 1.8, 321)};
        s.quantities = {Quantity::S_ee};
        t_max = 1.0;
    } else if (name == "fig4a" || name == "fig4b") {
        resonant();
        p.g = name == "fig4a" ? 0.1 : 0.4;
        s.axes = {range_axis(Axis::delta, 0.3, 0.7, 21), range_axis(Axis::omega, 0.2, 1.8, 321)};
        s.quantities = {Quantity::S_ee};
    } else if (name == "fig5a") {
        zero_freq();
        p.g = 0.0008;
        s.axes = {value_axis(Axis::T, {0.0, 0.5, 1.0, 1.5, 2.0}), range_axis(Axis::epsilon, -2.0, 2.0, 161)};
        s.quantities = {Quantity::S_ee};
        t_max = 2.0;
    } else if (name == "fig5b" || name == "fig5c") {
        zero_freq();
        s.axes = {value_axis(Axis::g, {0.0, 0.1, 0.2, 0.4}), range_axis(Axis::epsilon, -2.0, 2.0, 161)};
        s.quantities = {name == "fig5b" ? Quantity::S_ee : Quantity::S_eb};
    } else if (name == "fig6a" || name == "fig6b" || name == "fig6c") {
        resonant();
        s.axes = {value_axis(Axis::T, {0.0, 0.5, 1.0}), range_axis(Axis::g, 0.0, 0.8, 33)};
        if (name == "fig6a") s.quantities = {Quantity::S_bb};
        if (name == "fig6b") s.quantities = {Quantity::F_Q, Quantity::quad_min};
        if (name == "fig6c") s.quantities = {Quantity::S_eb};
        t_max = 1.0;
    } else {
        throw std::invalid_argument("unknown preset '" + std::string(name) + "'");
    }
    s.cutoff_start = preset_cutoff_start(t_max);
    return s;
}

} // namespace dqdnoise
