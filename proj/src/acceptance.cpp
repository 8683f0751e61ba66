#include "qtraj/acceptance.hpp"

#include "qtraj/analytics.hpp"
#include "qtraj/config.hpp"
#include "qtraj/experiment.hpp"
#include "qtraj/protocol.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace qtraj {

namespace {

using Clock = std::chrono::steady_clock;

std::string fmt(const char* format, double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, format, x);
    return buf;
}

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// Spectators with the first n0 in |0> and the rest in |1>.
Vector spectator_basis(int atoms_per_cavity, int n0) {
    Index dim = 1;
    for (int k = 1; k < atoms_per_cavity; ++k) dim *= kLevelsPerAtom;
    Index idx = 0;
    for (int k = 0; k < atoms_per_cavity - 1; ++k) idx = idx * kLevelsPerAtom + (k < n0 ? 0 : 1);
    Vector phi = Vector::Zero(dim);
    phi[idx] = 1.0;
    return phi;
}

// Mean fidelity, or NaN when nothing succeeded.
double mean_fidelity(const BatchStats& s) {
    return s.mean_fidelity ? *s.mean_fidelity : std::nan("");
}

RunConfig with_trajectories(RunConfig c, long n, std::uint64_t seed) {
    c.n_trajectories = n;
    c.seed = seed;
    return c;
}

// ---------------------------------- checks ----------------------------------

CheckResult check_fig3(const VerifyOptions& opt) {
    const auto start = Clock::now();
    RunConfig c = with_trajectories(preset("fig3"), 2000, opt.seed);
    c.sweep_grid = {0.01, 0.05, 0.1, 0.15, 0.2};
    const auto rows = run_sweep(c, opt.jobs);
    bool ok = true;
    std::ostringstream detail;
    for (const auto& r : rows) {
        const double gap = std::abs(r.stats.p_success - *r.p_analytic);
        const double bound = 3.0 * r.stats.ci_half_width() + 0.01;
        ok = ok && gap <= bound;
        detail << "a=" << r.value << " p=" << fmt("%.4f", r.stats.p_success)
               << " eq=" << fmt("%.4f", *r.p_analytic) << " gap=" << fmt("%.4f", gap) << "/"
               << fmt("%.4f", bound) << "; ";
    }
    const double secs = seconds_since(start);
    ok = ok && secs <= 120.0;
    return {"fig3_agreement", ok, detail.str() + "time=" + fmt("%.1fs", secs), secs};
}

CheckResult check_single(const VerifyOptions& opt) {
    const auto start = Clock::now();
    const RunConfig c = with_trajectories(preset("paper-single"), 2000, opt.seed);
    const BatchStats s = aggregate(run_batch(c, opt.jobs));
    const double f = mean_fidelity(s);
    const double secs = seconds_since(start);
    const bool ok = s.p_success >= 0.92 && s.p_success <= 0.96 && f >= 0.98 && secs <= 120.0;
    return {"paper_single_atom", ok,
            "p=" + fmt("%.4f", s.p_success) + " in [0.92,0.96], F=" + fmt("%.5f", f) +
                " >= 0.98, time=" + fmt("%.1fs", secs),
            secs};
}

CheckResult check_multi(const VerifyOptions& opt) {
    const auto start = Clock::now();
    const RunConfig c = with_trajectories(preset("paper-multi"), 500, opt.seed);
    const BatchStats s = aggregate(run_batch(c, opt.jobs));
    const double f = mean_fidelity(s);
    const double secs = seconds_since(start);
    const bool ok = s.p_success >= 0.86 && s.p_success <= 0.94 && f >= 0.98 && secs <= 480.0;
    return {"paper_multi_atom", ok,
            "p=" + fmt("%.4f", s.p_success) + " in [0.86,0.94], F=" + fmt("%.5f", f) +
                " >= 0.98, time=" + fmt("%.1fs", secs) + " <= 480s",
            secs};
}

CheckResult check_gamma_trends(const VerifyOptions& opt) {
    const auto start = Clock::now();
    RunConfig c = with_trajectories(preset("fig4"), 1000, opt.seed);
    c.sweep_grid = {0.0, 0.075, 0.15, 0.225, 0.3};
    const auto rows = run_sweep(c, opt.jobs);
    std::vector<double> p, f;
    std::ostringstream detail;
    for (const auto& r : rows) {
        p.push_back(r.stats.p_success);
        f.push_back(mean_fidelity(r.stats));
        detail << "g=" << r.value << " p=" << fmt("%.4f", p.back()) << " F=" << fmt("%.5f", f.back())
               << "; ";
    }
    const int p_inv = rank_inversions(p, true);
    const int f_inv = rank_inversions(f, false);
    const double secs = seconds_since(start);
    detail << "inversions p=" << p_inv << " F=" << f_inv;
    return {"gamma_trends", p_inv <= 1 && f_inv <= 1, detail.str(), secs};
}

CheckResult check_mapping(const VerifyOptions&) {
    const auto start = Clock::now();
    PhysicalParams single = single_atom_reference();
    single.gamma = 0.0;
    const DerivedRates rs = derived_rates(single);
    const double e1 = single_atom_mapping_error(single, *rs.t1, *rs.t2);

    PhysicalParams multi = multi_atom_reference();
    multi.gamma = 0.0;
    const DerivedRates rm = derived_rates(multi);
    const double e3 = multi_atom_mapping_error(multi, rm.t3);
    const double bound3 = 5.0 * rm.z2 / rm.z3;
    const double secs = seconds_since(start);
    return {"mapping_identities", e1 <= 1e-6 && e3 <= bound3,
            "single max err=" + fmt("%.3g", e1) + " <= 1e-6, multi rel err=" + fmt("%.4g", e3) +
                " <= " + fmt("%.4g", bound3),
            secs};
}

CheckResult check_consistency(const VerifyOptions& opt) {
    const auto start = Clock::now();
    PhysicalParams p = single_atom_reference();
    PhysicalParams p0 = p;
    p0.gamma = 0.0;
    const double overlap = full_vs_effective_overlap(p0);

    double sum_rule = 0.0;
    for (const Lasers lasers : {kLasersOn, kLasersOff}) {
        const Matrix h = full_hamiltonian(p, lasers).to_joint().matrix();
        const Matrix twice_damping = Complex(0.0, 1.0) * (h - h.adjoint());
        const Matrix diff = damping_sum(jump_channels(p)).matrix() - twice_damping;
        sum_rule = std::max(sum_rule, diff.cwiseAbs().maxCoeff());
    }

    RunConfig c = with_trajectories(preset("paper-single"), 100, opt.seed + 1);
    double rise = 0.0;
    for (const auto& o : run_batch(c, opt.jobs)) rise = std::max(rise, o.max_norm_rise);

    const double secs = seconds_since(start);
    const bool ok = overlap >= 0.99 && sum_rule <= 1e-12 && rise <= 1e-12;
    return {"model_consistency", ok,
            "overlap=" + fmt("%.6f", overlap) + " >= 0.99, sum rule=" + fmt("%.2g", sum_rule) +
                " <= 1e-12, max norm rise=" + fmt("%.2g", rise) + " <= 1e-12",
            secs};
}

CheckResult check_determinism(const VerifyOptions& opt) {
    const auto start = Clock::now();
    const int jobs = std::max(4, opt.jobs);
    bool ok = true;
    std::ostringstream detail;
    for (const char* name : {"paper-single-desk", "fig3-point-desk"}) {
        const RunConfig c = preset(name);
        auto render = [&](int j) {
            const auto outcomes = run_batch(c, j);
            return outcomes_csv(outcomes) + summary_csv(aggregate(outcomes));
        };
        const std::string first = render(1);
        const bool same = first == render(1) && first == render(jobs);
        ok = ok && same;
        detail << name << (same ? " identical" : " DIFFERS") << " (jobs 1,1," << jobs << "); ";
    }
    RunConfig sweep = preset("fig4-desk");
    sweep.n_trajectories = 200;
    const bool sweep_same = sweep_csv(run_sweep(sweep, 1)) == sweep_csv(run_sweep(sweep, jobs));
    ok = ok && sweep_same;
    detail << "fig4-desk sweep (200 traj) " << (sweep_same ? "identical" : "DIFFERS");
    return {"determinism", ok, detail.str(), seconds_since(start)};
}

}  // namespace

const std::vector<AcceptanceCheck>& acceptance_checks() {
    static const std::vector<AcceptanceCheck> checks = {
        {"fig3_agreement", "effective model, gamma=0, 5 alpha points x 2000 vs P(alpha)",
         check_fig3},
        {"paper_single_atom", "full model, single-atom paper parameters, 2000 trajectories",
         check_single},
        {"paper_multi_atom", "full model, 3 atoms per cavity, 500 trajectories, <= 8 min",
         check_multi},
        {"gamma_trends", "5 gamma points x 1000: p decreasing, F non-decreasing",
         check_gamma_trends},
        {"mapping_identities", "t1, t2, t3 effective propagators vs mapping relations",
         check_mapping},
        {"model_consistency", "full vs effective overlap, sum rule, norm monotonicity",
         check_consistency},
        {"determinism", "byte-identical CSVs across runs and job counts", check_determinism},
    };
    return checks;
}

PhysicalParams single_atom_reference(double kappa, double gamma) {
    PhysicalParams p;
    p.delta = 300.0;
    p.delta_prime = 300.0;
    p.omega = 25.0;
    p.g = 25.0;
    p.kappa = kappa;
    p.gamma = gamma;
    return p;
}

PhysicalParams multi_atom_reference() {
    PhysicalParams p;
    p.delta = 1000.0;
    p.delta_prime = 1000.9;
    p.omega = 30.0;
    p.g = 0.7;
    p.kappa = 0.001;
    p.gamma = 0.1;
    p.atoms_per_cavity = 3;
    return p;
}

double single_atom_mapping_error(const PhysicalParams& p, double t1, double t2) {
    const SpaceLayout layout = p.layout();
    const DerivedRates r = derived_rates(p);
    const DenseOperator h = effective_cavity_hamiltonian(p, true);
    auto ket = [&](int level, int photons) {
        Vector v = Vector::Zero(layout.cavity_dim());
        v[layout.cavity_index({{level}, photons})] = 1.0;
        return v;
    };
    const Complex i(0.0, 1.0);
    auto phase = [&](double t) { return i * std::exp(i * r.z * t) * std::exp(-0.5 * r.kappa * t); };

    double err = 0.0;
    const Matrix u1 = propagator(h, t1).matrix();
    const Matrix u2 = propagator(h, t2).matrix();
    err = std::max(err, (u1 * ket(1, 0) - phase(t1) * ket(0, 1)).cwiseAbs().maxCoeff());
    err = std::max(err, (u2 * ket(0, 1) - phase(t2) * ket(1, 0)).cwiseAbs().maxCoeff());
    // |00> only picks up exp(i Delta_r t)
    err = std::max(err, (u1 * ket(0, 0) - std::exp(i * r.delta_r * t1) * ket(0, 0)).cwiseAbs().maxCoeff());
    return err;
}

double multi_atom_mapping_error(const PhysicalParams& p, double t3) {
    const SpaceLayout layout = p.layout();
    const DerivedRates r = derived_rates(p);
    const int n = p.atoms_per_cavity;
    const Matrix u = propagator(effective_cavity_hamiltonian(p, true, 0), t3).matrix();
    const Complex i(0.0, 1.0);
    double worst = 0.0;
    for (int n0 = 0; n0 < n; ++n0) {
        const Vector phi = spectator_basis(n, n0);
        const double m = n0 + 1.0;
        const Complex factor = i * std::exp(i * r.delta_r * m * t3) * std::exp(-0.5 * r.kappa * t3) *
                               std::exp(i * 0.5 * m * r.z2 * t3);
        const Vector v10 = cavity_state(layout, 0, phi, 1, 0);
        const Vector v01 = cavity_state(layout, 0, phi, 0, 1);
        for (const auto& [from, to] : {std::pair{v10, v01}, std::pair{v01, v10}}) {
            const Vector expected = factor * to;
            worst = std::max(worst, (u * from - expected).norm() / expected.norm());
        }
    }
    return worst;
}

double full_vs_effective_overlap(const PhysicalParams& p) {
    const DerivedRates r = derived_rates(p);
    if (!r.t1) throw std::invalid_argument("full_vs_effective_overlap: t1 unavailable");
    const StateVector start = StateVector::basis(p.layout(), {{{1}, 0}, {{1}, 0}});
    const PairPropagator full = propagator(full_hamiltonian(p, kLasersOn), *r.t1);
    const PairPropagator eff = propagator(effective_hamiltonian(p, kLasersOn), *r.t1);
    Matrix a = start.as_matrix();
    Matrix b = a;
    Matrix scratch;
    apply_in_place(full, a, scratch);
    apply_in_place(eff, b, scratch);
    const Complex ov = (a.conjugate().cwiseProduct(b)).sum();
    return std::norm(ov) / (a.squaredNorm() * b.squaredNorm());
}

int rank_inversions(const std::vector<double>& values, bool strictly_decreasing) {
    int count = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        for (std::size_t j = i + 1; j < values.size(); ++j) {
            const bool ordered =
                strictly_decreasing ? values[j] < values[i] : values[j] >= values[i];
            if (!ordered) ++count;
        }
    }
    return count;
}

}  // namespace qtraj
