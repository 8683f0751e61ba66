#include "qtraj/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qtraj {

// --------------------------------- RngStream ---------------------------------

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t trajectory_index)
    : master_seed_(master_seed), index_(trajectory_index) {
    std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                      static_cast<std::uint32_t>(master_seed >> 32),
                      static_cast<std::uint32_t>(trajectory_index),
                      static_cast<std::uint32_t>(trajectory_index >> 32)};
    engine_.seed(seq);
}

double RngStream::uniform() {
    // (k + 0.5) / 2^53 never hits 0 or 1.
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double radius = std::sqrt(-2.0 * std::log(uniform()));
    const double angle = 2.0 * std::numbers::pi * uniform();
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

// ---------------------------------- helpers ----------------------------------

double max_damping_rate(const LocalSum& generator) {
    double rate = 0.0;
    for (const Matrix* m : {&generator.on_a(), &generator.on_b()}) {
        for (Index i = 0; i < m->rows(); ++i) rate = std::max(rate, std::abs((*m)(i, i).imag()));
    }
    return rate;
}

double default_step(double duration, double damping_rate) {
    double dt = duration / 2000.0;
    if (damping_rate > 0.0) dt = std::min(dt, 0.05 / damping_rate);
    return dt;
}

double sum_rule_residual(const LocalSum& generator, const std::vector<JumpChannel>& channels) {
    double worst = 0.0;
    for (Cavity c : {Cavity::A, Cavity::B}) {
        const Matrix& h = generator.on(c);
        Matrix sum = Matrix::Zero(h.rows(), h.cols());
        for (const auto& ch : channels) sum += ch.op.on(c).adjoint() * ch.op.on(c);
        const Matrix expected = (h - h.adjoint()) * Complex(0.0, 1.0);
        if (sum.size() > 0) worst = std::max(worst, (sum - expected).cwiseAbs().maxCoeff());
    }
    return worst;
}

namespace {

constexpr double kBisectionTol = 1e-10;  // relative norm^2 bracket width
constexpr int kMaxLevels = 60;

double norm2(const Matrix& psi) { return psi.squaredNorm(); }

// C psi for C = X_A (x) 1 + 1 (x) X_B on the matrix view.
Matrix apply_local_sum(const LocalSum& op, const Matrix& psi) {
    return op.on_a() * psi + psi * op.on_b().transpose();
}

// Half-step propagators for one step length: cached or built on demand.
class Halvings {
public:
    Halvings(const std::vector<PairPropagator>* cached, const LocalSum& gen, double h)
        : cached_(cached), gen_(gen), h_(h) {}

    const PairPropagator& level(int k) {
        if (cached_ != nullptr && k < static_cast<int>(cached_->size())) return (*cached_)[k];
        const auto first = cached_ != nullptr ? cached_->size() : 0;
        while (first + local_.size() <= static_cast<std::size_t>(k)) {
            const int lvl = static_cast<int>(first + local_.size());
            local_.push_back(propagator(gen_, std::ldexp(h_, -lvl)));
        }
        return local_[static_cast<std::size_t>(k) - first];
    }

private:
    const std::vector<PairPropagator>* cached_;
    const LocalSum& gen_;
    double h_;
    std::vector<PairPropagator> local_;
};

struct Crossing {
    double tau;
    Matrix psi;
};

// The norm is non-increasing along a no-jump interval, so the first crossing
// of `target` inside the step (norm_left > target >= norm_right) is unique.
Crossing bisect(const Matrix& start, double n_left, double n_right, double target, double h,
                Halvings& halvings, const LocalSum& gen) {
    Matrix left = start;
    Matrix scratch;
    double tau = 0.0;
    double width = h;
    for (int k = 1; k < kMaxLevels; ++k) {
        if (n_left - n_right <= kBisectionTol * n_left) break;
        Matrix mid = left;
        apply_in_place(halvings.level(k), mid, scratch);
        const double n_mid = norm2(mid);
        width = std::ldexp(h, -k);
        if (n_mid > target) {
            left = std::move(mid);
            n_left = n_mid;
            tau += width;
        } else {
            n_right = n_mid;
        }
    }
    const double gap = n_left - n_right;
    const double frac = gap > 0.0 ? std::clamp((n_left - target) / gap, 0.0, 1.0) : 1.0;
    const double dtau = frac * width;
    if (dtau > 0.0) apply_in_place(propagator(gen, dtau), left, scratch);
    return {tau + dtau, std::move(left)};
}

}  // namespace

// ------------------------------ CompiledSegment ------------------------------

CompiledSegment::CompiledSegment(Segment segment, double dt) : seg_(std::move(segment)), dt_(dt) {
    if (!(seg_.duration >= 0.0) || !std::isfinite(seg_.duration)) {
        throw std::invalid_argument("Segment: duration must be finite and >= 0");
    }
    for (const auto& ch : seg_.channels) {
        if (!(ch.op.layout() == seg_.generator.layout())) {
            throw std::invalid_argument("Segment: channel layout differs from generator layout");
        }
    }
    const double residual = sum_rule_residual(seg_.generator, seg_.channels);
    const double scale = std::max(1.0, max_damping_rate(seg_.generator));
    if (residual > 1e-9 * scale) {
        throw std::invalid_argument("Segment: jump channels do not account for the damping");
    }
    if (dt_ > 0.0 && seg_.duration > 0.0 && dt_ > seg_.duration) {
        throw std::invalid_argument("Segment: step size exceeds duration");
    }
    if (dt_ <= 0.0) dt_ = default_step(seg_.duration, max_damping_rate(seg_.generator));
    if (dt_ <= 0.0) return;  // zero-duration segment, nothing to cache

    const double rate = 2.0 * max_damping_rate(seg_.generator);
    halvings_.push_back(propagator(seg_.generator, dt_));
    for (int k = 1; k < kMaxLevels; ++k) {
        halvings_.push_back(propagator(seg_.generator, std::ldexp(dt_, -k)));
        if (rate * std::ldexp(dt_, -k) <= kBisectionTol) break;
    }
}

SegmentResult CompiledSegment::evolve(const StateVector& state, RngStream& rng,
                                      const StopRule& stop) const {
    return evolve_for(state, rng, seg_.duration, stop);
}

SegmentResult CompiledSegment::evolve_for(const StateVector& state, RngStream& rng,
                                          double duration, const StopRule& stop) const {
    const SpaceLayout& layout = seg_.generator.layout();
    if (!(state.layout() == layout)) throw std::invalid_argument("evolve: layout mismatch");
    if (!(duration >= 0.0) || !std::isfinite(duration)) {
        throw std::invalid_argument("evolve: duration must be finite and >= 0");
    }
    const double start_norm2 = norm(state) * norm(state);
    if (!(start_norm2 > 1e-24)) throw std::domain_error("evolve: state is numerically null");
    if (start_norm2 > 1.0 + 1e-9) throw std::invalid_argument("evolve: state norm exceeds 1");

    SegmentResult result{state, {}, 0.0, false, false, 0.0};
    if (duration == 0.0) return result;
    if (halvings_.empty()) throw std::invalid_argument("evolve: segment compiled without a step");

    Matrix psi = state.as_matrix();
    Matrix next;
    Matrix scratch;
    double n2 = start_norm2;
    double target = rng.uniform() * n2;
    double t = 0.0;

    // Remainder step (shorter than dt) propagators, built on first use.
    double rem_h = -1.0;
    PairPropagator rem_u;

    while (duration - t > 1e-12 * duration) {
        const double remaining = duration - t;
        const bool full = remaining >= dt_ * (1.0 - 1e-9);
        const bool last = remaining <= dt_ * (1.0 + 1e-9);
        const double h = full ? dt_ : remaining;
        const PairPropagator* u = &halvings_.front();
        if (!full) {
            if (h != rem_h) {
                rem_u = propagator(seg_.generator, h);
                rem_h = h;
            }
            u = &rem_u;
        }
        next = psi;
        apply_in_place(*u, next, scratch);
        const double n2_next = norm2(next);
        result.max_norm_rise = std::max(result.max_norm_rise, n2_next - n2);

        if (n2_next > target) {
            psi.swap(next);
            n2 = n2_next;
            t = last ? duration : t + dt_;
            continue;
        }

        Halvings halvings(full ? &halvings_ : nullptr, seg_.generator, h);
        Crossing crossing = bisect(psi, n2, n2_next, target, h, halvings, seg_.generator);
        t = std::min(t + crossing.tau, duration);
        psi = std::move(crossing.psi);

        // Pick the channel that claims the decayed norm.
        std::vector<double> weights;
        weights.reserve(seg_.channels.size());
        double total = 0.0;
        for (const auto& ch : seg_.channels) {
            const double w = norm2(apply_local_sum(ch.op, psi));
            weights.push_back(w);
            total += w;
        }
        if (!(total > 0.0)) {
            throw std::runtime_error("evolve: norm decayed but no jump channel has weight");
        }
        const double pick = rng.uniform() * total;
        std::size_t j = 0;
        for (double acc = 0.0; j + 1 < weights.size(); ++j) {
            acc += weights[j];
            if (pick < acc) break;
        }
        const JumpChannel& ch = seg_.channels[j];
        psi = apply_local_sum(ch.op, psi);
        psi /= std::sqrt(norm2(psi));
        n2 = 1.0;
        result.events.push_back({t, ch.kind, ch.cavity, ch.atom, ch.epsilon()});

        if (seg_.until_jump || (stop && stop(result.events))) {
            result.stopped = true;
            break;
        }
        target = rng.uniform();
    }

    result.elapsed = result.stopped ? t : duration;
    result.timed_out = seg_.until_jump && !result.stopped;
    result.state = StateVector::from_matrix(layout, psi);
    return result;
}

SegmentResult evolve_segment(const StateVector& state, const Segment& segment, RngStream& rng,
                             double dt, const StopRule& stop) {
    return CompiledSegment(segment, dt).evolve(state, rng, stop);
}

double expectation_norm_decay(const StateVector& state, const Segment& segment) {
    if (!(state.layout() == segment.generator.layout())) {
        throw std::invalid_argument("expectation_norm_decay: layout mismatch");
    }
    const double n0 = norm(state);
    if (!(n0 > 1e-12)) throw std::domain_error("expectation_norm_decay: null state");
    const PairPropagator u = propagator(segment.generator, segment.duration);
    Matrix psi = state.as_matrix();
    Matrix scratch;
    apply_in_place(u, psi, scratch);
    return norm2(psi) / (n0 * n0);
}

}  // namespace qtraj
