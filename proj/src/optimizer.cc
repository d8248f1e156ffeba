// Copyright 2026 The unprobe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "unprobe/optimizer.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

#include <gsl/gsl_multimin.h>

#include "unprobe/rng.h"

namespace unprobe {

namespace {

constexpr int kCoarseGrid = 512;

// Excitation for many areas at once, propagating the ground state through
// the pulse train; areas are fixed at construction so sin/cos are cached.
class GridEvaluator {
   public:
    explicit GridEvaluator(int points) {
        areas_pi_.resize(points + 1);
        half_cos_.resize(points + 1);
        half_sin_.resize(points + 1);
        for (int k = 0; k <= points; ++k) {
            const double a = 2.0 * k / points;
            areas_pi_[k] = a;
            half_cos_[k] = std::cos(0.5 * a * kPi);
            half_sin_[k] = std::sin(0.5 * a * kPi);
        }
    }

    size_t size() const { return areas_pi_.size(); }
    double area_pi(size_t k) const { return areas_pi_[k]; }

    void set_phases(const std::vector<double> &phases_pi) {
        phasors_.resize(phases_pi.size());
        for (size_t j = 0; j < phases_pi.size(); ++j) {
            phasors_[j] = std::polar(1.0, phases_pi[j] * kPi);
        }
    }

    double at(size_t k) const {
        const double c = half_cos_[k];
        const double s = half_sin_[k];
        complex g{1.0, 0.0};
        complex e{0.0, 0.0};
        for (const complex &w : phasors_) {
            // -i s e^{-i phi} and -i s e^{i phi}
            const complex up{s * w.imag(), -s * w.real()};
            const complex down{-s * w.imag(), -s * w.real()};
            const complex g2 = c * g + down * e;
            e = up * g + c * e;
            g = g2;
        }
        return std::norm(e);
    }

    struct OutsideStats {
        double worst = 0.0;  // largest excitation outside the band
        double soft = 0.0;   // log of the p-norm mean of excitation / threshold, over p
    };

    // Also fills d(soft)/d(phase_j), phases in units of pi, when grad is non-null.
    OutsideStats outside_stats(double alpha, double threshold, double p,
                               std::vector<double> *grad) const {
        const size_t n = phasors_.size();
        OutsideStats out;
        double sum = 0.0;
        size_t count = 0;
        std::vector<double> weighted(grad ? n : 0, 0.0);
        std::vector<complex> g(n + 1);
        std::vector<complex> e(n + 1);
        for (size_t k = 0; k < areas_pi_.size(); ++k) {
            if (std::abs(areas_pi_[k] - 1.0) < alpha) {
                continue;
            }
            const double c = half_cos_[k];
            const double s = half_sin_[k];
            g[0] = {1.0, 0.0};
            e[0] = {0.0, 0.0};
            for (size_t j = 0; j < n; ++j) {
                const complex &w = phasors_[j];
                const complex up{s * w.imag(), -s * w.real()};
                const complex down{-s * w.imag(), -s * w.real()};
                g[j + 1] = c * g[j] + down * e[j];
                e[j + 1] = up * g[j] + c * e[j];
            }
            const double v = std::norm(e[n]);
            const double term = std::pow(v / threshold, p);
            out.worst = std::max(out.worst, v);
            sum += term;
            ++count;
            if (grad == nullptr || v == 0.0) {
                continue;
            }
            // Backward sweep: (bg, be) is the <e| row of the remaining product.
            complex bg{0.0, 0.0};
            complex be{1.0, 0.0};
            const double scale = term * p / v;
            for (size_t j = n; j-- > 0;) {
                const complex &w = phasors_[j];
                // dU/dphi = pi [[0, -s conj(w)], [s w, 0]]
                const complex de =
                    kPi * s * (bg * (-std::conj(w)) * e[j] + be * w * g[j]);
                weighted[j] += scale * 2.0 * std::real(std::conj(e[n]) * de);
                const complex up{s * w.imag(), -s * w.real()};
                const complex down{-s * w.imag(), -s * w.real()};
                const complex bg2 = bg * c + be * up;
                be = bg * down + be * c;
                bg = bg2;
            }
        }
        if (count == 0 || sum == 0.0) {
            out.soft = -std::numeric_limits<double>::infinity();
            if (grad) {
                grad->assign(n, 0.0);
            }
            return out;
        }
        out.soft = std::log(sum / static_cast<double>(count)) / p;
        if (grad) {
            grad->resize(n);
            for (size_t j = 0; j < n; ++j) {
                (*grad)[j] = weighted[j] / (p * sum);
            }
        }
        return out;
    }

    double max_outside(double alpha) const {
        double worst = 0.0;
        for (size_t k = 0; k < areas_pi_.size(); ++k) {
            if (std::abs(areas_pi_[k] - 1.0) >= alpha) {
                worst = std::max(worst, at(k));
            }
        }
        return worst;
    }

   private:
    std::vector<double> areas_pi_;
    std::vector<double> half_cos_;
    std::vector<double> half_sin_;
    std::vector<complex> phasors_;
};

// Maps the free search coordinates onto a full phase vector.
class Parametrisation {
   public:
    Parametrisation(int n_pulses, bool reflected, bool middle_shift)
        : n_(n_pulses), reflected_(reflected), middle_shift_(middle_shift) {}

    int dimension() const {
        if (!reflected_) {
            return n_ - 1;
        }
        // c plus phi_2 .. phi_{floor(N/2)}; the middle phase of odd N is c/2 (+1).
        return 1 + std::max(0, n_ / 2 - 1);
    }

    std::vector<double> expand(const std::vector<double> &x) const {
        std::vector<double> phases(n_, 0.0);
        if (!reflected_) {
            for (int k = 1; k < n_; ++k) {
                phases[k] = x[k - 1];
            }
            return phases;
        }
        const double c = x[0];
        phases[n_ - 1] = c;
        for (int k = 1; k < n_ / 2; ++k) {
            phases[k] = x[k];
            phases[n_ - 1 - k] = c - x[k];
        }
        if (n_ % 2 == 1) {
            phases[n_ / 2] = 0.5 * c + (middle_shift_ ? 1.0 : 0.0);
        }
        return phases;
    }

    std::vector<double> pullback(const std::vector<double> &grad_phases) const {
        std::vector<double> gx(dimension(), 0.0);
        if (!reflected_) {
            for (int k = 1; k < n_; ++k) {
                gx[k - 1] = grad_phases[k];
            }
            return gx;
        }
        gx[0] = grad_phases[n_ - 1];
        for (int k = 1; k < n_ / 2; ++k) {
            gx[k] = grad_phases[k] - grad_phases[n_ - 1 - k];
            gx[0] += grad_phases[n_ - 1 - k];
        }
        if (n_ % 2 == 1) {
            gx[0] += 0.5 * grad_phases[n_ / 2];
        }
        return gx;
    }

   private:
    int n_;
    bool reflected_;
    bool middle_shift_;
};

struct Budget {
    long long remaining;
    bool take() {
        if (remaining <= 0) {
            return false;
        }
        --remaining;
        return true;
    }
};

double coarse_envelope(GridEvaluator &grid, double threshold) {
    size_t first = grid.size();
    size_t last = 0;
    for (size_t k = 0; k < grid.size(); ++k) {
        if (grid.at(k) > threshold) {
            first = std::min(first, k);
            last = k;
        }
    }
    if (first == grid.size()) {
        return 0.0;
    }
    return std::max(1.0 - grid.area_pi(first), grid.area_pi(last) - 1.0);
}

struct Stage {
    std::vector<double> x;
    double alpha = 1.0;
    bool feasible = false;
};

// Quasi-Newton descent (BFGS) at a fixed half-width on a smooth p-norm of the
// outside-band excitation; stops once the true maximum is comfortably below
// threshold.
struct DescentContext {
    const Parametrisation *param;
    GridEvaluator *grid;
    double alpha_star;
    double threshold;
    long long calls = 0;
    double worst = 1.0;
};

constexpr double kNorm = 24.0;

double descent_value(const gsl_vector *v, void *ctx_ptr, gsl_vector *grad) {
    auto &ctx = *static_cast<DescentContext *>(ctx_ptr);
    ++ctx.calls;
    const std::vector<double> x(v->data, v->data + v->size);
    ctx.grid->set_phases(ctx.param->expand(x));
    std::vector<double> g_phases;
    const GridEvaluator::OutsideStats st =
        ctx.grid->outside_stats(ctx.alpha_star, ctx.threshold, kNorm, grad ? &g_phases : nullptr);
    ctx.worst = st.worst;
    if (grad) {
        const std::vector<double> gx = ctx.param->pullback(g_phases);
        for (size_t i = 0; i < gx.size(); ++i) {
            gsl_vector_set(grad, i, gx[i]);
        }
    }
    // An empty outside band (or zero leakage) is trivially optimal.
    return std::isfinite(st.soft) ? st.soft : -1e3;
}

double descent_f(const gsl_vector *v, void *ctx) { return descent_value(v, ctx, nullptr); }
void descent_df(const gsl_vector *v, void *ctx, gsl_vector *g) { descent_value(v, ctx, g); }
void descent_fdf(const gsl_vector *v, void *ctx, double *f, gsl_vector *g) {
    *f = descent_value(v, ctx, g);
}

bool descend(const Parametrisation &param, GridEvaluator &grid, std::vector<double> &x,
             double alpha_star, double threshold, double step, Budget &budget) {
    if (budget.remaining <= 0) {
        return false;
    }
    const double goal = threshold * 0.98;
    DescentContext ctx{&param, &grid, alpha_star, threshold};
    const size_t dim = x.size();
    gsl_multimin_function_fdf fn{descent_f, descent_df, descent_fdf, dim, &ctx};
    gsl_vector *start = gsl_vector_alloc(dim);
    for (size_t i = 0; i < dim; ++i) {
        gsl_vector_set(start, i, x[i]);
    }
    gsl_multimin_fdfminimizer *m =
        gsl_multimin_fdfminimizer_alloc(gsl_multimin_fdfminimizer_vector_bfgs2, dim);
    gsl_multimin_fdfminimizer_set(m, &fn, start, step, 0.1);
    double worst = ctx.worst;
    for (int iter = 0; iter < 500 && worst > goal && ctx.calls < budget.remaining; ++iter) {
        if (gsl_multimin_fdfminimizer_iterate(m) != GSL_SUCCESS) {
            break;
        }
        // The minimiser leaves its last evaluation at an arbitrary trial point.
        ctx.grid->set_phases(param.expand(std::vector<double>(m->x->data, m->x->data + dim)));
        worst = ctx.grid->outside_stats(alpha_star, threshold, kNorm, nullptr).worst;
        ++ctx.calls;
        if (gsl_multimin_test_gradient(m->gradient, 1e-7) == GSL_SUCCESS) {
            break;
        }
    }
    for (size_t i = 0; i < dim; ++i) {
        x[i] = gsl_vector_get(m->x, i);
    }
    gsl_multimin_fdfminimizer_free(m);
    gsl_vector_free(start);
    budget.remaining = std::max(0LL, budget.remaining - ctx.calls);
    return worst <= goal;
}

// Continuation in alpha: shrink the target half-width while the descent can
// keep the outside band below threshold.
Stage shrink(const Parametrisation &param, GridEvaluator &grid, std::vector<double> x,
             double alpha_start, double threshold, double alpha_tol, double first_step,
             Budget &budget) {
    Stage best;
    double alpha_star = alpha_start;
    double delta = 0.02;
    double step = first_step;
    while (budget.remaining > 0 && delta >= alpha_tol) {
        std::vector<double> trial = x;
        const bool ok = descend(param, grid, trial, alpha_star, threshold, step, budget);
        if (ok) {
            grid.set_phases(param.expand(trial));
            const double achieved = std::min(alpha_star, coarse_envelope(grid, threshold));
            x = trial;
            best.x = trial;
            best.alpha = achieved;
            best.feasible = true;
            alpha_star = achieved - delta;
            step = 0.05;
        } else if (!best.feasible) {
            // Start was too ambitious; widen and continue from where the
            // descent stopped.
            if (alpha_star >= 0.95) {
                break;
            }
            x = trial;
            alpha_star = std::min(0.95, alpha_star * 1.2);
            step = first_step;
        } else {
            x = best.x;
            delta *= 0.5;
            alpha_star = best.alpha - delta;
            step = 0.02;
        }
    }
    if (!best.feasible) {
        best.x = x;
    }
    return best;
}

std::vector<double> gauge_fixed(std::vector<double> phases) {
    const double offset = phases.front();
    for (double &p : phases) {
        p = std::fmod(p - offset, 2.0);
        if (p < 0.0) {
            p += 2.0;
        }
        if (p >= 2.0) {
            p = 0.0;
        }
    }
    return phases;
}

struct RestartOutcome {
    std::vector<double> phases;
    AlphaResult alpha;
    bool valid = false;
    long long evaluations = 0;
};

RestartOutcome run_restart(const OptimizationSpec &spec, int restart) {
    std::mt19937_64 rng(derive_seed(spec.seed, static_cast<std::uint64_t>(restart)));
    std::uniform_real_distribution<double> uniform(0.0, 2.0);
    GridEvaluator grid(kCoarseGrid);
    Budget budget{spec.evaluations_per_restart()};
    const int n = spec.n_pulses;
    const bool middle_shift = (rng() & 1U) != 0U;

    std::vector<double> phases;
    double alpha = 0.95;
    if (spec.use_reflection_heuristic && n >= 3) {
        Parametrisation sym(n, true, middle_shift);
        std::vector<double> x(sym.dimension());
        for (double &v : x) {
            v = uniform(rng);
        }
        // Two thirds of the budget in the reduced space, the rest to polish.
        Budget reduced{budget.remaining * 2 / 3};
        const long long reserved = budget.remaining - reduced.remaining;
        const double alpha_start = std::min(0.95, spec.initial_alpha_scale / n);
        Stage s = shrink(sym, grid, x, alpha_start, spec.threshold, spec.alpha_tol, 0.25, reduced);
        budget.remaining = reserved + reduced.remaining;
        phases = sym.expand(s.x);
        if (s.feasible) {
            alpha = s.alpha;
        }
    } else {
        phases.assign(n, 0.0);
        for (int k = 1; k < n; ++k) {
            phases[k] = uniform(rng);
        }
    }

    Parametrisation full(n, false, false);
    std::vector<double> x(phases.begin() + 1, phases.end());
    for (double &v : x) {
        v -= phases.front();
    }
    Stage s = shrink(full, grid, x, alpha, spec.threshold, spec.alpha_tol,
                     alpha < 0.95 ? 0.02 : 0.25, budget);
    RestartOutcome out;
    out.phases = gauge_fixed(full.expand(s.x));
    out.evaluations = spec.evaluations_per_restart() - budget.remaining;
    const PhaseSequence seq(out.phases);
    out.alpha = certified_envelope(seq, spec.threshold);
    out.valid = out.alpha.envelope_alpha > 0.0;
    return out;
}

bool better(const RestartOutcome &a, const RestartOutcome &b) {
    if (a.valid != b.valid) {
        return a.valid;
    }
    if (a.alpha.alpha != b.alpha.alpha) {
        return a.alpha.alpha < b.alpha.alpha;
    }
    return std::lexicographical_compare(a.phases.begin(), a.phases.end(), b.phases.begin(),
                                        b.phases.end());
}

}  // namespace

int OptimizationSpec::evaluations_per_restart() const {
    return evaluations > 0 ? evaluations : std::max(2000, 600 * n_pulses);
}

void OptimizationSpec::validate() const {
    if (n_pulses < 2) {
        throw std::invalid_argument("optimizer needs at least two pulses");
    }
    if (!(threshold > 0.0 && threshold < 0.5)) {
        throw std::invalid_argument("threshold must lie in (0, 0.5)");
    }
    if (restarts < 1) {
        throw std::invalid_argument("optimizer needs at least one restart");
    }
    if (evaluations < 0) {
        throw std::invalid_argument("evaluation budget must be non-negative (0 = default)");
    }
    if (!(initial_alpha_scale > 0.0)) {
        throw std::invalid_argument("initial alpha scale must be positive");
    }
    if (!(alpha_tol > 0.0)) {
        throw std::invalid_argument("alpha tolerance must be positive");
    }
}

AlphaResult certified_envelope(const PhaseSequence &seq, double threshold) {
    const AlphaOptions options;
    AlphaResult r;
    r.threshold = threshold;
    r.envelope_alpha = envelope_alpha(seq, threshold, options.scan_points, options.bisection_tol_pi);
    r.max_leakage = max_outside_band(seq, r.envelope_alpha, options.verify_points);
    if (r.max_leakage > threshold) {
        const int dense = options.verify_points;
        r.envelope_alpha = envelope_alpha(seq, threshold, dense, options.bisection_tol_pi);
        r.max_leakage = max_outside_band(seq, r.envelope_alpha, dense * 10);
    }
    r.alpha = r.envelope_alpha;
    r.certified = r.max_leakage <= threshold && r.alpha > 0.0 && r.alpha < 1.0;
    return r;
}

OptimizationResult optimize(const OptimizationSpec &spec) {
    spec.validate();
    std::vector<RestartOutcome> outcomes(spec.restarts);
    std::atomic<int> next{0};
    const auto worker = [&] {
        for (int r = next++; r < spec.restarts; r = next++) {
            outcomes[r] = run_restart(spec, r);
        }
    };
    const int threads = std::max(1, std::min(spec.threads, spec.restarts));
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t) {
        pool.emplace_back(worker);
    }
    worker();
    for (std::thread &t : pool) {
        t.join();
    }

    int best = 0;
    long long total = 0;
    for (int r = 0; r < spec.restarts; ++r) {
        total += outcomes[r].evaluations;
        if (better(outcomes[r], outcomes[best])) {
            best = r;
        }
    }
    OptimizationResult result{PhaseSequence(outcomes[best].phases,
                                            "UN" + std::to_string(spec.n_pulses) + "-opt"),
                              outcomes[best].alpha, best, total};
    return result;
}

std::vector<TableCheck> verify_table(const std::vector<TableEntry> &entries, double tolerance,
                                     double threshold) {
    std::vector<TableCheck> out;
    out.reserve(entries.size());
    for (const TableEntry &e : entries) {
        TableCheck check;
        check.name = e.sequence.name();
        check.claimed = e.alpha;
        check.recomputed = alpha_of(e.sequence, threshold);
        check.pass = std::abs(check.recomputed.alpha - e.alpha) <= tolerance;
        out.push_back(check);
    }
    return out;
}

}  // namespace unprobe
