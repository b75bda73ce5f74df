/*
 Copyright 2026 The BSA Toolkit Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include "bsa/identify.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "bsa/errors.hpp"
#include "bsa/sim.hpp"

namespace bsa {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Integrates the hysteresis state along a sampled phi(t) (piecewise linear,
// so phi_dot is interval-constant). RK4 per interval for consistency with the
// simulation integrator.
std::vector<double> integrate_h(const std::vector<double>& t, const std::vector<double>& phi,
                                double alpha, double beta, double gamma,
                                HysteresisForm form) {
    ActuatorParams p;
    p.alpha = alpha;
    p.beta = beta;
    p.gamma = gamma;
    std::vector<double> h(t.size(), 0.0);
    for (size_t i = 1; i < t.size(); ++i) {
        const double dt = t[i] - t[i - 1];
        const double phi_dot = (phi[i] - phi[i - 1]) / dt;
        auto rate = [&](double along, double hh) {
            const double phi_mid = phi[i - 1] + along * (phi[i] - phi[i - 1]);
            return hysteresis_rate(phi_mid, phi_dot, hh, p, form);
        };
        const double h0 = h[i - 1];
        const double k1 = rate(0.0, h0);
        const double k2 = rate(0.5, h0 + 0.5 * dt * k1);
        const double k3 = rate(0.5, h0 + 0.5 * dt * k2);
        const double k4 = rate(1.0, h0 + dt * k3);
        h[i] = h0 + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return h;
}

VectorXd bouc_wen_residual(const LoadingCycleData& data, double K, double alpha, double beta,
                           double gamma, HysteresisForm form) {
    const std::vector<double> h = integrate_h(data.t, data.phi, alpha, beta, gamma, form);
    VectorXd r(static_cast<long>(data.t.size()));
    for (size_t i = 0; i < data.t.size(); ++i) {
        r[static_cast<long>(i)] = K * (data.phi[i] - h[i]) - data.tau[i];
    }
    return r;
}

// Plain Levenberg-Marquardt with forward-difference Jacobian; parameters are
// kept non-negative through clamping.
struct LmOutcome {
    VectorXd params;
    double sse = 0.0;
    bool converged = false;
    int iterations = 0;
};

LmOutcome levenberg_marquardt(const std::function<VectorXd(const VectorXd&)>& residual,
                              VectorXd start, int max_iter = 60) {
    const double eps = 1e-6;
    double lambda = 1e-3;
    VectorXd x = start;
    VectorXd r = residual(x);
    double sse = r.squaredNorm();
    LmOutcome out;

    for (int iter = 0; iter < max_iter; ++iter) {
        out.iterations = iter + 1;
        MatrixXd jac(r.size(), x.size());
        for (int j = 0; j < x.size(); ++j) {
            VectorXd xp = x;
            const double step = eps * std::max(1.0, std::abs(x[j]));
            xp[j] += step;
            jac.col(j) = (residual(xp) - r) / step;
        }
        const MatrixXd jtj = jac.transpose() * jac;
        const VectorXd jtr = jac.transpose() * r;
        if (jtr.lpNorm<Eigen::Infinity>() < 1e-12) {
            out.converged = true;
            break;
        }

        bool stepped = false;
        for (int tries = 0; tries < 10; ++tries) {
            MatrixXd aug = jtj;
            aug.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-12);
            const VectorXd delta = aug.ldlt().solve(-jtr);
            VectorXd x_new = (x + delta).cwiseMax(0.0);
            const VectorXd r_new = residual(x_new);
            const double sse_new = r_new.squaredNorm();
            if (sse_new < sse) {
                const double rel_drop = (sse - sse_new) / std::max(sse, 1e-300);
                x = x_new;
                r = r_new;
                sse = sse_new;
                lambda = std::max(lambda * 0.3, 1e-12);
                stepped = true;
                if (rel_drop < 1e-10) out.converged = true;
                break;
            }
            lambda *= 10.0;
        }
        if (!stepped) break;  // stalled: report the best point found
        if (out.converged) break;
    }
    out.params = x;
    out.sse = sse;
    return out;
}

} // namespace

LoadingCycleData generate_cycles(const ActuatorParams& p, double theta_dot_set,
                                 double theta_lim, int cycles, double dt,
                                 HysteresisForm form) {
    if (!(theta_dot_set > 0.0)) throw ConfigError("theta_dot_set must be positive");
    if (!(theta_lim > 0.0)) throw ConfigError("theta_lim must be positive");
    if (cycles < 1) throw ConfigError("cycle count must be >= 1");
    if (!(dt > 0.0)) throw ConfigError("dt must be positive");

    LoadingCycleData data;
    data.theta_dot_set = theta_dot_set;
    data.cycles = cycles;

    // Brake engaged: psi stays at zero, phi follows theta exactly. The motor
    // ramps 0 -> +lim, then runs `cycles` full +lim -> -lim -> +lim periods.
    const double quarter = theta_lim / theta_dot_set;
    const double half = 2.0 * theta_lim / theta_dot_set;
    const double total = quarter + 2.0 * half * cycles;

    auto theta_at = [&](double t) {
        if (t <= quarter) return theta_dot_set * t;
        double s = std::fmod(t - quarter, 2.0 * half);
        if (s <= half) return theta_lim - theta_dot_set * s;  // descending leg
        return -theta_lim + theta_dot_set * (s - half);       // ascending leg
    };

    const size_t n = static_cast<size_t>(std::llround(total / dt)) + 1;
    data.t.reserve(n);
    data.phi.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        const double t = std::min(static_cast<double>(i) * dt, total);
        data.t.push_back(t);
        data.phi.push_back(theta_at(t));
    }
    if (data.t.back() < total - 1e-12) {
        data.t.push_back(total);
        data.phi.push_back(theta_at(total));
    }

    const std::vector<double> h = integrate_h(data.t, data.phi, p.alpha, p.beta, p.gamma, form);
    data.tau.resize(data.t.size());
    for (size_t i = 0; i < data.t.size(); ++i) {
        data.tau[i] = p.K * (data.phi[i] - h[i]);
    }
    return data;
}

double fit_stiffness(const LoadingCycleData& data) {
    if (data.t.size() < 10) throw ConfigError("fit_stiffness needs at least 10 samples");
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < data.t.size(); ++i) {
        num += data.phi[i] * data.tau[i];
        den += data.phi[i] * data.phi[i];
    }
    if (den <= 0.0) throw ConfigError("fit_stiffness: degenerate data (zero deflection)");
    return num / den;
}

BoucWenFit fit_bouc_wen(const LoadingCycleData& data, std::optional<double> fixed_K,
                        HysteresisForm form) {
    if (data.cycles < 2 && data.t.size() < 100) {
        throw ConfigError("fit_bouc_wen needs at least two full cycles of data");
    }

    const double K0 = fixed_K ? *fixed_K : fit_stiffness(data);
    const bool k_free = !fixed_K.has_value();

    auto residual = [&](const VectorXd& x) {
        const double K = k_free ? x[3] : K0;
        return bouc_wen_residual(data, K, x[0], x[1], x[2], form);
    };

    // Log-spaced multi-start over the shaping factors.
    const double alphas[] = {0.01, 0.1, 0.5};
    const double betas[] = {0.2, 2.0, 10.0};
    const double gammas[] = {0.06, 0.6, 3.0};

    LmOutcome best;
    best.sse = std::numeric_limits<double>::infinity();
    for (double a : alphas) {
        for (double b : betas) {
            for (double g : gammas) {
                VectorXd start(k_free ? 4 : 3);
                start[0] = a;
                start[1] = b;
                start[2] = g;
                if (k_free) start[3] = K0;
                const LmOutcome out = levenberg_marquardt(residual, start);
                if (out.sse < best.sse) best = out;
            }
        }
    }

    BoucWenFit fit;
    fit.alpha = best.params[0];
    fit.beta = best.params[1];
    fit.gamma = best.params[2];
    fit.K = k_free ? best.params[3] : K0;
    fit.K_fixed = !k_free;
    fit.rms_residual = std::sqrt(best.sse / static_cast<double>(data.t.size()));
    fit.converged = best.converged;
    fit.iterations = best.iterations;
    return fit;
}

double estimate_delay(const DelayLog& log, double threshold_fraction) {
    if (log.t_cmd.size() != log.cmd.size() || log.t_resp.size() != log.resp.size()) {
        throw ConfigError("delay log channels have mismatched lengths");
    }
    if (!(threshold_fraction > 0.0) || threshold_fraction >= 1.0) {
        throw ConfigError("threshold fraction must be in (0, 1)");
    }

    // Command edges: any change in the commanded value.
    std::vector<double> edges;
    for (size_t i = 1; i < log.cmd.size(); ++i) {
        if (log.cmd[i] != log.cmd[i - 1]) edges.push_back(log.t_cmd[i]);
    }
    if (edges.empty()) throw ConfigError("delay log contains no command edge");

    auto resp_at = [&](double t) {
        const auto it = std::lower_bound(log.t_resp.begin(), log.t_resp.end(), t);
        const size_t i = std::min(static_cast<size_t>(it - log.t_resp.begin()),
                                  log.t_resp.size() - 1);
        return log.resp[i];
    };

    double sum = 0.0;
    int counted = 0;
    for (size_t e = 0; e < edges.size(); ++e) {
        const double t_edge = edges[e];
        const double t_next = e + 1 < edges.size() ? edges[e + 1] : log.t_resp.back();
        const double base = resp_at(t_edge);
        const double steady = resp_at(t_next);
        const double change = steady - base;
        if (std::abs(change) < 1e-12) continue;
        const double level = threshold_fraction * std::abs(change);

        bool crossed = false;
        for (size_t i = 0; i < log.t_resp.size(); ++i) {
            if (log.t_resp[i] < t_edge) continue;
            if (log.t_resp[i] > t_next) break;
            if (std::abs(log.resp[i] - base) >= level) {
                sum += log.t_resp[i] - t_edge;
                ++counted;
                crossed = true;
                break;
            }
        }
        if (!crossed) throw ConfigError("response never crosses the detection threshold");
    }
    if (counted == 0) throw ConfigError("response never crosses the detection threshold");
    return sum / counted;
}

double loop_area_per_cycle(const LoadingCycleData& data) {
    // Shoelace integral of the closed phi-tau curve, normalized per cycle.
    double area = 0.0;
    for (size_t i = 1; i < data.t.size(); ++i) {
        area += 0.5 * (data.tau[i] + data.tau[i - 1]) * (data.phi[i] - data.phi[i - 1]);
    }
    // A dissipative loop traversed forward accumulates negative shoelace area;
    // report the dissipated energy as positive.
    return -area / std::max(1, data.cycles);
}

DelayLog generate_delay_log(const ActuatorParams& p, double delay, double q0, double dt) {
    ActuatorParams pd = p;
    pd.delay_clutch = delay;
    pd.delay_brake = delay;

    // Link dropped in DEC while the spring side sits still (phi = 0, so
    // psi_dot is identically zero), then the link clutch is commanded. The
    // response channel psi_dot is flat until the engagement impulse kicks it
    // to the common velocity, so the threshold crossing carries no ramp bias.
    Schedule sched;
    sched.phases = {{Mode::Dec, 0.15}, {Mode::Sea, 0.15}};
    sched.control = ControlSignal::constant(0.0);

    HybridState x0;
    x0.q = q0;

    SimOptions opt;
    opt.apply_delays = delay > 0.0;
    const HybridTrajectory traj = execute_schedule(sched, x0, dt, pd, opt);

    DelayLog log;
    log.t_cmd = {0.0, 0.15, traj.final_time()};
    log.cmd = {0.0, 1.0, 1.0};
    log.t_resp.reserve(traj.samples.size());
    log.resp.reserve(traj.samples.size());
    for (const auto& s : traj.samples) {
        log.t_resp.push_back(s.t);
        log.resp.push_back(s.state.psi_dot);
    }
    return log;
}

} // namespace bsa
