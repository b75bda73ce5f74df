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

#include "bsa/trajopt.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <random>

#include "bsa/errors.hpp"

namespace bsa {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kNx = 5;  // OCP state [theta, psi, q, psi_dot, q_dot]

// Tiny strictly-convex control-effort term added to the solver objective.
// Bang-bang velocity maximization leaves null directions among the control
// nodes (only trapezoid sums enter the defects); this pins them down. The
// induced objective distortion is orders of magnitude below the reporting
// and acceptance tolerances, and the reported J stays exactly -q_dot(t_f).
constexpr double kControlReg = 1e-4;

using Vec5 = Eigen::Matrix<double, kNx, 1>;
using Mat5 = Eigen::Matrix<double, kNx, kNx>;
using Eigen::MatrixXd;
using Eigen::VectorXd;

// Projected inverse inertia (see sim.cpp); reimplemented on the 2x2 level so
// the transcription owns its smooth dynamics end to end.
Eigen::Matrix2d projected_inverse(Mode mode, const ActuatorParams& p) {
    const Eigen::Vector2d b_inv(1.0 / p.J_psi, 1.0 / p.J_q);
    switch (mode) {
        case Mode::Dec:
            return b_inv.asDiagonal();
        case Mode::Brk:
            return Eigen::Matrix2d::Zero();
        default:
            break;
    }
    const Eigen::MatrixXd c = constraint_matrix(mode);
    const Eigen::MatrixXd m = c * b_inv.asDiagonal() * c.transpose();
    return b_inv.asDiagonal() *
           (Eigen::Matrix2d::Identity() - c.transpose() * m.inverse() * c * b_inv.asDiagonal());
}

// Velocity part of the reset map xi_dot+ = Rv xi_dot-.
Eigen::Matrix2d reset_velocity_matrix(Mode mode_to, const ActuatorParams& p) {
    switch (mode_to) {
        case Mode::Dec:
            return Eigen::Matrix2d::Identity();
        case Mode::Sea: {
            Eigen::Matrix2d r;
            const double denom = p.J_psi + p.J_q;
            r << p.J_psi / denom, p.J_q / denom, p.J_psi / denom, p.J_q / denom;
            return r;
        }
        case Mode::Stg: {
            Eigen::Matrix2d r = Eigen::Matrix2d::Zero();
            r(1, 1) = 1.0;
            return r;
        }
        case Mode::Brk:
            return Eigen::Matrix2d::Zero();
    }
    return Eigen::Matrix2d::Identity();
}

// Smooth per-mode dynamics used by the transcription: linear spring law,
// tanh-smoothed friction, motor as a velocity source.
struct SmoothDynamics {
    Eigen::Matrix2d proj;
    double K, mgl, tauC_psi, tauC_q, d_psi, d_q, eps;

    SmoothDynamics(Mode mode, const ActuatorParams& p)
        : proj(projected_inverse(mode, p)),
          K(p.K),
          mgl(p.mgl()),
          tauC_psi(p.tauC_psi),
          tauC_q(p.tauC_q),
          d_psi(p.d_psi),
          d_q(p.d_q),
          eps(p.eps_sign) {}

    Eigen::Vector2d force(const Vec5& x) const {
        const double tau_s = K * (x[0] - x[1]);
        const double f_psi = tau_s - tauC_psi * std::tanh(x[3] / eps) - d_psi * x[3];
        const double f_q = -mgl * std::sin(x[2]) - tauC_q * std::tanh(x[4] / eps) - d_q * x[4];
        return {f_psi, f_q};
    }

    Vec5 eval(const Vec5& x, double u) const {
        const Eigen::Vector2d a = proj * force(x);
        Vec5 dx;
        dx << u, x[3], x[4], a[0], a[1];
        return dx;
    }

    // Weighted second derivative sum_i w_i d2F_i/dx2 lifted to the 5-state;
    // w carries P^T-mapped acceleration multipliers. Only sin(q) and the
    // tanh friction terms are nonlinear.
    Mat5 weighted_force_hessian(const Vec5& x, const Eigen::Vector2d& w) const {
        Mat5 h = Mat5::Zero();
        const double t_psi = std::tanh(x[3] / eps);
        h(3, 3) = w[0] * (2.0 * tauC_psi / (eps * eps)) * t_psi * (1.0 - t_psi * t_psi);
        h(2, 2) = w[1] * mgl * std::sin(x[2]);
        const double t_q = std::tanh(x[4] / eps);
        h(4, 4) = w[1] * (2.0 * tauC_q / (eps * eps)) * t_q * (1.0 - t_q * t_q);
        return h;
    }

    // A = df/dx (df/du is the constant e_0).
    Mat5 state_jacobian(const Vec5& x) const {
        Eigen::Matrix<double, 2, kNx> df = Eigen::Matrix<double, 2, kNx>::Zero();
        df(0, 0) = K;
        df(0, 1) = -K;
        const double th_psi = std::tanh(x[3] / eps);
        df(0, 3) = -tauC_psi * (1.0 - th_psi * th_psi) / eps - d_psi;
        df(1, 2) = -mgl * std::cos(x[2]);
        const double th_q = std::tanh(x[4] / eps);
        df(1, 4) = -tauC_q * (1.0 - th_q * th_q) / eps - d_q;

        Mat5 a = Mat5::Zero();
        a(1, 3) = 1.0;
        a(2, 4) = 1.0;
        a.bottomRows<2>() = proj * df;
        return a;
    }
};

} // namespace

void PhasePlan::validate() const {
    if (modes.empty()) throw ConfigError("phase plan needs at least one mode");
    if (!duration_bounds.empty() && duration_bounds.size() != modes.size()) {
        throw ConfigError("duration_bounds must match the number of phases");
    }
    for (const auto& [lo, hi] : duration_bounds) {
        if (!(lo >= 0.0) || !(hi >= lo)) throw ConfigError("inconsistent phase duration bounds");
    }
    if (t_f_fixed) {
        if (!(t_f > 0.0)) throw ConfigError("fixed final time must be positive");
    } else if (!(t_f_range.second > 0.0) || t_f_range.first < 0.0 ||
               t_f_range.second < t_f_range.first) {
        throw ConfigError("inconsistent final-time range");
    }
}

std::vector<double> Solution::node_times(int phase) const {
    std::vector<double> times;
    double start = 0.0;
    for (int p = 0; p < phase; ++p) start += durations[p];
    const long n_nodes = controls[phase].size();
    times.reserve(n_nodes);
    for (long k = 0; k < n_nodes; ++k) {
        // Fraction first, and the end node lands exactly on the boundary so
        // per-phase stamps agree bit-for-bit across the interface.
        const double frac = static_cast<double>(k) / static_cast<double>(n_nodes - 1);
        times.push_back(k == n_nodes - 1 ? start + durations[phase]
                                         : start + durations[phase] * frac);
    }
    return times;
}

double Solution::total_duration() const {
    double total = 0.0;
    for (double d : durations) total += d;
    return total;
}

struct OcpProblem::Impl {
    PhasePlan plan;
    ActuatorParams params;
    CollocationConfig config;
    PathBounds bounds;
    HybridState x_init;                            // after reset into mode 0
    std::array<std::optional<double>, kNx> terminal;

    int num_phases = 0;
    int segs = 0;  // per phase
    int nodes = 0;
    int nvar = 0;
    int ncon = 0;
    std::vector<int> phase_base;
    int dur_base = 0;
    std::vector<int> defect_base;
    int linkage_base = 0;
    bool has_dursum_row = false;  // absent when a single pinned duration covers it
    int dursum_row = -1;
    std::vector<int> path_base;
    int path_skip_first = 1;  // node-0 deflection row is fixed by the pinned start

    std::vector<SmoothDynamics> dynamics;          // per phase
    std::vector<Eigen::Matrix2d> reset_v;          // into phase p (p >= 1)

    NlpProblem nlp;

    int s_idx(int p, int k, int c) const { return phase_base[p] + k * kNx + c; }
    int u_idx(int p, int k) const { return phase_base[p] + kNx * nodes + k; }
    int t_idx(int p) const { return dur_base + p; }
    int path_first_node(int p) const { return p == 0 ? path_skip_first : 0; }
    int path_row(int p, int k) const { return path_base[p] + k - path_first_node(p); }

    // f and A at each node of one phase.
    struct PhaseEval {
        std::vector<Vec5> f;
        std::vector<Mat5> a;
    };

    PhaseEval eval_phase_nodes(const VectorXd& v, int p, bool with_jacobian) const {
        PhaseEval pe;
        pe.f.resize(nodes);
        if (with_jacobian) pe.a.resize(nodes);
        for (int k = 0; k < nodes; ++k) {
            const Vec5 x = v.segment<kNx>(s_idx(p, k, 0));
            const double u = v[u_idx(p, k)];
            pe.f[k] = dynamics[p].eval(x, u);
            if (with_jacobian) pe.a[k] = dynamics[p].state_jacobian(x);
        }
        return pe;
    }

    VectorXd eval_constraints(const VectorXd& v) const;
    MatrixXd eval_jacobian(const VectorXd& v) const;
    MatrixXd eval_hessian(const VectorXd& v, const VectorXd& y) const;  // trapezoidal only
    VectorXd guess(unsigned k) const;
};

VectorXd OcpProblem::Impl::eval_constraints(const VectorXd& v) const {
    VectorXd c = VectorXd::Zero(ncon);

    for (int p = 0; p < num_phases; ++p) {
        const PhaseEval pe = eval_phase_nodes(v, p, false);
        const double T = v[t_idx(p)];
        const double hseg = T / segs;
        for (int k = 0; k < segs; ++k) {
            const Vec5 xk = v.segment<kNx>(s_idx(p, k, 0));
            const Vec5 xk1 = v.segment<kNx>(s_idx(p, k + 1, 0));
            Vec5 defect;
            if (config.scheme == CollocationScheme::Trapezoidal) {
                defect = xk1 - xk - 0.5 * hseg * (pe.f[k] + pe.f[k + 1]);
            } else {
                const double um = 0.5 * (v[u_idx(p, k)] + v[u_idx(p, k + 1)]);
                const Vec5 xm = 0.5 * (xk + xk1) + (hseg / 8.0) * (pe.f[k] - pe.f[k + 1]);
                const Vec5 fm = dynamics[p].eval(xm, um);
                defect = xk1 - xk - (hseg / 6.0) * (pe.f[k] + 4.0 * fm + pe.f[k + 1]);
            }
            c.segment<kNx>(defect_base[p] + kNx * k) = defect;
        }
    }

    for (int p = 0; p + 1 < num_phases; ++p) {
        const Vec5 x_end = v.segment<kNx>(s_idx(p, segs, 0));
        const Vec5 x_next = v.segment<kNx>(s_idx(p + 1, 0, 0));
        Vec5 mapped = x_end;
        mapped.tail<2>() = reset_v[p] * x_end.tail<2>();
        c.segment<kNx>(linkage_base + kNx * p) = x_next - mapped;
    }

    if (has_dursum_row) {
        double t_sum = 0.0;
        for (int p = 0; p < num_phases; ++p) t_sum += v[t_idx(p)];
        c[dursum_row] = t_sum;
    }

    for (int p = 0; p < num_phases; ++p) {
        for (int k = path_first_node(p); k < nodes; ++k) {
            c[path_row(p, k)] = v[s_idx(p, k, 0)] - v[s_idx(p, k, 1)];
        }
    }
    return c;
}

MatrixXd OcpProblem::Impl::eval_jacobian(const VectorXd& v) const {
    MatrixXd jac = MatrixXd::Zero(ncon, nvar);
    const Vec5 b_ctrl = (Vec5() << 1, 0, 0, 0, 0).finished();

    for (int p = 0; p < num_phases; ++p) {
        const PhaseEval pe = eval_phase_nodes(v, p, true);
        const double T = v[t_idx(p)];
        const double hseg = T / segs;
        for (int k = 0; k < segs; ++k) {
            const int row = defect_base[p] + kNx * k;
            auto block_x = [&](int node) { return jac.block<kNx, kNx>(row, s_idx(p, node, 0)); };
            auto col_u = [&](int node) { return jac.block<kNx, 1>(row, u_idx(p, node)); };

            if (config.scheme == CollocationScheme::Trapezoidal) {
                block_x(k) = -Mat5::Identity() - 0.5 * hseg * pe.a[k];
                block_x(k + 1) = Mat5::Identity() - 0.5 * hseg * pe.a[k + 1];
                col_u(k) = -0.5 * hseg * b_ctrl;
                col_u(k + 1) = -0.5 * hseg * b_ctrl;
                jac.block<kNx, 1>(row, t_idx(p)) =
                    -(1.0 / (2.0 * segs)) * (pe.f[k] + pe.f[k + 1]);
            } else {
                const Vec5 xk = v.segment<kNx>(s_idx(p, k, 0));
                const Vec5 xk1 = v.segment<kNx>(s_idx(p, k + 1, 0));
                const double um = 0.5 * (v[u_idx(p, k)] + v[u_idx(p, k + 1)]);
                const Vec5 xm = 0.5 * (xk + xk1) + (hseg / 8.0) * (pe.f[k] - pe.f[k + 1]);
                const Vec5 fm = dynamics[p].eval(xm, um);
                const Mat5 am = dynamics[p].state_jacobian(xm);

                const Mat5 dxm_dxk = 0.5 * Mat5::Identity() + (hseg / 8.0) * pe.a[k];
                const Mat5 dxm_dxk1 = 0.5 * Mat5::Identity() - (hseg / 8.0) * pe.a[k + 1];
                const Vec5 dxm_duk = (hseg / 8.0) * b_ctrl;
                const Vec5 dxm_duk1 = -(hseg / 8.0) * b_ctrl;
                const Vec5 dxm_dt = (1.0 / (8.0 * segs)) * (pe.f[k] - pe.f[k + 1]);

                block_x(k) = -Mat5::Identity() - (hseg / 6.0) * (pe.a[k] + 4.0 * (am * dxm_dxk));
                block_x(k + 1) =
                    Mat5::Identity() - (hseg / 6.0) * (pe.a[k + 1] + 4.0 * (am * dxm_dxk1));
                col_u(k) = -(hseg / 6.0) * (b_ctrl + 4.0 * (am * dxm_duk + 0.5 * b_ctrl));
                col_u(k + 1) = -(hseg / 6.0) * (b_ctrl + 4.0 * (am * dxm_duk1 + 0.5 * b_ctrl));
                jac.block<kNx, 1>(row, t_idx(p)) =
                    -(1.0 / (6.0 * segs)) * (pe.f[k] + 4.0 * fm + pe.f[k + 1]) -
                    (hseg / 6.0) * 4.0 * (am * dxm_dt);
            }
        }
    }

    for (int p = 0; p + 1 < num_phases; ++p) {
        const int row = linkage_base + kNx * p;
        jac.block<kNx, kNx>(row, s_idx(p + 1, 0, 0)) = Mat5::Identity();
        Mat5 r5 = Mat5::Identity();
        r5.block<2, 2>(3, 3) = reset_v[p];
        jac.block<kNx, kNx>(row, s_idx(p, segs, 0)) = -r5;
    }

    if (has_dursum_row) {
        for (int p = 0; p < num_phases; ++p) jac(dursum_row, t_idx(p)) = 1.0;
    }

    for (int p = 0; p < num_phases; ++p) {
        for (int k = path_first_node(p); k < nodes; ++k) {
            jac(path_row(p, k), s_idx(p, k, 0)) = 1.0;
            jac(path_row(p, k), s_idx(p, k, 1)) = -1.0;
        }
    }
    return jac;
}

// Exact Hessian of y^T c(v): linkage, duration, and deflection rows are
// linear, so only the trapezoidal defects contribute. The objective is linear
// in the final node and adds nothing.
MatrixXd OcpProblem::Impl::eval_hessian(const VectorXd& v, const VectorXd& y) const {
    MatrixXd hess = MatrixXd::Zero(nvar, nvar);
    for (int p = 0; p < num_phases; ++p) {
        const PhaseEval pe = eval_phase_nodes(v, p, true);
        const double T = v[t_idx(p)];
        const double inv2n = 1.0 / (2.0 * segs);
        for (int k = 0; k < segs; ++k) {
            const Eigen::Matrix<double, kNx, 1> y_d = y.segment<kNx>(defect_base[p] + kNx * k);
            const Eigen::Vector2d w = dynamics[p].proj.transpose() * y_d.tail<2>();
            for (int node : {k, k + 1}) {
                const Vec5 x = v.segment<kNx>(s_idx(p, node, 0));
                hess.block<kNx, kNx>(s_idx(p, node, 0), s_idx(p, node, 0)) -=
                    (T * inv2n) * dynamics[p].weighted_force_hessian(x, w);
                const Vec5 cross = -inv2n * (pe.a[node].transpose() * y_d);
                hess.block<kNx, 1>(s_idx(p, node, 0), t_idx(p)) += cross;
                hess.block<1, kNx>(t_idx(p), s_idx(p, node, 0)) += cross.transpose();
                hess(u_idx(p, node), t_idx(p)) -= inv2n * y_d[0];
                hess(t_idx(p), u_idx(p, node)) -= inv2n * y_d[0];
            }
        }
    }
    return hess;
}

VectorXd OcpProblem::Impl::guess(unsigned variant) const {
    VectorXd v = VectorXd::Zero(nvar);

    // Durations: equal split of the target horizon, clamped into bounds.
    const double horizon = plan.t_f_fixed
                               ? plan.t_f
                               : 0.5 * (plan.t_f_range.first + plan.t_f_range.second);
    std::vector<double> t_guess(num_phases, horizon / num_phases);
    for (int p = 0; p < num_phases; ++p) {
        const double lo = nlp.x_lower[t_idx(p)];
        const double hi = nlp.x_upper[t_idx(p)];
        t_guess[p] = std::clamp(t_guess[p], lo, hi);
    }
    if (plan.t_f_fixed && num_phases > 1) {
        // keep the sum exact under clamping
        double sum = 0.0;
        for (double t : t_guess) sum += t;
        const double excess = sum - plan.t_f;
        t_guess.back() = std::max(nlp.x_lower[t_idx(num_phases - 1)], t_guess.back() - excess);
    }

    std::mt19937_64 rng(static_cast<uint64_t>(config.seed) * 0x9e3779b97f4a7c15ull + variant);
    auto uniform = [&rng](double lo, double hi) {
        const double r = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        return lo + r * (hi - lo);
    };

    // Controls: zero for the nominal guess; otherwise a bounded sine or
    // square waveform spanning roughly half to one-and-a-half cycles over
    // the horizon, which is where the actuator's useful strategies live.
    double amp = 0.0, omega = 0.0, phase_off = 0.0;
    bool square = false;
    if (variant > 0) {
        amp = uniform(0.4, 1.0) * bounds.u_max;
        omega = uniform(0.5, 1.6) * 2.0 * M_PI / std::max(horizon, 1e-6);
        phase_off = uniform(0.0, 2.0 * M_PI);
        square = (variant % 2) == 0;
    }
    auto control_at = [&](double t) {
        if (variant == 0) return 0.0;
        const double s = std::sin(omega * t + phase_off);
        const double raw = square ? amp * (s >= 0.0 ? 1.0 : -1.0) : amp * s;
        return std::clamp(raw, -bounds.u_max, bounds.u_max);
    };

    // States: forward simulation of the waveform through the phase dynamics
    // (RK4 substeps between nodes, exact reset at interfaces), so the guess
    // starts essentially feasible.
    const Vec5 x0 = (Vec5() << x_init.theta, x_init.psi, x_init.q, x_init.psi_dot,
                    x_init.q_dot).finished();
    Vec5 x = x0;
    double t_global = 0.0;
    bool blew_up = false;
    for (int p = 0; p < num_phases; ++p) {
        if (p > 0) x.tail<2>() = reset_v[p - 1] * x.tail<2>();
        const double h = t_guess[p] / segs;
        for (int k = 0; k < nodes; ++k) {
            Vec5 x_clamped = x;
            x_clamped[0] = std::clamp(x_clamped[0], -bounds.theta_range, bounds.theta_range);
            v.segment<kNx>(s_idx(p, k, 0)) = x_clamped;
            v[u_idx(p, k)] = control_at(t_global);
            if (k == segs) break;
            const int substeps = 4;
            const double dt = h / substeps;
            for (int s = 0; s < substeps; ++s) {
                const double ts = t_global + s * dt;
                const auto f = [&](double tt, const Vec5& xx) {
                    return dynamics[p].eval(xx, control_at(tt));
                };
                const Vec5 k1 = f(ts, x);
                const Vec5 k2 = f(ts + 0.5 * dt, x + 0.5 * dt * k1);
                const Vec5 k3 = f(ts + 0.5 * dt, x + 0.5 * dt * k2);
                const Vec5 k4 = f(ts + dt, x + dt * k3);
                x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            }
            t_global += h;
            if (!x.allFinite() || x.lpNorm<Eigen::Infinity>() > 1e3) {
                blew_up = true;
                break;
            }
        }
        v[t_idx(p)] = t_guess[p];
        if (blew_up) break;
    }

    if (blew_up) {
        // Fall back to a node-wise interpolation toward a gently moving link.
        Vec5 x_end = x0;
        x_end[4] += 0.1;
        const int total_nodes = num_phases * nodes;
        int node_counter = 0;
        for (int p = 0; p < num_phases; ++p) {
            for (int k = 0; k < nodes; ++k, ++node_counter) {
                const double frac = static_cast<double>(node_counter) / (total_nodes - 1);
                v.segment<kNx>(s_idx(p, k, 0)) = x0 + frac * (x_end - x0);
                v[u_idx(p, k)] = 0.0;
            }
            v[t_idx(p)] = t_guess[p];
        }
    }

    // Respect pinned first/last nodes exactly.
    v.segment<kNx>(s_idx(0, 0, 0)) = x0;
    for (int i = 0; i < kNx; ++i) {
        if (terminal[i]) v[s_idx(num_phases - 1, segs, i)] = *terminal[i];
    }
    return v;
}

OcpProblem build_ocp(const PhasePlan& plan, const ActuatorParams& params,
                     const CollocationConfig& config, const OcpBoundary& boundary,
                     std::optional<PathBounds> path_bounds) {
    plan.validate();
    if (config.segments_per_phase < 2) throw ConfigError("segments_per_phase must be >= 2");

    auto impl = std::make_shared<OcpProblem::Impl>();
    impl->plan = plan;
    impl->params = params;
    impl->config = config;
    impl->bounds = path_bounds ? *path_bounds : PathBounds::from_params(params);
    impl->terminal = boundary.terminal;
    impl->x_init = reset(plan.modes.front(), boundary.initial, params);

    if (std::abs(impl->x_init.theta) > impl->bounds.theta_range + 1e-12 ||
        std::abs(impl->x_init.phi()) > impl->bounds.phi_max + 1e-12) {
        throw ConfigError("initial state violates the path bounds");
    }

    const int np = static_cast<int>(plan.modes.size());
    impl->num_phases = np;
    impl->segs = config.segments_per_phase;
    impl->nodes = impl->segs + 1;

    impl->phase_base.resize(np);
    int offset = 0;
    for (int p = 0; p < np; ++p) {
        impl->phase_base[p] = offset;
        offset += kNx * impl->nodes + impl->nodes;
    }
    impl->dur_base = offset;
    impl->nvar = offset + np;

    int crow = 0;
    impl->defect_base.resize(np);
    for (int p = 0; p < np; ++p) {
        impl->defect_base[p] = crow;
        crow += kNx * impl->segs;
    }
    impl->linkage_base = crow;
    crow += kNx * (np - 1);
    // A single pinned duration makes the sum row vacuous (and rank-deficient
    // once the fixed variable is eliminated), so it is only emitted when it
    // actually couples free variables.
    impl->has_dursum_row = !(np == 1 && plan.t_f_fixed);
    if (impl->has_dursum_row) impl->dursum_row = crow++;
    impl->path_base.resize(np);
    for (int p = 0; p < np; ++p) {
        impl->path_base[p] = crow;
        crow += impl->nodes - impl->path_first_node(p);
    }
    impl->ncon = crow;

    for (int p = 0; p < np; ++p) impl->dynamics.emplace_back(plan.modes[p], params);
    for (int p = 0; p + 1 < np; ++p) {
        impl->reset_v.push_back(reset_velocity_matrix(plan.modes[p + 1], params));
    }

    // --- bounds ---------------------------------------------------------------
    NlpProblem& nlp = impl->nlp;
    nlp.num_vars = impl->nvar;
    nlp.num_cons = impl->ncon;
    nlp.x_lower = VectorXd::Constant(impl->nvar, -kInf);
    nlp.x_upper = VectorXd::Constant(impl->nvar, kInf);

    for (int p = 0; p < np; ++p) {
        for (int k = 0; k < impl->nodes; ++k) {
            nlp.x_lower[impl->s_idx(p, k, 0)] = -impl->bounds.theta_range;
            nlp.x_upper[impl->s_idx(p, k, 0)] = impl->bounds.theta_range;
            nlp.x_lower[impl->u_idx(p, k)] = -impl->bounds.u_max;
            nlp.x_upper[impl->u_idx(p, k)] = impl->bounds.u_max;
        }
        double lo = config.min_phase_duration;
        double hi = plan.t_f_upper();
        if (!plan.duration_bounds.empty()) {
            lo = std::max(lo, plan.duration_bounds[p].first);
            hi = std::min(hi, plan.duration_bounds[p].second);
        }
        if (np == 1 && plan.t_f_fixed) lo = hi = plan.t_f;  // pinned
        if (lo > hi) throw ConfigError("inconsistent phase duration bounds");
        nlp.x_lower[impl->t_idx(p)] = lo;
        nlp.x_upper[impl->t_idx(p)] = hi;
    }

    // Pin the initial node; pin requested terminal components.
    const Vec5 x0 = (Vec5() << impl->x_init.theta, impl->x_init.psi, impl->x_init.q,
                    impl->x_init.psi_dot, impl->x_init.q_dot).finished();
    for (int i = 0; i < kNx; ++i) {
        nlp.x_lower[impl->s_idx(0, 0, i)] = x0[i];
        nlp.x_upper[impl->s_idx(0, 0, i)] = x0[i];
        if (boundary.terminal[i]) {
            nlp.x_lower[impl->s_idx(np - 1, impl->segs, i)] = *boundary.terminal[i];
            nlp.x_upper[impl->s_idx(np - 1, impl->segs, i)] = *boundary.terminal[i];
        }
    }

    nlp.c_lower = VectorXd::Zero(impl->ncon);
    nlp.c_upper = VectorXd::Zero(impl->ncon);
    if (impl->has_dursum_row) {
        if (plan.t_f_fixed) {
            nlp.c_lower[impl->dursum_row] = plan.t_f;
            nlp.c_upper[impl->dursum_row] = plan.t_f;
        } else {
            nlp.c_lower[impl->dursum_row] =
                std::max(plan.t_f_range.first, np * config.min_phase_duration);
            nlp.c_upper[impl->dursum_row] = plan.t_f_range.second;
        }
    }
    for (int p = 0; p < np; ++p) {
        for (int k = impl->path_first_node(p); k < impl->nodes; ++k) {
            nlp.c_lower[impl->path_row(p, k)] = -impl->bounds.phi_max;
            nlp.c_upper[impl->path_row(p, k)] = impl->bounds.phi_max;
        }
    }

    // --- callbacks --------------------------------------------------------------
    const int obj_var = impl->s_idx(np - 1, impl->segs, 4);
    const int nvar = impl->nvar;
    std::shared_ptr<const OcpProblem::Impl> shared = impl;

    std::vector<int> u_vars;
    for (int p = 0; p < np; ++p) {
        for (int k = 0; k < impl->nodes; ++k) u_vars.push_back(impl->u_idx(p, k));
    }

    nlp.objective = [obj_var, u_vars](const VectorXd& v) {
        double reg = 0.0;
        for (int i : u_vars) reg += v[i] * v[i];
        return -v[obj_var] + kControlReg * reg;
    };
    nlp.objective_gradient = [obj_var, u_vars, nvar](const VectorXd& v) {
        VectorXd g = VectorXd::Zero(nvar);
        g[obj_var] = -1.0;
        for (int i : u_vars) g[i] = 2.0 * kControlReg * v[i];
        return g;
    };
    nlp.constraints = [shared](const VectorXd& v) { return shared->eval_constraints(v); };
    nlp.constraint_jacobian = [shared](const VectorXd& v) { return shared->eval_jacobian(v); };
    if (config.scheme == CollocationScheme::Trapezoidal) {
        nlp.lagrangian_hessian = [shared, u_vars](const VectorXd& v, const VectorXd& y) {
            MatrixXd h = shared->eval_hessian(v, y);
            for (int i : u_vars) h(i, i) += 2.0 * kControlReg;
            return h;
        };
    }

    OcpProblem problem;
    problem.impl_ = impl;
    return problem;
}

const NlpProblem& OcpProblem::nlp() const { return impl_->nlp; }
int OcpProblem::num_phases() const { return impl_->num_phases; }
int OcpProblem::segments_per_phase() const { return impl_->segs; }
int OcpProblem::num_vars() const { return impl_->nvar; }
int OcpProblem::num_cons() const { return impl_->ncon; }
int OcpProblem::state_index(int phase, int node, int comp) const {
    return impl_->s_idx(phase, node, comp);
}
int OcpProblem::control_index(int phase, int node) const { return impl_->u_idx(phase, node); }
int OcpProblem::duration_index(int phase) const { return impl_->t_idx(phase); }
VectorXd OcpProblem::initial_guess(unsigned k) const { return impl_->guess(k); }
const PhasePlan& OcpProblem::plan() const { return impl_->plan; }
const CollocationConfig& OcpProblem::config() const { return impl_->config; }
const ActuatorParams& OcpProblem::params() const { return impl_->params; }
const HybridState& OcpProblem::initial_state() const { return impl_->x_init; }

Solution OcpProblem::package(const NlpResult& r) const {
    const Impl& im = *impl_;
    Solution sol;
    sol.modes = im.plan.modes;
    sol.states.resize(im.num_phases);
    sol.controls.resize(im.num_phases);
    sol.durations.resize(im.num_phases);
    for (int p = 0; p < im.num_phases; ++p) {
        sol.states[p].resize(kNx, im.nodes);
        sol.controls[p].resize(im.nodes);
        for (int k = 0; k < im.nodes; ++k) {
            sol.states[p].col(k) = r.x.segment<kNx>(im.s_idx(p, k, 0));
            sol.controls[p][k] = r.x[im.u_idx(p, k)];
        }
        sol.durations[p] = r.x[im.t_idx(p)];
    }
    // Reported J is exactly -q_dot at the final node (the regularization term
    // is solver-internal).
    sol.objective = -r.x[im.s_idx(im.num_phases - 1, im.segs, 4)];
    sol.status = r.status;
    sol.kkt_error = r.kkt_error;
    sol.constraint_violation = r.constraint_violation;
    sol.iterations = r.iterations;
    return sol;
}

Solution solve(const OcpProblem& problem) {
    const CollocationConfig& cfg = problem.config();
    NlpOptions opts;
    opts.tol = cfg.kkt_tol;
    // Per-start budget: well-posed starts converge in tens to a few hundred
    // iterations; a start grinding past that is a bad basin and another start
    // will win. The full budget is spent on the winner if nothing converged.
    opts.max_iter = std::min(cfg.max_iter, 800);

    const int n_starts = std::max(1, cfg.multi_start);
    std::vector<NlpResult> results(n_starts);

    auto run_one = [&](int k, const NlpOptions& o) {
        return solve_nlp(problem.nlp(), problem.initial_guess(static_cast<unsigned>(k)), o);
    };

    if (cfg.parallel_starts && n_starts > 1) {
        std::vector<std::future<NlpResult>> futures;
        futures.reserve(n_starts);
        for (int k = 0; k < n_starts; ++k) {
            futures.push_back(std::async(std::launch::async, run_one, k, opts));
        }
        for (int k = 0; k < n_starts; ++k) results[k] = futures[k].get();
    } else {
        for (int k = 0; k < n_starts; ++k) results[k] = run_one(k, opts);
    }

    // Best objective among converged runs; otherwise the least-infeasible run.
    auto pick_winner = [&]() {
        int winner = -1;
        for (int k = 0; k < n_starts; ++k) {
            if (results[k].status != NlpStatus::Converged) continue;
            if (winner < 0 || results[k].objective < results[winner].objective) winner = k;
        }
        if (winner < 0) {
            winner = 0;
            for (int k = 1; k < n_starts; ++k) {
                if (results[k].constraint_violation < results[winner].constraint_violation) {
                    winner = k;
                }
            }
        }
        return winner;
    };

    int winner = pick_winner();
    if (results[winner].status != NlpStatus::Converged && cfg.max_iter > opts.max_iter) {
        NlpOptions full = opts;
        full.max_iter = cfg.max_iter;
        results[winner] = run_one(winner, full);
        winner = pick_winner();
    }

    Solution sol = problem.package(results[winner]);
    sol.multi_start_winner = winner;
    return sol;
}

ReplayResult reconstruct(const Solution& solution, const ActuatorParams& params, double dt,
                         const SimOptions& opt) {
    const int np = static_cast<int>(solution.modes.size());
    Schedule sched;
    std::vector<double> times;
    std::vector<double> values;
    for (int p = 0; p < np; ++p) {
        sched.phases.push_back({solution.modes[p], solution.durations[p]});
        const std::vector<double> t_nodes = solution.node_times(p);
        for (size_t k = 0; k < t_nodes.size(); ++k) {
            times.push_back(t_nodes[k]);
            values.push_back(solution.controls[p][static_cast<long>(k)]);
        }
    }
    sched.control = ControlSignal::sampled(std::move(times), std::move(values));

    HybridState x0;
    if (np > 0) {
        const Eigen::VectorXd first = solution.states[0].col(0);
        x0.theta = first[0];
        x0.psi = first[1];
        x0.q = first[2];
        x0.psi_dot = first[3];
        x0.q_dot = first[4];
    }

    ReplayResult out;
    out.trajectory = execute_schedule(sched, x0, dt, params, opt);
    out.final_qdot = out.trajectory.final_state().q_dot;
    out.gap = std::abs(out.final_qdot - solution.final_qdot());
    return out;
}

double check_derivatives(const OcpProblem& problem, const VectorXd& point, double eps) {
    const NlpProblem& nlp = problem.nlp();
    const MatrixXd jac = nlp.constraint_jacobian(point);
    const VectorXd grad = nlp.objective_gradient(point);

    double max_rel = 0.0;
    VectorXd x = point;
    for (int i = 0; i < nlp.num_vars; ++i) {
        const double saved = x[i];
        x[i] = saved + eps;
        const VectorXd c_plus = nlp.constraints(x);
        const double f_plus = nlp.objective(x);
        x[i] = saved - eps;
        const VectorXd c_minus = nlp.constraints(x);
        const double f_minus = nlp.objective(x);
        x[i] = saved;

        for (int j = 0; j < nlp.num_cons; ++j) {
            const double fd = (c_plus[j] - c_minus[j]) / (2.0 * eps);
            const double rel = std::abs(fd - jac(j, i)) / std::max(1.0, std::abs(jac(j, i)));
            max_rel = std::max(max_rel, rel);
        }
        const double fd_g = (f_plus - f_minus) / (2.0 * eps);
        max_rel = std::max(max_rel, std::abs(fd_g - grad[i]) / std::max(1.0, std::abs(grad[i])));
    }
    return max_rel;
}

} // namespace bsa
