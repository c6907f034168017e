#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "qread/common.hpp"
#include "qread/rng.hpp"
#include "qread/state_algebra.hpp"

namespace qread {

enum class SmeModel { model1, model2 };

/// Euler-Maruyama configuration. Model I monitors all three Pauli axes
/// (three Wiener channels), Model II monitors Z only while precessing about
/// X at frequency omega; alpha = omega tau / 2 is the quality factor.
struct SmeConfig {
    SmeModel model = SmeModel::model1;
    double tau = 1.0;
    double omega = 0.0;
    double eta = 1.0;
    double dt = 1e-3;
    double t_final = 1.0;
    std::uint64_t seed = 0;

    int channels() const { return model == SmeModel::model1 ? 3 : 1; }
    double alpha() const { return omega * tau / 2.0; }

    void validate() const {
        if (!(tau > 0.0)) throw validation_error("SmeConfig: tau must be positive");
        if (!(dt > 0.0)) throw validation_error("SmeConfig: dt must be positive");
        if (dt > tau / 50.0 * (1.0 + 1e-12)) throw validation_error("SmeConfig: dt must be at most tau/50");
        if (!(t_final >= 0.0)) throw validation_error("SmeConfig: t_final must be nonnegative");
        if (!(eta >= 0.0 && eta <= 1.0)) throw validation_error("SmeConfig: eta must lie in [0, 1]");
    }
};

struct SmePath {
    std::vector<double> time;                  // n_steps + 1 grid points
    std::vector<PauliVector> states;           // state at each grid point
    std::vector<std::array<double, 3>> dy;     // output increment per step; unused channels stay 0
};

/// One Euler-Maruyama step. dW carries one Wiener increment per channel
/// (variance dt each); dy_out receives dy_nu = (2 sqrt(eta)/tau) Tr[L_nu rho] dt
/// + dW_nu / sqrt(tau).
///
/// After the explicit advance the state is renormalized: eta = 1 steps that
/// start on the Bloch sphere are projected back onto it (the exact flow
/// preserves purity, and the projected scheme keeps the ensemble mean
/// unbiased), anything else is clipped to the ball when the quadratic
/// variation pushes it outside. Excess beyond 0.5 means the step size is far
/// past stability and raises integrator_blowup_error.
inline PauliVector sme_step(const SmeConfig& config, const PauliVector& state, std::span<const double> dW,
                            std::span<double> dy_out) {
    const double dt = config.dt;
    const double tau = config.tau;
    const double diff = std::sqrt(config.eta / tau);
    const double out_gain = 2.0 * std::sqrt(config.eta) / tau;
    const double inv_sqrt_tau = 1.0 / std::sqrt(tau);

    const double r_pre = state.bloch_norm();
    PauliVector p = state;

    if (config.model == SmeModel::model1) {
        // drift: all Bloch components decay at rate 4/tau
        const double decay = 4.0 / tau * dt;
        PauliVector d{0.0, -decay * p.px, -decay * p.py, -decay * p.pz};
        const double comps[3] = {p.px, p.py, p.pz};
        for (int ch = 0; ch < 3; ++ch) {
            const double w = dW[static_cast<std::size_t>(ch)];
            // H[sigma_ch] rho in Pauli components: 2 e_ch - 2 p_ch * p
            d.px += diff * ((ch == 0 ? 2.0 : 0.0) - 2.0 * comps[ch] * p.px) * w;
            d.py += diff * ((ch == 1 ? 2.0 : 0.0) - 2.0 * comps[ch] * p.py) * w;
            d.pz += diff * ((ch == 2 ? 2.0 : 0.0) - 2.0 * comps[ch] * p.pz) * w;
            dy_out[static_cast<std::size_t>(ch)] = out_gain * comps[ch] * dt + inv_sqrt_tau * w;
        }
        p.px += d.px;
        p.py += d.py;
        p.pz += d.pz;
    } else {
        const double w = dW[0];
        const double dpx = -(2.0 / tau) * p.px * dt + diff * (-2.0 * p.pz * p.px) * w;
        const double dpy = (-(2.0 / tau) * p.py - config.omega * p.pz) * dt + diff * (-2.0 * p.pz * p.py) * w;
        const double dpz = config.omega * p.py * dt + diff * 2.0 * (1.0 - p.pz * p.pz) * w;
        dy_out[0] = out_gain * p.pz * dt + inv_sqrt_tau * w;
        p.px += dpx;
        p.py += dpy;
        p.pz += dpz;
    }
    p.p0 = 1.0;

    const double r = p.bloch_norm();
    const bool pure_exact = config.eta >= 1.0 - 1e-12 && r_pre >= 1.0 - 1e-9;
    if (pure_exact) {
        if (std::abs(r - 1.0) > 0.5) throw integrator_blowup_error("sme_step: step left the Bloch sphere region; reduce dt");
        p.px /= r;
        p.py /= r;
        p.pz /= r;
    } else if (r > 1.0) {
        if (r - 1.0 > 0.5) throw integrator_blowup_error("sme_step: state far outside the Bloch ball; reduce dt");
        p.px /= r;
        p.py /= r;
        p.pz /= r;
    }
    return p;
}

/// Full path with Wiener increments Normal(0, dt) from the counter-based
/// stream (config.seed, path_index); replays are bit-identical.
inline SmePath integrate_sme(const SmeConfig& config, const DensityMatrix& rho0, std::uint64_t path_index = 0) {
    config.validate();
    const long long n_steps = std::llround(config.t_final / config.dt);
    RandomStream rng(config.seed, path_index);
    const int n_ch = config.channels();
    const double root_dt = std::sqrt(config.dt);

    SmePath path;
    path.time.reserve(static_cast<std::size_t>(n_steps) + 1);
    path.states.reserve(static_cast<std::size_t>(n_steps) + 1);
    path.dy.reserve(static_cast<std::size_t>(n_steps));

    PauliVector p = rho0.pauli();
    path.time.push_back(0.0);
    path.states.push_back(p);
    std::array<double, 3> dW{};
    std::array<double, 3> dy{};
    for (long long k = 0; k < n_steps; ++k) {
        for (int ch = 0; ch < n_ch; ++ch) dW[static_cast<std::size_t>(ch)] = root_dt * rng.next_normal();
        dy = {0.0, 0.0, 0.0};
        p = sme_step(config, p, std::span<const double>(dW.data(), static_cast<std::size_t>(n_ch)),
                     std::span<double>(dy.data(), static_cast<std::size_t>(n_ch)));
        path.time.push_back(static_cast<double>(k + 1) * config.dt);
        path.states.push_back(p);
        path.dy.push_back(dy);
    }
    return path;
}

/// Lindblad (measurement-averaged) solution of Model I: every Bloch component
/// decays as e^{-4t/tau}.
inline PauliVector lindblad_solution_model1(const PauliVector& p0, double t, double tau) {
    if (!(t >= 0.0)) throw validation_error("lindblad_solution_model1: t must be nonnegative");
    const double decay = std::exp(-4.0 * t / tau);
    return {p0.p0, p0.px * decay, p0.py * decay, p0.pz * decay};
}

/// Lindblad solution of Model II. px decays as e^{-2t/tau}; the (py, pz)
/// block follows the underdamped (alpha > 1/2), overdamped (alpha < 1/2) or
/// critically damped closed form.
inline PauliVector lindblad_solution_model2(const PauliVector& p0, double t, double tau, double alpha) {
    if (!(t >= 0.0)) throw validation_error("lindblad_solution_model2: t must be nonnegative");
    if (!(alpha >= 0.0)) throw validation_error("lindblad_solution_model2: alpha must be nonnegative");
    const double u = t / tau;
    const double damp = std::exp(-u);
    PauliVector out{p0.p0, p0.px * std::exp(-2.0 * u), 0.0, 0.0};
    if (alpha > 0.5) {
        const double mu = std::sqrt(4.0 * alpha * alpha - 1.0);
        const double c = std::cos(mu * u), s = std::sin(mu * u);
        out.py = damp / mu * ((mu * c - s) * p0.py - 2.0 * alpha * s * p0.pz);
        out.pz = damp / mu * ((mu * c + s) * p0.pz + 2.0 * alpha * s * p0.py);
    } else if (alpha < 0.5) {
        const double mu = std::sqrt(1.0 - 4.0 * alpha * alpha);
        // e^{-u} cosh(mu u) and e^{-u} sinh(mu u), written to avoid overflow
        const double ep = std::exp((mu - 1.0) * u), em = std::exp(-(mu + 1.0) * u);
        const double dc = 0.5 * (ep + em), ds = 0.5 * (ep - em);
        out.py = ((mu * dc - ds) * p0.py - 2.0 * alpha * ds * p0.pz) / mu;
        out.pz = ((mu * dc + ds) * p0.pz + 2.0 * alpha * ds * p0.py) / mu;
    } else {
        out.py = damp * ((1.0 - u) * p0.py - u * p0.pz);
        out.pz = damp * ((1.0 + u) * p0.pz + u * p0.py);
    }
    return out;
}

} // namespace qread
