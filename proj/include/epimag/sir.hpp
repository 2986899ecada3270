/*
* Copyright (C) 2026 epimag contributors
*
* Licensed under the Apache License, Version 2.0 (the "License");
* you may not use this file except in compliance with the License.
* You may obtain a copy of the License at
*
*     http://www.apache.org/licenses/LICENSE-2.0
*
* Unless required by applicable law or agreed to in writing, software
* distributed under the License is distributed on an "AS IS" BASIS,
* WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
* See the License for the specific language governing permissions and
* limitations under the License.
*/
#pragma once

// Deterministic multi-location SIR simulator with time-varying rates, used to build
// synthetic benchmarks whose infection and recovery rates are known.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "epimag/data.hpp"

namespace epimag::sir
{

//! Population fractions per location.
struct State
{
    Vector S;
    Vector I;
    Vector R;
};

namespace detail
{
inline State derivative(const State& s, const Vector& beta, const Vector& gamma)
{
    const Vector infection = beta.cwiseProduct(s.S).cwiseProduct(s.I);
    const Vector recovery  = gamma.cwiseProduct(s.I);
    return {-infection, infection - recovery, recovery};
}

inline State axpy(const State& s, double a, const State& d)
{
    return {s.S + a * d.S, s.I + a * d.I, s.R + a * d.R};
}

inline void check_rates(const Vector& beta, const Vector& gamma, double dt)
{
    if (!(dt > 0.0)) {
        throw ConfigError("SIR step size must be positive");
    }
    if ((beta.array() < 0.0).any() || (gamma.array() < 0.0).any()) {
        throw ConfigError("SIR rates must be nonnegative");
    }
}

//! Unclipped RK4 update.
inline State rk4(const State& s, const Vector& beta, const Vector& gamma, double dt)
{
    const State k1 = derivative(s, beta, gamma);
    const State k2 = derivative(axpy(s, dt / 2, k1), beta, gamma);
    const State k3 = derivative(axpy(s, dt / 2, k2), beta, gamma);
    const State k4 = derivative(axpy(s, dt, k3), beta, gamma);
    return {s.S + dt / 6 * (k1.S + 2 * k2.S + 2 * k3.S + k4.S), s.I + dt / 6 * (k1.I + 2 * k2.I + 2 * k3.I + k4.I),
            s.R + dt / 6 * (k1.R + 2 * k2.R + 2 * k3.R + k4.R)};
}

//! Clips to [0, 1] and renormalizes locations that drifted more than 1e-12 off the simplex.
inline void settle(State& s)
{
    for (Eigen::Index i = 0; i < s.S.size(); ++i) {
        const double total = s.S(i) + s.I(i) + s.R(i);
        const bool outside = s.S(i) < -1e-12 || s.I(i) < -1e-12 || s.R(i) < -1e-12 || s.S(i) > 1 + 1e-12 ||
                             s.I(i) > 1 + 1e-12 || s.R(i) > 1 + 1e-12;
        if (outside || std::abs(total - 1.0) > 1e-12) {
            s.S(i)           = std::clamp(s.S(i), 0.0, 1.0);
            s.I(i)           = std::clamp(s.I(i), 0.0, 1.0);
            s.R(i)           = std::clamp(s.R(i), 0.0, 1.0);
            const double sum = s.S(i) + s.I(i) + s.R(i);
            s.S(i) /= sum;
            s.I(i) /= sum;
            s.R(i) /= sum;
        }
    }
}
} // namespace detail

//! One fourth-order Runge-Kutta step of dS = -bSI, dI = bSI - gI, dR = gI with rates held
//! fixed over the step. Compartments are clipped and renormalized only if they drift by
//! more than 1e-12 from a valid simplex point.
inline State step(const State& s, const Vector& beta, const Vector& gamma, double dt)
{
    detail::check_rates(beta, gamma, dt);
    State next = detail::rk4(s, beta, gamma, dt);
    detail::settle(next);
    return next;
}

//! Rate as a function of (week, location).
using RateFn = std::function<double(int, int)>;

struct SimulationSpec
{
    int locations = 5;
    int weeks     = 200;
    RateFn beta;
    RateFn gamma;
    Vector initial_infected;  //!< fraction per location; S = 1 - I, R = 0
    Vector population;        //!< persons per location, used to export counts
    int substeps = 1;         //!< RK4 steps per week
};

struct Trajectory
{
    Matrix S;
    Matrix I;
    Matrix R;
    Matrix beta;
    Matrix gamma;
    Vector population;
};

struct SimulationResult
{
    Trajectory trajectory;
    EpidemicSeries counts;  //!< round(I * population)
};

namespace detail
{
inline bool plausible(const State& s)
{
    const auto ok = [](const Vector& v) { return (v.array() >= -1e-6).all() && (v.array() <= 1 + 1e-6).all(); };
    return ok(s.S) && ok(s.I) && ok(s.R);
}

//! Advances one week with `substeps` RK4 steps; false if any unclipped state left [-1e-6, 1 + 1e-6].
inline bool advance_week(State& s, const Vector& beta, const Vector& gamma, int substeps)
{
    const double dt = 1.0 / substeps;
    check_rates(beta, gamma, dt);
    for (int k = 0; k < substeps; ++k) {
        State next = rk4(s, beta, gamma, dt);
        if (!plausible(next)) {
            return false;
        }
        settle(next);
        s = std::move(next);
    }
    return true;
}
} // namespace detail

//! Integrates week by week; row t holds the state at the start of week t. An implausible
//! step is retried once with twice the substeps before giving up.
inline SimulationResult simulate(const SimulationSpec& spec)
{
    const int n = spec.locations;
    if (n < 1 || spec.weeks < 1 || spec.substeps < 1) {
        throw ConfigError("simulation needs positive locations, weeks and substeps");
    }
    if (!spec.beta || !spec.gamma) {
        throw ConfigError("simulation needs beta and gamma schedules");
    }
    if (spec.initial_infected.size() != n || spec.population.size() != n) {
        throw ShapeError("initial_infected and population must have one entry per location");
    }
    if ((spec.initial_infected.array() < 0.0).any() || (spec.initial_infected.array() > 1.0).any()) {
        throw ConfigError("initial infected fractions must lie in [0, 1]");
    }
    Trajectory tr;
    tr.S.resize(spec.weeks, n);
    tr.I.resize(spec.weeks, n);
    tr.R.resize(spec.weeks, n);
    tr.beta.resize(spec.weeks, n);
    tr.gamma.resize(spec.weeks, n);
    tr.population = spec.population;

    State s{Vector::Ones(n) - spec.initial_infected, spec.initial_infected, Vector::Zero(n)};
    for (int t = 0; t < spec.weeks; ++t) {
        Vector beta(n), gamma(n);
        for (int i = 0; i < n; ++i) {
            beta(i)  = spec.beta(t, i);
            gamma(i) = spec.gamma(t, i);
        }
        tr.S.row(t)     = s.S.transpose();
        tr.I.row(t)     = s.I.transpose();
        tr.R.row(t)     = s.R.transpose();
        tr.beta.row(t)  = beta.transpose();
        tr.gamma.row(t) = gamma.transpose();
        if (t + 1 == spec.weeks) {
            break;
        }
        State trial = s;
        if (!detail::advance_week(trial, beta, gamma, spec.substeps)) {
            trial = s;
            if (!detail::advance_week(trial, beta, gamma, 2 * spec.substeps)) {
                throw ConfigError("SIR integration unstable at week " + std::to_string(t));
            }
        }
        s = trial;
    }

    SimulationResult out;
    Matrix counts(spec.weeks, n);
    for (int i = 0; i < n; ++i) {
        counts.col(i) = (tr.I.col(i) * spec.population(i)).array().round().matrix();
    }
    out.counts            = make_series(std::move(counts));
    out.trajectory        = std::move(tr);
    return out;
}

//! Five locations over 200 weeks with gamma = 0.2. Each location alternates between two
//! infection-rate regimes on a 52-week cycle: a high-transmission season of fixed length
//! starting at a location-specific phase, and a low rate the rest of the year. Locations
//! 0 and 1 share the same start and first season, so their curves coincide until week 16
//! and then separate because their off-season rates differ. Populations are drawn from `seed`.
inline SimulationSpec default_benchmark(std::uint64_t seed = 7)
{
    struct Season
    {
        double high;
        double low;
        int length;
        int phase;
    };
    static const std::vector<Season> seasons{
        {0.32, 0.17, 16, 0}, {0.32, 0.15, 16, 0}, {0.34, 0.16, 14, 6}, {0.30, 0.18, 18, 10}, {0.33, 0.17, 15, 3}};
    SimulationSpec spec;
    spec.locations = 5;
    spec.weeks     = 200;
    spec.beta      = [](int t, int i) {
        const auto& s = seasons[static_cast<std::size_t>(i)];
        return t >= s.phase && (t - s.phase) % 52 < s.length ? s.high : s.low;
    };
    spec.gamma            = [](int, int) { return 0.2; };
    spec.initial_infected = Vector::Constant(5, 1e-3);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> pop(2e5, 1e6);
    spec.population.resize(5);
    for (int i = 0; i < 5; ++i) {
        spec.population(i) = std::round(pop(rng));
    }
    return spec;
}

//! Adjacency of the default benchmark: a path 0-1-2-3-4.
inline Matrix default_benchmark_adjacency(int locations = 5)
{
    Matrix a = Matrix::Zero(locations, locations);
    for (int i = 0; i + 1 < locations; ++i) {
        a(i, i + 1) = 1.0;
        a(i + 1, i) = 1.0;
    }
    return a;
}

} // namespace epimag::sir
