#pragma once

// Shared fixtures and independent reference solutions for the test suites.

#include "herglotz/herglotz.hpp"

#include <cmath>
#include <functional>
#include <string>

namespace fixtures {

using herglotz::HerglotzProblem;
using herglotz::Trajectory;

inline std::string data_path(const std::string& name) { return std::string(HERGLOTZ_DATA_DIR) + "/" + name; }

inline Eigen::VectorXd vec(std::initializer_list<double> xs)
{
    Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs)
        v(i++) = x;
    return v;
}

inline HerglotzProblem free_particle() { return herglotz::make_problem(1, 0.0, 1.0, "dx1^2/2", vec({1.0}), 0.0); }
inline HerglotzProblem grav() { return herglotz::make_problem(1, 0.0, 1.0, "dx1^2/2 - x1", vec({1.0}), 0.0); }
inline HerglotzProblem damp()
{
    return herglotz::make_problem(1, 0.0, 1.0, "dx1^2/2 - x1^2/2 - 0.1*z", vec({1.0}), 0.0);
}
inline HerglotzProblem linz(double alpha = 2.0)
{
    return herglotz::make_problem(1, 0.0, 1.0, "dx1^2/2 - 0.5*z", vec({alpha}), 0.0);
}
inline HerglotzProblem decay() { return herglotz::make_problem(1, 0.0, 2.0, "-z", vec({0.5}), 2.0); }

using Scalar1 = std::function<double(double)>;

// Samples a one-dimensional pair on the uniform mesh t_k = a + k (b - a) / N.
inline Trajectory sample(const HerglotzProblem& p, int N, const Scalar1& x, const Scalar1& v, const Scalar1& z)
{
    Eigen::VectorXd t(N + 1), zs(N + 1);
    Eigen::MatrixXd xs(1, N + 1), vs(1, N + 1);
    for (int k = 0; k <= N; ++k) {
        t(k) = k == N ? p.b() : p.a() + k * (p.b() - p.a()) / N;
        xs(0, k) = x(t(k));
        vs(0, k) = v(t(k));
        zs(k) = z(t(k));
    }
    return Trajectory(t, xs, vs, zs);
}

// GRAV extremal: x = 1 + t - t^2/2, z = int_0^t ((1-s)^2/2 - (1 + s - s^2/2)) ds.
inline double grav_x(double t) { return 1.0 + t - t * t / 2.0; }
inline double grav_v(double t) { return 1.0 - t; }
inline double grav_z(double t) { return -t / 2.0 - t * t + t * t * t / 3.0; }

inline Trajectory grav_analytic(int N = 1000) { return sample(grav(), N, grav_x, grav_v, grav_z); }

// DAMP: x'' + 0.1 x' + x = 0, x(0) = 1, x'(1) = 0.
struct DampedOscillator {
    double omega = std::sqrt(1.0 - 0.0025);
    double B = 0.0;
    double v0 = 0.0;

    DampedOscillator()
    {
        B = (0.05 * std::cos(omega) + omega * std::sin(omega)) / (omega * std::cos(omega) - 0.05 * std::sin(omega));
        v0 = B * omega - 0.05;
    }
    explicit DampedOscillator(double initial_velocity) : v0(initial_velocity) { B = (v0 + 0.05) / omega; }

    double x(double t) const { return std::exp(-0.05 * t) * (std::cos(omega * t) + B * std::sin(omega * t)); }
    double v(double t) const
    {
        return std::exp(-0.05 * t) *
               ((B * omega - 0.05) * std::cos(omega * t) - (0.05 * B + omega) * std::sin(omega * t));
    }
};

// z' = L0(t) - 0.1 z, z(0) = 0, integrated exactly per interval by the
// variation-of-constants formula with 5-point Gauss-Legendre quadrature.
inline Trajectory damp_closed_form(const DampedOscillator& osc, int N = 1000)
{
    const double h = 1.0 / N;
    Eigen::VectorXd zs(N + 1);
    zs(0) = 0.0;
    const double nodes[5] = {0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640, 0.9061798459386640};
    const double weights[5] = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665, 0.2369268850561891,
                               0.2369268850561891};
    auto L0 = [&](double t) { return osc.v(t) * osc.v(t) / 2.0 - osc.x(t) * osc.x(t) / 2.0; };
    for (int k = 0; k < N; ++k) {
        const double t0 = k * h, t1 = (k + 1) * h;
        double integral = 0.0;
        for (int q = 0; q < 5; ++q) {
            const double th = t0 + (nodes[q] + 1.0) * h / 2.0;
            integral += weights[q] * std::exp(-0.1 * (t1 - th)) * L0(th);
        }
        zs(k + 1) = std::exp(-0.1 * h) * zs(k) + integral * h / 2.0;
    }
    int k = 0;
    return sample(damp(), N, [&](double t) { return osc.x(t); }, [&](double t) { return osc.v(t); },
                  [&](double) { return zs(k++); });
}

inline Trajectory decay_trajectory(int N = 1000)
{
    return sample(decay(), N, [](double) { return 0.5; }, [](double) { return 0.0; },
                  [](double t) { return 2.0 * std::exp(-t); });
}

// Empirical convergence order on meshes N, 2N, 4N, ...: least-squares slope
// of -log2(error) against the refinement level. Errors at or below `floor`
// are resolved to the floor and end the fit; if fewer than two remain the
// order is reported as infinite.
inline double fitted_order(const std::vector<double>& errors, double floor)
{
    std::vector<double> y;
    for (double e : errors) {
        if (e <= floor)
            break;
        y.push_back(-std::log2(e));
    }
    if (y.size() < 2)
        return INFINITY;
    const double n = static_cast<double>(y.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double x = static_cast<double>(i);
        sx += x;
        sy += y[i];
        sxx += x * x;
        sxy += x * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace fixtures
