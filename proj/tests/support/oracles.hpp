#pragma once

// Test-side references sharing no code with the engine. Dynamics run on the
// Bloch vector with a 3x3 generator exponentiated by Eigen's MatrixFunctions;
// the protocol is expanded branch by branch over all outcome pairs.
//
// Bloch equation for H = sigma_z and V = sqrt(gamma/2) n.sigma:
//   dm/dt = 2 z x m - gamma (m - (n.m) n)

#include <array>
#include <cmath>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

namespace oracle {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline Mat3 bloch_generator(const Vec3& axis, double gamma) {
    Mat3 g = Mat3::Zero();
    g(0, 1) = -2.0;
    g(1, 0) = 2.0;
    if (gamma > 0.0) {
        const Vec3 n = axis.normalized();
        g -= gamma * (Mat3::Identity() - n * n.transpose());
    }
    return g;
}

inline Mat3 bloch_channel(const Vec3& axis, double gamma, double t) {
    const Mat3 scaled = bloch_generator(axis, gamma) * t;
    return scaled.exp();
}

inline Vec3 direction(double theta, double phi) {
    return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

struct Leg {
    double correlation = 0.0;
    double energy_cost = 0.0;
    std::array<double, 4> joint{};
    std::array<double, 4> steps{};
};

inline Leg leg(const Vec3& m0, const Vec3& n, const Mat3& to_first, const Mat3& between) {
    const Vec3 mi = to_first * m0;
    Leg out;
    Vec3 after_first = Vec3::Zero();
    Vec3 before_second = Vec3::Zero();
    Vec3 after_second = Vec3::Zero();
    int k = 0;
    for (int q1 : {1, -1}) {
        const double p1 = 0.5 * (1.0 + q1 * n.dot(mi));
        const Vec3 post = q1 * n;
        const Vec3 evolved = between * post;
        after_first += p1 * post;
        before_second += p1 * evolved;
        for (int q2 : {1, -1}) {
            const double p2 = 0.5 * (1.0 + q2 * n.dot(evolved));
            out.joint[k++] = p1 * p2;
            out.correlation += q1 * q2 * p1 * p2;
            after_second += p1 * p2 * (q2 * n);
        }
    }
    // tr(sigma_z rho) = mz.
    out.steps = {mi.z() - m0.z(), after_first.z() - mi.z(), before_second.z() - after_first.z(),
                 after_second.z() - before_second.z()};
    out.energy_cost = after_second.z() - m0.z();
    return out;
}

struct Outcome {
    double c12 = 0.0;
    double c23 = 0.0;
    double c13 = 0.0;
    double k3 = 0.0;
    double e12 = 0.0;
    double e23 = 0.0;
    double e13 = 0.0;
    double e_avg = 0.0;
};

inline Outcome lg(const Vec3& m0, double theta, double phi, const Vec3& axis, double gamma,
                  double dt) {
    const Vec3 n = direction(theta, phi);
    const Mat3 step = bloch_channel(axis, gamma, dt);
    const Mat3 twice = bloch_channel(axis, gamma, 2.0 * dt);
    const Leg l12 = leg(m0, n, Mat3::Identity(), step);
    const Leg l23 = leg(m0, n, step, step);
    const Leg l13 = leg(m0, n, Mat3::Identity(), twice);
    Outcome o;
    o.c12 = l12.correlation;
    o.c23 = l23.correlation;
    o.c13 = l13.correlation;
    o.k3 = o.c12 + o.c23 - o.c13;
    o.e12 = l12.energy_cost;
    o.e23 = l23.energy_cost;
    o.e13 = l13.energy_cost;
    o.e_avg = (o.e12 + o.e23 + o.e13) / 3.0;
    return o;
}

/// Largest K3 along theta = pi/2 by dense scan plus golden-section polish,
/// over the first half period so the shortest maximizer is reported.
inline double noiseless_k3_max(double* argmax_dt = nullptr) {
    const auto f = [](double x) { return 2.0 * std::cos(2.0 * x) - std::cos(4.0 * x); };
    double best_x = 0.0;
    double best = -10.0;
    for (int i = 1; i <= 20000; ++i) {
        const double x = 1.5707963267948966 * i / 20000.0;
        if (f(x) > best) {
            best = f(x);
            best_x = x;
        }
    }
    double a = best_x - 3.2e-4;
    double b = best_x + 3.2e-4;
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int i = 0; i < 200; ++i) {
        const double c = b - r * (b - a);
        const double d = a + r * (b - a);
        if (f(c) > f(d)) b = d; else a = c;
    }
    if (argmax_dt) *argmax_dt = 0.5 * (a + b);
    return f(0.5 * (a + b));
}

}  // namespace oracle
