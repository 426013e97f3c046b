#pragma once

// Qubit time evolution under H = J sigma_z, optionally with Markovian
// dephasing generated by a single Hermitian Lindblad operator
//
//   d rho/dt = -i[H, rho] + V rho V^+ - 1/2 {V^+ V, rho},   V = sqrt(gamma/2) (n . sigma).
//
// Density matrices are column-vectorized: vec(rho) = (rho00, rho10, rho01, rho11),
// so vec(A rho B) = (B^T (x) A) vec(rho).

#include <array>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "lgi/quantum.hpp"

namespace lgi {

enum class DephasingKind { None, ZBasis, XBasis, Diag45, GeneralAxis };

std::string_view to_string(DephasingKind kind);
/// Accepts "none", "z", "x", "diag45", "axis" (and the enum spellings).
DephasingKind parse_dephasing_kind(std::string_view text);

/// Which Lindblad operator acts and at which rate. gamma is hbar*gamma/J.
class DephasingModel {
public:
    DephasingModel() = default;

    static DephasingModel none();
    /// V = sqrt(gamma/2) sigma_z: dephasing diagonal in the energy basis.
    static DephasingModel z_basis(double gamma);
    /// V = sqrt(gamma/2) sigma_x: complementary basis.
    static DephasingModel x_basis(double gamma);
    /// V = (sqrt(gamma)/2)(sigma_x + sigma_z): axis at pi/4 to the energy basis.
    static DephasingModel diag45(double gamma);
    /// V = sqrt(gamma/2)(n . sigma). The axis is normalized on construction.
    static DephasingModel general_axis(const std::array<double, 3>& axis, double gamma);

    /// Dispatch helper; `axis` is only read for GeneralAxis.
    static DephasingModel make(DephasingKind kind, double gamma,
                               const std::array<double, 3>& axis = {0.0, 0.0, 1.0});

    DephasingKind kind() const { return kind_; }
    double gamma() const { return gamma_; }
    const std::array<double, 3>& axis() const { return axis_; }

    /// The Lindblad operator V (zero for None).
    ComplexMatrix2 lindblad_operator() const;

    /// Short label: none, z, x, diag45 or axis:nx;ny;nz.
    std::string label() const;

    bool operator==(const DephasingModel&) const = default;

private:
    DephasingModel(DephasingKind kind, double gamma, const std::array<double, 3>& axis)
        : kind_(kind), gamma_(gamma), axis_(axis) {}

    DephasingKind kind_ = DephasingKind::None;
    double gamma_ = 0.0;
    std::array<double, 3> axis_{0.0, 0.0, 1.0};
};

using Superoperator = Eigen::Matrix4cd;

/// Superoperators of rho -> A rho and rho -> rho A.
Superoperator left_multiplication(const ComplexMatrix2& a);
Superoperator right_multiplication(const ComplexMatrix2& a);

/// exp(-i H t) = diag(e^{-iJt}, e^{+iJt}) for t >= 0.
ComplexMatrix2 unitary_propagator(double t);

/// Generator L with d vec(rho)/dt = L vec(rho).
Superoperator build_liouvillian(const DephasingModel& model);

/// exp(A) by scaling and squaring with a Taylor core.
Superoperator expm_scaling_squaring(const Superoperator& a);

/// A fixed-time channel exp(L t).
class Propagator {
public:
    static Propagator identity();
    explicit Propagator(const Superoperator& channel) : channel_(channel) {}

    const Superoperator& matrix() const { return channel_; }

    /// Linear action on an arbitrary (possibly unnormalized) operator.
    ComplexMatrix2 apply(const ComplexMatrix2& op) const;
    DensityMatrix operator()(const DensityMatrix& rho) const;

private:
    Superoperator channel_;
};

/// Immutable exponential of a model's Liouvillian. Built once and safe to
/// share between threads.
///
/// exp(L t) comes from the eigendecomposition L = W D W^-1 when W is well
/// conditioned (cond <= kMaxEigenbasisCondition); otherwise each call falls
/// back to scaling and squaring of L t.
class Evolution {
public:
    static constexpr double kMaxEigenbasisCondition = 1e8;

    explicit Evolution(const DephasingModel& model);

    const DephasingModel& model() const { return model_; }
    const Superoperator& generator() const { return generator_; }
    bool uses_eigendecomposition() const { return diagonalizable_; }
    double eigenbasis_condition() const { return condition_; }
    const Eigen::Vector4cd& eigenvalues() const { return eigenvalues_; }

    Superoperator exponential(double t) const;
    Propagator at(double t) const { return Propagator(exponential(t)); }
    DensityMatrix propagate(const DensityMatrix& rho, double t) const;

private:
    DephasingModel model_;
    Superoperator generator_;
    Superoperator eigenvectors_;
    Superoperator eigenvectors_inverse_;
    Eigen::Vector4cd eigenvalues_;
    double condition_ = 1.0;
    bool diagonalizable_ = true;
};

/// Convenience wrapper building a throwaway Evolution.
DensityMatrix propagate(const DensityMatrix& rho, double t, const DephasingModel& model);

/// Damped precession under same-basis dephasing:
///   mx(t) = e^{-gamma t} [mx cos 2t - my sin 2t]
///   my(t) = e^{-gamma t} [my cos 2t + mx sin 2t]
///   mz(t) = mz
/// gamma may be +infinity.
BlochVector dephasing_z_closed_form(const BlochVector& b0, double t, double gamma);

}  // namespace lgi
