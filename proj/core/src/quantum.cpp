#include "lgi/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "lgi/errors.hpp"

namespace lgi {

namespace pauli {

ComplexMatrix2 identity() { return ComplexMatrix2::Identity(); }

ComplexMatrix2 x() {
    ComplexMatrix2 m;
    m << 0.0, 1.0, 1.0, 0.0;
    return m;
}

ComplexMatrix2 y() {
    constexpr Complex i{0.0, 1.0};
    ComplexMatrix2 m;
    m << 0.0, -i, i, 0.0;
    return m;
}

ComplexMatrix2 z() {
    ComplexMatrix2 m;
    m << 1.0, 0.0, 0.0, -1.0;
    return m;
}

}  // namespace pauli

ComplexMatrix2 hamiltonian(double J) { return J * pauli::z(); }

double max_abs(const ComplexMatrix2& m) { return m.cwiseAbs().maxCoeff(); }

double BlochVector::norm() const { return std::sqrt(mx * mx + my * my + mz * mz); }

namespace {

// Eigenvalues of a Hermitian 2x2 matrix in closed form.
std::array<double, 2> hermitian_eigenvalues(const ComplexMatrix2& m) {
    const double a = m(0, 0).real();
    const double d = m(1, 1).real();
    const double mean = 0.5 * (a + d);
    const double radius = std::sqrt(0.25 * (a - d) * (a - d) + std::norm(m(0, 1)));
    return {mean - radius, mean + radius};
}

std::string describe(const ComplexMatrix2& m) {
    std::ostringstream os;
    os << "[[" << m(0, 0) << ", " << m(0, 1) << "], [" << m(1, 0) << ", " << m(1, 1) << "]]";
    return os.str();
}

}  // namespace

DensityMatrix::DensityMatrix() : rho_(0.5 * ComplexMatrix2::Identity()) {}

DensityMatrix DensityMatrix::from_matrix(const ComplexMatrix2& m) {
    if (!m.allFinite()) {
        throw DomainError("density matrix has non-finite entries");
    }
    if (max_abs(m - m.adjoint()) > kStateTolerance) {
        throw DomainError("density matrix is not Hermitian: " + describe(m));
    }
    if (std::abs(m.trace() - 1.0) > kStateTolerance) {
        throw DomainError("density matrix trace differs from 1: " + describe(m));
    }
    if (hermitian_eigenvalues(m)[0] < -kStateTolerance) {
        throw DomainError("density matrix is not positive semidefinite: " + describe(m));
    }
    return DensityMatrix(m);
}

DensityMatrix DensityMatrix::sanitized(const ComplexMatrix2& m) {
    if (!m.allFinite()) {
        throw DomainError("density matrix has non-finite entries");
    }
    ComplexMatrix2 h = 0.5 * (m + m.adjoint());
    const double trace = h.trace().real();
    if (!(trace > 0.0)) {
        throw DomainError("cannot renormalize matrix with non-positive trace: " + describe(m));
    }
    h /= trace;
    const auto eig = hermitian_eigenvalues(h);
    if (eig[0] < -kStateTolerance) {
        throw DomainError("matrix is not positive semidefinite after symmetrization: " +
                          describe(m));
    }
    if (eig[0] < 0.0) {
        // Unit-trace 2x2: eigenvalues (1 +- |m|)/2, so clipping the negative one
        // and renormalizing is the same as pulling the Bloch vector onto the sphere.
        const double scale = 1.0 / (eig[1] - eig[0]);
        const ComplexMatrix2 traceless = h - 0.5 * ComplexMatrix2::Identity();
        h = 0.5 * ComplexMatrix2::Identity() + scale * traceless;
    }
    return DensityMatrix(h);
}

double DensityMatrix::purity() const { return (rho_ * rho_).trace().real(); }

std::array<double, 2> DensityMatrix::eigenvalues() const { return hermitian_eigenvalues(rho_); }

MeasurementSetting::MeasurementSetting(double theta, double phi) {
    if (!std::isfinite(theta) || !std::isfinite(phi)) {
        throw DomainError("measurement angles must be finite");
    }
    constexpr double pi = std::numbers::pi;
    theta_ = std::fmod(theta, pi);
    if (theta_ < 0.0) theta_ += pi;
    if (theta_ >= pi) theta_ = 0.0;
    phi_ = std::fmod(phi, 2.0 * pi);
    if (phi_ < 0.0) phi_ += 2.0 * pi;
    if (phi_ >= 2.0 * pi) phi_ = 0.0;
}

std::array<double, 3> MeasurementSetting::direction() const {
    return {std::sin(theta_) * std::cos(phi_), std::sin(theta_) * std::sin(phi_),
            std::cos(theta_)};
}

DensityMatrix MeasurementResult::nonselective() const {
    ComplexMatrix2 sum = ComplexMatrix2::Zero();
    if (post_plus) sum += prob_plus * post_plus->matrix();
    if (post_minus) sum += prob_minus * post_minus->matrix();
    return DensityMatrix::sanitized(sum);
}

DensityMatrix pure_state(double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw DomainError("pure_state: alpha must lie in [0, 1], got " + std::to_string(alpha));
    }
    Eigen::Vector2cd psi(alpha, std::sqrt(std::max(0.0, 1.0 - alpha * alpha)));
    return DensityMatrix::sanitized(psi * psi.adjoint());
}

DensityMatrix mixed_state(const BlochVector& b) {
    const double n = b.norm();
    if (!std::isfinite(n) || n > 1.0 + kStateTolerance) {
        throw DomainError("mixed_state: Bloch vector outside the unit ball (|m| = " +
                          std::to_string(n) + ")");
    }
    const ComplexMatrix2 m =
        0.5 * (pauli::identity() + b.mx * pauli::x() + b.my * pauli::y() + b.mz * pauli::z());
    return DensityMatrix::sanitized(m);
}

BlochVector to_bloch(const DensityMatrix& rho) {
    const ComplexMatrix2& m = rho.matrix();
    return {(m * pauli::x()).trace().real(), (m * pauli::y()).trace().real(),
            (m * pauli::z()).trace().real()};
}

ProjectorPair observable(const MeasurementSetting& setting) {
    const double c = std::cos(0.5 * setting.theta());
    const double s = std::sin(0.5 * setting.theta());
    const Complex phase = std::polar(1.0, setting.phi());
    const Eigen::Vector2cd mu(c, phase * s);
    const Eigen::Vector2cd mu_perp(s, -phase * c);
    return {mu * mu.adjoint(), mu_perp * mu_perp.adjoint()};
}

double energy(const DensityMatrix& rho, double J) {
    return (hamiltonian(J) * rho.matrix()).trace().real();
}

MeasurementResult measure(const DensityMatrix& rho, const ProjectorPair& proj) {
    MeasurementResult out;
    const auto branch = [&rho](const ComplexMatrix2& p, double& prob,
                               std::optional<DensityMatrix>& post) {
        prob = std::clamp((p * rho.matrix()).trace().real(), 0.0, 1.0);
        if (prob > kBranchThreshold) {
            post = DensityMatrix::sanitized(p * rho.matrix() * p / prob);
        }
    };
    branch(proj.plus, out.prob_plus, out.post_plus);
    branch(proj.minus, out.prob_minus, out.post_minus);
    return out;
}

}  // namespace lgi
