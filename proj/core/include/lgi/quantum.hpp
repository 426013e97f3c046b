#pragma once

// Single-qubit state algebra: density matrices, Bloch vectors, dichotomic
// spin observables and projective measurement.
//
// Units: the Hamiltonian is H = J sigma_z. Everything outside energy() and
// hamiltonian() works with J = 1 and hbar = 1, so energies are in units of J
// and times in units of hbar/J.

#include <array>
#include <complex>
#include <optional>

#include <Eigen/Core>

namespace lgi {

using Complex = std::complex<double>;
using ComplexMatrix2 = Eigen::Matrix2cd;

/// Tolerance used for all density-matrix invariants (hermiticity, trace,
/// positivity) and for the projector identities.
inline constexpr double kStateTolerance = 1e-12;

/// Probability below which a measurement branch is reported as absent.
inline constexpr double kBranchThreshold = 1e-12;

namespace pauli {
ComplexMatrix2 identity();
ComplexMatrix2 x();
ComplexMatrix2 y();
ComplexMatrix2 z();
}  // namespace pauli

/// H = J sigma_z.
ComplexMatrix2 hamiltonian(double J = 1.0);

/// Largest absolute entry, the norm used for every matrix tolerance check.
double max_abs(const ComplexMatrix2& m);

struct BlochVector {
    double mx = 0.0;
    double my = 0.0;
    double mz = 0.0;

    double norm() const;
    bool operator==(const BlochVector&) const = default;
};

/// A validated 2x2 density matrix: Hermitian, unit trace, positive
/// semidefinite (all within kStateTolerance). Immutable after construction.
class DensityMatrix {
public:
    /// The maximally mixed state I/2.
    DensityMatrix();

    /// Strict validation, no repair. Throws DomainError if any invariant fails.
    static DensityMatrix from_matrix(const ComplexMatrix2& m);

    /// For matrices produced by arithmetic that should preserve the state
    /// invariants: symmetrizes, renormalizes the trace, and clips an
    /// eigenvalue in [-kStateTolerance, 0) to zero. Anything worse throws.
    static DensityMatrix sanitized(const ComplexMatrix2& m);

    const ComplexMatrix2& matrix() const { return rho_; }
    Complex operator()(int row, int col) const { return rho_(row, col); }

    double purity() const;
    /// Ascending.
    std::array<double, 2> eigenvalues() const;

private:
    explicit DensityMatrix(const ComplexMatrix2& m) : rho_(m) {}

    ComplexMatrix2 rho_;
};

/// Direction (theta, phi) of the measured spin component. theta is reduced
/// modulo pi and phi modulo 2 pi: shifting theta by pi flips n -> -n, which
/// only swaps the outcome labels of the same projector pair.
class MeasurementSetting {
public:
    MeasurementSetting() = default;
    MeasurementSetting(double theta, double phi);

    double theta() const { return theta_; }
    double phi() const { return phi_; }

    /// Unit vector n = (sin theta cos phi, sin theta sin phi, cos theta).
    std::array<double, 3> direction() const;

private:
    double theta_ = 0.0;
    double phi_ = 0.0;
};

struct ProjectorPair {
    ComplexMatrix2 plus;
    ComplexMatrix2 minus;

    /// Q = P+ - P-.
    ComplexMatrix2 observable() const { return plus - minus; }
};

struct MeasurementResult {
    double prob_plus = 0.0;
    double prob_minus = 0.0;
    /// Normalized post-measurement states; empty when the branch probability
    /// is below kBranchThreshold.
    std::optional<DensityMatrix> post_plus;
    std::optional<DensityMatrix> post_minus;

    /// Outcome-averaged state sum_k p_k rho_k. Absent branches carry weight 0.
    DensityMatrix nonselective() const;
};

/// |psi(alpha)> = alpha|0> + sqrt(1 - alpha^2)|1>, alpha in [0, 1].
DensityMatrix pure_state(double alpha);

/// (I + m . sigma) / 2 for |m| <= 1.
DensityMatrix mixed_state(const BlochVector& b);

BlochVector to_bloch(const DensityMatrix& rho);

/// Rank-1 projectors onto |mu(theta, phi)> and |mu_perp(theta, phi)>.
ProjectorPair observable(const MeasurementSetting& setting);

/// tr(H rho) with H = J sigma_z.
double energy(const DensityMatrix& rho, double J = 1.0);

/// Born rule and projection postulate.
MeasurementResult measure(const DensityMatrix& rho, const ProjectorPair& proj);

}  // namespace lgi
