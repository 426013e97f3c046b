#include "lgi/dynamics.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "lgi/errors.hpp"

namespace lgi {

namespace {

void require_time(double t) {
    if (!(t >= 0.0) || !std::isfinite(t)) {
        throw DomainError("evolution time must be finite and >= 0, got " + std::to_string(t));
    }
}

void require_rate(double gamma) {
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
        throw DomainError("dephasing rate must be finite and >= 0, got " + std::to_string(gamma));
    }
}

Superoperator kron(const ComplexMatrix2& a, const ComplexMatrix2& b) {
    Superoperator out;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    return out;
}

}  // namespace

std::string_view to_string(DephasingKind kind) {
    switch (kind) {
        case DephasingKind::None: return "none";
        case DephasingKind::ZBasis: return "z";
        case DephasingKind::XBasis: return "x";
        case DephasingKind::Diag45: return "diag45";
        case DephasingKind::GeneralAxis: return "axis";
    }
    return "none";
}

DephasingKind parse_dephasing_kind(std::string_view text) {
    if (text == "none" || text == "None") return DephasingKind::None;
    if (text == "z" || text == "ZBasis") return DephasingKind::ZBasis;
    if (text == "x" || text == "XBasis") return DephasingKind::XBasis;
    if (text == "diag45" || text == "Diag45") return DephasingKind::Diag45;
    if (text == "axis" || text == "GeneralAxis") return DephasingKind::GeneralAxis;
    throw ConfigError("unknown dephasing model '" + std::string(text) +
                      "' (expected none, z, x, diag45 or axis)");
}

DephasingModel DephasingModel::none() { return {}; }

DephasingModel DephasingModel::z_basis(double gamma) {
    require_rate(gamma);
    return {DephasingKind::ZBasis, gamma, {0.0, 0.0, 1.0}};
}

DephasingModel DephasingModel::x_basis(double gamma) {
    require_rate(gamma);
    return {DephasingKind::XBasis, gamma, {1.0, 0.0, 0.0}};
}

DephasingModel DephasingModel::diag45(double gamma) {
    require_rate(gamma);
    const double h = std::numbers::sqrt2 / 2.0;
    return {DephasingKind::Diag45, gamma, {h, 0.0, h}};
}

DephasingModel DephasingModel::general_axis(const std::array<double, 3>& axis, double gamma) {
    require_rate(gamma);
    const double n = std::sqrt(axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]);
    if (!(n > 0.0) || !std::isfinite(n)) {
        throw DomainError("dephasing axis must be a finite non-zero vector");
    }
    return {DephasingKind::GeneralAxis, gamma, {axis[0] / n, axis[1] / n, axis[2] / n}};
}

DephasingModel DephasingModel::make(DephasingKind kind, double gamma,
                                    const std::array<double, 3>& axis) {
    switch (kind) {
        case DephasingKind::None:
            if (gamma != 0.0) {
                throw ConfigError("model 'none' requires gamma = 0");
            }
            return none();
        case DephasingKind::ZBasis: return z_basis(gamma);
        case DephasingKind::XBasis: return x_basis(gamma);
        case DephasingKind::Diag45: return diag45(gamma);
        case DephasingKind::GeneralAxis: return general_axis(axis, gamma);
    }
    return none();
}

ComplexMatrix2 DephasingModel::lindblad_operator() const {
    switch (kind_) {
        case DephasingKind::None: return ComplexMatrix2::Zero();
        case DephasingKind::Diag45:
            return 0.5 * std::sqrt(gamma_) * (pauli::x() + pauli::z());
        default:
            return std::sqrt(0.5 * gamma_) *
                   (axis_[0] * pauli::x() + axis_[1] * pauli::y() + axis_[2] * pauli::z());
    }
}

std::string DephasingModel::label() const {
    if (kind_ != DephasingKind::GeneralAxis) return std::string(to_string(kind_));
    std::ostringstream os;
    os.precision(12);
    os << "axis:" << axis_[0] << ';' << axis_[1] << ';' << axis_[2];
    return os.str();
}

Superoperator left_multiplication(const ComplexMatrix2& a) {
    return kron(ComplexMatrix2::Identity(), a);
}

Superoperator right_multiplication(const ComplexMatrix2& a) {
    return kron(a.transpose(), ComplexMatrix2::Identity());
}

ComplexMatrix2 unitary_propagator(double t) {
    require_time(t);
    ComplexMatrix2 u = ComplexMatrix2::Zero();
    u(0, 0) = std::polar(1.0, -t);
    u(1, 1) = std::polar(1.0, t);
    return u;
}

Superoperator build_liouvillian(const DephasingModel& model) {
    constexpr Complex i{0.0, 1.0};
    const ComplexMatrix2 h = hamiltonian();
    Superoperator l = -i * (left_multiplication(h) - right_multiplication(h));
    if (model.kind() != DephasingKind::None && model.gamma() > 0.0) {
        const ComplexMatrix2 v = model.lindblad_operator();
        const ComplexMatrix2 vdv = v.adjoint() * v;
        l += kron(v.conjugate(), v);
        l -= 0.5 * (left_multiplication(vdv) + right_multiplication(vdv));
    }
    return l;
}

Superoperator expm_scaling_squaring(const Superoperator& a) {
    const double norm = a.cwiseAbs().colwise().sum().maxCoeff();
    int squarings = 0;
    if (norm > 0.5) {
        squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
    }
    const Superoperator scaled = a / std::ldexp(1.0, squarings);

    Superoperator result = Superoperator::Identity();
    Superoperator term = Superoperator::Identity();
    for (int k = 1; k <= 30; ++k) {
        term = term * scaled / static_cast<double>(k);
        result += term;
        if (term.cwiseAbs().maxCoeff() < 1e-18) break;
    }
    for (int s = 0; s < squarings; ++s) result = result * result;
    return result;
}

ComplexMatrix2 Propagator::apply(const ComplexMatrix2& op) const {
    ComplexMatrix2 out;
    Eigen::Map<Eigen::Vector4cd>(out.data()) =
        channel_ * Eigen::Map<const Eigen::Vector4cd>(op.data());
    return out;
}

Propagator Propagator::identity() { return Propagator(Superoperator::Identity()); }

DensityMatrix Propagator::operator()(const DensityMatrix& rho) const {
    return DensityMatrix::sanitized(apply(rho.matrix()));
}

Evolution::Evolution(const DephasingModel& model)
    : model_(model), generator_(build_liouvillian(model)) {
    Eigen::ComplexEigenSolver<Superoperator> solver(generator_);
    if (solver.info() != Eigen::Success) {
        diagonalizable_ = false;
        condition_ = std::numeric_limits<double>::infinity();
        return;
    }
    eigenvalues_ = solver.eigenvalues();
    eigenvectors_ = solver.eigenvectors();
    Eigen::JacobiSVD<Superoperator> svd(eigenvectors_);
    const auto& sv = svd.singularValues();
    condition_ = sv(3) > 0.0 ? sv(0) / sv(3) : std::numeric_limits<double>::infinity();
    diagonalizable_ = condition_ <= kMaxEigenbasisCondition;
    if (diagonalizable_) {
        eigenvectors_inverse_ = eigenvectors_.inverse();
    }
}

Superoperator Evolution::exponential(double t) const {
    require_time(t);
    if (!diagonalizable_) {
        return expm_scaling_squaring(generator_ * t);
    }
    Eigen::Vector4cd factors;
    for (int k = 0; k < 4; ++k) factors(k) = std::exp(eigenvalues_(k) * t);
    return eigenvectors_ * factors.asDiagonal() * eigenvectors_inverse_;
}

DensityMatrix Evolution::propagate(const DensityMatrix& rho, double t) const {
    return at(t)(rho);
}

DensityMatrix propagate(const DensityMatrix& rho, double t, const DephasingModel& model) {
    return Evolution(model).propagate(rho, t);
}

BlochVector dephasing_z_closed_form(const BlochVector& b0, double t, double gamma) {
    require_time(t);
    if (!(gamma >= 0.0)) {
        throw DomainError("dephasing rate must be >= 0");
    }
    if (t == 0.0) return b0;
    const double damping = std::exp(-gamma * t);
    const double c = std::cos(2.0 * t);
    const double s = std::sin(2.0 * t);
    return {damping * (b0.mx * c - b0.my * s), damping * (b0.my * c + b0.mx * s), b0.mz};
}

}  // namespace lgi
