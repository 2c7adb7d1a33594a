#pragma once

// Collective angular-momentum operators for one or two spin ensembles.
//
// Basis conventions used throughout the library:
//   single ensemble:  index k = 0..2j  <->  m = j - k  (descending m)
//   two ensembles:    index k1 * dim2 + k2 (lexicographic over (m1, m2))

#include <array>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "spinbath/halfint.hpp"

namespace spinbath {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Dims = std::vector<int>;

enum class Axis { x = 0, y = 1, z = 2 };

inline constexpr std::array<Axis, 3> kAllAxes{Axis::x, Axis::y, Axis::z};

/// Spin magnitude of a symmetric ensemble of N spin-1/2 particles, j = N/2.
class SpinQuantum {
public:
    explicit SpinQuantum(HalfInt j);
    /// Throws std::invalid_argument for negative or non-half-integer j.
    static SpinQuantum from_double(double j) { return SpinQuantum(HalfInt::from_double(j)); }
    static SpinQuantum from_particles(int n);

    HalfInt j() const { return j_; }
    double value() const { return j_.value(); }
    int dim() const { return j_.twice() + 1; }

    /// Index of magnetic number m in the descending basis.
    int index_of(HalfInt m) const;
    HalfInt m_at(int index) const { return j_ - HalfInt::from_twice(2 * index); }
    bool contains(HalfInt m) const;

    bool operator==(const SpinQuantum&) const = default;

private:
    HalfInt j_;
};

/// Dense operator on a tensor-product space with known factor dimensions.
class SpinOperator {
public:
    SpinOperator(Matrix matrix, Dims dims);

    const Matrix& matrix() const { return matrix_; }
    const Dims& dims() const { return dims_; }
    int dim() const { return static_cast<int>(matrix_.rows()); }

    /// max |A - A^dagger| entry.
    double hermiticity_residual() const;

    SpinOperator operator+(const SpinOperator& o) const;
    SpinOperator operator*(double s) const;

private:
    Matrix matrix_;
    Dims dims_;
};

SpinOperator identity_op(const Dims& dims);

struct AngularMomentum {
    SpinOperator jx, jy, jz, jsq;

    const SpinOperator& component(Axis a) const;
};

AngularMomentum angular_momentum_ops(const SpinQuantum& j);

/// Kronecker product, a acting on the left factor.
Matrix kron(const Matrix& a, const Matrix& b);

/// Lifts op to act on factor `slot` of `dims`, identity elsewhere.
SpinOperator embed(const SpinOperator& op, std::size_t slot, const Dims& dims);

/// Per-axis operators on the two-ensemble space, indexed by Axis.
using AxisOps = std::array<SpinOperator, 3>;

/// J_{i,alpha} lifted into the (2j1+1)(2j2+1) product space for ensemble `slot`.
AxisOps embedded_ops(const SpinQuantum& j1, const SpinQuantum& j2, std::size_t slot);

/// L_alpha = (lambda J_{1 alpha} + (2 - lambda) J_{2 alpha}) / 2, lambda in [0, 2].
AxisOps composite_coupling_ops(const SpinQuantum& j1, const SpinQuantum& j2, double lambda);

/// Total spin J1 + J2, equal to 2 L_alpha at lambda = 1.
AxisOps total_spin_ops(const SpinQuantum& j1, const SpinQuantum& j2);

struct CoupledLevel {
    HalfInt L;
    HalfInt M;
};

/// Throws std::invalid_argument if `level` is not reachable by coupling j1 and j2.
void check_coupled_level(const SpinQuantum& j1, const SpinQuantum& j2, const CoupledLevel& level);

/// Condon-Shortley Clebsch-Gordan coefficient <j1 m1, j2 m2 | L M>.
/// Returns 0 when M != m1 + m2; throws on inconsistent quantum numbers.
double clebsch_gordan(HalfInt j1, HalfInt m1, HalfInt j2, HalfInt m2, HalfInt L, HalfInt M);

/// |L, M> expanded in the product basis.
Vector coupled_basis_state(const SpinQuantum& j1, const SpinQuantum& j2, const CoupledLevel& level);

} // namespace spinbath
