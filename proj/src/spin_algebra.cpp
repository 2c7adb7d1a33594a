#include "spinbath/spin_algebra.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace spinbath {

SpinQuantum::SpinQuantum(HalfInt j) : j_(j)
{
    if (j.twice() < 0)
        throw std::invalid_argument("spin magnitude must be non-negative, got " + j.str());
}

SpinQuantum SpinQuantum::from_particles(int n)
{
    if (n < 0)
        throw std::invalid_argument("particle count must be non-negative");
    return SpinQuantum(HalfInt::from_twice(n));
}

bool SpinQuantum::contains(HalfInt m) const
{
    return abs(m) <= j_ && same_parity(m, j_);
}

int SpinQuantum::index_of(HalfInt m) const
{
    if (!contains(m))
        throw std::invalid_argument("magnetic number " + m.str() + " not in spin " + j_.str());
    return (j_ - m).twice() / 2;
}

SpinOperator::SpinOperator(Matrix matrix, Dims dims) : matrix_(std::move(matrix)), dims_(std::move(dims))
{
    if (matrix_.rows() != matrix_.cols())
        throw std::invalid_argument("operator matrix must be square");
    const long side = std::accumulate(dims_.begin(), dims_.end(), 1L, std::multiplies<>());
    if (dims_.empty() || side != matrix_.rows())
        throw std::invalid_argument("operator side does not match product of dims");
}

double SpinOperator::hermiticity_residual() const
{
    return (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff();
}

SpinOperator SpinOperator::operator+(const SpinOperator& o) const
{
    if (dims_ != o.dims_)
        throw std::invalid_argument("operator dims mismatch in sum");
    return SpinOperator(matrix_ + o.matrix_, dims_);
}

SpinOperator SpinOperator::operator*(double s) const
{
    return SpinOperator(matrix_ * s, dims_);
}

SpinOperator identity_op(const Dims& dims)
{
    const int side = std::accumulate(dims.begin(), dims.end(), 1, std::multiplies<>());
    return SpinOperator(Matrix::Identity(side, side), dims);
}

const SpinOperator& AngularMomentum::component(Axis a) const
{
    switch (a) {
    case Axis::x: return jx;
    case Axis::y: return jy;
    case Axis::z: return jz;
    }
    throw std::logic_error("bad axis");
}

AngularMomentum angular_momentum_ops(const SpinQuantum& spin)
{
    const int d = spin.dim();
    const double j = spin.value();
    const Complex i_unit(0.0, 1.0);

    // J+ |m> = sqrt(j(j+1) - m(m+1)) |m+1>; |m+1> sits one row above |m>.
    Matrix jplus = Matrix::Zero(d, d);
    Matrix jz = Matrix::Zero(d, d);
    for (int k = 0; k < d; ++k) {
        const double m = spin.m_at(k).value();
        jz(k, k) = m;
        if (k > 0)
            jplus(k - 1, k) = std::sqrt(j * (j + 1.0) - m * (m + 1.0));
    }
    const Matrix jminus = jplus.adjoint();
    const Dims dims{d};
    return AngularMomentum{
        SpinOperator((jplus + jminus) * 0.5, dims),
        SpinOperator((jplus - jminus) / (2.0 * i_unit), dims),
        SpinOperator(jz, dims),
        SpinOperator(Matrix::Identity(d, d) * (j * (j + 1.0)), dims),
    };
}

Matrix kron(const Matrix& a, const Matrix& b)
{
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index r = 0; r < a.rows(); ++r)
        for (Eigen::Index c = 0; c < a.cols(); ++c)
            out.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = a(r, c) * b;
    return out;
}

SpinOperator embed(const SpinOperator& op, std::size_t slot, const Dims& dims)
{
    if (slot >= dims.size())
        throw std::invalid_argument("embed: slot out of range");
    if (op.dim() != dims[slot])
        throw std::invalid_argument("embed: operator side " + std::to_string(op.dim()) + " != dims[slot] "
                                    + std::to_string(dims[slot]));
    Matrix out = Matrix::Identity(1, 1);
    for (std::size_t s = 0; s < dims.size(); ++s) {
        const Matrix factor = s == slot ? op.matrix() : Matrix::Identity(dims[s], dims[s]);
        out = kron(out, factor);
    }
    return SpinOperator(std::move(out), dims);
}

AxisOps embedded_ops(const SpinQuantum& j1, const SpinQuantum& j2, std::size_t slot)
{
    const Dims dims{j1.dim(), j2.dim()};
    const AngularMomentum ops = angular_momentum_ops(slot == 0 ? j1 : j2);
    return {embed(ops.jx, slot, dims), embed(ops.jy, slot, dims), embed(ops.jz, slot, dims)};
}

AxisOps composite_coupling_ops(const SpinQuantum& j1, const SpinQuantum& j2, double lambda)
{
    if (!(lambda >= 0.0 && lambda <= 2.0))
        throw std::invalid_argument("coupling parameter lambda must lie in [0, 2], got " + std::to_string(lambda));
    const AxisOps first = embedded_ops(j1, j2, 0);
    const AxisOps second = embedded_ops(j1, j2, 1);
    const Dims dims{j1.dim(), j2.dim()};
    auto mix = [&](std::size_t a) {
        return SpinOperator((lambda * first[a].matrix() + (2.0 - lambda) * second[a].matrix()) / 2.0, dims);
    };
    return {mix(0), mix(1), mix(2)};
}

AxisOps total_spin_ops(const SpinQuantum& j1, const SpinQuantum& j2)
{
    const AxisOps first = embedded_ops(j1, j2, 0);
    const AxisOps second = embedded_ops(j1, j2, 1);
    return {first[0] + second[0], first[1] + second[1], first[2] + second[2]};
}

void check_coupled_level(const SpinQuantum& j1, const SpinQuantum& j2, const CoupledLevel& level)
{
    const HalfInt lo = abs(j1.j() - j2.j());
    const HalfInt hi = j1.j() + j2.j();
    if (level.L < lo || level.L > hi || !same_parity(level.L, hi))
        throw std::invalid_argument("L = " + level.L.str() + " not reachable from j1 = " + j1.j().str()
                                    + ", j2 = " + j2.j().str());
    if (abs(level.M) > level.L || !same_parity(level.M, level.L))
        throw std::invalid_argument("M = " + level.M.str() + " invalid for L = " + level.L.str());
}

namespace {

double log_factorial(int n)
{
    return std::lgamma(static_cast<double>(n) + 1.0);
}

// Integer value of a half-integer sum that is known to be integral.
int as_int(HalfInt h)
{
    return h.twice() / 2;
}

} // namespace

double clebsch_gordan(HalfInt j1, HalfInt m1, HalfInt j2, HalfInt m2, HalfInt L, HalfInt M)
{
    const SpinQuantum s1(j1), s2(j2);
    if (!s1.contains(m1) || !s2.contains(m2))
        throw std::invalid_argument("clebsch_gordan: magnetic number out of range");
    check_coupled_level(s1, s2, CoupledLevel{L, M});
    if (m1 + m2 != M)
        return 0.0;

    // Racah's closed form, accumulated in log space.
    const int a = as_int(j1 + j2 - L);
    const int b = as_int(j1 - m1);
    const int c = as_int(j2 + m2);
    const int d = as_int(L - j2 + m1);
    const int e = as_int(L - j1 - m2);

    const double log_prefactor
        = 0.5
          * (std::log(L.twice() + 1.0) + log_factorial(as_int(L + j1 - j2)) + log_factorial(as_int(L - j1 + j2))
             + log_factorial(a) - log_factorial(as_int(j1 + j2 + L) + 1) + log_factorial(as_int(L + M))
             + log_factorial(as_int(L - M)) + log_factorial(as_int(j1 - m1)) + log_factorial(as_int(j1 + m1))
             + log_factorial(as_int(j2 - m2)) + log_factorial(as_int(j2 + m2)));

    const int k_min = std::max({0, -d, -e});
    const int k_max = std::min({a, b, c});
    double sum = 0.0;
    for (int k = k_min; k <= k_max; ++k) {
        const double log_term = log_prefactor - log_factorial(k) - log_factorial(a - k) - log_factorial(b - k)
                                - log_factorial(c - k) - log_factorial(d + k) - log_factorial(e + k);
        const double term = std::exp(log_term);
        sum += (k % 2 == 0) ? term : -term;
    }
    return sum;
}

Vector coupled_basis_state(const SpinQuantum& j1, const SpinQuantum& j2, const CoupledLevel& level)
{
    check_coupled_level(j1, j2, level);
    Vector psi = Vector::Zero(j1.dim() * j2.dim());
    for (int k1 = 0; k1 < j1.dim(); ++k1) {
        const HalfInt m1 = j1.m_at(k1);
        const HalfInt m2 = level.M - m1;
        if (!j2.contains(m2))
            continue;
        psi(k1 * j2.dim() + j2.index_of(m2)) = clebsch_gordan(j1.j(), m1, j2.j(), m2, level.L, level.M);
    }
    return psi;
}

} // namespace spinbath
