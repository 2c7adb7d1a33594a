#include "spinbath/states.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace spinbath {

DensityMatrix DensityMatrix::checked(Matrix rho, Dims dims)
{
    const long side = std::accumulate(dims.begin(), dims.end(), 1L, std::multiplies<>());
    if (rho.rows() != rho.cols() || dims.empty() || side != rho.rows())
        throw std::invalid_argument("density matrix shape does not match dims");
    DensityMatrix out(std::move(rho), std::move(dims));
    if (out.hermiticity_residual() > 1e-10)
        throw std::invalid_argument("density matrix is not Hermitian");
    if (out.trace_deviation() > 1e-10)
        throw std::invalid_argument("density matrix trace differs from 1");
    if (out.min_eigenvalue() < -1e-9)
        throw std::invalid_argument("density matrix has a negative eigenvalue");
    return out;
}

DensityMatrix DensityMatrix::unchecked(Matrix rho, Dims dims)
{
    return DensityMatrix(std::move(rho), std::move(dims));
}

double DensityMatrix::trace_deviation() const
{
    return std::abs(rho_.trace() - Complex(1.0, 0.0));
}

double DensityMatrix::hermiticity_residual() const
{
    return (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff();
}

double DensityMatrix::min_eigenvalue() const
{
    const Matrix herm = 0.5 * (rho_ + rho_.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(herm, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

EntangledStateSpec::EntangledStateSpec(SpinQuantum j1, SpinQuantum j2, Vector coeffs, bool auto_normalize)
    : j1_(j1), j2_(j2), coeffs_(std::move(coeffs))
{
    // |m> on ensemble 1 pairs with |-m> on ensemble 2, so both must admit the same m values.
    if (!same_parity(j1.j(), j2.j()))
        throw std::invalid_argument("entangled state |m,-m> needs j1 - j2 integer; got j1 = " + j1.j().str()
                                    + ", j2 = " + j2.j().str());
    const int expected = ntilde().twice() + 1;
    if (coeffs_.size() != expected)
        throw std::invalid_argument("expected " + std::to_string(expected) + " coefficients, got "
                                    + std::to_string(coeffs_.size()));
    const double norm = coeffs_.norm();
    if (auto_normalize) {
        if (norm == 0.0)
            throw std::invalid_argument("coefficient vector is zero");
        coeffs_ /= norm;
    } else if (std::abs(coeffs_.squaredNorm() - 1.0) > 1e-12) {
        throw std::invalid_argument("coefficients are not normalized");
    }
}

Complex EntangledStateSpec::coeff(HalfInt m) const
{
    const SpinQuantum range(ntilde());
    if (!range.contains(m))
        return {};
    return coeffs_(range.index_of(m));
}

std::optional<ProfileKind> parse_profile_kind(const std::string& name)
{
    if (name == "uniform") return ProfileKind::uniform;
    if (name == "alternating_uniform") return ProfileKind::alternating_uniform;
    if (name == "singlet") return ProfileKind::singlet;
    if (name == "gaussian") return ProfileKind::gaussian;
    if (name == "custom") return ProfileKind::custom;
    return std::nullopt;
}

std::string to_string(ProfileKind kind)
{
    switch (kind) {
    case ProfileKind::uniform: return "uniform";
    case ProfileKind::alternating_uniform: return "alternating_uniform";
    case ProfileKind::singlet: return "singlet";
    case ProfileKind::gaussian: return "gaussian";
    case ProfileKind::custom: return "custom";
    }
    return "unknown";
}

Vector coefficient_profile(ProfileKind kind, HalfInt ntilde, double width, const Vector& custom)
{
    const SpinQuantum range(ntilde);
    const int n = range.dim();
    Vector c(n);
    switch (kind) {
    case ProfileKind::uniform:
        c.setConstant(1.0 / std::sqrt(static_cast<double>(n)));
        return c;
    case ProfileKind::alternating_uniform:
        if (ntilde.twice() == 0)
            throw std::invalid_argument("alternating profile needs Ntilde >= 1/2");
        [[fallthrough]];
    case ProfileKind::singlet:
        // (-1)^(Ntilde - m); index i holds m = Ntilde - i.
        for (int i = 0; i < n; ++i)
            c(i) = (i % 2 == 0 ? 1.0 : -1.0) / std::sqrt(static_cast<double>(n));
        return c;
    case ProfileKind::gaussian:
        if (!(width > 0.0))
            throw std::invalid_argument("gaussian profile width must be positive");
        for (int i = 0; i < n; ++i) {
            const double m = range.m_at(i).value();
            c(i) = std::exp(-m * m / (4.0 * width * width));
        }
        return c / c.norm();
    case ProfileKind::custom: {
        if (custom.size() != n)
            throw std::invalid_argument("custom profile needs " + std::to_string(n) + " coefficients");
        const double norm = custom.norm();
        if (norm == 0.0)
            throw std::invalid_argument("custom profile is zero");
        c = custom / norm;
        // Fix the global phase so c_{Ntilde} is real positive when it is nonzero.
        if (std::abs(c(0)) > 0.0)
            c *= std::conj(c(0)) / std::abs(c(0));
        return c;
    }
    }
    throw std::invalid_argument("unknown coefficient profile");
}

EntangledStateSpec make_entangled_spec(ProfileKind kind, const SpinQuantum& j1, const SpinQuantum& j2,
                                       double width, const Vector& custom)
{
    if (kind == ProfileKind::singlet && j1 != j2)
        throw std::invalid_argument("singlet profile requires j1 == j2");
    return EntangledStateSpec(j1, j2, coefficient_profile(kind, min(j1.j(), j2.j()), width, custom));
}

Vector fock_state(const SpinQuantum& j, HalfInt m)
{
    Vector psi = Vector::Zero(j.dim());
    psi(j.index_of(m)) = 1.0;
    return psi;
}

Vector product_state(const Vector& a, const Vector& b)
{
    Vector out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i)
        out.segment(i * b.size(), b.size()) = a(i) * b;
    return out;
}

Vector entangled_state(const EntangledStateSpec& spec)
{
    const SpinQuantum& j1 = spec.j1();
    const SpinQuantum& j2 = spec.j2();
    const SpinQuantum range(spec.ntilde());
    Vector psi = Vector::Zero(j1.dim() * j2.dim());
    for (int i = 0; i < range.dim(); ++i) {
        const HalfInt m = range.m_at(i);
        psi(j1.index_of(m) * j2.dim() + j2.index_of(-m)) = spec.coeffs()(i);
    }
    return psi;
}

DensityMatrix density_from_pure(const Vector& psi, Dims dims)
{
    const double norm = psi.norm();
    if (norm == 0.0)
        throw std::invalid_argument("density_from_pure: zero vector");
    if (std::abs(norm - 1.0) > 1e-10)
        throw std::invalid_argument("density_from_pure: state is not normalized");
    return DensityMatrix::checked(psi * psi.adjoint(), std::move(dims));
}

DensityMatrix partial_trace(const DensityMatrix& rho, std::size_t keep)
{
    const Dims& dims = rho.dims();
    if (dims.size() != 2 || keep > 1)
        throw std::invalid_argument("partial_trace needs a two-factor state and keep in {0, 1}");
    const int d1 = dims[0];
    const int d2 = dims[1];
    const Matrix& r = rho.matrix();
    const int kept = keep == 0 ? d1 : d2;
    Matrix out = Matrix::Zero(kept, kept);
    if (keep == 0) {
        for (int a = 0; a < d1; ++a)
            for (int b = 0; b < d1; ++b)
                for (int k = 0; k < d2; ++k)
                    out(a, b) += r(a * d2 + k, b * d2 + k);
    } else {
        for (int k = 0; k < d1; ++k)
            out += r.block(k * d2, k * d2, d2, d2);
    }
    return DensityMatrix::unchecked(std::move(out), Dims{kept});
}

} // namespace spinbath
