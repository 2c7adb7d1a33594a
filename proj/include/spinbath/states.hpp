#pragma once

#include <optional>
#include <string>

#include "spinbath/spin_algebra.hpp"

namespace spinbath {

/// Validated density matrix on a tensor-product space.
class DensityMatrix {
public:
    /// Enforces Hermiticity (1e-10), unit trace (1e-10) and eigenvalues >= -1e-9.
    static DensityMatrix checked(Matrix rho, Dims dims);
    /// Skips validation; callers guarantee the invariants.
    static DensityMatrix unchecked(Matrix rho, Dims dims);

    const Matrix& matrix() const { return rho_; }
    const Dims& dims() const { return dims_; }
    int dim() const { return static_cast<int>(rho_.rows()); }

    double trace_deviation() const;
    double hermiticity_residual() const;
    double min_eigenvalue() const;

private:
    DensityMatrix(Matrix rho, Dims dims) : rho_(std::move(rho)), dims_(std::move(dims)) {}
    Matrix rho_;
    Dims dims_;
};

/// Coefficients c_m of sum_m c_m |m, -m>, m on ensemble 1 ranging over +-Ntilde.
/// Stored in descending m order: coeffs(i) is c_{Ntilde - i}.
class EntangledStateSpec {
public:
    /// Throws unless length is 2*Ntilde+1 and the vector is normalized (1e-12),
    /// or normalizes it when auto_normalize is set.
    EntangledStateSpec(SpinQuantum j1, SpinQuantum j2, Vector coeffs, bool auto_normalize = false);

    const SpinQuantum& j1() const { return j1_; }
    const SpinQuantum& j2() const { return j2_; }
    HalfInt ntilde() const { return min(j1_.j(), j2_.j()); }
    const Vector& coeffs() const { return coeffs_; }
    /// c_m; zero outside [-Ntilde, Ntilde].
    Complex coeff(HalfInt m) const;

private:
    SpinQuantum j1_, j2_;
    Vector coeffs_;
};

enum class ProfileKind { uniform, alternating_uniform, singlet, gaussian, custom };

std::optional<ProfileKind> parse_profile_kind(const std::string& name);
std::string to_string(ProfileKind kind);

/// Normalized c_m over m = Ntilde..-Ntilde with c_{Ntilde} real positive.
/// `width` is used by the gaussian profile (|c_m|^2 ~ exp(-m^2 / (2 width^2))),
/// `custom` is normalized and returned for the custom kind.
Vector coefficient_profile(ProfileKind kind, HalfInt ntilde, double width = 1.0, const Vector& custom = {});

/// Profile for a concrete ensemble pair; the singlet profile requires j1 == j2.
EntangledStateSpec make_entangled_spec(ProfileKind kind, const SpinQuantum& j1, const SpinQuantum& j2,
                                       double width = 1.0, const Vector& custom = {});

Vector fock_state(const SpinQuantum& j, HalfInt m);
Vector product_state(const Vector& a, const Vector& b);
Vector entangled_state(const EntangledStateSpec& spec);

DensityMatrix density_from_pure(const Vector& psi, Dims dims);

/// Reduced state on factor `keep` of a two-factor density matrix.
DensityMatrix partial_trace(const DensityMatrix& rho, std::size_t keep);

} // namespace spinbath
