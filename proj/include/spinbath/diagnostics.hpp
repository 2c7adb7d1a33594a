#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spinbath/generator.hpp"
#include "spinbath/states.hpp"

namespace spinbath {

/// 1 - tr(rho^2).
double linear_entropy(const DensityMatrix& rho);

/// -2 tr(rho L(rho)), the instantaneous growth rate of the linear entropy.
double entropy_rate_numeric(const Generator& g, const DensityMatrix& rho);

/// Covariance form 2 sum_ab gamma_ab (<{O_a, O_b}>/2 - <O_a><O_b>) evaluated
/// on a pure state. Contributions are keyed by channel prefix and axis pair
/// ("e1.zz", "xz", ...); off-diagonal pairs include both orderings.
struct AnalyticRate {
    double total = 0.0;
    std::map<std::string, double> contributions;
};

AnalyticRate entropy_rate_analytic(const Vector& psi, const DecoherenceModel& model, const EnsemblePair& ensembles);

/// Closed-form large-Ntilde estimates with Ntilde^2 in place of Ntilde(Ntilde+1):
///   independent bath: 2 (gamma_zz + gamma'_zz) Ntilde^2 / 3
///   common bath:      2 gamma_zz (lambda - 1)^2 Ntilde^2 / 3  (x4 in total-spin scale)
/// Requires Ntilde >= 1.
double entropy_rate_estimate(double ntilde, const DecoherenceModel& model);

struct RateReport {
    double numeric_rate = 0.0;
    double analytic_rate = 0.0;
    std::optional<double> estimate_rate;
    std::map<std::string, double> per_axis_contributions;
};

/// Numeric, analytic and (where defined) estimated rate for a pure state.
/// `ntilde` enables the estimate for entangled states with Ntilde >= 1.
RateReport rate_report(const Vector& psi, const DecoherenceModel& model, const EnsemblePair& ensembles,
                       std::optional<double> ntilde = std::nullopt);

/// -tr(rho ln rho) with 0 ln 0 = 0.
double von_neumann_entropy(const DensityMatrix& rho);

/// <op^2> - <op>^2 for a Hermitian op.
double variance_exact(const SpinOperator& op, const Vector& psi);

/// sum over m = -Ntilde+1..Ntilde of [|c_m|^2 + Re(c*_{m-1} c_m)] [j(j+1) - m^2].
/// Approximates the variance of the unscaled total-spin J1x + J2x; needs j1 == j2.
double variance_Lx_approx(const EntangledStateSpec& spec);

/// max over m = -Ntilde+1..Ntilde of | |c_m|^2 + Re(c*_{m-1} c_m) |,
/// coefficients in descending-m order.
double mincond_residual(const Vector& coeffs);

/// Count of Schmidt coefficients above 1e-10.
int schmidt_number(const Vector& psi, const Dims& dims);

/// Closed-form linear-entropy rate of |L, M=0> at lambda = 1 in the total-spin
/// normalization: (gamma_xx + gamma_yy) L (L+1), restricted to `axes`.
double coupled_state_rate(HalfInt L, HalfInt M, const AxisSet& axes, const DampingMatrix& gamma);

struct DfsVerdict {
    double residual = 0.0;
    double purity_rate = 0.0;
    bool certified = false;
};

inline constexpr double kDfsThreshold = 1e-12;

/// Stationary residual and purity rate of |psi><psi|, both <= 1e-12 to certify.
DfsVerdict certify_state(const Generator& g, const Vector& psi);

/// Every |psi_i><psi_j| must be annihilated; residual is the largest one.
DfsVerdict certify_subspace(const Generator& g, const std::vector<Vector>& basis);

} // namespace spinbath
