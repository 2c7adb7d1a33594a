#include "spinbath/diagnostics.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace spinbath {

namespace {

const char* axis_name(int a)
{
    static const char* names[] = {"x", "y", "z"};
    return names[a];
}

// Re tr(a b) without forming the product.
double trace_product_real(const Matrix& a, const Matrix& b)
{
    return a.cwiseProduct(b.transpose()).sum().real();
}

void require_unit(const Vector& psi)
{
    if (std::abs(psi.norm() - 1.0) > 1e-10)
        throw std::invalid_argument("state vector is not normalized");
}

} // namespace

double linear_entropy(const DensityMatrix& rho)
{
    return 1.0 - trace_product_real(rho.matrix(), rho.matrix());
}

double entropy_rate_numeric(const Generator& g, const DensityMatrix& rho)
{
    return -2.0 * trace_product_real(rho.matrix(), apply_generator(g, rho));
}

AnalyticRate entropy_rate_analytic(const Vector& psi, const DecoherenceModel& model, const EnsemblePair& ensembles)
{
    require_unit(psi);
    if (psi.size() != ensembles.dim())
        throw std::invalid_argument("state dimension does not match ensembles");

    AnalyticRate out;
    for (const auto& channel : coupling_channels(model, ensembles)) {
        std::array<Vector, 3> applied;
        std::array<double, 3> mean{};
        for (int a = 0; a < 3; ++a) {
            if (!model.axes.has(Axis(a)))
                continue;
            applied[a] = channel.ops[a].matrix() * psi;
            mean[a] = psi.dot(applied[a]).real();
        }
        for (int a = 0; a < 3; ++a) {
            for (int b = a; b < 3; ++b) {
                if (!model.axes.has(Axis(a)) || !model.axes.has(Axis(b)))
                    continue;
                // <psi| O_a O_b |psi> = (O_a psi)^dag (O_b psi); its real part is the symmetrized product.
                const double cov = applied[a].dot(applied[b]).real() - mean[a] * mean[b];
                const double weight = a == b ? 1.0 : 2.0;
                const double term = 2.0 * weight * channel.gamma(a, b) * cov;
                out.contributions[channel.label + axis_name(a) + axis_name(b)] = term;
                out.total += term;
            }
        }
    }
    return out;
}

double entropy_rate_estimate(double ntilde, const DecoherenceModel& model)
{
    if (!(ntilde >= 1.0))
        throw std::invalid_argument("rate estimate needs Ntilde >= 1");
    const double n2 = ntilde * ntilde;
    const int z = int(Axis::z);
    if (const auto* independent = std::get_if<IndependentBath>(&model.bath))
        return 2.0 * (independent->gamma1(z, z) + independent->gamma2(z, z)) * n2 / 3.0;
    if (const auto* common = std::get_if<CommonBath>(&model.bath)) {
        const double scale = common->scale == CouplingScale::total_spin ? 4.0 : 1.0;
        const double shift = common->lambda - 1.0;
        return scale * 2.0 * common->gamma(z, z) * shift * shift * n2 / 3.0;
    }
    throw std::invalid_argument("rate estimate is defined for two-ensemble models only");
}

RateReport rate_report(const Vector& psi, const DecoherenceModel& model, const EnsemblePair& ensembles,
                       std::optional<double> ntilde)
{
    const Generator g = build_generator(model, ensembles);
    const DensityMatrix rho = density_from_pure(psi, ensembles.dims());
    AnalyticRate analytic = entropy_rate_analytic(psi, model, ensembles);

    RateReport report;
    report.numeric_rate = entropy_rate_numeric(g, rho);
    report.analytic_rate = analytic.total;
    report.per_axis_contributions = std::move(analytic.contributions);
    if (ntilde && *ntilde >= 1.0 && !std::holds_alternative<SingleBath>(model.bath))
        report.estimate_rate = entropy_rate_estimate(*ntilde, model);
    return report;
}

double von_neumann_entropy(const DensityMatrix& rho)
{
    const Matrix herm = 0.5 * (rho.matrix() + rho.matrix().adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(herm, Eigen::EigenvaluesOnly);
    double s = 0.0;
    for (double p : solver.eigenvalues())
        if (p > 0.0)
            s -= p * std::log(p);
    return s;
}

double variance_exact(const SpinOperator& op, const Vector& psi)
{
    if (op.dim() != psi.size())
        throw std::invalid_argument("operator and state dimensions differ");
    if (op.hermiticity_residual() > 1e-12 * std::max(1.0, op.matrix().cwiseAbs().maxCoeff()))
        throw std::invalid_argument("variance requires a Hermitian operator");
    const double norm_sq = psi.squaredNorm();
    if (norm_sq == 0.0)
        throw std::invalid_argument("variance of a zero vector");
    const Vector applied = op.matrix() * psi;
    const double mean = psi.dot(applied).real() / norm_sq;
    return applied.squaredNorm() / norm_sq - mean * mean;
}

double variance_Lx_approx(const EntangledStateSpec& spec)
{
    if (spec.j1() != spec.j2())
        throw std::invalid_argument("variance_Lx_approx requires j1 == j2");
    const double j = spec.j1().value();
    const Vector& c = spec.coeffs();
    const SpinQuantum range(spec.ntilde());
    double sum = 0.0;
    // Index i holds m = Ntilde - i, so c_{m-1} sits at i + 1.
    for (int i = 0; i + 1 < c.size(); ++i) {
        const double m = range.m_at(i).value();
        const double weight = std::norm(c(i)) + (std::conj(c(i + 1)) * c(i)).real();
        sum += weight * (j * (j + 1.0) - m * m);
    }
    return sum;
}

double mincond_residual(const Vector& coeffs)
{
    double worst = 0.0;
    for (Eigen::Index i = 0; i + 1 < coeffs.size(); ++i)
        worst = std::max(worst, std::abs(std::norm(coeffs(i)) + (std::conj(coeffs(i + 1)) * coeffs(i)).real()));
    return worst;
}

int schmidt_number(const Vector& psi, const Dims& dims)
{
    if (dims.size() != 2 || dims[0] < 1 || dims[1] < 1 || psi.size() != dims[0] * dims[1])
        throw std::invalid_argument("schmidt_number needs a bipartite state matching dims");
    Matrix amplitudes(dims[0], dims[1]);
    for (int a = 0; a < dims[0]; ++a)
        for (int b = 0; b < dims[1]; ++b)
            amplitudes(a, b) = psi(a * dims[1] + b);
    Eigen::JacobiSVD<Matrix> svd(amplitudes);
    return static_cast<int>((svd.singularValues().array() > 1e-10).count());
}

double coupled_state_rate(HalfInt L, HalfInt M, const AxisSet& axes, const DampingMatrix& gamma)
{
    if (M.twice() != 0)
        throw std::invalid_argument("coupled_state_rate is defined for M = 0 only");
    if (L.twice() < 0 || !L.is_integer())
        throw std::invalid_argument("L must be a non-negative integer when M = 0");
    const DampingMatrix g = validate_damping(gamma, axes);
    const double l = L.value();
    return (g(int(Axis::x), int(Axis::x)) + g(int(Axis::y), int(Axis::y))) * l * (l + 1.0);
}

DfsVerdict certify_state(const Generator& g, const Vector& psi)
{
    const DensityMatrix rho = density_from_pure(psi, g.dims());
    const Matrix derivative = apply_generator(g, rho);
    DfsVerdict v;
    v.residual = derivative.norm();
    v.purity_rate = -2.0 * trace_product_real(rho.matrix(), derivative);
    v.certified = v.residual <= kDfsThreshold && std::abs(v.purity_rate) <= kDfsThreshold;
    return v;
}

DfsVerdict certify_subspace(const Generator& g, const std::vector<Vector>& basis)
{
    DfsVerdict v;
    v.certified = true;
    for (const auto& a : basis) {
        const DfsVerdict single = certify_state(g, a);
        v.purity_rate = std::max(v.purity_rate, std::abs(single.purity_rate));
        for (const auto& b : basis)
            v.residual = std::max(v.residual, apply_generator(g, Matrix(a * b.adjoint())).norm());
    }
    v.certified = v.residual <= kDfsThreshold && v.purity_rate <= kDfsThreshold;
    return v;
}

} // namespace spinbath
