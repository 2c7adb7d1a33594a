#include "spinbath/generator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>

namespace spinbath {

bool AxisSet::has(Axis a) const
{
    switch (a) {
    case Axis::x: return x;
    case Axis::y: return y;
    case Axis::z: return z;
    }
    return false;
}

std::string AxisSet::str() const
{
    std::string out;
    if (z) out += 'z';
    if (x) out += 'x';
    if (y) out += 'y';
    return out;
}

AxisSet AxisSet::parse(const std::string& letters)
{
    AxisSet axes;
    for (char ch : letters) {
        bool* slot = nullptr;
        switch (ch) {
        case 'x': slot = &axes.x; break;
        case 'y': slot = &axes.y; break;
        case 'z': slot = &axes.z; break;
        default: throw std::invalid_argument(std::string("unknown axis '") + ch + "'");
        }
        if (*slot)
            throw std::invalid_argument("axis listed twice: " + letters);
        *slot = true;
    }
    if (axes.empty())
        throw std::invalid_argument("axis set must not be empty");
    return axes;
}

DampingMatrix validate_damping(const DampingMatrix& gamma, const AxisSet& axes)
{
    if (!gamma.allFinite())
        throw DampingError(DampingError::Reason::NonSymmetric, "damping matrix has non-finite entries");
    const double scale = std::max(1.0, gamma.cwiseAbs().maxCoeff());
    if ((gamma - gamma.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw DampingError(DampingError::Reason::NonSymmetric, "damping matrix is not symmetric");

    for (Axis a : kAllAxes)
        for (Axis b : kAllAxes)
            if ((!axes.has(a) || !axes.has(b)) && gamma(int(a), int(b)) != 0.0)
                throw DampingError(DampingError::Reason::OutsideAxes,
                                   "damping matrix couples an axis outside '" + axes.str() + "'");

    const DampingMatrix sym = 0.5 * (gamma + gamma.transpose());
    Eigen::SelfAdjointEigenSolver<DampingMatrix> solver(sym, Eigen::EigenvaluesOnly);
    if (solver.eigenvalues().minCoeff() < -1e-12)
        throw DampingError(DampingError::Reason::NotPositiveSemidefinite,
                           "damping matrix is not positive semidefinite (min eigenvalue "
                               + std::to_string(solver.eigenvalues().minCoeff()) + ")");
    return sym;
}

Dims EnsemblePair::dims() const
{
    if (j2)
        return {j1.dim(), j2->dim()};
    return {j1.dim()};
}

int EnsemblePair::dim() const
{
    return j1.dim() * (j2 ? j2->dim() : 1);
}

std::vector<CouplingChannel> coupling_channels(const DecoherenceModel& model, const EnsemblePair& ensembles)
{
    if (model.axes.empty())
        throw std::invalid_argument("decoherence model needs at least one axis");
    std::vector<CouplingChannel> channels;

    if (const auto* single = std::get_if<SingleBath>(&model.bath)) {
        if (ensembles.j2)
            throw std::invalid_argument("single-ensemble model given two ensembles");
        const AngularMomentum j = angular_momentum_ops(ensembles.j1);
        channels.push_back({"", validate_damping(single->gamma, model.axes), {j.jx, j.jy, j.jz}});
        return channels;
    }

    if (!ensembles.j2)
        throw std::invalid_argument("two-ensemble model given a single ensemble");
    const SpinQuantum& j1 = ensembles.j1;
    const SpinQuantum& j2 = *ensembles.j2;

    if (const auto* independent = std::get_if<IndependentBath>(&model.bath)) {
        channels.push_back({"e1.", validate_damping(independent->gamma1, model.axes), embedded_ops(j1, j2, 0)});
        channels.push_back({"e2.", validate_damping(independent->gamma2, model.axes), embedded_ops(j1, j2, 1)});
        return channels;
    }

    const auto& common = std::get<CommonBath>(model.bath);
    AxisOps ops = composite_coupling_ops(j1, j2, common.lambda);
    if (common.scale == CouplingScale::total_spin)
        for (auto& op : ops)
            op = op * 2.0;
    channels.push_back({"", validate_damping(common.gamma, model.axes), std::move(ops)});
    return channels;
}

std::vector<SpinOperator> canonical_jumps(const DampingMatrix& gamma, const AxisOps& coupling_ops)
{
    const Dims& dims = coupling_ops[0].dims();
    for (const auto& op : coupling_ops)
        if (op.dims() != dims)
            throw std::invalid_argument("coupling operators must share dimensions");

    Eigen::SelfAdjointEigenSolver<DampingMatrix> solver(gamma);
    const Eigen::Vector3d rates = solver.eigenvalues();
    const double cutoff = 1e-14 * std::max(1.0, rates.cwiseAbs().maxCoeff());

    std::vector<SpinOperator> jumps;
    for (int k = 2; k >= 0; --k) {
        if (rates(k) <= cutoff)
            continue;
        Eigen::Vector3d dir = solver.eigenvectors().col(k);
        Eigen::Index lead = 0;
        dir.cwiseAbs().maxCoeff(&lead);
        if (dir(lead) < 0.0)
            dir = -dir;
        const double amp = std::sqrt(rates(k));
        Matrix jump = Matrix::Zero(coupling_ops[0].dim(), coupling_ops[0].dim());
        for (int a = 0; a < 3; ++a)
            if (dir(a) != 0.0)
                jump += (amp * dir(a)) * coupling_ops[a].matrix();
        jumps.emplace_back(std::move(jump), dims);
    }
    return jumps;
}

namespace {

// Largest singular value; Hermitian inputs (the usual case) take the cheaper eigenvalue route.
double spectral_norm(const Matrix& a)
{
    if (a.size() == 0)
        return 0.0;
    const double scale = a.cwiseAbs().maxCoeff();
    if (scale == 0.0)
        return 0.0;
    if ((a - a.adjoint()).cwiseAbs().maxCoeff() <= 1e-14 * scale) {
        Eigen::SelfAdjointEigenSolver<Matrix> solver(a, Eigen::EigenvaluesOnly);
        return solver.eigenvalues().cwiseAbs().maxCoeff();
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(a.adjoint() * a, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, solver.eigenvalues().maxCoeff()));
}

template <typename Sparse>
Sparse to_sparse(const Matrix& m)
{
    std::vector<Eigen::Triplet<Complex>> entries;
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            if (m(r, c) != Complex(0.0, 0.0))
                entries.emplace_back(r, c, m(r, c));
    Sparse out(m.rows(), m.cols());
    out.setFromTriplets(entries.begin(), entries.end());
    return out;
}

} // namespace

Generator::Generator(std::vector<SpinOperator> jump_ops, std::optional<SpinOperator> hamiltonian, Dims dims)
    : jump_ops_(std::move(jump_ops)), hamiltonian_(std::move(hamiltonian)), dims_(std::move(dims))
{
    dim_ = std::accumulate(dims_.begin(), dims_.end(), 1, std::multiplies<>());
    Matrix drift = Matrix::Zero(dim_, dim_);
    for (const auto& jump : jump_ops_) {
        if (jump.dims() != dims_)
            throw std::invalid_argument("jump operator dimensions do not match generator");
        const double bound = spectral_norm(jump.matrix());
        jump_norm_sq_ += bound * bound;
        drift -= 0.5 * jump.matrix().adjoint() * jump.matrix();
        jumps_sparse_.push_back(to_sparse<Sparse>(jump.matrix()));
        jumps_adjoint_.push_back(to_sparse<Sparse>(jump.matrix().adjoint()));
    }
    if (hamiltonian_) {
        if (hamiltonian_->dims() != dims_)
            throw std::invalid_argument("Hamiltonian dimensions do not match generator");
        if (hamiltonian_->hermiticity_residual() > 1e-12 * std::max(1.0, hamiltonian_->matrix().cwiseAbs().maxCoeff()))
            throw std::invalid_argument("Hamiltonian is not Hermitian");
        ham_norm_ = spectral_norm(hamiltonian_->matrix());
        drift -= Complex(0.0, 1.0) * hamiltonian_->matrix();
    }
    drift_ = to_sparse<Sparse>(drift);
    drift_adjoint_ = to_sparse<Sparse>(drift.adjoint());
}

Matrix Generator::apply(const Matrix& rho) const
{
    if (rho.rows() != dim_ || rho.cols() != dim_)
        throw std::invalid_argument("generator applied to a matrix of the wrong dimension");
    Matrix out = drift_ * rho;
    out.noalias() += rho * drift_adjoint_;
    Matrix left(dim_, dim_);
    for (std::size_t k = 0; k < jumps_sparse_.size(); ++k) {
        left.noalias() = jumps_sparse_[k] * rho;
        out.noalias() += left * jumps_adjoint_[k];
    }
    return out;
}

Matrix Generator::apply_hermitian(const Matrix& rho) const
{
    if (rho.rows() != dim_ || rho.cols() != dim_)
        throw std::invalid_argument("generator applied to a matrix of the wrong dimension");
    Matrix out = drift_ * rho;
    out += out.adjoint().eval();
    Matrix left(dim_, dim_);
    for (std::size_t k = 0; k < jumps_sparse_.size(); ++k) {
        left.noalias() = jumps_sparse_[k] * rho;
        out.noalias() += left * jumps_adjoint_[k];
    }
    return out;
}

double Generator::norm_bound() const
{
    return 2.0 * ham_norm_ + 2.0 * jump_norm_sq_;
}

double Generator::default_step() const
{
    const double stiffness = jump_norm_sq_ + ham_norm_;
    return stiffness > 0.0 ? 0.1 / stiffness : std::numeric_limits<double>::infinity();
}

Generator build_generator(const DecoherenceModel& model, const EnsemblePair& ensembles)
{
    const Dims dims = ensembles.dims();
    std::vector<SpinOperator> jumps;
    for (const auto& channel : coupling_channels(model, ensembles)) {
        auto part = canonical_jumps(channel.gamma, channel.ops);
        jumps.insert(jumps.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    std::optional<SpinOperator> hamiltonian;
    if (model.hamiltonian) {
        if (model.hamiltonian->rows() != ensembles.dim() || model.hamiltonian->cols() != ensembles.dim())
            throw std::invalid_argument("Hamiltonian does not match the ensemble dimension");
        hamiltonian.emplace(*model.hamiltonian, dims);
    }
    return Generator(std::move(jumps), std::move(hamiltonian), dims);
}

Matrix apply_generator(const Generator& g, const Matrix& rho)
{
    return g.apply(rho);
}

Matrix apply_generator(const Generator& g, const DensityMatrix& rho)
{
    if (rho.dims() != g.dims())
        throw std::invalid_argument("density matrix dims do not match generator");
    return g.apply_hermitian(rho.matrix());
}

double stationary_residual(const Generator& g, const DensityMatrix& rho)
{
    return apply_generator(g, rho).norm();
}

namespace {

Matrix rk4_step(const Generator& g, const Matrix& rho, const Matrix& k1, double h)
{
    const Matrix k2 = g.apply_hermitian(rho + (0.5 * h) * k1);
    const Matrix k3 = g.apply_hermitian(rho + (0.5 * h) * k2);
    const Matrix k4 = g.apply_hermitian(rho + h * k3);
    return rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Matrix rk4_step(const Generator& g, const Matrix& rho, double h)
{
    return rk4_step(g, rho, g.apply_hermitian(rho), h);
}

void project_physical(Matrix& rho)
{
    rho = 0.5 * (rho + rho.adjoint()).eval();
    rho /= rho.trace().real();
}

// Power-iteration estimate of the generator's spectral radius from a fixed Hermitian seed.
double spectral_radius_estimate(const Generator& g)
{
    const int n = g.dim();
    Matrix x(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
            x(r, c) = Complex(std::cos(1.0 + r + 7.0 * c), std::sin(3.0 * r - c));
    x = 0.5 * (x + x.adjoint()).eval();
    x /= x.norm();
    double radius = 0.0;
    for (int it = 0; it < 40; ++it) {
        Matrix y = g.apply_hermitian(x);
        const double growth = y.norm();
        if (!(growth > 0.0))
            break;
        radius = std::max(radius, growth);
        x = y / growth;
    }
    return radius;
}

double purity_deficit(const Matrix& rho)
{
    return 1.0 - rho.squaredNorm();
}

} // namespace

Trajectory evolve(const Generator& g, const DensityMatrix& rho0, double t_final, const EvolveControl& control)
{
    if (rho0.dims() != g.dims())
        throw std::invalid_argument("initial state dims do not match generator");
    if (!(t_final >= 0.0) || !std::isfinite(t_final))
        throw std::invalid_argument("t_final must be a finite non-negative time");
    if (control.stride < 1)
        throw std::invalid_argument("sample stride must be >= 1");
    if (control.mode == EvolveControl::Mode::adaptive && !(control.tol > 0.0))
        throw std::invalid_argument("adaptive tolerance must be positive");
    if (control.step < 0.0 || !std::isfinite(control.step))
        throw std::invalid_argument("step must be positive (or 0 for the default)");

    Trajectory traj;
    Matrix rho = rho0.matrix();
    const double norm0 = rho.norm();
    auto record = [&](double t) {
        traj.samples.push_back(Sample{t, DensityMatrix::unchecked(rho, rho0.dims()), purity_deficit(rho)});
    };
    auto guard = [&](double t_last_good) {
        const double n = rho.norm();
        if (!std::isfinite(n) || n > 10.0 * norm0)
            throw IntegratorAbort("integrator unstable: state norm grew to " + std::to_string(n), t_last_good);
    };

    record(0.0);
    if (t_final == 0.0)
        return traj;

    double h = control.step > 0.0 ? control.step : g.default_step();
    if (!std::isfinite(h))
        h = t_final;

    if (control.mode == EvolveControl::Mode::fixed) {
        const long steps = std::max(1L, static_cast<long>(std::ceil(t_final / h - 1e-9)));
        const double dt = t_final / static_cast<double>(steps);
        for (long n = 1; n <= steps; ++n) {
            rho = rk4_step(g, rho, dt);
            project_physical(rho);
            guard(static_cast<double>(n - 1) * dt);
            ++traj.accepted;
            if (n % control.stride == 0 || n == steps)
                record(n == steps ? t_final : static_cast<double>(n) * dt);
        }
        return traj;
    }

    // Step doubling: compare one step of h with two of h/2. The step cap keeps RK4 inside its
    // stability interval (about 2.78 / radius); the estimate is padded by 25% and the error
    // control rejects steps if it still falls short.
    const double radius = std::min(g.norm_bound(), 1.25 * spectral_radius_estimate(g));
    const double h_max = radius > 0.0 ? 2.5 / radius : std::numeric_limits<double>::infinity();
    const double h_min = 1e-14 * std::max(1.0, t_final);
    h = std::min(h, h_max);
    double t = 0.0;
    long since_record = 0;
    while (t < t_final) {
        const bool last = h >= t_final - t;
        const double dt = last ? t_final - t : h;
        // Both candidates start from the same slope.
        const Matrix k1 = g.apply_hermitian(rho);
        const Matrix coarse = rk4_step(g, rho, k1, dt);
        const Matrix fine = rk4_step(g, rk4_step(g, rho, k1, 0.5 * dt), 0.5 * dt);
        const double err = (fine - coarse).cwiseAbs().maxCoeff() / 15.0;
        if (!std::isfinite(err))
            throw IntegratorAbort("integrator produced non-finite values", t);
        const double factor = err == 0.0 ? 2.0 : std::clamp(0.9 * std::pow(control.tol / err, 0.2), 0.2, 2.0);
        if (err <= control.tol) {
            rho = fine;
            project_physical(rho);
            guard(t);
            t = last ? t_final : t + dt;
            ++traj.accepted;
            if (++since_record == control.stride || t == t_final) {
                record(t);
                since_record = 0;
            }
        } else {
            ++traj.rejected;
        }
        h = std::min(dt * factor, h_max);
        if (h < h_min && t < t_final)
            throw IntegratorAbort("adaptive step underflow", t);
    }
    return traj;
}

} // namespace spinbath
