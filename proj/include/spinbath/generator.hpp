#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "spinbath/spin_algebra.hpp"
#include "spinbath/states.hpp"

namespace spinbath {

/// Which spin components couple to the bath.
struct AxisSet {
    bool x = false;
    bool y = false;
    bool z = false;

    static AxisSet one_axis() { return {false, false, true}; }
    /// z dominant plus x.
    static AxisSet two_axis() { return {true, false, true}; }
    static AxisSet three_axis() { return {true, true, true}; }

    bool has(Axis a) const;
    bool empty() const { return !x && !y && !z; }
    int count() const { return int(x) + int(y) + int(z); }
    std::string str() const;
    /// Parses a string of distinct axis letters such as "z", "zx", "xyz".
    static AxisSet parse(const std::string& letters);

    bool operator==(const AxisSet&) const = default;
};

/// Real symmetric bath-correlation matrix gamma_{alpha beta}, rows/cols ordered x, y, z.
using DampingMatrix = Eigen::Matrix3d;

class DampingError : public std::invalid_argument {
public:
    enum class Reason { NonSymmetric, NotPositiveSemidefinite, OutsideAxes };
    DampingError(Reason reason, const std::string& what) : std::invalid_argument(what), reason_(reason) {}
    Reason reason() const { return reason_; }

private:
    Reason reason_;
};

/// Checks symmetry and positive semidefiniteness (min eigenvalue >= -1e-12)
/// and returns gamma restricted to `axes`.
DampingMatrix validate_damping(const DampingMatrix& gamma, const AxisSet& axes);

/// Each ensemble couples to its own bath; no cross-ensemble terms.
struct IndependentBath {
    DampingMatrix gamma1 = DampingMatrix::Zero();
    DampingMatrix gamma2 = DampingMatrix::Zero();
};

/// Operators the common bath couples to.
/// composite:  L_a = (lambda J1a + (2 - lambda) J2a) / 2
/// total_spin: 2 L_a, which is J1 + J2 at lambda = 1
enum class CouplingScale { composite, total_spin };

/// Both ensembles couple to one bath.
struct CommonBath {
    DampingMatrix gamma = DampingMatrix::Zero();
    double lambda = 1.0;
    CouplingScale scale = CouplingScale::composite;
};

/// A single ensemble coupled through its own J operators.
struct SingleBath {
    DampingMatrix gamma = DampingMatrix::Zero();
};

struct DecoherenceModel {
    std::variant<IndependentBath, CommonBath, SingleBath> bath;
    AxisSet axes = AxisSet::one_axis();
    std::optional<Matrix> hamiltonian;
};

/// One set of per-axis coupling operators with its damping matrix.
struct CouplingChannel {
    std::string label;
    DampingMatrix gamma;
    AxisOps ops;
};

/// Hilbert-space layout for a model: one ensemble (j2 absent) or two.
struct EnsemblePair {
    SpinQuantum j1;
    std::optional<SpinQuantum> j2;

    Dims dims() const;
    int dim() const;
};

/// Validated damping matrices paired with the operators they multiply.
std::vector<CouplingChannel> coupling_channels(const DecoherenceModel& model, const EnsemblePair& ensembles);

/// gamma = O D O^T; jump_k = sqrt(D_k) sum_a O_{ak} op_a, zero-rate directions dropped.
std::vector<SpinOperator> canonical_jumps(const DampingMatrix& gamma, const AxisOps& coupling_ops);

class Generator {
public:
    Generator(std::vector<SpinOperator> jump_ops, std::optional<SpinOperator> hamiltonian, Dims dims);

    const std::vector<SpinOperator>& jump_ops() const { return jump_ops_; }
    const std::optional<SpinOperator>& hamiltonian() const { return hamiltonian_; }
    const Dims& dims() const { return dims_; }
    int dim() const { return dim_; }

    /// -i[H, rho] + sum_k (A_k rho A_k^dag - {A_k^dag A_k, rho} / 2) for any square rho.
    Matrix apply(const Matrix& rho) const;
    /// Same as apply, assuming rho is Hermitian.
    Matrix apply_hermitian(const Matrix& rho) const;

    /// Upper bound on the generator's operator norm: 2||H|| + 2 sum_k ||A_k||^2.
    double norm_bound() const;
    /// 0.1 / (sum_k ||A_k||^2 + ||H||) with spectral norms.
    double default_step() const;

private:
    using Sparse = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;

    std::vector<SpinOperator> jump_ops_;
    std::optional<SpinOperator> hamiltonian_;
    Dims dims_;
    int dim_;
    double jump_norm_sq_ = 0.0;
    double ham_norm_ = 0.0;
    std::vector<Sparse> jumps_sparse_;
    std::vector<Sparse> jumps_adjoint_;
    Sparse drift_; // -iH - sum_k A_k^dag A_k / 2
    Sparse drift_adjoint_;
};

Generator build_generator(const DecoherenceModel& model, const EnsemblePair& ensembles);

Matrix apply_generator(const Generator& g, const Matrix& rho);
Matrix apply_generator(const Generator& g, const DensityMatrix& rho);

/// Frobenius norm of the generator applied to rho; zero certifies stationarity.
double stationary_residual(const Generator& g, const DensityMatrix& rho);

struct EvolveControl {
    enum class Mode { fixed, adaptive };
    Mode mode = Mode::fixed;
    /// Fixed step, or the initial step in adaptive mode; <= 0 selects Generator::default_step().
    double step = 0.0;
    /// Local error tolerance (max-entry) for adaptive step doubling.
    double tol = 1e-10;
    /// Record every `stride` accepted steps; the final time is always recorded.
    int stride = 1;
};

struct Sample {
    double t;
    DensityMatrix rho;
    double s_lin;
};

struct Trajectory {
    std::vector<Sample> samples;
    long accepted = 0;
    long rejected = 0;
};

class IntegratorAbort : public std::runtime_error {
public:
    IntegratorAbort(const std::string& what, double last_good_time)
        : std::runtime_error(what), last_good_time_(last_good_time)
    {
    }
    double last_good_time() const { return last_good_time_; }

private:
    double last_good_time_;
};

/// Classical RK4 on the master equation. Every accepted step is followed by
/// Hermitization and trace renormalization. Throws IntegratorAbort when the
/// state norm exceeds 10x its initial value or becomes non-finite.
Trajectory evolve(const Generator& g, const DensityMatrix& rho0, double t_final, const EvolveControl& control);

} // namespace spinbath
