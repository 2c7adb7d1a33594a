#include "spinbath/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <thread>

#include "spinbath/diagnostics.hpp"

namespace spinbath {

using nlohmann::json;

std::string format_cell(const Cell& cell)
{
    struct Visitor {
        std::string operator()(std::monostate) const { return ""; }
        std::string operator()(double v) const
        {
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", v == 0.0 ? 0.0 : v); // no "-0"
            return buf;
        }
        std::string operator()(long v) const { return std::to_string(v); }
        std::string operator()(const std::string& v) const { return v; }
    };
    return std::visit(Visitor{}, cell);
}

namespace {

std::string csv_escape(const std::string& text)
{
    if (text.find_first_of(",\"\n") == std::string::npos)
        return text;
    std::string out = "\"";
    for (char ch : text) {
        if (ch == '"')
            out += '"';
        out += ch;
    }
    return out + "\"";
}

json cell_json(const Cell& cell)
{
    if (std::holds_alternative<std::monostate>(cell))
        return nullptr;
    if (const auto* d = std::get_if<double>(&cell)) {
        if (!std::isfinite(*d))
            return format_cell(cell);
        return *d;
    }
    if (const auto* l = std::get_if<long>(&cell))
        return *l;
    return std::get<std::string>(cell);
}

json matrix_json(const Matrix& m)
{
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            row.push_back({m(r, c).real(), m(r, c).imag()});
        rows.push_back(std::move(row));
    }
    return rows;
}

std::optional<double> ntilde_of(const ResolvedState& state)
{
    if (state.spec)
        return state.spec->ntilde().value();
    return std::nullopt;
}

std::optional<double> entanglement_entropy(const ResolvedState& state, const EnsemblePair& pair)
{
    if (!pair.j2)
        return std::nullopt;
    return von_neumann_entropy(partial_trace(density_from_pure(state.psi, pair.dims()), 0));
}

Cell opt_cell(const std::optional<double>& v)
{
    if (v)
        return *v;
    return std::monostate{};
}

bool rates_agree(double a, double b)
{
    return std::abs(a - b) <= 1e-6 * std::max(std::abs(a), std::abs(b)) + 1e-12;
}

} // namespace

void write_table(std::ostream& out, const Table& table, const std::string& command, const ScenarioConfig& config,
                 const RunOptions& options)
{
    if (options.format == "json") {
        json doc;
        doc["meta"] = {
            {"tool", "spinbath"}, {"version", kToolVersion}, {"command", command},
            {"config_hash", config_hash(config)}, {"seed", options.seed},
        };
        for (const auto& [key, value] : table.meta)
            doc["meta"][key] = value;
        doc["columns"] = table.columns;
        json rows = json::array();
        for (const auto& row : table.rows) {
            json r = json::array();
            for (const auto& cell : row)
                r.push_back(cell_json(cell));
            rows.push_back(std::move(r));
        }
        doc["rows"] = std::move(rows);
        if (!table.snapshots.is_null())
            doc["snapshots"] = table.snapshots;
        out << doc.dump(2) << '\n';
        return;
    }

    out << "# spinbath " << kToolVersion << '\n';
    out << "# command " << command << '\n';
    out << "# config_hash " << config_hash(config) << '\n';
    out << "# seed " << options.seed << '\n';
    for (const auto& [key, value] : table.meta)
        out << "# " << key << ' ' << value << '\n';
    for (std::size_t i = 0; i < table.columns.size(); ++i)
        out << (i ? "," : "") << csv_escape(table.columns[i]);
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << csv_escape(format_cell(row[i]));
        out << '\n';
    }
}

CommandResult cmd_rate(const ScenarioConfig& config)
{
    validate_config(config);
    const EnsemblePair pair = resolve_ensembles(config);
    const DecoherenceModel model = resolve_model(config);
    const ResolvedState state = resolve_state(config);
    const RateReport report = rate_report(state.psi, model, pair, ntilde_of(state));

    CommandResult result;
    Table& t = result.table;
    t.columns = {"state", "numeric_rate", "analytic_rate", "estimate_rate"};
    std::vector<Cell> row{state.label, report.numeric_rate, report.analytic_rate, opt_cell(report.estimate_rate)};
    for (const auto& [key, value] : report.per_axis_contributions) {
        t.columns.push_back("contrib." + key);
        row.emplace_back(value);
    }
    t.rows.push_back(std::move(row));

    if (!rates_agree(report.numeric_rate, report.analytic_rate)) {
        result.exit_code = kExitSelfCheck;
        result.message = "self-check failed: numeric rate " + format_cell(report.numeric_rate)
                         + " disagrees with analytic rate " + format_cell(report.analytic_rate);
    }
    return result;
}

CommandResult cmd_simulate(const ScenarioConfig& config)
{
    validate_config(config);
    const EnsemblePair pair = resolve_ensembles(config);
    const Generator g = build_generator(resolve_model(config), pair);
    const ResolvedState state = resolve_state(config);
    const DensityMatrix rho0 = density_from_pure(state.psi, pair.dims());

    EvolveControl control;
    control.mode = config.evolution.mode == "adaptive" ? EvolveControl::Mode::adaptive : EvolveControl::Mode::fixed;
    control.step = config.evolution.step;
    control.tol = config.evolution.tol;
    control.stride = config.evolution.stride;

    CommandResult result;
    Trajectory traj;
    try {
        traj = evolve(g, rho0, config.evolution.t_final, control);
    } catch (const IntegratorAbort& e) {
        result.exit_code = kExitIntegrator;
        result.message = std::string(e.what()) + " (last good time " + format_cell(e.last_good_time()) + ")";
        return result;
    }

    Table& t = result.table;
    t.columns = {"t", "s_lin", "trace_dev", "min_eig", "fidelity_to_initial"};
    if (config.evolution.snapshots)
        t.snapshots = json::array();
    for (const Sample& s : traj.samples) {
        const double fidelity = state.psi.dot(s.rho.matrix() * state.psi).real();
        t.rows.push_back({s.t, s.s_lin, s.rho.trace_deviation(), s.rho.min_eigenvalue(), fidelity});
        if (config.evolution.snapshots)
            t.snapshots.push_back({{"t", s.t}, {"rho", matrix_json(s.rho.matrix())}});
    }
    t.meta.emplace_back("accepted_steps", std::to_string(traj.accepted));
    t.meta.emplace_back("rejected_steps", std::to_string(traj.rejected));
    return result;
}

CommandResult cmd_sweep(const ScenarioConfig& config, int threads)
{
    if (!config.sweep)
        throw ConfigError("sweep command needs a 'sweep' block");
    validate_config(config);
    const SweepConfig& sweep = *config.sweep;
    const std::size_t n = sweep.values.size();

    std::vector<std::vector<Cell>> rows(n);
    auto evaluate = [&](std::size_t i) {
        const double value = sweep.values[i];
        std::vector<Cell> row{static_cast<long>(i), value};
        try {
            const ScenarioConfig point = apply_sweep_value(config, sweep.parameter, value);
            const EnsemblePair pair = resolve_ensembles(point);
            const DecoherenceModel model = resolve_model(point);
            const ResolvedState state = resolve_state(point);
            const RateReport report = rate_report(state.psi, model, pair, ntilde_of(state));

            std::optional<double> coupled;
            if (point.state.kind == "coupled" && point.model.bath == "common" && point.model.lambda == 1.0
                && point.state.M == 0.0)
                coupled = coupled_state_rate(HalfInt::from_double(point.state.L), HalfInt::from_twice(0),
                                             model.axes, std::get<CommonBath>(model.bath).gamma);

            row.insert(row.end(), {report.numeric_rate, report.analytic_rate, opt_cell(report.estimate_rate),
                                   opt_cell(coupled), opt_cell(entanglement_entropy(state, pair)),
                                   pair.j2 ? Cell(static_cast<long>(schmidt_number(state.psi, pair.dims())))
                                           : Cell(std::monostate{}),
                                   std::monostate{}});
        } catch (const std::exception& e) {
            row.resize(2);
            row.insert(row.end(), 6, std::monostate{});
            row.emplace_back(std::string(e.what()));
        }
        rows[i] = std::move(row);
    };

    const std::size_t workers = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), 1, n);
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i)
            evaluate(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++)
                    evaluate(i);
            });
        for (auto& th : pool)
            th.join();
    }

    CommandResult result;
    result.table.columns = {"index",         "value",          "numeric_rate",         "analytic_rate", "estimate_rate",
                            "coupled_rate", "entanglement_entropy", "schmidt_number", "error"};
    result.table.meta.emplace_back("sweep_parameter", sweep.parameter);
    result.table.rows = std::move(rows);
    const bool any_ok = std::any_of(result.table.rows.begin(), result.table.rows.end(),
                                    [](const auto& row) { return std::holds_alternative<std::monostate>(row.back()); });
    if (!any_ok) {
        result.exit_code = kExitSweepFailed;
        result.message = "every sweep point failed";
    }
    return result;
}

CommandResult cmd_dfs(const ScenarioConfig& config)
{
    validate_config(config);
    const EnsemblePair pair = resolve_ensembles(config);
    const Generator g = build_generator(resolve_model(config), pair);

    std::vector<std::pair<std::string, Vector>> candidates;
    const std::string& kind = config.dfs.candidates;
    if (kind == "fock_basis") {
        for (int k1 = 0; k1 < pair.j1.dim(); ++k1) {
            const HalfInt m1 = pair.j1.m_at(k1);
            const Vector a = fock_state(pair.j1, m1);
            if (!pair.j2) {
                candidates.emplace_back("fock(" + m1.str() + ")", a);
                continue;
            }
            for (int k2 = 0; k2 < pair.j2->dim(); ++k2) {
                const HalfInt m2 = pair.j2->m_at(k2);
                candidates.emplace_back("fock(" + m1.str() + "," + m2.str() + ")",
                                        product_state(a, fock_state(*pair.j2, m2)));
            }
        }
    } else if (kind == "singlet") {
        if (!pair.j2 || pair.j1 != *pair.j2)
            throw ConfigError("singlet candidates need two equal ensembles");
        candidates.emplace_back("singlet",
                                entangled_state(make_entangled_spec(ProfileKind::singlet, pair.j1, *pair.j2)));
    } else if (kind == "coupled_basis") {
        if (!pair.j2)
            throw ConfigError("coupled_basis candidates need two ensembles");
        const HalfInt lo = abs(pair.j1.j() - pair.j2->j());
        for (HalfInt L = pair.j1.j() + pair.j2->j(); L >= lo; L = L - HalfInt::from_twice(2))
            for (HalfInt M = L; M >= -L; M = M - HalfInt::from_twice(2))
                candidates.emplace_back("coupled(" + L.str() + "," + M.str() + ")",
                                        coupled_basis_state(pair.j1, *pair.j2, CoupledLevel{L, M}));
    } else if (kind == "state") {
        const ResolvedState state = resolve_state(config);
        candidates.emplace_back(state.label, state.psi);
    } else {
        throw ConfigError("unknown DFS candidate kind '" + kind + "'");
    }

    CommandResult result;
    Table& t = result.table;
    t.columns = {"candidate", "residual", "purity_rate", "certified"};
    bool all = true;
    for (const auto& [label, psi] : candidates) {
        const DfsVerdict v = certify_state(g, psi);
        all = all && v.certified;
        t.rows.push_back({label, v.residual, v.purity_rate, std::string(v.certified ? "true" : "false")});
    }
    t.meta.emplace_back("threshold", format_cell(kDfsThreshold));
    t.meta.emplace_back("all_certified", all ? "true" : "false");
    return result;
}

CommandResult cmd_state(const ScenarioConfig& config)
{
    validate_config(config);
    const EnsemblePair pair = resolve_ensembles(config);
    const ResolvedState state = resolve_state(config);

    CommandResult result;
    Table& t = result.table;
    const int d2 = pair.j2 ? pair.j2->dim() : 1;
    t.columns = {"m1", "m2", "re", "im", "probability"};
    for (Eigen::Index i = 0; i < state.psi.size(); ++i) {
        const Complex amp = state.psi(i);
        if (amp == Complex(0.0, 0.0))
            continue;
        const int k1 = static_cast<int>(i) / d2;
        const int k2 = static_cast<int>(i) % d2;
        t.rows.push_back({pair.j1.m_at(k1).str(), pair.j2 ? Cell(pair.j2->m_at(k2).str()) : Cell(std::monostate{}),
                          amp.real(), amp.imag(), std::norm(amp)});
    }
    t.meta.emplace_back("state", state.label);
    if (pair.j2) {
        t.meta.emplace_back("schmidt_number", std::to_string(schmidt_number(state.psi, pair.dims())));
        t.meta.emplace_back("entanglement_entropy", format_cell(*entanglement_entropy(state, pair)));
    }
    if (state.spec) {
        t.meta.emplace_back("ntilde", state.spec->ntilde().str());
        t.meta.emplace_back("mincond_residual", format_cell(mincond_residual(state.spec->coeffs())));
        if (state.spec->j1() == state.spec->j2())
            t.meta.emplace_back("variance_Lx_approx", format_cell(variance_Lx_approx(*state.spec)));
    }
    return result;
}

CommandResult run_command(const std::string& name, const ScenarioConfig& config, const RunOptions& options)
{
    try {
        if (name == "rate") return cmd_rate(config);
        if (name == "simulate") return cmd_simulate(config);
        if (name == "sweep") return cmd_sweep(config, options.threads);
        if (name == "dfs") return cmd_dfs(config);
        if (name == "state") return cmd_state(config);
        return {kExitConfig, {}, "unknown command '" + name + "'"};
    } catch (const ConfigError& e) {
        return {kExitConfig, {}, std::string("config error: ") + e.what()};
    }
}

} // namespace spinbath
