#include "spinbath/scenario.hpp"

#include <cstdio>
#include <fstream>
#include <set>

namespace spinbath {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where)
{
    if (!obj.is_object())
        throw ConfigError("'" + where + "' must be an object");
    for (const auto& [key, value] : obj.items())
        if (!allowed.count(key))
            throw ConfigError("unknown key '" + key + "' in '" + where + "'");
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& where)
{
    if (!obj.contains(key))
        return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("bad value for '" + where + "." + key + "': " + e.what());
    }
}

Gamma3 read_gamma(const json& value, const std::string& where)
{
    if (!value.is_array() || value.size() != 3)
        throw ConfigError("'" + where + "' must be a 3x3 array");
    Gamma3 g{};
    for (std::size_t r = 0; r < 3; ++r) {
        if (!value[r].is_array() || value[r].size() != 3)
            throw ConfigError("'" + where + "' must be a 3x3 array");
        for (std::size_t c = 0; c < 3; ++c) {
            if (!value[r][c].is_number())
                throw ConfigError("'" + where + "' entries must be numbers");
            g[r][c] = value[r][c].get<double>();
        }
    }
    return g;
}

std::vector<std::array<double, 2>> read_coeffs(const json& value)
{
    if (!value.is_array())
        throw ConfigError("'state.coeffs' must be an array");
    std::vector<std::array<double, 2>> out;
    for (const auto& entry : value) {
        if (entry.is_number())
            out.push_back({entry.get<double>(), 0.0});
        else if (entry.is_array() && entry.size() == 2 && entry[0].is_number() && entry[1].is_number())
            out.push_back({entry[0].get<double>(), entry[1].get<double>()});
        else
            throw ConfigError("'state.coeffs' entries must be numbers or [re, im] pairs");
    }
    return out;
}

DampingMatrix to_eigen(const Gamma3& g)
{
    DampingMatrix m;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            m(r, c) = g[r][c];
    return m;
}

HalfInt half(double value, const char* what)
{
    try {
        return HalfInt::from_double(value);
    } catch (const std::invalid_argument&) {
        throw ConfigError(std::string(what) + " must be a half-integer");
    }
}

int axis_index(char ch)
{
    switch (ch) {
    case 'x': return 0;
    case 'y': return 1;
    case 'z': return 2;
    }
    return -1;
}

} // namespace

ScenarioConfig parse_config(const json& doc)
{
    reject_unknown(doc, {"model", "ensembles", "state", "evolution", "sweep", "dfs", "output"}, "config");
    ScenarioConfig cfg;

    if (doc.contains("model")) {
        const json& m = doc["model"];
        reject_unknown(m, {"bath", "axes", "gamma", "gamma2", "lambda", "scale", "field_z"}, "model");
        read(m, "bath", cfg.model.bath, "model");
        read(m, "axes", cfg.model.axes, "model");
        if (m.contains("gamma"))
            cfg.model.gamma = read_gamma(m["gamma"], "model.gamma");
        if (m.contains("gamma2"))
            cfg.model.gamma2 = read_gamma(m["gamma2"], "model.gamma2");
        read(m, "lambda", cfg.model.lambda, "model");
        read(m, "scale", cfg.model.scale, "model");
        read(m, "field_z", cfg.model.field_z, "model");
    }
    if (doc.contains("ensembles")) {
        const json& e = doc["ensembles"];
        reject_unknown(e, {"j1", "j2"}, "ensembles");
        read(e, "j1", cfg.ensembles.j1, "ensembles");
        if (e.contains("j2") && !e["j2"].is_null()) {
            double j2 = 0.0;
            read(e, "j2", j2, "ensembles");
            cfg.ensembles.j2 = j2;
        }
    }
    if (doc.contains("state")) {
        const json& s = doc["state"];
        reject_unknown(s, {"kind", "width", "coeffs", "m1", "m2", "L", "M"}, "state");
        read(s, "kind", cfg.state.kind, "state");
        read(s, "width", cfg.state.width, "state");
        if (s.contains("coeffs"))
            cfg.state.coeffs = read_coeffs(s["coeffs"]);
        read(s, "m1", cfg.state.m1, "state");
        read(s, "m2", cfg.state.m2, "state");
        read(s, "L", cfg.state.L, "state");
        read(s, "M", cfg.state.M, "state");
    }
    if (doc.contains("evolution")) {
        const json& v = doc["evolution"];
        reject_unknown(v, {"t_final", "mode", "step", "tol", "stride", "snapshots"}, "evolution");
        read(v, "t_final", cfg.evolution.t_final, "evolution");
        read(v, "mode", cfg.evolution.mode, "evolution");
        read(v, "step", cfg.evolution.step, "evolution");
        read(v, "tol", cfg.evolution.tol, "evolution");
        read(v, "stride", cfg.evolution.stride, "evolution");
        read(v, "snapshots", cfg.evolution.snapshots, "evolution");
    }
    if (doc.contains("sweep") && !doc["sweep"].is_null()) {
        const json& w = doc["sweep"];
        reject_unknown(w, {"parameter", "values"}, "sweep");
        SweepConfig sweep;
        read(w, "parameter", sweep.parameter, "sweep");
        read(w, "values", sweep.values, "sweep");
        cfg.sweep = sweep;
    }
    if (doc.contains("dfs")) {
        const json& d = doc["dfs"];
        reject_unknown(d, {"candidates"}, "dfs");
        read(d, "candidates", cfg.dfs.candidates, "dfs");
    }
    if (doc.contains("output")) {
        const json& o = doc["output"];
        reject_unknown(o, {"path", "format"}, "output");
        read(o, "path", cfg.output.path, "output");
        read(o, "format", cfg.output.format, "output");
    }
    return cfg;
}

ScenarioConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file '" + path + "'");
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ConfigError("config is not valid JSON: " + std::string(e.what()));
    }
    return parse_config(doc);
}

json to_json(const ScenarioConfig& cfg)
{
    json doc;
    doc["model"] = {
        {"bath", cfg.model.bath},     {"axes", cfg.model.axes},   {"gamma", cfg.model.gamma},
        {"gamma2", cfg.model.gamma2}, {"lambda", cfg.model.lambda}, {"scale", cfg.model.scale},
        {"field_z", cfg.model.field_z},
    };
    doc["ensembles"] = {{"j1", cfg.ensembles.j1}};
    if (cfg.ensembles.j2)
        doc["ensembles"]["j2"] = *cfg.ensembles.j2;
    doc["state"] = {
        {"kind", cfg.state.kind}, {"width", cfg.state.width}, {"coeffs", cfg.state.coeffs}, {"m1", cfg.state.m1},
        {"m2", cfg.state.m2},     {"L", cfg.state.L},         {"M", cfg.state.M},
    };
    doc["evolution"] = {
        {"t_final", cfg.evolution.t_final}, {"mode", cfg.evolution.mode},     {"step", cfg.evolution.step},
        {"tol", cfg.evolution.tol},         {"stride", cfg.evolution.stride}, {"snapshots", cfg.evolution.snapshots},
    };
    if (cfg.sweep)
        doc["sweep"] = {{"parameter", cfg.sweep->parameter}, {"values", cfg.sweep->values}};
    doc["dfs"] = {{"candidates", cfg.dfs.candidates}};
    doc["output"] = {{"path", cfg.output.path}, {"format", cfg.output.format}};
    return doc;
}

std::string config_hash(const ScenarioConfig& config)
{
    const std::string text = to_json(config).dump();
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

EnsemblePair resolve_ensembles(const ScenarioConfig& config)
{
    try {
        EnsemblePair pair{SpinQuantum::from_double(config.ensembles.j1), std::nullopt};
        if (config.ensembles.j2)
            pair.j2 = SpinQuantum::from_double(*config.ensembles.j2);
        return pair;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("ensembles: ") + e.what());
    }
}

DecoherenceModel resolve_model(const ScenarioConfig& config)
{
    const ModelConfig& m = config.model;
    DecoherenceModel model;
    try {
        model.axes = AxisSet::parse(m.axes);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("model.axes: ") + e.what());
    }

    if (m.bath == "independent") {
        model.bath = IndependentBath{to_eigen(m.gamma), to_eigen(m.gamma2)};
    } else if (m.bath == "common") {
        if (!(m.lambda >= 0.0 && m.lambda <= 2.0))
            throw ConfigError("model.lambda must lie in [0, 2]");
        CouplingScale scale;
        if (m.scale == "composite")
            scale = CouplingScale::composite;
        else if (m.scale == "total_spin")
            scale = CouplingScale::total_spin;
        else
            throw ConfigError("model.scale must be 'composite' or 'total_spin'");
        model.bath = CommonBath{to_eigen(m.gamma), m.lambda, scale};
    } else if (m.bath == "single") {
        model.bath = SingleBath{to_eigen(m.gamma)};
    } else {
        throw ConfigError("model.bath must be 'independent', 'common' or 'single'");
    }

    if (!m.field_z.empty()) {
        const EnsemblePair pair = resolve_ensembles(config);
        const std::size_t expected = pair.j2 ? 2 : 1;
        if (m.field_z.size() != expected)
            throw ConfigError("model.field_z needs one entry per ensemble");
        if (pair.j2) {
            const AxisOps first = embedded_ops(pair.j1, *pair.j2, 0);
            const AxisOps second = embedded_ops(pair.j1, *pair.j2, 1);
            model.hamiltonian = m.field_z[0] * first[2].matrix() + m.field_z[1] * second[2].matrix();
        } else {
            model.hamiltonian = m.field_z[0] * angular_momentum_ops(pair.j1).jz.matrix();
        }
    }
    return model;
}

ResolvedState resolve_state(const ScenarioConfig& config)
{
    const EnsemblePair pair = resolve_ensembles(config);
    const StateConfig& s = config.state;
    try {
        if (s.kind == "fock") {
            const HalfInt m1 = half(s.m1, "state.m1");
            Vector psi = fock_state(pair.j1, m1);
            std::string label = "fock(" + m1.str();
            if (pair.j2) {
                const HalfInt m2 = half(s.m2, "state.m2");
                psi = product_state(psi, fock_state(*pair.j2, m2));
                label += "," + m2.str();
            }
            return {psi, std::nullopt, label + ")"};
        }
        if (s.kind == "coupled") {
            if (!pair.j2)
                throw ConfigError("coupled states need two ensembles");
            const CoupledLevel level{half(s.L, "state.L"), half(s.M, "state.M")};
            return {coupled_basis_state(pair.j1, *pair.j2, level), std::nullopt,
                    "coupled(" + level.L.str() + "," + level.M.str() + ")"};
        }
        const auto kind = parse_profile_kind(s.kind);
        if (!kind)
            throw ConfigError("unknown state kind '" + s.kind + "'");
        Vector custom(static_cast<Eigen::Index>(s.coeffs.size()));
        for (std::size_t i = 0; i < s.coeffs.size(); ++i)
            custom(static_cast<Eigen::Index>(i)) = Complex(s.coeffs[i][0], s.coeffs[i][1]);
        if (!pair.j2) {
            // One ensemble: custom coefficients are the amplitudes of |j, m>, descending m.
            if (*kind != ProfileKind::custom)
                throw ConfigError("entangled states need two ensembles");
            return {coefficient_profile(ProfileKind::custom, pair.j1.j(), s.width, custom), std::nullopt, "custom"};
        }
        EntangledStateSpec spec = make_entangled_spec(*kind, pair.j1, *pair.j2, s.width, custom);
        Vector psi = entangled_state(spec);
        return {psi, std::move(spec), s.kind};
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("state: ") + e.what());
    }
}

void validate_config(const ScenarioConfig& config)
{
    const EnsemblePair pair = resolve_ensembles(config);
    const DecoherenceModel model = resolve_model(config);
    try {
        coupling_channels(model, pair);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("model: ") + e.what());
    }
    resolve_state(config);

    const EvolutionConfig& ev = config.evolution;
    if (ev.mode != "fixed" && ev.mode != "adaptive")
        throw ConfigError("evolution.mode must be 'fixed' or 'adaptive'");
    if (!(ev.t_final >= 0.0) || ev.step < 0.0 || !(ev.tol > 0.0) || ev.stride < 1)
        throw ConfigError("evolution parameters out of range");
    if (config.output.format != "csv" && config.output.format != "json")
        throw ConfigError("output.format must be 'csv' or 'json'");

    if (config.sweep) {
        if (config.sweep->values.empty())
            throw ConfigError("sweep.values must not be empty");
        // Surface bad parameter names and illegal values before any work starts.
        for (double v : config.sweep->values)
            apply_sweep_value(config, config.sweep->parameter, v);
    }
}

ScenarioConfig apply_sweep_value(const ScenarioConfig& config, const std::string& parameter, double value)
{
    ScenarioConfig out = config;
    out.sweep.reset();
    if (parameter == "lambda") {
        if (config.model.bath != "common")
            throw ConfigError("lambda sweeps need a common-bath model");
        if (!(value >= 0.0 && value <= 2.0))
            throw ConfigError("sweep value " + std::to_string(value) + " outside lambda range [0, 2]");
        out.model.lambda = value;
    } else if (parameter == "Ntilde") {
        if (!config.ensembles.j2)
            throw ConfigError("Ntilde sweeps need two ensembles");
        half(value, "sweep Ntilde value");
        if (value < 0.0)
            throw ConfigError("Ntilde must be non-negative");
        out.ensembles.j1 = value;
        out.ensembles.j2 = value;
    } else if (parameter == "L") {
        if (config.state.kind != "coupled")
            throw ConfigError("L sweeps need a coupled state");
        half(value, "sweep L value");
        out.state.L = value;
    } else if (parameter.rfind("gamma.", 0) == 0 || parameter.rfind("gamma2.", 0) == 0) {
        const bool second = parameter[5] == '2';
        const std::string pair = parameter.substr(second ? 7 : 6);
        if (pair.size() != 2 || axis_index(pair[0]) < 0 || axis_index(pair[1]) < 0)
            throw ConfigError("bad damping sweep parameter '" + parameter + "'");
        if (second && config.model.bath != "independent")
            throw ConfigError("gamma2 sweeps need an independent-bath model");
        Gamma3& g = second ? out.model.gamma2 : out.model.gamma;
        g[axis_index(pair[0])][axis_index(pair[1])] = value;
        g[axis_index(pair[1])][axis_index(pair[0])] = value;
    } else {
        throw ConfigError("unknown sweep parameter '" + parameter + "'");
    }
    return out;
}

} // namespace spinbath
