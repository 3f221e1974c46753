#include "vemstokes/experiment.hpp"

#include "vemstokes/error.hpp"

#include <nlohmann/json.hpp>
#include <toml++/toml.hpp>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <set>
#include <sstream>

namespace vemstokes {

namespace {

const std::set<std::string> known_keys = {
    "title",      "family",       "domain",      "bc",        "n",          "k",        "m",
    "seed",       "stab_scale",   "strategy",    "shift",     "tol_one",    "lambda_cap", "residual_tol",
    "solver_seed", "reference",   "output_dir",  "threads",   "max_basis",  "max_restarts",
};

std::string where(const std::string& source, const toml::node& node, const std::string& key)
{
    const auto& s = node.source().begin;
    return source + ":" + std::to_string(s.line) + ": '" + key + "'";
}

std::string string_value(const toml::table& t, const std::string& key, const std::string& source)
{
    const toml::node* node = t.get(key);
    if (!node->is_string()) throw ConfigError(where(source, *node, key) + " must be a string");
    return std::string(*node->value<std::string>());
}

long long integer_value(const toml::table& t, const std::string& key, const std::string& source)
{
    const toml::node* node = t.get(key);
    if (!node->is_integer()) throw ConfigError(where(source, *node, key) + " must be an integer");
    return *node->value<long long>();
}

double float_value(const toml::table& t, const std::string& key, const std::string& source)
{
    const toml::node* node = t.get(key);
    if (!node->is_number()) throw ConfigError(where(source, *node, key) + " must be a number");
    return *node->value<double>();
}

template <class T>
std::vector<T> array_value(const toml::table& t, const std::string& key, const std::string& source)
{
    const toml::node* node = t.get(key);
    const toml::array* arr = node->as_array();
    if (!arr) throw ConfigError(where(source, *node, key) + " must be an array");
    std::vector<T> out;
    for (const toml::node& item : *arr) {
        if constexpr (std::is_integral_v<T>) {
            if (!item.is_integer()) throw ConfigError(where(source, item, key) + " entries must be integers");
            out.push_back(static_cast<T>(*item.value<long long>()));
        } else {
            if (!item.is_number()) throw ConfigError(where(source, item, key) + " entries must be numbers");
            out.push_back(*item.value<double>());
        }
    }
    return out;
}

template <class F>
auto rethrow_with(const std::string& context, F&& f)
{
    try {
        return f();
    } catch (const Error& e) {
        throw ConfigError(context + ": " + e.what());
    }
}

} // namespace

void ExperimentConfig::validate() const
{
    if (n.empty()) throw ConfigError("no mesh levels given");
    std::set<int> seen;
    for (int v : n) {
        if (v < 2) throw ConfigError("mesh level N=" + std::to_string(v) + " must be >= 2");
        if (!seen.insert(v).second) throw ConfigError("mesh level N=" + std::to_string(v) + " repeated");
    }
    if (domain == DomainTag::Custom) throw ConfigError("experiments need a predefined domain");
    if (threads < 0) throw ConfigError("threads must be >= 0");
    params.validate();
    solver.validate();
}

ExperimentConfig parse_config(const std::string& text, const std::string& source)
{
    toml::table t;
    try {
        t = toml::parse(text, source);
    } catch (const toml::parse_error& e) {
        throw ConfigError(source + ":" + std::to_string(e.source().begin.line) + ": " +
                          std::string(e.description()));
    }
    for (const auto& [key, node] : t) {
        const std::string k(key.str());
        if (!known_keys.contains(k)) throw ConfigError(where(source, node, k) + " is not a known key");
    }
    for (const char* key : {"title", "family", "domain", "bc", "n"})
        if (!t.contains(key)) throw ConfigError(source + ": missing required key '" + key + "'");

    ExperimentConfig c;
    c.title = string_value(t, "title", source);
    c.family = rethrow_with(source, [&] { return parse_family(string_value(t, "family", source)); });
    c.domain = rethrow_with(source, [&] { return parse_domain(string_value(t, "domain", source)); });
    c.bc_mode = rethrow_with(source, [&] { return parse_bc_mode(string_value(t, "bc", source)); });
    c.n = array_value<int>(t, "n", source);
    if (t.contains("k")) c.params.k = static_cast<int>(integer_value(t, "k", source));
    if (t.contains("stab_scale")) c.params.stab_scale = float_value(t, "stab_scale", source);
    if (t.contains("m")) c.solver.m = static_cast<int>(integer_value(t, "m", source));
    if (t.contains("seed")) c.mesh_seed = static_cast<std::uint64_t>(integer_value(t, "seed", source));
    if (t.contains("strategy"))
        c.solver.strategy = rethrow_with(source, [&] { return parse_strategy(string_value(t, "strategy", source)); });
    if (t.contains("shift")) c.solver.shift = float_value(t, "shift", source);
    if (t.contains("tol_one")) c.solver.tol_one = float_value(t, "tol_one", source);
    if (t.contains("lambda_cap")) c.solver.lambda_cap = float_value(t, "lambda_cap", source);
    if (t.contains("residual_tol")) c.solver.residual_tol = float_value(t, "residual_tol", source);
    if (t.contains("solver_seed"))
        c.solver.seed = static_cast<std::uint64_t>(integer_value(t, "solver_seed", source));
    if (t.contains("max_basis")) c.solver.max_basis = static_cast<int>(integer_value(t, "max_basis", source));
    if (t.contains("max_restarts"))
        c.solver.max_restarts = static_cast<int>(integer_value(t, "max_restarts", source));
    if (t.contains("reference")) c.reference = array_value<double>(t, "reference", source);
    if (t.contains("output_dir")) c.output_dir = string_value(t, "output_dir", source);
    if (t.contains("threads")) c.threads = static_cast<int>(integer_value(t, "threads", source));
    rethrow_with(source, [&] {
        c.validate();
        return 0;
    });
    return c;
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

RunResult solve_mesh(const PolygonalMesh& mesh, const VemParams& params, BcMode bc_mode,
                     const SolveOptions& options, int threads)
{
    const auto start = std::chrono::steady_clock::now();
    RunResult r;
    r.quality = validate_mesh(mesh);
    const GlobalSystem sys = assemble_system(mesh, params, bc_mode, threads);
    r.num_dofs = sys.n_free;
    r.spectrum = solve_spectrum(sys, options);
    r.check = verify_residuals(sys, r.spectrum, options.residual_tol);
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

RunResult run_level(const ExperimentConfig& config, int n)
{
    GenerateOptions g;
    g.family = config.family;
    g.domain = config.domain;
    g.n = n;
    g.seed = config.mesh_seed;
    const PolygonalMesh mesh = generate_mesh(g);
    RunResult r = solve_mesh(mesh, config.params, config.bc_mode, config.solver, config.threads);
    r.n = n;
    return r;
}

TableResult run_table(const ExperimentConfig& config)
{
    config.validate();
    if (config.n.size() < 3) throw ConfigError("≥ 3 mesh levels required for fitting");
    TableResult out;
    TableInput input;
    input.title = config.title;
    input.rows = config.solver.m;
    input.reference = config.reference;
    for (int n : config.n) {
        RunResult r;
        try {
            r = run_level(config, n);
        } catch (const Error& e) {
            throw Error(e.kind(), "level N=" + std::to_string(n) + ": " + e.what());
        }
        if (!r.check.ok())
            throw SolverError("level N=" + std::to_string(n) + ": " + std::to_string(r.check.failed.size()) +
                              " eigenpairs fail the residual check");
        input.levels.push_back({n, r.quality.h, r.spectrum.eigenvalues});
        out.levels.push_back(std::move(r));
    }
    out.table = make_table(input);
    return out;
}

std::string table_to_json(const ExperimentConfig& config, const TableResult& result)
{
    nlohmann::ordered_json j;
    j["title"] = config.title;
    j["family"] = to_string(config.family);
    j["domain"] = to_string(config.domain);
    j["bc"] = to_string(config.bc_mode);
    j["k"] = config.params.k;
    j["m"] = config.solver.m;
    j["seed"] = config.mesh_seed;
    j["strategy"] = to_string(config.solver.strategy);
    j["shift"] = config.solver.shift;
    nlohmann::ordered_json levels = nlohmann::ordered_json::array();
    for (const auto& r : result.levels) {
        nlohmann::ordered_json l;
        l["n"] = r.n;
        l["h"] = r.quality.h;
        l["cells"] = r.quality.num_cells;
        l["dofs"] = r.num_dofs;
        l["eigenvalues"] = r.spectrum.eigenvalues;
        l["residuals"] = r.check.residuals;
        l["strategy"] = to_string(r.spectrum.strategy);
        levels.push_back(std::move(l));
    }
    j["levels"] = std::move(levels);
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < result.table.rows.size(); ++i) {
        const auto& row = result.table.rows[i];
        nlohmann::ordered_json r;
        r["index"] = i + 1;
        r["order"] = row.fit.order_defined ? nlohmann::ordered_json(row.fit.order) : nlohmann::ordered_json();
        r["extrapolated"] = row.fit.extrapolated;
        r["fit_residual"] = row.fit.residual;
        if (i < config.reference.size()) r["reference"] = config.reference[i];
        rows.push_back(std::move(r));
    }
    j["fits"] = std::move(rows);
    return j.dump(2) + "\n";
}

} // namespace vemstokes
