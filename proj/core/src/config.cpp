#include "mflab/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "mflab/errors.hpp"

namespace mflab {

using nlohmann::json;

InitialVelocity parse_initial_velocity(const std::string& name)
{
    if (name == "zero")
        return InitialVelocity::zero;
    if (name == "linear_expansion")
        return InitialVelocity::linear_expansion;
    if (name == "rotation")
        return InitialVelocity::rotation;
    throw ConfigError("init.u0", "unknown initial velocity '" + name + "' (zero, linear_expansion, rotation)");
}

std::string to_string(InitialVelocity u0)
{
    switch (u0)
    {
    case InitialVelocity::zero:
        return "zero";
    case InitialVelocity::linear_expansion:
        return "linear_expansion";
    case InitialVelocity::rotation:
        return "rotation";
    }
    return "zero";
}

ReferenceKind parse_reference_kind(const std::string& name)
{
    if (name == "auto")
        return ReferenceKind::automatic;
    if (name == "exact")
        return ReferenceKind::exact;
    if (name == "grid")
        return ReferenceKind::grid;
    throw ConfigError("pde.reference", "expected auto, exact or grid, got '" + name + "'");
}

std::string to_string(ReferenceKind kind)
{
    switch (kind)
    {
    case ReferenceKind::automatic:
        return "auto";
    case ReferenceKind::exact:
        return "exact";
    case ReferenceKind::grid:
        return "grid";
    }
    return "auto";
}

ExactSolution DensitySpec::solution(const KernelSpec& spec) const
{
    switch (family)
    {
    case ExactFamily::expanding_ball:
        return ExactSolution::expanding_ball(spec, R0, center);
    case ExactFamily::barenblatt:
        return ExactSolution::barenblatt(spec, R0, center);
    case ExactFamily::radial_vortex_patch:
        return ExactSolution::radial_vortex_patch(spec, R0, profile_exponent, center);
    case ExactFamily::uniform_ball_static:
        return ExactSolution::uniform_ball_static(spec, R0, center);
    }
    throw ConfigError("init.family", "unsupported family");
}

// ---------------------------------------------------------------------------
// Flat text and JSON parsing

namespace {

std::string trim(const std::string& s)
{
    auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos)
        return "";
    auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::string strip_comment(const std::string& line)
{
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i)
    {
        if (line[i] == '"' && (i == 0 || line[i - 1] != '\\'))
            quoted = !quoted;
        else if (line[i] == '#' && !quoted)
            return line.substr(0, i);
    }
    return line;
}

json parse_value(const std::string& text)
{
    json v = json::parse(text, nullptr, false);
    if (!v.is_discarded())
        return v;
    if (text.find(',') != std::string::npos)
    {
        v = json::parse("[" + text + "]", nullptr, false);
        if (!v.is_discarded())
            return v;
    }
    return text;
}

// Typed access to the config tree that remembers which keys were read.
class TreeReader
{
  public:
    explicit TreeReader(const json& tree) : tree_(tree) {}

    const json* find(const std::string& path)
    {
        const json* node = &tree_;
        std::size_t start = 0;
        while (start <= path.size())
        {
            auto dot = path.find('.', start);
            std::string part = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
            if (!node->is_object())
                throw ConfigError(path, "parent key is not a table");
            auto it = node->find(part);
            if (it == node->end())
                return nullptr;
            node = &*it;
            if (dot == std::string::npos)
                break;
            start = dot + 1;
        }
        if (node->is_object())
            throw ConfigError(path, "expected a value, found a table");
        used_.insert(path);
        return node;
    }

    void number(const std::string& path, double& out)
    {
        if (auto* v = find(path))
        {
            if (!v->is_number())
                throw ConfigError(path, "expected a number");
            out = v->get<double>();
            if (!std::isfinite(out))
                throw ConfigError(path, "must be finite");
        }
    }

    void number(const std::string& path, std::optional<double>& out)
    {
        if (find(path))
        {
            double v = 0;
            number(path, v);
            out = v;
        }
    }

    void integer(const std::string& path, int& out)
    {
        if (auto* v = find(path))
        {
            if (!v->is_number_integer())
                throw ConfigError(path, "expected an integer");
            out = v->get<int>();
        }
    }

    void boolean(const std::string& path, bool& out)
    {
        if (auto* v = find(path))
        {
            if (!v->is_boolean())
                throw ConfigError(path, "expected true or false");
            out = v->get<bool>();
        }
    }

    void boolean(const std::string& path, std::optional<bool>& out)
    {
        if (find(path))
        {
            bool v = false;
            boolean(path, v);
            out = v;
        }
    }

    bool string(const std::string& path, std::string& out)
    {
        if (auto* v = find(path))
        {
            if (!v->is_string())
                throw ConfigError(path, "expected a name");
            out = v->get<std::string>();
            return true;
        }
        return false;
    }

    void numbers(const std::string& path, std::vector<double>& out)
    {
        if (auto* v = find(path))
        {
            if (v->is_number())
            {
                out = {v->get<double>()};
                return;
            }
            if (!v->is_array())
                throw ConfigError(path, "expected a list of numbers");
            out.clear();
            for (auto& e : *v)
            {
                if (!e.is_number())
                    throw ConfigError(path, "expected a list of numbers");
                out.push_back(e.get<double>());
            }
        }
    }

    template <class T>
    void counts(const std::string& path, std::vector<T>& out)
    {
        if (auto* v = find(path))
        {
            json list = v->is_array() ? *v : json::array({*v});
            out.clear();
            for (auto& e : list)
            {
                if (!e.is_number_integer() || e.get<long long>() < 0)
                    throw ConfigError(path, "expected non-negative integers");
                out.push_back(T(e.get<unsigned long long>()));
            }
        }
    }

    // Every leaf of the tree must have been read.
    void reject_unknown() const { check(tree_, ""); }

  private:
    void check(const json& node, const std::string& prefix) const
    {
        for (auto it = node.begin(); it != node.end(); ++it)
        {
            std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
            if (it->is_object())
                check(*it, path);
            else if (!used_.count(path))
                throw ConfigError(path, "unknown key");
        }
    }

    const json& tree_;
    std::set<std::string> used_;
};

template <class Parse>
auto parse_name(TreeReader& r, const std::string& path, Parse parse) -> std::optional<decltype(parse(""))>
{
    std::string name;
    if (!r.string(path, name))
        return std::nullopt;
    try
    {
        return parse(name);
    }
    catch (const ConfigError& e)
    {
        if (e.path() == path)
            throw;
        throw ConfigError(path, e.what());
    }
}

} // namespace

json parse_config_tree(const std::string& text)
{
    auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{')
    {
        try
        {
            json tree = json::parse(text, nullptr, true, true);
            if (!tree.is_object())
                throw ConfigError("", "top level must be a table");
            return tree;
        }
        catch (const json::parse_error& e)
        {
            throw ConfigError("", std::string("malformed JSON: ") + e.what());
        }
    }
    json tree = json::object();
    std::istringstream in(text);
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw))
    {
        ++line;
        std::string s = trim(strip_comment(raw));
        if (s.empty())
            continue;
        auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("", "line " + std::to_string(line) + ": expected 'key = value'");
        std::string key = trim(s.substr(0, eq));
        std::string value = trim(s.substr(eq + 1));
        if (key.empty() || key.front() == '.' || key.back() == '.' || key.find("..") != std::string::npos)
            throw ConfigError(key, "line " + std::to_string(line) + ": malformed key");
        if (value.empty())
            throw ConfigError(key, "line " + std::to_string(line) + ": missing value");
        json* node = &tree;
        std::size_t start = 0;
        while (true)
        {
            auto dot = key.find('.', start);
            std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
            if (!node->is_object())
                throw ConfigError(key, "line " + std::to_string(line) + ": a parent key already holds a value");
            if (dot == std::string::npos)
            {
                if (node->contains(part))
                    throw ConfigError(key, "line " + std::to_string(line) + ": key given twice");
                (*node)[part] = parse_value(value);
                break;
            }
            node = &(*node)[part];
            if (node->is_null())
                *node = json::object();
            start = dot + 1;
        }
    }
    return tree;
}

ExperimentConfig config_from_json(const json& tree)
{
    ExperimentConfig cfg;
    TreeReader r(tree);

    r.integer("kernel.d", cfg.kernel.d);
    if (auto* s = r.find("kernel.s"))
    {
        if (s->is_string() && s->get<std::string>() == "log")
            cfg.kernel.s.reset();
        else if (s->is_number())
            cfg.kernel.s = s->get<double>();
        else
            throw ConfigError("kernel.s", "expected a Riesz exponent or 'log'");
    }
    else
        cfg.kernel.s.reset();

    if (auto k = parse_name(r, "flow.kind", parse_flow_kind))
        cfg.flow.kind = *k;
    r.numbers("flow.J", cfg.flow.J);
    r.number("flow.mix_alpha", cfg.flow.mix_alpha);
    r.number("flow.mix_beta", cfg.flow.mix_beta);
    if (auto f = parse_name(r, "flow.forcing.kind", Forcing::parse_kind))
        cfg.flow.forcing.kind = f->kind;
    r.numbers("flow.forcing.drift", cfg.flow.forcing.drift);
    r.number("flow.forcing.lambda", cfg.flow.forcing.lambda);

    if (auto f = parse_name(r, "init.family", parse_exact_family))
        cfg.init.density.family = *f;
    r.number("init.R0", cfg.init.density.R0);
    r.number("init.profile_exponent", cfg.init.density.profile_exponent);
    r.numbers("init.center", cfg.init.density.center);
    if (auto m = parse_name(r, "init.sampling", parse_sampling_mode))
        cfg.init.sampling = *m;
    if (auto u = parse_name(r, "init.u0", parse_initial_velocity))
        cfg.init.u0 = *u;
    r.number("init.u0_rate", cfg.init.u0_rate);

    r.counts("N_list", cfg.N_list);
    r.counts("seeds", cfg.seeds);

    r.number("time.T", cfg.time.T);
    r.number("time.dt", cfg.time.integrator.dt);
    r.boolean("time.adaptive", cfg.time.integrator.adaptive);
    r.number("time.dt_floor", cfg.time.integrator.dt_floor);
    r.number("time.collision_fraction", cfg.time.integrator.collision_fraction);

    r.integer("pde.n", cfg.pde.n);
    r.number("pde.L", cfg.pde.L);
    r.number("pde.cfl", cfg.pde.cfl);
    if (auto s = parse_name(r, "pde.scheme", parse_transport_scheme))
        cfg.pde.scheme = *s;
    r.integer("pde.refine", cfg.pde.refine);
    if (auto k = parse_name(r, "pde.reference", parse_reference_kind))
        cfg.pde.reference = *k;

    r.number("diagnostics.every", cfg.diagnostics.every);
    r.boolean("diagnostics.truncated", cfg.diagnostics.truncated);
    r.boolean("diagnostics.bl", cfg.diagnostics.bl);
    r.boolean("diagnostics.kinetic", cfg.diagnostics.kinetic);
    r.boolean("diagnostics.snapshots", cfg.diagnostics.snapshots);

    cfg.gap.family = parse_name(r, "gap.family", parse_exact_family);
    r.number("gap.R0", cfg.gap.R0);
    r.number("gap.profile_exponent", cfg.gap.profile_exponent);
    if (r.find("gap.center"))
    {
        std::vector<double> c;
        r.numbers("gap.center", c);
        cfg.gap.center = c;
    }

    r.string("output.dir", cfg.output_dir);
    r.reject_unknown();
    cfg.validate();
    return cfg;
}

ExperimentConfig parse_config(const std::string& text)
{
    return config_from_json(parse_config_tree(text));
}

ExperimentConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("", "cannot open config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

// ---------------------------------------------------------------------------
// Derived settings and validation

KernelSpec ExperimentConfig::kernel_spec() const
{
    try
    {
        return kernel.s ? KernelSpec::riesz(kernel.d, *kernel.s) : KernelSpec::logarithmic(kernel.d);
    }
    catch (const RegimeError& e)
    {
        throw ConfigError(kernel.s ? "kernel.s" : "kernel.d", e.what());
    }
}

ExactSolution ExperimentConfig::initial_solution() const
{
    try
    {
        return init.density.solution(kernel_spec());
    }
    catch (const RegimeError& e)
    {
        throw ConfigError("init.family", e.what());
    }
}

ExactSolution ExperimentConfig::gap_solution() const
{
    DensitySpec second = init.density;
    if (gap.family)
        second.family = *gap.family;
    if (gap.R0)
        second.R0 = *gap.R0;
    if (gap.profile_exponent)
        second.profile_exponent = *gap.profile_exponent;
    if (gap.center)
        second.center = *gap.center;
    try
    {
        return second.solution(kernel_spec());
    }
    catch (const RegimeError& e)
    {
        throw ConfigError("gap.family", e.what());
    }
}

GridGeometry ExperimentConfig::grid() const
{
    return GridGeometry::box(kernel.d, pde.n, pde.L);
}

double ExperimentConfig::observation_every() const
{
    return diagnostics.every > 0 ? diagnostics.every : time.T / 10;
}

bool ExperimentConfig::kinetic_diagnostics() const
{
    return diagnostics.kinetic.value_or(flow.kind == FlowKind::newton);
}

namespace {

bool exact_reference_possible(const ExperimentConfig& cfg, const ExactSolution& sol)
{
    if (sol.solves(cfg.flow))
        return true;
    // Radial data: the J part of a mixed flow is tangential and divergence free,
    // so the mixed equation is the gradient one run at speed alpha.
    return cfg.flow.kind == FlowKind::mixed && cfg.flow.forcing.is_zero() && !sol.is_static();
}

bool use_exact(const ExperimentConfig& cfg, const ExactSolution& sol)
{
    switch (cfg.pde.reference)
    {
    case ReferenceKind::exact:
        return true;
    case ReferenceKind::grid:
        return false;
    case ReferenceKind::automatic:
        return exact_reference_possible(cfg, sol);
    }
    return false;
}

} // namespace

void ExperimentConfig::validate() const
{
    const KernelSpec spec = kernel_spec();
    flow.validate(kernel.d);
    if (flow.kind == FlowKind::mixed && flow.J.empty() && kernel.d < 2)
        throw ConfigError("flow.kind", "mixed flows need d >= 2");
    if (init.density.R0 <= 0)
        throw ConfigError("init.R0", "must be positive");
    if (!init.density.center.empty() && int(init.density.center.size()) != kernel.d)
        throw ConfigError("init.center", "expected " + std::to_string(kernel.d) + " components");
    if (init.density.profile_exponent < 0)
        throw ConfigError("init.profile_exponent", "must be non-negative");
    const ExactSolution mu0 = initial_solution();
    if (gap.center && !gap.center->empty() && int(gap.center->size()) != kernel.d)
        throw ConfigError("gap.center", "expected " + std::to_string(kernel.d) + " components");
    if (gap.R0 && *gap.R0 <= 0)
        throw ConfigError("gap.R0", "must be positive");
    gap_solution();
    if (flow.kind != FlowKind::newton && init.u0 != InitialVelocity::zero)
        throw ConfigError("init.u0", "initial velocities apply to newton flows only");
    if (N_list.empty())
        throw ConfigError("N_list", "must not be empty");
    for (auto N : N_list)
        if (N < 1)
            throw ConfigError("N_list", "particle counts must be positive");
    if (seeds.empty())
        throw ConfigError("seeds", "must not be empty");
    if (!(time.T > 0))
        throw ConfigError("time.T", "must be positive");
    time.integrator.validate();
    if (pde.n < 4)
        throw ConfigError("pde.n", "need at least 4 cells per axis");
    if (!(pde.L > 0))
        throw ConfigError("pde.L", "must be positive");
    if (!(pde.cfl > 0 && pde.cfl <= 1))
        throw ConfigError("pde.cfl", "must lie in (0, 1]");
    if (pde.scheme == TransportScheme::muscl && pde.cfl > 0.5)
        throw ConfigError("pde.cfl", "the muscl scheme needs cfl <= 0.5");
    if (pde.refine < 1)
        throw ConfigError("pde.refine", "must be at least 1");
    if (pde.reference == ReferenceKind::exact && !exact_reference_possible(*this, mu0))
        throw ConfigError("pde.reference", to_string(mu0.family()) + " does not solve the " + to_string(flow.kind)
                                               + " mean-field equation");
    if (!use_exact(*this, mu0) && kernel.d > 3)
        throw ConfigError("kernel.d", "grid references support d <= 3");
    if (diagnostics.every < 0)
        throw ConfigError("diagnostics.every", "must be non-negative");
    if (diagnostics.kinetic.value_or(false) && flow.kind != FlowKind::newton)
        throw ConfigError("diagnostics.kinetic", "the kinetic term needs a newton flow");
    (void)spec;
}

// ---------------------------------------------------------------------------
// Canonical form and hash

json canonical_json(const ExperimentConfig& cfg)
{
    auto family_of = [](const ExactSolution& s) { return to_string(s.family()); };
    const ExactSolution second = cfg.gap_solution();
    json forcing = {{"kind", to_string(cfg.flow.forcing.kind)},
                    {"drift", cfg.flow.forcing.drift},
                    {"lambda", cfg.flow.forcing.lambda}};
    json j;
    j["kernel"] = {{"d", cfg.kernel.d}};
    j["kernel"]["s"] = cfg.kernel.s ? json(*cfg.kernel.s) : json("log");
    j["flow"] = {{"kind", to_string(cfg.flow.kind)},
                 {"J", cfg.flow.J},
                 {"mix_alpha", cfg.flow.mix_alpha},
                 {"mix_beta", cfg.flow.mix_beta},
                 {"forcing", forcing}};
    j["init"] = {{"family", to_string(cfg.init.density.family)},
                 {"R0", cfg.init.density.R0},
                 {"profile_exponent", cfg.init.density.profile_exponent},
                 {"center", cfg.init.density.center},
                 {"sampling", to_string(cfg.init.sampling)},
                 {"u0", to_string(cfg.init.u0)},
                 {"u0_rate", cfg.init.u0_rate}};
    j["N_list"] = cfg.N_list;
    j["seeds"] = cfg.seeds;
    j["time"] = {{"T", cfg.time.T},
                 {"dt", cfg.time.integrator.dt},
                 {"adaptive", cfg.time.integrator.adaptive},
                 {"dt_floor", cfg.time.integrator.dt_floor},
                 {"collision_fraction", cfg.time.integrator.collision_fraction}};
    j["pde"] = {{"n", cfg.pde.n},
                {"L", cfg.pde.L},
                {"cfl", cfg.pde.cfl},
                {"scheme", to_string(cfg.pde.scheme)},
                {"refine", cfg.pde.refine},
                {"reference", to_string(cfg.pde.reference)}};
    j["diagnostics"] = {{"every", cfg.observation_every()},
                        {"truncated", cfg.diagnostics.truncated},
                        {"bl", cfg.diagnostics.bl},
                        {"kinetic", cfg.kinetic_diagnostics()},
                        {"snapshots", cfg.diagnostics.snapshots}};
    std::vector<double> center = cfg.gap.center.value_or(cfg.init.density.center);
    j["gap"] = {{"family", family_of(second)},
                {"R0", cfg.gap.R0.value_or(cfg.init.density.R0)},
                {"profile_exponent", cfg.gap.profile_exponent.value_or(cfg.init.density.profile_exponent)},
                {"center", center}};
    return j;
}

std::uint64_t fnv1a64(const std::string& bytes)
{
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes)
    {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string config_hash(const ExperimentConfig& cfg)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical_json(cfg).dump())));
    return buf;
}

// ---------------------------------------------------------------------------
// References and initial velocities

std::unique_ptr<Reference> make_reference(const ExperimentConfig& cfg)
{
    return make_reference(cfg, cfg.initial_solution());
}

std::unique_ptr<Reference> make_reference(const ExperimentConfig& cfg, const ExactSolution& mu0)
{
    const KernelSpec spec = cfg.kernel_spec();
    ClockMap clock = ClockMap::for_flow(cfg.flow);
    if (use_exact(cfg, mu0))
    {
        if (cfg.flow.kind == FlowKind::mixed)
            clock.time *= cfg.flow.mix_alpha;
        return std::make_unique<ExactReference>(mu0, clock);
    }
    const GridGeometry g = cfg.grid();
    MeasureGrid grid = mu0.rasterize(g, 0);
    if (cfg.flow.kind == FlowKind::newton)
    {
        EulerPoissonOptions opt;
        opt.refine = cfg.pde.refine;
        opt.cfl = cfg.pde.cfl;
        return std::make_unique<EulerPoissonReference>(std::move(grid), initial_velocity_grid(cfg, g), spec,
                                                       cfg.flow, clock, opt);
    }
    return std::make_unique<GridReference>(std::move(grid), spec, cfg.flow, clock, true, cfg.pde.cfl,
                                           cfg.pde.scheme);
}

std::vector<double> initial_velocity(const ExperimentConfig& cfg, std::span<const double> points)
{
    const int d = cfg.kernel.d;
    std::vector<double> v(points.size(), 0.0);
    if (cfg.init.u0 == InitialVelocity::zero)
        return v;
    const auto& c = cfg.init.density.center;
    const std::vector<double> J = cfg.flow.symplectic(d);
    const std::size_t n = points.size() / d;
    for (std::size_t i = 0; i < n; ++i)
    {
        double y[8] = {};
        for (int a = 0; a < d && a < 8; ++a)
            y[a] = points[i * d + a] - (c.empty() ? 0.0 : c[a]);
        for (int a = 0; a < d; ++a)
        {
            if (cfg.init.u0 == InitialVelocity::linear_expansion)
                v[i * d + a] = cfg.init.u0_rate * y[a];
            else
            {
                double s = 0;
                for (int b = 0; b < d; ++b)
                    s += J[a * d + b] * y[b];
                v[i * d + a] = cfg.init.u0_rate * s;
            }
        }
    }
    return v;
}

VelocityGrid initial_velocity_grid(const ExperimentConfig& cfg, const GridGeometry& g)
{
    VelocityGrid u(g);
    std::vector<double> centers(g.size() * g.d);
    for (std::size_t k = 0; k < g.size(); ++k)
        g.cell_center(k, {centers.data() + k * g.d, std::size_t(g.d)});
    u.values = initial_velocity(cfg, centers);
    return u;
}

} // namespace mflab
