#include "pmlab/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "pmlab/exponents.hpp"

namespace pmlab {

ConfigError::ConfigError(const std::string& origin, int line, const std::string& key, const std::string& message)
    : std::runtime_error(origin + ":" + std::to_string(line) + ": " + (key.empty() ? "" : "key '" + key + "': ") + message),
      line_(line),
      key_(key)
{
}

std::string to_string(OracleKind k)
{
    switch (k) {
    case OracleKind::None: return "none";
    case OracleKind::Heat: return "heat";
    case OracleKind::Barenblatt: return "barenblatt";
    }
    return "?";
}

std::vector<EstimateRequest> default_estimates()
{
    return {
        {"Estimate01", {}},
        {"Estimate02", {{"A", 1.0}, {"xi", 2.0}, {"q", 2.0}}},
        {"Estimate03", {{"q", 1.5}, {"alpha", 1.0}}},
        {"Estimate04", {{"alpha", 1.0}}},
        {"E_V", {{"alpha", 1.5}}},
        {"interpolation", {{"alpha", 1.5}}},
        {"parabolic_embedding", {{"p", 1.5}, {"q", 1.0}}},
    };
}

namespace {

const std::map<std::string, std::set<std::string>>& estimate_keys()
{
    static const std::map<std::string, std::set<std::string>> keys{
        {"Estimate01", {}},
        {"Estimate02", {"A", "xi", "q"}},
        {"Estimate03", {"q", "alpha"}},
        {"Estimate04", {"alpha"}},
        {"E_V", {"alpha"}},
        {"interpolation", {"alpha", "r1", "r2"}},
        {"parabolic_embedding", {"p", "q"}},
    };
    return keys;
}

// A node together with its key path, for diagnostics.
class Reader {
public:
    Reader(YAML::Node node, std::string path, const std::string& origin) : node_(std::move(node)), path_(std::move(path)), origin_(&origin) {}

    [[noreturn]] void fail(const std::string& message) const
    {
        const int line = node_.Mark().is_null() ? 0 : node_.Mark().line + 1;
        throw ConfigError(*origin_, line, path_, message);
    }

    const YAML::Node& node() const { return node_; }
    const std::string& path() const { return path_; }
    bool has(const std::string& key) const { return node_.IsMap() && node_[key]; }

    Reader child(const std::string& key) const
    {
        if (!has(key)) fail("missing key '" + key + "'");
        return Reader(node_[key], join(key), *origin_);
    }

    Reader item(std::size_t k) const { return Reader(node_[k], path_ + "[" + std::to_string(k) + "]", *origin_); }

    void require_map() const
    {
        if (!node_.IsMap()) fail("expected a mapping");
    }

    void require_sequence() const
    {
        if (!node_.IsSequence()) fail("expected a list");
    }

    void allow_keys(std::initializer_list<const char*> keys) const
    {
        require_map();
        for (const auto& kv : node_) {
            const std::string k = kv.first.as<std::string>();
            if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; }))
                Reader(kv.first, join(k), *origin_).fail("unknown key");
        }
    }

    std::string str() const
    {
        if (!node_.IsScalar()) fail("expected a scalar");
        return node_.as<std::string>();
    }

    double real() const
    {
        const std::string s = str();
        if (s == "inf" || s == "infinity" || s == ".inf") return kInfinity;
        try {
            std::size_t used = 0;
            const double v = std::stod(s, &used);
            if (used != s.size()) fail("expected a number, got '" + s + "'");
            return v;
        }
        catch (const std::logic_error&) {
            fail("expected a number, got '" + s + "'");
        }
    }

    int integer() const
    {
        const double v = real();
        if (v != static_cast<double>(static_cast<int>(v))) fail("expected an integer");
        return static_cast<int>(v);
    }

    bool boolean() const
    {
        const std::string s = str();
        if (s == "true" || s == "yes") return true;
        if (s == "false" || s == "no") return false;
        fail("expected true or false");
    }

    std::vector<double> reals() const
    {
        require_sequence();
        std::vector<double> out;
        for (std::size_t k = 0; k < node_.size(); ++k) out.push_back(item(k).real());
        return out;
    }

    double real_or(const std::string& key, double fallback) const { return has(key) ? child(key).real() : fallback; }

private:
    std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    YAML::Node node_;
    std::string path_;
    const std::string* origin_;
};

Point read_point(const Reader& r, int dim)
{
    const auto v = r.reals();
    if (static_cast<int>(v.size()) != dim) r.fail("expected " + std::to_string(dim) + " coordinates");
    Point p{};
    for (int a = 0; a < dim; ++a) p[static_cast<std::size_t>(a)] = v[static_cast<std::size_t>(a)];
    return p;
}

Point box_center(const DomainSpec& d)
{
    Point c{};
    for (int a = 0; a < d.dim; ++a) c[static_cast<std::size_t>(a)] = 0.5 * d.length;
    return c;
}

DomainSpec read_domain(const Reader& r)
{
    r.allow_keys({"dim", "length", "boundary"});
    DomainSpec d;
    if (r.has("dim")) d.dim = r.child("dim").integer();
    if (d.dim < 1 || d.dim > 3) r.child("dim").fail("dim must be 1, 2 or 3");
    d.length = r.real_or("length", 1.0);
    if (!(d.length > 0.0)) r.child("length").fail("length must be positive");
    if (r.has("boundary")) {
        try {
            d.boundary = boundary_from_string(r.child("boundary").str());
        }
        catch (const std::invalid_argument& e) {
            r.child("boundary").fail(e.what());
        }
    }
    return d;
}

SolverConfig read_solver(const Reader& r)
{
    r.allow_keys({"m", "epsilon", "cfl_safety", "t_end", "max_dt", "max_steps", "max_stored_slices"});
    SolverConfig c;
    c.m = r.child("m").real();
    c.epsilon = r.real_or("epsilon", 0.0);
    c.cfl_safety = r.real_or("cfl_safety", c.cfl_safety);
    c.t_end = r.child("t_end").real();
    c.max_dt = r.real_or("max_dt", 0.0);
    if (r.has("max_steps")) c.max_steps = static_cast<std::size_t>(r.child("max_steps").integer());
    if (r.has("max_stored_slices")) c.max_stored_slices = static_cast<std::size_t>(r.child("max_stored_slices").integer());
    if (!(c.m > 0.0)) r.child("m").fail("m must be positive");
    if (!(c.epsilon >= 0.0)) r.child("epsilon").fail("epsilon must be >= 0");
    if (!(c.t_end > 0.0)) r.child("t_end").fail("t_end must be positive");
    if (!(c.cfl_safety > 0.0 && c.cfl_safety <= 1.0)) r.child("cfl_safety").fail("cfl_safety must lie in (0, 1]");
    if (c.max_stored_slices < 2) r.child("max_stored_slices").fail("need at least 2 stored slices");
    try {
        c.validate();
    }
    catch (const SolverError& e) {
        r.fail(e.what());
    }
    return c;
}

DensityKind density_kind(const Reader& r)
{
    const std::string s = r.str();
    if (s == "constant") return DensityKind::Constant;
    if (s == "sine_bump") return DensityKind::SineBump;
    r.fail("unknown density preset '" + s + "'");
}

MeasureSpec read_measure(const Reader& r, const DomainSpec& dom)
{
    r.allow_keys({"atoms", "initial_atoms", "density"});
    MeasureSpec m;
    if (r.has("atoms")) {
        const Reader list = r.child("atoms");
        list.require_sequence();
        for (std::size_t k = 0; k < list.node().size(); ++k) {
            const Reader a = list.item(k);
            const auto v = a.reals();
            if (static_cast<int>(v.size()) != dom.dim + 2) a.fail("an atom is [x..., t, mass]");
            Atom atom;
            for (int i = 0; i < dom.dim; ++i) atom.x[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>(i)];
            atom.t = v[static_cast<std::size_t>(dom.dim)];
            atom.mass = v[static_cast<std::size_t>(dom.dim) + 1];
            m.atoms.push_back(atom);
        }
    }
    if (r.has("initial_atoms")) {
        const Reader list = r.child("initial_atoms");
        list.require_sequence();
        for (std::size_t k = 0; k < list.node().size(); ++k) {
            const Reader a = list.item(k);
            const auto v = a.reals();
            if (static_cast<int>(v.size()) != dom.dim + 1) a.fail("an initial atom is [x..., mass]");
            InitialAtom atom;
            for (int i = 0; i < dom.dim; ++i) atom.x[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>(i)];
            atom.mass = v[static_cast<std::size_t>(dom.dim)];
            m.initial_atoms.push_back(atom);
        }
    }
    if (r.has("density")) {
        const Reader d = r.child("density");
        d.allow_keys({"preset", "amplitude", "t_on", "t_off"});
        DensityPreset p;
        p.kind = density_kind(d.child("preset"));
        p.amplitude = d.child("amplitude").real();
        p.t_on = d.real_or("t_on", 0.0);
        p.t_off = d.real_or("t_off", p.t_off);
        m.density = p;
    }
    return m;
}

DriftSpec read_drift(const Reader& r, const DomainSpec& dom, std::string& file)
{
    r.allow_keys({"preset", "amplitude", "vector", "center", "gamma", "radius", "t_center", "t_width", "file",
                  "divergence_free", "q1", "q2"});
    DriftSpec d;
    try {
        d.preset = drift_preset_from_string(r.child("preset").str());
    }
    catch (const std::invalid_argument& e) {
        r.child("preset").fail(e.what());
    }
    d.amplitude = r.real_or("amplitude", d.preset == DriftPreset::Zero ? 0.0 : 1.0);
    if (r.has("vector")) d.vector = read_point(r.child("vector"), dom.dim);
    d.center = r.has("center") ? read_point(r.child("center"), dom.dim) : box_center(dom);
    d.gamma = r.real_or("gamma", d.gamma);
    d.radius = r.real_or("radius", d.radius);
    d.t_center = r.real_or("t_center", d.t_center);
    d.t_width = r.real_or("t_width", d.t_width);
    if (r.has("divergence_free")) d.declared_divergence_free = r.child("divergence_free").boolean();
    if (d.preset == DriftPreset::Sampled) file = r.child("file").str();
    const double q1 = r.real_or("q1", kInfinity);
    const double q2 = r.real_or("q2", kInfinity);
    try {
        d.exponents = ExponentPair(q1, q2);
    }
    catch (const std::invalid_argument& e) {
        r.fail(e.what());
    }
    if ((d.preset == DriftPreset::Shear || d.preset == DriftPreset::Vortex) && dom.dim != 2)
        r.child("preset").fail("shear and vortex drifts need dim 2");
    if (!(d.gamma >= 0.0 && d.gamma < static_cast<double>(dom.dim))) r.child("gamma").fail("gamma must lie in [0, dim)");
    if (!(d.radius > 0.0)) r.child("radius").fail("radius must be positive");
    return d;
}

std::vector<EstimateRequest> read_estimates(const Reader& r)
{
    if (r.node().IsScalar()) {
        const std::string s = r.str();
        if (s == "all") return default_estimates();
        if (s == "none") return {};
        r.fail("expected 'all', 'none' or a list");
    }
    r.require_sequence();
    const auto defaults = default_estimates();
    std::vector<EstimateRequest> out;
    for (std::size_t k = 0; k < r.node().size(); ++k) {
        const Reader e = r.item(k);
        EstimateRequest req;
        if (e.node().IsScalar()) {
            req.id = e.str();
        }
        else {
            e.require_map();
            req.id = e.child("id").str();
            if (!known_estimate(req.id)) e.child("id").fail("unknown estimate '" + req.id + "'");
            const auto& allowed = estimate_keys().at(req.id);
            for (const auto& kv : e.node()) {
                const std::string key = kv.first.as<std::string>();
                if (key == "id") continue;
                if (!allowed.count(key)) e.child(key).fail("not a parameter of " + req.id);
                req.params[key] = e.child(key).real();
            }
        }
        if (!known_estimate(req.id)) e.fail("unknown estimate '" + req.id + "'");
        for (const auto& d : defaults) {
            if (d.id != req.id) continue;
            for (const auto& [key, value] : d.params) {
                // interpolation with an explicit r2 or r1 computes the partner exponent itself
                if (req.id == "interpolation" && key != "alpha") continue;
                req.params.emplace(key, value);
            }
        }
        out.push_back(std::move(req));
    }
    return out;
}

OracleKind read_oracle(const Reader& r)
{
    const std::string s = r.str();
    if (s == "none") return OracleKind::None;
    if (s == "heat") return OracleKind::Heat;
    if (s == "barenblatt") return OracleKind::Barenblatt;
    r.fail("unknown oracle '" + s + "'");
}

CoupleSpec read_couple(const Reader& r, const DomainSpec& dom)
{
    r.allow_keys({"potential", "g", "center", "v0", "v0_amplitude", "alphas", "energy_slack", "cfl_safety"});
    if (dom.dim != 2) r.fail("coupled runs need dim 2");
    CoupleSpec c;
    try {
        c.potential.kind = potential_kind_from_string(r.child("potential").str());
    }
    catch (const std::invalid_argument& e) {
        r.child("potential").fail(e.what());
    }
    c.potential.g = r.real_or("g", 0.0);
    c.potential.center = r.has("center") ? read_point(r.child("center"), dom.dim) : box_center(dom);
    if (r.has("v0")) {
        c.v0 = r.child("v0").str();
        if (c.v0 != "zero" && c.v0 != "taylor_green") r.child("v0").fail("v0 must be zero or taylor_green");
    }
    c.v0_amplitude = r.real_or("v0_amplitude", c.v0_amplitude);
    if (r.has("alphas")) {
        c.alphas = r.child("alphas").reals();
        for (double a : c.alphas)
            if (!(a > 0.0 && a < 2.0)) r.child("alphas").fail("alphas must lie in (0, 2)");
    }
    c.energy_slack = r.real_or("energy_slack", c.energy_slack);
    c.cfl_safety = r.real_or("cfl_safety", c.cfl_safety);
    return c;
}

Scenario read_scenario(const Reader& r)
{
    r.allow_keys({"id", "domain", "cells", "ladder", "solver", "mollification", "measure", "drift", "estimates",
                  "output_times", "oracle", "couple"});
    Scenario s;
    s.id = r.child("id").str();
    if (s.id.empty() || s.id.find_first_of("/\\ ") != std::string::npos) r.child("id").fail("ids must be non-empty without spaces or slashes");
    if (r.has("domain")) s.domain = read_domain(r.child("domain"));
    if (r.has("cells")) s.cells = r.child("cells").integer();
    if (s.cells < 2) r.child("cells").fail("need at least 2 cells");
    if (r.has("ladder")) {
        const Reader l = r.child("ladder");
        l.require_sequence();
        for (std::size_t k = 0; k < l.node().size(); ++k) s.ladder.push_back(l.item(k).integer());
        if (s.ladder.empty()) l.fail("ladder must not be empty");
        for (std::size_t k = 0; k < s.ladder.size(); ++k) {
            if (s.ladder[k] < 2) l.item(k).fail("need at least 2 cells");
            if (k > 0 && s.ladder[k] <= s.ladder[k - 1]) l.item(k).fail("ladder must be strictly increasing");
        }
    }
    else {
        s.ladder = {s.cells};
    }
    s.solver = read_solver(r.child("solver"));
    if (r.has("output_times")) {
        s.solver.output_times = r.child("output_times").reals();
        for (double t : s.solver.output_times)
            if (!(t >= 0.0 && t <= s.solver.t_end)) r.child("output_times").fail("output times must lie in [0, t_end]");
    }
    if (r.has("mollification")) s.mollification = r.child("mollification").integer();
    if (s.mollification < 1) r.child("mollification").fail("mollification level must be >= 1");
    if (r.has("measure")) s.measure = read_measure(r.child("measure"), s.domain);
    if (r.has("drift")) s.drift = read_drift(r.child("drift"), s.domain, s.drift_file);
    s.estimates = r.has("estimates") ? read_estimates(r.child("estimates")) : default_estimates();
    if (r.has("oracle")) s.oracle = read_oracle(r.child("oracle"));
    if (r.has("couple")) s.couple = read_couple(r.child("couple"), s.domain);

    try {
        validate(s.measure, s.grid(s.ladder.front()), s.solver.t_end);
    }
    catch (const std::invalid_argument& e) {
        r.child("measure").fail(e.what());
    }
    if (s.oracle != OracleKind::None) {
        const Reader o = r.child("oracle");
        if (s.measure.initial_atoms.size() != 1 || !s.measure.atoms.empty() || s.measure.density)
            o.fail("oracles need exactly one initial atom and no forcing");
        if (s.drift.preset != DriftPreset::Zero) o.fail("oracles need a zero drift");
        if (s.solver.epsilon != 0.0) o.fail("oracles need epsilon = 0");
        if (s.oracle == OracleKind::Heat && s.solver.m != 1.0) o.fail("the heat oracle needs m = 1");
        if (s.oracle == OracleKind::Barenblatt && !(s.solver.m > 1.0)) o.fail("the Barenblatt oracle needs m > 1");
    }

    YAML::Emitter out;
    out << r.node();
    s.source = out.c_str();
    return s;
}

} // namespace

bool known_estimate(const std::string& id) { return estimate_keys().count(id) > 0; }

DriftSpec Scenario::drift_for(int n) const
{
    DriftSpec d = drift;
    if (d.preset == DriftPreset::Sampled) {
        std::string path = drift_file;
        const auto at = path.find("{N}");
        if (at != std::string::npos) path.replace(at, 3, std::to_string(n));
        d.sampled = load_face_field(path, grid(n));
    }
    return d;
}

const Scenario& Suite::find(const std::string& id) const
{
    for (const auto& s : scenarios)
        if (s.id == id) return s;
    throw std::invalid_argument("no scenario '" + id + "' in the suite");
}

Suite parse_suite(const std::string& text, const std::string& origin)
{
    YAML::Node root;
    try {
        root = YAML::Load(text);
    }
    catch (const YAML::Exception& e) {
        throw ConfigError(origin, e.mark.line + 1, "", e.msg);
    }
    Suite suite;
    if (root.IsNull()) throw ConfigError(origin, 1, "", "empty configuration");
    const Reader r(root, "", origin);
    r.allow_keys({"schema", "strict", "scenarios"});
    suite.schema = r.child("schema").integer();
    if (suite.schema != kSchemaVersion) r.child("schema").fail("unsupported schema version");
    if (r.has("strict")) suite.strict = r.child("strict").boolean();
    if (r.has("scenarios") && !r.child("scenarios").node().IsNull()) {
        const Reader list = r.child("scenarios");
        list.require_sequence();
        std::set<std::string> ids;
        for (std::size_t k = 0; k < list.node().size(); ++k) {
            Scenario s = read_scenario(list.item(k));
            if (!ids.insert(s.id).second) list.item(k).child("id").fail("duplicate scenario id '" + s.id + "'");
            suite.scenarios.push_back(std::move(s));
        }
    }
    return suite;
}

Suite load_suite(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError(path, 0, "", "cannot open file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_suite(ss.str(), path);
}

Scenario parse_scenario(const std::string& text, const std::string& origin)
{
    YAML::Node root;
    try {
        root = YAML::Load(text);
    }
    catch (const YAML::Exception& e) {
        throw ConfigError(origin, e.mark.line + 1, "", e.msg);
    }
    return read_scenario(Reader(root, "", origin));
}

} // namespace pmlab
