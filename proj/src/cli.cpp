#include "pss/cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include "pss/conservation.hpp"
#include "pss/field_io.hpp"
#include "pss/forms.hpp"
#include "pss/hierarchy.hpp"
#include "pss/models.hpp"
#include "pss/rotation_solver.hpp"

namespace pss::cli {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

// ------------------------------------------------------------------- parsing

namespace {

const std::map<std::string, std::set<std::string>>& known_fields() {
    static const std::map<std::string, std::set<std::string>> k = {
        {"model",
         {"kind", "m", "period", "samples", "steps", "time", "u0_mean", "u0_amplitude", "u0_mode", "eta", "kink",
          "velocity", "c", "u_file", "v_file", "frame_file"}},
        {"chart", {"origin", "extent", "counts"}},
        {"solver", {"phi0", "L0", "base", "gate_factor", "nondegeneracy", "special_coordinates", "scalings"}},
        {"hierarchy", {"order", "order_cap", "phi_init", "periodic_seed"}},
        {"conservation", {"time_axis", "drift_tolerance", "theta_file"}},
        {"converge", {"command", "metric", "levels", "order_floor"}},
        {"output", {"dir"}},
    };
    return k;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

// "key = value ; note" -> "key = value". Full-line comments are left to the parser.
std::string strip_inline_comments(const std::string& text) {
    std::istringstream is(text);
    std::string out, line;
    while (std::getline(is, line)) {
        for (std::size_t i = 1; i < line.size(); ++i) {
            if ((line[i] == ';' || line[i] == '#') && (line[i - 1] == ' ' || line[i - 1] == '\t')) {
                line.erase(i);
                break;
            }
        }
        out += line;
        out += '\n';
    }
    return out;
}

// Line of "key = ..." inside [section], 0 when not found.
std::size_t locate(const std::string& text, const std::string& section, const std::string& key) {
    std::istringstream is(text);
    std::string line, current;
    for (std::size_t no = 1; std::getline(is, line); ++no) {
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[' && t.back() == ']') {
            current = trim(std::string_view(t).substr(1, t.size() - 2));
            continue;
        }
        const auto eq = t.find('=');
        if (current == section && eq != std::string::npos && trim(t.substr(0, eq)) == key) return no;
    }
    return 0;
}

class Reader {
public:
    Reader(const pt::ptree& tree, const std::string& text) : tree_(tree), text_(text) {}

    [[noreturn]] void fail(const std::string& section, const std::string& key, const std::string& msg) const {
        throw ConfigError(msg, locate(text_, section, key), section + "." + key);
    }

    std::optional<std::string> raw(const std::string& section, const std::string& key) const {
        const auto sec = tree_.get_child_optional(section);
        if (!sec) return std::nullopt;
        const auto v = sec->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
        if (!v) return std::nullopt;
        return trim(*v);
    }

    double number(const std::string& section, const std::string& key, const std::string& text) const {
        double v = 0.0;
        const auto* first = text.data();
        const auto* last = text.data() + text.size();
        const auto r = std::from_chars(first, last, v);
        if (text.empty() || r.ec != std::errc() || r.ptr != last || !std::isfinite(v))
            fail(section, key, "expected a finite number, got '" + text + "'");
        return v;
    }

    void get(const std::string& section, const std::string& key, double& out) const {
        if (auto r = raw(section, key)) out = number(section, key, *r);
    }
    void get(const std::string& section, const std::string& key, std::size_t& out) const {
        if (auto r = raw(section, key)) {
            std::size_t v = 0;
            const auto res = std::from_chars(r->data(), r->data() + r->size(), v);
            if (r->empty() || res.ec != std::errc() || res.ptr != r->data() + r->size())
                fail(section, key, "expected a non-negative integer, got '" + *r + "'");
            out = v;
        }
    }
    void get(const std::string& section, const std::string& key, std::string& out) const {
        if (auto r = raw(section, key)) {
            if (r->empty()) fail(section, key, "empty value");
            out = *r;
        }
    }
    void get(const std::string& section, const std::string& key, bool& out) const {
        if (auto r = raw(section, key)) {
            if (*r == "true" || *r == "yes" || *r == "1") out = true;
            else if (*r == "false" || *r == "no" || *r == "0") out = false;
            else fail(section, key, "expected true or false, got '" + *r + "'");
        }
    }
    std::optional<std::vector<double>> list(const std::string& section, const std::string& key) const {
        auto r = raw(section, key);
        if (!r) return std::nullopt;
        std::vector<double> out;
        std::istringstream is(*r);
        std::string item;
        while (std::getline(is, item, ',')) out.push_back(number(section, key, trim(item)));
        if (out.empty()) fail(section, key, "expected a comma-separated list");
        return out;
    }
    std::optional<std::vector<std::size_t>> index_list(const std::string& section, const std::string& key) const {
        auto v = list(section, key);
        if (!v) return std::nullopt;
        std::vector<std::size_t> out;
        for (double x : *v) {
            if (x < 0.0 || std::floor(x) != x) fail(section, key, "expected non-negative integers");
            out.push_back(static_cast<std::size_t>(x));
        }
        return out;
    }

private:
    const pt::ptree& tree_;
    const std::string& text_;
};

} // namespace

RunConfig parse_config(const std::string& text, const fs::path& source_dir) {
    pt::ptree tree;
    try {
        std::istringstream is(strip_inline_comments(text));
        pt::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(e.message(), e.line());
    }

    for (const auto& [section, body] : tree) {
        const auto it = known_fields().find(section);
        if (body.empty() && !body.data().empty())
            throw ConfigError("key outside of any section", locate(text, "", section), section);
        if (it == known_fields().end())
            throw ConfigError("unknown section [" + section + "]", 0, section);
        for (const auto& kv : body)
            if (!it->second.count(kv.first))
                throw ConfigError("unknown field", locate(text, section, kv.first), section + "." + kv.first);
    }

    Reader r(tree, text);
    RunConfig c;
    c.source_text = text;
    c.source_dir = source_dir;

    if (!r.raw("model", "kind")) throw ConfigError("missing required field", 0, "model.kind");
    r.get("model", "kind", c.model);
    static const std::set<std::string> models = {"camassa_holm", "sine_gordon", "igsge",
                                                 "flat",         "horocyclic",  "external"};
    if (!models.count(c.model))
        r.fail("model", "kind",
               "unknown model '" + c.model + "' (camassa_holm, sine_gordon, igsge, flat, horocyclic, external)");
    r.get("model", "m", c.m);
    r.get("model", "period", c.period);
    r.get("model", "samples", c.samples);
    r.get("model", "steps", c.steps);
    r.get("model", "time", c.time);
    r.get("model", "u0_mean", c.u0_mean);
    r.get("model", "u0_amplitude", c.u0_amplitude);
    r.get("model", "u0_mode", c.u0_mode);
    r.get("model", "eta", c.eta);
    r.get("model", "kink", c.kink);
    r.get("model", "velocity", c.velocity);
    if (auto v = r.list("model", "c")) c.c = *v;
    r.get("model", "u_file", c.u_file);
    r.get("model", "v_file", c.v_file);
    r.get("model", "frame_file", c.frame_file);

    if (!(c.period > 0.0)) r.fail("model", "period", "must be positive");
    if (c.samples < 4) r.fail("model", "samples", "must be at least 4");
    if (c.steps < 1) r.fail("model", "steps", "must be at least 1");
    if (!(c.time > 0.0)) r.fail("model", "time", "must be positive");
    if (c.kink != "static" && c.kink != "moving") r.fail("model", "kink", "expected static or moving");
    if (c.kink == "moving" && !(std::abs(c.velocity) < 1.0)) r.fail("model", "velocity", "|velocity| must be below 1");
    if (c.model == "external" && c.frame_file.empty())
        throw ConfigError("external model needs a frame file", 0, "model.frame_file");

    if (tree.get_child_optional("chart")) {
        ChartSpec s;
        auto o = r.list("chart", "origin");
        auto e = r.list("chart", "extent");
        auto n = r.index_list("chart", "counts");
        if (!o) throw ConfigError("missing required field", 0, "chart.origin");
        if (!e) throw ConfigError("missing required field", 0, "chart.extent");
        if (!n) throw ConfigError("missing required field", 0, "chart.counts");
        if (o->size() != e->size() || o->size() != n->size() || o->size() < 2)
            r.fail("chart", "counts", "origin, extent and counts need the same length >= 2");
        for (double x : *e)
            if (!(x > 0.0)) r.fail("chart", "extent", "extents must be positive");
        for (std::size_t x : *n)
            if (x < 3) r.fail("chart", "counts", "counts must be at least 3");
        s.origin = *o;
        s.extent = *e;
        s.counts = *n;
        c.chart = s;
    }

    r.get("solver", "phi0", c.phi0);
    if (auto v = r.list("solver", "L0")) c.L0 = *v;
    if (auto raw = r.raw("solver", "base"); raw && *raw != "center") c.base = r.index_list("solver", "base");
    r.get("solver", "gate_factor", c.gate_factor);
    r.get("solver", "nondegeneracy", c.nondegeneracy);
    r.get("solver", "special_coordinates", c.special_coordinates);
    if (auto v = r.list("solver", "scalings")) c.scalings = *v;
    if (!(c.gate_factor > 0.0)) r.fail("solver", "gate_factor", "must be positive");
    if (!(c.nondegeneracy > 0.0)) r.fail("solver", "nondegeneracy", "must be positive");
    for (double s : c.scalings)
        if (!(s > 0.0)) r.fail("solver", "scalings", "scalings must be positive");

    r.get("hierarchy", "order", c.order);
    r.get("hierarchy", "order_cap", c.order_cap);
    if (auto v = r.list("hierarchy", "phi_init")) c.phi_init = *v;
    r.get("hierarchy", "periodic_seed", c.periodic_seed);
    if (c.order > c.order_cap) r.fail("hierarchy", "order", "exceeds order_cap");

    std::size_t axis = 0;
    if (r.raw("conservation", "time_axis")) {
        r.get("conservation", "time_axis", axis);
        if (axis < 1) r.fail("conservation", "time_axis", "axes are numbered from 1");
        c.time_axis = axis;
    }
    r.get("conservation", "drift_tolerance", c.drift_tolerance);
    r.get("conservation", "theta_file", c.theta_file);
    if (!(c.drift_tolerance > 0.0)) r.fail("conservation", "drift_tolerance", "must be positive");

    r.get("converge", "command", c.converge_command);
    r.get("converge", "metric", c.converge_metric);
    r.get("converge", "levels", c.levels);
    r.get("converge", "order_floor", c.order_floor);
    static const std::set<std::string> commands = {"verify", "solve-frame", "hierarchy", "conserve"};
    if (!commands.count(c.converge_command))
        r.fail("converge", "command", "expected verify, solve-frame, hierarchy or conserve");
    if (c.levels < 2 || c.levels > 4) r.fail("converge", "levels", "expected 2 to 4 levels");
    if (!(c.order_floor > 0.0)) r.fail("converge", "order_floor", "must be positive");

    r.get("output", "dir", c.out_dir);
    return c;
}

RunConfig load_config(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.parent_path());
}

std::string config_hash(const std::string& text) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// -------------------------------------------------------------------- models

namespace {

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6e", v);
    return buf;
}

struct Model {
    FrameData frame;
    std::optional<FrameSeries> series;
    std::map<std::string, double> residuals;
    std::size_t time_axis = 0;
    NodeIndex base;
};

fs::path resolve(const RunConfig& cfg, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : cfg.source_dir / path;
}

void require_unscaled(std::size_t scale, const char* what) {
    if (scale != 1) throw ConfigError(std::string("grid scaling is not available for ") + what, 0, "--grid-scale");
}

GridChart make_chart(const RunConfig& cfg, ChartSpec fallback, std::size_t scale) {
    const ChartSpec& s = cfg.chart ? *cfg.chart : fallback;
    if (cfg.chart && cfg.model == "igsge" && s.counts.size() != cfg.c.size() + 1)
        throw ConfigError("chart dimension must equal the number of constants plus one", 0, "chart.counts");
    if (cfg.chart && cfg.model != "igsge" && s.counts.size() != 2)
        throw ConfigError("this model needs a two-dimensional chart", 0, "chart.counts");
    std::vector<double> spacing;
    for (std::size_t a = 0; a < s.counts.size(); ++a)
        spacing.push_back(s.extent[a] / static_cast<double>(s.counts[a] - 1));
    GridChart chart(s.origin, spacing, s.counts);
    return scale == 1 ? chart : chart.refined(scale);
}

Model build_model(const RunConfig& cfg, std::size_t scale) {
    Model md;
    if (cfg.chart && (cfg.model == "camassa_holm" || cfg.model == "external"))
        throw ConfigError("[chart] is not used by model '" + cfg.model + "'", 0, "chart");

    if (cfg.model == "camassa_holm") {
        CamassaHolmState st;
        if (!cfg.u_file.empty()) {
            require_unscaled(scale, "user-supplied fields");
            const FieldBundle b = load_pssfield(resolve(cfg, cfg.u_file));
            if (b.components.size() != 1 || b.chart.dim() != 2)
                throw ConfigError("u_file must hold one component on an (x, t) chart", 0, "model.u_file");
            st = ch_state(ScalarField(b.chart, b.components[0]), cfg.m);
        } else {
            const std::size_t n = cfg.samples * scale;
            std::vector<double> u0(n);
            for (std::size_t i = 0; i < n; ++i) {
                const double x = cfg.period * static_cast<double>(i) / static_cast<double>(n);
                u0[i] = cfg.u0_mean + cfg.u0_amplitude * std::cos(2.0 * std::numbers::pi * cfg.u0_mode * x / cfg.period);
            }
            st = ch_evolve(u0, cfg.period, cfg.m, cfg.time, cfg.steps * scale);
        }
        md.frame = ch_forms(st, cfg.eta);
        md.series = ch_forms_series(st, 2);
        md.residuals["ch_pde_residual"] = ch_pde_residual(st);
        md.time_axis = 1;
        md.base = {0, 0};
    } else if (cfg.model == "sine_gordon") {
        const GridChart chart = make_chart(cfg, {{-8.0, -8.0}, {16.0, 16.0}, {81, 81}}, scale);
        if (!cfg.u_file.empty()) {
            require_unscaled(scale, "user-supplied fields");
            const FieldBundle b = load_pssfield(resolve(cfg, cfg.u_file));
            if (b.components.size() != 1 || b.chart.dim() != 2)
                throw ConfigError("u_file must hold one component on a 2D chart", 0, "model.u_file");
            const ScalarField u(b.chart, b.components[0]);
            md.frame = sg_forms(u);
            md.residuals["sg_pde_residual"] = sg_pde_residual(u);
        } else {
            const auto s = sg_solution(chart, cfg.kink == "moving" ? KinkKind::moving_kink : KinkKind::static_kink,
                                       cfg.velocity);
            md.frame = sg_forms(s);
            md.residuals["sg_pde_residual"] = sg_pde_residual(s.u);
        }
        md.base = md.frame.chart.center();
    } else if (cfg.model == "igsge") {
        const std::size_t n = cfg.c.size() + 1;
        ChartSpec def{{0.5}, {5.5}, {23}};
        for (std::size_t a = 1; a < n; ++a) {
            def.origin.push_back(-4.0);
            def.extent.push_back(8.0);
            def.counts.push_back(33);
        }
        IGSGEState st;
        if (!cfg.v_file.empty()) {
            require_unscaled(scale, "user-supplied fields");
            const FieldBundle b = load_pssfield(resolve(cfg, cfg.v_file));
            if (b.components.size() != b.chart.dim())
                throw ConfigError("v_file must hold n components on an n-dimensional chart", 0, "model.v_file");
            std::vector<ScalarField> V;
            for (const auto& comp : b.components) V.emplace_back(b.chart, comp);
            st = igsge_h_from_V(b.chart, std::move(V), cfg.nondegeneracy);
        } else {
            const GridChart chart = make_chart(cfg, def, scale);
            try {
                st = igsge_explicit_solution(chart, cfg.c);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what(), 0, "model.c");
            }
        }
        const IGSGEResiduals r = igsge_residual(st);
        md.residuals["igsge_unit"] = r.unit;
        md.residuals["igsge_dV"] = r.dV;
        md.residuals["igsge_mixed"] = r.mixed;
        md.residuals["igsge_triple"] = r.triple;
        md.frame = igsge_forms(st);
        md.base = md.frame.chart.center();
    } else if (cfg.model == "flat" || cfg.model == "horocyclic") {
        const GridChart chart = make_chart(cfg, {{0.0, 0.0}, {1.0, 1.0}, {41, 41}}, scale);
        md.frame = FrameData(chart, 2);
        for (std::size_t p = 0; p < chart.size(); ++p) {
            md.frame.omega[0].coeffs[0][p] = 1.0;
            if (cfg.model == "flat") {
                md.frame.omega[1].coeffs[1][p] = 1.0;
            } else {
                const double e = std::exp(-chart.node_coord(p, 0));
                md.frame.omega[1].coeffs[1][p] = e;
                md.frame.W.upper(0, 1).coeffs[1][p] = -e;
            }
        }
        md.base = chart.center();
    } else {
        require_unscaled(scale, "user-supplied fields");
        try {
            md.frame = frame_of(load_pssfield(resolve(cfg, cfg.frame_file)));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what(), 0, "model.frame_file");
        }
        md.base = md.frame.chart.center();
    }

    if (cfg.time_axis) {
        if (*cfg.time_axis > md.frame.n()) throw ConfigError("time axis outside the chart", 0, "conservation.time_axis");
        md.time_axis = *cfg.time_axis - 1;
    }
    if (cfg.base) {
        NodeIndex b = *cfg.base;
        if (b.size() != md.frame.n()) throw ConfigError("base needs one index per axis", 0, "solver.base");
        for (auto& i : b) i *= scale;
        if (!md.frame.chart.contains(b)) throw ConfigError("base node outside the chart", 0, "solver.base");
        md.base = b;
    }
    return md;
}

SolverOptions solver_options(const RunConfig& cfg) {
    SolverOptions o;
    o.gate_factor = cfg.gate_factor;
    o.nondegeneracy = cfg.nondegeneracy;
    return o;
}

Matrix initial_L(const RunConfig& cfg, std::size_t n) {
    if (cfg.L0.empty()) return Matrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    if (cfg.L0.size() != n * n)
        throw ConfigError("L0 needs " + std::to_string(n * n) + " entries (row-major)", 0, "solver.L0");
    Matrix l(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) l(i, j) = cfg.L0[i * n + j];
    if (!(orthogonality_defect(l) <= 1e-12)) throw ConfigError("L0 is not orthogonal", 0, "solver.L0");
    return l;
}

void save(const CommandContext& ctx, CommandResult& res, const std::string& name, const FieldBundle& b) {
    if (!ctx.write_files) return;
    save_pssfield(ctx.out_dir / name, b);
    res.files.push_back(name);
}

void save_text(const CommandContext& ctx, CommandResult& res, const std::string& name, const std::string& text) {
    if (!ctx.write_files) return;
    std::ofstream out(ctx.out_dir / name, std::ios::binary);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + (ctx.out_dir / name).string());
    res.files.push_back(name);
}

void record_chart(CommandResult& res, const GridChart& c) {
    res.metrics["h"] = c.max_spacing();
    res.metrics["nodes"] = static_cast<double>(c.size());
}

CommandResult gate_failure(CommandResult res, const GateError& e) {
    res.metrics["structure_res1"] = e.residuals.res1;
    res.metrics["structure_res2"] = e.residuals.res2;
    res.metrics["gate_tolerance"] = e.tolerance;
    res.lines.push_back(std::string("gate: FAIL ") + e.what());
    res.exit_code = 1;
    return res;
}

struct Solved {
    SolveReport report;
    bool angle = false;
};

Solved solve_model(const RunConfig& cfg, const Model& md) {
    const std::size_t n = md.frame.n();
    if (n == 2 && cfg.L0.empty()) return {solve_phi_2d(md.frame, cfg.phi0, md.base, solver_options(cfg)), true};
    return {solve_L_nd(md.frame, initial_L(cfg, n), md.base, solver_options(cfg)), false};
}

struct HierarchySolved {
    HierarchyResult result;
    FrameSeries series;
};

HierarchySolved solve_model_hierarchy(const RunConfig& cfg, const Model& md) {
    if (md.frame.n() != 2) throw ConfigError("the hierarchy needs a two-dimensional model", 0, "model.kind");
    FrameSeries series = md.series ? *md.series : FrameSeries{md.frame};
    std::vector<double> init = cfg.phi_init.empty() ? std::vector<double>{cfg.phi0} : cfg.phi_init;
    if (init.size() > cfg.order + 1) throw ConfigError("more initial values than orders", 0, "hierarchy.phi_init");
    if (cfg.periodic_seed) {
        if (md.base[0] != 0)
            throw ConfigError("periodic seeding needs the base on the first node of axis 1", 0, "solver.base");
        init = periodic_seed(series, cfg.order, md.base, 0, init[0]);
    }
    HierarchyOptions opts;
    opts.solver = solver_options(cfg);
    opts.order_cap = cfg.order_cap;
    return {solve_hierarchy(series, cfg.order, init, md.base, opts), std::move(series)};
}

} // namespace

// ------------------------------------------------------------------ commands

CommandResult cmd_verify(const RunConfig& cfg, const CommandContext& ctx) {
    (void)ctx;
    CommandResult res;
    const Model md = build_model(cfg, ctx.grid_scale);
    record_chart(res, md.frame.chart);
    const StructureResiduals sr = structure_residuals(md.frame, -1.0, cfg.nondegeneracy);
    const double tol = structure_gate_tolerance(md.frame, cfg.gate_factor);
    const bool pass = sr.res1 <= tol && sr.res2 <= tol;
    res.metrics["structure_res1"] = sr.res1;
    res.metrics["structure_res2"] = sr.res2;
    res.metrics["gate_tolerance"] = tol;
    res.metrics["masked_nodes"] = static_cast<double>(sr.masked_nodes);
    res.metrics["special_frame_residual"] = special_frame_residual(md.frame);
    for (const auto& [k, v] : md.residuals) res.metrics[k] = v;

    res.lines.push_back("verify: model=" + cfg.model + " nodes=" + std::to_string(md.frame.chart.size()) +
                        " h=" + sci(md.frame.chart.max_spacing()));
    res.lines.push_back("structure: res1=" + sci(sr.res1) + " res2=" + sci(sr.res2) + " tolerance=" + sci(tol) +
                        " masked=" + std::to_string(sr.masked_nodes));
    res.lines.push_back("special_frame: residual=" + sci(res.metrics["special_frame_residual"]));
    for (const auto& [k, v] : md.residuals) res.lines.push_back("model: " + k + "=" + sci(v));
    res.lines.push_back(std::string("gate: ") + (pass ? "PASS" : "FAIL"));
    res.exit_code = pass ? 0 : 1;
    return res;
}

CommandResult cmd_solve(const RunConfig& cfg, const CommandContext& ctx) {
    CommandResult res;
    const Model md = build_model(cfg, ctx.grid_scale);
    record_chart(res, md.frame.chart);
    for (const auto& [k, v] : md.residuals) res.metrics[k] = v;
    Solved s;
    try {
        s = solve_model(cfg, md);
    } catch (const GateError& e) {
        return gate_failure(std::move(res), e);
    }
    const SolveReport& rep = s.report;
    res.metrics["structure_res1"] = rep.structure.res1;
    res.metrics["structure_res2"] = rep.structure.res2;
    res.metrics["compat_residual"] = rep.compat_residual;
    res.metrics["closed_residual"] = rep.closed_residual;
    res.metrics["orth_residual"] = rep.orth_residual;
    res.metrics["special_frame_residual"] = special_frame_residual(frame_change(md.frame, rep.rotation));
    res.lines.push_back("solve: compat=" + sci(rep.compat_residual) + " closed=" + sci(rep.closed_residual) +
                        " orth=" + sci(rep.orth_residual));

    save(ctx, res, "rotation.pssfield", bundle_of(rep.rotation));
    save(ctx, res, "theta1.pssfield", bundle_of(rep.theta1));
    if (s.angle) save(ctx, res, "phi.pssfield", bundle_of(*rep.rotation.phi));

    if (cfg.special_coordinates) {
        std::vector<double> c = cfg.scalings;
        if (c.empty()) c.assign(md.frame.n() - 1, 1.0);
        if (c.size() != md.frame.n() - 1)
            throw ConfigError("scalings needs n - 1 entries", 0, "solver.scalings");
        const auto sc = special_coordinates_check(md.frame, rep, c, cfg.nondegeneracy);
        res.metrics["path_residual"] = sc.path_residual;
        res.metrics["bracket_1i"] = sc.max_bracket_1i;
        res.metrics["bracket_ij"] = sc.max_bracket_ij;
        res.lines.push_back("special: path=" + sci(sc.path_residual) + " bracket_1i=" + sci(sc.max_bracket_1i) +
                            " bracket_ij=" + sci(sc.max_bracket_ij));
        save(ctx, res, "G.pssfield", bundle_of(sc.G));
    }
    return res;
}

CommandResult cmd_hierarchy(const RunConfig& cfg, const CommandContext& ctx) {
    CommandResult res;
    const Model md = build_model(cfg, ctx.grid_scale);
    record_chart(res, md.frame.chart);
    for (const auto& [k, v] : md.residuals) res.metrics[k] = v;
    HierarchySolved hs;
    try {
        hs = solve_model_hierarchy(cfg, md);
    } catch (const GateError& e) {
        return gate_failure(std::move(res), e);
    }
    const HierarchyResult& h = hs.result;
    double closed = 0.0, compat = 0.0;
    for (std::size_t j = 0; j <= cfg.order; ++j) {
        const std::string sj = std::to_string(j);
        res.metrics["closed_residual_" + sj] = h.closed_residual[j];
        res.metrics["compat_residual_" + sj] = h.compat_residual[j];
        res.metrics["phi_init_" + sj] = h.phi_init[j];
        closed = std::max(closed, h.closed_residual[j]);
        compat = std::max(compat, h.compat_residual[j]);
        res.lines.push_back("hierarchy: order=" + sj + " phi_init=" + sci(h.phi_init[j]) +
                            " closed=" + sci(h.closed_residual[j]) + " compat=" + sci(h.compat_residual[j]) +
                            " res1=" + sci(h.structure[j].res1) + " res2=" + sci(h.structure[j].res2));
        save(ctx, res, "phi_" + sj + ".pssfield", bundle_of(h.phi.coeffs[j]));
        save(ctx, res, "theta_" + sj + ".pssfield", bundle_of(h.theta[j]));
    }
    res.metrics["closed_residual"] = closed;
    res.metrics["compat_residual"] = compat;
    return res;
}

CommandResult cmd_conserve(const RunConfig& cfg, const CommandContext& ctx) {
    CommandResult res;
    std::vector<ConservationReport> reports;
    if (!cfg.theta_file.empty()) {
        require_unscaled(ctx.grid_scale, "user-supplied fields");
        const FieldBundle b = load_pssfield(resolve(cfg, cfg.theta_file));
        if (b.components.size() != b.chart.dim())
            throw ConfigError("theta_file must hold n components", 0, "conservation.theta_file");
        const std::size_t axis = cfg.time_axis.value_or(1) - 1;
        if (axis >= b.chart.dim()) throw ConfigError("time axis outside the chart", 0, "conservation.time_axis");
        record_chart(res, b.chart);
        reports.push_back(analyze(oneform_of(b), axis));
    } else {
        const Model md = build_model(cfg, ctx.grid_scale);
        record_chart(res, md.frame.chart);
        for (const auto& [k, v] : md.residuals) res.metrics[k] = v;
        try {
            if (md.series) {
                const HierarchySolved hs = solve_model_hierarchy(cfg, md);
                reports = hierarchy_report(hs.result.theta, md.time_axis);
                double closed = 0.0;
                for (double c : hs.result.closed_residual) closed = std::max(closed, c);
                res.metrics["closed_residual"] = closed;
            } else {
                const Solved s = solve_model(cfg, md);
                res.metrics["closed_residual"] = s.report.closed_residual;
                reports.push_back(analyze(s.report.theta1, md.time_axis));
            }
        } catch (const GateError& e) {
            return gate_failure(std::move(res), e);
        }
    }

    double drift = 0.0, rel = 0.0, flux = 0.0, cross = 0.0;
    for (std::size_t o = 0; o < reports.size(); ++o) {
        for (const auto& q : reports[o].quantities) {
            res.lines.push_back("conserve: order=" + std::to_string(o) + " axis=" + std::to_string(q.axis + 1) +
                                " drift=" + sci(q.drift) + " relative_drift=" + sci(q.relative_drift) +
                                " flux=" + sci(q.flux_residual) + " boundary_flux=" + sci(q.boundary_flux));
        }
        const std::string so = std::to_string(o);
        res.metrics["relative_drift_" + so] = reports[o].max_relative_drift();
        res.metrics["flux_residual_" + so] = reports[o].max_flux_residual();
        drift = std::max(drift, reports[o].max_drift());
        rel = std::max(rel, reports[o].max_relative_drift());
        flux = std::max(flux, reports[o].max_flux_residual());
        cross = std::max(cross, reports[o].max_cross_residual);
    }
    res.metrics["drift"] = drift;
    res.metrics["relative_drift"] = rel;
    res.metrics["flux_residual"] = flux;
    res.metrics["cross_residual"] = cross;
    const bool pass = rel <= cfg.drift_tolerance;
    res.lines.push_back("conserve: max_relative_drift=" + sci(rel) + " tolerance=" + sci(cfg.drift_tolerance) + " " +
                        (pass ? "PASS" : "FAIL"));
    res.exit_code = pass ? 0 : 1;

    std::ostringstream csv;
    write_conservation_csv(csv, reports);
    save_text(ctx, res, "conservation.csv", csv.str());
    save_text(ctx, res, "summary.json", conservation_summary_json(reports) + "\n");
    return res;
}

CommandResult cmd_converge(const RunConfig& cfg, const CommandContext& ctx) {
    CommandResult res;
    std::ostringstream csv;
    csv << "level,grid_scale,h," << cfg.converge_metric << ",observed_order\n";
    double min_order = std::numeric_limits<double>::infinity();
    double prev_v = 0.0, prev_h = 0.0;
    for (std::size_t level = 0; level < cfg.levels; ++level) {
        CommandContext sub{ctx.out_dir, ctx.grid_scale << level, false};
        CommandResult r;
        if (cfg.converge_command == "verify") r = cmd_verify(cfg, sub);
        else if (cfg.converge_command == "solve-frame") r = cmd_solve(cfg, sub);
        else if (cfg.converge_command == "hierarchy") r = cmd_hierarchy(cfg, sub);
        else r = cmd_conserve(cfg, sub);
        const auto it = r.metrics.find(cfg.converge_metric);
        if (it == r.metrics.end()) {
            if (r.exit_code != 0 && !r.lines.empty()) {
                res.lines.push_back("converge: level=" + std::to_string(level) + " " + r.lines.back());
                res.exit_code = 1;
                return res;
            }
            std::string names;
            for (const auto& m : r.metrics) names += (names.empty() ? "" : ", ") + m.first;
            throw ConfigError("metric not produced by " + cfg.converge_command + " (available: " + names + ")", 0,
                              "converge.metric");
        }
        const double v = it->second, h = r.metrics.at("h");
        std::string order_text;
        if (level > 0) {
            const double order = std::log(prev_v / v) / std::log(prev_h / h);
            min_order = std::isfinite(order) ? std::min(min_order, order) : -std::numeric_limits<double>::infinity();
            order_text = format_real(order);
            res.metrics["observed_order_" + std::to_string(level)] = order;
        }
        res.metrics[cfg.converge_metric + "_" + std::to_string(level)] = v;
        csv << level << ',' << sub.grid_scale << ',' << format_real(h) << ',' << format_real(v) << ',' << order_text
            << '\n';
        res.lines.push_back("converge: level=" + std::to_string(level) + " h=" + sci(h) + " " + cfg.converge_metric +
                            "=" + sci(v) + (level > 0 ? " order=" + sci(res.metrics["observed_order_" +
                                                                                    std::to_string(level)])
                                                      : std::string()));
        prev_v = v;
        prev_h = h;
    }
    res.metrics["min_observed_order"] = min_order;
    const bool pass = min_order >= cfg.order_floor;
    res.lines.push_back("converge: min_order=" + sci(min_order) + " floor=" + sci(cfg.order_floor) + " " +
                        (pass ? "PASS" : "FAIL"));
    res.exit_code = pass ? 0 : 1;
    save_text(ctx, res, "converge.csv", csv.str());
    return res;
}

// ----------------------------------------------------------------------- run

int run(const std::string& command, const fs::path& config_path, const std::optional<fs::path>& out_dir,
        std::size_t grid_scale, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    try {
        cfg = load_config(config_path);
    } catch (const ConfigError& e) {
        err << "config error: " << config_path.string();
        if (e.line) err << ":" << e.line;
        if (!e.field.empty()) err << ": " << e.field;
        err << ": " << e.what() << "\n";
        return 2;
    }
    if (grid_scale < 1) {
        err << "config error: --grid-scale must be at least 1\n";
        return 2;
    }

    CommandContext ctx{out_dir ? *out_dir : fs::path(cfg.out_dir), grid_scale, true};
    CommandResult res;
    try {
        fs::create_directories(ctx.out_dir);
        if (command == "verify") res = cmd_verify(cfg, ctx);
        else if (command == "solve-frame") res = cmd_solve(cfg, ctx);
        else if (command == "hierarchy") res = cmd_hierarchy(cfg, ctx);
        else if (command == "conserve") res = cmd_conserve(cfg, ctx);
        else if (command == "converge") res = cmd_converge(cfg, ctx);
        else {
            err << "unknown command '" << command << "'\n";
            return 2;
        }
    } catch (const ConfigError& e) {
        err << "config error: " << config_path.string();
        if (!e.field.empty()) err << ": " << e.field;
        err << ": " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }

    for (const auto& l : res.lines) out << l << "\n";

    nlohmann::ordered_json m;
    m["command"] = command;
    m["config_file"] = config_path.filename().string();
    m["config_hash"] = config_hash(cfg.source_text);
    m["model"] = cfg.model;
    m["grid_scale"] = grid_scale;
    m["tolerances"] = {{"gate_factor", cfg.gate_factor},
                       {"nondegeneracy", cfg.nondegeneracy},
                       {"drift_tolerance", cfg.drift_tolerance},
                       {"order_floor", cfg.order_floor},
                       {"order_cap", cfg.order_cap}};
    nlohmann::ordered_json metrics = nlohmann::ordered_json::object();
    for (const auto& [k, v] : res.metrics) metrics[k] = v;
    m["metrics"] = metrics;
    m["files"] = res.files;
    m["exit_code"] = res.exit_code;
    std::ofstream mf(ctx.out_dir / "manifest.json", std::ios::binary);
    mf << m.dump(2) << "\n";
    if (!mf) {
        err << "error: cannot write manifest\n";
        return 1;
    }
    return res.exit_code;
}

} // namespace pss::cli
