#include "wealthfpk/config.hpp"

#include "wealthfpk/io.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <variant>

namespace wealthfpk {

namespace {

using Value = std::variant<double, bool, std::string, std::vector<double>, std::vector<std::string>>;
using Table = std::map<std::string, std::map<std::string, Value>>;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw std::invalid_argument("config: " + where + ": " + what);
}

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b])))
        ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])))
        --e;
    return s.substr(b, e - b);
}

// strips a trailing comment that is not inside a quoted string
std::string strip_comment(const std::string& s) {
    bool quoted = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"')
            quoted = !quoted;
        else if (s[i] == '#' && !quoted)
            return s.substr(0, i);
    }
    return s;
}

Value parse_scalar(const std::string& tok, const std::string& where) {
    if (tok.size() >= 2 && tok.front() == '"' && tok.back() == '"')
        return tok.substr(1, tok.size() - 2);
    if (tok == "true")
        return true;
    if (tok == "false")
        return false;
    try {
        std::size_t used = 0;
        const double d = std::stod(tok, &used);
        if (used != tok.size())
            fail(where, "trailing characters in number '" + tok + "'");
        return d;
    } catch (const std::invalid_argument&) {
        fail(where, "cannot parse value '" + tok + "'");
    }
}

Value parse_value(const std::string& raw, const std::string& where) {
    const std::string s = trim(raw);
    if (s.empty())
        fail(where, "empty value");
    if (s.front() == '[') {
        if (s.back() != ']')
            fail(where, "unterminated array");
        std::vector<std::string> toks;
        std::string cur;
        bool quoted = false;
        for (std::size_t i = 1; i + 1 < s.size(); ++i) {
            if (s[i] == '"')
                quoted = !quoted;
            if (s[i] == ',' && !quoted) {
                toks.push_back(trim(cur));
                cur.clear();
            } else {
                cur += s[i];
            }
        }
        if (!trim(cur).empty())
            toks.push_back(trim(cur));
        if (toks.empty())
            return std::vector<double>{};
        if (toks.front().front() == '"') {
            std::vector<std::string> out;
            for (auto& t : toks)
                out.push_back(std::get<std::string>(parse_scalar(t, where)));
            return out;
        }
        std::vector<double> out;
        for (auto& t : toks)
            out.push_back(std::get<double>(parse_scalar(t, where)));
        return out;
    }
    return parse_scalar(s, where);
}

Table parse_table(const std::string& text) {
    Table table;
    std::string section;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string s = trim(strip_comment(line));
        if (s.empty())
            continue;
        if (s.front() == '[') {
            if (s.back() != ']')
                fail("line " + std::to_string(lineno), "unterminated section header");
            section = trim(s.substr(1, s.size() - 2));
            table[section];
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            fail("line " + std::to_string(lineno), "expected key = value");
        const std::string key = trim(s.substr(0, eq));
        if (section.empty())
            fail(key, "key outside any [section]");
        const std::string where = section + "." + key;
        if (table[section].count(key))
            fail(where, "duplicate key");
        table[section][key] = parse_value(s.substr(eq + 1), where);
    }
    return table;
}

class Reader {
public:
    explicit Reader(const Table& t) : table_(t) {}

    double num(const std::string& sec, const std::string& key, double dflt) {
        mark(sec, key);
        const Value* v = find(sec, key);
        if (!v)
            return dflt;
        if (!std::holds_alternative<double>(*v))
            fail(sec + "." + key, "expected a number");
        return std::get<double>(*v);
    }

    std::string str(const std::string& sec, const std::string& key, const std::string& dflt) {
        mark(sec, key);
        const Value* v = find(sec, key);
        if (!v)
            return dflt;
        if (!std::holds_alternative<std::string>(*v))
            fail(sec + "." + key, "expected a string");
        return std::get<std::string>(*v);
    }

    std::vector<std::string> str_list(const std::string& sec, const std::string& key) {
        mark(sec, key);
        const Value* v = find(sec, key);
        if (!v)
            return {};
        if (std::holds_alternative<std::vector<std::string>>(*v))
            return std::get<std::vector<std::string>>(*v);
        if (std::holds_alternative<std::vector<double>>(*v) &&
            std::get<std::vector<double>>(*v).empty())
            return {};
        fail(sec + "." + key, "expected an array of strings");
    }

    void check_unknown() const {
        for (const auto& [sec, kv] : table_)
            for (const auto& [key, value] : kv) {
                (void)value;
                if (!seen_.count(sec + "." + key))
                    fail(sec + "." + key, "unknown key");
            }
    }

private:
    const Value* find(const std::string& sec, const std::string& key) const {
        const auto s = table_.find(sec);
        if (s == table_.end())
            return nullptr;
        const auto k = s->second.find(key);
        return k == s->second.end() ? nullptr : &k->second;
    }

    void mark(const std::string& sec, const std::string& key) { seen_.insert(sec + "." + key); }

    const Table& table_;
    std::set<std::string> seen_;
};

} // namespace

bool RunConfig::operator==(const RunConfig& other) const {
    return params.lambda == other.params.lambda && params.sigma == other.params.sigma &&
           v_min == other.v_min && v_max == other.v_max && n_cells == other.n_cells &&
           stretch == other.stretch && initial_family == other.initial_family &&
           initial_law.mean == other.initial_law.mean && initial_law.sd == other.initial_law.sd &&
           initial_law.a == other.initial_law.a && initial_law.b == other.initial_law.b &&
           initial_law.rho_minus == other.initial_law.rho_minus &&
           initial_law.right_width == other.initial_law.right_width &&
           custom_csv_path == other.custom_csv_path && solver.dt == other.solver.dt &&
           solver.t_end == other.solver.t_end && solver.theta == other.solver.theta &&
           solver.record_every == other.solver.record_every && monitors == other.monitors &&
           out_dir == other.out_dir && seed == other.seed;
}

RunConfig parse_config(const std::string& text) {
    const Table table = parse_table(text);
    Reader r(table);
    RunConfig c;

    c.params = make_params(r.num("params", "lambda", 1.0), r.num("params", "sigma", 1.0));

    c.v_min = r.num("grid", "v_min", c.v_min);
    c.v_max = r.num("grid", "v_max", c.v_max);
    const double nc = r.num("grid", "n_cells", static_cast<double>(c.n_cells));
    if (!(nc >= 3) || nc != std::floor(nc))
        fail("grid.n_cells", "expected an integer >= 3");
    c.n_cells = static_cast<std::size_t>(nc);
    c.stretch = r.num("grid", "stretch", c.stretch);

    c.initial_family = r.str("initial", "family", c.initial_family);
    if (c.initial_family == "gaussian") {
        c.initial_law = sde::InitialLaw::gaussian_law(r.num("initial", "mean", 1.0),
                                                      r.num("initial", "sd", 0.4));
    } else if (c.initial_family == "box") {
        c.initial_law = sde::InitialLaw::box_law(r.num("initial", "a", 0.5),
                                                 r.num("initial", "b", 1.5));
    } else if (c.initial_family == "two_box_debt") {
        c.initial_law = sde::InitialLaw::two_box_debt_law(r.num("initial", "rho_minus", 0.3),
                                                          r.num("initial", "right_width", 1.0));
    } else if (c.initial_family == "equilibrium") {
        c.initial_law = sde::InitialLaw::equilibrium_law();
    } else if (c.initial_family == "custom_csv") {
        c.custom_csv_path = r.str("initial", "path", "");
        if (c.custom_csv_path.empty())
            fail("initial.path", "custom_csv requires a path");
    } else {
        fail("initial.family", "unknown family '" + c.initial_family + "'");
    }

    c.solver.params = c.params;
    c.solver.dt = r.num("solver", "dt", 0.0125);
    c.solver.t_end = r.num("solver", "t_end", 50.0);
    c.solver.theta = r.num("solver", "theta", 1.0);
    const double re = r.num("solver", "record_every", 20.0);
    if (!(re >= 1) || re != std::floor(re))
        fail("solver.record_every", "expected an integer >= 1");
    c.solver.record_every = static_cast<int>(re);

    c.monitors = r.str_list("run", "monitors");
    c.out_dir = r.str("run", "out_dir", c.out_dir);
    const double seed = r.num("run", "seed", 12345.0);
    if (!(seed >= 0) || seed != std::floor(seed))
        fail("run.seed", "expected a nonnegative integer");
    c.seed = static_cast<std::uint64_t>(seed);

    r.check_unknown();

    if (!(c.solver.t_end >= 0.0))
        fail("solver.t_end", "must be nonnegative");
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("config: cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string serialize_config(const RunConfig& c) {
    std::ostringstream out;
    out << "[params]\n";
    out << "lambda = " << format_double(c.params.lambda) << "\n";
    out << "sigma = " << format_double(c.params.sigma) << "\n\n";
    out << "[grid]\n";
    out << "v_min = " << format_double(c.v_min) << "\n";
    out << "v_max = " << format_double(c.v_max) << "\n";
    out << "n_cells = " << c.n_cells << "\n";
    out << "stretch = " << format_double(c.stretch) << "\n\n";
    out << "[initial]\n";
    out << "family = \"" << c.initial_family << "\"\n";
    if (c.initial_family == "gaussian") {
        out << "mean = " << format_double(c.initial_law.mean) << "\n";
        out << "sd = " << format_double(c.initial_law.sd) << "\n";
    } else if (c.initial_family == "box") {
        out << "a = " << format_double(c.initial_law.a) << "\n";
        out << "b = " << format_double(c.initial_law.b) << "\n";
    } else if (c.initial_family == "two_box_debt") {
        out << "rho_minus = " << format_double(c.initial_law.rho_minus) << "\n";
        out << "right_width = " << format_double(c.initial_law.right_width) << "\n";
    } else if (c.initial_family == "custom_csv") {
        out << "path = \"" << c.custom_csv_path << "\"\n";
    }
    out << "\n[solver]\n";
    out << "dt = " << format_double(c.solver.dt) << "\n";
    out << "t_end = " << format_double(c.solver.t_end) << "\n";
    out << "theta = " << format_double(c.solver.theta) << "\n";
    out << "record_every = " << c.solver.record_every << "\n\n";
    out << "[run]\n";
    out << "monitors = [";
    for (std::size_t i = 0; i < c.monitors.size(); ++i)
        out << (i ? ", " : "") << '"' << c.monitors[i] << '"';
    out << "]\n";
    out << "out_dir = \"" << c.out_dir << "\"\n";
    out << "seed = " << c.seed << "\n";
    return out.str();
}

GridPtr make_grid(const RunConfig& cfg) {
    return build_grid(cfg.v_min, cfg.v_max, cfg.n_cells, cfg.stretch);
}

namespace {

// The continuous initial laws are unit-mass (and, for the debt families,
// unit-mean); their cell-average representation carries an O(h^2)
// representation bias. Re-impose the normalization conditions exactly on
// the discrete state with a tiny positive affine reweighting.
void renormalize(DensityOnGrid& f, bool unit_mean) {
    const Observables o = observables(f);
    if (!(o.mass > 0.0))
        return;
    double a = 1.0 / o.mass, g = 0.0;
    if (unit_mean) {
        const Grid& gr = *f.grid;
        double m2_full = 0.0;
        for (std::size_t i = 0; i < gr.n_cells(); ++i)
            m2_full += gr.centers[i] * gr.centers[i] * f.values[i] * gr.widths[i];
        const double det = o.mass * m2_full - o.mean * o.mean;
        if (std::abs(det) > 1e-12) {
            a = (m2_full - o.mean) / det;
            g = (o.mass - o.mean) / det;
        }
    }
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        const double w = a + g * f.grid->centers[i];
        f.values[i] *= std::max(w, 0.0);
    }
}

} // namespace

DensityOnGrid initial_density(const RunConfig& cfg, const GridPtr& grid) {
    if (cfg.initial_family == "custom_csv") {
        DensityOnGrid f = read_density_csv(cfg.custom_csv_path);
        if (f.grid->centers != grid->centers || f.grid->widths != grid->widths)
            throw std::invalid_argument("initial_density: custom CSV grid does not match [grid] in " +
                                        cfg.custom_csv_path);
        DensityOnGrid out;
        out.grid = grid;
        out.values = f.values;
        return out;
    }
    const auto& law = cfg.initial_law;
    if (law.kind == sde::InitialLaw::Kind::box) {
        DensityOnGrid f = project_box(law.a, law.b, 1.0 / (law.b - law.a), grid);
        renormalize(f, false);
        return f;
    }
    if (law.kind == sde::InitialLaw::Kind::two_box_debt) {
        const double center = (1.0 + 0.5 * law.rho_minus) / (1.0 - law.rho_minus);
        DensityOnGrid left = project_box(-1.0, 0.0, law.rho_minus, grid);
        DensityOnGrid right = project_box(center - 0.5 * law.right_width,
                                          center + 0.5 * law.right_width,
                                          (1.0 - law.rho_minus) / law.right_width, grid);
        for (std::size_t i = 0; i < left.values.size(); ++i)
            left.values[i] += right.values[i];
        renormalize(left, true);
        return left;
    }
    DensityOnGrid f = project([&](double v) { return law.density(cfg.params, v); }, grid);
    const bool unit_mean = (law.kind == sde::InitialLaw::Kind::gaussian && law.mean == 1.0) ||
                           law.kind == sde::InitialLaw::Kind::equilibrium;
    renormalize(f, unit_mean);
    return f;
}

} // namespace wealthfpk
