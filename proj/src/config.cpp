#include "nullfold/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "nullfold/csvio.hpp"

namespace nullfold {

namespace {

struct RawValue {
    enum Kind { kNumber, kString, kBool, kArray };
    Kind kind = kNumber;
    std::string raw;                 // untouched token, numbers only
    double number = 0.0;
    std::string text;
    bool flag = false;
    std::vector<RawValue> items;
    int line = 0;
};

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

/// Cuts a trailing comment; '#' inside a quoted string does not count.
std::string strip_comment(const std::string& line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (c == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
        if (c == '#' && !in_string) return line.substr(0, i);
    }
    return line;
}

bool valid_key(const std::string& key) {
    if (key.empty()) return false;
    for (char c : key) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') {
            return false;
        }
    }
    return true;
}

std::string unescape(const std::string& body, int line) {
    std::string out;
    for (std::size_t i = 0; i < body.size(); ++i) {
        char c = body[i];
        if (c != '\\') {
            out.push_back(c);
            continue;
        }
        if (i + 1 >= body.size()) {
            throw ConfigError("dangling escape in string", line);
        }
        char e = body[++i];
        switch (e) {
            case '"': out.push_back('"'); break;
            case '\\': out.push_back('\\'); break;
            case 'n': out.push_back('\n'); break;
            case 't': out.push_back('\t'); break;
            default:
                throw ConfigError(std::string("unsupported escape \\") + e, line);
        }
    }
    return out;
}

RawValue parse_scalar(const std::string& token, int line) {
    RawValue v;
    v.line = line;
    if (token.size() >= 2 && token.front() == '"' && token.back() == '"') {
        v.kind = RawValue::kString;
        v.text = unescape(token.substr(1, token.size() - 2), line);
        return v;
    }
    if (token == "true" || token == "false") {
        v.kind = RawValue::kBool;
        v.flag = (token == "true");
        return v;
    }
    const char* begin = token.c_str();
    char* end = nullptr;
    double num = std::strtod(begin, &end);
    if (end == begin || *end != '\0') {
        throw ConfigError("cannot parse value '" + token + "'", line);
    }
    v.kind = RawValue::kNumber;
    v.raw = token;
    v.number = num;
    return v;
}

std::vector<std::string> split_top_level(const std::string& body, int line) {
    std::vector<std::string> parts;
    std::string current;
    bool in_string = false;
    for (std::size_t i = 0; i < body.size(); ++i) {
        char c = body[i];
        if (c == '"' && (i == 0 || body[i - 1] != '\\')) in_string = !in_string;
        if (c == ',' && !in_string) {
            parts.push_back(trim(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    if (in_string) throw ConfigError("unterminated string in array", line);
    current = trim(current);
    if (!current.empty()) parts.push_back(current);
    return parts;
}

RawValue parse_value(const std::string& token, int line) {
    if (!token.empty() && token.front() == '[') {
        if (token.back() != ']') {
            throw ConfigError("array must close on the same line", line);
        }
        RawValue v;
        v.kind = RawValue::kArray;
        v.line = line;
        for (const std::string& part :
             split_top_level(token.substr(1, token.size() - 2), line)) {
            if (part.empty()) {
                throw ConfigError("empty array element", line);
            }
            v.items.push_back(parse_scalar(part, line));
        }
        return v;
    }
    return parse_scalar(token, line);
}

std::map<std::string, RawValue> parse_flat_toml(const std::string& text) {
    std::map<std::string, RawValue> values;
    std::istringstream stream(text);
    std::string line;
    int line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        std::string body = trim(strip_comment(line));
        if (body.empty()) continue;
        std::size_t eq = body.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("expected 'key = value'", line_no);
        }
        std::string key = trim(body.substr(0, eq));
        std::string token = trim(body.substr(eq + 1));
        if (!valid_key(key)) {
            throw ConfigError("invalid key '" + key + "'", line_no, key);
        }
        if (token.empty()) {
            throw ConfigError("missing value", line_no, key);
        }
        if (values.count(key)) {
            throw ConfigError("duplicate key '" + key + "'", line_no, key);
        }
        RawValue v = parse_value(token, line_no);
        v.line = line_no;
        values.emplace(key, std::move(v));
    }
    return values;
}

double as_number(const RawValue& v, const std::string& key) {
    if (v.kind != RawValue::kNumber) {
        throw ConfigError("'" + key + "' must be a number", v.line, key);
    }
    return v.number;
}

int as_int(const RawValue& v, const std::string& key) {
    double num = as_number(v, key);
    if (num != std::floor(num)) {
        throw ConfigError("'" + key + "' must be an integer", v.line, key);
    }
    return static_cast<int>(num);
}

std::uint64_t as_u64(const RawValue& v, const std::string& key) {
    if (v.kind != RawValue::kNumber || v.raw.empty() || v.raw[0] == '-' ||
        v.raw.find_first_of(".eE") != std::string::npos) {
        throw ConfigError("'" + key + "' must be an unsigned integer", v.line, key);
    }
    // Re-parse the raw token so 64-bit seeds survive without rounding.
    char* end = nullptr;
    unsigned long long parsed = std::strtoull(v.raw.c_str(), &end, 10);
    if (end == v.raw.c_str() || *end != '\0') {
        throw ConfigError("'" + key + "' must be an unsigned integer", v.line, key);
    }
    return static_cast<std::uint64_t>(parsed);
}

std::string as_string(const RawValue& v, const std::string& key) {
    if (v.kind != RawValue::kString) {
        throw ConfigError("'" + key + "' must be a string", v.line, key);
    }
    return v.text;
}

Vec as_vec(const RawValue& v, const std::string& key) {
    if (v.kind != RawValue::kArray) {
        throw ConfigError("'" + key + "' must be an array", v.line, key);
    }
    Vec out(static_cast<int>(v.items.size()));
    for (std::size_t i = 0; i < v.items.size(); ++i) {
        out(static_cast<int>(i)) = as_number(v.items[i], key);
    }
    return out;
}

std::vector<int> as_int_list(const RawValue& v, const std::string& key) {
    if (v.kind != RawValue::kArray) {
        throw ConfigError("'" + key + "' must be an array", v.line, key);
    }
    std::vector<int> out;
    for (const RawValue& item : v.items) out.push_back(as_int(item, key));
    return out;
}

std::vector<std::string> as_string_list(const RawValue& v, const std::string& key) {
    if (v.kind != RawValue::kArray) {
        throw ConfigError("'" + key + "' must be an array", v.line, key);
    }
    std::vector<std::string> out;
    for (const RawValue& item : v.items) out.push_back(as_string(item, key));
    return out;
}

/// "component coeff p0 .. p{dim-1}" for fields, "coeff p0 .. p{dim-1}" for
/// scalars.
InlineTerm parse_term(const std::string& text, int dim, bool has_component,
                      const std::string& key, int line) {
    std::istringstream stream(text);
    std::vector<std::string> tokens;
    std::string token;
    while (stream >> token) tokens.push_back(token);
    const std::size_t expected = static_cast<std::size_t>(dim) + (has_component ? 2 : 1);
    if (tokens.size() != expected) {
        throw ConfigError("'" + key + "' term '" + text + "' needs " +
                              std::to_string(expected) + " entries",
                          line, key);
    }
    InlineTerm term;
    std::size_t pos = 0;
    auto next_number = [&]() {
        const std::string& tok = tokens[pos++];
        char* end = nullptr;
        double value = std::strtod(tok.c_str(), &end);
        if (end == tok.c_str() || *end != '\0') {
            throw ConfigError("'" + key + "' term has non-numeric entry '" + tok + "'",
                              line, key);
        }
        return value;
    };
    if (has_component) {
        double comp = next_number();
        if (comp != std::floor(comp) || comp < 0 || comp >= dim) {
            throw ConfigError("'" + key + "' component out of range", line, key);
        }
        term.component = static_cast<int>(comp);
    }
    term.coeff = next_number();
    for (int j = 0; j < dim; ++j) {
        double p = next_number();
        if (p != std::floor(p) || p < 0) {
            throw ConfigError("'" + key + "' powers must be nonnegative integers",
                              line, key);
        }
        term.powers.push_back(static_cast<int>(p));
    }
    return term;
}

double term_value(const InlineTerm& term, const Vec& x) {
    double value = term.coeff;
    for (std::size_t j = 0; j < term.powers.size(); ++j) {
        for (int p = 0; p < term.powers[j]; ++p) value *= x(static_cast<int>(j));
    }
    return value;
}

double term_partial(const InlineTerm& term, const Vec& x, int k) {
    const int pk = term.powers[static_cast<std::size_t>(k)];
    if (pk == 0) return 0.0;
    double value = term.coeff * pk;
    for (std::size_t j = 0; j < term.powers.size(); ++j) {
        const int reps = static_cast<int>(j) == k ? term.powers[j] - 1 : term.powers[j];
        for (int p = 0; p < reps; ++p) value *= x(static_cast<int>(j));
    }
    return value;
}

std::string render_scalar_term(const InlineTerm& term, bool with_component) {
    std::ostringstream out;
    if (with_component) out << term.component << ' ';
    out << format_double(term.coeff);
    for (int p : term.powers) out << ' ' << p;
    return out.str();
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
    std::map<std::string, RawValue> values = parse_flat_toml(text);
    ExperimentConfig config;
    InlineSystem inline_sys;
    bool saw_inline = false;

    auto take = [&](const std::string& key) -> const RawValue* {
        auto it = values.find(key);
        return it == values.end() ? nullptr : &it->second;
    };

    if (const RawValue* v = take("example")) config.example = as_string(*v, "example");
    if (const RawValue* v = take("t_final")) config.t_final = as_number(*v, "t_final");
    if (const RawValue* v = take("dt")) config.dt = as_number(*v, "dt");
    if (const RawValue* v = take("t_transient")) {
        config.t_transient = as_number(*v, "t_transient");
    }
    if (const RawValue* v = take("t_sample")) config.t_sample = as_number(*v, "t_sample");
    if (const RawValue* v = take("eta")) config.eta = as_number(*v, "eta");
    if (const RawValue* v = take("ensemble")) config.ensemble = as_int(*v, "ensemble");
    if (const RawValue* v = take("seed")) config.seed = as_u64(*v, "seed");
    if (const RawValue* v = take("tol_scale")) config.tol_scale = as_number(*v, "tol_scale");
    if (const RawValue* v = take("out")) config.out_dir = as_string(*v, "out");
    if (const RawValue* v = take("x0")) config.x0 = as_vec(*v, "x0");
    if (const RawValue* v = take("box_lo")) config.box_lo = as_vec(*v, "box_lo");
    if (const RawValue* v = take("box_hi")) config.box_hi = as_vec(*v, "box_hi");

    if (const RawValue* v = take("dim")) {
        inline_sys.dim = as_int(*v, "dim");
        saw_inline = true;
    }
    if (const RawValue* v = take("form")) {
        Vec diag = as_vec(*v, "form");
        inline_sys.form_diag.assign(diag.data(), diag.data() + diag.size());
        saw_inline = true;
    }
    if (const RawValue* v = take("periodic")) {
        inline_sys.periodic = as_int_list(*v, "periodic");
        saw_inline = true;
    }

    std::vector<std::string> field_texts, psi_texts;
    int field_line = 0, psi_line = 0;
    if (const RawValue* v = take("field")) {
        field_texts = as_string_list(*v, "field");
        field_line = v->line;
        saw_inline = true;
    }
    if (const RawValue* v = take("psi")) {
        psi_texts = as_string_list(*v, "psi");
        psi_line = v->line;
        saw_inline = true;
    }

    static const std::vector<std::string> known = {
        "example", "t_final", "dt", "t_transient", "t_sample", "eta", "ensemble",
        "seed", "tol_scale", "out", "x0", "box_lo", "box_hi", "dim", "form",
        "periodic", "field", "psi"};
    for (const auto& [key, value] : values) {
        if (std::find(known.begin(), known.end(), key) != known.end()) continue;
        if (key.rfind("tol_", 0) == 0 && key.size() > 4) {
            double tol = as_number(value, key);
            if (!(tol > 0.0)) {
                throw ConfigError("'" + key + "' must be positive", value.line, key);
            }
            config.tolerances[key.substr(4)] = tol;
            continue;
        }
        throw ConfigError("unknown key '" + key + "'", value.line, key);
    }

    if (saw_inline) {
        if (inline_sys.dim < 1) {
            throw ConfigError("inline system needs 'dim' >= 1", 0, "dim");
        }
        if (static_cast<int>(inline_sys.form_diag.size()) != inline_sys.dim) {
            throw ConfigError("'form' must list one diagonal entry per coordinate", 0,
                              "form");
        }
        for (int idx : inline_sys.periodic) {
            if (idx < 0 || idx >= inline_sys.dim) {
                throw ConfigError("'periodic' index out of range", 0, "periodic");
            }
        }
        if (field_texts.empty()) {
            throw ConfigError("inline system needs 'field' terms", 0, "field");
        }
        for (const std::string& t : field_texts) {
            inline_sys.field_terms.push_back(
                parse_term(t, inline_sys.dim, true, "field", field_line));
        }
        for (const std::string& t : psi_texts) {
            inline_sys.psi_terms.push_back(
                parse_term(t, inline_sys.dim, false, "psi", psi_line));
        }
        if (inline_sys.psi_terms.empty()) {
            throw ConfigError("inline system needs 'psi' terms", 0, "psi");
        }
        if (!config.x0 || config.x0->size() != inline_sys.dim) {
            throw ConfigError("inline system needs 'x0' with one entry per coordinate",
                              0, "x0");
        }
        if (!config.box_lo || !config.box_hi ||
            config.box_lo->size() != inline_sys.dim ||
            config.box_hi->size() != inline_sys.dim) {
            throw ConfigError("inline system needs 'box_lo'/'box_hi' bounds", 0,
                              "box_lo");
        }
        inline_sys.x0 = *config.x0;
        inline_sys.box_lo = *config.box_lo;
        inline_sys.box_hi = *config.box_hi;
        inline_sys.corank = static_cast<int>(
            std::count(inline_sys.form_diag.begin(), inline_sys.form_diag.end(), 0.0));
        // A leaf is compact exactly when every null coordinate is periodic.
        inline_sys.leaves_compact = true;
        for (int j = 0; j < inline_sys.dim; ++j) {
            if (inline_sys.form_diag[static_cast<std::size_t>(j)] == 0.0 &&
                std::find(inline_sys.periodic.begin(), inline_sys.periodic.end(), j) ==
                    inline_sys.periodic.end()) {
                inline_sys.leaves_compact = false;
            }
        }
        if (!config.example.empty()) inline_sys.name = config.example;
        config.example = inline_sys.name;
        config.inline_system = std::move(inline_sys);
    } else if (config.example.empty()) {
        throw ConfigError("config needs 'example' (or an inline system)", 0, "example");
    }

    if (!std::isnan(config.dt) && !(config.dt > 0.0)) {
        const RawValue* v = take("dt");
        throw ConfigError("'dt' must be positive", v ? v->line : 0, "dt");
    }
    if (!std::isnan(config.t_final) && !(config.t_final > 0.0)) {
        const RawValue* v = take("t_final");
        throw ConfigError("'t_final' must be positive", v ? v->line : 0, "t_final");
    }
    if (!std::isnan(config.t_sample) && !(config.t_sample > 0.0)) {
        const RawValue* v = take("t_sample");
        throw ConfigError("'t_sample' must be positive", v ? v->line : 0, "t_sample");
    }
    if (!std::isnan(config.t_transient) && config.t_transient < 0.0) {
        const RawValue* v = take("t_transient");
        throw ConfigError("'t_transient' must be nonnegative", v ? v->line : 0,
                          "t_transient");
    }
    if (!std::isnan(config.t_transient) && !std::isnan(config.t_final) &&
        !(config.t_transient < config.t_final)) {
        const RawValue* v = take("t_transient");
        throw ConfigError("'t_transient' must be below 't_final'", v ? v->line : 0,
                          "t_transient");
    }
    if (!std::isnan(config.eta) && !(config.eta > 0.0)) {
        const RawValue* v = take("eta");
        throw ConfigError("'eta' must be positive", v ? v->line : 0, "eta");
    }
    if (config.ensemble < 16) {
        const RawValue* v = take("ensemble");
        throw ConfigError("'ensemble' must be at least 16", v ? v->line : 0, "ensemble");
    }
    if (!(config.tol_scale > 0.0)) {
        const RawValue* v = take("tol_scale");
        throw ConfigError("'tol_scale' must be positive", v ? v->line : 0, "tol_scale");
    }
    return config;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file: " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str());
}

ExampleSystem materialize_inline(const InlineSystem& sys) {
    ExampleSystem example;
    example.name = sys.name;

    const int dim = sys.dim;
    Mat form = Mat::Zero(dim, dim);
    for (int j = 0; j < dim; ++j) form(j, j) = sys.form_diag[static_cast<std::size_t>(j)];

    example.manifold.mode = ManifoldMode::intrinsic;
    example.manifold.chart_dim = dim;
    example.manifold.form_field = [form](const Vec&) { return form; };
    example.manifold.periodic_coords = sys.periodic;
    example.manifold.declared_corank = sys.corank;

    const std::vector<InlineTerm> field_terms = sys.field_terms;
    example.field.name = sys.name + " field";
    example.field.eval = [field_terms, dim](const Vec& x) {
        Vec v = Vec::Zero(dim);
        for (const InlineTerm& term : field_terms) {
            v(term.component) += term_value(term, x);
        }
        return v;
    };
    example.field.jacobian = [field_terms, dim](const Vec& x) {
        Mat j = Mat::Zero(dim, dim);
        for (const InlineTerm& term : field_terms) {
            for (int k = 0; k < dim; ++k) {
                j(term.component, k) += term_partial(term, x, k);
            }
        }
        return j;
    };

    const std::vector<InlineTerm> psi_terms = sys.psi_terms;
    example.psi.name = sys.name + " functional";
    example.psi.value = [psi_terms](const Vec& x) {
        double value = 0.0;
        for (const InlineTerm& term : psi_terms) value += term_value(term, x);
        return value;
    };
    example.psi.differential = [psi_terms, dim](const Vec& x) {
        Vec g = Vec::Zero(dim);
        for (const InlineTerm& term : psi_terms) {
            for (int k = 0; k < dim; ++k) g(k) += term_partial(term, x, k);
        }
        return g;
    };
    example.psi.lower_bound = -std::numeric_limits<double>::infinity();

    // With a constant diagonal form the null distribution is spanned by the
    // coordinate axes of the zero entries, so the foliation is explicit.
    std::vector<int> null_coords, reduced_coords;
    for (int j = 0; j < dim; ++j) {
        if (sys.form_diag[static_cast<std::size_t>(j)] == 0.0) {
            null_coords.push_back(j);
        } else {
            reduced_coords.push_back(j);
        }
    }
    for (int j : null_coords) {
        example.foliation.generators.push_back([j, dim](const Vec&) {
            Vec e = Vec::Zero(dim);
            e(j) = 1.0;
            return e;
        });
    }
    const int red_dim = static_cast<int>(reduced_coords.size());
    Mat selector = Mat::Zero(red_dim, dim);
    for (int r = 0; r < red_dim; ++r) {
        selector(r, reduced_coords[static_cast<std::size_t>(r)]) = 1.0;
    }
    example.foliation.quotient_map = [selector](const Vec& x) -> Vec {
        return selector * x;
    };
    example.foliation.quotient_differential = [selector](const Vec&) { return selector; };
    for (int r = 0; r < red_dim; ++r) {
        const int coord = reduced_coords[static_cast<std::size_t>(r)];
        if (std::find(sys.periodic.begin(), sys.periodic.end(), coord) !=
            sys.periodic.end()) {
            example.foliation.quotient_periodic.push_back(r);
        }
    }
    example.foliation.leaves_compact = sys.leaves_compact;

    ExampleFacts& facts = example.facts;
    facts.state_dim = dim;
    facts.manifold_dim = dim;
    facts.corank = sys.corank;
    facts.leaves_compact = sys.leaves_compact;
    facts.has_oracles = false;
    facts.pointwise_dissipation = true;
    facts.c_expected = std::numeric_limits<double>::quiet_NaN();
    facts.default_x0 = sys.x0;
    facts.default_t_final = 20.0;
    facts.default_dt = 1e-2;
    facts.default_t_transient = 10.0;
    facts.default_t_sample = 10.0;
    facts.ensemble_dt = 1e-2;
    facts.box_lo = sys.box_lo;
    facts.box_hi = sys.box_hi;
    facts.spectral_point = sys.x0;
    facts.energy_tail_lo = 10.0;
    facts.energy_tail_hi = 20.0;
    // Coarse clustering keeps drift along compact leaves from fragmenting the
    // tail; limit representatives are still judged pointwise.
    facts.omega_cluster_radius = 0.15;
    const Vec lo = sys.box_lo, hi = sys.box_hi;
    const std::vector<int> periodic = sys.periodic;
    facts.sampler = [lo, hi, periodic](Rng& rng) {
        Vec x = rng.uniform_vec(lo, hi);
        return wrap_state(x, periodic);
    };
    return example;
}

std::string canonical_config_text(const ExperimentConfig& config) {
    std::vector<std::string> lines;
    auto add = [&](const std::string& key, const std::string& rendered) {
        lines.push_back(key + " = " + rendered);
    };
    auto add_num = [&](const std::string& key, double value) {
        add(key, format_double(value));
    };
    auto add_vec = [&](const std::string& key, const Vec& v) {
        std::string body = "[";
        for (int j = 0; j < v.size(); ++j) {
            body += (j ? ", " : "") + format_double(v(j));
        }
        add(key, body + "]");
    };

    add("example", '"' + config.example + '"');
    add_num("t_final", config.t_final);
    add_num("dt", config.dt);
    add_num("t_transient", config.t_transient);
    add_num("t_sample", config.t_sample);
    add_num("eta", config.eta);
    add("ensemble", std::to_string(config.ensemble));
    add("seed", std::to_string(config.seed));
    add_num("tol_scale", config.tol_scale);
    for (const auto& [name, value] : config.tolerances) {
        add_num("tol_" + name, value);
    }
    if (config.x0) add_vec("x0", *config.x0);
    if (config.box_lo) add_vec("box_lo", *config.box_lo);
    if (config.box_hi) add_vec("box_hi", *config.box_hi);

    if (config.inline_system) {
        const InlineSystem& sys = *config.inline_system;
        add("dim", std::to_string(sys.dim));
        std::string form = "[";
        for (std::size_t j = 0; j < sys.form_diag.size(); ++j) {
            form += (j ? ", " : "") + format_double(sys.form_diag[j]);
        }
        add("form", form + "]");
        std::string periodic = "[";
        for (std::size_t j = 0; j < sys.periodic.size(); ++j) {
            periodic += (j ? ", " : "") + std::to_string(sys.periodic[j]);
        }
        add("periodic", periodic + "]");
        std::string field = "[";
        for (std::size_t j = 0; j < sys.field_terms.size(); ++j) {
            field += (j ? ", " : "") +
                     ('"' + render_scalar_term(sys.field_terms[j], true) + '"');
        }
        add("field", field + "]");
        std::string psi = "[";
        for (std::size_t j = 0; j < sys.psi_terms.size(); ++j) {
            psi += (j ? ", " : "") +
                   ('"' + render_scalar_term(sys.psi_terms[j], false) + '"');
        }
        add("psi", psi + "]");
    }

    std::sort(lines.begin(), lines.end());
    std::string text;
    for (const std::string& line : lines) {
        text += line;
        text += '\n';
    }
    return text;
}

}  // namespace nullfold
