#include "config_io.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace refdiff::cli {

using nlohmann::json;

namespace {

const json& require(const json& j, const char* key, const std::string& where) {
    if (!j.is_object() || !j.contains(key)) {
        throw ConfigError(where + ": missing key \"" + key + "\"");
    }
    return j.at(key);
}

double require_number(const json& j, const std::string& where) {
    if (!j.is_number()) {
        throw ConfigError(where + ": expected a number");
    }
    return j.get<double>();
}

std::uint64_t require_u64(const json& j, const std::string& where) {
    if (j.is_number_unsigned()) {
        return j.get<std::uint64_t>();
    }
    if (j.is_number_integer() && j.get<std::int64_t>() >= 0) {
        return static_cast<std::uint64_t>(j.get<std::int64_t>());
    }
    throw ConfigError(where + ": expected a non-negative integer");
}

}  // namespace

std::string format_double(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    if (v == 0.0) {
        return "0";  // no "-0"
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

GridSpec parse_grid(const std::string& text) {
    GridSpec g;
    const auto p1 = text.find(':');
    const auto p2 = p1 == std::string::npos ? p1 : text.find(':', p1 + 1);
    if (p2 == std::string::npos) {
        throw ConfigError("grid must be min:max:count, got \"" + text + "\"");
    }
    try {
        std::size_t used = 0;
        const std::string a = text.substr(0, p1);
        const std::string b = text.substr(p1 + 1, p2 - p1 - 1);
        const std::string c = text.substr(p2 + 1);
        g.min = std::stod(a, &used);
        if (used != a.size()) throw std::invalid_argument(a);
        g.max = std::stod(b, &used);
        if (used != b.size()) throw std::invalid_argument(b);
        const long long n = std::stoll(c, &used);
        if (used != c.size() || n < 0) throw std::invalid_argument(c);
        g.count = static_cast<std::size_t>(n);
    } catch (const std::exception&) {
        throw ConfigError("grid must be min:max:count, got \"" + text + "\"");
    }
    if (g.count < 2 || !(g.min < g.max) || !std::isfinite(g.min) || !std::isfinite(g.max)) {
        throw ConfigError("grid needs finite min < max and count >= 2");
    }
    return g;
}

double number_or_inf(const json& j, const std::string& where) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf" || s == "+inf") return kInf;
        if (s == "-inf") return -kInf;
        throw ConfigError(where + ": expected a number or \"inf\"");
    }
    return require_number(j, where);
}

FuncSpec parse_func(const json& j, const std::string& where) {
    if (j.is_number()) {
        return FuncSpec::constant(j.get<double>());
    }
    if (!j.is_object()) {
        throw ConfigError(where + ": expected a function object or a number");
    }
    const json& kind = require(j, "kind", where);
    if (!kind.is_string()) {
        throw ConfigError(where + ".kind: expected a string");
    }
    const auto k = kind.get<std::string>();
    if (k == "constant") {
        return FuncSpec::constant(require_number(require(j, "c0", where), where + ".c0"));
    }
    if (k == "affine") {
        return FuncSpec::affine(require_number(require(j, "c0", where), where + ".c0"),
                                require_number(require(j, "c1", where), where + ".c1"));
    }
    if (k == "table") {
        const json& pts = require(j, "points", where);
        if (!pts.is_array()) {
            throw ConfigError(where + ".points: expected an array of [x, value] pairs");
        }
        std::vector<std::pair<double, double>> out;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const std::string w = where + ".points[" + std::to_string(i) + "]";
            if (!pts[i].is_array() || pts[i].size() != 2) {
                throw ConfigError(w + ": expected [x, value]");
            }
            out.emplace_back(require_number(pts[i][0], w), require_number(pts[i][1], w));
        }
        return FuncSpec::table(std::move(out));
    }
    throw ConfigError(where + ".kind: unknown function kind \"" + k + "\"");
}

DomainSpec parse_domain(const json& j) {
    const json& kind = require(j, "kind", "domain");
    if (!kind.is_string()) {
        throw ConfigError("domain.kind: expected a string");
    }
    const auto k = kind.get<std::string>();
    if (k == "half_line") return DomainSpec::half_line();
    if (k == "full_line") return DomainSpec::full_line();
    if (k == "interval") return DomainSpec::interval(require_number(require(j, "a", "domain"), "domain.a"));
    throw ConfigError("domain.kind: unknown domain kind \"" + k + "\"");
}

SimConfig parse_sim(const json& j, SimConfig cfg) {
    if (!j.is_object()) {
        throw ConfigError("sim: expected an object");
    }
    for (const auto& [key, v] : j.items()) {
        const std::string w = "sim." + key;
        if (key == "dt") cfg.dt = require_number(v, w);
        else if (key == "horizon") cfg.horizon = require_number(v, w);
        else if (key == "burn_in") cfg.burn_in = require_number(v, w);
        else if (key == "seed") cfg.seed = require_u64(v, w);
        else if (key == "path_count" || key == "paths") cfg.path_count = require_u64(v, w);
        else if (key == "explosion_bound") cfg.explosion_bound = number_or_inf(v, w);
        else if (key == "initial_state") {
            if (v.is_null()) cfg.initial_state.reset();
            else cfg.initial_state = require_number(v, w);
        } else if (key == "scheme") {
            const auto s = v.is_string() ? v.get<std::string>() : std::string();
            if (s == "symmetrized_euler") cfg.scheme = Scheme::SymmetrizedEuler;
            else if (s == "projected_euler") cfg.scheme = Scheme::ProjectedEuler;
            else throw ConfigError(w + ": expected \"symmetrized_euler\" or \"projected_euler\"");
        } else {
            throw ConfigError(w + ": unknown key");
        }
    }
    return cfg;
}

RunConfig parse_run_config(const json& root) {
    if (!root.is_object()) {
        throw ConfigError("config: expected a JSON object");
    }
    const bool bare = root.contains("domain");
    const json& field = bare ? root : require(root, "field", "config");
    RunConfig rc;
    rc.domain = parse_domain(require(field, "domain", "field"));
    const json& segs = require(field, "segments", "field");
    if (!segs.is_array()) {
        throw ConfigError("field.segments: expected an array");
    }
    for (std::size_t i = 0; i < segs.size(); ++i) {
        const std::string w = "segments[" + std::to_string(i) + "]";
        Segment s;
        s.lower = number_or_inf(require(segs[i], "lower", w), w + ".lower");
        s.upper = number_or_inf(require(segs[i], "upper", w), w + ".upper");
        s.b = parse_func(require(segs[i], "b", w), w + ".b");
        s.sigma = parse_func(require(segs[i], "sigma", w), w + ".sigma");
        rc.segments.push_back(std::move(s));
    }
    if (bare) {
        return rc;
    }
    if (root.contains("sim")) {
        rc.sim = parse_sim(root.at("sim"));
    }
    if (root.contains("grid")) {
        const json& g = root.at("grid");
        GridSpec gs;
        gs.min = require_number(require(g, "min", "grid"), "grid.min");
        gs.max = require_number(require(g, "max", "grid"), "grid.max");
        gs.count = require_u64(require(g, "count", "grid"), "grid.count");
        if (gs.count < 2 || !(gs.min < gs.max)) {
            throw ConfigError("grid needs min < max and count >= 2");
        }
        rc.grid = gs;
    }
    if (root.contains("outputs")) {
        const json& o = root.at("outputs");
        if (!o.is_object()) {
            throw ConfigError("outputs: expected an object");
        }
        auto opt = [&](const char* key, std::optional<std::string>& dst) {
            if (o.contains(key)) {
                if (!o.at(key).is_string()) {
                    throw ConfigError(std::string("outputs.") + key + ": expected a path string");
                }
                dst = o.at(key).get<std::string>();
            }
        };
        opt("report", rc.outputs.report);
        opt("csv", rc.outputs.csv);
        opt("hist", rc.outputs.hist);
        opt("out", rc.outputs.out);
        opt("trajectory", rc.outputs.trajectory);
    }
    return rc;
}

json to_json(const FuncSpec& f) {
    switch (f.kind) {
        case FuncKind::Constant:
            return {{"kind", "constant"}, {"c0", f.c0}};
        case FuncKind::Affine:
            return {{"kind", "affine"}, {"c0", f.c0}, {"c1", f.c1}};
        case FuncKind::Table: {
            json pts = json::array();
            for (const auto& [x, v] : f.points) {
                pts.push_back({x, v});
            }
            return {{"kind", "table"}, {"points", pts}};
        }
    }
    return nullptr;
}

json to_json(const DomainSpec& d) {
    switch (d.kind) {
        case DomainKind::HalfLine:
            return {{"kind", "half_line"}};
        case DomainKind::Interval:
            return {{"kind", "interval"}, {"a", d.a}};
        case DomainKind::FullLine:
            return {{"kind", "full_line"}};
    }
    return nullptr;
}

json field_to_json(const DomainSpec& d, const std::vector<Segment>& segments) {
    json segs = json::array();
    for (const auto& s : segments) {
        segs.push_back({{"lower", s.lower}, {"upper", s.upper}, {"b", to_json(s.b)}, {"sigma", to_json(s.sigma)}});
    }
    return {{"domain", to_json(d)}, {"segments", segs}};
}

namespace {

void write(std::ostringstream& os, const json& j, int indent, int depth) {
    const std::string pad = indent > 0 ? std::string(static_cast<std::size_t>(indent * (depth + 1)), ' ') : "";
    const std::string close = indent > 0 ? std::string(static_cast<std::size_t>(indent * depth), ' ') : "";
    const char* nl = indent > 0 ? "\n" : "";
    switch (j.type()) {
        case json::value_t::object: {
            if (j.empty()) {
                os << "{}";
                return;
            }
            os << '{' << nl;
            bool first = true;
            for (const auto& [k, v] : j.items()) {
                if (!first) os << ',' << nl;
                first = false;
                os << pad << json(k).dump() << (indent > 0 ? ": " : ":");
                write(os, v, indent, depth + 1);
            }
            os << nl << close << '}';
            return;
        }
        case json::value_t::array: {
            if (j.empty()) {
                os << "[]";
                return;
            }
            os << '[' << nl;
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i > 0) os << ',' << nl;
                os << pad;
                write(os, j[i], indent, depth + 1);
            }
            os << nl << close << ']';
            return;
        }
        case json::value_t::number_float: {
            const double v = j.get<double>();
            if (std::isfinite(v)) {
                os << format_double(v);
            } else {
                os << '"' << format_double(v) << '"';
            }
            return;
        }
        default:
            os << j.dump();
            return;
    }
}

}  // namespace

std::string dump_json(const json& j, int indent) {
    std::ostringstream os;
    write(os, j, indent, 0);
    os << '\n';
    return os.str();
}

}  // namespace refdiff::cli
