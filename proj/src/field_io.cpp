#include "nodal/field_io.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "nodal/errors.hpp"

namespace nodal {
namespace {

using nlohmann::json;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

double parse_number(std::string_view text, std::string_view key) {
    text = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw ConfigError(fmt::format("field key '{}': cannot parse number '{}'", key, text));
    }
    return v;
}

long long parse_integer(std::string_view text, std::string_view key) {
    const double v = parse_number(text, key);
    if (v != static_cast<double>(static_cast<long long>(v))) {
        throw ConfigError(fmt::format("field key '{}': expected an integer, got '{}'", key, text));
    }
    return static_cast<long long>(v);
}

std::uint64_t parse_unsigned(std::string_view text, std::string_view key) {
    text = trim(text);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw ConfigError(fmt::format("field key '{}': expected an unsigned integer, got '{}'", key, text));
    }
    return v;
}

std::vector<double> parse_tuple(std::string_view text, std::string_view key) {
    text = trim(text);
    if (!text.empty() && text.front() == '(') {
        if (text.back() != ')') throw ConfigError(fmt::format("field key '{}': unterminated tuple '{}'", key, text));
        text = text.substr(1, text.size() - 2);
    }
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t comma = text.find(',', start);
        const auto piece = text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        out.push_back(parse_number(piece, key));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    if (out.empty() || out.size() > kMaxDim) {
        throw ConfigError(fmt::format("field key '{}': tuple must have 1..3 entries", key));
    }
    return out;
}

// Splits "k=(1,0),a=1,b=0" at top-level commas into key/value pairs.
std::map<std::string, std::string, std::less<>> parse_group(std::string_view group) {
    std::map<std::string, std::string, std::less<>> kv;
    int depth = 0;
    std::size_t start = 0;
    auto flush = [&](std::size_t end) {
        const auto item = trim(group.substr(start, end - start));
        if (item.empty()) return;
        const auto eq = item.find('=');
        if (eq == std::string_view::npos) throw ConfigError(fmt::format("field term item '{}' lacks '='", item));
        const std::string key(trim(item.substr(0, eq)));
        if (kv.count(key)) throw ConfigError(fmt::format("field key '{}' given twice in one term", key));
        kv.emplace(key, std::string(trim(item.substr(eq + 1))));
    };
    for (std::size_t i = 0; i < group.size(); ++i) {
        if (group[i] == '(') ++depth;
        if (group[i] == ')') --depth;
        if (group[i] == ',' && depth == 0) {
            flush(i);
            start = i + 1;
        }
    }
    flush(group.size());
    return kv;
}

void reject_unknown(const std::map<std::string, std::string, std::less<>>& kv,
                    std::initializer_list<std::string_view> allowed, std::string_view type) {
    for (const auto& [key, value] : kv) {
        bool ok = false;
        for (auto a : allowed) ok = ok || key == a;
        if (!ok) throw ConfigError(fmt::format("unknown key '{}' for {} field", key, type));
    }
}

const std::string& require(const std::map<std::string, std::string, std::less<>>& kv, std::string_view key,
                           std::string_view type) {
    const auto it = kv.find(key);
    if (it == kv.end()) throw ConfigError(fmt::format("{} field: missing key '{}'", type, key));
    return it->second;
}

double optional_number(const std::map<std::string, std::string, std::less<>>& kv, std::string_view key) {
    const auto it = kv.find(key);
    return it == kv.end() ? 0.0 : parse_number(it->second, key);
}

std::vector<std::string_view> split_terms(std::string_view body) {
    std::vector<std::string_view> groups;
    std::size_t start = 0;
    for (;;) {
        const std::size_t semi = body.find(';', start);
        const auto g = trim(body.substr(start, semi == std::string_view::npos ? std::string_view::npos : semi - start));
        if (!g.empty()) groups.push_back(g);
        if (semi == std::string_view::npos) break;
        start = semi + 1;
    }
    return groups;
}

Vector to_vector(const std::vector<double>& v) {
    Vector out(static_cast<int>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<int>(i)] = v[i];
    return out;
}

template <class T>
T get_json(const json& j, const char* key, const char* type) {
    if (!j.contains(key)) throw ConfigError(fmt::format("{} field: missing key '{}'", type, key));
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(fmt::format("{} field: bad value for key '{}': {}", type, key, e.what()));
    }
}

}  // namespace

std::string to_json(const FieldSpec& spec, int indent) {
    json j = std::visit(
        overloaded{
            [](const TrigPolynomial& p) {
                json terms = json::array();
                for (const auto& t : p.terms) {
                    std::vector<double> k(t.k.data(), t.k.data() + t.k.size());
                    terms.push_back({{"k", k}, {"a", t.a}, {"b", t.b}});
                }
                return json{{"type", "trig"}, {"dim", p.dim}, {"terms", terms}};
            },
            [](const SphericalHarmonicSum& s) {
                json terms = json::array();
                for (const auto& t : s.terms) terms.push_back({{"l", t.l}, {"m", t.m}, {"c", t.c}});
                return json{{"type", "sph"}, {"terms", terms}};
            },
            [](const RandomTrig& r) {
                return json{{"type", "random"}, {"dim", r.dim}, {"max_freq", r.max_freq}, {"seed", r.seed}, {"scale", r.scale}};
            },
            [](const Polynomial& p) {
                json terms = json::array();
                for (const auto& t : p.terms) {
                    std::vector<int> e(t.exponents.begin(), t.exponents.begin() + p.dim);
                    terms.push_back({{"e", e}, {"c", t.c}});
                }
                return json{{"type", "poly"}, {"dim", p.dim}, {"terms", terms}};
            },
        },
        spec);
    return j.dump(indent);
}

FieldSpec field_from_json(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(fmt::format("field JSON does not parse: {}", e.what()));
    }
    if (!j.is_object()) throw ConfigError("field JSON must be an object");
    const auto type = get_json<std::string>(j, "type", "field");

    if (type == "trig") {
        TrigPolynomial p;
        p.dim = get_json<int>(j, "dim", "trig");
        for (const auto& t : get_json<json>(j, "terms", "trig")) {
            TrigTerm term;
            term.k = to_vector(get_json<std::vector<double>>(t, "k", "trig"));
            term.a = t.value("a", 0.0);
            term.b = t.value("b", 0.0);
            p.terms.push_back(std::move(term));
        }
        return p;
    }
    if (type == "sph") {
        SphericalHarmonicSum s;
        for (const auto& t : get_json<json>(j, "terms", "sph")) {
            s.terms.push_back({get_json<int>(t, "l", "sph"), get_json<int>(t, "m", "sph"), get_json<double>(t, "c", "sph")});
        }
        return s;
    }
    if (type == "random") {
        RandomTrig r;
        r.dim = get_json<int>(j, "dim", "random");
        r.max_freq = get_json<int>(j, "max_freq", "random");
        r.seed = get_json<std::uint64_t>(j, "seed", "random");
        r.scale = j.value("scale", 1.0);
        return r;
    }
    if (type == "poly") {
        Polynomial p;
        p.dim = get_json<int>(j, "dim", "poly");
        for (const auto& t : get_json<json>(j, "terms", "poly")) {
            PolyTerm term;
            const auto e = get_json<std::vector<int>>(t, "e", "poly");
            if (e.size() > kMaxDim) throw ConfigError("poly exponent vector longer than 3");
            std::copy(e.begin(), e.end(), term.exponents.begin());
            term.c = get_json<double>(t, "c", "poly");
            p.terms.push_back(term);
        }
        return p;
    }
    throw ConfigError(fmt::format("unknown field type '{}'", type));
}

FieldSpec parse_field(std::string_view text) {
    text = trim(text);
    if (!text.empty() && text.front() == '{') return field_from_json(text);

    const auto colon = text.find(':');
    if (colon == std::string_view::npos) throw ConfigError(fmt::format("field '{}' lacks a 'type:' prefix", text));
    const auto type = trim(text.substr(0, colon));
    auto body = trim(text.substr(colon + 1));
    if (body.size() < 2 || body.front() != '[' || body.back() != ']') {
        throw ConfigError(fmt::format("field body must be enclosed in [ ], got '{}'", body));
    }
    body = body.substr(1, body.size() - 2);
    const auto groups = split_terms(body);

    if (type == "trig") {
        TrigPolynomial p;
        p.dim = 0;
        for (const auto g : groups) {
            const auto kv = parse_group(g);
            reject_unknown(kv, {"k", "a", "b"}, "trig");
            TrigTerm term;
            term.k = to_vector(parse_tuple(require(kv, "k", "trig"), "k"));
            term.a = optional_number(kv, "a");
            term.b = optional_number(kv, "b");
            if (p.dim == 0) p.dim = static_cast<int>(term.k.size());
            if (term.k.size() != p.dim) throw ConfigError("field key 'k': terms disagree on dimension");
            p.terms.push_back(std::move(term));
        }
        if (p.terms.empty()) throw ConfigError("trig field has no terms");
        return p;
    }
    if (type == "sph") {
        SphericalHarmonicSum s;
        for (const auto g : groups) {
            const auto kv = parse_group(g);
            reject_unknown(kv, {"l", "m", "c"}, "sph");
            HarmonicTerm t;
            t.l = static_cast<int>(parse_integer(require(kv, "l", "sph"), "l"));
            t.m = kv.count("m") ? static_cast<int>(parse_integer(kv.find("m")->second, "m")) : 0;
            t.c = kv.count("c") ? parse_number(kv.find("c")->second, "c") : 1.0;
            s.terms.push_back(t);
        }
        if (s.terms.empty()) throw ConfigError("sph field has no terms");
        return s;
    }
    if (type == "random") {
        if (groups.size() != 1) throw ConfigError("random field takes exactly one parameter group");
        const auto kv = parse_group(groups.front());
        reject_unknown(kv, {"dim", "max_freq", "seed", "scale"}, "random");
        RandomTrig r;
        r.dim = static_cast<int>(parse_integer(require(kv, "dim", "random"), "dim"));
        r.max_freq = static_cast<int>(parse_integer(require(kv, "max_freq", "random"), "max_freq"));
        r.seed = parse_unsigned(require(kv, "seed", "random"), "seed");
        r.scale = kv.count("scale") ? parse_number(kv.find("scale")->second, "scale") : 1.0;
        return r;
    }
    if (type == "poly") {
        Polynomial p;
        p.dim = 0;
        for (const auto g : groups) {
            const auto kv = parse_group(g);
            reject_unknown(kv, {"e", "c"}, "poly");
            const auto e = parse_tuple(require(kv, "e", "poly"), "e");
            PolyTerm term;
            for (std::size_t d = 0; d < e.size(); ++d) {
                term.exponents[d] = static_cast<int>(parse_integer(fmt::format("{}", e[d]), "e"));
            }
            term.c = parse_number(require(kv, "c", "poly"), "c");
            if (p.dim == 0) p.dim = static_cast<int>(e.size());
            if (static_cast<int>(e.size()) != p.dim) throw ConfigError("field key 'e': terms disagree on dimension");
            p.terms.push_back(term);
        }
        if (p.terms.empty()) throw ConfigError("poly field has no terms");
        return p;
    }
    throw ConfigError(fmt::format("unknown field type '{}'", type));
}

FieldSpec load_field_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(fmt::format("cannot open field file '{}'", path));
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_field(buf.str());
}

}  // namespace nodal
