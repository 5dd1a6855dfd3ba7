#include "retrial/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "retrial/detail/overloaded.hpp"

namespace retrial {

std::string_view to_string(Mode mode) {
    switch (mode) {
        case Mode::retrial: return "retrial";
        case Mode::standard: return "standard";
        case Mode::markov_oracle: return "markov-oracle";
        case Mode::dm2_oracle: return "dm2-oracle";
    }
    return "unknown";
}

Mode parse_mode(std::string_view text) {
    if (text == "retrial") return Mode::retrial;
    if (text == "standard") return Mode::standard;
    if (text == "markov-oracle" || text == "markov_oracle") return Mode::markov_oracle;
    if (text == "dm2-oracle" || text == "dm2_oracle") return Mode::dm2_oracle;
    throw ConfigError("unknown mode '" + std::string(text) + "'");
}

void ExperimentConfig::validate() const {
    params.validate();
    retrial::validate(arrival);
    if (!(std::isfinite(horizon) && horizon > 0.0)) throw ConfigError("horizon must be positive");
    if (replications < 1) throw ConfigError("replications must be >= 1");
    if (epsilon && !(*epsilon > 0.0)) throw ConfigError("epsilon must be positive");
    if (ctmc_truncation < 0) throw ConfigError("truncation must be >= 0");
    if (orbit_cap < 1) throw ConfigError("orbit_cap must be >= 1");
    if (!(burn_in >= 0.0 && burn_in < horizon)) throw ConfigError("burn_in must lie in [0, horizon)");
    if (threads < 0) throw ConfigError("threads must be >= 0");
}

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::string unquote(std::string_view s) {
    std::string t = trim(s);
    if (t.size() >= 2 && (t.front() == '"' || t.front() == '\'') && t.back() == t.front()) {
        return t.substr(1, t.size() - 2);
    }
    return t;
}

// Strips a trailing `#` comment that is not inside quotes.
std::string strip_comment(std::string_view line) {
    char quote = 0;
    for (std::size_t k = 0; k < line.size(); ++k) {
        const char c = line[k];
        if (quote) {
            if (c == quote) quote = 0;
        } else if (c == '"' || c == '\'') {
            quote = c;
        } else if (c == '#') {
            return std::string(line.substr(0, k));
        }
    }
    return std::string(line);
}

double to_double(const std::string& key, std::string_view raw) {
    const std::string text = unquote(raw);
    double value = 0.0;
    const auto* begin = text.data();
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end) throw ConfigError("key '" + key + "': expected a number, got '" + text + "'");
    return value;
}

long to_long(const std::string& key, std::string_view raw) {
    const double v = to_double(key, raw);
    if (v != std::floor(v) || std::abs(v) > 9e15) throw ConfigError("key '" + key + "': expected an integer");
    return static_cast<long>(v);
}

std::uint64_t to_u64(const std::string& key, std::string_view raw) {
    const std::string text = unquote(raw);
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw ConfigError("key '" + key + "': expected an unsigned integer");
    }
    return value;
}

bool to_bool(const std::string& key, std::string_view raw) {
    const std::string t = unquote(raw);
    if (t == "true" || t == "1" || t == "yes") return true;
    if (t == "false" || t == "0" || t == "no") return false;
    throw ConfigError("key '" + key + "': expected a boolean");
}

std::map<std::string, std::string> parse_inline_table(std::string_view text) {
    std::string body = trim(text);
    if (body.size() < 2 || body.front() != '{' || body.back() != '}') {
        throw ConfigError("expected an inline table {key=value, ...}, got '" + body + "'");
    }
    body = body.substr(1, body.size() - 2);
    std::map<std::string, std::string> fields;
    std::string item;
    char quote = 0;
    auto flush = [&] {
        const std::string t = trim(item);
        item.clear();
        if (t.empty()) return;
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw ConfigError("inline table entry without '=': '" + t + "'");
        fields[trim(t.substr(0, eq))] = unquote(t.substr(eq + 1));
    };
    for (const char c : body) {
        if (quote) {
            if (c == quote) quote = 0;
            item += c;
        } else if (c == '"' || c == '\'') {
            quote = c;
            item += c;
        } else if (c == ',') {
            flush();
        } else {
            item += c;
        }
    }
    flush();
    return fields;
}

}  // namespace

ArrivalSpec parse_arrival(std::string_view text) {
    auto fields = parse_inline_table(text);
    auto take = [&](const std::string& key) -> std::optional<std::string> {
        const auto it = fields.find(key);
        if (it == fields.end()) return std::nullopt;
        std::string v = it->second;
        fields.erase(it);
        return v;
    };
    auto need = [&](const std::string& key) {
        auto v = take(key);
        if (!v) throw ConfigError("arrival: missing field '" + key + "'");
        return to_double("arrival." + key, *v);
    };

    const auto kind = take("kind");
    if (!kind) throw ConfigError("arrival: missing field 'kind'");
    ArrivalSpec spec;
    if (*kind == "poisson") {
        spec = Poisson{need("rate")};
    } else if (*kind == "deterministic") {
        spec = Deterministic{need("interval")};
    } else if (*kind == "alternating_uniform") {
        AlternatingUniform a;
        if (auto g = take("first_gap")) a.first_gap = to_double("arrival.first_gap", *g);
        spec = a;
    } else if (*kind == "renewal") {
        const auto dist = take("distribution");
        if (!dist) throw ConfigError("arrival: renewal needs 'distribution'");
        if (*dist == "exponential") {
            spec = Renewal{ExponentialKernel{need("rate")}};
        } else if (*dist == "uniform") {
            const double lo = need("lo");
            spec = Renewal{UniformKernel{lo, need("hi")}};
        } else if (*dist == "deterministic") {
            spec = Renewal{DeterministicKernel{need("value")}};
        } else {
            throw ConfigError("arrival: unsupported renewal distribution '" + *dist + "'");
        }
    } else {
        throw ConfigError("arrival: unknown kind '" + *kind + "'");
    }
    if (!fields.empty()) throw ConfigError("arrival: unexpected field '" + fields.begin()->first + "'");
    try {
        validate(spec);
    } catch (const InvalidArrivalSpec& e) {
        throw ConfigError(std::string("arrival: ") + e.what());
    }
    return spec;
}

std::string format_arrival(const ArrivalSpec& spec) {
    std::ostringstream os;
    os.precision(17);
    std::visit(detail::overloaded{
                   [&](const Poisson& p) { os << "{kind=\"poisson\", rate=" << p.rate << "}"; },
                   [&](const Deterministic& d) { os << "{kind=\"deterministic\", interval=" << d.interval << "}"; },
                   [&](const AlternatingUniform& a) {
                       os << "{kind=\"alternating_uniform\"";
                       if (a.first_gap) os << ", first_gap=" << *a.first_gap;
                       os << "}";
                   },
                   [&](const Renewal& r) {
                       std::visit(detail::overloaded{
                                      [&](const ExponentialKernel& k) {
                                          os << "{kind=\"renewal\", distribution=\"exponential\", rate=" << k.rate << "}";
                                      },
                                      [&](const UniformKernel& k) {
                                          os << "{kind=\"renewal\", distribution=\"uniform\", lo=" << k.lo
                                             << ", hi=" << k.hi << "}";
                                      },
                                      [&](const DeterministicKernel& k) {
                                          os << "{kind=\"renewal\", distribution=\"deterministic\", value=" << k.value
                                             << "}";
                                      },
                                  },
                                  r.kernel);
                   },
               },
               spec);
    return os.str();
}

ExperimentConfig parse_config(std::istream& in) {
    ExperimentConfig cfg;
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            if (key == "mode") cfg.mode = parse_mode(unquote(value));
            else if (key == "arrival") cfg.arrival = parse_arrival(value);
            else if (key == "m" || key == "servers") cfg.params.servers = static_cast<int>(to_long(key, value));
            else if (key == "mu1") cfg.params.mu1 = to_double(key, value);
            else if (key == "mu2") cfg.params.mu2 = to_double(key, value);
            else if (key == "horizon" || key == "T") cfg.horizon = to_double(key, value);
            else if (key == "seed") cfg.seed = to_u64(key, value);
            else if (key == "replications") cfg.replications = static_cast<int>(to_long(key, value));
            else if (key == "epsilon") cfg.epsilon = to_double(key, value);
            else if (key == "truncation") cfg.ctmc_truncation = to_long(key, value);
            else if (key == "orbit_cap") cfg.orbit_cap = to_long(key, value);
            else if (key == "burn_in") cfg.burn_in = to_double(key, value);
            else if (key == "threads") cfg.threads = static_cast<int>(to_long(key, value));
            else if (key == "trace") cfg.trace = to_bool(key, value);
            else if (key == "out") cfg.output_dir = unquote(value);
            else throw ConfigError("unknown key '" + key + "'");
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    try {
        return parse_config(in);
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

}  // namespace retrial
