#include "mwlp/config.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

#include "mwlp/error.hpp"

namespace mwlp {

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
    std::vector<std::string_view> out;
    while (true) {
        const auto c = s.find(',');
        out.push_back(trim(s.substr(0, c)));
        if (c == std::string_view::npos) break;
        s = s.substr(c + 1);
    }
    return out;
}

std::optional<double> parse_double(std::string_view s) {
    if (s == "inf" || s == "infinity") return INFINITY;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

template <class Int>
std::optional<Int> parse_int(std::string_view s) {
    Int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

// Raw weight keys; the descriptor is built once n is known.
struct WeightKeys {
    std::string kind = "identity";
    int N = 2;
    std::vector<double> alpha;
    double rate = 1.0;
    std::vector<int> plane{0, 1};
    std::string file;
};

using Setter = std::function<bool(std::string_view)>;

Setter real(double& x) {
    return [&x](std::string_view v) {
        const auto d = parse_double(v);
        if (d) x = *d;
        return d.has_value();
    };
}

template <class Int>
Setter integer(Int& x) {
    return [&x](std::string_view v) {
        const auto d = parse_int<Int>(v);
        if (d) x = *d;
        return d.has_value();
    };
}

Setter word(std::string& x) {
    return [&x](std::string_view v) {
        x = std::string(v);
        return !v.empty();
    };
}

Setter reals(std::vector<double>& x) {
    return [&x](std::string_view v) {
        std::vector<double> out;
        for (auto item : split_list(v)) {
            const auto d = parse_double(item);
            if (!d) return false;
            out.push_back(*d);
        }
        x = std::move(out);
        return true;
    };
}

Setter integers(std::vector<int>& x) {
    return [&x](std::string_view v) {
        std::vector<int> out;
        for (auto item : split_list(v)) {
            const auto d = parse_int<int>(item);
            if (!d) return false;
            out.push_back(*d);
        }
        x = std::move(out);
        return true;
    };
}

Setter profile(BumpProfile& x) {
    return [&x](std::string_view v) {
        try {
            x = bump_profile_from_string(std::string(v));
            return true;
        } catch (const Error&) {
            return false;
        }
    };
}

void add_grid(std::map<std::string, Setter>& keys, const std::string& prefix, GridConfig& g) {
    keys[prefix + "T"] = integer(g.T);
    keys[prefix + "m"] = integer(g.m);
    keys[prefix + "shift"] = real(g.shift);
}

void add_partition(std::map<std::string, Setter>& keys, const std::string& prefix, PartitionSpec& s) {
    keys[prefix + "c1"] = real(s.c1);
    keys[prefix + "c2"] = real(s.c2);
    keys[prefix + "j_lo"] = integer(s.j_lo);
    keys[prefix + "j_hi"] = integer(s.j_hi);
    keys[prefix + "profile"] = profile(s.profile);
    keys[prefix + "shape"] = real(s.shape);
}

void check_grid(const GridConfig& g, int n, const std::string& name, std::vector<std::string>& errors) {
    if (g.T <= 0 || g.T % 2 != 0) errors.push_back(name + ": T must be a positive even integer");
    if (g.m <= 0 || g.m % 2 != 0) errors.push_back(name + ": m must be a positive even integer");
    if (g.T > 0 && g.m % g.T != 0) errors.push_back(name + ": m must be divisible by T");
    if (!(g.shift >= 0.0 && g.shift < 1.0)) errors.push_back(name + ": shift must lie in [0, 1)");
    if (n >= 1 && n <= 3 && g.m > 0 && std::pow(static_cast<double>(g.m), n) > 1.5e8)
        errors.push_back(name + ": m^n exceeds the desk-scale limit of 1.5e8 nodes");
}

void check_partition(const PartitionSpec& s, const std::string& name, std::vector<std::string>& errors) {
    if (!(s.c1 > 0.0 && s.c1 < s.c2)) {
        errors.push_back(name + ": c1 must satisfy 0 < c1 < c2");
        return;
    }
    try {
        DyadicPartition part(s);
    } catch (const Error& e) {
        errors.push_back(name + ": " + e.what());
    }
}

}  // namespace

std::string to_string(Command c) {
    switch (c) {
        case Command::ap_constant: return "ap-constant";
        case Command::doubling: return "doubling";
        case Command::sampling_check: return "sampling-check";
        case Command::multiplier_bound: return "multiplier-bound";
        case Command::besov_equiv: return "besov-equiv";
        case Command::all: return "all";
    }
    return "unknown";
}

std::optional<Command> command_from_string(std::string_view s) {
    for (auto c : {Command::ap_constant, Command::doubling, Command::sampling_check, Command::multiplier_bound,
                   Command::besov_equiv, Command::all})
        if (to_string(c) == s) return c;
    return std::nullopt;
}

std::vector<std::string> check(const ExperimentConfig& cfg) {
    std::vector<std::string> errors;
    if (cfg.n < 1 || cfg.n > 3) errors.push_back("n must be 1, 2 or 3");
    if (cfg.weight.n != cfg.n) errors.push_back("weight dimension n does not match n");
    if (!(cfg.p > 0.0) || !std::isfinite(cfg.p)) errors.push_back("p must be positive");
    if (!(cfg.q > 0.0)) errors.push_back("q must be positive or inf");
    if (!std::isfinite(cfg.s)) errors.push_back("s must be finite");
    check_grid(cfg.grid, cfg.n, "grid", errors);

    const auto& c = cfg.cubes;
    if (c.j_min > c.j_max) errors.push_back("cubes.j_min must not exceed cubes.j_max");
    if (!(c.X > 0.0)) errors.push_back("cubes.X must be positive");
    if (c.q < 1) errors.push_back("cubes.q must be at least 1");
    for (int q : c.q_trace)
        if (q < 1) errors.push_back("cubes.q_trace entries must be at least 1");
    if (c.window < 1) errors.push_back("cubes.window must be at least 1");

    if (!(cfg.symbol.R > 0.0) || !std::isfinite(cfg.symbol.R)) errors.push_back("symbol.R must be positive");
    if (cfg.symbol.order < 1) errors.push_back("symbol.order must be at least 1");
    if (cfg.symbol.kind == SymbolKind::shift && static_cast<int>(cfg.symbol.shift.size()) != cfg.n)
        errors.push_back("symbol.shift needs n entries");
    if (!(cfg.M > 0.0)) errors.push_back("symbol.M must be positive");
    if (cfg.corpus_size < 1) errors.push_back("corpus.size must be at least 1");
    if (cfg.sampling_fields < 1) errors.push_back("sampling.fields must be at least 1");
    for (double R : cfg.R_list)
        if (!(R > 0.0)) errors.push_back("corpus.R_list entries must be positive");
    for (double u : cfg.offsets)
        if (!(std::abs(u) <= 0.5)) errors.push_back("sampling.offsets entries must lie in [-1/2, 1/2]");

    const auto& b = cfg.besov;
    check_partition(b.psi, "besov.psi", errors);
    check_partition(b.phi, "besov.phi", errors);
    if (!(b.M > 0.0)) errors.push_back("besov.M must be positive");
    const bool besov = cfg.command == Command::besov_equiv || cfg.command == Command::all;
    check_grid(b.grid, besov ? cfg.n : 0, "besov", errors);
    check_grid(b.decay_grid, besov ? cfg.n : 0, "besov.decay", errors);
    if (!(b.inner > 0.0 && b.outer >= 2.0 * b.inner)) errors.push_back("besov.inner and besov.outer need 0 < 2 inner <= outer");
    for (const auto* s : {&b.psi, &b.phi}) {
        if (!(s->c1 > 0.0 && s->c1 < s->c2) || s->j_lo > s->j_hi) continue;
        const double lo = std::ldexp(s->c1, s->j_lo + 1), hi = std::ldexp(s->c2, s->j_hi - 1);
        if (b.inner < lo || b.outer > hi)
            errors.push_back("besov corpus band [inner, outer] must lie inside both partitions' covered interiors");
        const double top = std::ldexp(s->c2, s->j_hi);
        if (b.grid.T > 0 && !(top < std::numbers::pi * b.grid.m / b.grid.T))
            errors.push_back("besov.m too small: c2 2^j_hi exceeds the Nyquist frequency");
        if (b.grid.T > 0 && !(std::ldexp(s->c1, s->j_lo) > 2.0 * std::numbers::pi / b.grid.T))
            errors.push_back("besov.T too small: c1 2^j_lo is below the frequency spacing");
    }
    if (cfg.output_dir.empty()) errors.push_back("output_dir must not be empty");
    return errors;
}

Validation validate(std::string_view text) {
    Validation out;
    ExperimentConfig cfg;
    WeightKeys wk;
    std::string command = to_string(cfg.command), symbol_kind = to_string(cfg.symbol.kind);
    double q_value = cfg.q;

    std::map<std::string, Setter> keys;
    keys["command"] = word(command);
    keys["n"] = integer(cfg.n);
    keys["p"] = real(cfg.p);
    keys["q"] = real(q_value);
    keys["s"] = real(cfg.s);
    keys["seed"] = integer(cfg.seed);
    keys["output_dir"] = word(cfg.output_dir);
    keys["threads"] = integer(cfg.threads);
    keys["weight.kind"] = word(wk.kind);
    keys["weight.N"] = integer(wk.N);
    keys["weight.alpha"] = reals(wk.alpha);
    keys["weight.rate"] = real(wk.rate);
    keys["weight.plane"] = integers(wk.plane);
    keys["weight.file"] = word(wk.file);
    add_grid(keys, "grid.", cfg.grid);
    keys["cubes.j_min"] = integer(cfg.cubes.j_min);
    keys["cubes.j_max"] = integer(cfg.cubes.j_max);
    keys["cubes.X"] = real(cfg.cubes.X);
    keys["cubes.q"] = integer(cfg.cubes.q);
    keys["cubes.q_trace"] = integers(cfg.cubes.q_trace);
    keys["cubes.window"] = integer(cfg.cubes.window);
    keys["symbol.kind"] = word(symbol_kind);
    keys["symbol.R"] = real(cfg.symbol.R);
    keys["symbol.order"] = integer(cfg.symbol.order);
    keys["symbol.shift"] = reals(cfg.symbol.shift);
    keys["symbol.amplitude"] = real(cfg.symbol.amplitude);
    keys["symbol.M"] = real(cfg.M);
    keys["corpus.size"] = integer(cfg.corpus_size);
    keys["corpus.R_list"] = reals(cfg.R_list);
    keys["sampling.offsets"] = reals(cfg.offsets);
    keys["sampling.fields"] = integer(cfg.sampling_fields);
    add_partition(keys, "besov.psi.", cfg.besov.psi);
    add_partition(keys, "besov.phi.", cfg.besov.phi);
    keys["besov.M"] = real(cfg.besov.M);
    add_grid(keys, "besov.", cfg.besov.grid);
    add_grid(keys, "besov.decay_", cfg.besov.decay_grid);
    keys["besov.inner"] = real(cfg.besov.inner);
    keys["besov.outer"] = real(cfg.besov.outer);

    std::size_t line_no = 0;
    std::string_view rest = text;
    while (!rest.empty()) {
        const auto nl = rest.find('\n');
        std::string_view line = rest.substr(0, nl);
        rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        const std::string where = "line " + std::to_string(line_no) + ": ";
        if (eq == std::string_view::npos) {
            out.errors.push_back(where + "expected key = value");
            continue;
        }
        const std::string key(trim(line.substr(0, eq)));
        const auto value = trim(line.substr(eq + 1));
        const auto it = keys.find(key);
        if (it == keys.end()) {
            out.errors.push_back(where + "unknown key '" + key + "'");
            continue;
        }
        if (!it->second(value)) out.errors.push_back(where + "bad value for " + key + ": '" + std::string(value) + "'");
    }

    if (const auto c = command_from_string(command)) cfg.command = *c;
    else out.errors.push_back("unknown command '" + command + "'");
    try {
        cfg.symbol.kind = symbol_kind_from_string(symbol_kind);
    } catch (const Error&) {
        out.errors.push_back("unknown symbol.kind '" + symbol_kind + "'");
    }
    cfg.q = q_value;

    try {
        if (!wk.file.empty()) {
            std::ifstream in(wk.file);
            if (!in) throw Error(ErrorCode::IoFailure, "weight.file not found: " + wk.file);
            cfg.weight_file = wk.file;
            cfg.weight = weight_from_json(nlohmann::json::parse(in));
        } else {
            nlohmann::json j{{"kind", wk.kind}, {"n", cfg.n}, {"N", wk.N}};
            if (wk.kind == "scalar-power") j["alpha"] = wk.alpha.empty() ? 0.0 : wk.alpha.front();
            if (wk.kind == "diagonal-power" || wk.kind == "conjugated") j["alpha"] = wk.alpha;
            if (wk.kind == "conjugated") j["rotation"] = {{"plane", wk.plane}, {"rate", wk.rate}};
            if ((wk.kind == "diagonal-power" || wk.kind == "conjugated") && static_cast<int>(wk.alpha.size()) != wk.N)
                throw Error(ErrorCode::ConfigInvalid, "weight.alpha needs weight.N entries");
            cfg.weight = weight_from_json(j);
        }
    } catch (const Error& e) {
        out.errors.push_back(e.what());
    } catch (const nlohmann::json::exception& e) {
        out.errors.push_back(std::string("weight.file: ") + e.what());
    }

    for (auto& e : check(cfg)) out.errors.push_back(std::move(e));
    if (out.errors.empty()) out.config = std::move(cfg);
    return out;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot read config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    auto v = validate(ss.str());
    if (!v.config) {
        std::string msg;
        for (const auto& e : v.errors) msg += (msg.empty() ? "" : "; ") + e;
        throw Error(ErrorCode::ConfigInvalid, msg);
    }
    return *v.config;
}

namespace {

nlohmann::json grid_json(const GridConfig& g) { return {{"T", g.T}, {"m", g.m}, {"shift", g.shift}}; }

nlohmann::json real_json(double x) { return std::isinf(x) ? nlohmann::json("inf") : nlohmann::json(x); }

}  // namespace

nlohmann::json to_json(const ExperimentConfig& cfg) {
    nlohmann::json sym{{"kind", to_string(cfg.symbol.kind)},
                       {"R", cfg.symbol.R},
                       {"order", cfg.symbol.order},
                       {"amplitude", cfg.symbol.amplitude},
                       {"M", cfg.M}};
    if (!cfg.symbol.shift.empty()) sym["shift"] = cfg.symbol.shift;
    return {{"command", to_string(cfg.command)},
            {"n", cfg.n},
            {"weight", to_json(cfg.weight)},
            {"p", cfg.p},
            {"q", real_json(cfg.q)},
            {"s", cfg.s},
            {"grid", grid_json(cfg.grid)},
            {"cubes",
             {{"j_min", cfg.cubes.j_min},
              {"j_max", cfg.cubes.j_max},
              {"X", cfg.cubes.X},
              {"q", cfg.cubes.q},
              {"q_trace", cfg.cubes.q_trace},
              {"window", cfg.cubes.window}}},
            {"symbol", sym},
            {"corpus", {{"size", cfg.corpus_size}, {"R_list", cfg.R_list}}},
            {"sampling", {{"offsets", cfg.offsets}, {"fields", cfg.sampling_fields}}},
            {"besov",
             {{"psi", to_json(cfg.besov.psi)},
              {"phi", to_json(cfg.besov.phi)},
              {"M", cfg.besov.M},
              {"grid", grid_json(cfg.besov.grid)},
              {"decay_grid", grid_json(cfg.besov.decay_grid)},
              {"inner", cfg.besov.inner},
              {"outer", cfg.besov.outer}}},
            {"seed", cfg.seed}};
}

}  // namespace mwlp
