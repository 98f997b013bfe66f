#include "mwlp/runner.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mwlp/besov.hpp"
#include "mwlp/bound.hpp"
#include "mwlp/muckenhoupt.hpp"
#include "mwlp/rng.hpp"
#include "mwlp/spectral.hpp"

namespace mwlp {

namespace {

std::string num(double x) { return nlohmann::json(x).dump(); }

nlohmann::json real_json(double x) { return std::isinf(x) ? nlohmann::json("inf") : nlohmann::json(x); }

nlohmann::json cube_json(const Cube& c) { return {{"center", c.center}, {"r", c.r}}; }

CubeFamily cube_family(const ExperimentConfig& cfg) {
    return CubeFamily::dyadic(cfg.n, cfg.cubes.j_min, cfg.cubes.j_max, cfg.cubes.X, cfg.cubes.q);
}

std::vector<Vector> directions(const ExperimentConfig& cfg) {
    return default_directions(cfg.weight.N, substream_seed(cfg.seed, "directions"));
}

const char* kOneSided = "the doubling exponent is a sampled lower bound; M > (n + beta) / p is checked one-sidedly";

struct Context {
    const ExperimentConfig& cfg;
    RunReport& report;
    std::string command;

    void warn(const std::string& code, const std::string& message) {
        report.warnings.push_back({command, code, message});
    }
};

nlohmann::json run_ap(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const auto cubes = cube_family(cfg);
    const auto est = ap_constant(cfg.weight, cfg.p, cubes);
    nlohmann::json out{{"value", est.value},
                       {"p", est.p},
                       {"regime", to_string(est.regime)},
                       {"q", est.q},
                       {"cubes", est.cubes},
                       {"scale_min", est.scale_min},
                       {"scale_max", est.scale_max},
                       {"box", est.box},
                       {"argmax_cube", cube_json(est.argmax_cube)}};
    if (!cfg.cubes.q_trace.empty()) {
        const auto trace = ap_refinement_trace(cfg.weight, cfg.p, cubes, cfg.cubes.q_trace);
        Table t{"ap_trace", {"q", "value"}, {}};
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& e : trace) {
            t.rows.push_back({std::to_string(e.q), num(e.value)});
            arr.push_back({{"q", e.q}, {"value", e.value}});
        }
        out["trace"] = arr;
        ctx.report.tables.push_back(std::move(t));
    }
    return out;
}

nlohmann::json run_doubling(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const auto dirs = directions(cfg);
    const auto d = doubling_report(cfg.weight, cfg.p, cube_family(cfg), dirs, cfg.cubes.window);
    ctx.warn("OneSidedBeta", kOneSided);
    return {{"C_dbl", d.C_dbl},
            {"beta", d.beta},
            {"c_w", d.c_w},
            {"directions_tested", d.directions_tested},
            {"lattice_window", d.lattice_window},
            {"scalar_a1_max", d.scalar_a1_max},
            {"worst_cube", cube_json(d.worst_cube)}};
}

nlohmann::json run_sampling(Context& ctx) {
    const auto& cfg = ctx.cfg;
    // Lattice offsets 0 and 1/2 are nodes only when the grid is unshifted.
    const TorusGrid grid(cfg.n, cfg.grid.T, cfg.grid.m, 0.0);
    MultiplierSymbol phi(grid, cfg.symbol);
    phi.fit_decay(cfg.M);
    const auto fields =
        bandlimited_corpus(grid, 1.0, cfg.weight.N, cfg.sampling_fields, substream_seed(cfg.seed, "sampling"));
    Table t{"sampling", {"field", "offset", "discrepancy"}, {}};
    double worst = 0.0;
    for (double u0 : cfg.offsets) {
        const std::vector<double> u(static_cast<std::size_t>(cfg.n), u0);
        for (std::size_t i = 0; i < fields.size(); ++i) {
            const auto direct = apply_multiplier(phi, fields[i]);
            const auto series = sampling_series(phi, fields[i], u);
            double diff = 0.0, scale = 0.0;
            for (std::size_t v = 0; v < direct.values.size(); ++v) {
                diff = std::max(diff, std::abs(series.values[v] - direct.values[v]));
                scale = std::max(scale, std::abs(direct.values[v]));
            }
            const double rel = scale > 0.0 ? diff / scale : diff;
            worst = std::max(worst, rel);
            t.rows.push_back({std::to_string(i), num(u0), num(rel)});
        }
    }
    ctx.report.tables.push_back(std::move(t));
    return {{"max_relative_discrepancy", worst},
            {"fields", fields.size()},
            {"offsets", cfg.offsets},
            {"grid_shift", 0.0},
            {"symbol", phi.name()},
            {"K", *phi.K()},
            {"M", *phi.M()}};
}

nlohmann::json run_multiplier(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const TorusGrid grid(cfg.n, cfg.grid.T, cfg.grid.m, cfg.grid.shift);
    MultiplierSymbol phi(grid, cfg.symbol);
    const auto fit = checked_decay_fit(
        grid, [&](std::span<const double> xi) { return evaluate_symbol(cfg.symbol, xi); }, cfg.symbol.R,
        is_compact(cfg.symbol.kind), cfg.M, INFINITY);
    phi.fit_decay(cfg.M);
    if (fit.growth > 1.5)
        ctx.warn("DivergentFit", "decay constant grows by " + num(fit.growth) +
                                     " when the period doubles; the kernel decays slower than (1 + R|x|)^-M");
    nlohmann::json decay{{"K", fit.K}, {"K_refined", fit.K_refined}, {"growth", fit.growth}, {"M", cfg.M}};

    const auto corpus =
        bandlimited_corpus(grid, cfg.symbol.R, cfg.weight.N, cfg.corpus_size, substream_seed(cfg.seed, "corpus"));
    if (cfg.p > 1.0) {
        const auto r = large_p_ratio(cfg.weight, phi, cfg.p, corpus);
        nlohmann::json out{{"p", cfg.p}, {"ratio_max", r.max}, {"decay", decay}, {"C_theory", nullptr}};
        Table t{"ratios", {"field", "ratio"}, {}};
        for (std::size_t i = 0; i < r.ratios.size(); ++i) t.rows.push_back({std::to_string(i), num(r.ratios[i])});
        ctx.report.tables.push_back(std::move(t));
        ctx.warn("NoAssembledConstant", "the assembled constant covers 0 < p <= 1; only the empirical ratio is reported");
        return out;
    }

    auto report = theoretical_constant(cfg.weight, phi, cfg.p, cube_family(cfg), directions(cfg));
    ctx.warn("OneSidedBeta", report.warning.empty() ? kOneSided : report.warning);
    const auto r = empirical_ratio(cfg.weight, phi, cfg.p, corpus);
    report.ratio_max = r.max;
    report.corpus_size = corpus.size();
    Table t{"ratios", {"field", "ratio"}, {}};
    for (std::size_t i = 0; i < r.ratios.size(); ++i) t.rows.push_back({std::to_string(i), num(r.ratios[i])});
    ctx.report.tables.push_back(std::move(t));

    if (!cfg.R_list.empty()) {
        report.R_sweep = rescale_experiment(cfg.weight, cfg.symbol, cfg.p, grid, cfg.R_list, cfg.corpus_size,
                                            substream_seed(cfg.seed, "corpus"));
        Table s{"rescale", {"R", "ratio"}, {}};
        for (const auto& e : report.R_sweep) s.rows.push_back({num(e.R), num(e.ratio)});
        ctx.report.tables.push_back(std::move(s));
    }
    auto out = to_json(report);
    out["decay"] = decay;
    out["within_bound"] = r.max <= report.C_theory;
    if (cfg.weight.kind == WeightKind::identity && cfg.p == 1.0) out["young_bound"] = young_bound(phi);
    return out;
}

nlohmann::json run_besov(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const auto& b = cfg.besov;
    DyadicPartition psi(b.psi), phi(b.phi);
    const TorusGrid decay_grid(cfg.n, b.decay_grid.T, b.decay_grid.m, b.decay_grid.shift);
    const auto dpsi = partition_decay_check(psi, decay_grid, b.M);
    const auto dphi = partition_decay_check(phi, decay_grid, b.M);
    if (dpsi.spread > 0.1 || dphi.spread > 0.1)
        ctx.warn("DecaySpread", "decay constants vary by more than 10% across j; the decay grid is too coarse");

    BesovParams params;
    params.s = cfg.s;
    params.p = cfg.p;
    params.q = cfg.q;
    params.weight = cfg.weight;
    const TorusGrid grid(cfg.n, b.grid.T, b.grid.m, b.grid.shift);
    const auto corpus =
        shell_corpus(grid, b.inner, b.outer, cfg.weight.N, cfg.corpus_size, substream_seed(cfg.seed, "shells"));
    const auto res = equivalence_experiment(corpus, params, psi, phi);
    if (res.truncated > 0)
        ctx.warn("TruncationWarning", std::to_string(res.truncated) +
                                          " corpus members have spectral mass outside the covered interior");

    Table t{"besov_ratios", {"field", "ratio"}, {}};
    for (std::size_t i = 0; i < res.ratios.size(); ++i) t.rows.push_back({std::to_string(i), num(res.ratios[i])});
    ctx.report.tables.push_back(std::move(t));

    const auto ov = overlap_sets(psi, phi);
    nlohmann::json out{{"s", cfg.s},
                       {"p", cfg.p},
                       {"q", real_json(cfg.q)},
                       {"corpus_size", corpus.size()},
                       {"r_min", res.r_min},
                       {"r_max", res.r_max},
                       {"bracket", res.r_max / res.r_min},
                       {"truncated", res.truncated},
                       {"n0", ov.n0},
                       {"decay_psi", {{"C", dpsi.decay_C}, {"spread", dpsi.spread}, {"M", b.M}}},
                       {"decay_phi", {{"C", dphi.decay_C}, {"spread", dphi.spread}, {"M", b.M}}}};
    if (cfg.p <= 1.0) {
        const auto C = equivalence_constant(params, psi, phi, cube_family(cfg), directions(cfg));
        ctx.warn("OneSidedBeta", kOneSided);
        out["C_equiv"] = {{"label", "assembled"},
                          {"value", C.C_equiv},
                          {"upper", C.upper},
                          {"lower", C.lower},
                          {"C_P", C.C_P},
                          {"beta", C.beta},
                          {"c_w", C.c_w},
                          {"ap", C.ap}};
        out["within_bound"] = res.r_max <= C.upper && 1.0 / res.r_min <= C.lower;
    } else {
        out["C_equiv"] = nullptr;
        ctx.warn("NoAssembledConstant", "the assembled equivalence constant covers 0 < p <= 1");
    }
    return out;
}

nlohmann::json dispatch(Context& ctx, Command c) {
    switch (c) {
        case Command::ap_constant: return run_ap(ctx);
        case Command::doubling: return run_doubling(ctx);
        case Command::sampling_check: return run_sampling(ctx);
        case Command::multiplier_bound: return run_multiplier(ctx);
        case Command::besov_equiv: return run_besov(ctx);
        case Command::all: break;
    }
    return nullptr;
}

}  // namespace

int exit_code_for(ErrorCode code) {
    return code == ErrorCode::ConfigInvalid || code == ErrorCode::IoFailure ? 2 : 3;
}

RunReport run(const ExperimentConfig& cfg) {
    using clock = std::chrono::steady_clock;
    RunReport report;
    report.config = to_json(cfg);
    const auto start = clock::now();

    std::vector<Command> commands;
    if (cfg.command == Command::all)
        commands = {Command::ap_constant, Command::doubling, Command::sampling_check, Command::multiplier_bound,
                    Command::besov_equiv};
    else
        commands = {cfg.command};

    if (const auto errs = check(cfg); !errs.empty()) {
        for (const auto& e : errs) report.errors.push_back({to_string(cfg.command), "ConfigInvalid", e});
        report.exit_code = 2;
        return report;
    }

    for (auto c : commands) {
        Context ctx{cfg, report, to_string(c)};
        const auto t0 = clock::now();
        try {
            report.results[ctx.command] = dispatch(ctx, c);
        } catch (const Error& e) {
            report.errors.push_back({ctx.command, std::string(to_string(e.code())), e.what()});
            report.results[ctx.command] = nullptr;
            report.exit_code = std::max(report.exit_code, exit_code_for(e.code()));
        }
        report.timings.push_back({ctx.command, std::chrono::duration<double>(clock::now() - t0).count()});
    }
    report.wall_time = std::chrono::duration<double>(clock::now() - start).count();
    return report;
}

nlohmann::json to_json(const RunReport& report) {
    auto entries = [](const std::vector<ReportEntry>& v) {
        nlohmann::json a = nlohmann::json::array();
        for (const auto& e : v) a.push_back({{"command", e.command}, {"code", e.code}, {"message", e.message}});
        return a;
    };
    return {{"config", report.config},
            {"results", report.results},
            {"warnings", entries(report.warnings)},
            {"errors", entries(report.errors)},
            {"exit_code", report.exit_code}};
}

std::string to_csv(const Table& table) {
    std::ostringstream out;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
        out << '\n';
    };
    line(table.header);
    for (const auto& r : table.rows) line(r);
    return out.str();
}

void write_report(const RunReport& report, const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + dir + ": " + ec.message());
    auto write = [&](const std::string& name, const std::string& body) {
        std::ofstream out(fs::path(dir) / name, std::ios::binary);
        out << body;
        if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + (fs::path(dir) / name).string());
    };
    write("report.json", to_json(report).dump(2) + "\n");
    for (const auto& t : report.tables) write(t.name + ".csv", to_csv(t));

    std::ofstream log(fs::path(dir) / "run.log", std::ios::app);
    const std::time_t now = std::time(nullptr);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    log << stamp << " command=" << report.config.value("command", "") << " exit=" << report.exit_code
        << " wall=" << report.wall_time << "s\n";
    for (const auto& t : report.timings) log << "  " << t.command << " " << t.seconds << "s\n";
    if (!log) throw Error(ErrorCode::IoFailure, "cannot append to run.log");
}

}  // namespace mwlp
