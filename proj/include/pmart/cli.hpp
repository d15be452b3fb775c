#pragma once

// Command-line front end. run() is the whole program; tools/pmart.cpp only
// forwards argv and the standard streams.
//
// Exit codes: 0 all checks pass, 1 some check fails (or a sweep row errors),
// 2 usage error (bad flags, unreadable files, malformed numbers, refused
// enumeration).

#include "pmart/construction.hpp"
#include "pmart/inequalities.hpp"
#include "pmart/martingales.hpp"
#include "pmart/moments.hpp"
#include "pmart/population.hpp"
#include "pmart/report.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace pmart::cli {

inline constexpr const char* seed_env_var = "PMART_SEED";

enum class Format { json, csv, text };

struct RunConfig {
    Format format = Format::json;
    std::string output; // empty: stdout
    std::size_t cutoff = default_enumeration_cutoff;
    unsigned workers = 0;
};

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::optional<std::uint64_t> env_seed()
{
    const char* v = std::getenv(seed_env_var);
    if (!v || !*v)
        return std::nullopt;
    try {
        std::size_t pos = 0;
        auto s = std::stoull(v, &pos);
        if (pos != std::string(v).size())
            throw std::invalid_argument(v);
        return s;
    } catch (const std::exception&) {
        throw UsageError(std::string(seed_env_var) + " is not an unsigned integer: '" + v + "'");
    }
}

// Reads a population exactly when possible. In Monte Carlo mode decimal
// input is accepted and read as doubles.
struct LoadedPopulation {
    std::optional<Population> exact;
    std::optional<FloatPopulation> floating;
    std::size_t size() const { return exact ? exact->size() : floating->size(); }
};

inline LoadedPopulation load_population(const std::string& path, bool allow_float)
{
    LoadedPopulation lp;
    try {
        lp.exact = read_population_file<Rational>(path);
    } catch (const InvalidInput&) {
        if (!allow_float)
            throw;
        lp.floating = read_population_file<double>(path);
    }
    return lp;
}

inline EnumerationConfig enumeration(const RunConfig& cfg)
{
    if (cfg.cutoff > max_enumeration_cutoff)
        throw UsageError("--cutoff may not exceed " + std::to_string(max_enumeration_cutoff));
    return {cfg.cutoff, cfg.workers};
}

inline Json population_json(const Population& pop) { return to_json(pop.values()); }

} // namespace detail

// ---- subcommands ---------------------------------------------------------

struct MartingaleArgs {
    std::string kind;
    std::string population;
    std::string multipliers;
};

inline int verify_martingale(const MartingaleArgs& a, const RunConfig& cfg, std::ostream& out)
{
    auto ecfg = detail::enumeration(cfg);
    Population pop = read_population_file<Rational>(a.population);
    MartingaleCheck check;
    Json extra = Json::array();
    bool ok = true;
    std::optional<Multipliers<Rational>> mult;
    if (!a.multipliers.empty())
        mult = Multipliers<Rational>(read_values_file<Rational>(a.multipliers));

    if (a.kind == "quadratic-vector") {
        check = check_vector_martingale(pop, QuadraticSystem<Rational>(pop), ecfg);
    } else if (a.kind == "weighted-vector") {
        check = check_vector_martingale(
            pop, WeightedSystem<Rational>(pop, mult.value_or(Multipliers<Rational>::previous_draw())),
            ecfg);
    } else if (a.kind == "controls") {
        for (auto& c : check_not_martingale_counterexamples(pop, ecfg)) {
            Json row{{"name", c.name}, {"expected_holds", c.expected_holds}};
            row.update(to_json(c.check));
            row["as_expected"] = c.as_expected();
            extra.push_back(std::move(row));
            ok = ok && c.as_expected();
        }
        check.holds = ok;
    } else {
        auto kind = parse_martingale_kind(a.kind);
        if (kind == MartingaleKind::weighted && !mult)
            throw UsageError("--kind weighted needs --multipliers");
        if (kind != MartingaleKind::weighted && mult)
            throw UsageError("--multipliers only applies to weighted kinds");
        Martingale<Rational> m(kind, pop, mult);
        check = check_martingale(m, ecfg);
    }
    ok = check.holds;

    switch (cfg.format) {
    case Format::json: {
        Json j;
        j["kind"] = a.kind;
        j["n"] = pop.size();
        j["population"] = detail::population_json(pop);
        if (mult && mult->is_fixed())
            j["multipliers"] = to_json(mult->fixed());
        if (a.kind == "controls") {
            j["holds"] = ok;
            j["controls"] = std::move(extra);
        } else {
            j.update(to_json(check));
        }
        out << j.dump(2) << '\n';
        break;
    }
    case Format::csv:
        out << "kind,n,holds,histories_checked,witness\n";
        if (a.kind == "controls") {
            for (const auto& row : extra)
                out << row["name"].get<std::string>() << ',' << pop.size() << ','
                    << (row["holds"].get<bool>() ? "true" : "false") << ','
                    << row["histories_checked"].get<std::uint64_t>() << ','
                    << (row["witness"].is_null() ? "" : row["witness"].dump()) << '\n';
        } else {
            out << a.kind << ',' << pop.size() << ',' << (check.holds ? "true" : "false") << ','
                << check.histories_checked << ','
                << (check.witness ? Json(to_one_based(*check.witness)).dump() : "") << '\n';
        }
        break;
    case Format::text:
        if (a.kind == "controls") {
            for (const auto& row : extra)
                out << row["name"].get<std::string>() << ": "
                    << (row["holds"].get<bool>() ? "martingale" : "not a martingale")
                    << (row["as_expected"].get<bool>() ? "" : "  UNEXPECTED") << '\n';
        } else {
            out << a.kind << " n=" << pop.size() << ": "
                << (check.holds ? "martingale property holds" : "martingale property FAILS")
                << " (" << check.histories_checked << " histories)";
            if (check.witness)
                out << " witness " << Json(to_one_based(*check.witness)).dump();
            out << '\n';
        }
        break;
    }
    return ok ? 0 : 1;
}

struct InequalityArgs {
    std::string id;
    std::string population;
    std::string weights;
    std::optional<std::size_t> bridge_m;
    std::string mode = "exact";
    std::optional<std::uint64_t> samples;
    std::optional<std::uint64_t> seed;
};

inline void write_reports(const std::vector<InequalityReport>& reports, Format format,
                          std::ostream& out, const Json* wrapper = nullptr)
{
    switch (format) {
    case Format::json:
        if (wrapper) {
            out << wrapper->dump(2) << '\n';
        } else {
            for (const auto& r : reports)
                out << to_json(r).dump(2) << '\n';
        }
        break;
    case Format::csv:
        out << csv_header() << '\n';
        for (const auto& r : reports)
            out << csv_row(r) << '\n';
        break;
    case Format::text:
        for (const auto& r : reports)
            out << text_line(r) << '\n';
        break;
    }
}

inline int check_inequality(const InequalityArgs& a, const RunConfig& cfg, std::ostream& out)
{
    auto ecfg = detail::enumeration(cfg);
    InequalityId id = parse_inequality_id(a.id);
    VerifyMode mode;
    if (a.mode == "exact")
        mode = VerifyMode::exact;
    else if (a.mode == "mc")
        mode = VerifyMode::monte_carlo;
    else
        throw UsageError("--mode must be exact or mc");

    MonteCarloConfig mc;
    if (mode == VerifyMode::exact) {
        if (a.samples || a.seed)
            throw UsageError("--samples and --seed apply only to --mode mc");
    } else {
        if (!a.samples || *a.samples == 0)
            throw UsageError("--mode mc needs --samples N (N > 0)");
        auto seed = a.seed ? a.seed : detail::env_seed();
        if (!seed)
            throw UsageError(std::string("--mode mc needs --seed S or ") + seed_env_var);
        mc.samples = *a.samples;
        mc.seed = *seed;
        mc.workers = cfg.workers;
    }

    InequalityParams params;
    if (!a.weights.empty())
        params.weights = read_values_file<Rational>(a.weights);
    params.bridge_m = a.bridge_m;

    detail::LoadedPopulation lp;
    if (!a.population.empty()) {
        lp = detail::load_population(a.population, mode == VerifyMode::monte_carlo);
    } else if (id == InequalityId::bridge && a.bridge_m) {
        if (*a.bridge_m == 0)
            throw UsageError("--bridge-m must be positive");
        lp.exact = make_bridge_population(*a.bridge_m);
    } else {
        throw UsageError("--population is required" +
                         std::string(id == InequalityId::bridge ? " (or --bridge-m)" : ""));
    }

    InequalityReport r = lp.exact ? verify(id, *lp.exact, params, mode, mc, ecfg)
                                  : verify(id, *lp.floating, params, mode, mc, ecfg);
    write_reports({r}, cfg.format, out);
    return r.holds ? 0 : 1;
}

struct MomentArgs {
    std::string population;
    std::string weights;
};

inline int moments(const MomentArgs& a, const RunConfig& cfg, std::ostream& out)
{
    Population pop = read_population_file<Rational>(a.population);
    if (pop.size() > cfg.cutoff)
        throw CutoffExceeded("the brute-force oracle enumerates up to n! orderings; n = " +
                             std::to_string(pop.size()) + " exceeds the cutoff " +
                             std::to_string(cfg.cutoff));
    auto rows = moment_report(pop);
    if (!a.weights.empty()) {
        auto w = read_values_file<Rational>(a.weights);
        if (w.size() != pop.size())
            throw InvalidInput("weights must have the population's length");
        for (std::size_t k = 1; k < pop.size(); ++k)
            rows.push_back({"weighted E[M_" + std::to_string(k) + "^2]",
                            weighted_second_moment(pop, w, k).martingale,
                            oracle::weighted_martingale_second_moment(pop, w, k)});
    }
    bool ok = true;
    for (const auto& r : rows)
        ok = ok && r.equal();
    switch (cfg.format) {
    case Format::json: {
        Json j;
        j["n"] = pop.size();
        j["population"] = detail::population_json(pop);
        j["B"] = to_string(pop.sum_squares());
        j["Q"] = to_string(pop.sum_fourth());
        Json arr = Json::array();
        for (const auto& r : rows)
            arr.push_back(to_json(r));
        j["moments"] = std::move(arr);
        j["all_equal"] = ok;
        out << j.dump(2) << '\n';
        break;
    }
    case Format::csv:
        out << "id,formula,oracle,equal\n";
        for (const auto& r : rows)
            out << r.id << ',' << to_string(r.formula) << ',' << to_string(r.oracle) << ','
                << (r.equal() ? "true" : "false") << '\n';
        break;
    case Format::text: {
        std::size_t w = 2;
        for (const auto& r : rows)
            w = std::max(w, r.id.size());
        for (const auto& r : rows)
            out << std::left << std::setw(static_cast<int>(w) + 2) << r.id << std::setw(16)
                << to_string(r.formula) << std::setw(16) << to_string(r.oracle)
                << (r.equal() ? "equal" : "DIFFERENT") << '\n';
        break;
    }
    }
    return ok ? 0 : 1;
}

struct DumpArgs {
    std::string basis;
    std::string population;
    std::string weights;
    std::optional<std::size_t> k;
    bool inverse = false;
    bool iterative = false;
};

inline int dump_matrices(const DumpArgs& a, const RunConfig& cfg, std::ostream& out)
{
    if (cfg.format == Format::csv)
        throw UsageError("dump-matrices writes json or text");
    Population pop = read_population_file<Rational>(a.population);
    auto emit = [&](const Json& j) {
        if (cfg.format == Format::json) {
            out << j.dump(2) << '\n';
            return;
        }
        auto print = [&](const Json& m) {
            for (const auto& row : m) {
                for (const auto& x : row)
                    out << std::setw(14) << x.get<std::string>();
                out << '\n';
            }
        };
        if (j.is_array() && !j.empty() && j[0].is_array()) {
            print(j);
            return;
        }
        for (const auto& e : j["matrices"]) {
            out << "k=" << e["k"].get<std::size_t>() << '\n';
            if (e.contains("transition")) {
                out << "transition A_{k+1}:\n";
                print(e["transition"]);
            }
            if (e.contains("inverse_product")) {
                out << "inverse product:\n";
                print(e["inverse_product"]);
            }
        }
    };

    if (a.basis == "quadratic") {
        if (!a.weights.empty())
            throw UsageError("--weights only applies to --basis weighted");
        QuadraticSystem<Rational> sys(pop);
        auto inv = [&](std::size_t k) {
            return a.iterative ? sys.iterative_inverse_product(k) : sys.inverse_product(k);
        };
        if (a.k) {
            emit(a.inverse ? to_json(inv(*a.k)) : to_json(sys.transition(*a.k)));
            return 0;
        }
        Json arr = Json::array();
        for (std::size_t k = 0; k <= sys.k_max(); ++k) {
            Json e{{"k", k}};
            if (k + 3 <= sys.n())
                e["transition"] = to_json(sys.transition(k));
            if (k >= 1)
                e["inverse_product"] = to_json(inv(k));
            arr.push_back(std::move(e));
        }
        emit(Json{{"basis", "quadratic"},
                  {"n", pop.size()},
                  {"M", to_string(pop.total())},
                  {"B", to_string(pop.sum_squares())},
                  {"matrices", std::move(arr)}});
        return 0;
    }
    if (a.basis == "weighted") {
        if (a.weights.empty())
            throw UsageError("--basis weighted needs --weights");
        auto w = read_values_file<Rational>(a.weights);
        WeightedSystem<Rational> sys(pop, Multipliers<Rational>(w));
        auto inv = [&](std::size_t k) {
            return a.iterative ? sys.iterative_inverse_product(k) : sys.inverse_product(k);
        };
        if (a.k) {
            if (a.inverse) {
                emit(to_json(inv(*a.k)));
            } else {
                if (*a.k + 1 >= pop.size())
                    throw DomainError("weighted transition: k must be at most n-2");
                emit(to_json(sys.transition(*a.k, w[*a.k])));
            }
            return 0;
        }
        Json arr = Json::array();
        for (std::size_t k = 0; k <= sys.k_max(); ++k) {
            Json e{{"k", k}};
            if (k + 2 <= sys.n())
                e["transition"] = to_json(sys.transition(k, w[k]));
            if (k >= 1)
                e["inverse_product"] = to_json(inv(k));
            arr.push_back(std::move(e));
        }
        emit(Json{{"basis", "weighted"},
                  {"n", pop.size()},
                  {"weights", to_json(w)},
                  {"matrices", std::move(arr)}});
        return 0;
    }
    throw UsageError("--basis must be quadratic or weighted");
}

// ---- sweep ---------------------------------------------------------------
//
// One row per non-blank line; '#' starts a comment. A row is a list of
// key=value tokens:
//
//   id=<inequality>          required
//   mode=exact|mc            default exact
//   population=<file>        relative to the spec file's directory, or
//   n=<int> [count=<int>]    random centered populations (count default 1), or
//   bridge-m=<int>           the bridge population of size 2m
//   weights=<file>|alternating|ones|random   weighted ids; default random
//   seed=<int>               generator / Monte Carlo seed (default: --seed,
//                            then PMART_SEED, then 0)
//   samples=<int>            Monte Carlo sample count (mc only)
//   rhs-scale=<p/q>          multiplies the bound (harness self-test)

struct SweepRowError {
    std::size_t line = 0;
    std::string message;
};

struct SweepResult {
    std::vector<InequalityReport> reports;
    std::vector<SweepRowError> errors;
    std::size_t rows = 0;
    bool all_pass() const
    {
        if (!errors.empty())
            return false;
        for (const auto& r : reports)
            if (!r.holds)
                return false;
        return true;
    }
};

inline std::vector<std::pair<std::string, std::string>> split_tokens(const std::string& line)
{
    std::vector<std::pair<std::string, std::string>> out;
    std::istringstream is(line);
    std::string tok;
    while (is >> tok) {
        auto eq = tok.find('=');
        if (eq == std::string::npos || eq == 0)
            throw InvalidInput("expected key=value, got '" + tok + "'");
        out.emplace_back(tok.substr(0, eq), tok.substr(eq + 1));
    }
    return out;
}

inline std::uint64_t parse_count(const std::string& key, const std::string& v)
{
    std::uint64_t x = 0;
    auto res = std::from_chars(v.data(), v.data() + v.size(), x);
    if (v.empty() || res.ec != std::errc{} || res.ptr != v.data() + v.size())
        throw InvalidInput(key + " must be a non-negative integer, got '" + v + "'");
    return x;
}

inline void sweep_row(const std::string& line, std::size_t row_index,
                      const std::filesystem::path& base, std::uint64_t default_seed,
                      const EnumerationConfig& ecfg, unsigned workers, SweepResult& result)
{
    std::optional<InequalityId> id;
    VerifyMode mode = VerifyMode::exact;
    std::string pop_file, weights_spec;
    std::optional<std::uint64_t> n, bridge_m, seed, samples;
    std::uint64_t count = 1;
    Rational rhs_scale = 1;
    for (const auto& [key, value] : split_tokens(line)) {
        if (key == "id") id = parse_inequality_id(value);
        else if (key == "mode") {
            if (value == "exact") mode = VerifyMode::exact;
            else if (value == "mc") mode = VerifyMode::monte_carlo;
            else throw InvalidInput("mode must be exact or mc");
        }
        else if (key == "population") pop_file = value;
        else if (key == "n") n = parse_count(key, value);
        else if (key == "count") count = parse_count(key, value);
        else if (key == "bridge-m") bridge_m = parse_count(key, value);
        else if (key == "weights") weights_spec = value;
        else if (key == "seed") seed = parse_count(key, value);
        else if (key == "samples") samples = parse_count(key, value);
        else if (key == "rhs-scale") rhs_scale = parse_rational(value);
        else throw InvalidInput("unknown key '" + key + "'");
    }
    if (!id)
        throw InvalidInput("row has no id");
    int sources = !pop_file.empty() + n.has_value() + bridge_m.has_value();
    if (sources != 1)
        throw InvalidInput("row needs exactly one of population=, n=, bridge-m=");
    if (mode == VerifyMode::exact && samples)
        throw InvalidInput("samples= applies only to mode=mc");
    if (mode == VerifyMode::monte_carlo && (!samples || *samples == 0))
        throw InvalidInput("mode=mc needs samples=");
    if (count == 0)
        return;
    const std::uint64_t row_seed = seed.value_or(default_seed);
    Rng rng = seed_stream(row_seed, row_index);

    std::vector<Population> pops;
    if (!pop_file.empty()) {
        std::filesystem::path p(pop_file);
        if (p.is_relative())
            p = base / p;
        pops.push_back(read_population_file<Rational>(p.string()));
    } else if (bridge_m) {
        if (*bridge_m == 0)
            throw InvalidInput("bridge-m must be positive");
        pops.push_back(make_bridge_population(*bridge_m));
    } else {
        if (*n < 2)
            throw InvalidInput("n must be at least 2");
        if (mode == VerifyMode::exact)
            require_enumerable(*n, ecfg);
        for (std::uint64_t i = 0; i < count; ++i)
            pops.push_back(random_centered_population(*n, rng));
    }

    for (const auto& pop : pops) {
        InequalityParams params;
        params.rhs_scale = rhs_scale;
        if (id == InequalityId::bridge)
            params.bridge_m = pop.size() / 2;
        if (uses_weights(*id)) {
            if (weights_spec.empty() || weights_spec == "random")
                params.weights = random_weights(pop.size(), rng);
            else if (weights_spec == "alternating")
                params.weights = alternating_weights(pop.size());
            else if (weights_spec == "ones")
                params.weights = std::vector<Rational>(pop.size(), Rational(1));
            else {
                std::filesystem::path p(weights_spec);
                if (p.is_relative())
                    p = base / p;
                params.weights = read_values_file<Rational>(p.string());
            }
        } else if (!weights_spec.empty()) {
            throw InvalidInput(to_string(*id) + " does not take weights");
        }
        MonteCarloConfig mc;
        if (mode == VerifyMode::monte_carlo) {
            mc.samples = *samples;
            mc.seed = row_seed;
            mc.workers = workers;
        }
        result.reports.push_back(verify(*id, pop, params, mode, mc, ecfg));
    }
}

inline SweepResult sweep(std::istream& spec, const std::filesystem::path& base,
                         std::uint64_t default_seed, const EnumerationConfig& ecfg)
{
    SweepResult result;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(spec, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        if (pmart::detail::trim(line).empty())
            continue;
        ++result.rows;
        try {
            sweep_row(line, result.rows - 1, base, default_seed, ecfg, ecfg.workers, result);
        } catch (const std::exception& e) {
            result.errors.push_back({lineno, e.what()});
        }
    }
    return result;
}

struct SweepArgs {
    std::string spec;
    std::optional<std::uint64_t> seed;
};

inline int run_sweep(const SweepArgs& a, const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    auto ecfg = detail::enumeration(cfg);
    std::ifstream in(a.spec);
    if (!in)
        throw InvalidInput("cannot read file '" + a.spec + "'");
    std::uint64_t seed = a.seed ? *a.seed : detail::env_seed().value_or(0);
    auto base = std::filesystem::path(a.spec).parent_path();
    SweepResult res = sweep(in, base, seed, ecfg);

    std::size_t passed = 0;
    for (const auto& r : res.reports)
        passed += r.holds ? 1 : 0;
    if (cfg.format == Format::json) {
        Json j;
        j["rows"] = res.rows;
        Json reps = Json::array();
        for (const auto& r : res.reports)
            reps.push_back(to_json(r));
        j["reports"] = std::move(reps);
        Json errs = Json::array();
        for (const auto& e : res.errors)
            errs.push_back(Json{{"line", e.line}, {"error", e.message}});
        j["errors"] = std::move(errs);
        j["passed"] = passed;
        j["total"] = res.reports.size();
        j["all_pass"] = res.all_pass();
        write_reports(res.reports, cfg.format, out, &j);
    } else {
        write_reports(res.reports, cfg.format, out);
        for (const auto& e : res.errors)
            err << a.spec << ":" << e.line << ": " << e.message << '\n';
        if (cfg.format == Format::text)
            out << passed << "/" << res.reports.size() << " hold, " << res.errors.size()
                << " row errors\n";
    }
    return res.all_pass() ? 0 : 1;
}

// ---- entry point ---------------------------------------------------------

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Martingales from sampling without replacement: exact checks of martingale "
                 "properties, moment formulas and permutation maximal inequalities"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", "pmart 1.0.0");

    RunConfig cfg;
    std::string format = "json";
    app.add_option("--format", format, "Output format")
        ->check(CLI::IsMember({"json", "csv", "text"}))
        ->capture_default_str();
    app.add_option("--output,-o", cfg.output, "Write the report to this file instead of stdout");
    app.add_option("--cutoff", cfg.cutoff, "Largest n for exhaustive enumeration (at most 12)")
        ->capture_default_str();
    app.add_option("--workers", cfg.workers, "Worker threads (0: one per hardware thread)")
        ->capture_default_str();

    MartingaleArgs margs;
    auto* vm = app.add_subcommand("verify-martingale",
                                  "Exhaustively check the martingale property on all histories");
    vm->add_option("--kind", margs.kind,
                   "m2, m3, mtilde, weighted, chain-quadratic, quadratic-vector, "
                   "weighted-vector, or controls (negative-control library)")
        ->required();
    vm->add_option("--population", margs.population, "Population file")
        ->required()
        ->check(CLI::ExistingFile);
    vm->add_option("--multipliers", margs.multipliers, "Fixed multipliers a_1..a_n")
        ->check(CLI::ExistingFile);

    InequalityArgs iargs;
    auto* ci = app.add_subcommand("check-inequality",
                                  "Evaluate one permutation maximal inequality");
    ci->add_option("--id", iargs.id,
                   "max-averages, garsia, quadratic, bridge, alternating, vna-weighted, "
                   "garsia-weighted, hardy")
        ->required();
    ci->add_option("--population", iargs.population, "Population file")->check(CLI::ExistingFile);
    ci->add_option("--weights", iargs.weights, "Weights a_1..a_n")->check(CLI::ExistingFile);
    ci->add_option("--bridge-m", iargs.bridge_m, "Bridge of m ones and m minus-ones");
    ci->add_option("--mode", iargs.mode, "exact or mc")
        ->check(CLI::IsMember({"exact", "mc"}))
        ->capture_default_str();
    ci->add_option("--samples", iargs.samples, "Monte Carlo sample count");
    ci->add_option("--seed", iargs.seed,
                   std::string("Monte Carlo seed (default: $") + seed_env_var + ")");

    MomentArgs moargs;
    auto* mo = app.add_subcommand("moments", "Moment formulas versus brute-force enumeration");
    mo->add_option("--population", moargs.population, "Population file")
        ->required()
        ->check(CLI::ExistingFile);
    mo->add_option("--weights", moargs.weights, "Fixed weights for the weighted martingale")
        ->check(CLI::ExistingFile);

    DumpArgs dargs;
    auto* dm = app.add_subcommand("dump-matrices",
                                  "Print transition matrices and inverse products as p/q strings");
    dm->add_option("--basis", dargs.basis, "quadratic or weighted")
        ->required()
        ->check(CLI::IsMember({"quadratic", "weighted"}));
    dm->add_option("--population", dargs.population, "Population file")
        ->required()
        ->check(CLI::ExistingFile);
    dm->add_option("--weights", dargs.weights, "Multipliers (weighted basis)")
        ->check(CLI::ExistingFile);
    dm->add_option("--k", dargs.k, "Print only the matrix for this k");
    dm->add_flag("--inverse", dargs.inverse, "With --k: print the inverse product instead");
    dm->add_flag("--iterative", dargs.iterative,
                 "Inverse products from explicit inversion instead of the closed form");

    SweepArgs sargs;
    auto* sw = app.add_subcommand("sweep", "Run every row of a sweep spec file");
    sw->add_option("spec", sargs.spec, "Sweep spec file")->required()->check(CLI::ExistingFile);
    sw->add_option("--seed", sargs.seed,
                   std::string("Default seed for rows without seed= (default: $") + seed_env_var +
                       ", then 0)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }
    cfg.format = format == "csv" ? Format::csv : format == "text" ? Format::text : Format::json;

    std::ofstream file;
    std::ostream* sink = &out;
    if (!cfg.output.empty()) {
        file.open(cfg.output);
        if (!file) {
            err << "error: cannot write '" << cfg.output << "'\n";
            return 2;
        }
        sink = &file;
    }

    try {
        if (*vm)
            return verify_martingale(margs, cfg, *sink);
        if (*ci)
            return check_inequality(iargs, cfg, *sink);
        if (*mo)
            return moments(moargs, cfg, *sink);
        if (*dm)
            return dump_matrices(dargs, cfg, *sink);
        if (*sw)
            return run_sweep(sargs, cfg, *sink, err);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const InvalidInput& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const PreconditionError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const CutoffExceeded& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("pmart");
    for (const auto& a : args)
        argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

} // namespace pmart::cli
