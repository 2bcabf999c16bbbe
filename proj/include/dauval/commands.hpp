#pragma once

// Pipeline commands behind the `dauval` CLI. Each command reads its inputs, writes fixed
// file names under an output directory, records a run manifest, and returns an exit code.

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "dauval/error.hpp"
#include "dauval/fixture.hpp"
#include "dauval/logistic.hpp"
#include "dauval/revenue.hpp"
#include "dauval/scenario.hpp"
#include "dauval/tailfit.hpp"
#include "dauval/timeseries.hpp"
#include "dauval/valuation.hpp"

namespace dauval::cmd {

inline constexpr const char* kToolVersion = "1.0.0";

namespace files {
inline constexpr const char* dau = "dau.csv";
inline constexpr const char* financials = "financials.csv";
inline constexpr const char* fixture_truth = "fixture_truth.json";
inline constexpr const char* tails = "tails.csv";
inline constexpr const char* fit_diagnostics = "fit_diagnostics.json";
inline constexpr const char* scenarios = "scenarios.csv";
inline constexpr const char* band = "band.csv";
inline constexpr const char* valuations = "valuations.csv";
inline constexpr const char* summary = "summary.json";
inline constexpr const char* revenue_fit = "revenue_fit.json";
inline constexpr const char* report = "report.txt";
inline constexpr const char* revenue_curves = "revenue_curves.csv";
} // namespace files

enum ExitCode : int { ok = 0, usage = 2, fit_failure = 3, data_error = 4 };

inline int exit_code_for(const Error& e) {
    switch (e.kind()) {
    case ErrorKind::usage: return usage;
    case ErrorKind::fit_failure: return fit_failure;
    case ErrorKind::data: return data_error;
    }
    return usage;
}

/// FNV-1a 64-bit digest of a file's bytes, hex encoded.
inline std::string file_digest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ArgumentError("cannot open '" + path.string() + "'");
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

inline std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Configuration snapshot, input digests and outputs of one command run. Alongside the
/// JSON manifest a `key = value` file under a `[command]` section is written that `--config` accepts, so a run can
/// be repeated from its manifest.
class RunManifest {
public:
    RunManifest(std::string command, std::filesystem::path out_dir)
        : command_(std::move(command)), out_dir_(std::move(out_dir)), started_(utc_timestamp()) {}

    template <class T>
    void set(const std::string& key, const T& value) {
        config_[key] = value;
    }
    void input(const std::string& key, const std::filesystem::path& path) {
        config_[key] = path.string();
        inputs_[key] = {{"path", path.string()}, {"fnv1a64", file_digest(path)}};
    }
    /// Records a digest for a file that is not named by a flag.
    void digest(const std::string& key, const std::filesystem::path& path) {
        inputs_[key] = {{"path", path.string()}, {"fnv1a64", file_digest(path)}};
    }
    void output(const std::string& name) { outputs_.push_back(name); }
    /// Run metadata that is not a command flag.
    template <class T>
    void note(const std::string& key, const T& value) {
        notes_[key] = value;
    }

    void write() const {
        nlohmann::ordered_json j;
        j["command"] = command_;
        j["tool_version"] = kToolVersion;
        j["config"] = config_;
        j["inputs"] = inputs_;
        j["notes"] = notes_;
        nlohmann::json outs = nlohmann::json::object();
        for (const auto& name : outputs_) outs[name] = file_digest(out_dir_ / name);
        j["outputs"] = outs;
        j["started_at"] = started_;
        j["finished_at"] = utc_timestamp();
        std::ofstream(out_dir_ / ("manifest_" + command_ + ".json")) << j.dump(2) << '\n';

        std::ofstream conf(out_dir_ / (command_ + ".conf"));
        conf << '[' << command_ << "]\n";
        for (const auto& [key, value] : config_.items())
            conf << key << " = " << (value.is_string() ? value.get<std::string>() : value.dump()) << '\n';
    }

private:
    std::string command_;
    std::filesystem::path out_dir_;
    std::string started_;
    nlohmann::ordered_json config_ = nlohmann::ordered_json::object();
    nlohmann::ordered_json inputs_ = nlohmann::ordered_json::object();
    nlohmann::ordered_json notes_ = nlohmann::ordered_json::object();
    std::vector<std::string> outputs_;
};

inline std::filesystem::path prepare_out(const std::string& out) {
    std::filesystem::path dir(out);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ArgumentError("cannot create output directory '" + out + "': " + ec.message());
    return dir;
}

inline std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ArgumentError("cannot write '" + path.string() + "'");
    return out;
}

inline std::ifstream open_in(const std::string& path, const char* what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ArgumentError(std::string("cannot open ") + what + " file '" + path + "'");
    return in;
}

// ---- make-fixture ----------------------------------------------------------------------

struct MakeFixtureOptions {
    std::size_t games = 20;
    std::uint64_t seed = 0;
    std::int64_t tau = 53;
    std::string out = "out";
};

inline int make_fixture(const MakeFixtureOptions& opt, std::ostream& log) {
    if (opt.games == 0) throw ArgumentError("--games must be >= 1");
    if (opt.tau < 1) throw ArgumentError("--tau must be >= 1");
    const auto dir = prepare_out(opt.out);
    FixtureConfig cfg;
    cfg.games = opt.games;
    cfg.seed = opt.seed;
    cfg.tau = opt.tau;
    const auto fx = dauval::make_fixture(cfg);

    {
        auto out = open_out(dir / files::dau);
        write_catalog(out, fx.catalog);
    }
    {
        auto out = open_out(dir / files::financials);
        write_financials(out, fx.quarters);
    }
    nlohmann::ordered_json truth;
    truth["seed"] = opt.seed;
    truth["tau_days"] = opt.tau;
    truth["present"] = fx.present.iso();
    truth["tolerances"] = {{"gamma_abs", 0.05}, {"tau_days", 0}};
    for (const auto& g : fx.games)
        truth["games"].push_back({{"game_id", g.game_id},
                                  {"launch_date", g.launch_date.iso()},
                                  {"peak_age", g.peak_age},
                                  {"peak_dau", g.peak_dau},
                                  {"amplitude", g.amplitude},
                                  {"gamma", g.gamma}});
    truth["revenue_per_dau"] = {{"origin", fx.revenue_origin.iso()},
                                {"K", cfg.revenue_truth.K},
                                {"r_per_day", cfg.revenue_truth.r},
                                {"u0", cfg.revenue_truth.u0}};
    open_out(dir / files::fixture_truth) << truth.dump(2) << '\n';

    RunManifest manifest("make-fixture", dir);
    manifest.set("games", opt.games);
    manifest.set("seed", opt.seed);
    manifest.set("tau", opt.tau);
    manifest.set("out", opt.out);
    for (const char* f : {files::dau, files::financials, files::fixture_truth}) manifest.output(f);
    manifest.write();
    log << "wrote " << fx.catalog.size() << " games, " << fx.quarters.size() << " quarters to " << dir.string()
        << '\n';
    return ok;
}

// ---- fit-tails -------------------------------------------------------------------------

struct FitTailsOptions {
    std::string dau;
    std::string out = "out";
    std::size_t top = 20; // 0 = whole catalog
    bool allow_flat_fallback = false;
};

inline int fit_tails(const FitTailsOptions& opt, std::ostream& log) {
    auto in = open_in(opt.dau, "DAU");
    const auto catalog = load_catalog(in);
    if (catalog.empty()) throw ValidationError("DAU file contains no rows");
    const auto dir = prepare_out(opt.out);
    const std::size_t n = opt.top == 0 ? catalog.size() : std::min(opt.top, catalog.size());
    const auto selected = select_top(catalog, n);

    std::vector<GameTemplate> templates;
    nlohmann::ordered_json diag;
    diag["games_in_catalog"] = catalog.size();
    diag["games_selected"] = selected.size();
    diag["coverage_fraction"] = coverage_fraction(selected, catalog);
    for (const auto& g : selected) {
        templates.push_back(fit_template(g, opt.allow_flat_fallback));
        const auto& t = templates.back();
        nlohmann::ordered_json row{{"game_id", g.game_id}, {"observed_days", g.observed.size()}};
        if (t.tail) {
            row["t_min"] = t.tail->t_min;
            row["gamma"] = t.tail->gamma;
            row["r_squared"] = t.tail->r_squared;
            row["tail_points"] = t.last_observed_age() - t.tail->t_min + 1;
        } else {
            row["flat_fallback"] = true;
        }
        diag["games"].push_back(row);
        log << g.game_id << (t.tail ? ": gamma=" + csv::format(t.tail->gamma) + " r2=" + csv::format(t.tail->r_squared)
                                    : std::string(": flat fallback"))
            << '\n';
    }
    {
        auto out = open_out(dir / files::tails);
        write_tails(out, templates);
    }
    open_out(dir / files::fit_diagnostics) << diag.dump(2) << '\n';

    RunManifest manifest("fit-tails", dir);
    manifest.input("dau", opt.dau);
    manifest.set("top", opt.top);
    manifest.set("allow-flat-fallback", opt.allow_flat_fallback);
    manifest.set("out", opt.out);
    manifest.output(files::tails);
    manifest.output(files::fit_diagnostics);
    manifest.write();
    return ok;
}

// ---- simulate --------------------------------------------------------------------------

struct SimulateOptions {
    std::string dau;
    std::string tails;
    std::string out = "out";
    std::optional<std::int64_t> tau; // estimated from launch dates when absent
    std::uint64_t seed = 0;
    std::size_t scenarios = 1000;
    int horizon_years = 20;
    std::size_t threads = 0;
};

inline Date catalog_present(const Catalog& catalog) {
    Date present = catalog.front().observed.last_day();
    for (const auto& g : catalog) present = std::max(present, g.observed.last_day());
    return present;
}

inline int simulate(const SimulateOptions& opt, std::ostream& log) {
    if (opt.tau && *opt.tau < 1) throw ArgumentError("--tau must be >= 1");
    if (opt.scenarios < 1) throw ArgumentError("--scenarios must be >= 1");
    if (opt.horizon_years < 1) throw ArgumentError("--horizon-years must be >= 1");
    auto dau_in = open_in(opt.dau, "DAU");
    const auto catalog = load_catalog(dau_in);
    if (catalog.empty()) throw ValidationError("DAU file contains no rows");
    auto tails_in = open_in(opt.tails, "tails");
    const auto templates = templates_from_tails(read_tails(tails_in), catalog);
    const auto dir = prepare_out(opt.out);

    SimulationConfig cfg;
    cfg.templates = templates;
    cfg.tau = opt.tau ? *opt.tau : estimate_tau(templates);
    cfg.horizon_years = opt.horizon_years;
    cfg.n_scenarios = opt.scenarios;
    cfg.seed = opt.seed;
    cfg.present = catalog_present(catalog);
    cfg.threads = opt.threads;
    const auto ensemble = run_ensemble(cfg);
    {
        auto out = open_out(dir / files::scenarios);
        write_scenarios(out, ensemble);
    }
    {
        auto out = open_out(dir / files::band);
        write_band(out, ensemble);
    }
    log << ensemble.size() << " scenarios, tau=" << cfg.tau << " days, present=" << cfg.present.iso() << '\n';

    RunManifest manifest("simulate", dir);
    manifest.input("dau", opt.dau);
    manifest.input("tails", opt.tails);
    manifest.set("tau", cfg.tau);
    manifest.note("tau_estimated", !opt.tau.has_value());
    manifest.note("present", cfg.present.iso());
    manifest.set("seed", opt.seed);
    manifest.set("scenarios", opt.scenarios);
    manifest.set("horizon-years", opt.horizon_years);
    manifest.set("out", opt.out);
    manifest.output(files::scenarios);
    manifest.output(files::band);
    manifest.write();
    return ok;
}

// ---- value -----------------------------------------------------------------------------

struct ValueOptions {
    std::string scenarios;
    std::string financials;
    std::string dau;
    std::string out = "out";
    double margin = 0.15;
    double discount = 0.05;
    std::uint64_t seed = 0;
    std::size_t resamples = 1000;
    std::size_t threads = 0;
    std::string discounting = "year-end";
};

inline Discounting parse_discounting(const std::string& s) {
    if (s == "year-end") return Discounting::year_end;
    if (s == "daily") return Discounting::daily;
    throw ArgumentError("--discounting must be 'year-end' or 'daily', got '" + s + "'");
}

inline nlohmann::ordered_json params_json(const LogisticParams& p) {
    return {{"K", p.K}, {"r_per_day", p.r}, {"u0", p.u0}, {"rss", p.rss}};
}

inline LogisticParams params_from_json(const nlohmann::json& j) {
    return LogisticParams{j.at("K").get<double>(), j.at("r_per_day").get<double>(), j.at("u0").get<double>(),
                          j.value("rss", 0.0)};
}

inline int value(const ValueOptions& opt, std::ostream& log) {
    ValuationConfig vcfg;
    vcfg.profit_margin = opt.margin;
    vcfg.discount_rate = opt.discount;
    vcfg.discounting = parse_discounting(opt.discounting);
    vcfg.threads = opt.threads;
    vcfg.validate();
    auto fin_in = open_in(opt.financials, "financials");
    auto dau_in = open_in(opt.dau, "DAU");
    auto sc_in = open_in(opt.scenarios, "scenarios");

    const auto quarters = load_financials(fin_in);
    const auto catalog = load_catalog(dau_in);
    if (catalog.empty()) throw ValidationError("DAU file contains no rows");
    const auto present = catalog_present(catalog);
    const auto scenarios = read_scenarios(sc_in, present);
    const auto horizon_days = scenarios.front().dau.size() - 1;
    if (horizon_days < static_cast<std::size_t>(kDaysPerYear) || horizon_days % kDaysPerYear != 0)
        throw ValidationError("scenario span of " + std::to_string(horizon_days) + " days is not whole years");
    vcfg.horizon_years = static_cast<int>(horizon_days / kDaysPerYear);
    const auto dir = prepare_out(opt.out);

    const auto annual = trailing_annual_revenue(quarters);
    const auto points = revenue_per_dau(annual, aggregate_catalog(catalog));
    const auto rs = build_scenarios(points, annual.front().quarter_end, opt.seed, opt.resamples, opt.threads);

    const std::vector<std::pair<std::string, LogisticParams>> cases{
        {"base", rs.base}, {"high", rs.high}, {"extreme", rs.extreme}};
    std::string csv_buf = "scenario_id,revenue_case,value_usd\n";
    nlohmann::ordered_json summary = nlohmann::ordered_json::array();
    for (const auto& [name, params] : cases) {
        const auto dist = value_ensemble(scenarios, rs.curve(params), vcfg);
        for (std::size_t i = 0; i < scenarios.size(); ++i) {
            csv::append(csv_buf, static_cast<std::int64_t>(scenarios[i].scenario_id));
            csv_buf += ',' + name + ',';
            csv::append(csv_buf, dist.scenario_values[i]);
            csv_buf += '\n';
        }
        summary.push_back({{"case", name},
                           {"median", dist.median},
                           {"ci_low", dist.ci95_lower},
                           {"ci_high", dist.ci95_upper},
                           {"mean", dist.mean},
                           {"p_exceeds_ipo", probability_exceeds(dist, kIpoValueUsd)}});
        log << name << ": median " << csv::format(dist.median) << " USD, 95% CI [" << csv::format(dist.ci95_lower)
            << ", " << csv::format(dist.ci95_upper) << "]\n";
    }
    open_out(dir / files::valuations) << csv_buf;
    open_out(dir / files::summary) << summary.dump(2) << '\n';

    nlohmann::ordered_json fit;
    fit["origin"] = rs.origin.iso();
    fit["present"] = present.iso();
    fit["horizon_years"] = vcfg.horizon_years;
    fit["bootstrap"] = {{"resamples", opt.resamples}, {"seed", opt.seed}, {"k80", rs.k80}, {"k95", rs.k95}};
    fit["base"] = params_json(rs.base);
    fit["high"] = params_json(rs.high);
    fit["extreme"] = params_json(rs.extreme);
    for (std::size_t i = 0; i < points.size(); ++i)
        fit["points"].push_back({{"quarter_end", annual[i].quarter_end.iso()},
                                 {"t_days", points[i].t},
                                 {"annual_revenue_usd", annual[i].revenue},
                                 {"revenue_per_dau", points[i].y}});
    open_out(dir / files::revenue_fit) << fit.dump(2) << '\n';

    RunManifest manifest("value", dir);
    manifest.input("scenarios", opt.scenarios);
    manifest.input("financials", opt.financials);
    manifest.input("dau", opt.dau);
    manifest.set("margin", opt.margin);
    manifest.set("discount", opt.discount);
    manifest.set("discounting", opt.discounting);
    manifest.set("seed", opt.seed);
    manifest.set("resamples", opt.resamples);
    manifest.set("out", opt.out);
    for (const char* f : {files::valuations, files::summary, files::revenue_fit}) manifest.output(f);
    manifest.write();
    return ok;
}

// ---- report ----------------------------------------------------------------------------

struct ReportOptions {
    std::string out = "out"; // directory holding summary.json and revenue_fit.json
};

inline nlohmann::json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ArgumentError("cannot open '" + path.string() + "'; run `value` first");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("'" + path.string() + "': " + e.what());
    }
}

/// Table of median and 95% interval per revenue case (billions USD), and the three
/// revenue-per-DAU curves sampled monthly as plot-ready CSV.
inline int report(const ReportOptions& opt, std::ostream& log) {
    const std::filesystem::path dir(opt.out);
    const auto summary = read_json(dir / files::summary);
    const auto fit = read_json(dir / files::revenue_fit);

    std::ostringstream table;
    table << std::fixed << std::setprecision(2);
    table << "Scenario [billion USD]  Valuation  95% two-sided confidence interval  P(value >= IPO)\n";
    for (const auto& row : summary) {
        std::string name = row.at("case").get<std::string>();
        name[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(name[0])));
        table << std::left << std::setw(24) << name << std::setw(11) << row.at("median").get<double>() / 1e9 << "["
              << row.at("ci_low").get<double>() / 1e9 << "; " << row.at("ci_high").get<double>() / 1e9 << "]"
              << std::string(20, ' ') << std::setprecision(3) << row.at("p_exceeds_ipo").get<double>()
              << std::setprecision(2) << '\n';
    }
    table << "\nRevenue per DAU (USD/DAU/year): K base " << fit.at("base").at("K").get<double>() << ", high "
          << fit.at("high").at("K").get<double>() << ", extreme " << fit.at("extreme").at("K").get<double>() << '\n';
    open_out(dir / files::report) << table.str();
    log << table.str();

    const Date origin = Date::parse(fit.at("origin").get<std::string>());
    const Date present = Date::parse(fit.at("present").get<std::string>());
    const auto horizon = fit.at("horizon_years").get<std::int64_t>() * kDaysPerYear;
    const RevenueCurve base{params_from_json(fit.at("base")), origin};
    const RevenueCurve high{params_from_json(fit.at("high")), origin};
    const RevenueCurve extreme{params_from_json(fit.at("extreme")), origin};
    std::string buf = "date,t_days,base,high,extreme\n";
    for (Date d = origin; d <= present + horizon; d = d + 30) {
        buf += d.iso() + ',';
        csv::append(buf, d - origin);
        for (const auto* c : {&base, &high, &extreme}) {
            buf += ',';
            csv::append(buf, c->at(d));
        }
        buf += '\n';
    }
    open_out(dir / files::revenue_curves) << buf;

    RunManifest manifest("report", dir);
    manifest.digest("summary", dir / files::summary);
    manifest.digest("revenue_fit", dir / files::revenue_fit);
    manifest.set("out", opt.out);
    manifest.output(files::report);
    manifest.output(files::revenue_curves);
    manifest.write();
    return ok;
}

} // namespace dauval::cmd
