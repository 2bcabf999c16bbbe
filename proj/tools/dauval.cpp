// dauval: DAU-driven Monte Carlo valuation pipeline.
//
//   dauval make-fixture --games 20 --seed 7 --out run
//   dauval fit-tails    --dau run/dau.csv --out run
//   dauval simulate     --dau run/dau.csv --tails run/tails.csv --scenarios 1000 --out run
//   dauval value        --scenarios run/scenarios.csv --financials run/financials.csv --dau run/dau.csv --out run
//   dauval report       --out run
//
// Every subcommand accepts --config FILE: `key = value` lines under a [subcommand]
// section, keys are flag names. Flags given on the command line win over the file.

#include <iostream>

#include "CLI11.hpp"

#include "dauval/commands.hpp"

int main(int argc, char** argv) {
    using namespace dauval;

    CLI::App app{"Monte Carlo valuation from daily-active-user histories"};
    app.require_subcommand(1);
    app.set_version_flag("--version", cmd::kToolVersion);
    // The config file lives on the top-level app (CLI11 only reads it there); fallthrough lets
    // it be given after the subcommand name. Keys sit under a [subcommand] section.
    app.set_config("--config", "", "key = value file with a [subcommand] section; command-line flags win");
    app.fallthrough();

    cmd::MakeFixtureOptions fixture;
    auto* make_fixture = app.add_subcommand("make-fixture", "write a synthetic DAU + financials fixture");
    make_fixture->add_option("--games", fixture.games, "number of games")->capture_default_str();
    make_fixture->add_option("--seed", fixture.seed, "random seed")->capture_default_str();
    make_fixture->add_option("--tau", fixture.tau, "days between launches")->capture_default_str();
    make_fixture->add_option("--out", fixture.out, "output directory")->capture_default_str();

    cmd::FitTailsOptions tails;
    auto* fit_tails = app.add_subcommand("fit-tails", "fit power-law decay tails of the top games");
    fit_tails->add_option("--dau", tails.dau, "DAU CSV (date,game_id,dau)")->required();
    fit_tails->add_option("--top", tails.top, "number of top games to keep, 0 = all")->capture_default_str();
    fit_tails->add_flag("--allow-flat-fallback", tails.allow_flat_fallback,
                        "keep the last observed value for games whose tail cannot be fitted");
    fit_tails->add_option("--out", tails.out, "output directory")->capture_default_str();

    cmd::SimulateOptions sim;
    std::int64_t tau = 0;
    auto* simulate = app.add_subcommand("simulate", "run the Monte Carlo user-base ensemble");
    simulate->add_option("--dau", sim.dau, "DAU CSV")->required();
    simulate->add_option("--tails", sim.tails, "tails CSV from fit-tails")->required();
    auto* tau_opt = simulate->add_option("--tau", tau, "days between launches (default: estimated)");
    simulate->add_option("--seed", sim.seed, "random seed")->capture_default_str();
    simulate->add_option("--scenarios", sim.scenarios, "number of scenarios")->capture_default_str();
    simulate->add_option("--horizon-years", sim.horizon_years, "simulation horizon")->capture_default_str();
    simulate->add_option("--threads", sim.threads, "worker threads, 0 = all cores")->capture_default_str();
    simulate->add_option("--out", sim.out, "output directory")->capture_default_str();

    cmd::ValueOptions val;
    auto* value = app.add_subcommand("value", "value every scenario under three revenue cases");
    value->add_option("--scenarios", val.scenarios, "scenarios CSV from simulate")->required();
    value->add_option("--financials", val.financials, "quarterly financials CSV")->required();
    value->add_option("--dau", val.dau, "DAU CSV")->required();
    value->add_option("--margin", val.margin, "profit margin")->capture_default_str();
    value->add_option("--discount", val.discount, "annual discount rate")->capture_default_str();
    value->add_option("--discounting", val.discounting, "year-end | daily")->capture_default_str();
    value->add_option("--seed", val.seed, "bootstrap seed")->capture_default_str();
    value->add_option("--resamples", val.resamples, "bootstrap resamples")->capture_default_str();
    value->add_option("--threads", val.threads, "worker threads, 0 = all cores")->capture_default_str();
    value->add_option("--out", val.out, "output directory")->capture_default_str();

    cmd::ReportOptions rep;
    auto* report = app.add_subcommand("report", "summary table and revenue curves from a value run");
    report->add_option("--out", rep.out, "directory of the value run")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : cmd::usage;
    }

    try {
        if (*make_fixture) return cmd::make_fixture(fixture, std::cout);
        if (*fit_tails) return cmd::fit_tails(tails, std::cout);
        if (*simulate) {
            if (tau_opt->count() > 0) sim.tau = tau;
            return cmd::simulate(sim, std::cout);
        }
        if (*value) return cmd::value(val, std::cout);
        if (*report) return cmd::report(rep, std::cout);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return cmd::exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return cmd::data_error;
    }
    return cmd::usage;
}
