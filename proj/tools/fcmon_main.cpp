#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fcmon/errors.hpp"
#include "fcmon/evaluate.hpp"
#include "fcmon/parallel.hpp"
#include "fcmon/pipeline.hpp"
#include "fcmon/simulate.hpp"
#include "fcmon/text.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kRuntimeError = 1;
constexpr int kConfigError = 2;

void print_report(const fcmon::Report& r) {
    std::cout << "forecaster " << r.forecaster << ", policy " << r.policy << ", seed " << r.seed << ", config "
              << fcmon::hex64(r.config_hash) << '\n';
    for (const auto& s : r.streams)
        std::cout << "  " << s.stream_id << "  smape " << fcmon::format_double(s.smape) << "  breaks " << s.n_breaks
                  << '\n';
    std::cout << "  Average  smape " << fcmon::format_double(r.avg_smape) << "  breaks "
              << fcmon::format_double(r.avg_breaks) << '\n';
}

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream f(path);
    if (!f) throw fcmon::Error("cannot write " + path.string());
    return f;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monitored retraining of per-stream demand forecasters"};
    app.require_subcommand(1);
    unsigned threads = fcmon::default_threads();
    std::string out_dir;
    app.add_option("--threads", threads, "Worker threads (results do not depend on it)")
        ->check(CLI::PositiveNumber);
    app.add_option("--out", out_dir, "Output directory (gen-data: output CSV file)");

    auto* run_cmd = app.add_subcommand("run", "Run one monitored forecasting pipeline");
    std::string config_path;
    run_cmd->add_option("--config", config_path, "Run config (key = value)")->required();
    run_cmd->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    run_cmd->add_option("--out", out_dir, "Output directory");

    auto* cmp_cmd = app.add_subcommand("compare", "Run several configs on shared data");
    std::vector<std::string> config_paths;
    cmp_cmd->add_option("--configs", config_paths, "Run configs")->required()->expected(1, -1);
    cmp_cmd->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    cmp_cmd->add_option("--out", out_dir, "Output directory");

    auto* null_cmd = app.add_subcommand("null-study", "Rejection frequency of the mean test on iid losses");
    std::string dist = "gaussian";
    fcmon::NullStudyConfig null_cfg;
    std::string reset = "rejecting_batch";
    null_cmd->add_option("--dist", dist, "gaussian or chisq5");
    null_cmd->add_option("--length", null_cfg.stream_length, "Stream length");
    null_cmd->add_option("--batch", null_cfg.batch_size, "Batch size");
    null_cmd->add_option("--alpha", null_cfg.alpha, "Test level");
    null_cmd->add_option("--reps", null_cfg.n_replications, "Replications");
    null_cmd->add_option("--seed", null_cfg.seed, "Seed");
    null_cmd->add_option("--reset", reset, "Reference reset rule")
        ->check(CLI::IsMember({"rejecting_batch", "next_batch"}));
    null_cmd->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    null_cmd->add_option("--out", out_dir, "Output directory for null_study.csv");

    auto* gen_cmd = app.add_subcommand("gen-data", "Write a synthetic scenario as tick,stream_id,value CSV");
    std::string scenario_path;
    std::optional<std::uint64_t> gen_seed;
    gen_cmd->add_option("--scenario", scenario_path, "Scenario file (key = value) or 'default'")->required();
    gen_cmd->add_option("--seed", gen_seed, "Seed (overrides the scenario's)");
    gen_cmd->add_option("--out", out_dir, "Output CSV")->required();

    auto* rep_cmd = app.add_subcommand("report", "Rebuild a report from a run's forecasts and decisions");
    std::string forecasts_path, decisions_path;
    rep_cmd->add_option("--forecasts", forecasts_path, "forecasts.csv")->required()->check(CLI::ExistingFile);
    rep_cmd->add_option("--decisions", decisions_path, "decisions.csv")->required()->check(CLI::ExistingFile);
    rep_cmd->add_option("--out", out_dir, "Output directory for report.csv / report.json");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::cerr << app.help();
        return kConfigError;
    }

    try {
        if (*run_cmd) {
            auto cfg = fcmon::load_run_config(config_path);
            cfg.threads = threads;
            const fs::path dir = !out_dir.empty() ? fs::path(out_dir) : (cfg.out_dir.empty() ? fs::path("out") : cfg.out_dir);
            const auto log = fcmon::run(cfg);
            const auto report = fcmon::build_report(log);
            fcmon::write_run_outputs(log, report, dir);
            print_report(report);
            std::cout << "wrote " << dir.string() << '\n';
        } else if (*cmp_cmd) {
            std::vector<fcmon::RunConfig> cfgs;
            for (const auto& p : config_paths) {
                cfgs.push_back(fcmon::load_run_config(p));
                cfgs.back().threads = threads;
            }
            const auto cmp = fcmon::compare_policies(cfgs);
            fcmon::write_comparison_csv(cmp, std::cout);
            if (!out_dir.empty()) {
                auto f = open_out(fs::path(out_dir) / "comparison.csv");
                fcmon::write_comparison_csv(cmp, f);
                for (std::size_t i = 0; i < cmp.logs.size(); ++i)
                    fcmon::write_run_outputs(cmp.logs[i], cmp.reports[i], fs::path(out_dir) / ("run" + std::to_string(i + 1)));
            }
        } else if (*null_cmd) {
            null_cfg.distribution = fcmon::parse_null_distribution(dist);
            null_cfg.reset = reset == "next_batch" ? fcmon::ResetMode::NextBatch : fcmon::ResetMode::RejectingBatch;
            const auto res = fcmon::run_null_study(null_cfg, threads);
            std::cout << fcmon::format_double(res.frequency()) << '\n';
            auto f = open_out(fs::path(out_dir.empty() ? "." : out_dir) / "null_study.csv");
            f << "# seed=" << null_cfg.seed << ",reps=" << null_cfg.n_replications << '\n';
            fcmon::write_null_study_csv({{null_cfg, res}}, f);
        } else if (*gen_cmd) {
            fcmon::RegimeScenario sc;
            if (scenario_path == "default") {
                sc = fcmon::default_scenario(gen_seed.value_or(1));
            } else {
                sc = fcmon::load_scenario(scenario_path);
                if (gen_seed) sc.seed = *gen_seed;
            }
            auto f = open_out(out_dir);
            f << "# scenario_seed=" << sc.seed << '\n';
            fcmon::write_csv(fcmon::gen_regime_streams(sc), f);
            std::cout << "wrote " << out_dir << '\n';
        } else if (*rep_cmd) {
            std::ifstream fc(forecasts_path), dc(decisions_path);
            const auto report = fcmon::build_report(fcmon::read_run_log(fc, dc));
            print_report(report);
            if (!out_dir.empty()) {
                auto c = open_out(fs::path(out_dir) / "report.csv");
                fcmon::write_report_csv(report, c);
                auto j = open_out(fs::path(out_dir) / "report.json");
                fcmon::write_report_json(report, j);
            }
        }
    } catch (const fcmon::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
    return kOk;
}
