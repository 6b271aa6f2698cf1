/// @file nsda_cli.cpp
/// @brief Command-line front end; drives the shared library through the C API.

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nsda/nsda.h"

int main(int argc, char** argv) {
    CLI::App app{"Continuous data assimilation for 2D periodic Navier-Stokes "
                 "with stochastically noisy observations"};

    std::string config_path;
    std::string mode = "ensemble";
    std::string out_dir = "out";
    std::string bound;
    std::string replay;
    std::vector<std::string> sets;
    std::int64_t seed = -1;
    int members = -1;
    double epsilon = -1.0;

    app.add_option("config", config_path, "run configuration file")
        ->check(CLI::ExistingFile);
    app.add_option("--mode", mode, "reference|assimilate|ensemble|verify|calibrate")
        ->check(CLI::IsMember(
            {"reference", "assimilate", "ensemble", "verify", "calibrate"}));
    app.add_option("--seed", seed, "override the harness seed");
    app.add_option("--members", members, "override the ensemble size");
    app.add_option("--out", out_dir, "artifact output directory");
    app.add_option("--bound", bound, "bound mode")
        ->check(CLI::IsMember({"main1", "cor1", "cor2", "main2", "cor1main2",
                               "nodcor1", "nodes-oversampled"}));
    app.add_option("--epsilon", epsilon, "oversampling epsilon in (0,1)");
    app.add_option("--replay", replay,
                   "assimilate observations from a log CSV instead of synthesizing")
        ->check(CLI::ExistingFile);
    app.add_option("--set", sets, "override a config value, section.key=value");

    CLI11_PARSE(app, argc, argv);

    nsda_config* cfg = nullptr;
    nsda_status st = config_path.empty()
                         ? nsda_config_create(&cfg)
                         : nsda_config_from_file(config_path.c_str(), &cfg);
    if (st != NSDA_OK) {
        std::fprintf(stderr, "error: %s\n", nsda_last_error());
        return 2;
    }
    for (const auto& kv : sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) {
            std::fprintf(stderr, "error: --set expects section.key=value, got '%s'\n",
                         kv.c_str());
            nsda_config_destroy(cfg);
            return 2;
        }
        st = nsda_config_set(cfg, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str());
        if (st != NSDA_OK) {
            std::fprintf(stderr, "error: %s\n", nsda_last_error());
            nsda_config_destroy(cfg);
            return 2;
        }
    }

    nsda_result* res = nullptr;
    st = nsda_run(cfg, mode.c_str(), out_dir.c_str(),
                  replay.empty() ? nullptr : replay.c_str(), seed, members,
                  bound.empty() ? nullptr : bound.c_str(), epsilon, &res);
    nsda_config_destroy(cfg);

    if (st != NSDA_OK && st != NSDA_ERR_CHECKS_FAILED) {
        std::fprintf(stderr, "error: %s\n", nsda_last_error());
        return 2;
    }

    std::printf("%s\n", nsda_result_report_json(res));
    if (nsda_result_manifest_path(res)[0])
        std::fprintf(stderr, "manifest: %s\n", nsda_result_manifest_path(res));
    if (nsda_result_series_path(res)[0])
        std::fprintf(stderr, "series:   %s\n", nsda_result_series_path(res));
    if (nsda_result_report_path(res)[0])
        std::fprintf(stderr, "report:   %s\n", nsda_result_report_path(res));
    if (nsda_result_obslog_path(res)[0])
        std::fprintf(stderr, "obs log:  %s\n", nsda_result_obslog_path(res));

    const int rc = nsda_result_checks_passed(res) ? 0 : 1;
    nsda_result_destroy(res);
    return rc;
}
