// tomolab command-line front end. Links the shared C API only.

#include <CLI11.hpp>

#include <cstdio>
#include <string>
#include <vector>

#include "tomolab/tomolab.h"

int main(int argc, char** argv) {
    CLI::App app{"tomolab: integral-geometry and nonlocal-operator experiments"};
    app.require_subcommand(1);

    int threads = 0;
    app.add_option("--threads", threads, "cap worker threads (default: TOMOLAB_THREADS or all)");

    std::string config_path;
    CLI::App* run = app.add_subcommand("run", "run an experiment config");
    run->add_option("config", config_path, "JSON experiment config")->required();

    std::string report_dir;
    CLI::App* report = app.add_subcommand("report", "summarize manifests and render outputs");
    report->add_option("dir", report_dir, "directory containing manifest.json files")->required();

    CLI::App* list = app.add_subcommand("list", "enumerate experiment names");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (threads > 0) tl_set_max_threads(threads);

    if (run->parsed()) return tl_run_config(config_path.c_str());
    if (report->parsed()) return tl_report(report_dir.c_str());
    if (list->parsed()) {
        std::vector<char> buffer(4096);
        if (tl_list_experiments(buffer.data(), buffer.size()) != TL_OK) {
            std::fprintf(stderr, "error: %s\n", tl_last_error());
            return 2;
        }
        std::fputs(buffer.data(), stdout);
        return 0;
    }
    return 2;
}
