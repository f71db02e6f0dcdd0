#include <csignal>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "role/analytics/report.hpp"
#include "role/analytics/synthetic.hpp"
#include "role/error.hpp"
#include "role/server/http_server.hpp"

#ifndef ROLE_DEFAULT_CATALOG
#define ROLE_DEFAULT_CATALOG "data/default_catalog.json"
#endif

namespace {

namespace an = role::analytics;

int analyze(const an::RunConfig& config, const std::vector<std::string>& outputs) {
    const auto report = an::run(config);
    if (outputs.empty()) std::cout << an::to_json(report).dump(2) << '\n';
    for (const auto& out : outputs) an::write_report(report, out);
    return 0;
}

int generate(an::SyntheticConfig config, const std::string& catalog_path, const std::string& out) {
    if (config.widgets.empty()) {
        const auto catalog = role::load_catalog(catalog_path);
        for (const auto& w : catalog.widgets()) config.widgets.push_back(w.id);
    }
    std::ofstream file;
    std::ostream* os = &std::cout;
    if (out != "-") {
        file.open(out, std::ios::binary);
        if (!file) throw role::Error(role::ErrorCode::parse_error, "cannot write " + out);
        os = &file;
    }
    for (const auto& line : an::generate_log(config)) *os << line << '\n';
    return 0;
}

int serve(role::server::PlatformConfig config, role::server::ServerOptions options) {
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);  // worker threads inherit the mask

    role::server::Platform platform(std::move(config));
    role::server::HttpServer server(platform, options);
    const auto port = server.start();
    std::cerr << "listening on http://" << options.address << ":" << port << "\n";
    int sig = 0;
    sigwait(&signals, &sig);
    std::cerr << "shutting down\n";
    server.stop();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ROLE self-regulated learning platform"};
    app.require_subcommand(1);

    an::RunConfig run;
    run.catalog = ROLE_DEFAULT_CATALOG;
    std::string log_path, catalog = ROLE_DEFAULT_CATALOG, bots, partners, geo, srl_widgets;
    std::vector<std::string> outputs;
    bool serial = false;
    auto* analyze_cmd = app.add_subcommand("analyze", "Usage analytics over an access log or event log");
    analyze_cmd->add_option("--log", log_path, "Combined Log Format or JSON Lines event log")->required()->check(CLI::ExistingFile);
    analyze_cmd->add_option("--bots", bots, "user-agent patterns of automated agents")->check(CLI::ExistingFile);
    analyze_cmd->add_option("--partners", partners, "partner IPs and CIDR blocks")->check(CLI::ExistingFile);
    analyze_cmd->add_option("--geo", geo, "offline prefix,city,country table")->check(CLI::ExistingFile);
    analyze_cmd->add_option("--srl-widgets", srl_widgets, "SRL widget ids, one per line (default: catalog flags)")
        ->check(CLI::ExistingFile);
    analyze_cmd->add_option("--catalog", catalog, "widget catalog")->check(CLI::ExistingFile);
    analyze_cmd->add_option("--active-loads", run.rule.min_loads, "loads needed for an active space")->check(CLI::NonNegativeNumber);
    analyze_cmd->add_option("--active-days", run.rule.min_days, "distinct load days for an active space")->check(CLI::NonNegativeNumber);
    analyze_cmd->add_option("--out", outputs, "report.json or report.csv; repeatable (default: JSON to stdout)");
    analyze_cmd->add_option("--threads", run.execution.threads, "OpenMP threads (0 = default)")->check(CLI::NonNegativeNumber);
    analyze_cmd->add_flag("--serial", serial, "run the serial reference kernels");

    an::SyntheticConfig synth;
    std::string synth_out = "-";
    auto* gen_cmd = app.add_subcommand("gen-log", "Write a deterministic synthetic access log");
    gen_cmd->add_option("--seed", synth.seed);
    gen_cmd->add_option("--entries", synth.entries);
    gen_cmd->add_option("--days", synth.days)->check(CLI::PositiveNumber);
    gen_cmd->add_option("--users", synth.users)->check(CLI::PositiveNumber);
    gen_cmd->add_option("--spaces", synth.spaces)->check(CLI::PositiveNumber);
    gen_cmd->add_option("--catalog", catalog, "widget ids are drawn from this catalog")->check(CLI::ExistingFile);
    gen_cmd->add_option("--out", synth_out, "output file, - for stdout");

    role::server::PlatformConfig platform;
    role::server::ServerOptions options;
    std::string data_dir, corpus, access_log, static_dir;
    auto* serve_cmd = app.add_subcommand("serve", "Run the platform server");
    serve_cmd->add_option("--address", options.address);
    serve_cmd->add_option("--port", options.port);
    serve_cmd->add_option("--threads", options.threads)->check(CLI::PositiveNumber);
    serve_cmd->add_option("--catalog", catalog)->check(CLI::ExistingFile);
    serve_cmd->add_option("--data-dir", data_dir, "event log and scheduler state; in-memory when omitted");
    serve_cmd->add_option("--corpus", corpus, "learning object corpus for content recommendations")->check(CLI::ExistingFile);
    serve_cmd->add_option("--access-log", access_log, "append requests in Combined Log Format");
    serve_cmd->add_option("--static", static_dir, "directory served for non-API paths")->check(CLI::ExistingDirectory);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*analyze_cmd) {
            run.log = log_path;
            run.catalog = catalog;
            if (!bots.empty()) run.bots = bots;
            if (!partners.empty()) run.partners = partners;
            if (!geo.empty()) run.geo = geo;
            if (!srl_widgets.empty()) run.srl_widgets = srl_widgets;
            if (serial) run.execution.mode = an::Execution::serial;
            return analyze(run, outputs);
        }
        if (*gen_cmd) return generate(synth, catalog, synth_out);
        if (*serve_cmd) {
            platform.catalog = catalog;
            if (!data_dir.empty()) platform.data_dir = data_dir;
            if (!corpus.empty()) platform.corpus = corpus;
            if (!access_log.empty()) options.access_log = access_log;
            if (!static_dir.empty()) options.static_dir = static_dir;
            return serve(std::move(platform), options);
        }
    } catch (const role::ValidationError& e) {
        std::cerr << "error: " << role::to_string(e.code()) << ": " << e.what() << '\n';
        for (const auto& p : e.problems()) std::cerr << "  " << p << '\n';
        return 2;
    } catch (const role::Error& e) {
        std::cerr << "error: " << role::to_string(e.code()) << ": " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
