#include <CLI11.hpp>

#include <csignal>
#include <cstdlib>
#include <iostream>

#include "memsim/cli.hpp"
#include "memsim/gateway.hpp"

namespace {
memsim::Gateway* g_gateway = nullptr;
void on_signal(int) {
    if (g_gateway) g_gateway->stop();
}
}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"HTTP gateway for live simulation sessions"};
    std::string config_path;
    std::optional<int> port;
    bool expose = false;
    std::optional<double> pace;
    app.add_option("--config", config_path, "Gateway settings JSON file");
    app.add_option("--port", port, "Listen port (default: MEMSIM_PORT or 8080)");
    app.add_flag("--expose", expose, "Listen on all interfaces instead of loopback");
    app.add_option("--pace", pace, "Sim seconds per wall second (0 = as fast as possible)");
    CLI11_PARSE(app, argc, argv);

    memsim::GatewayOptions options;
    try {
        if (!config_path.empty()) {
            options = memsim::gateway_options_from_json(memsim::parse_json(memsim::cli::read_file(config_path)));
        }
        if (const char* env = std::getenv("MEMSIM_PORT")) options.port = std::stoi(env);
        if (port) options.port = *port;
        if (expose) options.host = "0.0.0.0";
        if (pace) options.actor.pace = *pace;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }

    memsim::Gateway gateway(options);
    int bound = 0;
    try {
        bound = gateway.bind();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    g_gateway = &gateway;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::cout << "listening on http://" << options.host << ":" << bound << std::endl;
    gateway.serve();
    return 0;
}
