#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "memsim/engine.hpp"
#include "memsim/json_io.hpp"

namespace memsim {

struct GatewayOptions {
    std::string host = "127.0.0.1";  // loopback unless exposed
    int port = 8080;
    std::uint64_t default_decimation = 20;
    ActorOptions actor;
};

/// Reads a gateway settings file: {"host", "port", "expose", "pace",
/// "telemetry_buffer", "default_decimation"}; absent keys keep `base`.
GatewayOptions gateway_options_from_json(const Json& j, GatewayOptions base = {});

/// REST + server-sent-events front end over a SessionManager.
class Gateway {
public:
    explicit Gateway(GatewayOptions options);
    ~Gateway();
    Gateway(const Gateway&) = delete;
    Gateway& operator=(const Gateway&) = delete;

    /// Binds the listening socket; port 0 picks a free port. Returns the
    /// bound port or throws std::runtime_error.
    int bind();
    /// Serves until stop(). bind() must have succeeded.
    void serve();
    /// bind() + serve() on a background thread; returns the port.
    int start_background();
    void stop();

    SessionManager& sessions() noexcept;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace memsim
