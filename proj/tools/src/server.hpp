#pragma once

#include <memory>
#include <optional>

#include "formfind/model.hpp"

namespace formfind::tools {

/// WebSocket host for one steering session at /session. A second client
/// while one is connected receives a busy error and is closed.
class SteeringServer {
public:
    /// Binds immediately (port 0 picks a free port). Throws formfind::Error
    /// when the port cannot be bound.
    SteeringServer(unsigned short port, std::optional<Model> preload = std::nullopt);
    ~SteeringServer();

    SteeringServer(const SteeringServer&) = delete;
    SteeringServer& operator=(const SteeringServer&) = delete;

    unsigned short port() const noexcept;

    /// Serves until stop() (or SIGINT/SIGTERM when `handle_signals`).
    void run(bool handle_signals = false);

    /// Thread-safe.
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace formfind::tools
