#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "formfind/model.hpp"
#include "formfind/solver.hpp"

namespace formfind {

inline constexpr int kProtocolVersion = 1;

/// JSON text with every floating-point number written as "%.17g".
std::string encode_message(const nlohmann::json& message);

/// A command as it was applied: the relaxation step it met and the command.
struct LoggedCommand {
    int step = 0;
    nlohmann::json command;
};

/// Synchronous session state machine. Commands are applied one at a time
/// between steps; every call returns the events it produced. The threaded
/// SteeringSession and offline replay both drive this class.
class SessionCore {
public:
    explicit SessionCore(std::optional<Model> model = std::nullopt);

    std::vector<nlohmann::json> apply(const nlohmann::json& command);

    /// Loads a starting model without logging it as a command.
    std::vector<nlohmann::json> preload(Model model);

    /// One relaxation step while running. Emits a state event every
    /// `subscribe.every` steps and a converged event once on convergence.
    std::vector<nlohmann::json> advance();

    bool running() const noexcept { return running_; }
    bool has_model() const noexcept { return relax_ != nullptr; }
    const Relaxation* relaxation() const noexcept { return relax_.get(); }
    const std::vector<LoggedCommand>& log() const noexcept { return log_; }
    std::unique_ptr<Relaxation> release();

    nlohmann::json state_event();
    nlohmann::json hello_event() const;

private:
    void load(Model model, std::vector<nlohmann::json>& events);
    void dispatch(const std::string& name, const nlohmann::json& command, std::vector<nlohmann::json>& events);
    Relaxation& require_model();
    void step_once(std::vector<nlohmann::json>& events, bool emit_periodic);

    std::unique_ptr<Relaxation> relax_;
    bool running_ = false;
    bool announced_ = false;
    int every_ = 10;
    std::vector<LoggedCommand> log_;
};

/// Replays a command log from the same starting model and returns the
/// relaxation after `end_step` (or the end of the log, whichever is later).
std::unique_ptr<Relaxation> replay(std::optional<Model> model, const std::vector<LoggedCommand>& log,
                                   int end_step);

/// Threaded session: the solver runs on its own worker, commands are queued
/// and drained between steps, and events collect in a bounded buffer that
/// drops the oldest state events first and never drops anything else.
class SteeringSession {
public:
    explicit SteeringSession(std::optional<Model> model = std::nullopt, std::size_t buffer = 256);
    ~SteeringSession();

    SteeringSession(const SteeringSession&) = delete;
    SteeringSession& operator=(const SteeringSession&) = delete;

    /// Queues a raw text message. Malformed JSON produces an error event.
    void submit(std::string text);

    /// Waits up to `timeout` for events and returns all buffered ones as
    /// encoded text, oldest first.
    std::vector<std::string> take_events(std::chrono::milliseconds timeout);

    /// Called (from the worker) whenever events were added.
    void set_notifier(std::function<void()> notify);

    std::size_t dropped_states() const;
    std::vector<LoggedCommand> log() const;

    void stop();

private:
    struct Event {
        bool state = false;
        std::string text;
    };

    void worker();
    void push(std::vector<nlohmann::json> events);

    SessionCore core_;
    std::size_t capacity_;

    mutable std::mutex mutex_;
    std::condition_variable commands_cv_;
    std::condition_variable events_cv_;
    std::deque<std::string> commands_;
    std::deque<Event> events_;
    std::function<void()> notify_;
    std::size_t dropped_ = 0;
    std::vector<LoggedCommand> log_copy_;
    bool stopping_ = false;
    std::thread thread_;
};

}  // namespace formfind
