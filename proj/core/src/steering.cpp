#include "formfind/steering.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "formfind/errors.hpp"
#include "formfind/model_io.hpp"

namespace formfind {

using nlohmann::json;

namespace {

void encode(const json& value, std::string& out) {
    switch (value.type()) {
        case json::value_t::object: {
            out += '{';
            bool first = true;
            for (const auto& [key, item] : value.items()) {
                if (!first) out += ',';
                first = false;
                out += json(key).dump();
                out += ':';
                encode(item, out);
            }
            out += '}';
            break;
        }
        case json::value_t::array: {
            out += '[';
            for (std::size_t i = 0; i < value.size(); ++i) {
                if (i > 0) out += ',';
                encode(value[i], out);
            }
            out += ']';
            break;
        }
        case json::value_t::number_float: {
            const double v = value.get<double>();
            if (!std::isfinite(v)) {
                out += "null";
                break;
            }
            char buffer[32];
            std::snprintf(buffer, sizeof buffer, "%.17g", v);
            out += buffer;
            break;
        }
        default:
            out += value.dump();
    }
}

json make_error(const std::string& message, const std::string& command = {}) {
    json e = {{"event", "error"}, {"message", message}};
    if (!command.empty()) e["command"] = command;
    return e;
}

double number_field(const json& command, const char* key) {
    auto it = command.find(key);
    if (it == command.end() || !it->is_number()) {
        throw ValidationError(std::string("field \"") + key + "\" must be a number");
    }
    return it->get<double>();
}

int int_field(const json& command, const char* key) {
    auto it = command.find(key);
    if (it == command.end() || !it->is_number_integer()) {
        throw ValidationError(std::string("field \"") + key + "\" must be an integer");
    }
    return it->get<int>();
}

}  // namespace

std::string encode_message(const json& message) {
    std::string out;
    encode(message, out);
    return out;
}

SessionCore::SessionCore(std::optional<Model> model) {
    if (model) preload(std::move(*model));
}

std::vector<json> SessionCore::preload(Model model) {
    std::vector<json> events;
    load(std::move(model), events);
    return events;
}

json SessionCore::hello_event() const { return {{"event", "hello"}, {"version", kProtocolVersion}}; }

void SessionCore::load(Model model, std::vector<json>& events) {
    auto relax = std::make_unique<Relaxation>(std::move(model));
    relax_ = std::move(relax);
    running_ = false;
    announced_ = false;

    const Model& m = relax_->model();
    json ids = json::array();
    for (const Node& n : m.nodes) ids.push_back(n.id);
    std::size_t fixed = 0;
    for (const Node& n : m.nodes) fixed += n.fixed ? 1 : 0;
    events.push_back({{"event", "model_loaded"},
                      {"counts",
                       {{"nodes", m.nodes.size()},
                        {"free_nodes", m.nodes.size() - fixed},
                        {"elements", m.elements.size()},
                        {"functional", m.count(ElementRole::functional)},
                        {"elastic", m.count(ElementRole::elastic)},
                        {"constrained", m.count(ElementRole::constrained)},
                        {"loads", m.loads.size()}}},
                      {"node_ids", std::move(ids)},
                      {"model", model_to_json(m)}});
}

Relaxation& SessionCore::require_model() {
    if (!relax_) throw ValidationError("no model loaded");
    return *relax_;
}

json SessionCore::state_event() {
    Relaxation& relax = require_model();
    const Evaluation& ev = relax.current();
    const Model solved = relax.solved_model();
    json positions = json::array();
    for (const Node& n : solved.nodes) positions.push_back({n.position.x(), n.position.y(), n.position.z()});
    json e = {{"event", "state"},
              {"step", relax.state().step},
              {"grad_norm", ev.grad_norm},
              {"residual_norm", ev.residual_norm},
              {"alpha", relax.state().params.alpha},
              {"positions", std::move(positions)}};
    if (ev.pi) e["pi"] = *ev.pi;
    return e;
}

void SessionCore::step_once(std::vector<json>& events, bool emit_periodic) {
    Relaxation& relax = *relax_;
    try {
        if (relax.step()) {
            if (emit_periodic && relax.state().step % every_ == 0) events.push_back(state_event());
        }
        if (relax.converged()) {
            running_ = false;
            if (!announced_) {
                announced_ = true;
                events.push_back({{"event", "converged"}, {"step", relax.state().step}});
            }
        }
    } catch (const Error& err) {
        running_ = false;
        events.push_back(make_error(err.what()));
    }
}

std::vector<json> SessionCore::advance() {
    std::vector<json> events;
    if (running_ && relax_) step_once(events, true);
    return events;
}

void SessionCore::dispatch(const std::string& name, const json& command, std::vector<json>& events) {
    const json ack = {{"event", "ack"}, {"command", name}};
    if (name == "load_model") {
        auto it = command.find("model");
        if (it == command.end()) throw ValidationError("field \"model\" is required");
        Model model = model_from_json(*it);
        events.push_back(ack);
        load(std::move(model), events);
        return;
    }
    if (name == "snapshot") {
        json state = state_event();
        events.push_back(ack);
        events.push_back(std::move(state));
        return;
    }
    if (name == "subscribe") {
        const int every = int_field(command, "every");
        if (every < 1) throw ValidationError("every must be >= 1");
        every_ = every;
        events.push_back(ack);
        return;
    }

    Relaxation& relax = require_model();
    if (name == "start") {
        running_ = true;
    } else if (name == "pause") {
        running_ = false;
    } else if (name == "step") {
        const int count = command.contains("count") ? int_field(command, "count") : 1;
        if (count < 1) throw ValidationError("count must be >= 1");
        events.push_back(ack);
        for (int i = 0; i < count && !relax.converged(); ++i) step_once(events, false);
        events.push_back(state_event());
        return;
    } else if (name == "set_param") {
        auto it = command.find("name");
        if (it == command.end() || !it->is_string()) throw ValidationError("field \"name\" must be a string");
        const std::string param = it->get<std::string>();
        const double value = number_field(command, "value");
        if (param == "alpha") {
            relax.set_alpha(value);
        } else if (param == "damping") {
            relax.set_damping(value);
        } else if (param == "constraint_relax") {
            relax.set_constraint_relax(value);
        } else {
            throw ValidationError("unknown parameter \"" + param + "\"");
        }
        announced_ = false;
    } else if (name == "set_weight") {
        relax.set_weight(int_field(command, "element"), number_field(command, "value"));
        announced_ = false;
    } else if (name == "set_target") {
        relax.set_target(int_field(command, "element"), number_field(command, "value"));
        announced_ = false;
    } else if (name == "move_fixed_node") {
        auto it = command.find("pos");
        if (it == command.end() || !it->is_array() || it->size() != 3) {
            throw ValidationError("field \"pos\" must be an array of 3 numbers");
        }
        Vec3 p;
        for (int k = 0; k < 3; ++k) {
            if (!(*it)[static_cast<std::size_t>(k)].is_number()) {
                throw ValidationError("field \"pos\" must be an array of 3 numbers");
            }
            p[k] = (*it)[static_cast<std::size_t>(k)].get<double>();
        }
        relax.move_fixed_node(int_field(command, "node"), p);
        announced_ = false;
    } else if (name == "randomize") {
        auto it = command.find("seed");
        if (it == command.end() || !it->is_number_unsigned()) {
            throw ValidationError("field \"seed\" must be a non-negative integer");
        }
        const double range = command.contains("range") ? number_field(command, "range") : 2.5;
        relax.randomize(it->get<std::uint64_t>(), range);
        announced_ = false;
    } else {
        throw ValidationError("unknown command \"" + name + "\"");
    }
    events.push_back(ack);
}

std::vector<json> SessionCore::apply(const json& command) {
    std::vector<json> events;
    if (!command.is_object() || !command.contains("cmd") || !command["cmd"].is_string()) {
        events.push_back(make_error("message must be an object with a string \"cmd\" field"));
        return events;
    }
    const std::string name = command["cmd"].get<std::string>();
    const int step = relax_ ? relax_->state().step : 0;
    try {
        dispatch(name, command, events);
        log_.push_back({step, command});
    } catch (const Error& err) {
        events.push_back(make_error(err.what(), name));
    } catch (const json::exception& err) {
        events.push_back(make_error(err.what(), name));
    }
    return events;
}

std::unique_ptr<Relaxation> SessionCore::release() {
    running_ = false;
    return std::move(relax_);
}

std::unique_ptr<Relaxation> replay(std::optional<Model> model, const std::vector<LoggedCommand>& log,
                                   int end_step) {
    SessionCore core(std::move(model));
    auto step_now = [&] { return core.relaxation() ? core.relaxation()->state().step : 0; };
    for (const LoggedCommand& entry : log) {
        while (core.running() && step_now() < entry.step) core.advance();
        core.apply(entry.command);
    }
    while (core.running() && step_now() < end_step) core.advance();
    return core.release();
}

SteeringSession::SteeringSession(std::optional<Model> model, std::size_t buffer)
    : capacity_(std::max<std::size_t>(buffer, 1)) {
    std::vector<json> events{core_.hello_event()};
    if (model) {
        for (json& e : core_.preload(std::move(*model))) events.push_back(std::move(e));
    }
    push(std::move(events));
    thread_ = std::thread([this] { worker(); });
}

SteeringSession::~SteeringSession() { stop(); }

void SteeringSession::stop() {
    {
        std::lock_guard lock(mutex_);
        if (stopping_) return;
        stopping_ = true;
    }
    commands_cv_.notify_all();
    events_cv_.notify_all();
    if (thread_.joinable()) thread_.join();
}

void SteeringSession::submit(std::string text) {
    {
        std::lock_guard lock(mutex_);
        commands_.push_back(std::move(text));
    }
    commands_cv_.notify_one();
}

void SteeringSession::set_notifier(std::function<void()> notify) {
    std::lock_guard lock(mutex_);
    notify_ = std::move(notify);
}

std::size_t SteeringSession::dropped_states() const {
    std::lock_guard lock(mutex_);
    return dropped_;
}

std::vector<LoggedCommand> SteeringSession::log() const {
    std::lock_guard lock(mutex_);
    return log_copy_;
}

std::vector<std::string> SteeringSession::take_events(std::chrono::milliseconds timeout) {
    std::unique_lock lock(mutex_);
    events_cv_.wait_for(lock, timeout, [&] { return !events_.empty() || stopping_; });
    std::vector<std::string> out;
    out.reserve(events_.size());
    for (Event& e : events_) out.push_back(std::move(e.text));
    events_.clear();
    return out;
}

void SteeringSession::push(std::vector<json> events) {
    if (events.empty()) return;
    std::function<void()> notify;
    {
        std::lock_guard lock(mutex_);
        for (const json& e : events) {
            const bool state = e.value("event", "") == "state";
            if (state && events_.size() >= capacity_) {
                for (auto it = events_.begin(); it != events_.end(); ++it) {
                    if (it->state) {
                        events_.erase(it);
                        ++dropped_;
                        break;
                    }
                }
            }
            events_.push_back({state, encode_message(e)});
        }
        notify = notify_;
    }
    events_cv_.notify_all();
    if (notify) notify();
}

void SteeringSession::worker() {
    for (;;) {
        std::deque<std::string> batch;
        {
            std::unique_lock lock(mutex_);
            commands_cv_.wait(lock, [&] { return stopping_ || !commands_.empty() || core_.running(); });
            if (stopping_) return;
            batch.swap(commands_);
        }
        if (!batch.empty()) {
            for (const std::string& text : batch) {
                json command;
                try {
                    command = json::parse(text);
                } catch (const json::parse_error& err) {
                    push({make_error(std::string("malformed message: ") + err.what())});
                    continue;
                }
                push(core_.apply(command));
            }
            std::lock_guard lock(mutex_);
            log_copy_ = core_.log();
        }
        push(core_.advance());
    }
}

}  // namespace formfind
