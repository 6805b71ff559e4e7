#include "server.hpp"

#include <atomic>
#include <deque>
#include <string>

#include <boost/asio.hpp>
#include <boost/beast.hpp>
#include <boost/beast/websocket.hpp>

#include "formfind/errors.hpp"
#include "formfind/steering.hpp"

namespace formfind::tools {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;

namespace {

class Connection : public std::enable_shared_from_this<Connection> {
public:
    Connection(tcp::socket socket, net::io_context& ioc, std::optional<Model> model, bool busy)
        : ioc_(ioc), ws_(std::move(socket)), model_(std::move(model)), busy_(busy) {}

    ~Connection() {
        if (session_) session_->stop();
    }

    void start() {
        http::async_read(ws_.next_layer(), buffer_, request_,
                         [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_request(ec); });
    }

    void close() {
        beast::error_code ec;
        ws_.next_layer().socket().shutdown(tcp::socket::shutdown_both, ec);
        ws_.next_layer().socket().close(ec);
    }

private:
    void on_request(beast::error_code ec) {
        if (ec) return;
        if (!websocket::is_upgrade(request_) || request_.target() != "/session") {
            auto response = std::make_shared<http::response<http::string_body>>(http::status::not_found,
                                                                                request_.version());
            response->set(http::field::content_type, "text/plain");
            response->body() = "websocket endpoint is /session\n";
            response->prepare_payload();
            http::async_write(ws_.next_layer(), *response,
                              [self = shared_from_this(), response](beast::error_code, std::size_t) { self->close(); });
            return;
        }
        ws_.text(true);
        ws_.async_accept(request_, [self = shared_from_this()](beast::error_code accept_ec) {
            self->on_accept(accept_ec);
        });
    }

    void on_accept(beast::error_code ec) {
        if (ec) return;
        if (busy_) {
            outgoing_.push_back(encode_message(
                {{"event", "error"}, {"message", "busy: another session is active"}}));
            closing_ = true;
            write_next();
            return;
        }
        session_ = std::make_unique<SteeringSession>(std::move(model_));
        std::weak_ptr<Connection> weak = weak_from_this();
        session_->set_notifier([this, weak] {
            if (scheduled_.exchange(true)) return;
            net::post(ioc_, [weak] {
                if (auto self = weak.lock()) self->pump();
            });
        });
        pump();
        read_next();
    }

    void read_next() {
        ws_.async_read(incoming_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
            self->on_read(ec);
        });
    }

    void on_read(beast::error_code ec) {
        if (ec) {
            if (session_) session_->stop();
            return;
        }
        const std::string text = beast::buffers_to_string(incoming_.data());
        incoming_.consume(incoming_.size());
        std::size_t pos = 0;
        while (pos < text.size()) {
            std::size_t end = text.find('\n', pos);
            if (end == std::string::npos) end = text.size();
            const std::string line = text.substr(pos, end - pos);
            if (line.find_first_not_of(" \t\r") != std::string::npos) session_->submit(line);
            pos = end + 1;
        }
        read_next();
    }

    void pump() {
        scheduled_ = false;
        if (!session_) return;
        for (std::string& e : session_->take_events(std::chrono::milliseconds(0))) outgoing_.push_back(std::move(e));
        write_next();
    }

    void write_next() {
        if (writing_) return;
        if (outgoing_.empty()) {
            if (closing_) {
                ws_.async_close(websocket::close_code::try_again_later,
                                [self = shared_from_this()](beast::error_code) {});
            }
            return;
        }
        writing_ = true;
        ws_.async_write(net::buffer(outgoing_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
            self->writing_ = false;
            if (ec) return;
            self->outgoing_.pop_front();
            self->write_next();
        });
    }

    net::io_context& ioc_;
    websocket::stream<beast::tcp_stream> ws_;
    beast::flat_buffer buffer_;
    beast::flat_buffer incoming_;
    http::request<http::string_body> request_;
    std::optional<Model> model_;
    bool busy_ = false;
    std::unique_ptr<SteeringSession> session_;
    std::deque<std::string> outgoing_;
    std::atomic<bool> scheduled_{false};
    bool writing_ = false;
    bool closing_ = false;
};

}  // namespace

struct SteeringServer::Impl {
    net::io_context ioc{1};
    tcp::acceptor acceptor{ioc};
    std::optional<Model> preload;
    unsigned short port = 0;
    std::weak_ptr<Connection> active;
    std::vector<std::weak_ptr<Connection>> connections;

    void accept() {
        acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
            if (ec) return;
            const bool busy = !active.expired();
            auto connection = std::make_shared<Connection>(std::move(socket), ioc, busy ? std::nullopt : preload,
                                                           busy);
            if (!busy) active = connection;
            connections.push_back(connection);
            connection->start();
            accept();
        });
    }
};

SteeringServer::SteeringServer(unsigned short port, std::optional<Model> preload) : impl_(std::make_unique<Impl>()) {
    impl_->preload = std::move(preload);
    beast::error_code ec;
    const tcp::endpoint endpoint(net::ip::make_address("127.0.0.1"), port);
    impl_->acceptor.open(endpoint.protocol(), ec);
    if (!ec) impl_->acceptor.set_option(net::socket_base::reuse_address(true), ec);
    if (!ec) impl_->acceptor.bind(endpoint, ec);
    if (!ec) impl_->acceptor.listen(net::socket_base::max_listen_connections, ec);
    if (ec) throw Error("cannot bind port " + std::to_string(port) + ": " + ec.message());
    impl_->port = impl_->acceptor.local_endpoint().port();
}

SteeringServer::~SteeringServer() = default;

unsigned short SteeringServer::port() const noexcept { return impl_->port; }

void SteeringServer::run(bool handle_signals) {
    std::optional<net::signal_set> signals;
    if (handle_signals) {
        signals.emplace(impl_->ioc, SIGINT, SIGTERM);
        signals->async_wait([this](beast::error_code, int) { stop(); });
    }
    impl_->accept();
    impl_->ioc.run();
    impl_->ioc.restart();
}

void SteeringServer::stop() {
    net::post(impl_->ioc, [impl = impl_.get()] {
        beast::error_code ec;
        impl->acceptor.close(ec);
        for (auto& weak : impl->connections) {
            if (auto c = weak.lock()) c->close();
        }
        impl->ioc.stop();
    });
}

}  // namespace formfind::tools
