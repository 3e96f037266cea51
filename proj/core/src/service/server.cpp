#include "s3d/service/server.hpp"

#include <atomic>
#include <condition_variable>
#include <csignal>
#include <deque>
#include <fstream>
#include <future>
#include <mutex>
#include <sstream>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "s3d/service/error.hpp"

namespace s3d::service {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

namespace {

using Response = http::response<http::string_body>;
using Request = http::request<http::string_body>;

constexpr std::string_view kPlaceholderPage =
    "<!doctype html>\n<html><head><meta charset=\"utf-8\"><title>s3d</title></head>\n"
    "<body><h1>s3d experiment server</h1>\n"
    "<p>No viewer bundle is installed. Start the server with an app directory to serve one.</p>\n"
    "</body></html>\n";

Response make_response(const Request& req, http::status status, std::string body, std::string_view type) {
    Response res{status, req.version()};
    res.set(http::field::server, "s3d");
    res.set(http::field::content_type, beast::string_view(type.data(), type.size()));
    res.keep_alive(req.keep_alive());
    res.body() = std::move(body);
    res.prepare_payload();
    return res;
}

Response text_response(const Request& req, http::status status, std::string message) {
    return make_response(req, status, std::move(message) + "\n", "text/plain; charset=utf-8");
}

bool is_hex_digest(std::string_view s) {
    if (s.size() != 64) return false;
    for (char c : s) {
        if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
    }
    return true;
}

std::optional<std::string> percent_decode(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '%') {
            out.push_back(s[i]);
            continue;
        }
        if (i + 2 >= s.size()) return std::nullopt;
        int value = 0;
        for (int k = 1; k <= 2; ++k) {
            const char c = s[i + static_cast<std::size_t>(k)];
            value <<= 4;
            if (c >= '0' && c <= '9') value |= c - '0';
            else if (c >= 'a' && c <= 'f') value |= c - 'a' + 10;
            else if (c >= 'A' && c <= 'F') value |= c - 'A' + 10;
            else return std::nullopt;
        }
        out.push_back(static_cast<char>(value));
        i += 2;
    }
    return out;
}

/// Relative path below /app/, or empty when it escapes the app directory.
std::optional<std::filesystem::path> safe_relative(std::string_view raw) {
    const auto decoded = percent_decode(raw);
    if (!decoded || decoded->find('\0') != std::string::npos || decoded->find('\\') != std::string::npos) {
        return std::nullopt;
    }
    std::filesystem::path rel;
    std::stringstream parts(*decoded);
    std::string segment;
    while (std::getline(parts, segment, '/')) {
        if (segment.empty() || segment == ".") continue;
        if (segment == "..") return std::nullopt;
        rel /= segment;
    }
    return rel;
}

}  // namespace

std::string_view mime_type(std::string_view path) {
    const auto dot = path.rfind('.');
    const std::string_view ext = dot == std::string_view::npos ? std::string_view{} : path.substr(dot);
    if (ext == ".html" || ext == ".htm") return "text/html; charset=utf-8";
    if (ext == ".js" || ext == ".mjs") return "text/javascript; charset=utf-8";
    if (ext == ".css") return "text/css; charset=utf-8";
    if (ext == ".json" || ext == ".map") return "application/json";
    if (ext == ".wasm") return "application/wasm";
    if (ext == ".svg") return "image/svg+xml";
    if (ext == ".png") return "image/png";
    if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
    if (ext == ".ico") return "image/vnd.microsoft.icon";
    if (ext == ".txt") return "text/plain; charset=utf-8";
    return "application/octet-stream";
}

struct ExperimentServer::Impl {
    session::Manifest manifest;
    session::ExperimentConfig config;
    ServerOptions options;
    AssetCatalog catalog;
    std::unique_ptr<SessionController> controller;
    std::vector<std::string> warnings;

    // Declared after the controller: handlers are destroyed before it.
    net::io_context ioc;
    net::strand<net::io_context::executor_type> session_strand{ioc.get_executor()};
    tcp::acceptor acceptor{ioc};
    std::optional<net::signal_set> signals;
    std::vector<std::thread> threads;
    std::atomic<ConnectionId> next_connection{1};
    std::uint16_t bound_port = 0;

    std::mutex stop_mutex;
    std::condition_variable stop_cv;
    bool stop_requested = false;
    bool running = false;

    Impl(const session::Manifest& m, const session::ExperimentConfig& c, ServerOptions o)
        : manifest(m), config(c), options(std::move(o)), catalog(AssetCatalog::build(manifest, options.cache_entries)) {}

    Response handle(const Request& req) const;
    Response serve_geometry(const Request& req, std::string_view hash) const;
    Response serve_app(const Request& req, std::string_view rest) const;
    void do_accept();
};

namespace {

class WebSocketSession : public std::enable_shared_from_this<WebSocketSession> {
public:
    WebSocketSession(tcp::socket&& socket, ExperimentServer::Impl& server)
        : ws_(std::move(socket)), server_(server), id_(server.next_connection++) {}

    void run(Request req) {
        ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
        ws_.async_accept(req, beast::bind_front_handler(&WebSocketSession::on_accept, shared_from_this()));
    }

private:
    void on_accept(beast::error_code ec) {
        if (ec) return;
        auto self = shared_from_this();
        net::post(server_.session_strand, [self] { self->deliver(self->server_.controller->connect(self->id_)); });
        do_read();
    }

    void do_read() {
        ws_.async_read(buffer_, beast::bind_front_handler(&WebSocketSession::on_read, shared_from_this()));
    }

    void on_read(beast::error_code ec, std::size_t) {
        auto self = shared_from_this();
        if (ec) {
            net::post(server_.session_strand, [self] { self->server_.controller->disconnect(self->id_); });
            return;
        }
        std::string frame = beast::buffers_to_string(buffer_.data());
        buffer_.consume(buffer_.size());
        net::post(server_.session_strand, [self, frame = std::move(frame)] {
            self->deliver(self->server_.controller->receive(self->id_, frame));
        });
        do_read();
    }

    /// Called on the session strand; hands frames to this connection's executor.
    void deliver(Reply reply) {
        if (reply.frames.empty() && !reply.close) return;
        net::post(ws_.get_executor(), [self = shared_from_this(), reply = std::move(reply)]() mutable {
            for (auto& f : reply.frames) self->outbox_.push_back(std::move(f));
            self->closing_ = self->closing_ || reply.close;
            if (!self->writing_) self->do_write();
        });
    }

    void do_write() {
        if (outbox_.empty()) {
            writing_ = false;
            if (closing_ && !closed_) {
                closed_ = true;
                ws_.async_close(websocket::close_code::normal, [self = shared_from_this()](beast::error_code) {});
            }
            return;
        }
        writing_ = true;
        ws_.text(true);
        ws_.async_write(net::buffer(outbox_.front()),
                        beast::bind_front_handler(&WebSocketSession::on_write, shared_from_this()));
    }

    void on_write(beast::error_code ec, std::size_t) {
        if (ec) {
            writing_ = false;
            outbox_.clear();
            return;
        }
        outbox_.pop_front();
        do_write();
    }

    websocket::stream<beast::tcp_stream> ws_;
    ExperimentServer::Impl& server_;
    ConnectionId id_;
    beast::flat_buffer buffer_;
    std::deque<std::string> outbox_;
    bool writing_ = false;
    bool closing_ = false;
    bool closed_ = false;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
public:
    HttpSession(tcp::socket&& socket, ExperimentServer::Impl& server) : stream_(std::move(socket)), server_(server) {}

    void run() {
        net::dispatch(stream_.get_executor(), beast::bind_front_handler(&HttpSession::do_read, shared_from_this()));
    }

private:
    void do_read() {
        req_ = {};
        stream_.expires_after(std::chrono::seconds(30));
        http::async_read(stream_, buffer_, req_, beast::bind_front_handler(&HttpSession::on_read, shared_from_this()));
    }

    void on_read(beast::error_code ec, std::size_t) {
        if (ec == http::error::end_of_stream) {
            stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
            return;
        }
        if (ec) return;
        if (websocket::is_upgrade(req_)) {
            if (req_.target() == "/session") {
                stream_.expires_never();
                std::make_shared<WebSocketSession>(stream_.release_socket(), server_)->run(std::move(req_));
                return;
            }
            send(text_response(req_, http::status::not_found, "no WebSocket endpoint at this path"));
            return;
        }
        send(server_.handle(req_));
    }

    void send(Response res) {
        response_ = std::make_shared<Response>(std::move(res));
        http::async_write(stream_, *response_,
                          beast::bind_front_handler(&HttpSession::on_write, shared_from_this(), response_->need_eof()));
    }

    void on_write(bool close, beast::error_code ec, std::size_t) {
        if (ec) return;
        if (close) {
            stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
            return;
        }
        response_.reset();
        do_read();
    }

    beast::tcp_stream stream_;
    ExperimentServer::Impl& server_;
    beast::flat_buffer buffer_;
    Request req_;
    std::shared_ptr<Response> response_;
};

}  // namespace

Response ExperimentServer::Impl::handle(const Request& req) const {
    if (req.method() != http::verb::get && req.method() != http::verb::head) {
        auto res = text_response(req, http::status::method_not_allowed, "only GET is supported");
        res.set(http::field::allow, "GET, HEAD");
        return res;
    }
    std::string_view target(req.target().data(), req.target().size());
    if (const auto q = target.find('?'); q != std::string_view::npos) target = target.substr(0, q);

    Response res;
    if (target == "/" || target == "/app") {
        res = text_response(req, http::status::found, "see /app/");
        res.set(http::field::location, "/app/");
    } else if (target == "/session") {
        res = text_response(req, http::status::upgrade_required, "WebSocket upgrade required");
        res.set(http::field::upgrade, "websocket");
    } else if (target.rfind("/geom/", 0) == 0) {
        res = serve_geometry(req, target.substr(6));
    } else if (target.rfind("/app/", 0) == 0) {
        res = serve_app(req, target.substr(5));
    } else {
        res = text_response(req, http::status::not_found, "not found");
    }
    if (req.method() == http::verb::head) {
        const auto length = res.body().size();
        res.body().clear();
        res.content_length(length);
    }
    return res;
}

Response ExperimentServer::Impl::serve_geometry(const Request& req, std::string_view hash) const {
    if (!is_hex_digest(hash)) return text_response(req, http::status::not_found, "unknown geometry");
    const std::string etag = "\"" + std::string(hash) + "\"";
    std::shared_ptr<const Bytes> bytes;
    try {
        bytes = catalog.fetch(std::string(hash));
    } catch (const std::exception& e) {
        return text_response(req, http::status::internal_server_error, e.what());
    }
    if (!bytes) return text_response(req, http::status::not_found, "unknown geometry");

    Response res;
    if (req[http::field::if_none_match] == etag) {
        res = Response{http::status::not_modified, req.version()};
        res.keep_alive(req.keep_alive());
    } else {
        res = make_response(req, http::status::ok,
                            std::string(reinterpret_cast<const char*>(bytes->data()), bytes->size()),
                            "application/octet-stream");
    }
    res.set(http::field::cache_control, "public, max-age=31536000, immutable");
    res.set(http::field::etag, etag);
    return res;
}

Response ExperimentServer::Impl::serve_app(const Request& req, std::string_view rest) const {
    auto rel = safe_relative(rest);
    if (!rel) return text_response(req, http::status::bad_request, "invalid path");
    if (rel->empty()) rel = "index.html";

    if (options.app_dir.empty()) {
        if (*rel == "index.html") return make_response(req, http::status::ok, std::string(kPlaceholderPage), mime_type("index.html"));
        return text_response(req, http::status::not_found, "not found");
    }
    const auto path = options.app_dir / *rel;
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) return text_response(req, http::status::not_found, "not found");
    std::ifstream in(path, std::ios::binary);
    std::ostringstream body;
    body << in.rdbuf();
    if (!in && !in.eof()) return text_response(req, http::status::internal_server_error, "read failed");
    return make_response(req, http::status::ok, body.str(), mime_type(path.filename().string()));
}

void ExperimentServer::Impl::do_accept() {
    acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
        if (ec == net::error::operation_aborted || !acceptor.is_open()) return;
        if (!ec) std::make_shared<HttpSession>(std::move(socket), *this)->run();
        do_accept();
    });
}

ExperimentServer::ExperimentServer(const session::Manifest& manifest, const session::ExperimentConfig& config,
                                   ServerOptions options)
    : impl_(std::make_unique<Impl>(manifest, config, std::move(options))) {
    Impl& s = *impl_;
    const auto journal =
        s.options.journal_path.empty() ? session::default_journal_path(s.config) : s.options.journal_path;
    auto session = session::Session::open(s.manifest, s.config, journal);
    s.warnings = session.warnings();
    s.controller = std::make_unique<SessionController>(std::move(session), s.config, s.catalog, s.options.clocks);

    beast::error_code ec;
    const auto address = net::ip::make_address(s.options.address, ec);
    if (ec) throw ServiceError(ServiceErrc::BindFailed, "bad address '" + s.options.address + "'");
    const tcp::endpoint endpoint{address, s.options.port};
    s.acceptor.open(endpoint.protocol(), ec);
    if (!ec) s.acceptor.set_option(net::socket_base::reuse_address(true), ec);
    if (!ec) s.acceptor.bind(endpoint, ec);
    if (ec == net::error::address_in_use) {
        throw ServiceError(ServiceErrc::PortInUse,
                           "port " + std::to_string(s.options.port) + " on " + s.options.address + " is already in use");
    }
    if (!ec) s.acceptor.listen(net::socket_base::max_listen_connections, ec);
    if (ec) throw ServiceError(ServiceErrc::BindFailed, ec.message());
    s.bound_port = s.acceptor.local_endpoint().port();
}

ExperimentServer::~ExperimentServer() { stop(); }

void ExperimentServer::start() {
    Impl& s = *impl_;
    if (s.running) return;
    s.running = true;
    s.signals.emplace(s.ioc, SIGINT, SIGTERM);
    s.signals->async_wait([&s](beast::error_code ec, int) {
        if (ec) return;
        std::lock_guard lock(s.stop_mutex);
        s.stop_requested = true;
        s.stop_cv.notify_all();
    });
    s.do_accept();
    const unsigned n = std::max(1u, s.options.io_threads);
    for (unsigned i = 0; i < n; ++i) s.threads.emplace_back([&s] { s.ioc.run(); });
}

void ExperimentServer::stop() {
    Impl& s = *impl_;
    {
        std::lock_guard lock(s.stop_mutex);
        s.stop_requested = true;
        s.stop_cv.notify_all();
    }
    if (!s.running) return;
    s.ioc.stop();
    for (auto& t : s.threads) {
        if (t.joinable()) t.join();
    }
    s.threads.clear();
    beast::error_code ec;
    s.acceptor.close(ec);
    s.running = false;
}

void ExperimentServer::wait_for_signal() {
    Impl& s = *impl_;
    {
        std::unique_lock lock(s.stop_mutex);
        s.stop_cv.wait(lock, [&s] { return s.stop_requested; });
    }
    stop();
}

std::uint16_t ExperimentServer::port() const { return impl_->bound_port; }

const std::vector<std::string>& ExperimentServer::warnings() const { return impl_->warnings; }

session::SessionState ExperimentServer::state_snapshot() const {
    Impl& s = *impl_;
    if (!s.running) return s.controller->state();
    std::promise<session::SessionState> promise;
    auto future = promise.get_future();
    net::post(s.session_strand, [&] { promise.set_value(s.controller->state()); });
    return future.get();
}

}  // namespace s3d::service
