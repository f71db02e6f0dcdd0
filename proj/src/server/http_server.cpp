#include "role/server/http_server.hpp"

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include <condition_variable>
#include <deque>
#include <iostream>

#include "role/analytics/access_log.hpp"
#include "role/error.hpp"

namespace role::server {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

namespace {

std::string mime_type(const std::filesystem::path& p) {
    const auto ext = p.extension().string();
    if (ext == ".html") return "text/html; charset=utf-8";
    if (ext == ".js") return "text/javascript";
    if (ext == ".css") return "text/css";
    if (ext == ".json") return "application/json";
    if (ext == ".svg") return "image/svg+xml";
    if (ext == ".png") return "image/png";
    return "application/octet-stream";
}

std::string with_log_params(std::string target, const std::vector<std::pair<std::string, std::string>>& params) {
    for (const auto& [k, v] : params) {
        const auto q = target.find('?');
        const bool present = q != std::string::npos && (target.find("?" + k + "=") != std::string::npos ||
                                                        target.find("&" + k + "=") != std::string::npos);
        if (present) continue;
        target += (q == std::string::npos ? "?" : "&") + k + "=" + v;
    }
    return target;
}

}  // namespace

AccessLogWriter::AccessLogWriter(const std::filesystem::path& path) : out_(path, std::ios::app) {
    if (!out_) throw Error(ErrorCode::parse_error, "cannot open access log " + path.string());
}

void AccessLogWriter::write(const std::string& line) {
    std::lock_guard lock(mutex_);
    out_ << line << '\n';
    out_.flush();
}

struct HttpServer::Impl {
    Platform& platform;
    ServerOptions options;
    net::io_context ioc;
    tcp::acceptor acceptor{ioc};
    std::vector<std::thread> workers;
    std::unique_ptr<AccessLogWriter> access_log;
    std::mutex stop_mutex;
    std::condition_variable stopped_cv;
    bool stopped = false;

    Impl(Platform& p, ServerOptions o) : platform(p), options(std::move(o)) {
        if (options.access_log) access_log = std::make_unique<AccessLogWriter>(*options.access_log);
    }

    void log_request(const std::string& ip, const std::string& method, const std::string& target, int status,
                     std::uint64_t bytes, const std::string& agent) {
        if (!access_log) return;
        analytics::AccessLogEntry e{ip, platform.clock()(), method, target, status, bytes, agent};
        access_log->write(analytics::format_clf_line(e));
    }

    void accept();
};

namespace {

class WsSession : public std::enable_shared_from_this<WsSession> {
public:
    WsSession(tcp::socket&& socket, HttpServer::Impl& server, std::string learner, std::string space)
        : ws_(std::move(socket)), server_(server), learner_(std::move(learner)), space_(std::move(space)) {}

    void run(http::request<http::string_body> req) {
        ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
        ws_.async_accept(req, beast::bind_front_handler(&WsSession::on_accept, shared_from_this()));
    }

private:
    void on_accept(beast::error_code ec) {
        if (ec) return;
        std::weak_ptr<WsSession> weak = shared_from_this();
        auto executor = ws_.get_executor();
        try {
            conn_ = server_.platform.hub().connect(learner_, space_, [weak, executor](const Frame& f) {
                auto text = to_json(f).dump();
                const bool evicted = f.kind == FrameKind::error;
                net::post(executor, [weak, evicted, text = std::move(text)]() mutable {
                    if (auto self = weak.lock()) {
                        if (evicted) self->evicted();
                        self->send(std::move(text));
                    }
                });
            });
        } catch (const Error& e) {
            send_error(e);
            close_after_writes_ = true;
            return;
        }
        read();
    }

    void read() { ws_.async_read(buffer_, beast::bind_front_handler(&WsSession::on_read, shared_from_this())); }

    void on_read(beast::error_code ec, std::size_t) {
        if (ec) {
            finish();
            return;
        }
        const auto text = beast::buffers_to_string(buffer_.data());
        buffer_.consume(buffer_.size());
        try {
            dispatch(text);
        } catch (const Error& e) {
            send_error(e);
        } catch (const std::exception& e) {
            send_error(Error(ErrorCode::parse_error, e.what()));
        }
        read();
    }

    void dispatch(const std::string& text) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::parse_error, std::string("frame: ") + e.what());
        }
        const auto f = frame_from_json(j);
        auto& hub = server_.platform.hub();
        switch (f.kind) {
            case FrameKind::sub: {
                const bool self = f.payload.is_object() && f.payload.value("self", false);
                hub.subscribe(conn_, f.topic, self);
                break;
            }
            case FrameKind::unsub: hub.unsubscribe(conn_, f.topic); break;
            case FrameKind::pub:
                hub.publish(conn_, f.topic, f.payload, f.seq ? std::optional<std::uint64_t>(f.seq) : std::nullopt);
                break;
            case FrameKind::chat: {
                std::string msg;
                if (f.payload.is_object()) msg = f.payload.value("text", std::string{});
                else if (f.payload.is_string()) msg = f.payload.get<std::string>();
                hub.chat_post(conn_, msg);
                break;
            }
            default: throw Error(ErrorCode::parse_error, "clients may only send sub, unsub, pub and chat frames");
        }
    }

    // The hub already dropped the connection; close once the error is out.
    void evicted() {
        finished_ = true;
        close_after_writes_ = true;
    }

    void send_error(const Error& e) {
        Frame f;
        f.kind = FrameKind::error;
        f.payload = {{"error", to_string(e.code())}, {"message", e.what()}};
        send(to_json(f).dump());
    }

    void send(std::string text) {
        queue_.push_back(std::move(text));
        if (queue_.size() == 1) write_next();
    }

    void write_next() {
        ws_.text(true);
        ws_.async_write(net::buffer(queue_.front()), beast::bind_front_handler(&WsSession::on_write, shared_from_this()));
    }

    void on_write(beast::error_code ec, std::size_t) {
        if (ec) {
            finish();
            return;
        }
        queue_.pop_front();
        if (!queue_.empty()) {
            write_next();
        } else if (close_after_writes_) {
            ws_.async_close(websocket::close_code::policy_error, [self = shared_from_this()](beast::error_code) {});
        }
    }

    void finish() {
        if (conn_ && !finished_) {
            finished_ = true;
            server_.platform.hub().disconnect(conn_);
        }
    }

    websocket::stream<beast::tcp_stream> ws_;
    HttpServer::Impl& server_;
    std::string learner_;
    std::string space_;
    ConnectionId conn_ = 0;
    beast::flat_buffer buffer_;
    std::deque<std::string> queue_;
    bool close_after_writes_ = false;
    bool finished_ = false;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
public:
    HttpSession(tcp::socket&& socket, HttpServer::Impl& server) : stream_(std::move(socket)), server_(server) {}

    void run() { read(); }

private:
    void read() {
        req_ = {};
        stream_.expires_after(std::chrono::seconds(60));
        http::async_read(stream_, buffer_, req_, beast::bind_front_handler(&HttpSession::on_read, shared_from_this()));
    }

    std::string remote_ip() {
        beast::error_code ec;
        const auto ep = stream_.socket().remote_endpoint(ec);
        return ec ? "-" : ep.address().to_string();
    }

    void on_read(beast::error_code ec, std::size_t) {
        if (ec) return;
        const std::string target(req_.target());
        const std::string path = target.substr(0, target.find('?'));
        const std::string agent(req_[http::field::user_agent]);
        const std::string method(req_.method_string());
        ip_ = remote_ip();

        if (websocket::is_upgrade(req_) && path == "/rt") {
            ApiRequest probe;
            probe.target = target;
            const auto token = probe.query("token");
            const auto space = probe.query("space");
            auto learner = token ? server_.platform.tokens().learner_of(*token) : std::nullopt;
            if (!learner || !space) {
                respond(json_response(401, {{"error", "Unauthorized"}, {"message", "/rt needs token and space"}}), target);
                return;
            }
            server_.log_request(ip_, method, target, 101, 0, agent);
            stream_.expires_never();
            std::make_shared<WsSession>(stream_.release_socket(), server_, *learner, *space)->run(std::move(req_));
            return;
        }

        if (path == "/api" || path.starts_with("/api/")) {
            ApiRequest r;
            r.method = method;
            r.target = target;
            r.body = req_.body();
            for (const auto& h : req_) {
                std::string name(h.name_string());
                std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
                r.headers[name] = std::string(h.value());
            }
            auto res = server_.platform.handle(r);
            auto out = json_response(res.status, res.body);
            respond(std::move(out), with_log_params(target, res.log_params));
            return;
        }
        respond(static_response(path), target);
    }

    http::response<http::string_body> json_response(int status, const nlohmann::ordered_json& body) {
        http::response<http::string_body> res{static_cast<http::status>(status), req_.version()};
        res.set(http::field::content_type, "application/json");
        res.keep_alive(req_.keep_alive());
        res.body() = body.dump();
        res.prepare_payload();
        return res;
    }

    http::response<http::string_body> static_response(const std::string& path) {
        const auto& dir = server_.options.static_dir;
        if (!dir || path.find("..") != std::string::npos)
            return json_response(404, {{"error", "UnknownEntity"}, {"message", "no such resource"}});
        auto file = *dir / (path == "/" ? std::string("index.html") : path.substr(1));
        // extension-less paths are client-side routes of the single-page app
        if (!std::filesystem::is_regular_file(file) && !file.has_extension()) file = *dir / "index.html";
        std::ifstream in(file, std::ios::binary);
        if (!in) return json_response(404, {{"error", "UnknownEntity"}, {"message", "no such resource"}});
        http::response<http::string_body> res{http::status::ok, req_.version()};
        res.set(http::field::content_type, mime_type(file));
        res.keep_alive(req_.keep_alive());
        res.body().assign(std::istreambuf_iterator<char>(in), {});
        res.prepare_payload();
        return res;
    }

    void respond(http::response<http::string_body> res, const std::string& log_target) {
        server_.log_request(ip_, std::string(req_.method_string()), log_target, static_cast<int>(res.result_int()),
                            res.body().size(), std::string(req_[http::field::user_agent]));
        res_ = std::make_shared<http::response<http::string_body>>(std::move(res));
        http::async_write(stream_, *res_, beast::bind_front_handler(&HttpSession::on_write, shared_from_this()));
    }

    void on_write(beast::error_code ec, std::size_t) {
        if (ec) return;
        if (!res_->keep_alive()) {
            beast::error_code ignored;
            stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
            return;
        }
        read();
    }

    beast::tcp_stream stream_;
    HttpServer::Impl& server_;
    beast::flat_buffer buffer_;
    http::request<http::string_body> req_;
    std::shared_ptr<http::response<http::string_body>> res_;
    std::string ip_;
};

}  // namespace

void HttpServer::Impl::accept() {
    acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
        if (ec) return;  // acceptor closed
        std::make_shared<HttpSession>(std::move(socket), *this)->run();
        accept();
    });
}

HttpServer::HttpServer(Platform& platform, ServerOptions options)
    : impl_(std::make_unique<Impl>(platform, std::move(options))) {}

HttpServer::~HttpServer() { stop(); }

std::uint16_t HttpServer::start() {
    auto& i = *impl_;
    const tcp::endpoint ep{net::ip::make_address(i.options.address), i.options.port};
    i.acceptor.open(ep.protocol());
    i.acceptor.set_option(net::socket_base::reuse_address(true));
    i.acceptor.bind(ep);
    i.acceptor.listen();
    port_ = i.acceptor.local_endpoint().port();
    i.accept();
    for (int t = 0; t < std::max(1, i.options.threads); ++t) i.workers.emplace_back([&i] { i.ioc.run(); });
    return port_;
}

void HttpServer::stop() {
    auto& i = *impl_;
    if (i.workers.empty()) return;
    net::post(i.ioc, [&i] {
        beast::error_code ec;
        i.acceptor.close(ec);
    });
    i.ioc.stop();
    for (auto& w : i.workers)
        if (w.joinable()) w.join();
    i.workers.clear();
    {
        std::lock_guard lock(i.stop_mutex);
        i.stopped = true;
    }
    i.stopped_cv.notify_all();
}

void HttpServer::wait() {
    auto& i = *impl_;
    std::unique_lock lock(i.stop_mutex);
    i.stopped_cv.wait(lock, [&] { return i.stopped; });
}

}  // namespace role::server
