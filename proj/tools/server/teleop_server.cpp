#include "teleop_server.hpp"

#include <atomic>
#include <boost/asio/dispatch.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/post.hpp>
#include <boost/asio/strand.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <chrono>
#include <ctime>
#include <deque>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "attnav/error.hpp"

namespace attnav::server {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;
using Clock = std::chrono::steady_clock;

class WsConnection;

struct ServerCore {
  ServerCore(ScenarioConfig cfg, ServerOptions opts, SessionOptions session_opts)
      : options(std::move(opts)),
        session(std::move(cfg), session_opts),
        config_json(scenario_to_json(session.config())) {}

  double now() const { return std::chrono::duration<double>(Clock::now() - start_time).count(); }

  void accept();
  void tick_loop();
  void broadcast(const std::string& frame);
  void add(const std::shared_ptr<WsConnection>& c);
  void remove(TeleopSession::ClientId id);

  ServerOptions options;
  TeleopSession session;
  std::string config_json;

  net::io_context ioc{1};
  tcp::acceptor acceptor{ioc};
  std::thread io_thread;
  std::thread tick_thread;
  std::atomic<bool> stopping{false};
  bool started = false;
  bool stopped = false;
  Clock::time_point start_time;
  std::atomic<TeleopSession::ClientId> next_id{1};

  std::mutex connections_mutex;
  std::map<TeleopSession::ClientId, std::shared_ptr<WsConnection>> connections;
};

class WsConnection : public std::enable_shared_from_this<WsConnection> {
 public:
  WsConnection(tcp::socket&& socket, ServerCore& server, TeleopSession::ClientId id)
      : ws_(std::move(socket)), server_(server), id_(id) {}

  TeleopSession::ClientId id() const { return id_; }

  void run(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, beast::bind_front_handler(&WsConnection::on_accept, shared_from_this()));
  }

  // Callable from any thread; never blocks.
  void send(std::string frame) {
    net::post(ws_.get_executor(), [self = shared_from_this(), f = std::move(frame)]() mutable {
      self->enqueue(std::move(f));
    });
  }

  void close() {
    net::post(ws_.get_executor(), [self = shared_from_this()] {
      beast::error_code ec;
      beast::get_lowest_layer(self->ws_).socket().close(ec);
    });
  }

 private:
  void on_accept(beast::error_code ec) {
    if (ec) return;
    const wire::Hello hello = server_.session.connect(id_);
    server_.add(shared_from_this());
    enqueue(wire::to_json(wire::ServerMessage{hello}));
    read();
  }

  void read() {
    ws_.async_read(buffer_, beast::bind_front_handler(&WsConnection::on_read, shared_from_this()));
  }

  void on_read(beast::error_code ec, std::size_t) {
    if (ec) {
      finish();
      return;
    }
    const std::string text = beast::buffers_to_string(buffer_.data());
    buffer_.consume(buffer_.size());
    try {
      const wire::ClientMessage msg = wire::parse_client_message(text);
      if (auto err = server_.session.submit(id_, msg, server_.now())) {
        enqueue(wire::to_json(wire::ServerMessage{*err}));
      }
    } catch (const Error& e) {
      enqueue(wire::to_json(wire::ServerMessage{wire::ErrorReply{e.what()}}));
    }
    read();
  }

  void enqueue(std::string frame) {
    if (finished_) return;
    // queue_.front() may be mid-write; drop the oldest frame behind it.
    if (queue_.size() >= server_.options.max_queued_frames && queue_.size() > 1) {
      queue_.erase(queue_.begin() + 1);
    }
    queue_.push_back(std::move(frame));
    if (queue_.size() == 1) write();
  }

  void write() {
    ws_.text(true);
    ws_.async_write(net::buffer(queue_.front()),
                    beast::bind_front_handler(&WsConnection::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    if (ec) {
      finish();
      return;
    }
    queue_.pop_front();
    if (!queue_.empty()) write();
  }

  void finish() {
    if (finished_) return;
    finished_ = true;
    queue_.clear();
    server_.session.disconnect(id_);
    server_.remove(id_);
  }

  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  std::deque<std::string> queue_;
  ServerCore& server_;
  TeleopSession::ClientId id_;
  bool finished_ = false;
};

class HttpConnection : public std::enable_shared_from_this<HttpConnection> {
 public:
  HttpConnection(tcp::socket&& socket, ServerCore& server)
      : stream_(std::move(socket)), server_(server) {}

  void run() {
    net::dispatch(stream_.get_executor(),
                  beast::bind_front_handler(&HttpConnection::read, shared_from_this()));
  }

 private:
  void read() {
    req_ = {};
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_,
                     beast::bind_front_handler(&HttpConnection::on_read, shared_from_this()));
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
        std::make_shared<WsConnection>(stream_.release_socket(), server_, server_.next_id++)
            ->run(std::move(req_));
        return;
      }
      respond(http::status::not_found, R"({"v":1,"type":"error","message":"no such endpoint"})");
      return;
    }
    if (req_.method() != http::verb::get) {
      respond(http::status::method_not_allowed,
              R"({"v":1,"type":"error","message":"only GET is supported"})");
      return;
    }
    if (req_.target() == "/health") {
      const nlohmann::json body{{"v", wire::kVersion},
                                {"status", "ok"},
                                {"tick_rate", 1.0 / server_.session.config().dt}};
      respond(http::status::ok, body.dump());
    } else if (req_.target() == "/config") {
      respond(http::status::ok, server_.config_json);
    } else {
      respond(http::status::not_found, R"({"v":1,"type":"error","message":"no such endpoint"})");
    }
  }

  void respond(http::status status, std::string body) {
    res_ = std::make_shared<http::response<http::string_body>>(status, req_.version());
    res_->set(http::field::server, "attnav");
    res_->set(http::field::content_type, "application/json");
    res_->set(http::field::access_control_allow_origin, "*");
    res_->keep_alive(req_.keep_alive());
    res_->body() = std::move(body);
    res_->prepare_payload();
    http::async_write(stream_, *res_,
                      beast::bind_front_handler(&HttpConnection::on_write, shared_from_this()));
  }

  void on_write(beast::error_code ec, std::size_t) {
    if (ec) return;
    if (!res_->keep_alive()) {
      stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
      return;
    }
    res_.reset();
    read();
  }

  beast::tcp_stream stream_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
  std::shared_ptr<http::response<http::string_body>> res_;
  ServerCore& server_;
};

void ServerCore::accept() {
  acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
    if (ec) {
      if (stopping) return;
    } else {
      std::make_shared<HttpConnection>(std::move(socket), *this)->run();
    }
    accept();
  });
}

void ServerCore::tick_loop() {
  while (!stopping) {
    for (const auto& s : session.advance_to(now())) {
      broadcast(wire::to_json(wire::ServerMessage{s}));
    }
    const auto due = start_time + std::chrono::duration_cast<Clock::duration>(
                                      std::chrono::duration<double>(session.next_tick_due()));
    std::this_thread::sleep_until(due);
  }
}

void ServerCore::broadcast(const std::string& frame) {
  std::lock_guard lock(connections_mutex);
  for (auto& [id, c] : connections) c->send(frame);
}

void ServerCore::add(const std::shared_ptr<WsConnection>& c) {
  std::lock_guard lock(connections_mutex);
  connections[c->id()] = c;
}

void ServerCore::remove(TeleopSession::ClientId id) {
  std::lock_guard lock(connections_mutex);
  connections.erase(id);
}

TeleopServer::TeleopServer(ScenarioConfig cfg, ServerOptions options, SessionOptions session_options)
    : impl_(std::make_unique<ServerCore>(std::move(cfg), std::move(options), session_options)) {}

TeleopServer::~TeleopServer() {
  try {
    stop();
  } catch (const std::exception& e) {
    std::cerr << "attnav server: " << e.what() << '\n';
  }
}

void TeleopServer::start() {
  if (impl_->started) return;
  beast::error_code ec;
  const auto address = net::ip::make_address(impl_->options.address, ec);
  if (ec) throw Error(Errc::InvalidArgument, "bad listen address " + impl_->options.address);
  const tcp::endpoint endpoint(address, impl_->options.port);
  impl_->acceptor.open(endpoint.protocol(), ec);
  if (!ec) impl_->acceptor.set_option(net::socket_base::reuse_address(true), ec);
  if (!ec) impl_->acceptor.bind(endpoint, ec);
  if (!ec) impl_->acceptor.listen(net::socket_base::max_listen_connections, ec);
  if (ec) {
    throw Error(Errc::IOFailure, "cannot listen on " + impl_->options.address + ":" +
                                     std::to_string(impl_->options.port) + ": " + ec.message());
  }
  impl_->started = true;
  impl_->start_time = Clock::now();
  impl_->accept();
  impl_->io_thread = std::thread([this] { impl_->ioc.run(); });
  impl_->tick_thread = std::thread([this] { impl_->tick_loop(); });
}

unsigned short TeleopServer::port() const {
  beast::error_code ec;
  const auto ep = impl_->acceptor.local_endpoint(ec);
  return ec ? impl_->options.port : ep.port();
}

std::optional<std::filesystem::path> TeleopServer::stop() {
  if (!impl_->started || impl_->stopped) return std::nullopt;
  impl_->stopped = true;
  impl_->stopping = true;
  impl_->tick_thread.join();

  net::post(impl_->ioc, [this] {
    beast::error_code ec;
    impl_->acceptor.close(ec);
  });
  {
    std::lock_guard lock(impl_->connections_mutex);
    for (auto& [id, c] : impl_->connections) c->close();
  }
  // Give the closes a moment to flush before the loop is stopped.
  std::this_thread::sleep_for(std::chrono::milliseconds(20));
  impl_->ioc.stop();
  impl_->io_thread.join();
  {
    std::lock_guard lock(impl_->connections_mutex);
    impl_->connections.clear();
  }

  if (impl_->options.record_dir.empty() || impl_->session.log().samples.empty()) return std::nullopt;
  std::filesystem::create_directories(impl_->options.record_dir);
  const std::time_t now = std::time(nullptr);
  std::tm utc{};
  gmtime_r(&now, &utc);
  std::ostringstream name;
  name << "session-" << std::put_time(&utc, "%Y%m%dT%H%M%SZ") << ".csv";
  const auto path = impl_->options.record_dir / name.str();
  impl_->session.export_log(path);
  return path;
}

const TeleopSession& TeleopServer::session() const { return impl_->session; }

}  // namespace attnav::server
