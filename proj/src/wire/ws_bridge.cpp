#include "rmfs/wire/ws_bridge.hpp"

#include <atomic>
#include <deque>
#include <mutex>
#include <regex>
#include <thread>
#include <vector>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <fmt/format.h>

#include "rmfs/core/error.hpp"

namespace rmfs::wire {

namespace {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

std::optional<int> station_from_target(std::string_view target) {
  static const std::regex pattern(R"(^/station/([0-9]{1,9})$)");
  std::match_results<std::string_view::const_iterator> m;
  if (!std::regex_match(target.begin(), target.end(), m, pattern)) return std::nullopt;
  return std::stoi(m[1].str());
}

class WsSession : public Connection, public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket socket, Hub& hub) : ws_(std::move(socket)), hub_(hub) {
    beast::error_code ec;
    const auto remote = ws_.next_layer().socket().remote_endpoint(ec);
    name_ = ec ? "ws:?" : fmt::format("ws:{}:{}", remote.address().to_string(), remote.port());
  }

  void start() {
    http::async_read(ws_.next_layer(), buffer_, request_,
                     [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_request(ec); });
  }

  bool send(const std::string& frame) override {
    if (closed_) return false;
    std::string text = frame;
    if (!text.empty() && text.back() == '\n') text.pop_back();
    net::post(ws_.get_executor(), [self = shared_from_this(), text = std::move(text)]() mutable {
      self->queue_.push_back(std::move(text));
      if (self->queue_.size() == 1) self->write_next();
    });
    return true;
  }

  void close() override {
    if (closed_.exchange(true)) return;
    net::post(ws_.get_executor(), [self = shared_from_this()] {
      if (self->ws_.is_open()) {
        self->ws_.async_close(websocket::close_code::normal, [self](beast::error_code) {});
      } else {
        beast::error_code ec;
        self->ws_.next_layer().socket().close(ec);
      }
    });
  }

  std::string describe() const override { return name_; }

  // Releases the hub's reference; safe to call more than once.
  void finish() {
    std::shared_ptr<Hub::Peer> peer;
    {
      std::lock_guard<std::mutex> lock(peer_mutex_);
      peer = std::move(peer_);
    }
    closed_ = true;
    if (peer) hub_.on_closed(peer);
  }

 private:
  void on_request(beast::error_code ec) {
    if (ec) return;
    const auto station = station_from_target(std::string_view(request_.target().data(), request_.target().size()));
    if (!station || !websocket::is_upgrade(request_)) {
      auto response = std::make_shared<http::response<http::string_body>>(http::status::not_found, request_.version());
      response->set(http::field::content_type, "text/plain");
      response->body() = "expected a websocket upgrade on /station/{id}\n";
      response->prepare_payload();
      http::async_write(ws_.next_layer(), *response,
                        [self = shared_from_this(), response](beast::error_code, std::size_t) {
                          beast::error_code ignored;
                          self->ws_.next_layer().socket().shutdown(tcp::socket::shutdown_both, ignored);
                        });
      return;
    }
    station_ = *station;
    ws_.async_accept(request_, [self = shared_from_this()](beast::error_code e) { self->on_accept(e); });
  }

  void on_accept(beast::error_code ec) {
    if (ec) return;
    ws_.text(true);
    auto peer = hub_.attach(shared_from_this(), Register{Role::Station, station_, 0});
    {
      std::lock_guard<std::mutex> lock(peer_mutex_);
      peer_ = std::move(peer);
    }
    read_next();
  }

  void read_next() {
    buffer_.consume(buffer_.size());
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->finish();
        return;
      }
      std::shared_ptr<Hub::Peer> peer;
      {
        std::lock_guard<std::mutex> lock(self->peer_mutex_);
        peer = self->peer_;
      }
      if (!peer) return;
      self->hub_.on_frame_text(peer, beast::buffers_to_string(self->buffer_.data()));
      self->read_next();
    });
  }

  void write_next() {
    ws_.async_write(net::buffer(queue_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      self->queue_.pop_front();
      if (ec) {
        self->queue_.clear();
        self->closed_ = true;
        return;
      }
      if (!self->queue_.empty()) self->write_next();
    });
  }

  websocket::stream<beast::tcp_stream> ws_;
  Hub& hub_;
  std::string name_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> request_;
  int station_ = 0;
  std::deque<std::string> queue_;  // touched only on the strand
  std::atomic<bool> closed_{false};
  std::mutex peer_mutex_;
  std::shared_ptr<Hub::Peer> peer_;
};

}  // namespace

struct WsBridge::Impl {
  Impl(Hub& h, const Endpoint& bind) : hub(h), acceptor(io) {
    beast::error_code ec;
    const auto address = net::ip::make_address(bind.host == "localhost" ? "127.0.0.1" : bind.host, ec);
    if (ec) throw ConfigError(fmt::format("websocket bind '{}': bad address", bind.host));
    const tcp::endpoint endpoint(address, static_cast<unsigned short>(bind.port));
    acceptor.open(endpoint.protocol(), ec);
    if (!ec) acceptor.set_option(net::socket_base::reuse_address(true), ec);
    if (!ec) acceptor.bind(endpoint, ec);
    if (!ec) acceptor.listen(net::socket_base::max_listen_connections, ec);
    if (ec) throw ConfigError(fmt::format("websocket bind {}:{}: {}", bind.host, bind.port, ec.message()));
    port = acceptor.local_endpoint().port();
    accept_next();
    runner = std::thread([this] { io.run(); });
  }

  void accept_next() {
    acceptor.async_accept(net::make_strand(io), [this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;
      auto session = std::make_shared<WsSession>(std::move(socket), hub);
      {
        std::lock_guard<std::mutex> lock(sessions_mutex);
        sessions.push_back(session);
      }
      session->start();
      accept_next();
    });
  }

  void stop() {
    if (stopped.exchange(true)) return;
    net::post(io, [this] {
      beast::error_code ignored;
      acceptor.close(ignored);
    });
    std::vector<std::weak_ptr<WsSession>> live;
    {
      std::lock_guard<std::mutex> lock(sessions_mutex);
      live.swap(sessions);
    }
    for (auto& w : live)
      if (auto s = w.lock()) s->close();
    // Give the close handshakes a moment before the loop stops.
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    io.stop();
    if (runner.joinable()) runner.join();
    for (auto& w : live)
      if (auto s = w.lock()) s->finish();
  }

  Hub& hub;
  net::io_context io;
  tcp::acceptor acceptor;
  int port = 0;
  std::thread runner;
  std::atomic<bool> stopped{false};
  std::mutex sessions_mutex;
  std::vector<std::weak_ptr<WsSession>> sessions;
};

WsBridge::WsBridge(Hub& hub, const Endpoint& bind) : impl_(std::make_unique<Impl>(hub, bind)) {}
WsBridge::~WsBridge() { stop(); }
int WsBridge::port() const { return impl_->port; }
void WsBridge::stop() { impl_->stop(); }

}  // namespace rmfs::wire
