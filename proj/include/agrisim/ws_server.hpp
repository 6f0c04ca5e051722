#pragma once

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

// WebSocket transport: accepts connections on one endpoint path, queues
// inbound text for the simulation loop and delivers outbound text per session.
// All socket work runs on a single io thread; the simulation loop only touches
// the inbound queue and posts sends.

namespace agrisim {

struct WsServerOptions {
  std::string address = "127.0.0.1";
  unsigned short port = 8765;  // 0 picks a free port
  std::string path = "/sim";
  std::size_t max_queue = 8192;             // outbound messages per session before disconnect
  std::size_t max_message = 1u << 20;       // inbound bytes
  std::chrono::milliseconds handshake_timeout{2000};
};

struct WsInbound {
  enum class Kind { Open, Message, Close };
  Kind kind = Kind::Message;
  std::uint64_t session = 0;
  std::string text;
};

class WsServer {
 public:
  explicit WsServer(WsServerOptions opt = {})
      : opt_(std::move(opt)),
        work_(boost::asio::make_work_guard(io_)),
        acceptor_(io_, tcp::endpoint(boost::asio::ip::make_address(opt_.address), opt_.port)) {
    port_ = acceptor_.local_endpoint().port();
    accept();
    thread_ = std::thread([this] { io_.run(); });
  }

  WsServer(const WsServer&) = delete;
  WsServer& operator=(const WsServer&) = delete;
  ~WsServer() { stop(); }

  unsigned short port() const { return port_; }
  std::size_t session_count() const { return open_sessions_.load(); }

  /// Takes every queued inbound event, waiting up to `timeout` for the first.
  std::vector<WsInbound> poll(std::chrono::microseconds timeout = std::chrono::microseconds(0)) {
    std::unique_lock lock(in_mu_);
    if (inbound_.empty() && timeout.count() > 0) in_cv_.wait_for(lock, timeout, [&] { return !inbound_.empty(); });
    std::vector<WsInbound> out(std::make_move_iterator(inbound_.begin()), std::make_move_iterator(inbound_.end()));
    inbound_.clear();
    return out;
  }

  void send(std::uint64_t id, std::string text) {
    auto msg = std::make_shared<const std::string>(std::move(text));
    boost::asio::post(io_, [this, id, msg] {
      if (auto it = sessions_.find(id); it != sessions_.end()) it->second->send(msg);
    });
  }

  void send(const std::vector<std::uint64_t>& ids, std::string text) {
    auto msg = std::make_shared<const std::string>(std::move(text));
    boost::asio::post(io_, [this, ids, msg] {
      for (auto id : ids) {
        if (auto it = sessions_.find(id); it != sessions_.end()) it->second->send(msg);
      }
    });
  }

  /// Closes the session once its queued messages are written.
  void close(std::uint64_t id) {
    boost::asio::post(io_, [this, id] {
      if (auto it = sessions_.find(id); it != sessions_.end()) it->second->close_after_flush();
    });
  }

  /// Flushes and closes every session, then stops the io thread.
  void stop(std::chrono::milliseconds grace = std::chrono::milliseconds(1000)) {
    if (stopped_.exchange(true)) return;
    boost::asio::post(io_, [this] {
      boost::system::error_code ec;
      acceptor_.close(ec);
      for (auto& [id, s] : sessions_) s->close_after_flush();
    });
    const auto until = std::chrono::steady_clock::now() + grace;
    while (open_sessions_.load() > 0 && std::chrono::steady_clock::now() < until) {
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    work_.reset();
    io_.stop();
    if (thread_.joinable()) thread_.join();
  }

 private:
  using tcp = boost::asio::ip::tcp;

  class Session : public std::enable_shared_from_this<Session> {
   public:
    Session(WsServer& server, tcp::socket socket) : server_(server), stream_(std::move(socket)) {}

    void run() {
      stream_.expires_after(server_.opt_.handshake_timeout);
      namespace http = boost::beast::http;
      http::async_read(stream_, buffer_, request_,
                       [self = shared_from_this()](boost::system::error_code ec, std::size_t) { self->on_request(ec); });
    }

    void send(const std::shared_ptr<const std::string>& msg) {
      if (closing_ || !ws_) return;
      if (queue_.size() >= server_.opt_.max_queue) {
        // Slow consumer: drop the connection rather than stall the simulation.
        queue_.clear();
        boost::system::error_code ec;
        ws_->next_layer().socket().shutdown(tcp::socket::shutdown_both, ec);
        ws_->next_layer().socket().close(ec);
        return;
      }
      queue_.push_back(msg);
      if (!writing_) write_next();
    }

    void close_after_flush() {
      if (closing_) return;
      closing_ = true;
      if (!ws_) {
        boost::system::error_code ec;
        stream_.socket().close(ec);
        return;
      }
      if (!writing_) do_close();
    }

    std::uint64_t id = 0;

   private:
    void on_request(boost::system::error_code ec) {
      namespace http = boost::beast::http;
      namespace websocket = boost::beast::websocket;
      if (ec) return;
      const std::string target(request_.target());
      const std::string path = target.substr(0, target.find('?'));
      if (!websocket::is_upgrade(request_) || path != server_.opt_.path) {
        auto res = std::make_shared<http::response<http::string_body>>(http::status::not_found, request_.version());
        res->set(http::field::content_type, "text/plain");
        res->keep_alive(false);
        res->body() = "not found\n";
        res->prepare_payload();
        http::async_write(stream_, *res, [self = shared_from_this(), res](boost::system::error_code, std::size_t) {
          boost::system::error_code ignored;
          self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
        });
        return;
      }
      stream_.expires_never();
      ws_.emplace(std::move(stream_));
      websocket::stream_base::timeout t{};
      t.handshake_timeout = server_.opt_.handshake_timeout;
      t.idle_timeout = websocket::stream_base::none();
      t.keep_alive_pings = false;
      ws_->set_option(t);
      ws_->read_message_max(server_.opt_.max_message);
      ws_->async_accept(request_, [self = shared_from_this()](boost::system::error_code e) { self->on_accept(e); });
    }

    void on_accept(boost::system::error_code ec) {
      if (ec) return;
      id = server_.register_session(shared_from_this());
      read_next();
    }

    void read_next() {
      ws_->async_read(buffer_, [self = shared_from_this()](boost::system::error_code ec, std::size_t) {
        if (ec) {
          self->server_.unregister_session(self->id);
          return;
        }
        self->server_.push({WsInbound::Kind::Message, self->id, boost::beast::buffers_to_string(self->buffer_.data())});
        self->buffer_.consume(self->buffer_.size());
        self->read_next();
      });
    }

    void write_next() {
      writing_ = true;
      ws_->text(true);
      ws_->async_write(boost::asio::buffer(*queue_.front()),
                       [self = shared_from_this()](boost::system::error_code ec, std::size_t) {
                         self->writing_ = false;
                         if (ec) {
                           self->queue_.clear();
                           return;  // the pending read reports the disconnect
                         }
                         self->queue_.pop_front();
                         if (!self->queue_.empty()) {
                           self->write_next();
                         } else if (self->closing_) {
                           self->do_close();
                         }
                       });
    }

    void do_close() {
      ws_->async_close(boost::beast::websocket::close_code::normal,
                       [self = shared_from_this()](boost::system::error_code) {});
    }

    WsServer& server_;
    boost::beast::tcp_stream stream_;
    boost::beast::flat_buffer buffer_;
    boost::beast::http::request<boost::beast::http::string_body> request_;
    std::optional<boost::beast::websocket::stream<boost::beast::tcp_stream>> ws_;
    std::deque<std::shared_ptr<const std::string>> queue_;
    bool writing_ = false;
    bool closing_ = false;
  };

  void accept() {
    acceptor_.async_accept([this](boost::system::error_code ec, tcp::socket socket) {
      if (ec == boost::asio::error::operation_aborted || !acceptor_.is_open()) return;
      if (!ec) std::make_shared<Session>(*this, std::move(socket))->run();
      accept();
    });
  }

  std::uint64_t register_session(const std::shared_ptr<Session>& s) {
    const auto id = next_id_++;
    sessions_[id] = s;
    ++open_sessions_;
    push({WsInbound::Kind::Open, id, {}});
    if (stopped_) s->close_after_flush();
    return id;
  }

  void unregister_session(std::uint64_t id) {
    if (sessions_.erase(id) == 0) return;
    --open_sessions_;
    push({WsInbound::Kind::Close, id, {}});
  }

  void push(WsInbound ev) {
    {
      std::lock_guard lock(in_mu_);
      inbound_.push_back(std::move(ev));
    }
    in_cv_.notify_one();
  }

  WsServerOptions opt_;
  boost::asio::io_context io_;
  boost::asio::executor_work_guard<boost::asio::io_context::executor_type> work_;
  tcp::acceptor acceptor_;
  unsigned short port_ = 0;
  std::thread thread_;
  std::atomic<bool> stopped_{false};
  std::atomic<std::size_t> open_sessions_{0};

  // io thread only
  std::map<std::uint64_t, std::shared_ptr<Session>> sessions_;
  std::uint64_t next_id_ = 1;

  std::mutex in_mu_;
  std::condition_variable in_cv_;
  std::deque<WsInbound> inbound_;
};

}  // namespace agrisim
