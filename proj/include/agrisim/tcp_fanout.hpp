#pragma once

#include "agrisim/bus.hpp"

#include <boost/asio.hpp>

#include <atomic>
#include <cstring>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

// Length-prefixed TCP forwarding of bus samples. Frame layout, little-endian:
//   u32 key length | key bytes | u64 publish timestamp (ns) | u32 payload length | payload

namespace agrisim {

namespace tcp_frame {

inline constexpr std::uint32_t kMaxKeyLength = 1024;
inline constexpr std::uint32_t kMaxPayload = 256u * 1024u * 1024u;

inline std::vector<std::uint8_t> header(const TopicSample& s) {
  std::vector<std::uint8_t> h(4 + s.key.size() + 8 + 4);
  const auto klen = static_cast<std::uint32_t>(s.key.size());
  const auto ts = static_cast<std::uint64_t>(s.publish_timestamp);
  const auto plen = static_cast<std::uint32_t>(s.payload->size());
  std::uint8_t* p = h.data();
  std::memcpy(p, &klen, 4);
  std::memcpy(p + 4, s.key.data(), s.key.size());
  std::memcpy(p + 4 + s.key.size(), &ts, 8);
  std::memcpy(p + 12 + s.key.size(), &plen, 4);
  return h;
}

}  // namespace tcp_frame

/// Accepts loopback clients and forwards every bus sample matching `pattern`
/// to each of them. Clients that fail a write are dropped.
class TcpFanout {
 public:
  TcpFanout(Bus& bus, std::string pattern, unsigned short port = 0)
      : sub_(bus.subscribe(std::move(pattern))),
        acceptor_(io_, boost::asio::ip::tcp::endpoint(boost::asio::ip::address_v4::loopback(), port)) {
    accept();
    io_thread_ = std::thread([this] { io_.run(); });
    forward_thread_ = std::thread([this] { forward(); });
  }

  TcpFanout(const TcpFanout&) = delete;
  TcpFanout& operator=(const TcpFanout&) = delete;

  ~TcpFanout() { stop(); }

  unsigned short port() const { return acceptor_.local_endpoint().port(); }

  std::size_t client_count() const {
    std::lock_guard lock(mu_);
    return clients_.size();
  }

  std::uint64_t dropped() const { return sub_->dropped(); }

  void stop() {
    if (stopping_.exchange(true)) return;
    sub_->close();
    io_.stop();
    if (io_thread_.joinable()) io_thread_.join();
    if (forward_thread_.joinable()) forward_thread_.join();
    boost::system::error_code ignored;
    acceptor_.close(ignored);
    std::lock_guard lock(mu_);
    for (auto& c : clients_) {
      boost::system::error_code ec;
      c->shutdown(boost::asio::ip::tcp::socket::shutdown_both, ec);
      c->close(ec);
    }
    clients_.clear();
  }

 private:
  void accept() {
    acceptor_.async_accept([this](boost::system::error_code ec, boost::asio::ip::tcp::socket socket) {
      if (ec) return;
      socket.set_option(boost::asio::ip::tcp::no_delay(true), ec);
      {
        std::lock_guard lock(mu_);
        clients_.push_back(std::make_shared<boost::asio::ip::tcp::socket>(std::move(socket)));
      }
      accept();
    });
  }

  void forward() {
    while (!stopping_) {
      auto s = sub_->pop(std::chrono::milliseconds(50));
      if (!s) continue;
      const auto head = tcp_frame::header(*s);
      const std::array<boost::asio::const_buffer, 2> bufs{boost::asio::buffer(head),
                                                          boost::asio::buffer(*s->payload)};
      std::vector<std::shared_ptr<boost::asio::ip::tcp::socket>> targets;
      {
        std::lock_guard lock(mu_);
        targets = clients_;
      }
      for (auto& c : targets) {
        boost::system::error_code ec;
        boost::asio::write(*c, bufs, ec);
        if (ec) {
          std::lock_guard lock(mu_);
          std::erase(clients_, c);
        }
      }
    }
  }

  std::shared_ptr<Subscription> sub_;
  boost::asio::io_context io_;
  boost::asio::ip::tcp::acceptor acceptor_;
  mutable std::mutex mu_;
  std::vector<std::shared_ptr<boost::asio::ip::tcp::socket>> clients_;
  std::atomic<bool> stopping_{false};
  std::thread io_thread_;
  std::thread forward_thread_;
};

/// Blocking reader for a TcpFanout stream.
class TcpSubscriber {
 public:
  explicit TcpSubscriber(unsigned short port, const std::string& host = "127.0.0.1") : socket_(io_) {
    socket_.connect({boost::asio::ip::make_address(host), port});
    socket_.set_option(boost::asio::ip::tcp::no_delay(true));
  }

  /// Next frame, or nullopt once the connection is closed.
  std::optional<TopicSample> read() {
    boost::system::error_code ec;
    std::uint32_t klen = 0;
    boost::asio::read(socket_, boost::asio::buffer(&klen, 4), ec);
    if (ec) return std::nullopt;
    if (klen == 0 || klen > tcp_frame::kMaxKeyLength) throw std::runtime_error("tcp frame: invalid key length");
    TopicSample s;
    s.key.resize(klen);
    std::uint64_t ts = 0;
    std::uint32_t plen = 0;
    std::array<boost::asio::mutable_buffer, 3> head{boost::asio::buffer(s.key.data(), klen),
                                                    boost::asio::buffer(&ts, 8), boost::asio::buffer(&plen, 4)};
    boost::asio::read(socket_, head, ec);
    if (ec) return std::nullopt;
    if (plen > tcp_frame::kMaxPayload) throw std::runtime_error("tcp frame: payload too large");
    auto payload = std::make_shared<std::vector<std::uint8_t>>(plen);
    boost::asio::read(socket_, boost::asio::buffer(*payload), ec);
    if (ec) return std::nullopt;
    s.publish_timestamp = static_cast<std::int64_t>(ts);
    s.payload = std::move(payload);
    return s;
  }

  void close() {
    boost::system::error_code ec;
    socket_.shutdown(boost::asio::ip::tcp::socket::shutdown_both, ec);
    socket_.close(ec);
  }

 private:
  boost::asio::io_context io_;
  boost::asio::ip::tcp::socket socket_;
};

}  // namespace agrisim
