#pragma once

// Minimal scripted WebSocket client for gateway tests. One read is always
// outstanding; recv() pumps the io_context until a message arrives.

#include <chrono>
#include <deque>
#include <functional>
#include <optional>
#include <string>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>
#include <json.hpp>

namespace vtui::testing {

class WsClient {
 public:
  using json = nlohmann::json;
  using Clock = std::chrono::steady_clock;

  explicit WsClient(std::uint16_t port) : ws_(ioc_) {
    namespace net = boost::asio;
    net::ip::tcp::endpoint ep(net::ip::make_address("127.0.0.1"), port);
    boost::beast::get_lowest_layer(ws_).connect(ep);
    ws_.handshake("127.0.0.1:" + std::to_string(port), "/");
    ws_.read_message_max(std::size_t{64} << 20);
    arm();
  }

  ~WsClient() {
    boost::beast::error_code ec;
    boost::beast::get_lowest_layer(ws_).socket().close(ec);
  }

  void send(const json& j) { send_text(j.dump()); }
  void send_text(const std::string& text) {
    boost::beast::error_code ec;
    ws_.text(true);
    ws_.write(boost::asio::buffer(text), ec);
    if (ec) closed_ = true;
  }

  std::optional<json> recv(std::chrono::milliseconds timeout = std::chrono::milliseconds(3000)) {
    auto deadline = Clock::now() + timeout;
    while (inbox_.empty() && !closed_ && Clock::now() < deadline) {
      if (ioc_.stopped()) ioc_.restart();
      ioc_.run_one_until(deadline);
    }
    if (inbox_.empty()) return std::nullopt;
    json j = std::move(inbox_.front());
    inbox_.pop_front();
    return j;
  }

  /// Next message whose type is `type`; others are passed to `skipped`.
  std::optional<json> recv_type(const std::string& type, std::chrono::milliseconds timeout = std::chrono::milliseconds(3000),
                                const std::function<void(const json&)>& skipped = {}) {
    auto deadline = Clock::now() + timeout;
    while (Clock::now() < deadline) {
      auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
      auto m = recv(left);
      if (!m) return std::nullopt;
      if ((*m)["type"] == type) return m;
      if (skipped) skipped(*m);
    }
    return std::nullopt;
  }

  /// Everything received within `window`.
  std::vector<json> collect(std::chrono::milliseconds window) {
    std::vector<json> out;
    auto deadline = Clock::now() + window;
    while (Clock::now() < deadline) {
      auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
      auto m = recv(left);
      if (!m) break;
      out.push_back(std::move(*m));
    }
    return out;
  }

  bool closed() const { return closed_; }
  boost::beast::websocket::close_reason close_reason() const { return ws_.reason(); }

 private:
  void arm() {
    ws_.async_read(buffer_, [this](boost::beast::error_code ec, std::size_t) {
      if (ec) {
        closed_ = true;
        return;
      }
      inbox_.push_back(json::parse(boost::beast::buffers_to_string(buffer_.data())));
      buffer_.consume(buffer_.size());
      arm();
    });
  }

  boost::asio::io_context ioc_;
  boost::beast::websocket::stream<boost::beast::tcp_stream> ws_;
  boost::beast::flat_buffer buffer_;
  std::deque<json> inbox_;
  bool closed_ = false;
};

}  // namespace vtui::testing
