#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "improv/analytics/features.hpp"
#include "improv/gateway/gateway.hpp"

namespace httplib {
class Server;
}

namespace improv::gateway {

struct ServerConfig {
  std::string host = "127.0.0.1";
  int port = 7700;  // live stream; 0 picks a free port
  /// Request/response API. Unset means port + 1, or a free port when port is 0.
  std::optional<int> http_port;
  /// Lexicon resources for the analytics endpoints; they answer 503 without.
  std::shared_ptr<const analytics::Resources> resources;
};

/// Binds the gateway to the network: a TCP listener speaking length-prefixed
/// JSON frames (first frame HELLO {"token"}) and an HTTP listener for session
/// management, corpus ingestion and analytics.
class Server {
 public:
  Server(Gateway& gateway, ServerConfig config);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds both listeners and starts serving. Throws Error(Data) naming the
  /// address when a port cannot be bound.
  void start();
  void stop();

  int stream_port() const { return stream_port_; }
  int http_port() const { return http_port_; }

  /// Sends deliveries to whichever of their tokens have a live stream.
  void route(const std::vector<Delivery>& deliveries);

 private:
  struct Connection;
  void accept_loop();
  void serve_connection(std::shared_ptr<Connection> conn);
  void setup_http();

  Gateway& gateway_;
  ServerConfig config_;
  std::unique_ptr<httplib::Server> http_;
  int listen_fd_ = -1;
  int stream_port_ = 0;
  int http_port_ = 0;
  std::atomic<bool> running_{false};
  std::thread accept_thread_;
  std::thread http_thread_;
  std::mutex conn_mu_;
  std::map<std::string, std::shared_ptr<Connection>> by_token_;
  std::vector<std::shared_ptr<Connection>> all_;
  std::vector<std::thread> workers_;
};

}  // namespace improv::gateway
