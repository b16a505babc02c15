#include "improv/gateway/server.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "httplib.h"

#include "improv/analytics/report.hpp"
#include "improv/error.hpp"
#include "improv/gateway/artifacts.hpp"
#include "improv/show/transcript.hpp"

namespace improv::gateway {

using nlohmann::json;

struct Server::Connection {
  int fd = -1;
  std::mutex write_mu;
  std::string token;
  std::atomic<bool> open{true};

  bool send(const std::string& body) {
    const std::string frame = encode_frame(body);
    std::lock_guard lock(write_mu);
    std::size_t sent = 0;
    while (sent < frame.size()) {
      const ssize_t n = ::send(fd, frame.data() + sent, frame.size() - sent, MSG_NOSIGNAL);
      if (n <= 0) {
        if (n < 0 && errno == EINTR) continue;
        return false;
      }
      sent += static_cast<std::size_t>(n);
    }
    return true;
  }

  void shutdown() {
    if (open.exchange(false)) ::shutdown(fd, SHUT_RDWR);
  }
};

namespace {

int http_status(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::State: return 409;
    case ErrorKind::Role: return 403;
    default: return 400;
  }
}

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(2) + "\n", "application/json");
}

json body_json(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  json j = json::parse(req.body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(ErrorKind::Input, "request body must be a JSON object");
  return j;
}

}  // namespace

Server::Server(Gateway& gateway, ServerConfig config) : gateway_(gateway), config_(std::move(config)) {}

Server::~Server() { stop(); }

void Server::start() {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw Error(ErrorKind::Data, std::string("socket: ") + std::strerror(errno));
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(config_.port));
  if (::inet_pton(AF_INET, config_.host.c_str(), &addr.sin_addr) != 1) {
    throw Error(ErrorKind::Parameter, "bad listen address " + config_.host);
  }
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(listen_fd_, 64) != 0) {
    const std::string why = std::strerror(errno);
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw Error(ErrorKind::Data, "cannot listen on " + config_.host + ":" + std::to_string(config_.port) + ": " + why);
  }
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  stream_port_ = ntohs(addr.sin_port);

  http_ = std::make_unique<httplib::Server>();
  setup_http();
  const int wanted = config_.http_port ? *config_.http_port : (config_.port == 0 ? 0 : config_.port + 1);
  if (wanted == 0) {
    http_port_ = http_->bind_to_any_port(config_.host);
  } else {
    http_port_ = http_->bind_to_port(config_.host, wanted) ? wanted : -1;
  }
  if (http_port_ < 0) {
    ::close(listen_fd_);
    listen_fd_ = -1;
    throw Error(ErrorKind::Data, "cannot listen on " + config_.host + ":" + std::to_string(wanted) + " (http)");
  }
  running_ = true;
  accept_thread_ = std::thread([this] { accept_loop(); });
  http_thread_ = std::thread([this] { http_->listen_after_bind(); });
  http_->wait_until_ready();
}

void Server::stop() {
  if (!running_.exchange(false)) return;
  ::shutdown(listen_fd_, SHUT_RDWR);
  ::close(listen_fd_);
  listen_fd_ = -1;
  if (accept_thread_.joinable()) accept_thread_.join();
  http_->stop();
  if (http_thread_.joinable()) http_thread_.join();
  {
    std::lock_guard lock(conn_mu_);
    for (auto& c : all_) c->shutdown();
  }
  for (auto& w : workers_)
    if (w.joinable()) w.join();
  for (auto& c : all_) ::close(c->fd);
  all_.clear();
  by_token_.clear();
}

void Server::accept_loop() {
  while (running_) {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR) continue;
      return;
    }
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    auto conn = std::make_shared<Connection>();
    conn->fd = fd;
    std::lock_guard lock(conn_mu_);
    all_.push_back(conn);
    workers_.emplace_back([this, conn] { serve_connection(conn); });
  }
}

void Server::route(const std::vector<Delivery>& deliveries) {
  for (const auto& d : deliveries) {
    std::shared_ptr<Connection> conn;
    {
      std::lock_guard lock(conn_mu_);
      auto it = by_token_.find(d.token);
      if (it != by_token_.end()) conn = it->second;
    }
    if (conn && conn->open) conn->send(to_json(d.message).dump());
  }
}

void Server::serve_connection(std::shared_ptr<Connection> conn) {
  std::string buffer;
  char chunk[4096];
  bool bound = false;
  auto fail = [&](const std::string& error_code, const std::string& why) {
    conn->send(to_json(make_error("", error_code, why)).dump());
    conn->shutdown();
  };
  while (conn->open) {
    const ssize_t n = ::recv(conn->fd, chunk, sizeof chunk, 0);
    if (n <= 0) {
      if (n < 0 && errno == EINTR) continue;
      break;
    }
    buffer.append(chunk, static_cast<std::size_t>(n));
    try {
      while (auto body = decode_frame(buffer)) {
        if (!bound) {
          Message hello;
          try {
            hello = parse_message(std::string_view(*body));
          } catch (const ProtocolError& e) {
            fail(e.code(), e.what());
            break;
          }
          if (hello.type != MessageType::Hello || !hello.payload.contains("token")) {
            fail(code::kUnauthorized, "the first frame must be HELLO with a token");
            break;
          }
          conn->token = hello.payload["token"].get<std::string>();
          std::vector<Delivery> out;
          try {
            {
              std::lock_guard lock(conn_mu_);
              auto old = by_token_.find(conn->token);
              if (old != by_token_.end() && old->second != conn) old->second->shutdown();
              by_token_[conn->token] = conn;
            }
            out = gateway_.connect(conn->token);
          } catch (const ProtocolError& e) {
            {
              std::lock_guard lock(conn_mu_);
              by_token_.erase(conn->token);
            }
            fail(e.code(), e.what());
            break;
          }
          bound = true;
          route(out);
          continue;
        }
        route(gateway_.handle(conn->token, std::string_view(*body)));
      }
    } catch (const ProtocolError& e) {
      fail(e.code(), e.what());
    }
  }
  if (bound) {
    std::lock_guard lock(conn_mu_);
    auto it = by_token_.find(conn->token);
    if (it != by_token_.end() && it->second == conn) {
      by_token_.erase(it);
      gateway_.disconnect(conn->token);
    }
  }
  conn->shutdown();
}

void Server::setup_http() {
  auto& srv = *http_;
  auto guarded = [](auto fn) {
    return [fn](const httplib::Request& req, httplib::Response& res) {
      try {
        fn(req, res);
      } catch (const Error& e) {
        reply(res, http_status(e.kind()), {{"error", std::string(to_string(e.kind()))}, {"message", e.what()}});
      } catch (const ProtocolError& e) {
        reply(res, 400, {{"error", e.code()}, {"message", e.what()}});
      } catch (const std::exception& e) {
        reply(res, 400, {{"error", "INVALID"}, {"message", e.what()}});
      }
    };
  };
  auto need_session = [this](const httplib::Request& req) {
    const std::string id = req.path_params.at("id");
    if (!gateway_.has_session(id)) throw Error(ErrorKind::Parameter, "no session '" + id + "'");
    return id;
  };

  srv.Get("/health", [](const httplib::Request&, httplib::Response& res) { reply(res, 200, {{"ok", true}}); });

  srv.Get("/sessions", guarded([this](const httplib::Request&, httplib::Response& res) {
            reply(res, 200, {{"sessions", gateway_.session_ids()}});
          }));

  srv.Post("/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
             const json b = body_json(req);
             show::SessionConfig c;
             c.session_id = b.value("session_id", c.session_id);
             c.n_gen = b.value("n_gen", c.n_gen);
             c.k_show = b.value("k_show", c.k_show);
             c.scale_min = b.value("scale_min", c.scale_min);
             c.scale_max = b.value("scale_max", c.scale_max);
             c.ceo_controllers = b.value("ceo_controllers", c.ceo_controllers);
             c.max_puppet_masters = b.value("max_puppet_masters", c.max_puppet_masters);
             gateway_.create_session(c);
             reply(res, 201, show::to_json(c));
           }));

  srv.Get("/sessions/:id", guarded([this, need_session](const httplib::Request& req, httplib::Response& res) {
            reply(res, 200, gateway_.public_snapshot(need_session(req)));
          }));

  srv.Post("/sessions/:id/roles", guarded([this, need_session](const httplib::Request& req, httplib::Response& res) {
             const std::string id = need_session(req);
             const json b = body_json(req);
             auto kind = parse_role(b.value("role", ""));
             if (!kind) throw Error(ErrorKind::Input, "unknown role '" + b.value("role", "") + "'");
             const std::string performer = b.value("performer", "");
             gateway_.assign_role(id, performer, *kind, b.value("secret", true));
             reply(res, 201, {{"performer", performer}, {"role", std::string(to_string(*kind))}});
           }));

  srv.Post("/sessions/:id/tokens", guarded([this, need_session](const httplib::Request& req, httplib::Response& res) {
             const std::string id = need_session(req);
             const json b = body_json(req);
             std::optional<std::string> performer;
             if (b.contains("performer") && !b["performer"].is_null()) performer = b["performer"].get<std::string>();
             const std::string token = gateway_.issue_token(id, performer);
             reply(res, 201, {{"token", token}, {"session_id", id}});
           }));

  for (const char* step : {"live", "voting", "close"}) {
    srv.Post(std::string("/sessions/:id/") + step,
             guarded([this, need_session, step = std::string(step)](const httplib::Request& req,
                                                                     httplib::Response& res) {
               const std::string id = need_session(req);
               std::vector<Delivery> out;
               if (step == "live") out = gateway_.go_live(id);
               if (step == "voting") out = gateway_.open_voting(id);
               if (step == "close") out = gateway_.close_session(id);
               route(out);
               reply(res, 200, gateway_.public_snapshot(id));
             }));
  }

  srv.Get("/sessions/:id/latency", guarded([this, need_session](const httplib::Request& req, httplib::Response& res) {
            json body;
            gateway_.inspect(need_session(req), [&](const show::ShowSession& s) {
              const auto l = s.latency_stats();
              body = {{"median", l.median ? json(*l.median) : json(nullptr)},
                      {"max", l.max ? json(*l.max) : json(nullptr)},
                      {"delivered", l.per_utterance.size()}};
            });
            reply(res, 200, body);
          }));

  srv.Get("/sessions/:id/tally", guarded([this, need_session](const httplib::Request& req, httplib::Response& res) {
            json body;
            gateway_.inspect(need_session(req), [&](const show::ShowSession& s) {
              if (s.state() != show::SessionState::Voting && s.state() != show::SessionState::Closed)
                throw Error(ErrorKind::State, "the tally is available once voting opens");
              body = to_json(s.tally_votes());
            });
            reply(res, 200, body);
          }));

  srv.Get("/sessions/:id/transcript",
          guarded([this, need_session](const httplib::Request& req, httplib::Response& res) {
            std::string text;
            gateway_.inspect(need_session(req),
                             [&](const show::ShowSession& s) { text = show::export_transcript_text(s); });
            res.status = 200;
            res.set_content(text, "application/json");
          }));

  srv.Post("/corpus/ingest", guarded([](const httplib::Request& req, httplib::Response& res) {
             const json b = body_json(req);
             const auto d = ingest_corpus(b.at("corpus").get<std::string>(), b.value("order", textgen::kDefaultOrder),
                                          b.value("alpha", textgen::kDefaultAlpha), b.at("out").get<std::string>());
             reply(res, 201, to_json(d));
           }));

  srv.Post("/analytics/lines", guarded([this](const httplib::Request& req, httplib::Response& res) {
             if (!config_.resources) {
               reply(res, 503, {{"error", "UNAVAILABLE"}, {"message", "analytics resources not loaded"}});
               return;
             }
             const auto lines = analytics::parse_tagged_lines(req.body);
             reply(res, 200, analytics::to_json(analytics::compare_report(analytics::group_stats(lines, *config_.resources))));
           }));

  srv.Post("/analytics/survey", guarded([](const httplib::Request& req, httplib::Response& res) {
             const auto stats = analytics::survey_aggregate(analytics::parse_survey(req.body));
             reply(res, 200, analytics::to_json(stats));
           }));
}

}  // namespace improv::gateway
