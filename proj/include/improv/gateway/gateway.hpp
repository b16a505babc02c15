#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "improv/curation/candidates.hpp"
#include "improv/gateway/protocol.hpp"
#include "improv/show/session.hpp"
#include "improv/textgen/backend.hpp"

namespace improv::gateway {

/// Milliseconds on an absolute scale. Sessions measure time from their own
/// creation instant on this scale.
using WallClock = std::function<std::int64_t()>;
WallClock system_clock_ms();

inline constexpr std::chrono::milliseconds kDefaultProposeTimeout{5000};
inline constexpr std::size_t kDefaultTopicExpansion = 10;

/// A token is bound to one session and either to one roster member or, when
/// `performer` is empty, to an audience device.
struct TokenClaim {
  std::string token;
  std::string session_id;
  std::optional<std::string> performer;

  bool audience() const { return !performer.has_value(); }
};

struct Delivery {
  std::string token;
  Message message;
};

struct GatewayOptions {
  std::shared_ptr<const textgen::LanguageBackend> backend;
  curation::Blocklist blocklist;
  curation::RankingMode ranking = curation::RankingMode::Sum;
  std::uint64_t seed = 0;
  /// Session logs live here as <session_id>.jsonl. Unset keeps everything in
  /// memory.
  std::optional<std::filesystem::path> log_dir;
  std::chrono::milliseconds propose_timeout = kDefaultProposeTimeout;
  std::size_t topic_expansion = kDefaultTopicExpansion;
  WallClock clock = system_clock_ms();
};

/// Transport-independent core of the service. Every call returns the
/// messages it produced, addressed by token; the caller moves them onto
/// sockets. Each session is a single-writer loop guarded by its own mutex, and
/// every state change is appended to the session log before the call returns.
///
/// Lines are pushed to the performer device as LINE_DELIVER when queued
/// (or on reconnect). They stay queued until the device reports LINE_SPOKEN
/// for the head of its queue, which records delivery; LINE_SKIP drops a
/// queued line.
class Gateway {
 public:
  /// Recovers every session log found in options.log_dir.
  explicit Gateway(GatewayOptions options);
  ~Gateway();
  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  // --- session management ---------------------------------------------------
  void create_session(const show::SessionConfig& config);
  bool has_session(const std::string& session_id) const;
  std::vector<std::string> session_ids() const;
  void assign_role(const std::string& session_id, const std::string& performer, RoleKind kind, bool secret = true);
  /// Issues (or registers) a token. `performer` must already hold a role.
  std::string issue_token(const std::string& session_id, std::optional<std::string> performer,
                          std::string token = {});
  std::vector<Delivery> go_live(const std::string& session_id);
  std::vector<Delivery> open_voting(const std::string& session_id);
  /// Closes the session and sends the final TALLY to every connected client.
  std::vector<Delivery> close_session(const std::string& session_id);

  // --- live stream ------------------------------------------------------------
  /// Binds a stream. Returns the HELLO reply plus any lines waiting for this
  /// performer. Throws ProtocolError(UNAUTHORIZED) for an unknown token.
  std::vector<Delivery> connect(const std::string& token);
  void disconnect(const std::string& token);
  bool connected(const std::string& token) const;

  /// Applies one client message. Never throws for client mistakes; those come
  /// back as ERROR messages to the sender.
  std::vector<Delivery> handle(const std::string& token, const nlohmann::json& raw);
  std::vector<Delivery> handle(const std::string& token, std::string_view text);

  // --- reads --------------------------------------------------------------------
  std::optional<TokenClaim> claim(const std::string& token) const;
  void inspect(const std::string& session_id, const std::function<void(const show::ShowSession&)>& fn) const;
  /// State visible to anyone: never contains role kinds before voting.
  nlohmann::json public_snapshot(const std::string& session_id) const;
  std::optional<curation::CandidateSet> candidate_set(const std::string& session_id, const std::string& set_id) const;

 private:
  struct Slot;
  Slot& slot(const std::string& session_id) const;
  void recover(const std::filesystem::path& file);
  void append(Slot& s, nlohmann::json record);
  std::vector<std::string> tokens_where(const std::string& session_id,
                                        const std::function<bool(const TokenClaim&)>& pred) const;
  std::vector<Delivery> admin_step(const std::string& session_id,
                                   const std::function<void(show::ShowSession&)>& step, bool broadcast_tally);
  nlohmann::json hello_payload(const Slot& s, const TokenClaim& c) const;
  std::vector<Delivery> broadcast_hello(Slot& s);
  std::vector<Delivery> push_queue(Slot& s, const std::string& performer);
  Message line_deliver(const Slot& s, const show::Utterance& u) const;
  std::vector<Delivery> dispatch(Slot& s, const TokenClaim& c, const Message& m, nlohmann::json& record);
  void stamp(Slot& s, std::vector<Delivery>& out);

  GatewayOptions options_;
  mutable std::shared_mutex registry_mu_;
  std::map<std::string, std::unique_ptr<Slot>> sessions_;
  std::map<std::string, TokenClaim> tokens_;
  std::set<std::string> connected_;
  std::uint64_t token_counter_ = 0;
};

nlohmann::json to_json(const show::VoteTally& tally);

}  // namespace improv::gateway
