#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "improv/show/events.hpp"
#include "improv/types.hpp"

namespace improv::show {

using Clock = std::function<TimeMs()>;

/// Clock reading milliseconds elapsed since its construction.
Clock steady_clock_ms();

struct SessionConfig {
  std::string session_id = "show";
  std::size_t n_gen = 10;
  std::size_t k_show = 4;
  int scale_min = 1;
  int scale_max = 7;
  int ceo_controllers = 1;     // exact number required to go live
  int max_puppet_masters = 1;  // upper bound

  friend bool operator==(const SessionConfig&, const SessionConfig&) = default;
};

struct Role {
  std::string performer;
  RoleKind kind = RoleKind::FreeWill;
  bool secret = true;

  friend bool operator==(const Role&, const Role&) = default;
};

/// Roster entry as an audience client may see it: the kind is withheld for
/// secret roles until voting opens.
struct PublicRole {
  std::string performer;
  std::optional<RoleKind> kind;
};

enum class UtteranceStatus { Queued, Delivered, Skipped };
std::string_view to_string(UtteranceStatus status);
std::optional<UtteranceStatus> parse_status(std::string_view text);

struct Utterance {
  std::string id;
  std::string text;
  Source source = Source::Human;
  std::string performer;
  std::string scene_id;
  TimeMs created_at = 0;
  TimeMs enqueued_at = 0;
  std::optional<TimeMs> delivered_at;
  std::optional<TimeMs> spoken_ack_at;
  UtteranceStatus status = UtteranceStatus::Queued;
  bool interrupting = false;

  friend bool operator==(const Utterance&, const Utterance&) = default;
};

struct Scene {
  std::string id;
  std::string suggestion;
  TimeMs started_at = 0;
  std::optional<TimeMs> ended_at;
  std::vector<std::string> turns;  // delivered utterance ids in delivery order

  std::optional<TimeMs> duration_ms() const {
    if (!ended_at) return std::nullopt;
    return *ended_at - started_at;
  }

  friend bool operator==(const Scene&, const Scene&) = default;
};

enum class SessionState { Setup, Live, Voting, Closed };
std::string_view to_string(SessionState state);

struct LatencyStats {
  std::vector<std::pair<std::string, double>> per_utterance;  // seconds, delivery order
  std::optional<double> median;
  std::optional<double> max;
};

/// Median with the midpoint rule for even counts; nullopt when empty.
std::optional<double> median(std::vector<double> values);

struct VoteTally {
  /// performer -> guessed role -> ballots
  std::map<std::string, std::map<RoleKind, int>> counts;
  /// true role -> fraction of guesses about performers of that role that were right
  std::map<RoleKind, double> accuracy;
  std::size_t ballots = 0;

  friend bool operator==(const VoteTally&, const VoteTally&) = default;
};

struct Counters {
  std::size_t enqueued = 0;
  std::size_t delivered = 0;
  std::size_t skipped = 0;
  std::size_t queued = 0;
};

/// Live show state. Every mutation goes through the append-only event log,
/// so replaying the log rebuilds an identical session. Not thread-safe: one
/// writer per session.
class ShowSession {
 public:
  explicit ShowSession(SessionConfig config, Clock clock = steady_clock_ms());

  /// Rebuilds a session from its log. Throws Error if the log is not a valid
  /// history for this config.
  static ShowSession replay(SessionConfig config, std::span<const Event> events, Clock clock = steady_clock_ms());

  const SessionConfig& config() const { return config_; }
  SessionState state() const { return state_; }
  const std::vector<Event>& event_log() const { return log_; }

  // --- setup ---------------------------------------------------------------
  const Role& assign_role(const std::string& performer, RoleKind kind, bool secret = true);
  void go_live();
  const std::map<std::string, Role>& roster() const { return roles_; }
  const Role* role_of(const std::string& performer) const;
  std::vector<PublicRole> audience_roster() const;

  // --- scenes --------------------------------------------------------------
  const Scene& start_scene(const std::string& suggestion);
  const Scene& end_scene();
  const Scene* open_scene() const;
  const std::vector<Scene>& scenes() const { return scenes_; }

  // --- line delivery -------------------------------------------------------
  const Utterance& enqueue_line(const std::string& performer, const LineRequest& line);
  /// Delivers the head of the performer's queue; nullopt when it is empty.
  std::optional<Utterance> next_line(const std::string& performer);
  const Utterance& skip_line(const std::string& performer, const std::string& utterance_id);
  const Utterance& acknowledge_spoken(const std::string& performer, const std::string& utterance_id);

  const Utterance& utterance(const std::string& id) const;
  const std::map<std::string, Utterance>& utterances() const { return utterances_; }
  std::vector<std::string> queue(const std::string& performer) const;
  /// Delivered lines in delivery order (skipped and queued lines excluded).
  std::vector<const Utterance*> spoken_transcript() const;
  Counters counters() const;

  LatencyStats latency_stats() const;

  // --- voting --------------------------------------------------------------
  void open_voting();
  void submit_vote(const std::string& token, const Ballot& ballot);
  VoteTally tally_votes() const;
  const std::vector<event::VoteSubmitted>& votes() const { return votes_; }
  void close();

 private:
  TimeMs now();
  void record(EventBody body);
  void record_at(TimeMs at, EventBody body);
  void apply(const Event& e);
  void require_state(SessionState expected, const char* what) const;
  Utterance& mutable_utterance(const std::string& id);
  void check_receiver(const std::string& performer) const;

  SessionConfig config_;
  Clock clock_;
  SessionState state_ = SessionState::Setup;
  std::vector<Event> log_;
  std::map<std::string, Role> roles_;
  std::vector<Scene> scenes_;
  std::map<std::string, Utterance> utterances_;
  std::vector<std::string> delivery_order_;
  std::map<std::string, std::deque<std::string>> queues_;
  std::vector<event::VoteSubmitted> votes_;
  std::set<std::string> vote_tokens_;
  std::size_t next_utterance_ = 1;
  std::size_t next_scene_ = 1;
};

/// Pure tally over a ballot multiset; order of ballots does not matter.
VoteTally tally(const std::map<std::string, Role>& roster, std::span<const event::VoteSubmitted> ballots);

/// Guess with the most ballots for one performer; nullopt on a tie or no votes.
std::optional<RoleKind> majority_guess(const VoteTally& tally, const std::string& performer);

/// Fraction of shows in which some performer whose true role is `actual` was
/// majority-guessed as `guessed`.
double misidentification_rate(std::span<const std::pair<std::map<std::string, Role>, VoteTally>> shows,
                              RoleKind actual, RoleKind guessed);

}  // namespace improv::show
