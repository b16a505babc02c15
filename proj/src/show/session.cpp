#include "improv/show/session.hpp"

#include <algorithm>
#include <chrono>

#include "improv/error.hpp"

namespace improv::show {

namespace {

template <class... Fs>
struct overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

std::size_t numeric_suffix(const std::string& id, char prefix) {
  if (id.size() < 2 || id[0] != prefix) return 0;
  std::size_t n = 0;
  for (std::size_t i = 1; i < id.size(); ++i) {
    if (id[i] < '0' || id[i] > '9') return 0;
    n = n * 10 + static_cast<std::size_t>(id[i] - '0');
  }
  return n;
}

}  // namespace

Clock steady_clock_ms() {
  const auto start = std::chrono::steady_clock::now();
  return [start] {
    return static_cast<TimeMs>(
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count());
  };
}

std::string_view to_string(UtteranceStatus status) {
  switch (status) {
    case UtteranceStatus::Queued: return "queued";
    case UtteranceStatus::Delivered: return "delivered";
    case UtteranceStatus::Skipped: return "skipped";
  }
  return "?";
}

std::optional<UtteranceStatus> parse_status(std::string_view text) {
  for (auto s : {UtteranceStatus::Queued, UtteranceStatus::Delivered, UtteranceStatus::Skipped}) {
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

std::string_view to_string(SessionState state) {
  switch (state) {
    case SessionState::Setup: return "setup";
    case SessionState::Live: return "live";
    case SessionState::Voting: return "voting";
    case SessionState::Closed: return "closed";
  }
  return "?";
}

std::optional<double> median(std::vector<double> values) {
  if (values.empty()) return std::nullopt;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

ShowSession::ShowSession(SessionConfig config, Clock clock) : config_(std::move(config)), clock_(std::move(clock)) {
  if (config_.k_show < 1 || config_.n_gen < config_.k_show) {
    throw Error(ErrorKind::Parameter, "session config needs n_gen >= k_show >= 1");
  }
  if (config_.scale_min > config_.scale_max) throw Error(ErrorKind::Parameter, "empty survey scale");
}

ShowSession ShowSession::replay(SessionConfig config, std::span<const Event> events, Clock clock) {
  ShowSession s(std::move(config), std::move(clock));
  for (const Event& e : events) {
    if (e.index != s.log_.size()) {
      throw Error(ErrorKind::Data, "event log index " + std::to_string(e.index) + " out of sequence");
    }
    if (!s.log_.empty() && e.at < s.log_.back().at) {
      throw Error(ErrorKind::Data, "event log time goes backwards at index " + std::to_string(e.index));
    }
    s.apply(e);
    s.log_.push_back(e);
  }
  return s;
}

TimeMs ShowSession::now() {
  TimeMs t = clock_();
  if (!log_.empty()) t = std::max(t, log_.back().at);
  return t;
}

void ShowSession::record(EventBody body) { record_at(now(), std::move(body)); }

void ShowSession::record_at(TimeMs at, EventBody body) {
  Event e{log_.size(), at, std::move(body)};
  apply(e);
  log_.push_back(std::move(e));
}

void ShowSession::require_state(SessionState expected, const char* what) const {
  if (state_ != expected) {
    throw Error(ErrorKind::State, std::string(what) + " requires the " + std::string(to_string(expected)) +
                                      " state, session is " + std::string(to_string(state_)));
  }
}

const Role* ShowSession::role_of(const std::string& performer) const {
  auto it = roles_.find(performer);
  return it == roles_.end() ? nullptr : &it->second;
}

void ShowSession::check_receiver(const std::string& performer) const {
  const Role* r = role_of(performer);
  if (!r) throw Error(ErrorKind::Parameter, "unknown performer '" + performer + "'");
  if (!receives_lines(r->kind)) {
    throw Error(ErrorKind::Role, "performer '" + performer + "' is " + std::string(to_string(r->kind)) +
                                     " and does not receive lines");
  }
}

Utterance& ShowSession::mutable_utterance(const std::string& id) {
  auto it = utterances_.find(id);
  if (it == utterances_.end()) throw Error(ErrorKind::Parameter, "unknown utterance '" + id + "'");
  return it->second;
}

const Utterance& ShowSession::utterance(const std::string& id) const {
  auto it = utterances_.find(id);
  if (it == utterances_.end()) throw Error(ErrorKind::Parameter, "unknown utterance '" + id + "'");
  return it->second;
}

const Scene* ShowSession::open_scene() const {
  if (scenes_.empty() || scenes_.back().ended_at) return nullptr;
  return &scenes_.back();
}

// Validates the event against the current state, then applies it. Nothing is
// modified when validation fails.
void ShowSession::apply(const Event& e) {
  std::visit(
      overloaded{
          [&](const event::RoleAssigned& b) {
            require_state(SessionState::Setup, "assigning roles");
            if (b.performer.empty()) throw Error(ErrorKind::Parameter, "performer id must not be empty");
            if (roles_.count(b.performer)) {
              throw Error(ErrorKind::Parameter, "performer '" + b.performer + "' already has a role");
            }
            const auto count = std::count_if(roles_.begin(), roles_.end(),
                                             [&](const auto& kv) { return kv.second.kind == b.kind; });
            if (b.kind == RoleKind::CeoController && count >= config_.ceo_controllers) {
              throw Error(ErrorKind::Role, "the show already has its CEO controller");
            }
            if (b.kind == RoleKind::PuppetMaster && count >= config_.max_puppet_masters) {
              throw Error(ErrorKind::Role, "the show already has its puppet master");
            }
            roles_[b.performer] = Role{b.performer, b.kind, b.secret};
          },
          [&](const event::WentLive&) {
            require_state(SessionState::Setup, "going live");
            int receivers = 0, free_will = 0, ceo = 0;
            for (const auto& [id, r] : roles_) {
              receivers += receives_lines(r.kind);
              free_will += r.kind == RoleKind::FreeWill;
              ceo += r.kind == RoleKind::CeoController;
            }
            if (receivers == 0) throw Error(ErrorKind::State, "going live needs a Cyborg or a Puppet");
            if (free_will == 0) throw Error(ErrorKind::State, "going live needs a Free-will Human");
            if (ceo != config_.ceo_controllers) {
              throw Error(ErrorKind::State, "going live needs " + std::to_string(config_.ceo_controllers) +
                                                " CEO controller(s), roster has " + std::to_string(ceo));
            }
            state_ = SessionState::Live;
          },
          [&](const event::SceneStarted& b) {
            require_state(SessionState::Live, "starting a scene");
            if (open_scene()) throw Error(ErrorKind::State, "scene " + scenes_.back().id + " is still open");
            for (const Scene& s : scenes_) {
              if (s.id == b.scene_id) throw Error(ErrorKind::Data, "duplicate scene id " + b.scene_id);
            }
            scenes_.push_back(Scene{b.scene_id, b.suggestion, e.at, std::nullopt, {}});
            next_scene_ = std::max(next_scene_, numeric_suffix(b.scene_id, 's') + 1);
          },
          [&](const event::SceneEnded& b) {
            require_state(SessionState::Live, "ending a scene");
            const Scene* open = open_scene();
            if (!open) throw Error(ErrorKind::State, "no scene is open");
            if (open->id != b.scene_id) throw Error(ErrorKind::Data, "ending a scene that is not open");
            for (const auto& [performer, q] : queues_) {
              for (const auto& id : q) {
                if (utterances_.at(id).scene_id == b.scene_id) {
                  throw Error(ErrorKind::State, "scene still has queued line " + id);
                }
              }
            }
            scenes_.back().ended_at = e.at;
          },
          [&](const event::LineEnqueued& b) {
            require_state(SessionState::Live, "enqueueing a line");
            const Scene* open = open_scene();
            if (!open) throw Error(ErrorKind::State, "lines can only be queued during a scene");
            check_receiver(b.performer);
            if (b.text.empty()) throw Error(ErrorKind::Parameter, "line text must not be empty");
            if (b.created_at > e.at) throw Error(ErrorKind::Parameter, "line created in the future");
            if (utterances_.count(b.utterance_id)) {
              throw Error(ErrorKind::Data, "duplicate utterance id " + b.utterance_id);
            }
            Utterance u;
            u.id = b.utterance_id;
            u.text = b.text;
            u.source = b.source;
            u.performer = b.performer;
            u.scene_id = open->id;
            u.created_at = b.created_at;
            u.enqueued_at = e.at;
            u.interrupting = b.interrupting;
            auto& q = queues_[b.performer];
            if (b.interrupting) {
              q.push_front(u.id);
            } else {
              q.push_back(u.id);
            }
            utterances_.emplace(u.id, std::move(u));
            next_utterance_ = std::max(next_utterance_, numeric_suffix(b.utterance_id, 'u') + 1);
          },
          [&](const event::LineDelivered& b) {
            require_state(SessionState::Live, "delivering a line");
            Utterance& u = mutable_utterance(b.utterance_id);
            auto& q = queues_[u.performer];
            if (q.empty() || q.front() != u.id) {
              throw Error(ErrorKind::State, "utterance " + u.id + " is not at the head of its queue");
            }
            q.pop_front();
            u.status = UtteranceStatus::Delivered;
            u.delivered_at = e.at;
            delivery_order_.push_back(u.id);
            for (Scene& s : scenes_) {
              if (s.id == u.scene_id) s.turns.push_back(u.id);
            }
          },
          [&](const event::LineSkipped& b) {
            Utterance& u = mutable_utterance(b.utterance_id);
            if (u.status != UtteranceStatus::Queued) {
              throw Error(ErrorKind::State,
                          "utterance " + u.id + " is already " + std::string(to_string(u.status)));
            }
            auto& q = queues_[u.performer];
            q.erase(std::find(q.begin(), q.end(), u.id));
            u.status = UtteranceStatus::Skipped;
          },
          [&](const event::SpokenAck& b) {
            Utterance& u = mutable_utterance(b.utterance_id);
            if (u.status != UtteranceStatus::Delivered) {
              throw Error(ErrorKind::State, "only delivered lines can be acknowledged");
            }
            if (u.spoken_ack_at) throw Error(ErrorKind::State, "utterance " + u.id + " already acknowledged");
            u.spoken_ack_at = e.at;
          },
          [&](const event::VotingOpened&) {
            require_state(SessionState::Live, "opening the vote");
            if (open_scene()) throw Error(ErrorKind::State, "end the scene before voting");
            state_ = SessionState::Voting;
          },
          [&](const event::VoteSubmitted& b) {
            require_state(SessionState::Voting, "voting");
            if (b.token.empty()) throw Error(ErrorKind::Parameter, "ballot token must not be empty");
            if (vote_tokens_.count(b.token)) {
              throw Error(ErrorKind::State, "device token '" + b.token + "' has already voted");
            }
            if (b.ballot.empty()) throw Error(ErrorKind::Parameter, "empty ballot");
            for (const auto& [performer, guess] : b.ballot) {
              const Role* r = role_of(performer);
              if (!r || !on_stage(r->kind)) {
                throw Error(ErrorKind::Parameter, "'" + performer + "' is not an on-stage performer");
              }
              if (!on_stage(guess)) throw Error(ErrorKind::Parameter, "guesses must be on-stage roles");
            }
            vote_tokens_.insert(b.token);
            votes_.push_back(b);
          },
          [&](const event::SessionClosed&) {
            require_state(SessionState::Voting, "closing the show");
            state_ = SessionState::Closed;
          },
      },
      e.body);
}

const Role& ShowSession::assign_role(const std::string& performer, RoleKind kind, bool secret) {
  record(event::RoleAssigned{performer, kind, secret});
  return roles_.at(performer);
}

void ShowSession::go_live() { record(event::WentLive{}); }

std::vector<PublicRole> ShowSession::audience_roster() const {
  const bool reveal = state_ == SessionState::Voting || state_ == SessionState::Closed;
  std::vector<PublicRole> out;
  for (const auto& [id, r] : roles_) {
    if (!on_stage(r.kind)) continue;
    out.push_back({id, (reveal || !r.secret) ? std::optional<RoleKind>(r.kind) : std::nullopt});
  }
  return out;
}

const Scene& ShowSession::start_scene(const std::string& suggestion) {
  record(event::SceneStarted{"s" + std::to_string(next_scene_), suggestion});
  return scenes_.back();
}

const Scene& ShowSession::end_scene() {
  require_state(SessionState::Live, "ending a scene");
  const Scene* open = open_scene();
  if (!open) throw Error(ErrorKind::State, "no scene is open");
  const std::string scene_id = open->id;
  std::vector<std::string> leftovers;
  for (const auto& [performer, q] : queues_) {
    for (const auto& id : q) {
      if (utterances_.at(id).scene_id == scene_id) leftovers.push_back(id);
    }
  }
  auto key = [](const std::string& id) { return std::pair(numeric_suffix(id, 'u'), id); };
  std::sort(leftovers.begin(), leftovers.end(),
            [&](const std::string& a, const std::string& b) { return key(a) < key(b); });
  for (const auto& id : leftovers) record(event::LineSkipped{id});
  record(event::SceneEnded{scene_id});
  return scenes_.back();
}

const Utterance& ShowSession::enqueue_line(const std::string& performer, const LineRequest& line) {
  const std::string id = "u" + std::to_string(next_utterance_);
  record(event::LineEnqueued{id, performer, line.text, line.source, line.created_at, line.interrupting});
  return utterances_.at(id);
}

std::optional<Utterance> ShowSession::next_line(const std::string& performer) {
  require_state(SessionState::Live, "delivering a line");
  check_receiver(performer);
  auto it = queues_.find(performer);
  if (it == queues_.end() || it->second.empty()) return std::nullopt;
  const std::string id = it->second.front();
  record(event::LineDelivered{id});
  return utterances_.at(id);
}

const Utterance& ShowSession::skip_line(const std::string& performer, const std::string& utterance_id) {
  check_receiver(performer);
  const Utterance& u = utterance(utterance_id);
  if (u.performer != performer) {
    throw Error(ErrorKind::Parameter, "utterance " + utterance_id + " was not queued to '" + performer + "'");
  }
  record(event::LineSkipped{utterance_id});
  return utterances_.at(utterance_id);
}

const Utterance& ShowSession::acknowledge_spoken(const std::string& performer, const std::string& utterance_id) {
  check_receiver(performer);
  const Utterance& u = utterance(utterance_id);
  if (u.performer != performer) {
    throw Error(ErrorKind::Parameter, "utterance " + utterance_id + " was not queued to '" + performer + "'");
  }
  record(event::SpokenAck{utterance_id});
  return utterances_.at(utterance_id);
}

std::vector<std::string> ShowSession::queue(const std::string& performer) const {
  auto it = queues_.find(performer);
  if (it == queues_.end()) return {};
  return {it->second.begin(), it->second.end()};
}

std::vector<const Utterance*> ShowSession::spoken_transcript() const {
  std::vector<const Utterance*> out;
  out.reserve(delivery_order_.size());
  for (const auto& id : delivery_order_) out.push_back(&utterances_.at(id));
  return out;
}

Counters ShowSession::counters() const {
  Counters c;
  c.enqueued = utterances_.size();
  for (const auto& [id, u] : utterances_) {
    c.delivered += u.status == UtteranceStatus::Delivered;
    c.skipped += u.status == UtteranceStatus::Skipped;
  }
  for (const auto& [performer, q] : queues_) c.queued += q.size();
  return c;
}

LatencyStats ShowSession::latency_stats() const {
  LatencyStats stats;
  std::vector<double> values;
  for (const Utterance* u : spoken_transcript()) {
    const double seconds = static_cast<double>(*u->delivered_at - u->created_at) / 1000.0;
    stats.per_utterance.emplace_back(u->id, seconds);
    values.push_back(seconds);
  }
  stats.median = median(values);
  if (!values.empty()) stats.max = *std::max_element(values.begin(), values.end());
  return stats;
}

void ShowSession::open_voting() { record(event::VotingOpened{}); }

void ShowSession::submit_vote(const std::string& token, const Ballot& ballot) {
  record(event::VoteSubmitted{token, ballot});
}

VoteTally ShowSession::tally_votes() const { return tally(roles_, votes_); }

void ShowSession::close() { record(event::SessionClosed{}); }

VoteTally tally(const std::map<std::string, Role>& roster, std::span<const event::VoteSubmitted> ballots) {
  VoteTally t;
  std::map<RoleKind, std::pair<int, int>> right_total;
  for (const auto& b : ballots) {
    ++t.ballots;
    for (const auto& [performer, guess] : b.ballot) {
      ++t.counts[performer][guess];
      auto it = roster.find(performer);
      if (it == roster.end()) continue;
      auto& [right, total] = right_total[it->second.kind];
      right += guess == it->second.kind;
      ++total;
    }
  }
  for (const auto& [kind, rt] : right_total) {
    t.accuracy[kind] = static_cast<double>(rt.first) / static_cast<double>(rt.second);
  }
  return t;
}

std::optional<RoleKind> majority_guess(const VoteTally& tally, const std::string& performer) {
  auto it = tally.counts.find(performer);
  if (it == tally.counts.end()) return std::nullopt;
  std::optional<RoleKind> best;
  int best_count = 0;
  bool tie = false;
  for (const auto& [kind, n] : it->second) {
    if (n > best_count) {
      best = kind;
      best_count = n;
      tie = false;
    } else if (n == best_count) {
      tie = true;
    }
  }
  if (tie || best_count == 0) return std::nullopt;
  return best;
}

double misidentification_rate(std::span<const std::pair<std::map<std::string, Role>, VoteTally>> shows,
                              RoleKind actual, RoleKind guessed) {
  if (shows.empty()) return 0.0;
  int hits = 0;
  for (const auto& [roster, t] : shows) {
    bool hit = false;
    for (const auto& [id, r] : roster) {
      if (r.kind == actual && majority_guess(t, id) == guessed) hit = true;
    }
    hits += hit;
  }
  return static_cast<double>(hits) / static_cast<double>(shows.size());
}

}  // namespace improv::show
