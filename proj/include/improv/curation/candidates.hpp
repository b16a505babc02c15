#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "improv/textgen/backend.hpp"
#include "improv/textgen/token.hpp"
#include "improv/textgen/topic.hpp"
#include "improv/types.hpp"

namespace improv::curation {

inline constexpr std::size_t kDefaultGenerated = 10;
inline constexpr std::size_t kDefaultShown = 4;

enum class RankingMode {
  Sum,           // total log-likelihood
  PerTokenMean,  // log-likelihood divided by the number of scored events
};

struct CandidateFlags {
  bool offensive = false;
  bool duplicate = false;

  friend bool operator==(const CandidateFlags&, const CandidateFlags&) = default;
};

struct Candidate {
  std::string text;
  std::vector<textgen::Token> tokens;
  double score = 0.0;       // log-likelihood
  double rank_score = 0.0;  // key actually ranked on (depends on RankingMode)
  std::optional<int> rank;  // 1-based among unfiltered candidates
  CandidateFlags flags;

  bool filtered() const { return flags.offensive || flags.duplicate; }

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

enum class Outcome { Pending, Selected, Discarded };

std::string_view to_string(Outcome outcome);

/// One generation round for one line of context.
struct CandidateSet {
  std::string id;
  std::string context;
  textgen::TopicSet topic;
  std::vector<Candidate> generated;
  std::vector<std::size_t> presented;  // indices into generated, best first
  Outcome outcome = Outcome::Pending;
  std::vector<int> selected;  // 1-based positions in presented, in selection order
  TimeMs created_at = 0;

  /// position is 1-based. Throws Error(Parameter) when out of range.
  const Candidate& presented_at(int position) const;

  friend bool operator==(const CandidateSet&, const CandidateSet&) = default;
};

/// Operator-supplied list of words that must never reach a performer.
class Blocklist {
 public:
  Blocklist() = default;
  explicit Blocklist(std::set<std::string> words);

  /// One word per line; '#' starts a comment.
  static Blocklist load_file(const std::string& path);
  static Blocklist parse(std::string_view text);

  bool contains(std::string_view word) const;
  bool empty() const { return words_.empty(); }
  std::size_t size() const { return words_.size(); }

 private:
  std::set<std::string, std::less<>> words_;
};

struct ProposeOptions {
  std::size_t n_gen = kDefaultGenerated;
  std::size_t k_show = kDefaultShown;
  std::size_t max_len = textgen::kDefaultMaxLen;
  RankingMode ranking = RankingMode::Sum;
};

/// Flags every candidate that has a blocklisted word token. Candidates that
/// are already flagged as duplicates are left alone.
void filter_offensive(std::span<Candidate> candidates, const Blocklist& blocklist);

/// Flags later copies of an identical token sequence among candidates not
/// already filtered.
void mark_duplicates(std::span<Candidate> candidates);

/// Ranks unfiltered candidates by rank_score descending, ties by text, assigns
/// ranks, and returns the indices of the best k.
std::vector<std::size_t> rank_and_present(std::span<Candidate> candidates, std::size_t k_show);

/// Generates n_gen candidates, filters them, and presents the best k_show.
/// Candidate i is sampled with the i-th output of a SplitMix64 stream started
/// at `seed`, so a set is reproducible from (backend, context, topic, seed,
/// blocklist, options).
CandidateSet propose(const textgen::LanguageBackend& backend, std::string id, std::string_view context,
                     const textgen::TopicSet& topic, std::uint64_t seed, const Blocklist& blocklist,
                     const ProposeOptions& options = {}, TimeMs created_at = 0);

struct Decision {
  bool discard = false;
  std::vector<int> positions;  // 1-based positions in presented

  static Decision select(std::vector<int> positions) { return {false, std::move(positions)}; }
  static Decision discard_all() { return {true, {}}; }
};

/// Closes a pending set. Selected candidates come back as AI lines in the
/// order chosen, stamped with the set's creation time. Throws Error(State) if
/// the set is already resolved and Error(Parameter) for a bad position.
std::vector<LineRequest> resolve(CandidateSet& set, const Decision& decision);

std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace improv::curation
