#include <deque>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "doctest.h"
#include "improv/error.hpp"
#include "improv/show/session.hpp"
#include "improv/show/transcript.hpp"
#include "show_fixtures.hpp"

using namespace improv;
using namespace improv::show;
using fixtures::ManualClock;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an improv::Error");
  return ErrorKind::Input;
}

LineRequest line(const std::string& text, TimeMs created_at = 0, bool interrupting = false,
                 Source source = Source::AI) {
  return {text, source, created_at, interrupting};
}

ShowSession live_show(const ManualClock& clock) {
  auto s = fixtures::standard_show(clock);
  s.go_live();
  s.start_scene("non-geographical location");
  return s;
}

}  // namespace

TEST_CASE("roster rules") {
  ManualClock clock;
  SUBCASE("the standard cast is valid") {
    auto s = fixtures::standard_show(clock);
    s.go_live();
    CHECK(s.state() == SessionState::Live);
  }
  SUBCASE("a second CEO is refused") {
    auto s = fixtures::standard_show(clock);
    CHECK(kind_of([&] { s.assign_role("gus", RoleKind::CeoController); }) == ErrorKind::Role);
  }
  SUBCASE("a performer gets one role") {
    auto s = fixtures::standard_show(clock);
    CHECK(kind_of([&] { s.assign_role("ana", RoleKind::FreeWill); }) == ErrorKind::Parameter);
  }
  SUBCASE("no Free-will Human, no show") {
    ShowSession s(SessionConfig{}, clock.clock());
    s.assign_role("ana", RoleKind::Cyborg);
    s.assign_role("eve", RoleKind::CeoController);
    CHECK(kind_of([&] { s.go_live(); }) == ErrorKind::State);
    CHECK(s.state() == SessionState::Setup);
  }
  SUBCASE("no role changes once live") {
    auto s = fixtures::standard_show(clock);
    s.go_live();
    CHECK(kind_of([&] { s.assign_role("gus", RoleKind::FreeWill); }) == ErrorKind::State);
  }
  SUBCASE("audience roster hides secret kinds until voting") {
    auto s = fixtures::standard_show(clock);
    s.go_live();
    for (const auto& r : s.audience_roster()) CHECK_FALSE(r.kind.has_value());
    CHECK(s.audience_roster().size() == 4);
    s.open_voting();
    for (const auto& r : s.audience_roster()) CHECK(r.kind.has_value());
  }
}

TEST_CASE("scenes") {
  ManualClock clock;
  auto s = fixtures::standard_show(clock);
  s.go_live();
  clock.set(1000);
  const Scene& sc = s.start_scene("non-geographical location");
  CHECK(sc.suggestion == "non-geographical location");
  CHECK(sc.id == "s1");
  CHECK(kind_of([&] { s.start_scene("nested"); }) == ErrorKind::State);
  clock.advance(4 * 60 * 1000);
  const Scene& ended = s.end_scene();
  REQUIRE(ended.duration_ms().has_value());
  CHECK(*ended.duration_ms() == 240000);
  CHECK(*ended.duration_ms() >= 3 * 60 * 1000);
  CHECK(*ended.duration_ms() <= 6 * 60 * 1000);
  CHECK(kind_of([&] { s.end_scene(); }) == ErrorKind::State);
}

TEST_CASE("line delivery") {
  ManualClock clock;
  SUBCASE("FIFO") {
    auto s = live_show(clock);
    s.enqueue_line("ana", line("A"));
    s.enqueue_line("ana", line("B"));
    CHECK(s.next_line("ana")->text == "A");
    CHECK(s.next_line("ana")->text == "B");
    CHECK_FALSE(s.next_line("ana").has_value());
  }
  SUBCASE("skip") {
    auto s = live_show(clock);
    const auto a = s.enqueue_line("ana", line("A")).id;
    s.enqueue_line("ana", line("B"));
    CHECK(s.skip_line("ana", a).status == UtteranceStatus::Skipped);
    CHECK(s.next_line("ana")->text == "B");
    auto spoken = s.spoken_transcript();
    REQUIRE(spoken.size() == 1);
    CHECK(spoken[0]->text == "B");
    CHECK(s.event_log().size() == 12);  // 6 roles, live, scene, 2 enqueues, skip, deliver
  }
  SUBCASE("interrupting follow-up jumps the queue") {
    auto s = live_show(clock);
    s.enqueue_line("ana", line("A"));
    s.enqueue_line("ana", line("B", 0, true));
    CHECK(s.next_line("ana")->text == "B");
    CHECK(s.next_line("ana")->text == "A");
  }
  SUBCASE("errors") {
    auto s = live_show(clock);
    const auto a = s.enqueue_line("ana", line("A")).id;
    s.next_line("ana");
    CHECK(kind_of([&] { s.skip_line("ana", a); }) == ErrorKind::State);
    CHECK(kind_of([&] { s.enqueue_line("cat", line("hi")); }) == ErrorKind::Role);
    CHECK(kind_of([&] { s.enqueue_line("eve", line("hi")); }) == ErrorKind::Role);
    CHECK(kind_of([&] { s.enqueue_line("nobody", line("hi")); }) == ErrorKind::Parameter);
    CHECK(kind_of([&] { s.enqueue_line("ana", line("")); }) == ErrorKind::Parameter);
    CHECK(kind_of([&] { s.next_line("cat"); }) == ErrorKind::Role);
    const auto b = s.enqueue_line("ben", line("B")).id;
    CHECK(kind_of([&] { s.skip_line("ana", b); }) == ErrorKind::Parameter);
  }
  SUBCASE("ending a scene skips what is still queued") {
    auto s = live_show(clock);
    s.enqueue_line("ana", line("A"));
    s.enqueue_line("ben", line("B"));
    s.next_line("ana");
    s.end_scene();
    auto c = s.counters();
    CHECK(c.enqueued == 2);
    CHECK(c.delivered == 1);
    CHECK(c.skipped == 1);
    CHECK(c.queued == 0);
    CHECK(kind_of([&] { s.enqueue_line("ana", line("late")); }) == ErrorKind::State);
  }
  SUBCASE("spoken acknowledgement") {
    auto s = live_show(clock);
    const auto a = s.enqueue_line("ana", line("A")).id;
    CHECK(kind_of([&] { s.acknowledge_spoken("ana", a); }) == ErrorKind::State);
    s.next_line("ana");
    clock.advance(500);
    CHECK(*s.acknowledge_spoken("ana", a).spoken_ack_at == 500);
    CHECK(kind_of([&] { s.acknowledge_spoken("ana", a); }) == ErrorKind::State);
  }
}

TEST_CASE("latency") {
  ManualClock clock;
  SUBCASE("no deliveries") {
    auto s = live_show(clock);
    auto stats = s.latency_stats();
    CHECK_FALSE(stats.median.has_value());
    CHECK(stats.per_utterance.empty());
  }
  SUBCASE("single delivery") {
    auto s = live_show(clock);
    clock.set(1000);
    s.enqueue_line("ana", line("A", 1000));
    clock.set(3000);
    s.next_line("ana");
    CHECK(*s.latency_stats().median == doctest::Approx(2.0));
  }
  SUBCASE("even count uses the midpoint") {
    auto s = live_show(clock);
    const std::vector<TimeMs> delays{1800, 2200, 2500, 4000};
    TimeMs t = 10000;
    for (TimeMs d : delays) {
      clock.set(t);
      s.enqueue_line("ana", line("context reply", t));
      clock.set(t + d);
      s.next_line("ana");
      t += 10000;
    }
    auto stats = s.latency_stats();
    CHECK(*stats.median == doctest::Approx(2.35).epsilon(1e-12));
    CHECK(*stats.max == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(stats.per_utterance.size() == 4);
  }
  CHECK(*median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(*median({4.0, 1.0}) == 2.5);
}

TEST_CASE("voting") {
  ManualClock clock;
  auto s = fixtures::standard_show(clock);
  s.go_live();
  CHECK(kind_of([&] { s.submit_vote("t1", {{"ana", RoleKind::Cyborg}}); }) == ErrorKind::State);
  s.open_voting();

  SUBCASE("perfect ballot") {
    s.submit_vote("t1", {{"ana", RoleKind::Cyborg},
                         {"ben", RoleKind::Puppet},
                         {"cat", RoleKind::FreeWill},
                         {"dev", RoleKind::FreeWill}});
    auto t = s.tally_votes();
    CHECK(t.ballots == 1);
    CHECK(t.accuracy.at(RoleKind::Cyborg) == 1.0);
    CHECK(t.accuracy.at(RoleKind::Puppet) == 1.0);
    CHECK(t.accuracy.at(RoleKind::FreeWill) == 1.0);
  }
  SUBCASE("rejections") {
    s.submit_vote("t1", {{"ana", RoleKind::Puppet}});
    CHECK(kind_of([&] { s.submit_vote("t1", {{"ana", RoleKind::Cyborg}}); }) == ErrorKind::State);
    CHECK(kind_of([&] { s.submit_vote("t2", {{"eve", RoleKind::Cyborg}}); }) == ErrorKind::Parameter);
    CHECK(kind_of([&] { s.submit_vote("t3", {{"zed", RoleKind::Cyborg}}); }) == ErrorKind::Parameter);
    CHECK(kind_of([&] { s.submit_vote("t4", {{"ana", RoleKind::CeoController}}); }) == ErrorKind::Parameter);
    CHECK(s.votes().size() == 1);
  }
  SUBCASE("tally ignores ballot order") {
    std::vector<event::VoteSubmitted> ballots;
    std::mt19937 rng(3);
    const std::vector<RoleKind> guesses{RoleKind::Cyborg, RoleKind::Puppet, RoleKind::FreeWill};
    for (int i = 0; i < 40; ++i) {
      Ballot b;
      for (const char* p : {"ana", "ben", "cat", "dev"}) {
        if (rng() % 4) b[p] = guesses[rng() % 3];
      }
      if (b.empty()) b["ana"] = RoleKind::Cyborg;
      ballots.push_back({"t" + std::to_string(i), b});
    }
    const auto reference = tally(s.roster(), ballots);
    for (int rep = 0; rep < 20; ++rep) {
      std::shuffle(ballots.begin(), ballots.end(), rng);
      CHECK(tally(s.roster(), ballots) == reference);
    }
    for (const auto& [performer, counts] : reference.counts) {
      int sum = 0, mentions = 0;
      for (const auto& [k, n] : counts) sum += n;
      for (const auto& b : ballots) mentions += b.ballot.count(performer) ? 1 : 0;
      CHECK(sum == mentions);
    }
    for (const auto& [k, a] : reference.accuracy) {
      CHECK(a >= 0.0);
      CHECK(a <= 1.0);
    }
  }
}

TEST_CASE("six-show fixture: Free-will Human taken for the Cyborg twice") {
  std::ifstream in(IMPROV_DATA_DIR "/fixtures/six_shows.json");
  const auto doc = nlohmann::json::parse(in);
  std::vector<std::pair<std::map<std::string, Role>, VoteTally>> shows;
  for (const auto& show : doc.at("shows")) {
    ShowSession s(SessionConfig{}, [] { return TimeMs{0}; });
    for (const auto& r : show.at("roster")) {
      s.assign_role(r.at("performer"), *parse_role(r.at("role").get<std::string>()));
    }
    s.go_live();
    s.open_voting();
    for (const auto& b : show.at("ballots")) {
      Ballot ballot;
      for (const auto& [p, g] : b.at("ballot").items()) ballot[p] = *parse_role(g.get<std::string>());
      s.submit_vote(b.at("token"), ballot);
    }
    shows.emplace_back(s.roster(), s.tally_votes());
  }
  REQUIRE(shows.size() == 6);
  CHECK(misidentification_rate(shows, RoleKind::FreeWill, RoleKind::Cyborg) == doctest::Approx(2.0 / 6.0));
}

TEST_CASE("export and replay") {
  ManualClock clock;
  auto s = fixtures::standard_show(clock);
  s.go_live();
  clock.set(100);
  s.start_scene("a pirate ship");
  clock.set(200);
  s.enqueue_line("ana", line("Hoist the sail!", 150));
  s.enqueue_line("ben", line("Aye, captain.", 200, false, Source::PuppetMaster));
  s.enqueue_line("ana", line("We need rum.", 180));
  const auto skipped = s.enqueue_line("ana", line("Outdated line", 190)).id;
  clock.set(2500);
  s.next_line("ana");
  s.next_line("ben");
  s.skip_line("ana", skipped);
  clock.set(4000);
  s.next_line("ana");
  s.acknowledge_spoken("ana", "u1");
  clock.set(200000);
  s.end_scene();
  CHECK(kind_of([&] { export_transcript(s); }) == ErrorKind::State);
  s.open_voting();
  s.submit_vote("seat-1", {{"ana", RoleKind::Cyborg}, {"cat", RoleKind::Puppet}});

  const auto doc = export_transcript(s);
  CHECK(doc.at("scenes").at(0).at("utterances").size() == 3);
  CHECK(s.event_log().size() == 20);
  CHECK(doc.at("manifest").at("line_counts").at("AI") == 2);
  CHECK(doc.at("manifest").at("line_counts").at("PUPPET_MASTER") == 1);

  const std::string first = export_transcript_text(s);
  auto replayed = replay_transcript(parse_transcript(first));
  CHECK(export_transcript_text(replayed) == first);
  CHECK(replayed.latency_stats().per_utterance == s.latency_stats().per_utterance);
  CHECK(replayed.tally_votes() == s.tally_votes());
  CHECK(first.find("Outdated line") == std::string::npos);

  s.close();
  const std::string closed = export_transcript_text(s);
  CHECK(export_transcript_text(replay_transcript(parse_transcript(closed))) == closed);
}

TEST_CASE("malformed transcripts") {
  SUBCASE("syntax error carries the line number") {
    try {
      parse_transcript("{\n  \"a\": 1,\n  \"b\": ]\n}");
      FAIL("expected a data error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Data);
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
  }
  SUBCASE("manifest mismatch") {
    ManualClock clock;
    auto s = live_show(clock);
    s.enqueue_line("ana", line("A"));
    s.next_line("ana");
    s.end_scene();
    s.open_voting();
    auto doc = export_transcript(s);
    doc["manifest"]["line_counts"]["AI"] = 5;
    CHECK(kind_of([&] { replay_transcript(doc); }) == ErrorKind::Data);
    doc = export_transcript(s);
    doc["scenes"][0].erase("utterances");
    CHECK(kind_of([&] { replay_transcript(doc); }) == ErrorKind::Data);
  }
}

TEST_CASE("event log serialisation and replay") {
  ManualClock clock;
  auto s = live_show(clock);
  clock.set(50);
  s.enqueue_line("ana", line("A", 10));
  s.enqueue_line("ana", line("B", 20, true));
  clock.set(70);
  s.next_line("ana");
  s.skip_line("ana", "u1");
  s.end_scene();
  s.open_voting();
  s.submit_vote("x", {{"ben", RoleKind::Cyborg}});

  std::vector<Event> parsed;
  for (const auto& e : s.event_log()) parsed.push_back(event_from_json(to_json(e)));
  auto copy = ShowSession::replay(s.config(), parsed);
  CHECK(copy.utterances() == s.utterances());
  CHECK(copy.scenes() == s.scenes());
  CHECK(copy.tally_votes() == s.tally_votes());
  CHECK(copy.state() == s.state());
  for (std::size_t i = 0; i < parsed.size(); ++i) CHECK(to_json(copy.event_log()[i]) == to_json(s.event_log()[i]));

  auto broken = parsed;
  broken.erase(broken.begin() + 6);
  CHECK_THROWS_AS(ShowSession::replay(s.config(), broken), Error);
}
