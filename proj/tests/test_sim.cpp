#include <doctest.h>

#include <osnma/error.hpp>
#include <osnma/sim.hpp>

#include <cmath>
#include <filesystem>
#include <sstream>

using namespace osnma;
using namespace osnma::sim;

namespace {

std::string tsv(const EventLog& log) {
   std::ostringstream out;
   log.write_tsv(out);
   return out.str();
}

ScenarioConfig parse(const std::string& text) {
   std::istringstream in(text);
   return parse_scenario(in);
}

ErrorCode code_of(auto&& fn) {
   try {
      fn();
   } catch(const Error& e) {
      return e.code();
   }
   FAIL("expected an osnma::Error");
   return ErrorCode::Overflow;
}

std::filesystem::path scenario(const char* name) {
   return std::filesystem::path(OSNMA_TEST_SCENARIOS) / name;
}

}  // namespace

TEST_CASE("scenario files") {
   const auto cfg = parse("# comment\nduration_subframes=50\nsatellites=3\ntesla.lk=192\nadversary=spoofer\n"
                          "npkt_map=7:Falcon-512\n");
   CHECK(cfg.duration_subframes == 50);
   CHECK(cfg.satellites == 3);
   CHECK(cfg.tesla.key_bits == 192);
   CHECK(cfg.adversary == AdversaryKind::DataSpoofer);
   CHECK(cfg.npkt_map.at(7) == "Falcon-512");
   std::ostringstream out;
   write_scenario(out, cfg);
   CHECK(tsv(run(parse(out.str())).log) == tsv(run(cfg).log));

   CHECK(code_of([] { parse("colour=blue\n"); }) == ErrorCode::ConfigInvalid);
   CHECK(code_of([] { parse("satellites=0\n"); }) == ErrorCode::ConfigInvalid);
   CHECK(code_of([] { parse("page_loss=1.5\n"); }) == ErrorCode::ConfigInvalid);
   CHECK(code_of([] { parse("chain_renewal_subframes=130\n"); }) == ErrorCode::ConfigInvalid);
   CHECK(code_of([] { parse("npkt=7\n"); }) == ErrorCode::ConfigInvalid);
   CHECK(code_of([] { parse("npkt=7\nnpkt_map=7:Falcon-512\n"); }) == ErrorCode::ConfigInvalid);
   CHECK(code_of([] { load_scenario("/nonexistent.scenario"); }) == ErrorCode::ConfigInvalid);
   for(const char* name : {"nominal.scenario", "coldstart.scenario", "loss20.scenario", "spoof.scenario",
                           "bruteforce.scenario", "quantum-ec.scenario", "quantum-pqc.scenario"}) {
      CHECK_NOTHROW(load_scenario(scenario(name)));
   }
}

TEST_CASE("nominal run") {
   const auto cfg = load_scenario(scenario("nominal.scenario"));
   const auto a = run(cfg);
   const auto b = run(cfg);
   CHECK(tsv(a.log) == tsv(b.log));
   const auto& s = a.summary;
   CHECK(s.tags_forged == 0);
   CHECK(s.forged_authentic == 0);
   CHECK(s.tags_authentic > 0);
   CHECK(s.eligible_subframes > 0);
   CHECK(s.authenticated_subframes == s.eligible_subframes);
   CHECK(s.ttfa_subframes.has_value());
   CHECK(s.final_phase == Phase::Authenticating);
   CHECK(audit(a.log, cfg.delay).ok);

   auto other = cfg;
   other.seed = 2;
   CHECK(tsv(run(other).log) != tsv(a.log));
}

TEST_CASE("degenerate runs") {
   ScenarioConfig cfg;
   cfg.duration_subframes = 0;
   const auto r = run(cfg);
   CHECK(r.summary.subframes_total == 0);
   CHECK(r.summary.tags_authentic == 0);
   CHECK_FALSE(r.summary.ttfa_subframes.has_value());

   // No trust anchor at all: the receiver never leaves cold start.
   ScenarioConfig cold;
   cold.duration_subframes = 150;
   cold.receiver_merkle_root = false;
   cold.receiver_public_key = false;
   const auto c = run(cold);
   CHECK(c.summary.final_phase == Phase::ColdStart);
   CHECK(c.summary.tags_authentic == 0);
   CHECK(c.summary.kroot_accepted == 0);
   CHECK_FALSE(c.summary.ttfa_subframes.has_value());
   CHECK(audit(c.log, cold.delay).ok);
}

TEST_CASE("cold start through a DSM-PKR window") {
   const auto cfg = load_scenario(scenario("coldstart.scenario"));
   const auto r = run(cfg);
   CHECK(r.summary.pkr_accepted == 1);
   CHECK(r.summary.pkr_rejected == 0);
   CHECK(r.summary.kroot_accepted >= 1);
   CHECK(r.summary.ttfa_subframes.has_value());
   CHECK(r.summary.authenticated_subframes == r.summary.eligible_subframes);
   CHECK(audit(r.log, cfg.delay).ok);
}

TEST_CASE("slow MAC delay") {
   auto cfg = load_scenario(scenario("nominal.scenario"));
   cfg.delay = 10;
   const auto r = run(cfg);
   CHECK(r.summary.tags_authentic > 0);
   CHECK(r.summary.tags_forged == 0);
   CHECK(*r.summary.ttfa_subframes >= 10);
   CHECK(audit(r.log, cfg.delay).ok);
}

TEST_CASE("data spoofing is detected") {
   const auto cfg = load_scenario(scenario("spoof.scenario"));
   const auto r = run(cfg);
   CHECK(r.summary.spoof_detected > 0);
   CHECK(r.summary.forged_authentic == 0);
   CHECK(r.summary.false_forged == 0);
   CHECK(audit(r.log, cfg.delay).ok);
}

TEST_CASE("loss tolerance over 100 seeds") {
   auto cfg = load_scenario(scenario("loss20.scenario"));
   cfg.duration_subframes = 360;
   for(uint64_t seed = 1; seed <= 100; ++seed) {
      CAPTURE(seed);
      cfg.seed = seed;
      const auto r = run(cfg);
      CHECK(r.summary.ttfa_subframes.has_value());
      CHECK(r.summary.authenticated_subframes == r.summary.eligible_subframes);
      CHECK(r.summary.forged_authentic == 0);
   }
}

TEST_CASE("randomness helpers") {
   std::mt19937_64 rng(3);
   int hits = 0;
   for(int i = 0; i < 100000; ++i) {
      hits += bernoulli(rng, 0.25);
   }
   CHECK(std::abs(hits - 25000) < 5 * std::sqrt(100000 * 0.25 * 0.75));
   for(int i = 0; i < 1000; ++i) {
      CHECK(random_bits(rng, 10) < 1024);
   }
   CHECK(tag_data(0x0102030405ULL, 7, Bytes{9}).size() == 6);
   CHECK(nav_payload(1, 1, 0, 100) == nav_payload(1, 1, 0, 100));
   CHECK(nav_payload(1, 1, 0, 100) != nav_payload(1, 2, 0, 100));
}

TEST_CASE("brute force against a 10-bit tag") {
   tesla::TeslaParams p;
   p.tag_bits = 10;
   p.scaled = true;
   p.chain_length = 4;
   const auto chain = tesla::TeslaChain::generate(p, bitgrid::BitString(128));
   std::mt19937_64 rng(11);
   const Bytes forged = {1, 2, 3};
   const auto full = adversary_brute_force(p, chain.key_at(2), forged, {1, 0, 0}, 1u << 14, rng);
   CHECK(full.success);
   CHECK(full.attempts_used <= (1u << 14));
   const auto none = adversary_brute_force(p, chain.key_at(2), forged, {1, 0, 0}, 0, rng);
   CHECK_FALSE(none.success);
   CHECK(none.attempts_used == 0);
}

TEST_CASE("quantum adversary and PQC migration") {
   const auto ec = run(load_scenario(scenario("quantum-ec.scenario")));
   CHECK(ec.summary.forged_authentic >= 1);
   CHECK(ec.summary.kroot_forged_accepted >= 1);
   CHECK(ec.summary.pkr_forged_accepted == 0);
   const auto pq = run(load_scenario(scenario("quantum-pqc.scenario")));
   CHECK(pq.summary.forged_authentic == 0);
   CHECK(pq.summary.kroot_forged_accepted == 0);
   CHECK(pq.summary.kroot_rejected >= 1);
   CHECK(pq.summary.pkr_forged_accepted == 0);
   CHECK(audit(pq.log, 1).ok);
}
