#pragma once

#include <osnma/bitgrid.hpp>
#include <osnma/dsm.hpp>
#include <osnma/sigscheme.hpp>
#include <osnma/tesla.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace osnma::sim {

enum class AdversaryKind : uint8_t {
   None,
   DataSpoofer,
   TagBruteForcer,
   QuantumForger,
};

std::string_view to_string(AdversaryKind a);

/**
 * Flat key=value scenario. Time is counted in subframes (30 s). The run
 * starts start_offset_subframes into the second TESLA chain so that the
 * previous chain always exists for boundary disclosures.
 */
struct ScenarioConfig {
      uint32_t duration_subframes = 200;
      unsigned satellites = 4;
      uint64_t seed = 1;
      uint32_t week = 1200;

      tesla::TeslaParams tesla{};  // chain_id, chain_length and start_time are set per chain
      uint32_t delay = 1;

      uint32_t chain_renewal_subframes = 240;
      uint32_t pkr_period_subframes = 720;
      uint32_t pkr_window_subframes = 60;
      uint32_t start_offset_subframes = 60;

      double page_loss = 0.0;

      AdversaryKind adversary = AdversaryKind::None;
      uint32_t adversary_attempts = 0;
      uint32_t adversary_start_subframe = 0;

      uint8_t npkt = sig::kNpktEcdsaP256;
      std::map<uint8_t, std::string> npkt_map;
      bool extended_bid = false;

      bool receiver_merkle_root = true;
      bool receiver_public_key = true;

      /// Throws ConfigInvalid.
      void validate() const;
      dsm::BidMode bid_mode() const { return extended_bid ? dsm::BidMode::Extended : dsm::BidMode::Nominal; }
      sig::NpktRegistry registry() const;
      dsm::CodeTables code_tables() const;
};

/// Throws ConfigInvalid on unknown keys or bad values.
ScenarioConfig parse_scenario(std::istream& in);
ScenarioConfig load_scenario(const std::filesystem::path& path);
void write_scenario(std::ostream& out, const ScenarioConfig& cfg);

enum class Phase : uint8_t {
   ColdStart,
   HaveMerkleRoot,
   HavePublicKey,
   HaveKroot,
   Authenticating,
};

std::string_view to_string(Phase p);

struct EventRecord {
      uint64_t gst_s = 0;  // total GST seconds
      std::string actor;
      std::string kind;
      std::string digest;
      std::string verdict;

      // Audit fields, not part of the text export.
      int64_t tag_gst_s = -1;
      int anchor = -1;
      uint32_t key_index = 0;
};

class EventLog {
   public:
      void add(EventRecord r) { m_records.push_back(std::move(r)); }
      const std::vector<EventRecord>& records() const { return m_records; }
      bool empty() const { return m_records.empty(); }

      /// One record per line: gst, actor, kind, digest, verdict separated by tabs.
      void write_tsv(std::ostream& out) const;

   private:
      std::vector<EventRecord> m_records;
};

std::string format_gst(uint64_t gst_s);

struct Summary {
      uint64_t seed = 0;
      uint64_t subframes_total = 0;
      uint64_t subframes_complete = 0;
      uint64_t tags_authentic = 0;
      uint64_t tags_forged = 0;
      uint64_t key_unverified = 0;
      uint64_t tags_pending = 0;
      uint64_t forged_authentic = 0;
      uint64_t spoof_detected = 0;
      uint64_t false_forged = 0;
      std::optional<uint64_t> ttfa_subframes;
      uint64_t eligible_subframes = 0;
      uint64_t authenticated_subframes = 0;
      uint64_t kroot_accepted = 0;
      uint64_t kroot_rejected = 0;
      uint64_t kroot_forged_accepted = 0;
      uint64_t pkr_accepted = 0;
      uint64_t pkr_rejected = 0;
      uint64_t pkr_forged_accepted = 0;
      Phase final_phase = Phase::ColdStart;

      double auth_rate() const {
         return eligible_subframes == 0 ? 1.0
                                        : static_cast<double>(authenticated_subframes) /
                                             static_cast<double>(eligible_subframes);
      }

      std::vector<std::pair<std::string, std::string>> fields() const;
};

/// Header row of metric names then one row per summary.
void write_summary_csv(std::ostream& out, std::span<const Summary> rows);

struct RunResult {
      EventLog log;
      Summary summary;
};

/// Deterministic given the config (seed included). Throws ConfigInvalid.
RunResult run(const ScenarioConfig& cfg);

struct AuditReport {
      bool ok = true;
      std::vector<std::string> violations;
};

/// Safety and delay discipline over a finished log.
AuditReport audit(const EventLog& log, uint32_t delay);

// ---------------------------------------------------------------- building blocks

/// Uniform draw against p using 53 random bits.
bool bernoulli(std::mt19937_64& rng, double p);
uint64_t random_bits(std::mt19937_64& rng, unsigned width);

/// One satellite's broadcast in one subframe, as it leaves the antenna.
struct SimSubframe {
      uint8_t prn = 0;
      uint64_t gst_s = 0;
      bitgrid::SubframePages pages{};
      std::map<uint8_t, Bytes> nav;       // ADKD -> payload
      std::map<uint8_t, bool> nav_genuine;  // ground truth, never read by the receiver
      std::string origin = "genuine";
};

/// Payload bytes the broadcaster authenticates for (prn, adkd) at a subframe.
Bytes nav_payload(uint64_t seed, uint8_t prn, uint8_t adkd, uint64_t gst_s);
/// GST(32) || PRN || payload.
Bytes tag_data(uint64_t gst_s, uint8_t prn, std::span<const uint8_t> payload);

/// Alters the ephemeris payload and leaves the tags alone.
SimSubframe adversary_data_spoof(const SimSubframe& genuine, std::mt19937_64& rng);

struct BruteForceOutcome {
      bool success = false;
      uint32_t attempts_used = 0;
};

/// Up to k random tag guesses for forged data; success when the receiver's
/// recomputation under the later-disclosed key accepts one.
BruteForceOutcome adversary_brute_force(const tesla::TeslaParams& params,
                                        const tesla::TeslaKey& key,
                                        std::span<const uint8_t> forged_data,
                                        tesla::TagInfo info,
                                        uint32_t k,
                                        std::mt19937_64& rng);

}  // namespace osnma::sim
