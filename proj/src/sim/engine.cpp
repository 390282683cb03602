#include <osnma/sim.hpp>

#include <osnma/crypto.hpp>
#include <osnma/error.hpp>

#include <algorithm>
#include <memory>
#include <set>

namespace osnma::sim {

namespace {

using bitgrid::BitString;
using bitgrid::GstTime;

constexpr uint32_t kEocSubframes = 10;
constexpr uint8_t kPkrDsmId = dsm::kFirstPkrDsmId;
constexpr uint32_t kMaxBridge = 20000;

Bytes be64(uint64_t v) {
   Bytes out(8);
   for(int i = 0; i < 8; ++i) {
      out[static_cast<size_t>(i)] = static_cast<uint8_t>(v >> (56 - 8 * i));
   }
   return out;
}

Bytes seed_bytes(uint64_t seed, uint64_t a, uint64_t b = 0) {
   Bytes s = be64(seed);
   const Bytes x = be64(a);
   const Bytes y = be64(b);
   s.insert(s.end(), x.begin(), x.end());
   s.insert(s.end(), y.begin(), y.end());
   return s;
}

std::mt19937_64 make_rng(uint64_t seed, std::string_view label) {
   const Bytes h = crypto::expand(label, be64(seed), 8);
   uint64_t v = 0;
   for(uint8_t b : h) {
      v = (v << 8) | b;
   }
   return std::mt19937_64(v);
}

SimSubframe pack_subframe(uint8_t prn,
                          uint64_t gst_s,
                          const dsm::HkrootMessage& hk,
                          dsm::BidMode mode,
                          const BitString& mack) {
   bitgrid::SubframePayload p;
   p.hkroot = dsm::serialize_hkroot(hk, mode);
   p.mack = mack;
   SimSubframe sf;
   sf.prn = prn;
   sf.gst_s = gst_s;
   sf.pages = bitgrid::disassemble_subframe(p);
   return sf;
}

// Tag list for one satellite and subframe: tag0 plus n_t - 1 entries.
struct TagPlan {
      tesla::TagInfo info0;
      std::vector<tesla::TagInfo> entries;
};

TagPlan plan_tags(uint8_t prn, const dsm::MacltEntry& maclt, unsigned nt) {
   TagPlan p;
   p.info0 = {prn, maclt.adkds.front(), 0};
   for(unsigned k = 1; k < nt; ++k) {
      p.entries.push_back({prn, maclt.adkds[k % maclt.adkds.size()], static_cast<uint8_t>(k & 0x0F)});
   }
   return p;
}

BitString make_mack_bits(const tesla::TeslaParams& params,
                         const tesla::TeslaKey& tag_key,
                         const BitString& disclosed,
                         uint64_t gst_s,
                         uint8_t prn,
                         const TagPlan& plan,
                         const std::map<uint8_t, Bytes>& nav) {
   tesla::MackMessage m;
   m.tag0 = tesla::make_tag(params, tag_key, tag_data(gst_s, prn, nav.at(plan.info0.adkd)), plan.info0).bits;
   for(const auto& info : plan.entries) {
      m.tags.push_back(tesla::make_tag(params, tag_key, tag_data(gst_s, prn, nav.at(info.adkd)), info));
   }
   m.macseq = tesla::compute_macseq(params, tag_key.bits, GstTime::from_total_seconds(gst_s), prn, m.tags);
   m.key = disclosed;
   return tesla::serialize_mack(m, params);
}

// ---------------------------------------------------------------- broadcaster

class Broadcaster {
   public:
      explicit Broadcaster(const ScenarioConfig& cfg) :
            m_cfg(cfg),
            m_registry(cfg.registry()),
            m_codes(cfg.code_tables()),
            m_mode(cfg.bid_mode()),
            m_maclt(dsm::lookup_maclt(dsm::maclt_for_delay(cfg.delay))),
            m_period(cfg.chain_renewal_subframes) {
         m_provider = m_registry.lookup(cfg.npkt);
         std::vector<dsm::MerkleLeaf> leaves;
         for(unsigned j = 0; j < dsm::kMerkleLeaves; ++j) {
            m_keys.push_back(m_provider->keygen(seed_bytes(cfg.seed, 0x6c656166, j)));
            leaves.push_back({cfg.npkt, m_keys.back().public_key});
         }
         m_tree = dsm::MerkleTree::build(leaves);
         const auto pkr = dsm::build_dsm_pkr(m_keys[0].public_key, cfg.npkt, 0, m_tree, m_mode);
         m_pkr_blocks = dsm::segment(dsm::serialize_dsm_pkr(pkr), m_mode);
         const auto kroot_bits = dsm::kroot_length(cfg.tesla.key_bits, m_provider->sig_bits());
         const unsigned kroot_blocks = *dsm::blocks_for(kroot_bits, m_mode);
         m_lead = std::min<uint32_t>(m_period / 2, std::max<uint32_t>(30, 2 * kroot_blocks));
         auto alpha_rng = make_rng(cfg.seed, "alpha");
         m_alpha = random_bits(alpha_rng, 48);
      }

      uint64_t gst(uint64_t g) const { return uint64_t{m_cfg.week} * bitgrid::kSecondsPerWeek + g * 30; }
      uint32_t period() const { return m_period; }
      const dsm::MerkleTree& tree() const { return m_tree; }
      const sig::KeyPair& active_key() const { return m_keys[0]; }
      const sig::ProviderPtr& provider() const { return m_provider; }
      const dsm::MacltEntry& maclt() const { return m_maclt; }

      const tesla::TeslaChain& chain(uint64_t c) {
         auto it = m_chains.find(c);
         if(it != m_chains.end()) {
            return it->second;
         }
         tesla::TeslaParams p = m_cfg.tesla;
         p.chain_id = static_cast<uint8_t>(c % 4);
         p.chain_length = m_period;
         p.start_time = GstTime::from_total_seconds(gst(c * m_period));
         const Bytes seed = crypto::expand("osnma-chain-seed", seed_bytes(m_cfg.seed, c), p.key_bits / 8);
         return m_chains.emplace(c, tesla::TeslaChain::generate(p, BitString::from_bytes(seed))).first->second;
      }

      bool is_genuine_root(const BitString& root) const {
         for(const auto& [c, ch] : m_chains) {
            if(ch.root_key() == root) {
               return true;
            }
         }
         return false;
      }

      dsm::NmaHeader header(uint64_t g) const {
         dsm::NmaHeader h;
         h.cid = static_cast<uint8_t>((g / m_period) % 4);
         h.cpks = (g % m_period) < kEocSubframes ? dsm::Cpks::EndOfChain : dsm::Cpks::Nominal;
         return h;
      }

      SimSubframe emit(unsigned sat, uint64_t g) {
         const uint8_t prn = static_cast<uint8_t>(sat + 1);
         const uint64_t c = g / m_period;
         const uint32_t r = static_cast<uint32_t>(g % m_period);
         const uint64_t now = gst(g);

         dsm::HkrootMessage hk;
         hk.header = header(g);
         if(g % m_cfg.pkr_period_subframes < m_cfg.pkr_window_subframes) {
            hk.dsm_id = kPkrDsmId;
            hk.bid = static_cast<uint16_t>((g + sat) % m_pkr_blocks.size());
            hk.block = m_pkr_blocks[hk.bid];
         } else {
            const uint64_t kc = r >= m_period - m_lead ? c + 1 : c;
            const auto& blocks = kroot_blocks(kc, hk.header);
            hk.dsm_id = static_cast<uint8_t>(kc % 4);
            hk.bid = static_cast<uint16_t>((g + sat) % blocks.size());
            hk.block = blocks[hk.bid];
         }

         std::map<uint8_t, Bytes> nav;
         for(uint8_t adkd : m_maclt.adkds) {
            nav[adkd] = nav_payload(m_cfg.seed, prn, adkd, now);
         }
         const auto& ch = chain(c);
         const uint64_t gd = g - m_cfg.delay;
         const auto& dch = chain(gd / m_period);
         const BitString disclosed = dch.key(static_cast<uint32_t>(gd % m_period) + 1);
         const TagPlan plan = plan_tags(prn, m_maclt, ch.params().tags_per_mack());
         const BitString mack = make_mack_bits(ch.params(), ch.key_at(r + 1), disclosed, now, prn, plan, nav);

         SimSubframe sf = pack_subframe(prn, now, hk, m_mode, mack);
         sf.nav = nav;
         for(const auto& [adkd, p] : nav) {
            sf.nav_genuine[adkd] = true;
         }
         return sf;
      }

   private:
      const std::vector<BitString>& kroot_blocks(uint64_t kc, const dsm::NmaHeader& h) {
         const auto key = std::make_pair(kc, h.encode());
         auto it = m_kroot_cache.find(key);
         if(it != m_kroot_cache.end()) {
            return it->second;
         }
         dsm::KrootFields f;
         f.header = h;
         f.pkid = 0;
         f.maclt = dsm::maclt_for_delay(m_cfg.delay);
         f.alpha = m_alpha;
         const auto k = dsm::build_dsm_kroot(chain(kc), *m_provider, m_keys[0].private_key, f, m_mode, m_codes);
         return m_kroot_cache.emplace(key, dsm::segment(dsm::serialize_dsm_kroot(k, m_codes), m_mode)).first->second;
      }

      const ScenarioConfig& m_cfg;
      sig::NpktRegistry m_registry;
      dsm::CodeTables m_codes;
      dsm::BidMode m_mode;
      dsm::MacltEntry m_maclt;
      uint32_t m_period;
      uint32_t m_lead = 30;
      uint64_t m_alpha = 0;
      sig::ProviderPtr m_provider;
      std::vector<sig::KeyPair> m_keys;
      dsm::MerkleTree m_tree;
      std::vector<BitString> m_pkr_blocks;
      std::map<uint64_t, tesla::TeslaChain> m_chains;
      std::map<std::pair<uint64_t, uint8_t>, std::vector<BitString>> m_kroot_cache;
};

// ---------------------------------------------------------------- quantum forger

// Holds the EC private key (as if recovered from the public key); against
// any other scheme it can only sign with a key pair of its own.
class QuantumForger {
   public:
      QuantumForger(const ScenarioConfig& cfg, Broadcaster& bc, uint64_t first_g, uint64_t last_g) :
            m_cfg(cfg), m_mode(cfg.bid_mode()), m_codes(cfg.code_tables()), m_bc(bc) {
         const auto& provider = bc.provider();
         const bool shor_applies = provider->characterization().family == sig::Family::EllipticCurve;
         const sig::KeyPair own = provider->keygen(seed_bytes(cfg.seed, 0x616476));
         m_signing_key = shor_applies ? bc.active_key().private_key : own.private_key;
         m_steals_key = shor_applies;

         const uint64_t P = bc.period();
         const uint64_t genuine_c = first_g / P;
         m_start_g = ((first_g - cfg.delay) / 120) * 120;
         tesla::TeslaParams p = cfg.tesla;
         p.chain_id = static_cast<uint8_t>((genuine_c + 1) % 4);
         p.chain_length = static_cast<uint32_t>(last_g - m_start_g + 2);
         p.start_time = GstTime::from_total_seconds(bc.gst(m_start_g));
         const Bytes seed = crypto::expand("osnma-forged-chain", seed_bytes(cfg.seed, first_g), p.key_bits / 8);
         m_chain = std::make_unique<tesla::TeslaChain>(tesla::TeslaChain::generate(p, BitString::from_bytes(seed)));

         m_header.cid = p.chain_id;
         m_header.cpks = dsm::Cpks::ChainRevoked;
         dsm::KrootFields f;
         f.header = m_header;
         f.pkid = 0;
         f.maclt = dsm::maclt_for_delay(cfg.delay);
         f.alpha = 0x0000DEADBEEF;
         const auto k = dsm::build_dsm_kroot(*m_chain, *provider, m_signing_key, f, m_mode, m_codes);
         m_kroot_blocks = dsm::segment(dsm::serialize_dsm_kroot(k, m_codes), m_mode);

         // A public key of its own, dressed with a path it cannot make consistent with the honest root.
         dsm::DsmPkr pkr;
         pkr.npkt = cfg.npkt;
         pkr.npkid = 0;
         pkr.npk = own.public_key;
         auto rng = make_rng(cfg.seed, "forged-path");
         for(auto& node : pkr.path) {
            for(auto& b : node) {
               b = static_cast<uint8_t>(rng());
            }
         }
         pkr.nb = static_cast<uint8_t>(*dsm::blocks_for(dsm::pkr_length(pkr.npk.size() * 8), m_mode) - 1);
         m_pkr_blocks = dsm::segment(dsm::serialize_dsm_pkr(pkr), m_mode);
         m_maclt = dsm::lookup_maclt(f.maclt);
      }

      bool steals_key() const { return m_steals_key; }
      const BitString& fake_root() const { return m_chain->root_key(); }

      SimSubframe emit(unsigned sat, uint64_t g) {
         const uint8_t prn = static_cast<uint8_t>(sat + 1);
         const uint64_t now = m_bc.gst(g);
         dsm::HkrootMessage hk;
         hk.header = m_header;
         if((g + sat) % 2 == 0) {
            hk.dsm_id = m_header.cid;
            hk.bid = static_cast<uint16_t>((g / 2 + sat) % m_kroot_blocks.size());
            hk.block = m_kroot_blocks[hk.bid];
         } else {
            hk.dsm_id = kPkrDsmId;
            hk.bid = static_cast<uint16_t>((g / 2 + sat) % m_pkr_blocks.size());
            hk.block = m_pkr_blocks[hk.bid];
         }
         std::map<uint8_t, Bytes> nav;
         for(uint8_t adkd : m_maclt.adkds) {
            nav[adkd] = nav_payload(m_cfg.seed ^ 0xF0F0F0F0F0F0F0F0ULL, prn, adkd, now);
         }
         const uint32_t i = static_cast<uint32_t>(g - m_start_g) + 1;
         const TagPlan plan = plan_tags(prn, m_maclt, m_chain->params().tags_per_mack());
         const BitString mack =
            make_mack_bits(m_chain->params(), m_chain->key_at(i), m_chain->key(i - m_cfg.delay), now, prn, plan, nav);
         SimSubframe sf = pack_subframe(prn, now, hk, m_mode, mack);
         sf.nav = nav;
         for(const auto& [adkd, p] : nav) {
            sf.nav_genuine[adkd] = false;
         }
         sf.origin = "quantum";
         return sf;
      }

   private:
      const ScenarioConfig& m_cfg;
      dsm::BidMode m_mode;
      dsm::CodeTables m_codes;
      Broadcaster& m_bc;
      Bytes m_signing_key;
      bool m_steals_key = false;
      uint64_t m_start_g = 0;
      std::unique_ptr<tesla::TeslaChain> m_chain;
      dsm::NmaHeader m_header;
      dsm::MacltEntry m_maclt;
      std::vector<BitString> m_kroot_blocks;
      std::vector<BitString> m_pkr_blocks;
};

// ---------------------------------------------------------------- receiver

struct SubStatus {
      uint64_t tags = 0;
      uint64_t authentic = 0;
};

class Receiver {
   public:
      Receiver(const ScenarioConfig& cfg, EventLog& log, const Broadcaster& bc, Summary& summary) :
            m_cfg(cfg),
            m_registry(cfg.registry()),
            m_codes(cfg.code_tables()),
            m_mode(cfg.bid_mode()),
            m_log(log),
            m_bc(bc),
            m_sum(summary) {}

      void install(uint64_t now) {
         if(m_cfg.receiver_merkle_root) {
            m_root = m_bc.tree().root();
            set_phase(Phase::HaveMerkleRoot, now);
         }
         if(m_cfg.receiver_public_key) {
            m_keys[0] = {m_cfg.npkt, m_bc.active_key().public_key};
            set_phase(Phase::HavePublicKey, now);
         }
      }

      Phase phase() const { return m_phase; }
      const std::map<uint64_t, SubStatus>& statuses() const { return m_status; }
      std::optional<uint64_t> first_auth_gst() const { return m_first_auth; }
      bool accepted_root(const BitString& root) const { return m_accepted_roots.count(root.to_hex()) > 0; }

      uint64_t pending_tags() const {
         uint64_t n = 0;
         for(const auto& [t, recs] : m_pending) {
            for(const auto& r : recs) {
               if(!r.done) {
                  n += r.tags.size();
               }
            }
         }
         for(const auto& raw : m_raw) {
            n += raw.tag_count;
         }
         return n;
      }

      void receive(const SimSubframe& sf, uint64_t sub_id) {
         const uint64_t now = sf.gst_s;
         const auto payload = bitgrid::assemble_subframe(sf.pages);
         dsm::HkrootMessage hk;
         try {
            hk = dsm::parse_hkroot(payload.hkroot, m_mode);
         } catch(const Error&) {
            m_log.add({now, "rx", "hkroot", "", "malformed"});
            return;
         }
         header_edges(hk.header, now);
         handle_block(hk, now);

         Raw raw;
         raw.gst_s = now;
         raw.prn = sf.prn;
         raw.mack = payload.mack;
         raw.nav = sf.nav;
         raw.genuine = sf.nav_genuine;
         raw.sub_id = sub_id;
         raw.tag_count = tesla::tags_per_mack(m_cfg.tesla.key_bits, m_cfg.tesla.tag_bits);
         m_status[sub_id];
         if(!handle_mack(raw, now)) {
            m_raw.push_back(std::move(raw));
         }
      }

   private:
      struct Anchor {
            int id = 0;
            uint8_t cid = 0;
            uint64_t start_s = 0;
            uint32_t delay = 1;
            tesla::TeslaParams params;
            dsm::MacltEntry maclt;
            std::vector<BitString> keys;  // keys[i] verified, contiguous from the root
      };

      struct Pending {
            uint64_t gst_s = 0;
            uint8_t prn = 0;
            int anchor = 0;
            uint32_t index = 0;
            std::vector<tesla::Tag> tags;  // tags[0] is the header tag
            std::vector<Bytes> data;
            std::vector<bool> genuine;
            uint16_t macseq = 0;
            uint64_t sub_id = 0;
            bool done = false;
      };

      struct Raw {
            uint64_t gst_s = 0;
            uint8_t prn = 0;
            BitString mack;
            std::map<uint8_t, Bytes> nav;
            std::map<uint8_t, bool> genuine;
            uint64_t sub_id = 0;
            uint64_t tag_count = 0;
      };

      struct Disclosure {
            uint64_t mack_gst_s = 0;
            BitString key;
      };

      struct Stream {
            uint8_t header = 0;
            std::unique_ptr<dsm::DsmBlockStream> blocks;
      };

      void set_phase(Phase p, uint64_t now) {
         if(p == m_phase) {
            return;
         }
         m_phase = p;
         m_log.add({now, "rx", "phase", "", std::string(to_string(p))});
      }

      Phase key_phase() const {
         if(!m_keys.empty()) {
            return Phase::HavePublicKey;
         }
         return m_root ? Phase::HaveMerkleRoot : Phase::ColdStart;
      }

      void header_edges(const dsm::NmaHeader& h, uint64_t now) {
         const bool crev_edge = h.cpks == dsm::Cpks::ChainRevoked && m_last_cpks != dsm::Cpks::ChainRevoked;
         const bool pkrev_edge = h.cpks == dsm::Cpks::PublicKeyRevoked && m_last_cpks != dsm::Cpks::PublicKeyRevoked;
         m_last_cpks = h.cpks;
         if(crev_edge) {
            m_log.add({now, "rx", "cpks", "", "CREV"});
            std::vector<Anchor> keep;
            for(auto& a : m_anchors) {
               if(a.cid == h.cid) {
                  keep.push_back(std::move(a));
               } else {
                  EventRecord r{now, "rx", "anchor_dropped", "", "CREV"};
                  r.anchor = a.id;
                  m_log.add(r);
               }
            }
            m_anchors = std::move(keep);
            if(m_anchors.empty() && m_phase >= Phase::HaveKroot) {
               set_phase(Phase::HavePublicKey, now);
            }
         }
         if(pkrev_edge) {
            m_log.add({now, "rx", "cpks", "", "PKREV"});
            for(const auto& a : m_anchors) {
               EventRecord r{now, "rx", "anchor_dropped", "", "PKREV"};
               r.anchor = a.id;
               m_log.add(r);
            }
            m_anchors.clear();
            m_keys.clear();
            set_phase(m_root ? Phase::HaveMerkleRoot : Phase::ColdStart, now);
         }
      }

      // DSM blocks are common to all satellites, so one stream per DSM ID.
      void handle_block(const dsm::HkrootMessage& hk, uint64_t now) {
         auto& st = m_streams[hk.dsm_id];
         const uint8_t hb = hk.header.encode();
         if(!st.blocks || st.header != hb) {
            st.blocks = std::make_unique<dsm::DsmBlockStream>(hk.dsm_id, m_mode);
            st.header = hb;
         }
         auto res = st.blocks->accumulate(hk.dsm_id, hk.bid, hk.block);
         if(res.status == dsm::AccumulateStatus::Conflict) {
            st.blocks->reset();
            res = st.blocks->accumulate(hk.dsm_id, hk.bid, hk.block);
         }
         if(res.status != dsm::AccumulateStatus::Complete) {
            return;
         }
         st.blocks->reset();
         process_dsm(hk.dsm_id, res.payload, hk.header, now);
      }

      void process_dsm(uint8_t dsm_id, const BitString& payload, const dsm::NmaHeader& header, uint64_t now) {
         std::string digest = crypto::short_digest(payload.bytes());
         // The NMA header is signed with the KROOT only.
         const std::string seen_key =
            dsm::is_pkr_dsm_id(dsm_id) ? digest : digest + ":" + std::to_string(header.encode());
         if(m_seen.count(seen_key)) {
            return;
         }
         if(dsm::is_pkr_dsm_id(dsm_id)) {
            process_pkr(payload, digest, now, seen_key);
         } else {
            process_kroot(payload, header, digest, now, seen_key);
         }
      }

      void process_pkr(const BitString& payload, const std::string& digest, uint64_t now, const std::string& seen_key) {
         if(!m_root) {
            m_log.add({now, "rx", "pkr", digest, "no_root"});
            return;
         }
         m_seen.insert(seen_key);
         try {
            const auto pkr = dsm::parse_dsm_pkr(payload, m_registry);
            if(dsm::verify_pkr(pkr, *m_root)) {
               m_keys[pkr.npkid] = {pkr.npkt, pkr.npk};
               ++m_sum.pkr_accepted;
               if(pkr.npk != m_bc.tree().leaf(pkr.npkid).npk) {
                  ++m_sum.pkr_forged_accepted;
               }
               m_log.add({now, "rx", "pkr", digest, "accepted"});
               if(m_phase < Phase::HavePublicKey) {
                  set_phase(Phase::HavePublicKey, now);
               }
               return;
            }
         } catch(const Error&) {
         }
         ++m_sum.pkr_rejected;
         m_log.add({now, "rx", "pkr", digest, "rejected"});
      }

      void process_kroot(const BitString& payload,
                         const dsm::NmaHeader& header,
                         const std::string& digest,
                         uint64_t now,
                         const std::string& seen_key) {
         const uint8_t pkid = static_cast<uint8_t>(payload.read_uint(7, 4));
         const auto key = m_keys.find(pkid);
         if(key == m_keys.end()) {
            m_log.add({now, "rx", "kroot", digest, "no_key"});
            return;
         }
         m_seen.insert(seen_key);
         std::optional<dsm::DsmKroot> k;
         sig::ProviderPtr provider;
         try {
            provider = m_registry.lookup(key->second.first);
            k = dsm::parse_dsm_kroot(payload, provider->sig_bits(), m_codes);
         } catch(const Error&) {
            k.reset();
         }
         if(!k || !dsm::verify_dsm_kroot(*k, header, *provider, key->second.second)) {
            ++m_sum.kroot_rejected;
            m_log.add({now, "rx", "kroot", digest, "rejected"});
            return;
         }
         Anchor a;
         try {
            a.params = dsm::params_from_kroot(*k, m_codes, m_cfg.tesla.scaled);
            a.maclt = dsm::lookup_maclt(k->maclt);
         } catch(const Error&) {
            ++m_sum.kroot_rejected;
            m_log.add({now, "rx", "kroot", digest, "rejected"});
            return;
         }
         a.cid = k->cidkr;
         a.start_s = a.params.start_time.total_seconds();
         a.delay = a.maclt.delay;
         a.keys.push_back(k->kroot);
         for(const auto& other : m_anchors) {
            if(other.cid == a.cid && other.start_s == a.start_s && other.keys.front() == a.keys.front()) {
               return;
            }
         }
         a.id = m_next_anchor++;
         m_accepted_roots.insert(k->kroot.to_hex());
         ++m_sum.kroot_accepted;
         if(!m_bc.is_genuine_root(k->kroot)) {
            ++m_sum.kroot_forged_accepted;
         }
         EventRecord r{now, "rx", "kroot", digest, "accepted"};
         r.anchor = a.id;
         m_log.add(r);
         m_anchors.push_back(std::move(a));
         if(m_phase < Phase::HaveKroot) {
            set_phase(Phase::HaveKroot, now);
         }
         // Material buffered before this anchor can now be used.
         std::vector<Raw> raws = std::move(m_raw);
         m_raw.clear();
         for(auto& raw : raws) {
            if(!handle_mack(raw, now)) {
               m_raw.push_back(std::move(raw));
            }
         }
         std::vector<Disclosure> unresolved = std::move(m_unresolved);
         m_unresolved.clear();
         for(auto& d : unresolved) {
            resolve(d, now);
         }
      }

      Anchor* anchor_for(uint64_t t) {
         Anchor* best = nullptr;
         for(auto& a : m_anchors) {
            if(a.start_s <= t && (!best || a.start_s >= best->start_s)) {
               best = &a;
            }
         }
         return best;
      }

      Anchor* anchor_by_id(int id) {
         for(auto& a : m_anchors) {
            if(a.id == id) {
               return &a;
            }
         }
         return nullptr;
      }

      // False when no anchor covers the subframe yet.
      bool handle_mack(const Raw& raw, uint64_t now) {
         Anchor* a = anchor_for(raw.gst_s);
         if(!a) {
            return false;
         }
         tesla::MackMessage m;
         try {
            m = tesla::parse_mack(raw.mack, a->params);
         } catch(const Error&) {
            m_log.add({now, "rx", "mack", "", "malformed"});
            return true;
         }
         Pending p;
         p.gst_s = raw.gst_s;
         p.prn = raw.prn;
         p.anchor = a->id;
         p.index = static_cast<uint32_t>((raw.gst_s - a->start_s) / bitgrid::kSubframeSeconds) + 1;
         p.macseq = m.macseq;
         p.sub_id = raw.sub_id;
         const TagPlan plan = plan_tags(raw.prn, a->maclt, a->params.tags_per_mack());
         std::vector<tesla::Tag> tags;
         tags.push_back({m.tag0, plan.info0});
         tags.insert(tags.end(), m.tags.begin(), m.tags.end());
         for(const auto& t : tags) {
            const auto nav = raw.nav.find(t.info.adkd);
            if(t.info.prn != raw.prn || nav == raw.nav.end()) {
               continue;
            }
            p.tags.push_back(t);
            p.data.push_back(tag_data(raw.gst_s, raw.prn, nav->second));
            p.genuine.push_back(raw.genuine.at(t.info.adkd));
         }
         m_status[raw.sub_id].tags = p.tags.size();
         m_pending[p.gst_s].push_back(std::move(p));

         Disclosure d;
         d.mack_gst_s = raw.gst_s;
         d.key = m.key;
         resolve(d, now);
         return true;
      }

      void resolve(const Disclosure& d, uint64_t now) {
         Anchor* a0 = anchor_for(d.mack_gst_s);
         const uint64_t back = a0 ? uint64_t{a0->delay} * bitgrid::kSubframeSeconds : 0;
         Anchor* a = (a0 && d.mack_gst_s >= back) ? anchor_for(d.mack_gst_s - back) : nullptr;
         if(!a) {
            m_unresolved.push_back(d);
            return;
         }
         const uint64_t t = d.mack_gst_s - back;
         const uint32_t index = static_cast<uint32_t>((t - a->start_s) / bitgrid::kSubframeSeconds) + 1;
         const std::string digest = crypto::short_digest(d.key.bytes());
         bool ok = false;
         if(index < a->keys.size()) {
            ok = a->keys[index] == d.key;
         } else if(index - (a->keys.size() - 1) <= kMaxBridge && d.key.size() == a->params.key_bits) {
            std::vector<BitString> chain_up;
            BitString k = d.key;
            for(uint32_t i = index; i > a->keys.size() - 1; --i) {
               chain_up.push_back(k);
               k = tesla::derive(a->params, k, i);
            }
            if(k == a->keys.back()) {
               ok = true;
               for(auto it = chain_up.rbegin(); it != chain_up.rend(); ++it) {
                  a->keys.push_back(*it);
               }
            }
         }
         EventRecord r{now, "rx", "key", digest, ok ? "verified" : "rejected"};
         r.anchor = a->id;
         r.key_index = index;
         m_log.add(r);
         if(!ok) {
            flag_unverified(*a, t, now);
            return;
         }
         verify_pending(*a, now);
      }

      void flag_unverified(const Anchor& a, uint64_t t, uint64_t now) {
         auto it = m_pending.find(t);
         if(it == m_pending.end()) {
            return;
         }
         for(const auto& p : it->second) {
            if(p.done || p.anchor != a.id) {
               continue;
            }
            for(size_t j = 0; j < p.tags.size(); ++j) {
               ++m_sum.key_unverified;
               EventRecord r{now, "rx", "tag", crypto::short_digest(p.data[j]), "KeyUnverified"};
               r.tag_gst_s = static_cast<int64_t>(p.gst_s);
               r.anchor = a.id;
               r.key_index = p.index;
               m_log.add(r);
            }
         }
      }

      void verify_pending(const Anchor& a, uint64_t now) {
         const uint64_t last = a.start_s + (a.keys.size() - 1) * bitgrid::kSubframeSeconds;
         for(auto it = m_pending.lower_bound(a.start_s); it != m_pending.end() && it->first < last; ++it) {
            for(auto& p : it->second) {
               if(p.done || p.anchor != a.id || p.index >= a.keys.size()) {
                  continue;
               }
               verify_record(a, p, now);
            }
         }
         // Drop finished time slots.
         for(auto it = m_pending.begin(); it != m_pending.end();) {
            const bool all_done =
               std::all_of(it->second.begin(), it->second.end(), [](const Pending& p) { return p.done; });
            it = all_done ? m_pending.erase(it) : std::next(it);
         }
      }

      void verify_record(const Anchor& a, Pending& p, uint64_t now) {
         const tesla::TeslaKey key{p.index, a.keys[p.index]};
         std::vector<tesla::Tag> entries(p.tags.begin() + (p.tags.empty() ? 0 : 1), p.tags.end());
         const bool macseq_ok =
            tesla::compute_macseq(a.params, key.bits, GstTime::from_total_seconds(p.gst_s), p.prn, entries) == p.macseq;
         for(size_t j = 0; j < p.tags.size(); ++j) {
            const auto expect = tesla::make_tag(a.params, key, p.data[j], p.tags[j].info);
            const bool authentic = expect.bits == p.tags[j].bits && (j == 0 || macseq_ok);
            EventRecord r{now, "rx", "tag", crypto::short_digest(p.data[j]), authentic ? "Authentic" : "Forged"};
            r.tag_gst_s = static_cast<int64_t>(p.gst_s);
            r.anchor = a.id;
            r.key_index = p.index;
            m_log.add(r);
            if(authentic) {
               ++m_sum.tags_authentic;
               ++m_status[p.sub_id].authentic;
               if(!p.genuine[j]) {
                  ++m_sum.forged_authentic;
               }
               if(!m_first_auth) {
                  m_first_auth = now;
               }
               set_phase(Phase::Authenticating, now);
            } else {
               ++m_sum.tags_forged;
               if(p.genuine[j]) {
                  ++m_sum.false_forged;
               } else {
                  ++m_sum.spoof_detected;
               }
            }
         }
         p.done = true;
      }

      const ScenarioConfig& m_cfg;
      sig::NpktRegistry m_registry;
      dsm::CodeTables m_codes;
      dsm::BidMode m_mode;
      EventLog& m_log;
      const Broadcaster& m_bc;
      Summary& m_sum;

      Phase m_phase = Phase::ColdStart;
      std::optional<dsm::Hash256> m_root;
      std::map<uint8_t, std::pair<uint8_t, Bytes>> m_keys;  // npkid -> (npkt, npk)
      std::vector<Anchor> m_anchors;
      int m_next_anchor = 0;
      dsm::Cpks m_last_cpks = dsm::Cpks::Nominal;
      std::map<uint8_t, Stream> m_streams;
      std::set<std::string> m_seen;
      std::set<std::string> m_accepted_roots;
      std::map<uint64_t, std::vector<Pending>> m_pending;
      std::vector<Raw> m_raw;
      std::vector<Disclosure> m_unresolved;
      std::map<uint64_t, SubStatus> m_status;
      std::optional<uint64_t> m_first_auth;
};

// Variant of a genuine subframe with altered ephemeris and a random header tag.
SimSubframe brute_force_variant(const SimSubframe& genuine,
                                const tesla::TeslaParams& params,
                                std::mt19937_64& rng) {
   SimSubframe v = adversary_data_spoof(genuine, rng);
   auto payload = bitgrid::assemble_subframe(v.pages);
   const uint64_t guess = random_bits(rng, params.tag_bits);
   for(unsigned b = 0; b < params.tag_bits; ++b) {
      payload.mack.set(b, ((guess >> (params.tag_bits - 1 - b)) & 1) != 0);
   }
   v.pages = bitgrid::disassemble_subframe(payload);
   v.origin = "bruteforce";
   return v;
}

}  // namespace

RunResult run(const ScenarioConfig& cfg) {
   cfg.validate();
   RunResult out;
   Summary& sum = out.summary;
   sum.seed = cfg.seed;

   Broadcaster bc(cfg);
   Receiver rx(cfg, out.log, bc, sum);
   auto channel_rng = make_rng(cfg.seed, "channel");
   auto adv_rng = make_rng(cfg.seed, "adversary");

   const uint64_t P = cfg.chain_renewal_subframes;
   const uint64_t first_g = P + cfg.start_offset_subframes;
   const uint64_t last_g = first_g + cfg.duration_subframes;
   std::unique_ptr<QuantumForger> forger;
   if(cfg.adversary == AdversaryKind::QuantumForger && cfg.adversary_start_subframe < cfg.duration_subframes) {
      forger = std::make_unique<QuantumForger>(cfg, bc, first_g + cfg.adversary_start_subframe, last_g);
   }

   // Genuine complete subframes: sub_id -> global subframe.
   std::map<uint64_t, uint64_t> genuine_complete;
   std::map<uint64_t, uint64_t> disclosed_upto;  // chain -> latest subframe whose key was disclosed
   uint64_t next_id = 0;

   for(uint64_t t = 0; t < cfg.duration_subframes; ++t) {
      const uint64_t g = first_g + t;
      if(t == 0) {
         rx.install(bc.gst(g));
      }
      const bool attack = t >= cfg.adversary_start_subframe;
      for(unsigned sat = 0; sat < cfg.satellites; ++sat) {
         SimSubframe sf;
         if(forger && attack) {
            sf = forger->emit(sat, g);
            out.log.add({sf.gst_s, "adv", "inject", crypto::short_digest(sf.nav.begin()->second), "quantum"});
         } else {
            sf = bc.emit(sat, g);
            if(cfg.adversary == AdversaryKind::DataSpoofer && attack && sat == 0) {
               sf = adversary_data_spoof(sf, adv_rng);
               out.log.add({sf.gst_s, "adv", "inject", crypto::short_digest(sf.nav.begin()->second), "spoof"});
            }
         }
         ++sum.subframes_total;
         bool complete = true;
         for(unsigned page = 0; page < bitgrid::kPagesPerSubframe; ++page) {
            if(bernoulli(channel_rng, cfg.page_loss)) {
               complete = false;
            }
         }
         if(complete) {
            ++sum.subframes_complete;
            const uint64_t id = next_id++;
            if(sf.origin == "genuine") {
               genuine_complete[id] = g;
               // The MACK of g discloses the key used at g - delay.
               const uint64_t gd = g - cfg.delay;
               auto& upto = disclosed_upto[gd / P];
               upto = std::max(upto, gd);
            }
            rx.receive(sf, id);
         }
         if(cfg.adversary == AdversaryKind::TagBruteForcer && attack && sat == 0) {
            const auto params = bc.chain(g / P).params();
            for(uint32_t k = 0; k < cfg.adversary_attempts; ++k) {
               const SimSubframe v = brute_force_variant(bc.emit(sat, g), params, adv_rng);
               out.log.add({v.gst_s, "adv", "inject", crypto::short_digest(v.nav.begin()->second), "bruteforce"});
               rx.receive(v, next_id++);
            }
         }
      }
   }

   const auto& st = rx.statuses();
   for(const auto& [id, g] : genuine_complete) {
      const auto it = disclosed_upto.find(g / P);
      if(it == disclosed_upto.end() || it->second < g || !rx.accepted_root(bc.chain(g / P).root_key())) {
         continue;
      }
      ++sum.eligible_subframes;
      const auto s = st.find(id);
      if(s != st.end() && s->second.tags > 0 && s->second.authentic == s->second.tags) {
         ++sum.authenticated_subframes;
      }
   }
   sum.tags_pending = rx.pending_tags();
   sum.final_phase = rx.phase();
   if(const auto first = rx.first_auth_gst()) {
      sum.ttfa_subframes = (*first - bc.gst(first_g)) / bitgrid::kSubframeSeconds;
   }
   return out;
}

}  // namespace osnma::sim
