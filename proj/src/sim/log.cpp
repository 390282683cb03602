#include <osnma/sim.hpp>

#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace osnma::sim {

std::string_view to_string(Phase p) {
   switch(p) {
      case Phase::ColdStart:
         return "ColdStart";
      case Phase::HaveMerkleRoot:
         return "HaveMerkleRoot";
      case Phase::HavePublicKey:
         return "HavePublicKey";
      case Phase::HaveKroot:
         return "HaveKroot";
      case Phase::Authenticating:
         return "Authenticating";
   }
   return "?";
}

std::string format_gst(uint64_t gst_s) {
   const auto t = bitgrid::GstTime::from_total_seconds(gst_s);
   return std::to_string(t.week) + ":" + std::to_string(t.tow);
}

void EventLog::write_tsv(std::ostream& out) const {
   for(const auto& r : m_records) {
      out << format_gst(r.gst_s) << '\t' << r.actor << '\t' << r.kind << '\t' << (r.digest.empty() ? "-" : r.digest)
          << '\t' << (r.verdict.empty() ? "-" : r.verdict) << '\n';
   }
}

std::vector<std::pair<std::string, std::string>> Summary::fields() const {
   std::ostringstream rate;
   rate.setf(std::ios::fixed);
   rate.precision(4);
   rate << auth_rate();
   return {
      {"seed", std::to_string(seed)},
      {"subframes_total", std::to_string(subframes_total)},
      {"subframes_complete", std::to_string(subframes_complete)},
      {"tags_authentic", std::to_string(tags_authentic)},
      {"tags_forged", std::to_string(tags_forged)},
      {"key_unverified", std::to_string(key_unverified)},
      {"tags_pending", std::to_string(tags_pending)},
      {"forged_authentic", std::to_string(forged_authentic)},
      {"spoof_detected", std::to_string(spoof_detected)},
      {"false_forged", std::to_string(false_forged)},
      {"ttfa_subframes", ttfa_subframes ? std::to_string(*ttfa_subframes) : std::string("none")},
      {"eligible_subframes", std::to_string(eligible_subframes)},
      {"authenticated_subframes", std::to_string(authenticated_subframes)},
      {"auth_rate", rate.str()},
      {"kroot_accepted", std::to_string(kroot_accepted)},
      {"kroot_rejected", std::to_string(kroot_rejected)},
      {"kroot_forged_accepted", std::to_string(kroot_forged_accepted)},
      {"pkr_accepted", std::to_string(pkr_accepted)},
      {"pkr_rejected", std::to_string(pkr_rejected)},
      {"pkr_forged_accepted", std::to_string(pkr_forged_accepted)},
      {"final_phase", std::string(to_string(final_phase))},
   };
}

void write_summary_csv(std::ostream& out, std::span<const Summary> rows) {
   const auto header = Summary{}.fields();
   for(size_t i = 0; i < header.size(); ++i) {
      out << (i ? "," : "") << header[i].first;
   }
   out << "\n";
   for(const auto& s : rows) {
      const auto f = s.fields();
      for(size_t i = 0; i < f.size(); ++i) {
         out << (i ? "," : "") << f[i].second;
      }
      out << "\n";
   }
}

AuditReport audit(const EventLog& log, uint32_t delay) {
   AuditReport rep;
   Phase phase = Phase::ColdStart;
   std::set<int> anchors;
   std::map<int, uint32_t> verified;
   auto fail = [&rep](const EventRecord& r, const std::string& why) {
      rep.ok = false;
      rep.violations.push_back(format_gst(r.gst_s) + " " + r.kind + ": " + why);
   };
   for(const auto& r : log.records()) {
      if(r.kind == "phase") {
         for(Phase p : {Phase::ColdStart, Phase::HaveMerkleRoot, Phase::HavePublicKey, Phase::HaveKroot,
                        Phase::Authenticating}) {
            if(to_string(p) == r.verdict) {
               phase = p;
            }
         }
      } else if(r.kind == "kroot" && r.verdict == "accepted") {
         anchors.insert(r.anchor);
      } else if(r.kind == "anchor_dropped") {
         anchors.erase(r.anchor);
         verified.erase(r.anchor);
      } else if(r.kind == "key" && r.verdict == "verified") {
         if(anchors.count(r.anchor) == 0) {
            fail(r, "key verified against an anchor that is not in force");
         }
         auto& v = verified[r.anchor];
         v = std::max(v, r.key_index);
      } else if(r.kind == "tag" && r.verdict == "Authentic") {
         if(phase < Phase::HaveKroot) {
            fail(r, "Authentic verdict before a KROOT was verified");
         }
         if(anchors.count(r.anchor) == 0) {
            fail(r, "Authentic verdict without an accepted anchor");
         }
         const auto it = verified.find(r.anchor);
         if(it == verified.end() || it->second < r.key_index) {
            fail(r, "Authentic verdict from a key that was never verified");
         }
         if(r.tag_gst_s < 0 ||
            r.gst_s < static_cast<uint64_t>(r.tag_gst_s) + uint64_t{delay} * bitgrid::kSubframeSeconds) {
            fail(r, "Authentic verdict inside the disclosure delay");
         }
      }
   }
   return rep;
}

}  // namespace osnma::sim
