#include <osnma/sim.hpp>

#include <osnma/error.hpp>

#include <fstream>
#include <ostream>
#include <sstream>

namespace osnma::sim {

namespace {

std::string trim(std::string_view s) {
   const auto b = s.find_first_not_of(" \t\r");
   if(b == std::string_view::npos) {
      return {};
   }
   const auto e = s.find_last_not_of(" \t\r");
   return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad(const std::string& msg) {
   throw Error(ErrorCode::ConfigInvalid, msg);
}

uint64_t to_uint(const std::string& key, const std::string& v) {
   try {
      size_t used = 0;
      const unsigned long long x = std::stoull(v, &used, 10);
      if(used != v.size() || v.front() == '-') {
         bad(key + ": expected an unsigned integer, got '" + v + "'");
      }
      return x;
   } catch(const std::logic_error&) {
      bad(key + ": expected an unsigned integer, got '" + v + "'");
   }
}

double to_double(const std::string& key, const std::string& v) {
   try {
      size_t used = 0;
      const double x = std::stod(v, &used);
      if(used != v.size()) {
         bad(key + ": expected a number, got '" + v + "'");
      }
      return x;
   } catch(const std::logic_error&) {
      bad(key + ": expected a number, got '" + v + "'");
   }
}

bool to_bool(const std::string& key, const std::string& v) {
   if(v == "true" || v == "yes" || v == "1") {
      return true;
   }
   if(v == "false" || v == "no" || v == "0") {
      return false;
   }
   bad(key + ": expected true or false, got '" + v + "'");
}

AdversaryKind to_adversary(const std::string& v) {
   if(v == "none") {
      return AdversaryKind::None;
   }
   if(v == "spoofer") {
      return AdversaryKind::DataSpoofer;
   }
   if(v == "bruteforce") {
      return AdversaryKind::TagBruteForcer;
   }
   if(v == "quantum") {
      return AdversaryKind::QuantumForger;
   }
   bad("adversary: expected none, spoofer, bruteforce or quantum, got '" + v + "'");
}

}  // namespace

std::string_view to_string(AdversaryKind a) {
   switch(a) {
      case AdversaryKind::None:
         return "none";
      case AdversaryKind::DataSpoofer:
         return "spoofer";
      case AdversaryKind::TagBruteForcer:
         return "bruteforce";
      case AdversaryKind::QuantumForger:
         return "quantum";
   }
   return "?";
}

sig::NpktRegistry ScenarioConfig::registry() const {
   sig::NpktRegistry reg;
   for(const auto& [code, name] : npkt_map) {
      reg.assign(code, name);
   }
   return reg;
}

dsm::CodeTables ScenarioConfig::code_tables() const {
   dsm::CodeTables t;
   try {
      t.ts_code(tesla.tag_bits);
   } catch(const Error&) {
      if(tesla.scaled) {
         t.ts_extension[0] = tesla.tag_bits;
      }
   }
   return t;
}

void ScenarioConfig::validate() const {
   if(satellites < 1 || satellites > 36) {
      bad("satellites must be within 1..36");
   }
   if(week >= 4096) {
      bad("week must fit in 12 bits");
   }
   if(delay != 1 && delay != 10) {
      bad("tesla.delay must be 1 or 10");
   }
   if(chain_renewal_subframes < 120 || chain_renewal_subframes > 2880) {
      bad("chain_renewal_subframes must be within 120..2880 (1 hour to 1 day)");
   }
   if(chain_renewal_subframes % 120 != 0) {
      bad("chain_renewal_subframes must be a whole number of hours (multiple of 120)");
   }
   if(pkr_period_subframes == 0 || pkr_window_subframes == 0 || pkr_window_subframes > pkr_period_subframes) {
      bad("pkr window must be non-empty and no longer than its period");
   }
   if(!(page_loss >= 0.0 && page_loss < 1.0)) {
      bad("page_loss must be within [0, 1)");
   }
   try {
      tesla::TeslaParams p = tesla;
      p.chain_length = 1;
      p.chain_id = 0;
      p.start_time = {};
      p.validate();
      if(p.mac == MacFunction::CmacAes && p.key_bits != 128 && p.key_bits != 192 && p.key_bits != 256) {
         bad("CMAC-AES needs l_K of 128, 192 or 256");
      }
      const auto codes = code_tables();
      codes.ks_code(p.key_bits);
      codes.ts_code(p.tag_bits);
      const auto reg = registry();
      const auto provider = reg.lookup(npkt);
      const auto kroot_bits = dsm::kroot_length(p.key_bits, provider->sig_bits());
      if(!dsm::blocks_for(kroot_bits, bid_mode())) {
         bad("DSM-KROOT of " + std::to_string(kroot_bits) + " bits does not fit the " +
             std::string(dsm::to_string(bid_mode())) + " BID mode");
      }
      const auto pkr_bits = dsm::pkr_length(provider->pk_bits());
      if(!dsm::blocks_for(pkr_bits, bid_mode())) {
         bad("DSM-PKR of " + std::to_string(pkr_bits) + " bits does not fit the " +
             std::string(dsm::to_string(bid_mode())) + " BID mode");
      }
   } catch(const Error& e) {
      if(e.code() == ErrorCode::ConfigInvalid) {
         throw;
      }
      bad(e.what());
   }
}

ScenarioConfig parse_scenario(std::istream& in) {
   ScenarioConfig c;
   std::string line;
   int lineno = 0;
   while(std::getline(in, line)) {
      ++lineno;
      if(const auto hash = line.find('#'); hash != std::string::npos) {
         line.erase(hash);
      }
      line = trim(line);
      if(line.empty()) {
         continue;
      }
      const auto eq = line.find('=');
      if(eq == std::string::npos) {
         bad("line " + std::to_string(lineno) + ": expected key=value");
      }
      const std::string key = trim(line.substr(0, eq));
      const std::string val = trim(line.substr(eq + 1));
      if(val.empty()) {
         bad("line " + std::to_string(lineno) + ": empty value for " + key);
      }
      try {
         if(key == "duration_subframes") {
            c.duration_subframes = static_cast<uint32_t>(to_uint(key, val));
         } else if(key == "satellites") {
            c.satellites = static_cast<unsigned>(to_uint(key, val));
         } else if(key == "seed") {
            c.seed = to_uint(key, val);
         } else if(key == "week") {
            c.week = static_cast<uint32_t>(to_uint(key, val));
         } else if(key == "tesla.lk") {
            c.tesla.key_bits = static_cast<unsigned>(to_uint(key, val));
         } else if(key == "tesla.lt") {
            c.tesla.tag_bits = static_cast<unsigned>(to_uint(key, val));
         } else if(key == "tesla.hash") {
            c.tesla.hash = parse_hash_function(val);
         } else if(key == "tesla.mac") {
            c.tesla.mac = parse_mac_function(val);
         } else if(key == "tesla.delay") {
            c.delay = static_cast<uint32_t>(to_uint(key, val));
         } else if(key == "tesla.scaled") {
            c.tesla.scaled = to_bool(key, val);
         } else if(key == "chain_renewal_subframes") {
            c.chain_renewal_subframes = static_cast<uint32_t>(to_uint(key, val));
         } else if(key == "pkr_period_subframes") {
            c.pkr_period_subframes = static_cast<uint32_t>(to_uint(key, val));
         } else if(key == "pkr_window_subframes") {
            c.pkr_window_subframes = static_cast<uint32_t>(to_uint(key, val));
         } else if(key == "start_offset_subframes") {
            c.start_offset_subframes = static_cast<uint32_t>(to_uint(key, val));
         } else if(key == "page_loss") {
            c.page_loss = to_double(key, val);
         } else if(key == "adversary") {
            c.adversary = to_adversary(val);
         } else if(key == "adversary.attempts") {
            c.adversary_attempts = static_cast<uint32_t>(to_uint(key, val));
         } else if(key == "adversary.start_subframe") {
            c.adversary_start_subframe = static_cast<uint32_t>(to_uint(key, val));
         } else if(key == "npkt") {
            const auto v = to_uint(key, val);
            if(v > 15) {
               bad("npkt is a 4-bit code");
            }
            c.npkt = static_cast<uint8_t>(v);
         } else if(key == "npkt_map") {
            // code:scheme[,code:scheme...]
            std::istringstream ms(val);
            std::string item;
            while(std::getline(ms, item, ',')) {
               item = trim(item);
               const auto colon = item.find(':');
               if(colon == std::string::npos) {
                  bad("npkt_map entries look like 7:Falcon-512");
               }
               const auto code = to_uint(key, trim(item.substr(0, colon)));
               if(code > 15) {
                  bad("npkt_map code is a 4-bit value");
               }
               c.npkt_map[static_cast<uint8_t>(code)] = trim(item.substr(colon + 1));
            }
         } else if(key == "extended_bid") {
            c.extended_bid = to_bool(key, val);
         } else if(key == "receiver.merkle_root") {
            c.receiver_merkle_root = to_bool(key, val);
         } else if(key == "receiver.public_key") {
            c.receiver_public_key = to_bool(key, val);
         } else {
            bad("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
         }
      } catch(const Error& e) {
         if(e.code() == ErrorCode::ConfigInvalid) {
            throw;
         }
         bad("line " + std::to_string(lineno) + ": " + e.what());
      }
   }
   c.validate();
   return c;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
   std::ifstream in(path);
   if(!in) {
      bad("cannot open scenario file '" + path.string() + "'");
   }
   return parse_scenario(in);
}

void write_scenario(std::ostream& out, const ScenarioConfig& c) {
   out << "duration_subframes=" << c.duration_subframes << "\n"
       << "satellites=" << c.satellites << "\n"
       << "seed=" << c.seed << "\n"
       << "week=" << c.week << "\n"
       << "tesla.lk=" << c.tesla.key_bits << "\n"
       << "tesla.lt=" << c.tesla.tag_bits << "\n"
       << "tesla.hash=" << to_string(c.tesla.hash) << "\n"
       << "tesla.mac=" << to_string(c.tesla.mac) << "\n"
       << "tesla.delay=" << c.delay << "\n"
       << "tesla.scaled=" << (c.tesla.scaled ? "true" : "false") << "\n"
       << "chain_renewal_subframes=" << c.chain_renewal_subframes << "\n"
       << "pkr_period_subframes=" << c.pkr_period_subframes << "\n"
       << "pkr_window_subframes=" << c.pkr_window_subframes << "\n"
       << "start_offset_subframes=" << c.start_offset_subframes << "\n"
       << "page_loss=" << c.page_loss << "\n"
       << "adversary=" << to_string(c.adversary) << "\n"
       << "adversary.attempts=" << c.adversary_attempts << "\n"
       << "adversary.start_subframe=" << c.adversary_start_subframe << "\n"
       << "npkt=" << unsigned{c.npkt} << "\n";
   if(!c.npkt_map.empty()) {
      out << "npkt_map=";
      bool first = true;
      for(const auto& [code, name] : c.npkt_map) {
         out << (first ? "" : ",") << unsigned{code} << ":" << name;
         first = false;
      }
      out << "\n";
   }
   out << "extended_bid=" << (c.extended_bid ? "true" : "false") << "\n"
       << "receiver.merkle_root=" << (c.receiver_merkle_root ? "true" : "false") << "\n"
       << "receiver.public_key=" << (c.receiver_public_key ? "true" : "false") << "\n";
}

}  // namespace osnma::sim
