#include <osnma/sim.hpp>

#include <osnma/crypto.hpp>

namespace osnma::sim {

bool bernoulli(std::mt19937_64& rng, double p) {
   const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
   return u < p;
}

uint64_t random_bits(std::mt19937_64& rng, unsigned width) {
   const uint64_t v = rng();
   return width >= 64 ? v : (v & ((uint64_t{1} << width) - 1));
}

Bytes nav_payload(uint64_t seed, uint8_t prn, uint8_t adkd, uint64_t gst_s) {
   Bytes in;
   for(int i = 7; i >= 0; --i) {
      in.push_back(static_cast<uint8_t>(seed >> (8 * i)));
   }
   in.push_back(prn);
   in.push_back(adkd);
   for(int i = 7; i >= 0; --i) {
      in.push_back(static_cast<uint8_t>(gst_s >> (8 * i)));
   }
   Bytes h = crypto::expand("osnma-nav", in, 20);
   return h;
}

Bytes tag_data(uint64_t gst_s, uint8_t prn, std::span<const uint8_t> payload) {
   const uint32_t g = bitgrid::GstTime::from_total_seconds(gst_s).packed();
   Bytes out = {static_cast<uint8_t>(g >> 24), static_cast<uint8_t>(g >> 16), static_cast<uint8_t>(g >> 8),
                static_cast<uint8_t>(g)};
   out.push_back(prn);
   out.insert(out.end(), payload.begin(), payload.end());
   return out;
}

SimSubframe adversary_data_spoof(const SimSubframe& genuine, std::mt19937_64& rng) {
   SimSubframe s = genuine;
   auto it = s.nav.find(static_cast<uint8_t>(tesla::Adkd::Ephemeris));
   if(it == s.nav.end() || it->second.empty()) {
      return s;
   }
   const size_t byte = rng() % it->second.size();
   const uint8_t flip = static_cast<uint8_t>(1u << (rng() % 8));
   it->second[byte] ^= flip;
   s.nav_genuine[it->first] = false;
   s.origin = "spoofer";
   return s;
}

BruteForceOutcome adversary_brute_force(const tesla::TeslaParams& params,
                                        const tesla::TeslaKey& key,
                                        std::span<const uint8_t> forged_data,
                                        tesla::TagInfo info,
                                        uint32_t k,
                                        std::mt19937_64& rng) {
   BruteForceOutcome out;
   if(k == 0) {
      return out;
   }
   // The receiver recomputes the same truncated MAC for every guess.
   const uint64_t expected = tesla::make_tag(params, key, forged_data, info).bits;
   for(uint32_t i = 0; i < k; ++i) {
      ++out.attempts_used;
      if(random_bits(rng, params.tag_bits) == expected) {
         out.success = true;
         break;
      }
   }
   return out;
}

}  // namespace osnma::sim
