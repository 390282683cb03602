#include <osnma/feasibility.hpp>

#include <cmath>
#include <ostream>
#include <sstream>

namespace osnma::feas {

namespace {

bool within(uint64_t v, uint64_t lo, uint64_t hi) {
   return v >= lo && v <= hi;
}

std::string fmt3(double v) {
   std::ostringstream s;
   s.setf(std::ios::fixed);
   s.precision(3);
   s << v;
   return s.str();
}

UseCaseFit fit_message(uint64_t bits) {
   UseCaseFit f;
   f.message_bits = bits;
   f.formula_blocks = bits / dsm::kBlockBits;
   f.mode = required_mode(bits);
   if(f.mode == Mode::Nominal) {
      f.air_blocks = *blocks_needed(bits, dsm::BidMode::Nominal);
   } else if(f.mode == Mode::Extended) {
      f.air_blocks = *blocks_needed(bits, dsm::BidMode::Extended);
   }
   f.air_time_s = f.air_blocks * kSecondsPerBlock;
   return f;
}

Mode worst(Mode a, Mode b) {
   return static_cast<uint8_t>(a) > static_cast<uint8_t>(b) ? a : b;
}

}  // namespace

OsnmaGeometry geometry(uint64_t l_npk, uint64_t l_k, uint64_t l_t, uint64_t l_ds) {
   OsnmaGeometry g;
   g.l_npk = l_npk;
   g.l_k = l_k;
   g.l_t = l_t;
   g.l_ds = l_ds;
   g.l_dp = dsm::pkr_length(l_npk);
   g.l_pdp = g.l_dp - dsm::kPkrMetadataBits - dsm::kMerklePathBits - l_npk;
   g.l_dk = dsm::kroot_length(l_k, l_ds);
   g.l_pdk = g.l_dk - dsm::kKrootPreambleBits - l_k - l_ds;
   g.n_t = l_k < bitgrid::kMackBits ? (bitgrid::kMackBits - l_k) / (l_t + tesla::kTagInfoBits) : 0;

   g.npk_in_range = within(l_npk, 264, 536);
   g.k_in_range = within(l_k, tesla::kMinKeyBits, tesla::kMaxKeyBits);
   g.t_in_range = within(l_t, tesla::kMinTagBits, tesla::kMaxTagBits);
   g.ds_in_range = within(l_ds, 512, 1056);
   g.dp_in_range = within(g.l_dp, 1352, 1664);
   g.dk_in_range = within(g.l_dk, 728, 1456);
   g.nt_in_range = within(g.n_t, tesla::kMinTags, tesla::kMaxTags);
   return g;
}

std::string_view to_string(Mode m) {
   switch(m) {
      case Mode::Nominal:
         return "nominal";
      case Mode::Extended:
         return "extended";
      case Mode::Infeasible:
         return "infeasible";
   }
   return "?";
}

std::optional<unsigned> blocks_needed(uint64_t payload_bits, dsm::BidMode mode) {
   return dsm::blocks_for(payload_bits, mode);
}

Mode required_mode(uint64_t payload_bits) {
   if(blocks_needed(payload_bits, dsm::BidMode::Nominal)) {
      return Mode::Nominal;
   }
   if(blocks_needed(payload_bits, dsm::BidMode::Extended)) {
      return Mode::Extended;
   }
   return Mode::Infeasible;
}

FitReport fit_report(const sig::SchemeCharacterization& scheme, unsigned key_bits) {
   FitReport r;
   r.scheme = scheme.name;
   r.pk_bits = scheme.pk_bits;
   r.sig_bits = scheme.sig_bits;
   r.quantum_resistant = scheme.quantum_resistant;
   r.pkr = fit_message(dsm::pkr_length(scheme.pk_bits));
   r.kroot = fit_message(dsm::kroot_length(key_bits, scheme.sig_bits));
   r.mode = worst(r.pkr.mode, r.kroot.mode);
   if(scheme.name == "Falcon-512") {
      r.stated_pkr_blocks = 71;
      r.stated_kroot_blocks = 67;
   }
   return r;
}

FitReport fit_report(const sig::SchemeCharacterization& scheme, const tesla::TeslaParams& tesla) {
   return fit_report(scheme, tesla.key_bits);
}

double round3(double v) {
   return std::round(v * 1000.0) / 1000.0;
}

std::vector<RatioRow> ratio_report() {
   const auto& p256 = sig::characterize("ECDSA-P256");
   const auto& p521 = sig::characterize("ECDSA-P521");
   const auto& falcon = sig::characterize("Falcon-512");
   const auto& sphincs = sig::characterize("SPHINCS+-128s");

   auto row = [](std::string label,
                 std::string num,
                 std::string base,
                 uint64_t a,
                 uint64_t b,
                 std::optional<double> stated,
                 std::string phrase) {
      RatioRow r;
      r.label = std::move(label);
      r.numerator = std::move(num);
      r.baseline = std::move(base);
      r.numerator_bits = a;
      r.baseline_bits = b;
      r.ratio = round3(static_cast<double>(a) / static_cast<double>(b));
      r.stated_value = stated;
      r.stated_phrase = std::move(phrase);
      r.agree = !stated || std::fabs(r.ratio - *stated) < 1.0;
      return r;
   };

   std::vector<RatioRow> out;
   out.push_back(row("falcon_sig_vs_p521_sig",
                     "Falcon-512 signature",
                     "ECDSA-P521 signature (1056)",
                     falcon.sig_bits,
                     p521.sig_bits,
                     5.0,
                     "nearly 5 times"));
   out.push_back(row("sphincs_sig_vs_264",
                     "SPHINCS+-128s signature",
                     "264-bit P-256 encoded key length",
                     sphincs.sig_bits,
                     p256.pk_bits,
                     238.0,
                     "around 238 times"));
   out.push_back(row("sphincs_sig_vs_p256_sig",
                     "SPHINCS+-128s signature",
                     "ECDSA-P256 signature (512)",
                     sphincs.sig_bits,
                     p256.sig_bits,
                     std::nullopt,
                     "baseline the stated 238 does not match"));
   out.push_back(row("falcon_pk_vs_p521_pk",
                     "Falcon-512 public key",
                     "ECDSA-P521 encoded key (536)",
                     falcon.pk_bits,
                     p521.pk_bits,
                     13.0,
                     "approximately 13 points to one"));
   out.push_back(row("falcon_pk_vs_521",
                     "Falcon-512 public key",
                     "P-521 curve size (521)",
                     falcon.pk_bits,
                     521,
                     13.0,
                     "approximately 13 points to one"));
   out.push_back(
      row("p256_vs_p256", "ECDSA-P256 signature", "ECDSA-P256 signature (512)", p256.sig_bits, p256.sig_bits, 1.0, "identity"));
   return out;
}

std::vector<Claim> claims_ledger() {
   const auto& falcon = sig::characterize("Falcon-512");
   const FitReport ff = fit_report(falcon, 256);
   const uint64_t nominal_bits = uint64_t{dsm::kNominalMaxBlocks} * dsm::kBlockBits;
   const uint64_t crypto_bits = nominal_bits - dsm::kPkrMetadataBits;
   const uint64_t pk_room = crypto_bits - dsm::kMerklePathBits;
   const uint64_t ds_room = nominal_bits - dsm::kKrootPreambleBits - 256;
   const uint64_t merkle_blocks = (dsm::kMerklePathBits + dsm::kBlockBits - 1) / dsm::kBlockBits;

   std::vector<Claim> out;
   auto add = [&out](std::string id, std::string stmt, std::string stated, std::string derived, std::string basis) {
      Claim c;
      c.id = std::move(id);
      c.statement = std::move(stmt);
      c.agree = stated == derived;
      c.stated_value = std::move(stated);
      c.derived_value = std::move(derived);
      c.basis = std::move(basis);
      out.push_back(std::move(c));
   };

   add("nominal_capacity_bits",
       "bits available in 16 nominal DSM blocks",
       "1664",
       std::to_string(nominal_bits),
       "16 * 104");
   add("pkr_crypto_bits",
       "DSM-PKR bits left after the 16-bit metadata",
       "1632",
       std::to_string(crypto_bits),
       "1664 - 16");
   add("pkr_free_pk_bits",
       "DSM-PKR bits left for the public key after the Merkle path",
       "608",
       std::to_string(pk_room),
       "1664 - 16 - 1024");
   add("pkr_free_bits_per_block",
       "public-key bits per DSM block",
       "32",
       fmt3(static_cast<double>(pk_room) / dsm::kNominalMaxBlocks),
       "(1664 - 16 - 1024) / 16");
   add("merkle_path_blocks",
       "blocks saved by dropping the Merkle path",
       "10",
       std::to_string(merkle_blocks),
       "ceil(1024 / 104)");
   add("falcon_pkr_blocks",
       "DSM blocks for a Falcon-512 public key",
       "71",
       std::to_string(ff.pkr.formula_blocks),
       "l_DP / 104 with l_DP = 104 * ceil((1040 + 7176) / 104)");
   add("kroot_ds_bits",
       "DS bits available with l_K = 256 in 16 blocks",
       "1727",
       std::to_string(ds_room),
       "1664 - 104 - 256");
   add("kroot_ds_bits_per_block",
       "DS bits per DSM block",
       "79",
       fmt3(static_cast<double>(ds_room) / dsm::kNominalMaxBlocks),
       "(1664 - 104 - 256) / 16");
   add("falcon_kroot_blocks",
       "DSM blocks for a DSM-KROOT carrying a Falcon-512 signature",
       "67",
       std::to_string(ff.kroot.formula_blocks),
       "l_DK / 104 with l_DK = 104 * ceil(1 + (256 + 5328) / 104)");
   add("extended_capacity_bits",
       "DSM length reachable with a 7-bit BID",
       "13312",
       std::to_string(dsm::kExtendedGrossBits),
       "128 * 104 gross; net payload is 128 * 101 = 12928");
   add("extended_bid_bits_taken",
       "bits taken from each block to widen the BID",
       "4",
       std::to_string(dsm::kExtendedBidBits - dsm::kNominalBidBits),
       "7 - 4");
   add("extended_transmission_s",
       "transmission time of a full extended DSM (Falcon-512 DSM-KROOT)",
       "142",
       std::to_string(ff.kroot.air_time_s),
       "on-air extended blocks (" + std::to_string(ff.kroot.air_blocks) + ") * 30 s, one block per subframe");

   for(const auto& r : ratio_report()) {
      if(!r.stated_value || r.label == "p256_vs_p256") {
         continue;
      }
      Claim c;
      c.id = "ratio_" + r.label;
      c.statement = r.numerator + " / " + r.baseline;
      c.stated_value = r.stated_phrase;
      c.derived_value = fmt3(r.ratio);
      c.agree = r.agree;
      c.basis = std::to_string(r.numerator_bits) + " / " + std::to_string(r.baseline_bits);
      out.push_back(std::move(c));
   }
   return out;
}

Airtime airtime(unsigned blocks, Dissemination d) {
   Airtime a;
   if(blocks == 0) {
      return a;
   }
   if(d == Dissemination::Continuous) {
      a.seconds = uint64_t{blocks} * kSecondsPerBlock;
      a.windows = 0;
      return a;
   }
   a.windows = (blocks + kBlocksPerPkrWindow - 1) / kBlocksPerPkrWindow;
   const unsigned rem = blocks - (a.windows - 1) * kBlocksPerPkrWindow;
   a.seconds = uint64_t{a.windows - 1} * kPkrWindowSpacingS + uint64_t{rem} * kSecondsPerBlock;
   return a;
}

std::vector<FigureRow> figure8_rows() {
   std::vector<FigureRow> out;
   for(const char* name : {"ECDSA-P256", "ECDSA-P521", "Dilithium2", "Falcon-512", "SPHINCS+-128s"}) {
      const auto& c = sig::characterize(name);
      out.push_back({c.name, c.pk_bits, c.quantum_resistant ? "pqc" : "classical"});
   }
   return out;
}

std::vector<FigureRow> figure9_rows(bool include_sphincs) {
   std::vector<FigureRow> out;
   for(const char* name : {"ECDSA-P256", "ECDSA-P521", "Dilithium2", "Falcon-512"}) {
      const auto& c = sig::characterize(name);
      out.push_back({c.name, c.sig_bits, c.quantum_resistant ? "pqc" : "classical"});
   }
   if(include_sphincs) {
      const auto& c = sig::characterize("SPHINCS+-128s");
      out.push_back({c.name, c.sig_bits, "pqc"});
   }
   return out;
}

void write_figure_csv(std::ostream& out, const std::vector<FigureRow>& rows) {
   out << "algorithm,bits,classical_or_pqc\n";
   for(const auto& r : rows) {
      out << r.algorithm << "," << r.bits << "," << r.classical_or_pqc << "\n";
   }
}

}  // namespace osnma::feas
