#pragma once

#include <osnma/dsm.hpp>
#include <osnma/sigscheme.hpp>
#include <osnma/tesla.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace osnma::feas {

struct OsnmaGeometry {
      uint64_t l_npk = 0;
      uint64_t l_k = 0;
      uint64_t l_t = 0;
      uint64_t l_ds = 0;

      uint64_t l_dp = 0;
      uint64_t l_pdp = 0;
      uint64_t l_dk = 0;
      uint64_t l_pdk = 0;
      uint64_t n_t = 0;

      bool npk_in_range = false;
      bool k_in_range = false;
      bool t_in_range = false;
      bool ds_in_range = false;
      bool dp_in_range = false;
      bool dk_in_range = false;
      bool nt_in_range = false;

      bool in_range() const {
         return npk_in_range && k_in_range && t_in_range && ds_in_range && dp_in_range && dk_in_range && nt_in_range;
      }
};

/// Closed forms for l_DP, l_PDP, l_DK, l_PDK and n_t, with range flags.
OsnmaGeometry geometry(uint64_t l_npk, uint64_t l_k, uint64_t l_t, uint64_t l_ds);

enum class Mode : uint8_t {
   Nominal,
   Extended,
   Infeasible,
};

std::string_view to_string(Mode m);

/// On-air blocks in the given BID mode, nullopt past the cap (16 or 128).
std::optional<unsigned> blocks_needed(uint64_t payload_bits, dsm::BidMode mode);
/// Cheapest mode that carries the payload.
Mode required_mode(uint64_t payload_bits);

inline constexpr uint64_t kSecondsPerBlock = bitgrid::kSubframeSeconds;

struct UseCaseFit {
      uint64_t message_bits = 0;    // l_DP or l_DK
      uint64_t formula_blocks = 0;  // message_bits / 104
      Mode mode = Mode::Infeasible;
      unsigned air_blocks = 0;  // blocks on air in `mode`, 0 when infeasible
      uint64_t air_time_s = 0;  // air_blocks * 30
};

struct FitReport {
      std::string scheme;
      uint64_t pk_bits = 0;
      uint64_t sig_bits = 0;
      bool quantum_resistant = false;
      UseCaseFit pkr;
      UseCaseFit kroot;
      Mode mode = Mode::Infeasible;  // worst of the two use cases
      /// Published block counts for this scheme, where one is stated.
      std::optional<uint64_t> stated_pkr_blocks;
      std::optional<uint64_t> stated_kroot_blocks;

      bool fits_nominal() const { return pkr.mode == Mode::Nominal && kroot.mode == Mode::Nominal; }
};

inline constexpr unsigned kDefaultKeyBits = 256;

FitReport fit_report(const sig::SchemeCharacterization& scheme, unsigned key_bits = kDefaultKeyBits);
FitReport fit_report(const sig::SchemeCharacterization& scheme, const tesla::TeslaParams& tesla);

struct RatioRow {
      std::string label;
      std::string numerator;
      std::string baseline;
      uint64_t numerator_bits = 0;
      uint64_t baseline_bits = 0;
      double ratio = 0;
      /// Published figure, where one is stated.
      std::optional<double> stated_value;
      std::string stated_phrase;
      bool agree = true;
};

/// Ratios rounded to three decimals; agreement means within one unit of the stated figure.
std::vector<RatioRow> ratio_report();
double round3(double v);

struct Claim {
      std::string id;
      std::string statement;
      std::string stated_value;
      std::string derived_value;
      bool agree = false;
      std::string basis;
};

/// Every printed use-case figure next to its formula-derived counterpart.
std::vector<Claim> claims_ledger();

enum class Dissemination : uint8_t {
   Continuous,
   PkrWindow,
};

inline constexpr unsigned kBlocksPerPkrWindow = 60;        // 30 minutes of subframes
inline constexpr uint64_t kPkrWindowSpacingS = 6 * 3600;  // every 6 hours

struct Airtime {
      uint64_t seconds = 0;
      unsigned windows = 0;
};

Airtime airtime(unsigned blocks, Dissemination d);

struct FigureRow {
      std::string algorithm;
      uint64_t bits = 0;
      std::string classical_or_pqc;
};

std::vector<FigureRow> figure8_rows();
std::vector<FigureRow> figure9_rows(bool include_sphincs);
void write_figure_csv(std::ostream& out, const std::vector<FigureRow>& rows);

}  // namespace osnma::feas
