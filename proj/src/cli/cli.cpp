#include <osnma/cli.hpp>

#include <osnma/crypto.hpp>
#include <osnma/error.hpp>
#include <osnma/feasibility.hpp>
#include <osnma/sigscheme.hpp>
#include <osnma/sim.hpp>
#include <osnma/tesla.hpp>

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

namespace osnma::cli {

namespace {

struct AnalyzeOpts {
      std::vector<std::string> schemes;
      bool all = false;
      unsigned lk = feas::kDefaultKeyBits;
      unsigned lt = 40;
      bool extended = false;
      bool strict = false;
      std::string csv;
};

struct SimulateOpts {
      std::string scenario;
      std::optional<uint64_t> seed;
      std::string out_dir;
      unsigned runs = 1;
      unsigned jobs = 1;
};

struct ChainOpts {
      unsigned lk = 128;
      uint32_t n = 10;
      std::string hash = "SHA-256";
      std::string seed_hex;
      unsigned cid = 0;
      uint32_t wn = 1200;
      uint32_t tow = 0;
      bool verify = false;
};

struct ReportOpts {
      bool figures = false;
      bool include_sphincs = false;
      std::string out_dir;
};

std::string airtime_cell(const feas::UseCaseFit& f) {
   return f.mode == feas::Mode::Infeasible ? "-" : std::to_string(f.air_time_s);
}

struct AnalyzeRow {
      std::vector<std::string> cells;
      feas::Mode mode = feas::Mode::Infeasible;
};

AnalyzeRow analyze_row(const sig::SchemeCharacterization& ch, const tesla::TeslaParams& tp) {
   const auto r = feas::fit_report(ch, tp);
   std::string claim = "-";
   std::string agreement = "-";
   if(r.stated_pkr_blocks || r.stated_kroot_blocks) {
      claim.clear();
      bool agree = true;
      if(r.stated_pkr_blocks) {
         claim += "pkr=" + std::to_string(*r.stated_pkr_blocks);
         agree = agree && *r.stated_pkr_blocks == r.pkr.formula_blocks;
      }
      if(r.stated_kroot_blocks) {
         claim += std::string(claim.empty() ? "" : ";") + "kroot=" + std::to_string(*r.stated_kroot_blocks);
         agree = agree && *r.stated_kroot_blocks == r.kroot.formula_blocks;
      }
      agreement = agree ? "yes" : "FLAGGED";
   }
   std::string pk = std::to_string(ch.pk_bits);
   if(ch.flagged) {
      pk += "*";
   }
   AnalyzeRow row;
   row.mode = r.mode;
   row.cells = {ch.name,
                pk,
                std::to_string(ch.sig_bits),
                std::to_string(r.pkr.formula_blocks),
                std::to_string(r.kroot.formula_blocks),
                std::string(feas::to_string(r.mode)),
                airtime_cell(r.pkr) + "/" + airtime_cell(r.kroot),
                claim,
                agreement};
   return row;
}

const std::vector<std::string> kAnalyzeHeader = {
   "scheme", "pk_bits", "sig_bits", "pkr_blocks", "kroot_blocks", "mode", "airtime_s", "paper_claim", "agreement"};

void print_table(std::ostream& out, const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
   std::vector<size_t> width(header.size());
   for(size_t i = 0; i < header.size(); ++i) {
      width[i] = header[i].size();
      for(const auto& r : rows) {
         width[i] = std::max(width[i], r[i].size());
      }
   }
   auto line = [&](const std::vector<std::string>& cells) {
      for(size_t i = 0; i < cells.size(); ++i) {
         if(i + 1 < cells.size()) {
            out << std::left << std::setw(static_cast<int>(width[i]) + 2) << cells[i];
         } else {
            out << cells[i];
         }
      }
      out << "\n";
   };
   line(header);
   for(const auto& r : rows) {
      line(r);
   }
}

void write_csv(std::ostream& out, const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
   auto line = [&](const std::vector<std::string>& cells) {
      for(size_t i = 0; i < cells.size(); ++i) {
         out << (i ? "," : "") << cells[i];
      }
      out << "\n";
   };
   line(header);
   for(const auto& r : rows) {
      line(r);
   }
}

std::string fmt3(double v) {
   std::ostringstream s;
   s << std::fixed << std::setprecision(3) << v;
   return s.str();
}

int do_analyze(const AnalyzeOpts& o, std::ostream& out, std::ostream& err) {
   tesla::TeslaParams tp;
   tp.key_bits = o.lk;
   tp.tag_bits = o.lt;
   tp.validate();

   std::vector<sig::SchemeCharacterization> schemes;
   if(o.all) {
      schemes = sig::builtin_characterizations();
   }
   for(const auto& name : o.schemes) {
      schemes.push_back(sig::characterize(name));
   }
   if(schemes.empty()) {
      err << "analyze: give --scheme <name> or --all\n";
      return kExitUsage;
   }

   std::vector<std::vector<std::string>> rows;
   bool infeasible = false;
   for(const auto& ch : schemes) {
      auto row = analyze_row(ch, tp);
      const feas::Mode allowed = o.extended ? feas::Mode::Extended : feas::Mode::Nominal;
      infeasible = infeasible || static_cast<int>(row.mode) > static_cast<int>(allowed);
      rows.push_back(std::move(row.cells));
   }
   out << "# l_K=" << tp.key_bits << " l_T=" << tp.tag_bits << " n_t=" << tp.tags_per_mack()
       << " blocks are formula counts (l_DP/104, l_DK/104); airtime is on-air blocks x 30 s, pkr/kroot\n";
   print_table(out, kAnalyzeHeader, rows);
   for(const auto& ch : schemes) {
      if(ch.flagged) {
         out << "* " << ch.name << ": printed as " << ch.pk_printed << "; " << ch.note << "\n";
      }
   }

   if(o.all) {
      out << "\nratios\n";
      std::vector<std::vector<std::string>> ratios;
      for(const auto& r : feas::ratio_report()) {
         ratios.push_back({r.label,
                           std::to_string(r.numerator_bits) + "/" + std::to_string(r.baseline_bits),
                           fmt3(r.ratio),
                           r.stated_phrase.empty() ? "-" : r.stated_phrase,
                           r.stated_value ? (r.agree ? "yes" : "FLAGGED") : "-"});
      }
      print_table(out, {"ratio", "bits", "value", "stated", "agreement"}, ratios);

      out << "\nclaims\n";
      std::vector<std::vector<std::string>> claims;
      for(const auto& c : feas::claims_ledger()) {
         claims.push_back({c.id, c.stated_value, c.derived_value, c.agree ? "yes" : "FLAGGED", c.basis});
      }
      print_table(out, {"claim", "stated", "derived", "agreement", "basis"}, claims);
   }

   if(!o.csv.empty()) {
      std::ofstream f(o.csv);
      if(!f) {
         err << "analyze: cannot write " << o.csv << "\n";
         return kExitUsage;
      }
      write_csv(f, kAnalyzeHeader, rows);
   }
   if(o.strict && infeasible) {
      err << "analyze: at least one scheme does not fit " << (o.extended ? "extended" : "nominal") << " mode\n";
      return kExitInfeasible;
   }
   return kExitOk;
}

int do_simulate(const SimulateOpts& o, std::ostream& out, std::ostream& err) {
   sim::ScenarioConfig base = sim::load_scenario(o.scenario);
   if(o.seed) {
      base.seed = *o.seed;
   }
   base.validate();
   const unsigned runs = std::max(1u, o.runs);
   std::vector<sim::RunResult> results(runs);
   std::vector<sim::AuditReport> audits(runs);
   std::atomic<unsigned> next{0};
   auto worker = [&]() {
      for(unsigned i = next++; i < runs; i = next++) {
         sim::ScenarioConfig cfg = base;
         cfg.seed = base.seed + i;
         results[i] = sim::run(cfg);
         audits[i] = sim::audit(results[i].log, cfg.delay);
      }
   };
   const unsigned jobs = std::clamp(o.jobs, 1u, runs);
   std::vector<std::thread> pool;
   for(unsigned j = 1; j < jobs; ++j) {
      pool.emplace_back(worker);
   }
   worker();
   for(auto& t : pool) {
      t.join();
   }

   std::vector<sim::Summary> summaries;
   for(const auto& r : results) {
      summaries.push_back(r.summary);
   }
   if(!o.out_dir.empty()) {
      std::filesystem::create_directories(o.out_dir);
      for(const auto& r : results) {
         std::ofstream f(std::filesystem::path(o.out_dir) / ("events-" + std::to_string(r.summary.seed) + ".tsv"));
         r.log.write_tsv(f);
      }
      std::ofstream f(std::filesystem::path(o.out_dir) / "summary.csv");
      sim::write_summary_csv(f, summaries);
   }
   if(runs == 1) {
      for(const auto& [k, v] : summaries[0].fields()) {
         out << k << "=" << v << "\n";
      }
   } else {
      sim::write_summary_csv(out, summaries);
   }
   bool audit_ok = true;
   for(unsigned i = 0; i < runs; ++i) {
      for(const auto& v : audits[i].violations) {
         err << "audit seed " << results[i].summary.seed << ": " << v << "\n";
      }
      audit_ok = audit_ok && audits[i].ok;
   }
   out << "audit=" << (audit_ok ? "ok" : "violations") << "\n";
   return audit_ok ? kExitOk : kExitUsage;
}

int do_chain(const ChainOpts& o, std::istream& in, std::ostream& out) {
   if(o.verify) {
      const auto dump = tesla::read_chain_dump(in);
      const long broken = tesla::verify_chain_dump(dump);
      if(broken < 0) {
         out << "OK " << dump.keys.size() << " keys\n";
         return kExitOk;
      }
      out << "BROKEN at key " << broken << "\n";
      return kExitUsage;
   }
   tesla::TeslaParams p;
   p.key_bits = o.lk;
   p.hash = parse_hash_function(o.hash);
   p.chain_id = static_cast<uint8_t>(o.cid);
   p.chain_length = o.n;
   p.start_time = bitgrid::GstTime{o.wn, o.tow};
   if(o.cid > 3) {
      throw Error(ErrorCode::InvalidParams, "CID is a 2-bit field");
   }
   p.validate();
   const Bytes seed = o.seed_hex.empty() ? crypto::expand("osnma-lab-chain-seed", Bytes{}, o.lk / 8)
                                         : bitgrid::from_hex(o.seed_hex);
   const auto chain = tesla::TeslaChain::generate(p, bitgrid::BitString::from_bytes(seed));
   tesla::write_chain_dump(out, chain);
   return kExitOk;
}

int do_report(const ReportOpts& o, std::ostream& out) {
   if(!o.figures) {
      sig::export_csv(out);
      return kExitOk;
   }
   const auto f8 = feas::figure8_rows();
   const auto f9 = feas::figure9_rows(o.include_sphincs);
   if(o.out_dir.empty()) {
      out << "# figure8\n";
      feas::write_figure_csv(out, f8);
      out << "# figure9\n";
      feas::write_figure_csv(out, f9);
      return kExitOk;
   }
   std::filesystem::create_directories(o.out_dir);
   std::ofstream a(std::filesystem::path(o.out_dir) / "figure8.csv");
   feas::write_figure_csv(a, f8);
   std::ofstream b(std::filesystem::path(o.out_dir) / "figure9.csv");
   feas::write_figure_csv(b, f9);
   out << "wrote " << (std::filesystem::path(o.out_dir) / "figure8.csv").string() << " and figure9.csv\n";
   return kExitOk;
}

int do_vectors(const std::string& dir_opt, std::ostream& out) {
   const std::filesystem::path dir = dir_opt.empty() ? vectors_dir() : std::filesystem::path(dir_opt);
   const auto checks = check_vectors(dir);
   bool ok = !checks.empty();
   for(const auto& c : checks) {
      out << (c.ok ? "OK   " : "FAIL ") << c.file << (c.detail.empty() ? "" : ": " + c.detail) << "\n";
      ok = ok && c.ok;
   }
   if(checks.empty()) {
      out << "no vector files in " << dir.string() << "\n";
   }
   return ok ? kExitOk : kExitUsage;
}

int exit_for(ErrorCode c) {
   switch(c) {
      case ErrorCode::UnknownScheme:
         return kExitUnknownScheme;
      case ErrorCode::ConfigInvalid:
      case ErrorCode::InvalidParams:
      case ErrorCode::BadSeedLength:
      case ErrorCode::BadHex:
      case ErrorCode::UnsupportedHash:
      case ErrorCode::UnsupportedMacFunction:
      case ErrorCode::UnassignedNpkt:
         return kExitBadConfig;
      default:
         return kExitUsage;
   }
}

}  // namespace

int run_cli(std::span<const std::string> args, std::istream& in, std::ostream& out, std::ostream& err) {
   CLI::App app{"OSNMA lab: feasibility analysis, TESLA chain tooling and receiver simulation", "osnma_lab"};
   app.require_subcommand(1);

   AnalyzeOpts ao;
   auto* analyze = app.add_subcommand("analyze", "Fit signature schemes into DSM-PKR and DSM-KROOT");
   auto* scheme_opt = analyze->add_option("--scheme", ao.schemes, "Scheme name (repeatable)");
   analyze->add_flag("--all", ao.all, "Every built-in scheme plus ratios and the claims ledger")->excludes(scheme_opt);
   analyze->add_option("--lk", ao.lk, "TESLA key length in bits");
   analyze->add_option("--lt", ao.lt, "Tag length in bits");
   analyze->add_flag("--extended", ao.extended, "Allow the 7-bit BID mode for --strict");
   analyze->add_flag("--strict", ao.strict, "Exit 2 when a scheme does not fit the allowed mode");
   analyze->add_option("--csv", ao.csv, "Also write the table as CSV");

   SimulateOpts so;
   auto* simulate = app.add_subcommand("simulate", "Run a scenario file");
   simulate->add_option("--scenario", so.scenario, "Scenario file (key=value)")->required();
   simulate->add_option("--seed", so.seed, "Override the scenario seed");
   simulate->add_option("--out", so.out_dir, "Write events-<seed>.tsv and summary.csv here");
   simulate->add_option("--runs", so.runs, "Seeds seed..seed+runs-1")->check(CLI::Range(1u, 100000u));
   simulate->add_option("--jobs", so.jobs, "Worker threads across seeds")->check(CLI::Range(1u, 256u));

   ChainOpts co;
   auto* chain = app.add_subcommand("chain", "Generate or verify a TESLA chain dump");
   chain->add_option("--lk", co.lk, "Key length in bits");
   chain->add_option("--n", co.n, "Chain length N");
   chain->add_option("--hash", co.hash, "SHA-256 or SHA3-256");
   chain->add_option("--seed-hex", co.seed_hex, "Seed key K_N in hex");
   chain->add_option("--cid", co.cid, "Chain ID 0..3");
   chain->add_option("--wn", co.wn, "Start week number");
   chain->add_option("--tow", co.tow, "Start time of week, seconds");
   chain->add_flag("--verify", co.verify, "Read a dump from stdin and check every link");

   std::string vdir;
   auto* vectors = app.add_subcommand("vectors", "Replay the golden vectors");
   vectors->add_option("--dir", vdir, "Vector directory (default: OSNMA_LAB_VECTORS or the bundled set)");

   ReportOpts ro;
   auto* report = app.add_subcommand("report", "Scheme table or figure plot data");
   report->add_flag("--figures", ro.figures, "Public-key and signature size CSVs");
   report->add_flag("--include-sphincs", ro.include_sphincs, "Keep SPHINCS+ in the signature figure");
   report->add_option("--out", ro.out_dir, "Write figure8.csv and figure9.csv here");

   std::vector<std::string> reversed(args.rbegin(), args.rend());
   try {
      app.parse(reversed);
   } catch(const CLI::ParseError& e) {
      const int code = app.exit(e, out, err);
      return code == 0 ? kExitOk : kExitUsage;
   }

   try {
      if(analyze->parsed()) {
         return do_analyze(ao, out, err);
      }
      if(simulate->parsed()) {
         return do_simulate(so, out, err);
      }
      if(chain->parsed()) {
         return do_chain(co, in, out);
      }
      if(vectors->parsed()) {
         return do_vectors(vdir, out);
      }
      if(report->parsed()) {
         return do_report(ro, out);
      }
   } catch(const Error& e) {
      err << e.what() << "\n";
      return exit_for(e.code());
   } catch(const std::exception& e) {
      err << e.what() << "\n";
      return kExitUsage;
   }
   return kExitUsage;
}

}  // namespace osnma::cli
