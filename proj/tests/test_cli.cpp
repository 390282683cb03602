#include <doctest.h>

#include <osnma/cli.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace osnma::cli;

namespace {

struct Outcome {
      int code = -1;
      std::string out;
      std::string err;
};

Outcome call(std::vector<std::string> args, const std::string& input = "") {
   std::istringstream in(input);
   std::ostringstream out, err;
   Outcome o;
   o.code = run_cli(args, in, out, err);
   o.out = out.str();
   o.err = err.str();
   return o;
}

bool has(const std::string& text, const std::string& needle) {
   return text.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("golden vectors") {
   const auto checks = check_vectors(OSNMA_TEST_VECTORS);
   CHECK(checks.size() == 9);
   for(const auto& c : checks) {
      CAPTURE(c.file);
      CAPTURE(c.detail);
      CHECK(c.ok);
   }
   CHECK(check_vectors("/nonexistent").empty());
   const auto o = call({"vectors", "--dir", OSNMA_TEST_VECTORS});
   CHECK(o.code == kExitOk);
   CHECK(has(o.out, "chain_sha256.txt"));
}

TEST_CASE("analyze") {
   auto o = call({"analyze", "--all"});
   CHECK(o.code == kExitOk);
   CHECK(has(o.out, "Falcon-512"));
   CHECK(has(o.out, "5.045"));
   CHECK(has(o.out, "238.061"));
   CHECK(has(o.out, "13.388"));
   CHECK(has(o.out, "falcon_pkr_blocks"));

   const auto csv = std::filesystem::temp_directory_path() / "osnma_cli_analyze.csv";
   o = call({"analyze", "--scheme", "ECDSA-P256", "--csv", csv.string()});
   CHECK(o.code == kExitOk);
   std::ifstream f(csv);
   std::string header;
   std::getline(f, header);
   CHECK(header == "scheme,pk_bits,sig_bits,pkr_blocks,kroot_blocks,mode,airtime_s,paper_claim,agreement");
   std::filesystem::remove(csv);

   CHECK(call({"analyze", "--scheme", "RSA"}).code == kExitUnknownScheme);
   CHECK(call({"analyze", "--scheme", "Falcon-512", "--strict"}).code == kExitInfeasible);
   CHECK(call({"analyze", "--scheme", "Falcon-512", "--strict", "--extended"}).code == kExitOk);
   CHECK(call({"analyze", "--scheme", "SPHINCS+-128s", "--strict", "--extended"}).code == kExitInfeasible);
   CHECK(call({"analyze", "--scheme", "P521", "--strict"}).code == kExitOk);
   CHECK(call({"analyze", "--all", "--lk", "64"}).code == kExitBadConfig);
}

TEST_CASE("chain") {
   auto o = call({"chain", "--lk", "128", "--n", "10", "--seed-hex", "000102030405060708090a0b0c0d0e0f"});
   CHECK(o.code == kExitOk);
   const std::string dump = o.out;
   auto v = call({"chain", "--verify"}, dump);
   CHECK(v.code == kExitOk);
   CHECK(has(v.out, "OK 11 keys"));

   std::string broken = dump;
   const auto line4 = [&] {
      size_t pos = 0;
      for(int i = 0; i < 4; ++i) {
         pos = broken.find('\n', pos) + 1;
      }
      return pos;
   }();
   broken[line4] = broken[line4] == '0' ? '1' : '0';
   v = call({"chain", "--verify"}, broken);
   CHECK(v.code == kExitUsage);
   CHECK(has(v.out, "BROKEN at key"));

   CHECK(call({"chain", "--seed-hex", "0011"}).code == kExitBadConfig);
   CHECK(call({"chain", "--lk", "64"}).code == kExitBadConfig);
   CHECK(call({"chain", "--hash", "MD5"}).code == kExitBadConfig);
}

TEST_CASE("simulate and report") {
   const auto dir = std::filesystem::temp_directory_path() / "osnma_cli_test";
   std::filesystem::remove_all(dir);
   const std::string scen = std::string(OSNMA_TEST_SCENARIOS) + "/nominal.scenario";
   auto o = call({"simulate", "--scenario", scen, "--runs", "3", "--jobs", "2", "--out", dir.string()});
   CHECK(o.code == kExitOk);
   CHECK(has(o.out, "audit=ok"));
   CHECK(std::filesystem::exists(dir / "summary.csv"));
   CHECK(std::filesystem::exists(dir / "events-1.tsv"));
   CHECK(std::filesystem::exists(dir / "events-3.tsv"));

   // Parallel and sequential runs give identical logs.
   const auto seq = dir / "seq";
   CHECK(call({"simulate", "--scenario", scen, "--seed", "3", "--out", seq.string()}).code == kExitOk);
   std::ifstream a(dir / "events-3.tsv"), b(seq / "events-3.tsv");
   std::stringstream sa, sb;
   sa << a.rdbuf();
   sb << b.rdbuf();
   CHECK(sa.str() == sb.str());
   CHECK_FALSE(sa.str().empty());

   CHECK(call({"simulate", "--scenario", "/nonexistent.scenario"}).code == kExitBadConfig);
   CHECK(call({"simulate"}).code == kExitUsage);

   o = call({"report", "--figures", "--out", dir.string()});
   CHECK(o.code == kExitOk);
   CHECK(std::filesystem::exists(dir / "figure8.csv"));
   CHECK(std::filesystem::exists(dir / "figure9.csv"));
   std::filesystem::remove_all(dir);
}

TEST_CASE("usage errors") {
   CHECK(call({}).code == kExitUsage);
   CHECK(call({"frobnicate"}).code == kExitUsage);
   CHECK(call({"analyze", "--bogus"}).code == kExitUsage);
   CHECK(call({"--help"}).code == kExitOk);
}
