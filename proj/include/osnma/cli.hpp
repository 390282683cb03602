#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace osnma::cli {

enum ExitCode : int {
   kExitOk = 0,
   kExitUsage = 1,
   kExitInfeasible = 2,
   kExitUnknownScheme = 3,
   kExitBadConfig = 4,
};

/// args excludes the program name. Reads stdin only for `chain --verify`.
int run_cli(std::span<const std::string> args, std::istream& in, std::ostream& out, std::ostream& err);

/// OSNMA_LAB_VECTORS when set, the bundled directory otherwise.
std::filesystem::path vectors_dir();

struct VectorCheck {
      std::string file;
      bool ok = false;
      std::string detail;
};

/// Replays every golden vector file found in dir against the library.
std::vector<VectorCheck> check_vectors(const std::filesystem::path& dir);

}  // namespace osnma::cli
