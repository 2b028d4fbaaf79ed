#pragma once

#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "superdyn/errors.hpp"
#include "superdyn/numerics.hpp"
#include "superdyn/potential.hpp"

namespace superdyn::cli {

inline constexpr const char* kToolName = "superdyn";
inline constexpr const char* kToolVersion = "0.1.0";

/// Exit codes of the command-line runner.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitNumericalGuard = 2;
inline constexpr int kExitUsage = 64;

const std::vector<std::string>& subcommands();

/// Fully populated default configuration of a subcommand.
nlohmann::json default_config(const std::string& subcommand);

/// Overlays `user` on the defaults. Keys absent from the defaults raise UnknownKey,
/// type mismatches raise ParseError. Potentials are validated by their own schema.
/// The result is a fixed point: resolve_config(s, resolve_config(s, x)) == resolve_config(s, x).
nlohmann::json resolve_config(const std::string& subcommand, const nlohmann::json& user);

/// Reads a JSON config file and resolves it.
nlohmann::json parse_config(const std::filesystem::path& path, const std::string& subcommand);

/// "quartic:λ", "harmonic:ω", "cubic:c", "free", "poly:c0,c1,...", "coulomb:e2" → potential JSON.
nlohmann::json potential_from_shorthand(const std::string& text);
/// Polynomial potential from its JSON form; throws InvalidArgument for Coulomb.
PolynomialPotential polynomial_from_json(const nlohmann::json& potential);

/// "re,im" or "re" → complex
cplx parse_complex(const std::string& text);

/// JC initial states: "e0", "g1", "coherent:α" (excited atom), "e:coherent:α",
/// "g:coherent:α", "x:coherent:α" and "xN" (atom in (|g⟩+|e⟩)/√2). α is "re" or "re,im".
MatrixXcd parse_jc_initial_state(const std::string& state, int n_max);

int exit_code_for(const Error& error);

/// Runs the command line. Output files go to --out-dir, else $SUPERDYN_OUT_DIR, else ".".
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Minimal CSV writer with a header row and RFC 4180 quoting.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  void row(const std::vector<double>& values);
  void row(const std::vector<std::string>& cells);

 private:
  std::ofstream out_;
  std::size_t width_;
};

}  // namespace superdyn::cli
