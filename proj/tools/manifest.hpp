#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace kpi::cli {

/// Lowercase hex SHA-256 of bytes.
std::string sha256_hex(std::string_view bytes);

/// Version of this build, recorded in every manifest.
std::string code_version();

struct RunManifest {
  std::string kind;
  /// SHA-256 of the config file bytes.
  std::string digest;
  std::string code_version;
  std::uint64_t seed = 0;
  /// Output files relative to the result directory.
  std::vector<std::string> outputs;

  std::string to_json() const;
  static RunManifest from_json(const std::string& text);
};

/// A result directory holds rows from more than one config digest.
class MixedDigestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ResultSummary {
  std::string digest;
  std::size_t rows = 0;
  std::vector<std::string> files;
};

/// Reads the manifest and every .jsonl / .csv / .json output in dir and checks
/// that all rows carry one digest. Throws MixedDigestError otherwise.
ResultSummary aggregate_results(const std::filesystem::path& dir);

/// Throws MixedDigestError if dir already holds results of another digest.
void claim_result_dir(const std::filesystem::path& dir, const std::string& digest);

}  // namespace kpi::cli
