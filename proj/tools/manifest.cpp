#include "manifest.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <fstream>
#include <json.hpp>
#include <sstream>

#ifndef KPI_VERSION
#define KPI_VERSION "unknown"
#endif

namespace kpi::cli {

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 computation failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 15]);
  }
  return out;
}

std::string code_version() { return KPI_VERSION; }

std::string RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["kind"] = kind;
  j["digest"] = digest;
  j["code_version"] = code_version;
  j["seed"] = seed;
  j["outputs"] = outputs;
  return j.dump(2) + "\n";
}

RunManifest RunManifest::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  RunManifest m;
  m.kind = j.at("kind").get<std::string>();
  m.digest = j.at("digest").get<std::string>();
  m.code_version = j.at("code_version").get<std::string>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.outputs = j.at("outputs").get<std::vector<std::string>>();
  return m;
}

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void expect(const std::string& digest, const std::string& found, const std::filesystem::path& file) {
  if (found != digest) {
    throw MixedDigestError("mixed digests in result directory: " + file.filename().string() + " carries " + found +
                           ", manifest has " + digest);
  }
}

}  // namespace

ResultSummary aggregate_results(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  if (!std::filesystem::exists(manifest_path)) throw MixedDigestError("no manifest.json in " + dir.string());
  ResultSummary s;
  s.digest = RunManifest::from_json(slurp(manifest_path)).digest;
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file() && e.path().filename() != "manifest.json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    const auto ext = f.extension().string();
    if (ext != ".jsonl" && ext != ".csv" && ext != ".json") continue;
    s.files.push_back(f.filename().string());
    std::istringstream in(slurp(f));
    std::string line;
    if (ext == ".json") {
      const auto j = nlohmann::json::parse(in.str());
      expect(s.digest, j.at("digest").get<std::string>(), f);
      ++s.rows;
      continue;
    }
    if (ext == ".csv") {
      std::getline(in, line);
      if (line.size() < 7 || line.substr(line.size() - 7) != ",digest") {
        throw MixedDigestError(f.filename().string() + " has no digest column");
      }
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        expect(s.digest, line.substr(line.rfind(',') + 1), f);
        ++s.rows;
      }
      continue;
    }
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      expect(s.digest, nlohmann::json::parse(line).at("digest").get<std::string>(), f);
      ++s.rows;
    }
  }
  return s;
}

void claim_result_dir(const std::filesystem::path& dir, const std::string& digest) {
  const auto manifest_path = dir / "manifest.json";
  if (!std::filesystem::exists(manifest_path)) return;
  const auto m = RunManifest::from_json(slurp(manifest_path));
  if (m.digest != digest) {
    throw MixedDigestError("output directory " + dir.string() + " already holds results of config digest " + m.digest);
  }
}

}  // namespace kpi::cli
