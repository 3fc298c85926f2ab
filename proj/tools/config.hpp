#pragma once

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kpi/error.hpp"

namespace toml {
inline namespace v3 {
class node;
class table;
}
}  // namespace toml

namespace kpi::cli {

/// One table of an experiment file. Accessors throw ConfigError naming the
/// field and, when known, the line it sits on.
class Section {
 public:
  Section(const toml::table* table, std::string name, int line);

  const std::string& name() const noexcept { return name_; }
  bool present() const noexcept { return table_ != nullptr; }
  bool has(std::string_view key) const;

  std::int64_t integer(std::string_view key, std::optional<std::int64_t> fallback = std::nullopt) const;
  double number(std::string_view key, std::optional<double> fallback = std::nullopt) const;
  bool boolean(std::string_view key, std::optional<bool> fallback = std::nullopt) const;
  std::string string(std::string_view key, std::optional<std::string> fallback = std::nullopt) const;
  std::vector<double> numbers(std::string_view key, std::optional<std::vector<double>> fallback = std::nullopt) const;
  std::vector<int> integers(std::string_view key, std::optional<std::vector<int>> fallback = std::nullopt) const;
  std::vector<std::vector<int>> integer_rows(std::string_view key) const;

  /// Rejects keys outside `allowed`.
  void allow_only(std::initializer_list<std::string_view> allowed) const;

  [[noreturn]] void fail(std::string_view key, const std::string& message) const;

 private:
  const toml::node* node(std::string_view key) const;
  int line_of(std::string_view key) const;

  const toml::table* table_;
  std::string name_;
  int line_;
};

class Config {
 public:
  static Config load(const std::filesystem::path& path);
  static Config parse(std::string text, std::filesystem::path path = "config.toml");

  Config(Config&&) noexcept;
  Config& operator=(Config&&) noexcept;
  ~Config();

  const std::string& bytes() const noexcept { return bytes_; }
  const std::filesystem::path& path() const noexcept { return path_; }
  /// Directory that relative paths inside the file are resolved against.
  std::filesystem::path base_dir() const;

  /// Top-level keys.
  Section root() const;
  /// Table `name`; an absent table gives a Section with present() == false.
  Section section(std::string_view name) const;
  /// Entries of the array of tables [[name]]; empty when absent or a single [name] table.
  std::vector<Section> sections(std::string_view name) const;
  /// Rejects top-level keys and tables outside `allowed`.
  void allow_only(std::initializer_list<std::string_view> allowed) const;

 private:
  Config() = default;

  std::string bytes_;
  std::filesystem::path path_;
  std::unique_ptr<toml::table> table_;
};

}  // namespace kpi::cli
