#include "config.hpp"

#include <fstream>
#include <sstream>
#include <toml.hpp>

namespace kpi::cli {

namespace {

int line_of_node(const toml::node& n) { return static_cast<int>(n.source().begin.line); }

std::string describe(const toml::node& n) {
  switch (n.type()) {
    case toml::node_type::string: return "a string";
    case toml::node_type::integer: return "an integer";
    case toml::node_type::floating_point: return "a number";
    case toml::node_type::boolean: return "a boolean";
    case toml::node_type::array: return "an array";
    case toml::node_type::table: return "a table";
    default: return "an unsupported value";
  }
}

std::optional<double> as_number(const toml::node& n) {
  if (auto v = n.value_exact<double>()) return *v;
  if (auto v = n.value_exact<std::int64_t>()) return static_cast<double>(*v);
  return std::nullopt;
}

}  // namespace

Section::Section(const toml::table* table, std::string name, int line)
    : table_(table), name_(std::move(name)), line_(line) {}

const toml::node* Section::node(std::string_view key) const {
  if (table_ == nullptr) return nullptr;
  return table_->get(key);
}

bool Section::has(std::string_view key) const { return node(key) != nullptr; }

int Section::line_of(std::string_view key) const {
  if (const auto* n = node(key)) return line_of_node(*n);
  return line_;
}

void Section::fail(std::string_view key, const std::string& message) const {
  const std::string field = name_.empty() ? std::string(key) : name_ + "." + std::string(key);
  throw ConfigError("field '" + field + "': " + message, line_of(key));
}

std::int64_t Section::integer(std::string_view key, std::optional<std::int64_t> fallback) const {
  const auto* n = node(key);
  if (n == nullptr) {
    if (fallback) return *fallback;
    fail(key, "required integer is missing");
  }
  if (auto v = n->value_exact<std::int64_t>()) return *v;
  fail(key, "expected an integer, got " + describe(*n));
}

double Section::number(std::string_view key, std::optional<double> fallback) const {
  const auto* n = node(key);
  if (n == nullptr) {
    if (fallback) return *fallback;
    fail(key, "required number is missing");
  }
  if (auto v = as_number(*n)) return *v;
  fail(key, "expected a number, got " + describe(*n));
}

bool Section::boolean(std::string_view key, std::optional<bool> fallback) const {
  const auto* n = node(key);
  if (n == nullptr) {
    if (fallback) return *fallback;
    fail(key, "required boolean is missing");
  }
  if (auto v = n->value_exact<bool>()) return *v;
  fail(key, "expected a boolean, got " + describe(*n));
}

std::string Section::string(std::string_view key, std::optional<std::string> fallback) const {
  const auto* n = node(key);
  if (n == nullptr) {
    if (fallback) return *fallback;
    fail(key, "required string is missing");
  }
  if (auto v = n->value_exact<std::string>()) return *v;
  fail(key, "expected a string, got " + describe(*n));
}

std::vector<double> Section::numbers(std::string_view key, std::optional<std::vector<double>> fallback) const {
  const auto* n = node(key);
  if (n == nullptr) {
    if (fallback) return *fallback;
    fail(key, "required array is missing");
  }
  const auto* arr = n->as_array();
  if (arr == nullptr) fail(key, "expected an array of numbers, got " + describe(*n));
  std::vector<double> out;
  for (const auto& e : *arr) {
    const auto v = as_number(e);
    if (!v) fail(key, "expected an array of numbers, found " + describe(e));
    out.push_back(*v);
  }
  return out;
}

std::vector<int> Section::integers(std::string_view key, std::optional<std::vector<int>> fallback) const {
  const auto* n = node(key);
  if (n == nullptr) {
    if (fallback) return *fallback;
    fail(key, "required array is missing");
  }
  const auto* arr = n->as_array();
  if (arr == nullptr) fail(key, "expected an array of integers, got " + describe(*n));
  std::vector<int> out;
  for (const auto& e : *arr) {
    const auto v = e.value_exact<std::int64_t>();
    if (!v) fail(key, "expected an array of integers, found " + describe(e));
    out.push_back(static_cast<int>(*v));
  }
  return out;
}

std::vector<std::vector<int>> Section::integer_rows(std::string_view key) const {
  const auto* n = node(key);
  if (n == nullptr || n->is_table()) return {};
  const auto* arr = n->as_array();
  if (arr == nullptr) fail(key, "expected an array of integer arrays, got " + describe(*n));
  std::vector<std::vector<int>> out;
  for (const auto& row : *arr) {
    const auto* r = row.as_array();
    if (r == nullptr) fail(key, "expected an array of integer arrays, found " + describe(row));
    std::vector<int> v;
    for (const auto& e : *r) {
      const auto x = e.value_exact<std::int64_t>();
      if (!x) fail(key, "expected integers inside each row, found " + describe(e));
      v.push_back(static_cast<int>(*x));
    }
    out.push_back(std::move(v));
  }
  return out;
}

void Section::allow_only(std::initializer_list<std::string_view> allowed) const {
  if (table_ == nullptr) return;
  for (const auto& [k, v] : *table_) {
    bool ok = false;
    for (auto a : allowed) ok = ok || k.str() == a;
    if (!ok) fail(k.str(), "unknown key");
  }
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

Config Config::parse(std::string text, std::filesystem::path path) {
  Config c;
  c.bytes_ = std::move(text);
  c.path_ = std::move(path);
  try {
    c.table_ = std::make_unique<toml::table>(toml::parse(c.bytes_, c.path_.string()));
  } catch (const toml::parse_error& e) {
    throw ConfigError(std::string(e.description()), static_cast<int>(e.source().begin.line));
  }
  return c;
}

Config::Config(Config&&) noexcept = default;
Config& Config::operator=(Config&&) noexcept = default;
Config::~Config() = default;

std::filesystem::path Config::base_dir() const {
  const auto p = path_.parent_path();
  return p.empty() ? std::filesystem::path(".") : p;
}

Section Config::root() const { return {table_.get(), "", 0}; }

Section Config::section(std::string_view name) const {
  const auto* n = table_->get(name);
  if (n == nullptr) return {nullptr, std::string(name), 0};
  const auto* t = n->as_table();
  if (t == nullptr) throw ConfigError("'" + std::string(name) + "' must be a table", line_of_node(*n));
  return {t, std::string(name), line_of_node(*n)};
}

std::vector<Section> Config::sections(std::string_view name) const {
  const auto* n = table_->get(name);
  if (n == nullptr || n->is_table()) return {};
  const auto* arr = n->as_array();
  if (arr == nullptr) throw ConfigError("'" + std::string(name) + "' must be an array of tables [[" + std::string(name) + "]]",
                                        line_of_node(*n));
  std::vector<Section> out;
  for (std::size_t i = 0; i < arr->size(); ++i) {
    const auto* t = (*arr)[i].as_table();
    if (t == nullptr) throw ConfigError("entries of '" + std::string(name) + "' must be tables", line_of_node((*arr)[i]));
    out.emplace_back(t, std::string(name) + "[" + std::to_string(i) + "]", line_of_node(*t));
  }
  return out;
}

void Config::allow_only(std::initializer_list<std::string_view> allowed) const {
  for (const auto& [k, v] : *table_) {
    bool ok = false;
    for (auto a : allowed) ok = ok || k.str() == a;
    if (!ok) throw ConfigError("unknown key or table '" + std::string(k.str()) + "'", line_of_node(v));
  }
}

}  // namespace kpi::cli
