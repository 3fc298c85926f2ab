#include "kpi/snapshot_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "kpi/error.hpp"

namespace kpi {
namespace {

constexpr unsigned char kMagic[4] = {'K', 'P', 'I', '1'};
constexpr std::size_t kHeaderBytes = 4 + 4 + 4 + 8 + 8;

template <typename T>
void put_le(std::vector<unsigned char>& out, T value) {
  static_assert(sizeof(T) == 4 || sizeof(T) == 8);
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  const U bits = std::bit_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<unsigned char>(bits >> (8 * i)));
}

template <typename T>
T get_le(std::span<const unsigned char> in, std::size_t offset) {
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<U>(in[offset + i]) << (8 * i);
  return std::bit_cast<T>(bits);
}

}  // namespace

std::vector<unsigned char> encode_snapshot(const RealField2D& u) {
  const Grid& g = u.grid();
  std::vector<unsigned char> out;
  out.reserve(kHeaderBytes + 8 * g.size());
  for (unsigned char c : kMagic) out.push_back(c);
  put_le(out, static_cast<std::uint32_t>(g.nx()));
  put_le(out, static_cast<std::uint32_t>(g.ny()));
  put_le(out, g.lx());
  put_le(out, g.ly());
  for (double v : u.values()) put_le(out, v);
  return out;
}

RealField2D decode_snapshot(std::span<const unsigned char> bytes) {
  if (bytes.size() < kHeaderBytes || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw ContractError("snapshot: missing KPI1 header");
  }
  const auto nx = get_le<std::uint32_t>(bytes, 4);
  const auto ny = get_le<std::uint32_t>(bytes, 8);
  const auto lx = get_le<double>(bytes, 12);
  const auto ly = get_le<double>(bytes, 20);
  Grid g(nx, ny, lx, ly);
  if (bytes.size() != kHeaderBytes + 8 * g.size()) throw ContractError("snapshot: payload size does not match header");
  std::vector<double> values(g.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = get_le<double>(bytes, kHeaderBytes + 8 * i);
  return {g, std::move(values)};
}

void write_file_atomic(const std::filesystem::path& path, std::span<const unsigned char> bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
  write_file_atomic(path, std::span(reinterpret_cast<const unsigned char*>(text.data()), text.size()));
}

void write_snapshot(const std::filesystem::path& path, const RealField2D& u) {
  write_file_atomic(path, encode_snapshot(u));
}

RealField2D read_snapshot(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ContractError("cannot open snapshot " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return decode_snapshot(bytes);
}

}  // namespace kpi
