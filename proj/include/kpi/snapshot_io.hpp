#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "kpi/fields.hpp"

namespace kpi {

/// Binary snapshot: "KPI1", nx, ny (u32 LE), lx, ly (f64 LE), then the nx*ny
/// physical values as f64 LE in x-major order.
void write_snapshot(const std::filesystem::path& path, const RealField2D& u);
RealField2D read_snapshot(const std::filesystem::path& path);

std::vector<unsigned char> encode_snapshot(const RealField2D& u);
RealField2D decode_snapshot(std::span<const unsigned char> bytes);

/// Writes to a sibling temporary and renames over the target.
void write_file_atomic(const std::filesystem::path& path, std::span<const unsigned char> bytes);
void write_file_atomic(const std::filesystem::path& path, const std::string& text);

}  // namespace kpi
