#pragma once

#include <cstdint>
#include <filesystem>

#include "qstrip/common.hpp"
#include "qstrip/mesh.hpp"

namespace qstrip {

struct SnapshotMeta {
  std::uint32_t J = 0;
  std::uint32_t K = 0;
  std::uint32_t M = 0;
  std::uint32_t m = 0;
};

inline constexpr std::uint32_t snapshot_version = 1;
inline constexpr std::size_t snapshot_header_bytes = 24;

/// "QSTR", u32 version, u32 J, K, M, m, then (J+1)(K+1) little-endian (re, im)
/// f64 pairs in row-major order.
void write_snapshot_raw(const std::filesystem::path& path, const Field& psi, const SnapshotMeta& meta);

struct RawSnapshot {
  SnapshotMeta meta;
  Field psi;
};

RawSnapshot read_snapshot_raw(const std::filesystem::path& path);

/// Header x,y,re,im,abs and one row per node, j outer.
void write_snapshot_csv(const std::filesystem::path& path, const Field& psi, const AxisMesh& x, const AxisMesh& y);

}  // namespace qstrip
