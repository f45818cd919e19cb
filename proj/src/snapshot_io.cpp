#include "qstrip/snapshot_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>

namespace qstrip {

namespace {

template <typename T>
void put(std::ostream& out, T value) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<char, sizeof(T)>>(value);
    std::reverse(bytes.begin(), bytes.end());
    out.write(bytes.data(), sizeof(T));
  } else {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
  }
}

template <typename T>
T get(std::istream& in) {
  std::array<char, sizeof(T)> bytes{};
  in.read(bytes.data(), sizeof(T));
  if (!in) throw ValidationError("truncated snapshot file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  return std::bit_cast<T>(bytes);
}

void ensure_parent(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
}

}  // namespace

void write_snapshot_raw(const std::filesystem::path& path, const Field& psi, const SnapshotMeta& meta) {
  require(psi.rows() == Index(meta.J) + 1 && psi.cols() == Index(meta.K) + 1, "snapshot shape does not match J, K");
  ensure_parent(path);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write("QSTR", 4);
  put(out, snapshot_version);
  put(out, meta.J);
  put(out, meta.K);
  put(out, meta.M);
  put(out, meta.m);
  for (Index j = 0; j < psi.rows(); ++j)
    for (Index k = 0; k < psi.cols(); ++k) {
      put(out, psi(j, k).real());
      put(out, psi(j, k).imag());
    }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

RawSnapshot read_snapshot_raw(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "QSTR", 4) != 0) throw ValidationError(path.string() + " is not a snapshot file");
  if (get<std::uint32_t>(in) != snapshot_version) throw ValidationError("unsupported snapshot version");
  RawSnapshot s;
  s.meta.J = get<std::uint32_t>(in);
  s.meta.K = get<std::uint32_t>(in);
  s.meta.M = get<std::uint32_t>(in);
  s.meta.m = get<std::uint32_t>(in);
  s.psi.resize(Index(s.meta.J) + 1, Index(s.meta.K) + 1);
  for (Index j = 0; j < s.psi.rows(); ++j)
    for (Index k = 0; k < s.psi.cols(); ++k) {
      const double re = get<double>(in);
      const double im = get<double>(in);
      s.psi(j, k) = Complex(re, im);
    }
  return s;
}

void write_snapshot_csv(const std::filesystem::path& path, const Field& psi, const AxisMesh& x, const AxisMesh& y) {
  require(psi.rows() == x.size() && psi.cols() == y.size(), "snapshot shape does not match the mesh");
  ensure_parent(path);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << std::setprecision(6) << "x,y,re,im,abs\n";
  for (Index j = 0; j < psi.rows(); ++j)
    for (Index k = 0; k < psi.cols(); ++k)
      out << x.node(j) << ',' << y.node(k) << ',' << psi(j, k).real() << ',' << psi(j, k).imag() << ','
          << std::abs(psi(j, k)) << '\n';
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace qstrip
