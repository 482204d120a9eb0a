#include "tcur/field_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <string>

#include "tcur/error.hpp"

namespace tcur::io {
namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFFu);
  out.write(reinterpret_cast<const char*>(b), 4);
}

void put_f64(std::ostream& out, double x) {
  const auto v = std::bit_cast<std::uint64_t>(x);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFFu);
  out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) fail(ErrorKind::kInvalidArgument, "read_field: truncated header");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) fail(ErrorKind::kInvalidArgument, "read_field: truncated samples");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return std::bit_cast<double>(v);
}

}  // namespace

void write_field(std::ostream& out, const ScalarField& f) {
  const PeriodicGrid& g = f.grid();
  out.write(kMagic, 4);
  put_u32(out, kFormatVersion);
  put_u32(out, static_cast<std::uint32_t>(g.dim()));
  put_u32(out, static_cast<std::uint32_t>(g.n()));
  put_u32(out, static_cast<std::uint32_t>(g.n_t()));
  for (double v : f.values()) put_f64(out, v);
  if (!out) fail(ErrorKind::kInternal, "write_field: stream failure");
}

ScalarField read_field(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
    fail(ErrorKind::kInvalidArgument, "read_field: bad magic");
  const auto version = get_u32(in);
  if (version != kFormatVersion)
    fail(ErrorKind::kInvalidArgument, "read_field: unsupported version " + std::to_string(version));
  const auto d = get_u32(in);
  const auto n = get_u32(in);
  const auto nt = get_u32(in);
  PeriodicGrid grid(static_cast<int>(d), static_cast<int>(n), static_cast<int>(nt));
  std::vector<double> values(grid.size());
  for (double& v : values) v = get_f64(in);
  return ScalarField(grid, std::move(values));
}

void write_fields(const std::filesystem::path& path, const std::vector<ScalarField>& channels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::kInvalidArgument, "write_fields: cannot open " + path.string());
  for (const auto& c : channels) write_field(out, c);
}

std::vector<ScalarField> read_fields(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kInvalidArgument, "read_fields: cannot open " + path.string());
  std::vector<ScalarField> out;
  while (in.peek() != std::char_traits<char>::eof()) out.push_back(read_field(in));
  return out;
}

void write_csv(std::ostream& out, const ScalarField& f) {
  const PeriodicGrid& g = f.grid();
  out << "t";
  for (int a = 0; a < g.dim(); ++a) out << ",x_" << (a + 1);
  out << ",value\n";
  out << std::setprecision(17);
  for (int k = 0; k < g.n_t(); ++k) {
    for (std::size_t i = 0; i < g.slice_size(); ++i) {
      out << g.time(k);
      const Point x = g.center(i);
      for (int a = 0; a < g.dim(); ++a) out << ',' << x[a];
      out << ',' << f(k, i) << '\n';
    }
  }
}

}  // namespace tcur::io
