#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "tcur/grid.hpp"

namespace tcur::io {

inline constexpr char kMagic[4] = {'T', 'C', 'U', 'R'};
inline constexpr std::uint32_t kFormatVersion = 1;

// Binary record: "TCUR", version, d, n, n_t (u32 LE), then n_t * n^d f64 LE
// samples in t-major, x_1-major order. Multi-channel files are concatenated records.
void write_field(std::ostream& out, const ScalarField& f);
ScalarField read_field(std::istream& in);

void write_fields(const std::filesystem::path& path, const std::vector<ScalarField>& channels);
std::vector<ScalarField> read_fields(const std::filesystem::path& path);

/// CSV with columns t, x_1, ..., x_d, value.
void write_csv(std::ostream& out, const ScalarField& f);

}  // namespace tcur::io
