#pragma once

#include <filesystem>
#include <iosfwd>

#include "sphar/simulate.hpp"

namespace sphar {

// CSV panel layout:
//
//   # sphar-panel v1
//   # L=<L>
//   # N=<N>
//   # seed=<seed>                      (only when metadata is present)
//   # params={"g":..,"alpha":..,...}   (only when metadata is present)
//   ell,m,t,value
//   1,-1,0,<value>
//   ...
//
// Rows run over ell, then m, then t = 0..N; values use 17 significant digits.
// The reader accepts rows in any order but requires every cell exactly once.
void write_panel_csv(const CoefficientPanel& panel, std::ostream& out);
CoefficientPanel read_panel_csv(std::istream& in);

// Binary layout (little-endian): magic "SPHARPNL", u32 version = 1,
// i32 L, i32 N, u8 has_meta, [u64 seed, f64 g, alpha, h, gamma], then the
// raw f64 coefficient array in storage order.
void write_panel_binary(const CoefficientPanel& panel, std::ostream& out);
CoefficientPanel read_panel_binary(std::istream& in);

/// Dispatch on extension: ".bin" is binary, anything else CSV. Throws IoError.
void write_panel(const CoefficientPanel& panel, const std::filesystem::path& path);
CoefficientPanel read_panel(const std::filesystem::path& path);

}  // namespace sphar
