#pragma once

#include <string>

#include "tl1/sensing.hpp"

namespace tl1 {

// Flat binary problem format "TL1PRB1\n", version 1, little-endian:
//
//   bytes 0..7   magic "TL1PRB1\n"
//   u32          version (1)
//   u32          flags (bit 0: ground truth present)
//   u64 m, u64 n
//   f64[m*n]     A, row-major
//   f64[m]       y
//   if truth:    f64[n] x*, u64 support size, u64[] ascending indices
void save_problem(const Problem& prob, const std::string& path);
Problem load_problem(const std::string& path);

// Plain-text dump for debugging: one CSV block per section, prefixed by
// '# section' comment lines. Not meant to round-trip.
void save_problem_csv(const Problem& prob, const std::string& path);

// Solution vectors move as whitespace/newline-separated doubles.
void save_vector(const Vector& x, const std::string& path);
Vector load_vector(const std::string& path);

}  // namespace tl1
