#pragma once

// Text format for choice vectors and observation masks.
//
//   rumvec 1
//   n 3
//   mask full                  (or: mask sets 0x3 0x7 ...)
//   0x3 0 0.25                 (subset, alternative, value)
//
// Blank lines and lines starting with '#' are skipped. Values are read with
// strtod, so hex floats round-trip exactly. Records may appear in any order;
// every pair of an observed set must be present, pairs of unobserved sets may
// be omitted and read back as NaN.
//
// A mask file is "rummask 1", "n N", then one subset per line, or "full".

#include <iosfwd>
#include <string>

#include "rum/lattice.hpp"
#include "rum/operators.hpp"

namespace rum {

struct VectorFile {
  int n = 0;
  ObservationMask mask = ObservationMask::full(1);
  Vector<double> values;
};

enum class FloatFormat { kDecimal, kHex };

/// Throws ValidationError naming the offending line.
VectorFile read_vector_file(std::istream& in, const std::string& source = "input");
VectorFile read_vector_file_path(const std::string& path);

void write_vector_file(std::ostream& out, const Lattice& lat, const ObservationMask& mask, const Vector<double>& values,
                       FloatFormat format = FloatFormat::kDecimal);

ObservationMask read_mask_file(std::istream& in, const std::string& source = "mask");
ObservationMask read_mask_file_path(const std::string& path);
void write_mask_file(std::ostream& out, const ObservationMask& mask);

/// "%.17g" or "%a".
std::string format_value(double v, FloatFormat format = FloatFormat::kDecimal);

}  // namespace rum
