#include "rum/vector_file.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <vector>

namespace rum {

namespace {

class LineReader {
 public:
  LineReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  // Next non-blank, non-comment line split into tokens; false at end of input.
  bool next(std::vector<std::string>& tokens) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      const auto first = line.find_first_not_of(" \t");
      if (first == std::string::npos || line[first] == '#') continue;
      text_ = line;
      std::istringstream ss(line);
      tokens.clear();
      for (std::string t; ss >> t;) tokens.push_back(t);
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& why) const {
    throw ValidationError(source_ + ":" + std::to_string(line_no_) + ": " + why + " [" + text_ + "]");
  }

  [[noreturn]] void fail_at_end(const std::string& why) const {
    throw ValidationError(source_ + ":" + std::to_string(line_no_) + ": " + why);
  }

  void expect_header(const char* magic) {
    std::vector<std::string> t;
    if (!next(t)) fail_at_end(std::string("empty file, expected '") + magic + " 1'");
    if (t.size() != 2 || t[0] != magic) fail(std::string("expected header '") + magic + " 1'");
    if (t[1] != "1") fail("unsupported format version " + t[1]);
  }

  int read_n() {
    std::vector<std::string> t;
    if (!next(t)) fail_at_end("missing 'n' line");
    if (t.size() != 2 || t[0] != "n") fail("expected 'n <alternatives>'");
    const long n = parse_int(t[1]);
    if (n < 1 || n > Lattice::kMaxAlternatives) fail("alternative count out of range");
    return static_cast<int>(n);
  }

  long parse_int(const std::string& s) const {
    char* end = nullptr;
    errno = 0;
    const long v = std::strtol(s.c_str(), &end, 10);
    if (s.empty() || *end != '\0' || errno) fail("not an integer: " + s);
    return v;
  }

  Subset parse_subset(const std::string& s, int n) const {
    if (s.size() < 3 || s[0] != '0' || (s[1] != 'x' && s[1] != 'X')) fail("subset must be hex like 0x7: " + s);
    char* end = nullptr;
    errno = 0;
    const unsigned long v = std::strtoul(s.c_str() + 2, &end, 16);
    if (*end != '\0' || errno) fail("malformed subset " + s);
    if (v == 0 || v >= (1ul << n)) fail("subset " + s + " is empty or outside the ground set");
    return Subset{static_cast<std::uint32_t>(v)};
  }

  double parse_value(const std::string& s) const {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || *end != '\0') fail("malformed value " + s);
    if (!std::isfinite(v)) fail("value is not finite: " + s);
    return v;
  }

 private:
  std::istream& in_;
  std::string source_;
  std::string text_;
  std::size_t line_no_ = 0;
};

ObservationMask parse_mask_tokens(LineReader& reader, const std::vector<std::string>& t, std::size_t first, int n) {
  if (t.size() == first + 1 && t[first] == "full") return ObservationMask::full(n);
  if (t.size() < first + 1 || t[first] != "sets") reader.fail("mask must be 'full' or 'sets <hex>...'");
  ObservationMask mask = ObservationMask::none(n);
  for (std::size_t i = first + 1; i < t.size(); ++i) {
    const Subset d = reader.parse_subset(t[i], n);
    if (mask.observed(d)) reader.fail("set " + t[i] + " listed twice");
    mask.set(d, true);
  }
  return mask;
}

std::ifstream open(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  return in;
}

}  // namespace

std::string format_value(double v, FloatFormat format) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format == FloatFormat::kHex ? "%a" : "%.17g", v);
  return buf;
}

VectorFile read_vector_file(std::istream& in, const std::string& source) {
  LineReader reader(in, source);
  reader.expect_header("rumvec");
  VectorFile out;
  out.n = reader.read_n();
  std::vector<std::string> t;
  if (!reader.next(t) || t.empty() || t[0] != "mask") reader.fail_at_end("missing 'mask' line");
  out.mask = parse_mask_tokens(reader, t, 1, out.n);

  const Lattice lat(out.n);
  out.values = Vector<double>::Constant(static_cast<Eigen::Index>(lat.pair_count()),
                                        std::numeric_limits<double>::quiet_NaN());
  std::vector<bool> seen(lat.pair_count(), false);
  while (reader.next(t)) {
    if (t.size() != 3) reader.fail("record must be '<subset> <alternative> <value>'");
    const Subset d = reader.parse_subset(t[0], out.n);
    const long x = reader.parse_int(t[1]);
    if (x < 0 || x >= out.n || !d.contains(static_cast<int>(x))) {
      reader.fail("alternative " + t[1] + " is not a member of " + t[0]);
    }
    const std::size_t idx = lat.dense_index({d, static_cast<int>(x)});
    if (seen[idx]) reader.fail("duplicate record for pair (" + t[0] + ", " + t[1] + ")");
    seen[idx] = true;
    out.values[static_cast<Eigen::Index>(idx)] = reader.parse_value(t[2]);
  }
  for (Subset d : out.mask.sets()) {
    for (int k = 0; k < d.size(); ++k) {
      if (!seen[lat.offset(d) + static_cast<std::size_t>(k)]) {
        reader.fail_at_end("observed set " + to_hex(d) + " is missing records");
      }
    }
  }
  return out;
}

VectorFile read_vector_file_path(const std::string& path) {
  auto in = open(path);
  return read_vector_file(in, path);
}

void write_vector_file(std::ostream& out, const Lattice& lat, const ObservationMask& mask, const Vector<double>& values,
                       FloatFormat format) {
  detail::check_pair_length(lat, values);
  out << "rumvec 1\n" << "n " << lat.alternatives() << "\n";
  if (mask.is_full()) {
    out << "mask full\n";
  } else {
    out << "mask sets";
    for (Subset d : mask.sets()) out << ' ' << to_hex(d);
    out << '\n';
  }
  for (std::uint32_t bits = 1; bits < lat.vertex_count(); ++bits) {
    const Subset d{bits};
    if (!mask.observed(d)) continue;
    for (int x = 0; x < lat.alternatives(); ++x) {
      if (!d.contains(x)) continue;
      out << to_hex(d) << ' ' << x << ' ' << format_value(values[static_cast<Eigen::Index>(lat.dense_index({d, x}))], format)
          << '\n';
    }
  }
}

ObservationMask read_mask_file(std::istream& in, const std::string& source) {
  LineReader reader(in, source);
  reader.expect_header("rummask");
  const int n = reader.read_n();
  ObservationMask mask = ObservationMask::none(n);
  std::vector<std::string> t;
  bool any = false;
  while (reader.next(t)) {
    if (t.size() != 1) reader.fail("expected one subset per line");
    if (t[0] == "full") {
      if (any || reader.next(t)) reader.fail("'full' must be the only entry");
      return ObservationMask::full(n);
    }
    const Subset d = reader.parse_subset(t[0], n);
    if (mask.observed(d)) reader.fail("set " + t[0] + " listed twice");
    mask.set(d, true);
    any = true;
  }
  return mask;
}

ObservationMask read_mask_file_path(const std::string& path) {
  auto in = open(path);
  return read_mask_file(in, path);
}

void write_mask_file(std::ostream& out, const ObservationMask& mask) {
  out << "rummask 1\nn " << mask.alternatives() << '\n';
  if (mask.is_full()) {
    out << "full\n";
    return;
  }
  for (Subset d : mask.sets()) out << to_hex(d) << '\n';
}

}  // namespace rum
