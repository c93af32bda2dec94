#include "oi/gf2.hpp"

#include "oi/error.hpp"

namespace oi::gf2 {

namespace {

// Forward elimination on augmented rows (bit 63 carries the right-hand side).
// Returns the rank and whether a 0 = 1 row appeared.
std::pair<std::size_t, bool> eliminate(std::vector<std::uint64_t>& rows, std::vector<std::uint8_t>& rhs) {
  std::size_t r = 0;
  for (unsigned bit = 0; bit < 64 && r < rows.size(); ++bit) {
    const std::uint64_t mask = std::uint64_t{1} << bit;
    std::size_t pivot = r;
    while (pivot < rows.size() && !(rows[pivot] & mask)) ++pivot;
    if (pivot == rows.size()) continue;
    std::swap(rows[r], rows[pivot]);
    std::swap(rhs[r], rhs[pivot]);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i != r && (rows[i] & mask)) {
        rows[i] ^= rows[r];
        rhs[i] ^= rhs[r];
      }
    }
    ++r;
  }
  bool inconsistent = false;
  for (std::size_t i = r; i < rows.size(); ++i) inconsistent = inconsistent || (rows[i] == 0 && rhs[i]);
  return {r, inconsistent};
}

}  // namespace

std::size_t rank(std::vector<std::uint64_t> rows) {
  std::vector<std::uint8_t> rhs(rows.size(), 0);
  return eliminate(rows, rhs).first;
}

std::uint64_t solution_count(std::vector<std::uint64_t> rows, std::vector<std::uint8_t> rhs, unsigned m) {
  require(m <= 63, ErrorKind::Argument, "GF(2) dimension limited to 63");
  require(rows.size() == rhs.size(), ErrorKind::Argument, "row and right-hand side counts differ");
  for (auto r : rows) require((r >> m) == 0, ErrorKind::Argument, "row has bits beyond the dimension");
  const auto [r, inconsistent] = eliminate(rows, rhs);
  if (inconsistent) return 0;
  return std::uint64_t{1} << (m - r);
}

}  // namespace oi::gf2
