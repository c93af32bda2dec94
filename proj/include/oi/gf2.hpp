#pragma once

// Bit-packed linear algebra over GF(2) for vectors of at most 64 coordinates.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace oi::gf2 {

/// Rank of the row set.
std::size_t rank(std::vector<std::uint64_t> rows);

/// Number of s in GF(2)^m with <s, rows[i]> = rhs[i] for all i: zero when the
/// system is inconsistent, 2^(m - rank) otherwise.
std::uint64_t solution_count(std::vector<std::uint64_t> rows, std::vector<std::uint8_t> rhs, unsigned m);

inline unsigned dot(std::uint64_t a, std::uint64_t b) { return static_cast<unsigned>(__builtin_parityll(a & b)); }

}  // namespace oi::gf2
