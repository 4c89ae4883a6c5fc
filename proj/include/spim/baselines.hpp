#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "spim/graph.hpp"

namespace spim {

/// Largest instance brute_force_maxcut accepts.
inline constexpr std::size_t kBruteForceMaxVertices = 24;

/// Single-pass Sahni-Gonzalez greedy. Vertices are placed in `order` (natural
/// order by default); each joins the side that cuts more weight to the vertices
/// already placed. Ties go to the smaller side, then to side A (+1).
/// Throws std::invalid_argument if `order` is not a permutation.
CutReport sahni_gonzalez(const MaxCutInstance& instance, const std::vector<std::uint32_t>& order = {});

/// Best of `starts` greedy passes over seeded random vertex orders (start 0 uses the natural order).
CutReport sahni_gonzalez_multistart(const MaxCutInstance& instance, std::size_t starts, std::uint64_t seed);

/// Exact maximum cut by Gray-code enumeration with x_0 fixed to +1.
/// Among optimal configs returns the lexicographically smallest (-1 < +1).
CutReport brute_force_maxcut(const MaxCutInstance& instance);

/// Best of `samples` uniformly random configurations.
CutReport random_cut(const MaxCutInstance& instance, std::size_t samples, std::uint64_t seed);

}  // namespace spim
