#pragma once

#include <bit>
#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace agglab {

inline constexpr int kMaxAgents = 24;
// Largest n for which we enumerate all 2^n - 1 nonempty subsets.
inline constexpr int kMaxFullEnumeration = 16;

// A subset T of the agents [n], stored as a bitmask. Agent i (1-based)
// occupies bit i - 1. The empty mask is valid and stands for the
// always-zero signal.
class SubsetMask {
 public:
  constexpr SubsetMask() = default;
  constexpr explicit SubsetMask(std::uint32_t bits) : bits_(bits) {}

  // Builds a mask from 1-based agent indices; throws on indices outside [1, n].
  static SubsetMask from_agents(std::span<const int> agents, int n);
  static SubsetMask from_agents(std::initializer_list<int> agents, int n) {
    return from_agents(std::span<const int>(agents.begin(), agents.size()), n);
  }
  static SubsetMask singleton(int agent, int n);
  static SubsetMask all(int n);

  constexpr std::uint32_t bits() const { return bits_; }
  constexpr int size() const { return std::popcount(bits_); }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr bool contains(int agent) const {
    return (bits_ >> (agent - 1)) & 1U;
  }
  constexpr bool is_subset_of(SubsetMask other) const {
    return (bits_ & ~other.bits_) == 0;
  }
  constexpr bool intersects(SubsetMask other) const {
    return (bits_ & other.bits_) != 0;
  }
  // True when no bit at or above position n is set.
  constexpr bool fits(int n) const {
    return n >= 32 || (bits_ >> n) == 0;
  }
  // Largest member agent (1-based); 0 for the empty mask.
  constexpr int max_agent() const { return 32 - std::countl_zero(bits_); }

  std::vector<int> agents() const;
  std::string to_string() const;  // "{1,3}"

  constexpr SubsetMask operator|(SubsetMask o) const { return SubsetMask(bits_ | o.bits_); }
  constexpr SubsetMask operator&(SubsetMask o) const { return SubsetMask(bits_ & o.bits_); }
  constexpr SubsetMask without(int agent) const {
    return SubsetMask(bits_ & ~(1U << (agent - 1)));
  }
  constexpr SubsetMask with(int agent) const {
    return SubsetMask(bits_ | (1U << (agent - 1)));
  }

  constexpr auto operator<=>(const SubsetMask&) const = default;

 private:
  std::uint32_t bits_ = 0;
};

// A declared finite list of subsets, sorted ascending by mask, no duplicates.
using Universe = std::vector<SubsetMask>;

// All nonempty subsets of [n]; n <= kMaxFullEnumeration.
Universe full_universe(int n);
// All subsets of [n] with 1 <= |S| <= max_size, ordered by (size, mask).
std::vector<SubsetMask> subsets_up_to_size(int n, int max_size);
// Sorts and deduplicates; throws if any mask does not fit n agents.
Universe make_universe(std::vector<SubsetMask> subsets, int n);

void check_agent_count(int n);
void check_agent_index(int agent, int n);

// Binomial coefficient as a double (exact for the ranges used here).
double binomial(int n, int k);

}  // namespace agglab
