#include "agglab/subset.hpp"

#include <algorithm>
#include <stdexcept>

#include <fmt/format.h>

namespace agglab {

void check_agent_count(int n) {
  if (n < 1 || n > kMaxAgents) {
    throw std::invalid_argument(
        fmt::format("agent count {} outside [1, {}]", n, kMaxAgents));
  }
}

void check_agent_index(int agent, int n) {
  if (agent < 1 || agent > n) {
    throw std::out_of_range(fmt::format("agent index {} outside [1, {}]", agent, n));
  }
}

SubsetMask SubsetMask::from_agents(std::span<const int> agents, int n) {
  check_agent_count(n);
  std::uint32_t bits = 0;
  for (int a : agents) {
    check_agent_index(a, n);
    bits |= 1U << (a - 1);
  }
  return SubsetMask(bits);
}

SubsetMask SubsetMask::singleton(int agent, int n) {
  check_agent_count(n);
  check_agent_index(agent, n);
  return SubsetMask(1U << (agent - 1));
}

SubsetMask SubsetMask::all(int n) {
  check_agent_count(n);
  return SubsetMask(n == 32 ? ~0U : ((1U << n) - 1));
}

std::vector<int> SubsetMask::agents() const {
  std::vector<int> out;
  out.reserve(size());
  for (std::uint32_t b = bits_; b != 0; b &= b - 1) {
    out.push_back(std::countr_zero(b) + 1);
  }
  return out;
}

std::string SubsetMask::to_string() const {
  std::string s = "{";
  bool first = true;
  for (int a : agents()) {
    if (!first) s += ',';
    s += std::to_string(a);
    first = false;
  }
  return s + "}";
}

Universe full_universe(int n) {
  check_agent_count(n);
  if (n > kMaxFullEnumeration) {
    throw std::invalid_argument(fmt::format(
        "full enumeration requested for n = {} > {}", n, kMaxFullEnumeration));
  }
  Universe u;
  u.reserve((std::size_t{1} << n) - 1);
  for (std::uint32_t b = 1; b < (1U << n); ++b) u.emplace_back(b);
  return u;
}

std::vector<SubsetMask> subsets_up_to_size(int n, int max_size) {
  check_agent_count(n);
  if (n > kMaxFullEnumeration) {
    throw std::invalid_argument(fmt::format(
        "subset enumeration requested for n = {} > {}", n, kMaxFullEnumeration));
  }
  std::vector<SubsetMask> out;
  for (std::uint32_t b = 1; b < (1U << n); ++b) {
    if (std::popcount(b) <= max_size) out.emplace_back(b);
  }
  std::stable_sort(out.begin(), out.end(), [](SubsetMask a, SubsetMask b) {
    return a.size() < b.size();
  });
  return out;
}

Universe make_universe(std::vector<SubsetMask> subsets, int n) {
  check_agent_count(n);
  for (SubsetMask s : subsets) {
    if (!s.fits(n)) {
      throw std::invalid_argument(
          fmt::format("subset mask {:#x} exceeds {} agents", s.bits(), n));
    }
  }
  std::sort(subsets.begin(), subsets.end());
  subsets.erase(std::unique(subsets.begin(), subsets.end()), subsets.end());
  return subsets;
}

double binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (int i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
  }
  return r;
}

}  // namespace agglab
