#include "agglab/faults.hpp"

#include <atomic>

namespace agglab::faults {

namespace {
std::atomic<Fault> g_active{Fault::None};

struct Named {
  Fault fault;
  const char* name;
};

constexpr Named kNames[] = {
    {Fault::None, "none"},
    {Fault::FlipMobiusSign, "flip-mobius-sign"},
    {Fault::SkewMinimaxValue, "skew-minimax-value"},
    {Fault::PerturbMinimaxPoly, "perturb-minimax-poly"},
    {Fault::ShiftCertificatePoint, "shift-certificate-point"},
    {Fault::BreakDiffInduction, "break-diff-induction"},
};
}  // namespace

Fault active() { return g_active.load(std::memory_order_relaxed); }
void set(Fault fault) { g_active.store(fault, std::memory_order_relaxed); }
bool is_active(Fault fault) { return active() == fault; }

std::string to_string(Fault fault) {
  for (const Named& n : kNames) {
    if (n.fault == fault) return n.name;
  }
  return "unknown";
}

std::optional<Fault> from_string(const std::string& name) {
  for (const Named& n : kNames) {
    if (name == n.name) return n.fault;
  }
  return std::nullopt;
}

std::vector<Fault> all() {
  std::vector<Fault> out;
  for (const Named& n : kNames) {
    if (n.fault != Fault::None) out.push_back(n.fault);
  }
  return out;
}

ScopedFault::ScopedFault(Fault fault) : previous_(active()) { set(fault); }
ScopedFault::~ScopedFault() { set(previous_); }

}  // namespace agglab::faults
