#pragma once

#include <optional>
#include <string>
#include <vector>

namespace agglab::faults {

// Deliberate defects that can be switched on at runtime. The verification
// suites and tests use them to show that each check can actually fail.
enum class Fault {
  None,
  FlipMobiusSign,         // intersection rule uses -w(S)
  SkewMinimaxValue,       // solver reports a value 1% too small
  PerturbMinimaxPoly,     // solver shifts the polynomial by 1% of the value
  ShiftCertificatePoint,  // solver moves one certificate point by one
  BreakDiffInduction,     // difference queries drop the earlier-prefix correction
};

Fault active();
void set(Fault fault);
bool is_active(Fault fault);

std::string to_string(Fault fault);
std::optional<Fault> from_string(const std::string& name);
std::vector<Fault> all();

// Activates a fault for the lifetime of the guard and restores the previous one.
class ScopedFault {
 public:
  explicit ScopedFault(Fault fault);
  ~ScopedFault();
  ScopedFault(const ScopedFault&) = delete;
  ScopedFault& operator=(const ScopedFault&) = delete;

 private:
  Fault previous_;
};

}  // namespace agglab::faults
