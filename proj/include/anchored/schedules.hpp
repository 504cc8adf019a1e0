#pragma once

// Step-size and anchoring-weight schedules, plus closed-form validation of
// the admissibility conditions that the convergence theory needs. Validation
// is analytic (exponent inequalities), not numeric truncation, so every
// verdict is exact for the power-law family.

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace anchored {

// alpha_n = a (n + n0)^(-p), eps_n = e (n + n0)^(-q). Requires a > 0, e > 0,
// n0 >= 1; exponents are unrestricted (validation reports on them).
struct PowerLawSchedule {
  double a;
  double p;
  double e;
  double q;
  long n0;

  PowerLawSchedule(double a, double p, double e, double q, long n0);
  double alpha_at(long n) const;
  double eps_at(long n) const;
};

enum class AlphaRule { Zero, Classic };

// eps_n = eta for all n; alpha_n = 0 (Zero) or 1/(n+2) (Classic).
struct ConstantStepSchedule {
  double eta;
  AlphaRule alpha_rule;

  ConstantStepSchedule(double eta, AlphaRule alpha_rule);
  double alpha_at(long n) const;
  double eps_at(long n) const;
};

using Schedule = std::variant<PowerLawSchedule, ConstantStepSchedule>;

double alpha_at(const Schedule& schedule, long n);
double eps_at(const Schedule& schedule, long n);
std::string describe(const Schedule& schedule);

struct ConditionCheck {
  bool ok = false;
  std::string reason;
};

struct ScheduleReport {
  ConditionCheck alpha_in_01;          // 0 < alpha_n < 1 for every n
  ConditionCheck alpha_to_zero;        // alpha_n -> 0
  ConditionCheck sum_alpha_div;        // sum alpha_n diverges
  ConditionCheck sum_alpha_sq_conv;    // sum alpha_n^2 converges
  ConditionCheck eps_to_zero;          // eps_n -> 0
  ConditionCheck sum_eps_div;          // sum eps_n diverges
  ConditionCheck sum_eps_sq_conv;      // sum eps_n^2 converges
  ConditionCheck ratio_eps_alpha_div;  // eps_n / alpha_n -> infinity
  ConditionCheck sum_alpha_eps_conv;   // sum alpha_n eps_n converges
  ConditionCheck remark_ratio_div;     // alpha_n / eps_n^2 -> infinity
  ConditionCheck coupling_all_n;       // eps_n^2 L^2 <= alpha_n for every n

  // Smallest violating n when the coupling fails somewhere (saturated to
  // LONG_MAX/2 if it lies beyond integer range).
  std::optional<long> coupling_first_violation;
  // Smallest m such that the coupling holds for every n >= m.
  std::optional<long> coupling_holds_from;
  // Smallest n with eps_n <= 1/L (always 0 when L = 0).
  std::optional<long> eps_below_inv_l_from;

  double lipschitz = 0.0;
  bool asymptotic_mode = false;
  // Conjunction of the required conditions. remark_ratio_div is
  // informational and never gates the verdict; the coupling requirement is
  // coupling_all_n, or "holds from some index on" in asymptotic mode.
  bool verdict = false;

  std::string to_text() const;
};

ScheduleReport validate(const PowerLawSchedule& schedule, double lipschitz,
                        bool asymptotic = false);

// gamma_n = alpha_n - eps_n^2 L^2 for n = 0 .. count-1.
std::vector<double> coupling_margin(const Schedule& schedule, double lipschitz,
                                    long count);

}  // namespace anchored
