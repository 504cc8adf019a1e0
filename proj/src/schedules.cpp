#include "anchored/schedules.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace anchored {

namespace {

constexpr long kIndexCap = std::numeric_limits<long>::max() / 2;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

ConditionCheck check(bool ok, const std::string& reason) {
  return ConditionCheck{ok, reason};
}

// Smallest n in [0, kIndexCap] with pred(n), for pred that switches from
// false to true once. Exponent pairs can put the analytic switch point
// beyond anything double evaluation resolves, so the search is bounded and
// reports nullopt when even the cap index tests false.
template <typename Pred>
std::optional<long> first_true(Pred pred) {
  if (pred(0)) return 0;
  if (!pred(kIndexCap)) return std::nullopt;
  long lo = 0;           // pred(lo) is false
  long hi = kIndexCap;   // pred(hi) is true
  while (hi - lo > 1) {
    long mid = lo + (hi - lo) / 2;
    (pred(mid) ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace

PowerLawSchedule::PowerLawSchedule(double a_, double p_, double e_, double q_,
                                   long n0_)
    : a(a_), p(p_), e(e_), q(q_), n0(n0_) {
  if (!(a > 0.0)) throw std::invalid_argument("PowerLawSchedule: a must be > 0");
  if (!(e > 0.0)) throw std::invalid_argument("PowerLawSchedule: e must be > 0");
  if (n0 < 1) throw std::invalid_argument("PowerLawSchedule: n0 must be >= 1");
  if (!std::isfinite(p) || !std::isfinite(q)) {
    throw std::invalid_argument("PowerLawSchedule: exponents must be finite");
  }
}

double PowerLawSchedule::alpha_at(long n) const {
  return a * std::pow(static_cast<double>(n) + static_cast<double>(n0), -p);
}

double PowerLawSchedule::eps_at(long n) const {
  return e * std::pow(static_cast<double>(n) + static_cast<double>(n0), -q);
}

ConstantStepSchedule::ConstantStepSchedule(double eta_, AlphaRule alpha_rule_)
    : eta(eta_), alpha_rule(alpha_rule_) {
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    throw std::invalid_argument("ConstantStepSchedule: eta must be > 0");
  }
}

double ConstantStepSchedule::alpha_at(long n) const {
  if (alpha_rule == AlphaRule::Zero) return 0.0;
  return 1.0 / static_cast<double>(n + 2);
}

double ConstantStepSchedule::eps_at(long) const { return eta; }

double alpha_at(const Schedule& schedule, long n) {
  return std::visit([n](const auto& s) { return s.alpha_at(n); }, schedule);
}

double eps_at(const Schedule& schedule, long n) {
  return std::visit([n](const auto& s) { return s.eps_at(n); }, schedule);
}

std::string describe(const Schedule& schedule) {
  if (const auto* p = std::get_if<PowerLawSchedule>(&schedule)) {
    std::ostringstream os;
    os << "power_law(a=" << fmt(p->a) << ",p=" << fmt(p->p) << ",e=" << fmt(p->e)
       << ",q=" << fmt(p->q) << ",n0=" << p->n0 << ")";
    return os.str();
  }
  const auto& c = std::get<ConstantStepSchedule>(schedule);
  std::ostringstream os;
  os << "constant(eta=" << fmt(c.eta) << ",alpha="
     << (c.alpha_rule == AlphaRule::Zero ? "zero" : "classic") << ")";
  return os.str();
}

ScheduleReport validate(const PowerLawSchedule& s, double lipschitz,
                        bool asymptotic) {
  if (lipschitz < 0.0 || !std::isfinite(lipschitz)) {
    throw std::invalid_argument("validate: lipschitz must be finite and >= 0");
  }
  ScheduleReport r;
  r.lipschitz = lipschitz;
  r.asymptotic_mode = asymptotic;

  const double a = s.a, p = s.p, e = s.e, q = s.q;

  // alpha_n > 0 always (a > 0). For p >= 0 the sequence is nonincreasing,
  // so the supremum is alpha_0; for p < 0 it grows without bound.
  if (p < 0.0) {
    r.alpha_in_01 = check(false, "p = " + fmt(p) +
                                     " < 0, alpha grows without bound");
  } else {
    double alpha0 = s.alpha_at(0);
    r.alpha_in_01 =
        check(alpha0 < 1.0, "alpha_0 = " + fmt(alpha0) +
                                (alpha0 < 1.0 ? " < 1" : " >= 1") +
                                " and alpha is nonincreasing");
  }
  r.alpha_to_zero =
      check(p > 0.0, "p = " + fmt(p) + (p > 0.0 ? " > 0" : " <= 0"));
  r.sum_alpha_div = check(p <= 1.0, "p = " + fmt(p) +
                                        (p <= 1.0 ? " <= 1, sum alpha diverges"
                                                  : " > 1, sum alpha converges"));
  r.sum_alpha_sq_conv =
      check(p > 0.5, "p = " + fmt(p) +
                         (p > 0.5 ? " > 1/2, sum alpha^2 converges"
                                  : " <= 1/2, sum alpha^2 diverges"));
  r.eps_to_zero =
      check(q > 0.0, "q = " + fmt(q) + (q > 0.0 ? " > 0" : " <= 0"));
  r.sum_eps_div = check(q <= 1.0, "q = " + fmt(q) +
                                      (q <= 1.0 ? " <= 1, sum eps diverges"
                                                : " > 1, sum eps converges"));
  r.sum_eps_sq_conv =
      check(q > 0.5, "q = " + fmt(q) +
                         (q > 0.5 ? " > 1/2, sum eps^2 converges"
                                  : " <= 1/2, sum eps^2 diverges"));
  // eps_n / alpha_n = (e/a) (n+n0)^(p-q): diverges iff q < p. Equal
  // exponents give a constant ratio, which does not diverge.
  r.ratio_eps_alpha_div =
      check(q < p, "q = " + fmt(q) + (q < p ? " < p, eps/alpha -> infinity"
                                            : " >= p, eps/alpha stays bounded"));
  r.sum_alpha_eps_conv =
      check(p + q > 1.0, "p + q = " + fmt(p + q) +
                             (p + q > 1.0 ? " > 1, sum alpha*eps converges"
                                          : " <= 1, sum alpha*eps diverges"));
  r.remark_ratio_div = check(
      p < 2.0 * q, "2q - p = " + fmt(2.0 * q - p) +
                       (p < 2.0 * q ? " > 0, alpha/eps^2 -> infinity"
                                    : " <= 0, alpha/eps^2 stays bounded"));

  // Coupling eps_n^2 L^2 <= alpha_n, i.e. (n+n0)^(2q-p) >= e^2 L^2 / a.
  auto couple_ok = [&](long n) {
    return s.eps_at(n) * s.eps_at(n) * lipschitz * lipschitz <= s.alpha_at(n);
  };
  const double c = e * e * lipschitz * lipschitz / a;
  const double rexp = 2.0 * q - p;
  if (lipschitz == 0.0) {
    r.coupling_all_n = check(true, "L = 0, coupling holds trivially");
    r.coupling_holds_from = 0;
  } else if (rexp > 0.0) {
    auto from = first_true(couple_ok);
    if (from && *from == 0) {
      r.coupling_all_n = check(true, "holds at n = 0 and the margin grows");
      r.coupling_holds_from = 0;
    } else {
      r.coupling_first_violation = 0;
      if (from) {
        r.coupling_holds_from = *from;
        r.coupling_all_n =
            check(false, "violated on n < " + std::to_string(*from));
      } else {
        // 2q - p > 0 only marginally: the crossover index is unreachable.
        r.coupling_all_n = check(
            false, "violated at n = 0 and the crossover index overflows");
      }
    }
  } else if (rexp == 0.0) {
    bool ok = c <= 1.0;
    r.coupling_all_n = check(ok, "constant ratio e^2 L^2 / a = " + fmt(c) +
                                     (ok ? " <= 1" : " > 1"));
    if (ok) {
      r.coupling_holds_from = 0;
    } else {
      r.coupling_first_violation = 0;
    }
  } else {
    // Margin shrinks: the coupling eventually fails whatever happens early.
    auto fv = first_true([&](long n) { return !couple_ok(n); });
    if (fv && *fv == 0) {
      r.coupling_first_violation = 0;
      r.coupling_all_n = check(false, "violated at n = 0");
    } else {
      // Saturate when the violation index is beyond what double evaluation
      // of the ratio can resolve.
      long at = fv ? *fv : kIndexCap;
      r.coupling_first_violation = at;
      r.coupling_all_n = check(
          false, "2q - p = " + fmt(rexp) +
                     " < 0, margin shrinks; first violation at n = " +
                     std::to_string(at));
    }
  }

  // First index with eps_n <= 1/L, surfaced for step-size sanity checks.
  if (lipschitz == 0.0) {
    r.eps_below_inv_l_from = 0;
  } else {
    auto small_ok = [&](long n) { return s.eps_at(n) * lipschitz <= 1.0; };
    if (q > 0.0 || small_ok(0)) {
      r.eps_below_inv_l_from = first_true(small_ok);
    }
    // q <= 0 and eps_0 > 1/L: eps never drops below the threshold. A
    // decaying eps whose crossover index overflows also reports no index.
  }

  const bool coupling_req = asymptotic ? r.coupling_holds_from.has_value()
                                       : r.coupling_all_n.ok;
  r.verdict = r.alpha_in_01.ok && r.alpha_to_zero.ok && r.sum_alpha_div.ok &&
              r.sum_alpha_sq_conv.ok && r.eps_to_zero.ok && r.sum_eps_div.ok &&
              r.sum_eps_sq_conv.ok && r.ratio_eps_alpha_div.ok &&
              r.sum_alpha_eps_conv.ok && coupling_req;
  return r;
}

std::vector<double> coupling_margin(const Schedule& schedule, double lipschitz,
                                    long count) {
  if (count < 0) throw std::invalid_argument("coupling_margin: count < 0");
  std::vector<double> out;
  out.reserve(static_cast<size_t>(count));
  for (long n = 0; n < count; ++n) {
    double eps = eps_at(schedule, n);
    out.push_back(alpha_at(schedule, n) - eps * eps * lipschitz * lipschitz);
  }
  return out;
}

std::string ScheduleReport::to_text() const {
  auto line = [](const char* name, const ConditionCheck& c) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "  [%s] %-20s %s\n", c.ok ? "ok" : "NO",
                  name, c.reason.c_str());
    return std::string(buf);
  };
  std::ostringstream os;
  os << "schedule admissibility (L = " << fmt(lipschitz) << ", "
     << (asymptotic_mode ? "asymptotic coupling" : "coupling for all n")
     << ")\n";
  os << line("alpha_in_01", alpha_in_01);
  os << line("alpha_to_zero", alpha_to_zero);
  os << line("sum_alpha_div", sum_alpha_div);
  os << line("sum_alpha_sq_conv", sum_alpha_sq_conv);
  os << line("eps_to_zero", eps_to_zero);
  os << line("sum_eps_div", sum_eps_div);
  os << line("sum_eps_sq_conv", sum_eps_sq_conv);
  os << line("ratio_eps_alpha_div", ratio_eps_alpha_div);
  os << line("sum_alpha_eps_conv", sum_alpha_eps_conv);
  os << line("remark_ratio_div", remark_ratio_div);
  os << line("coupling_all_n", coupling_all_n);
  if (coupling_first_violation) {
    os << "  coupling first violation at n = " << *coupling_first_violation
       << "\n";
  }
  if (coupling_holds_from) {
    os << "  coupling holds for all n >= " << *coupling_holds_from << "\n";
  }
  if (eps_below_inv_l_from) {
    os << "  eps_n <= 1/L from n = " << *eps_below_inv_l_from << "\n";
  } else {
    os << "  eps_n never drops to 1/L\n";
  }
  os << "  verdict: " << (verdict ? "ADMISSIBLE" : "NOT ADMISSIBLE") << "\n";
  return os.str();
}

}  // namespace anchored
