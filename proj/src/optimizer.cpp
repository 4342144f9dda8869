#include "fdsr/optimizer.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "fdsr/errors.hpp"
#include "fdsr/units.hpp"

namespace fdsr {

// ---------------------------------------------------------------- strategy

Strategy Strategy::ps_continuous() { return Strategy{}; }

Strategy Strategy::ps_discrete(double delta_phi) {
  Strategy s;
  s.phase_mode = PhaseMode::Discrete;
  s.delta_phi = delta_phi;
  return s;
}

Strategy Strategy::ps_fixed(double phi_a) {
  Strategy s;
  s.phase_mode = PhaseMode::None;
  s.fixed_phase = phi_a;
  return s;
}

Strategy Strategy::an() {
  Strategy s;
  s.scheme = Scheme::AN;
  s.phase_mode = PhaseMode::None;
  return s;
}

void Strategy::validate() const {
  if (scheme == Scheme::AN && phase_mode != PhaseMode::None) {
    throw std::invalid_argument("Strategy: AN has no phase control");
  }
  if (phase_mode == PhaseMode::Discrete &&
      !(delta_phi > 0.0 && delta_phi <= kTwoPi + 1e-12)) {
    throw std::invalid_argument("Strategy: delta_phi must be in (0, 2pi]");
  }
  if (!std::isfinite(fixed_phase)) {
    throw std::invalid_argument("Strategy: fixed_phase must be finite");
  }
}

namespace {

std::string fmt_num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

double parse_num(std::string_view s) {
  double x = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw std::invalid_argument("bad number in strategy: '" + std::string(s) + "'");
  }
  return x;
}

// "name(arg)" -> arg
std::optional<double> call_arg(std::string_view text, std::string_view name) {
  if (text.size() <= name.size() + 2 || text.substr(0, name.size()) != name ||
      text[name.size()] != '(' || text.back() != ')') {
    return std::nullopt;
  }
  return parse_num(text.substr(name.size() + 1, text.size() - name.size() - 2));
}

}  // namespace

std::string to_string(const Strategy& s) {
  if (s.scheme == Scheme::AN) return "AN";
  switch (s.phase_mode) {
    case PhaseMode::Continuous: return "PS";
    case PhaseMode::Discrete: return "PS-discrete(" + fmt_num(s.delta_phi) + ")";
    case PhaseMode::None: return "PS-fixed(" + fmt_num(s.fixed_phase) + ")";
  }
  return "PS";
}

Strategy parse_strategy(std::string_view text) {
  Strategy s;
  if (text == "PS") {
    s = Strategy::ps_continuous();
  } else if (text == "AN") {
    s = Strategy::an();
  } else if (auto d = call_arg(text, "PS-discrete")) {
    s = Strategy::ps_discrete(*d);
  } else if (auto f = call_arg(text, "PS-fixed")) {
    s = Strategy::ps_fixed(*f);
  } else {
    throw std::invalid_argument("unknown strategy '" + std::string(text) + "'");
  }
  s.validate();
  return s;
}

std::string to_string(CaseLabel c) {
  switch (c) {
    case CaseLabel::Case1: return "Case1";
    case CaseLabel::Case2: return "Case2";
    case CaseLabel::Case3: return "Case3";
    case CaseLabel::Case4: return "Case4";
    case CaseLabel::BoundaryOnly: return "boundary-only";
    case CaseLabel::Infeasible: return "infeasible";
  }
  return "infeasible";
}

// ---------------------------------------------------------------- objective

namespace {

double raw_objective(const SnrTerms& t, double m) {
  const double u = m * m;
  return (t.m_agg + t.q_agg * u) / (t.l_term + t.r_term * u) *
         ((t.c_den + t.d_den * u) / (t.a_agg + t.b_agg * u));
}

}  // namespace

double objective(const SnrTerms& t, double m) {
  const double u = m * m;
  const double den_a = t.l_term + t.r_term * u;
  const double den_e = t.c_den + t.d_den * u;
  if (!(den_a > 0.0) || !(den_e > 0.0)) return 0.0;
  return raw_objective(t, m);
}

// ---------------------------------------------------------------- feasibility

std::optional<Interval> feasible_n_interval(const SnrTerms& t, const SystemParams& p,
                                            double phi) {
  const double g = p.gamma_th_p;
  const double u2 = t.u2, v2 = t.v2, t2 = t.t2, j2 = t.j2, g2 = t.g2;
  const double s2 = t.sigma2_n;
  const double uv = std::sqrt(u2) * std::sqrt(v2);
  const double n_max =
      s2 > 0.0 ? std::sqrt(p.p_a / s2) : 0.0;  // no AN power to spend when σ²_N = 0

  // qa·n² − 2·qb·n + qc ≤ 0
  const double qa = g * (v2 + j2) + s2 * t2;
  const double qb = g * uv * phi;
  const double qc = g * (u2 + g2) - p.p_a * t2;

  double lo = 0.0;
  double hi = n_max;
  if (qa > 0.0) {
    // qb² − qa·qc with the g²U²V² terms cancelled analytically.
    const double disc = g * g * u2 * v2 * (phi * phi - 1.0) - g * g * v2 * g2 -
                        g * g * j2 * (u2 + g2) - g * s2 * t2 * (u2 + g2) +
                        g * (v2 + j2) * p.p_a * t2 + s2 * p.p_a * t2 * t2;
    if (disc < 0.0) return std::nullopt;
    const double sq = std::sqrt(disc);
    double r1, r2;
    if (qb >= 0.0) {
      r2 = (qb + sq) / qa;
      r1 = r2 > 0.0 ? qc / (qa * r2) : (qb - sq) / qa;
    } else {
      r1 = (qb - sq) / qa;
      r2 = r1 < 0.0 ? qc / (qa * r1) : (qb + sq) / qa;
    }
    if (r1 > r2) std::swap(r1, r2);
    lo = std::max(lo, r1);
    hi = std::min(hi, r2);
  } else if (qb != 0.0) {
    const double root = qc / (2.0 * qb);
    if (qb > 0.0) {
      lo = std::max(lo, root);
    } else {
      hi = std::min(hi, root);
    }
  } else if (qc > 0.0) {
    return std::nullopt;
  }
  if (lo > hi) return std::nullopt;
  return Interval{lo, hi};
}

namespace {

bool meets_threshold(const SnrTerms& t, const SystemParams& p, double m, double phi) {
  if (p.gamma_th_p <= 0.0) return true;
  try {
    return gamma_p_cos(t, m, an_amplitude(t, p.p_a, m), phi) >= p.gamma_th_p;
  } catch (const ModelViolation&) {
    return m > 0.0 && t.t2 > 0.0;  // zero interference: infinite SNR
  }
}

double m_of_n(const SnrTerms& t, const SystemParams& p, double n, double n_max) {
  if (n <= 0.0) return std::sqrt(p.p_a);
  if (n >= n_max) return 0.0;
  const double rest = p.p_a - n * n * t.sigma2_n;
  return rest > 0.0 ? std::sqrt(rest) : 0.0;
}

}  // namespace

std::optional<Interval> feasible_m_interval(const SnrTerms& t, const SystemParams& p,
                                            double phi) {
  const auto nint = feasible_n_interval(t, p, phi);
  if (!nint) return std::nullopt;
  const double n_max = t.sigma2_n > 0.0 ? std::sqrt(p.p_a / t.sigma2_n) : 0.0;
  double lo = m_of_n(t, p, nint->hi, n_max);
  double hi = m_of_n(t, p, nint->lo, n_max);

  // Rounding in the roots can leave an endpoint a hair outside C1.
  const double scale = std::max(std::sqrt(p.p_a), std::numeric_limits<double>::min());
  double step = scale * std::numeric_limits<double>::epsilon();
  for (int k = 0; k < 80 && lo <= hi && !meets_threshold(t, p, hi, phi); ++k) {
    hi = std::max(lo, hi - step);
    step *= 2.0;
    if (hi == lo) break;
  }
  step = scale * std::numeric_limits<double>::epsilon();
  for (int k = 0; k < 80 && lo <= hi && !meets_threshold(t, p, lo, phi); ++k) {
    lo = std::min(hi, lo + step);
    step *= 2.0;
    if (hi == lo) break;
  }
  if (!meets_threshold(t, p, lo, phi) || !meets_threshold(t, p, hi, phi)) {
    return std::nullopt;
  }
  return Interval{lo, hi};
}

// ---------------------------------------------------------------- stationary points

namespace {

struct Normalized {
  double M, Q, L, R, A, B, C, D;
};

// f is invariant under separate rescaling of (M,Q,L,R) and (A,B,C,D).
Normalized normalized(const SnrTerms& t) {
  const double s1 = std::max({std::abs(t.m_agg), std::abs(t.q_agg), std::abs(t.l_term),
                              std::abs(t.r_term), std::numeric_limits<double>::min()});
  const double s2 = std::max({std::abs(t.a_agg), std::abs(t.b_agg), std::abs(t.c_den),
                              std::abs(t.d_den), std::numeric_limits<double>::min()});
  return {t.m_agg / s1, t.q_agg / s1, t.l_term / s1, t.r_term / s1,
          t.a_agg / s2, t.b_agg / s2, t.c_den / s2, t.d_den / s2};
}

std::vector<double> real_roots(const QuadCoeffs& q) {
  std::vector<double> out;
  if (q.a == 0.0) {
    if (q.b != 0.0) out.push_back(-q.c / q.b);
    return out;
  }
  const double disc = q.b * q.b - 4.0 * q.a * q.c;
  if (disc < 0.0) return out;
  const double sq = std::sqrt(disc);
  const double qq = -0.5 * (q.b + std::copysign(sq, q.b));
  if (qq == 0.0) {
    out.push_back(0.0);
    return out;
  }
  out.push_back(qq / q.a);
  out.push_back(q.c / qq);
  std::sort(out.begin(), out.end());
  return out;
}

// df/du up to a positive factor, from the quotient rule on both factors.
double slope(const Normalized& n, double u) {
  const double l = n.L + n.R * u;
  const double a = n.A + n.B * u;
  const double g = (n.M + n.Q * u) / l;
  const double h = (n.C + n.D * u) / a;
  return (n.Q * n.L - n.M * n.R) / (l * l) * h + g * (n.D * n.A - n.C * n.B) / (a * a);
}

// Roots of the expanded quadratic can sit a few ulps of conditioning away
// from the true extremum, or belong to the wrong reading of the quadratic.
// Bisect on the sign of the exact slope; no sign change nearby, no extremum.
std::optional<double> polish_root(const Normalized& n, double u0) {
  const double s0 = slope(n, u0);
  if (s0 == 0.0) return u0;
  if (!std::isfinite(s0)) return std::nullopt;
  const double base = std::max(u0, std::numeric_limits<double>::min());
  for (double w = base * 1e-14; w <= base * 1e-2; w *= 2.0) {
    double lo = std::max(0.0, u0 - w), hi = u0 + w;
    double s_lo = slope(n, lo);
    const double s_hi = slope(n, hi);
    if (!std::isfinite(s_lo) || !std::isfinite(s_hi)) return std::nullopt;
    if ((s_lo > 0.0) == (s_hi > 0.0) || s_lo == 0.0 || s_hi == 0.0) continue;
    for (int k = 0; k < 200; ++k) {
      const double mid = 0.5 * (lo + hi);
      if (mid == lo || mid == hi) break;
      const double sm = slope(n, mid);
      if (sm == 0.0) return mid;
      if ((sm > 0.0) == (s_lo > 0.0)) {
        lo = mid;
        s_lo = sm;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  }
  return std::nullopt;
}

// Exact df/dm; finite differences drown in rounding at the sharp extrema
// that appear when the eavesdropper denominator nearly cancels.
bool is_stationary(const SnrTerms& t, const Normalized& n, double m) {
  const double f0 = raw_objective(t, m);
  if (!std::isfinite(f0)) return false;
  const double deriv = 2.0 * m * slope(n, m * m);
  if (!std::isfinite(deriv)) return false;
  return std::abs(deriv) <= 1e-6 * (1.0 + std::abs(f0));
}

}  // namespace

QuadCoeffs printed_coefficients(const SnrTerms& t) {
  const auto [M, Q, L, R, A, B, C, D] = normalized(t);
  const double lq_mr = L * Q - M * R;
  QuadCoeffs q;
  q.a = (A * D - B * C) * Q * R + (B * D + D * D) * lq_mr;
  q.b = 2.0 * ((A + C) * D * L * Q - (B + D) * C * M * R);
  q.c = A * C * lq_mr + (A * D - B * C) * L * M + C * C * lq_mr;
  return q;
}

QuadCoeffs derived_coefficients(const SnrTerms& t) {
  const auto [M, Q, L, R, A, B, C, D] = normalized(t);
  const double lq_mr = L * Q - M * R;
  QuadCoeffs q;
  q.a = (A * D - B * C) * Q * R + B * D * lq_mr;
  q.b = 2.0 * (A * D * L * Q - B * C * M * R);
  q.c = A * C * lq_mr + (A * D - B * C) * L * M;
  return q;
}

StationaryPoints stationary_candidates(const SnrTerms& t) {
  StationaryPoints out;
  const QuadCoeffs derived = derived_coefficients(t);
  if (derived.a == 0.0 && derived.b == 0.0 && derived.c == 0.0) {
    out.degenerate = true;
    return out;
  }

  const Normalized norm = normalized(t);
  std::vector<double> raw;
  auto add_readings = [&](const QuadCoeffs& q) {
    for (double r : real_roots(q)) {
      if (!(r >= 0.0) || !std::isfinite(r)) continue;
      for (double u : {r * r, r}) {  // root read as m, then as u = m²
        if (const auto pu = polish_root(norm, u)) raw.push_back(std::sqrt(*pu));
      }
    }
  };
  add_readings(printed_coefficients(t));
  add_readings(derived);

  for (double m : raw) {
    if (is_stationary(t, norm, m)) out.m.push_back(m);
  }
  std::sort(out.m.begin(), out.m.end());
  out.m.erase(std::unique(out.m.begin(), out.m.end(),
                          [](double a, double b) {
                            return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(a));
                          }),
              out.m.end());
  return out;
}

namespace {

CaseLabel classify(const SnrTerms& t) {
  const QuadCoeffs q = derived_coefficients(t);
  const bool real = !real_roots(q).empty();
  const bool rising = q.a > 0.0;
  if (real) return rising ? CaseLabel::Case3 : CaseLabel::Case4;
  return rising ? CaseLabel::Case1 : CaseLabel::Case2;
}

}  // namespace

MStep optimize_m(const SnrTerms& t, const SystemParams& p, double phi) {
  MStep step;
  const auto region = feasible_m_interval(t, p, phi);
  if (!region) return step;
  step.feasible = true;
  step.interval = *region;

  const StationaryPoints sp = stationary_candidates(t);
  std::vector<double>& cand = step.candidates;
  cand.push_back(region->lo);
  if (region->hi != region->lo) cand.push_back(region->hi);
  for (double m : sp.m) {
    if (m > region->lo && m < region->hi) cand.push_back(m);
  }
  std::sort(cand.begin(), cand.end());

  double best_f = -std::numeric_limits<double>::infinity();
  for (double m : cand) {
    const double f = objective(t, m);
    if (f > best_f) {
      best_f = f;
      step.m = m;
    }
  }
  if (sp.degenerate || region->lo == region->hi) {
    step.label = CaseLabel::BoundaryOnly;
  } else {
    step.label = classify(t);
  }
  return step;
}

// ---------------------------------------------------------------- phase control

double optimal_phase_continuous(const SnrTerms& t) { return wrap_phase(-t.phi1); }

std::vector<double> phase_grid(double delta_phi) {
  if (!(delta_phi > 0.0)) throw std::invalid_argument("phase_grid: delta_phi must be > 0");
  std::vector<double> grid;
  for (int k = 0;; ++k) {
    const double g = k * delta_phi;
    if (g >= kTwoPi - 1e-9) break;
    grid.push_back(g);
  }
  return grid;
}

double optimal_phase_discrete(const SnrTerms& t, double delta_phi, double m, double n) {
  const std::vector<double> grid = phase_grid(delta_phi);
  const double target = wrap_phase(-t.phi1);
  // Largest grid point <= target; its circular successor is the other neighbour.
  std::size_t k = static_cast<std::size_t>(
      std::upper_bound(grid.begin(), grid.end(), target) - grid.begin());
  k = k == 0 ? grid.size() - 1 : k - 1;
  const std::size_t k_next = (k + 1) % grid.size();
  const double below = grid[k];
  const double above = grid[k_next];
  if (below == above) return below;

  const double u = std::sqrt(t.u2);
  const double v = std::sqrt(t.v2);
  auto denominator = [&](double phase) {
    return (t.u2 + t.g2) + n * n * (t.v2 + t.j2) - 2.0 * n * u * v * std::cos(phase + t.phi1);
  };
  (void)m;  // the numerator m²T² is common to both neighbours
  const double d_below = denominator(below);
  const double d_above = denominator(above);
  if (d_below < d_above) return below;
  if (d_above < d_below) return above;
  return std::min(below, above);
}

// ---------------------------------------------------------------- joint solve

SystemParams effective_params(const SystemParams& p, const Strategy& s) {
  SystemParams q = p;
  if (s.scheme == Scheme::AN) q.theta = 0.0;
  return q;
}

namespace {

void evaluate(Solution& sol, const SnrTerms& t, const SystemParams& p, double m,
              double cos_term) {
  sol.m_star = m;
  sol.n_star = an_amplitude(t, p.p_a, m);
  sol.cos_term = cos_term;
  const double inf = std::numeric_limits<double>::infinity();
  try {
    sol.gamma_p = gamma_p_cos(t, m, sol.n_star, cos_term);
  } catch (const ModelViolation&) {
    sol.gamma_p = inf;
  }
  bool violated = false;
  try {
    sol.gamma_a = gamma_a(t, m);
  } catch (const ModelViolation&) {
    sol.gamma_a = inf;
    violated = true;
  }
  try {
    sol.gamma_e = gamma_e(t, m);
  } catch (const ModelViolation&) {
    sol.gamma_e = inf;
    violated = true;
  }
  sol.r_s = violated ? 0.0 : security_rate(sol.gamma_a, sol.gamma_e);
}

Solution infeasible(const SnrTerms& t) {
  Solution sol;
  sol.phi1 = t.phi1;
  sol.case_label = CaseLabel::Infeasible;
  return sol;
}

Solution single_shot(const SnrTerms& t, const SystemParams& p, double phi_a, double cos_term) {
  const MStep step = optimize_m(t, p, cos_term);
  Solution sol = infeasible(t);
  sol.iterations = 1;
  if (!step.feasible) return sol;
  sol.feasible = true;
  sol.phi_a_star = phi_a;
  sol.case_label = step.label;
  sol.candidates_evaluated = step.candidates;
  evaluate(sol, t, p, step.m, cos_term);
  sol.objective_trace = {sol.r_s};
  return sol;
}

}  // namespace

Solution solve(const ChannelSet& ch, const SystemParams& p, const Strategy& s,
               const SolveOptions& opts) {
  p.validate();
  s.validate();
  if (opts.max_iter < 1) throw std::invalid_argument("solve: max_iter must be >= 1");
  const SystemParams q = effective_params(p, s);
  const SnrTerms t = compute_terms(ch, q);

  if (s.scheme == Scheme::AN) {
    return single_shot(t, q, 0.0, 0.0);
  }
  switch (s.phase_mode) {
    case PhaseMode::Continuous:
      // The phase and power sub-problems decouple: cos(φ + φ₁) = 1 is always optimal.
      return single_shot(t, q, optimal_phase_continuous(t), 1.0);
    case PhaseMode::None:
      return single_shot(t, q, wrap_phase(s.fixed_phase),
                         std::cos(wrap_phase(s.fixed_phase) + t.phi1));
    case PhaseMode::Discrete:
      // A one-point grid leaves no phase sub-problem.
      if (phase_grid(s.delta_phi).size() == 1) return single_shot(t, q, 0.0, std::cos(t.phi1));
      break;
  }

  // Discrete phases: start from the continuous relaxation, then alternate
  // phase selection and power allocation on the updated region.
  const MStep relaxed = optimize_m(t, q, 1.0);
  Solution best = infeasible(t);
  if (!relaxed.feasible) {
    best.iterations = 1;
    return best;
  }
  double m = relaxed.m;
  double prev = -std::numeric_limits<double>::infinity();
  for (int it = 1; it <= opts.max_iter; ++it) {
    const double phase = optimal_phase_discrete(t, s.delta_phi, m, an_amplitude(t, q.p_a, m));
    const double cos_term = std::cos(phase + t.phi1);
    const MStep step = optimize_m(t, q, cos_term);
    if (!step.feasible) {
      best.iterations = it;
      break;
    }
    Solution cur;
    cur.feasible = true;
    cur.phi1 = t.phi1;
    cur.phi_a_star = phase;
    cur.case_label = step.label;
    cur.candidates_evaluated = step.candidates;
    evaluate(cur, t, q, step.m, cos_term);
    if (best.feasible && cur.r_s < prev) {
      best.iterations = it;
      break;  // never accept a worse iterate
    }
    cur.objective_trace = std::move(best.objective_trace);
    cur.objective_trace.push_back(cur.r_s);
    cur.iterations = it;
    const bool done = cur.r_s - prev <= opts.delta;
    prev = cur.r_s;
    best = std::move(cur);
    m = best.m_star;
    if (done) break;
  }
  return best;
}

}  // namespace fdsr
