#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fdsr/channel.hpp"
#include "fdsr/snr_terms.hpp"

namespace fdsr {

enum class Scheme { PS, AN };

/// `None` keeps φ_A at `fixed_phase` (PS) or drops the coherent cross term
/// entirely (AN).
enum class PhaseMode { Continuous, Discrete, None };

struct Strategy {
  Scheme scheme = Scheme::PS;
  PhaseMode phase_mode = PhaseMode::Continuous;
  double delta_phi = 0.0;    // grid step for Discrete
  double fixed_phase = 0.0;  // φ_A for PS with PhaseMode::None

  static Strategy ps_continuous();
  static Strategy ps_discrete(double delta_phi);
  static Strategy ps_fixed(double phi_a);
  static Strategy an();

  void validate() const;
};

/// "PS", "PS-discrete(<rad>)", "PS-fixed(<rad>)" or "AN".
std::string to_string(const Strategy& s);
Strategy parse_strategy(std::string_view text);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

enum class CaseLabel { Case1, Case2, Case3, Case4, BoundaryOnly, Infeasible };
std::string to_string(CaseLabel c);

struct Solution {
  bool feasible = false;
  double m_star = 0.0;
  double n_star = 0.0;
  double phi_a_star = 0.0;
  double gamma_p = 0.0;
  double gamma_a = 0.0;
  double gamma_e = 0.0;
  double r_s = 0.0;
  int iterations = 0;
  CaseLabel case_label = CaseLabel::Infeasible;
  std::vector<double> candidates_evaluated;
  std::vector<double> objective_trace;  // r_s after each accepted iteration
  double phi1 = 0.0;
  double cos_term = 0.0;  // cos(φ*_A + φ₁); 0 for the AN baseline
};

struct SolveOptions {
  double delta = 1e-6;  // bits
  int max_iter = 20;
};

/// f(m) = [(M+Qm²)/(L+Rm²)]·[(C+Dm²)/(A+Bm²)] = (1+γ_A)/(1+γ_E).
/// Returns 0 where either SNR denominator is nonpositive.
double objective(const SnrTerms& t, double m);

/// Feasible AN amplitudes n ∈ [0, √(P_A/σ²_N)] for C1 at `phi` = cos(φ_A+φ₁).
std::optional<Interval> feasible_n_interval(const SnrTerms& t, const SystemParams& p,
                                            double phi);

/// The same region mapped to m through m = √(P_A − n²σ²_N). Endpoints are
/// nudged inward until C1 holds in floating point.
std::optional<Interval> feasible_m_interval(const SnrTerms& t, const SystemParams& p,
                                            double phi);

struct QuadCoeffs {
  double a = 0.0, b = 0.0, c = 0.0;
};

/// Coefficients of the derivative numerator as commonly printed, and the
/// ones obtained by differentiating f with respect to u = m². They differ by
/// (LQ − MR)(C + Du)². Both are scale-normalised.
QuadCoeffs printed_coefficients(const SnrTerms& t);
QuadCoeffs derived_coefficients(const SnrTerms& t);

struct StationaryPoints {
  std::vector<double> m;    // ascending, verified by finite differences
  bool degenerate = false;  // f is constant
};

StationaryPoints stationary_candidates(const SnrTerms& t);

struct MStep {
  bool feasible = false;
  double m = 0.0;
  CaseLabel label = CaseLabel::Infeasible;
  Interval interval;
  std::vector<double> candidates;
};

/// Power allocation at a fixed phase: argmax of f over the interval ends and
/// the stationary points inside. Ties go to the smaller m.
MStep optimize_m(const SnrTerms& t, const SystemParams& p, double phi);

/// −φ₁ wrapped to [0, 2π).
double optimal_phase_continuous(const SnrTerms& t);

/// Grid {0, Δ, 2Δ, ...} ∩ [0, 2π). Δ = 2π gives the single point 0.
std::vector<double> phase_grid(double delta_phi);

/// Better of the two grid neighbours of −φ₁ for the γ_P denominator at
/// fixed (m, n). Ties go to the smaller angle.
double optimal_phase_discrete(const SnrTerms& t, double delta_phi, double m, double n);

Solution solve(const ChannelSet& ch, const SystemParams& p, const Strategy& s,
               const SolveOptions& opts = {});

/// Terms as seen by strategy `s`: the AN baseline has no pseudo-decoding.
SystemParams effective_params(const SystemParams& p, const Strategy& s);

}  // namespace fdsr
