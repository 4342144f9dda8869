#include "fdsr/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fdsr::oracle {

namespace {

using cplx = std::complex<double>;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTau = 2.0 * std::numbers::pi;

cplx coeff(const Link& l) { return std::polar(l.magnitude, -l.phase); }

double ratio(double signal, double interference) {
  return interference > 0.0 ? signal / interference : kInf;
}

// Complex path gains for one channel block.
class PhasorModel {
public:
  PhasorModel(const ChannelSet& ch, const SystemParams& p, bool coherent_an)
      : p_(p), coherent_(coherent_an) {
    const cplx tag = std::polar(p.gamma_refl, p.phi_s);
    const cplx ap = coeff(ch.ap), as = coeff(ch.as), sa = coeff(ch.sa), sp = coeff(ch.sp);
    const cplx ep = coeff(ch.ep), es = coeff(ch.es), se = coeff(ch.se);
    const cplx ea = coeff(ch.ea), ae = coeff(ch.ae);

    direct_p_ = p.kappa3 * ap;
    back_p_ = p.kappa2 * as * tag * sp;
    carrier_p_ = direct_p_ + back_p_;
    attack_p_ = p.kappa1 * ep + p.kappa2 * es * tag * sp;
    an_p_ = ea * carrier_p_;  // attack copy re-radiated by A, seen at P

    loop_a_ = as * tag * sa;
    attack_a_ = es * tag * sa + ea;
    an_power_ = std::norm(ea) * p.p_e + p.sigma2_a;

    own_e_ = es * tag * se;
    data_e_ = as * tag * se;
    carrier_e_ = data_e_ + static_cast<double>(p.alpha) * ae;
  }

  double an_power() const { return an_power_; }

  double signal_p(double m) const { return m * m * std::norm(carrier_p_); }

  double interference_p(double n, cplx rotor) const {
    const double pe = p_.p_e;
    double attack = 0.0;
    if (coherent_) {
      attack = pe * std::norm(attack_p_ - n * rotor * an_p_);
    } else {
      attack = pe * std::norm(attack_p_) + n * n * pe * std::norm(an_p_);
    }
    // A's antenna noise reaches P over both paths; the two copies are added
    // in power.
    const double antenna =
        n * n * p_.sigma2_a * (std::norm(direct_p_) + std::norm(back_p_));
    return attack + antenna + p_.sigma2_p;
  }

  double gamma_a(double m, double n) const {
    const double loop = std::norm(loop_a_);
    const double an = n * n * an_power_;
    const double signal = loop * (m * m + p_.theta * an);
    const double interference = p_.tau * p_.p_e * std::norm(attack_a_) +
                                p_.beta * loop * (1.0 - p_.theta) * an + p_.sigma2_a;
    return ratio(signal, interference);
  }

  double gamma_e(double m, double n) const {
    const double dec = static_cast<double>(p_.alpha) * p_.lambda;
    const double signal = std::norm(own_e_) * p_.p_e + dec * dec * std::norm(data_e_) * m * m;
    const double residual = (1.0 - p_.lambda * p_.lambda) * m * m;
    const double interference =
        std::norm(carrier_e_) * (residual + n * n * an_power_) + p_.sigma2_e;
    return ratio(signal, interference);
  }

  double secrecy(double m, double n) const {
    const double ge = gamma_e(m, n);
    const double ga = gamma_a(m, n);
    if (std::isinf(ge) || std::isinf(ga)) return 0.0;
    return std::max(0.0, std::log2(1.0 + ga) - std::log2(1.0 + ge));
  }

private:
  SystemParams p_;
  bool coherent_;
  cplx direct_p_, back_p_, carrier_p_, attack_p_, an_p_;
  cplx loop_a_, attack_a_;
  cplx own_e_, data_e_, carrier_e_;
  double an_power_ = 0.0;
};

struct Search {
  PhasorModel model;
  SystemParams p;
  std::vector<double> phases;
  std::vector<cplx> rotors;
  bool clamp;

  double n_of(double m) const {
    const double rest = p.p_a - m * m;
    const double s2 = model.an_power();
    return (rest > 0.0 && s2 > 0.0) ? std::sqrt(rest / s2) : 0.0;
  }

  // Index of the phase with the largest γ_P at m, or none if C1 fails for all.
  std::optional<std::size_t> best_phase(double m) const {
    const double n = n_of(m);
    const double sig = model.signal_p(m);
    std::optional<std::size_t> best;
    double best_g = -1.0;
    for (std::size_t j = 0; j < rotors.size(); ++j) {
      const double g = ratio(sig, model.interference_p(n, rotors[j]));
      if (g > best_g) {
        best_g = g;
        best = j;
      }
    }
    if (clamp && !(best_g >= p.gamma_th_p)) return std::nullopt;
    return best;
  }

  bool feasible(double m) const {
    if (!clamp) return true;
    const double n = n_of(m);
    const double sig = model.signal_p(m);
    for (const cplx& r : rotors) {
      if (ratio(sig, model.interference_p(n, r)) >= p.gamma_th_p) return true;
    }
    return false;
  }
};

struct Pick {
  double m = 0.0;
  double r = -1.0;
  bool found = false;
};

// Strictly better, or equal with smaller m.
bool better(double r, double m, const Pick& cur) {
  return !cur.found || r > cur.r || (r == cur.r && m < cur.m);
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  v.back() = hi;
  return v;
}

Pick scan_serial(const Search& s, const std::vector<double>& ms) {
  Pick pick;
  for (double m : ms) {
    const double r = s.model.secrecy(m, s.n_of(m));
    if (better(r, m, pick) && s.feasible(m)) {
      pick = {m, r, true};
    }
  }
  return pick;
}

Pick scan_ordered(const Search& s, const std::vector<double>& ms) {
  const std::size_t n = ms.size();
  std::vector<double> r(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    r[i] = s.model.secrecy(ms[i], s.n_of(ms[i]));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return r[a] > r[b] || (r[a] == r[b] && ms[a] < ms[b]);
  });

  constexpr std::size_t kBlock = 256;
  std::vector<char> ok(kBlock);
  for (std::size_t start = 0; start < n; start += kBlock) {
    const std::size_t len = std::min(kBlock, n - start);
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(len); ++k) {
      ok[k] = s.feasible(ms[order[start + k]]) ? 1 : 0;
    }
    for (std::size_t k = 0; k < len; ++k) {
      if (ok[k]) {
        const std::size_t i = order[start + k];
        return {ms[i], r[i], true};
      }
    }
  }
  return {};
}

Solution run(const ChannelSet& ch, const SystemParams& p_in, const Strategy& strat,
             const GridSpec& g, bool parallel) {
  p_in.validate();
  strat.validate();
  g.validate();

  SystemParams p = p_in;
  const bool an = strat.scheme == Scheme::AN;
  if (an) p.theta = 0.0;

  Search s{PhasorModel(ch, p, !an), p, {}, {}, g.clamp_to_feasible};
  if (an) {
    s.phases = {0.0};
  } else if (strat.phase_mode == PhaseMode::Continuous) {
    for (std::size_t k = 0; k < g.phase_points; ++k) {
      s.phases.push_back(kTau * static_cast<double>(k) / static_cast<double>(g.phase_points));
    }
  } else if (strat.phase_mode == PhaseMode::Discrete) {
    for (int k = 0; k * strat.delta_phi < kTau - 1e-9; ++k) {
      s.phases.push_back(k * strat.delta_phi);
    }
  } else {
    double f = std::fmod(strat.fixed_phase, kTau);
    if (f < 0.0) f += kTau;
    s.phases = {f >= kTau ? 0.0 : f};
  }
  for (double ph : s.phases) s.rotors.push_back(std::polar(1.0, ph));

  const double m_max = std::sqrt(p.p_a);
  auto scan = parallel ? scan_ordered : scan_serial;
  std::vector<double> ms = linspace(0.0, m_max, g.m_points);
  Pick pick = scan(s, ms);

  double spacing = g.m_points > 1 ? m_max / static_cast<double>(g.m_points - 1) : 0.0;
  for (std::size_t level = 0; pick.found && level < g.refine_levels && spacing > 0.0; ++level) {
    const double lo = std::max(0.0, pick.m - spacing);
    const double hi = std::min(m_max, pick.m + spacing);
    const Pick local = scan(s, linspace(lo, hi, g.refine_points));
    if (local.found && better(local.r, local.m, pick)) pick = local;
    spacing = (hi - lo) / static_cast<double>(g.refine_points - 1);
  }

  Solution sol;
  if (!pick.found) {
    sol.case_label = CaseLabel::Infeasible;
    return sol;
  }
  sol.feasible = true;
  sol.case_label = CaseLabel::BoundaryOnly;
  sol.m_star = pick.m;
  sol.n_star = s.n_of(pick.m);
  const auto j = s.best_phase(pick.m);
  sol.phi_a_star = s.phases[j.value_or(0)];
  const PhasorSnr snr = phasor_snr(ch, p, sol.m_star, sol.n_star, sol.phi_a_star, !an);
  sol.gamma_p = snr.gamma_p;
  sol.gamma_a = snr.gamma_a;
  sol.gamma_e = snr.gamma_e;
  sol.r_s = pick.r;
  sol.objective_trace = {pick.r};
  return sol;
}

}  // namespace

void GridSpec::validate() const {
  if (m_points < 2) throw std::invalid_argument("GridSpec: m_points must be >= 2");
  if (phase_points < 1) throw std::invalid_argument("GridSpec: phase_points must be >= 1");
  if (refine_levels > 0 && refine_points < 3) {
    throw std::invalid_argument("GridSpec: refine_points must be >= 3");
  }
}

PhasorSnr phasor_snr(const ChannelSet& ch, const SystemParams& p, double m, double n,
                     double phi_a, bool coherent_an) {
  const PhasorModel model(ch, p, coherent_an);
  PhasorSnr out;
  out.gamma_p = ratio(model.signal_p(m), model.interference_p(n, std::polar(1.0, phi_a)));
  out.gamma_a = model.gamma_a(m, n);
  out.gamma_e = model.gamma_e(m, n);
  return out;
}

Solution grid_search(const ChannelSet& ch, const SystemParams& p, const Strategy& s,
                     const GridSpec& g) {
  return run(ch, p, s, g, true);
}

Solution grid_search_serial(const ChannelSet& ch, const SystemParams& p, const Strategy& s,
                            const GridSpec& g) {
  return run(ch, p, s, g, false);
}

}  // namespace fdsr::oracle
