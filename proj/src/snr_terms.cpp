#include "fdsr/snr_terms.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "fdsr/errors.hpp"

namespace fdsr {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(std::string("SystemParams: ") + what);
}

bool unit_range(double x) { return x >= 0.0 && x <= 1.0; }
bool nonneg(double x) { return x >= 0.0 && std::isfinite(x); }

}  // namespace

void SystemParams::validate() const {
  require(nonneg(p_a), "p_a must be >= 0");
  require(nonneg(p_e), "p_e must be >= 0");
  require(nonneg(sigma2_a) && nonneg(sigma2_p) && nonneg(sigma2_e),
          "noise variances must be >= 0");
  require(unit_range(gamma_refl), "gamma_refl must be in [0,1]");
  require(std::isfinite(phi_s), "phi_s must be finite");
  require(unit_range(theta), "theta must be in [0,1]");
  require(unit_range(beta), "beta must be in [0,1]");
  require(unit_range(tau), "tau must be in [0,1]");
  require(alpha == 0 || alpha == 1, "alpha must be 0 or 1");
  require(unit_range(lambda), "lambda must be in [0,1]");
  require(nonneg(kappa1) && nonneg(kappa2) && nonneg(kappa3), "kappa must be >= 0");
  require(nonneg(gamma_th_p), "gamma_th_p must be >= 0");
}

SnrTerms compute_terms(const ChannelSet& ch, const SystemParams& p) {
  const double g = p.gamma_refl;
  const double ps = p.phi_s;
  const double alpha = p.alpha;

  const double h_ap = ch.ap.magnitude, f_ap = ch.ap.phase;
  const double h_as = ch.as.magnitude, f_as = ch.as.phase;
  const double h_sa = ch.sa.magnitude, f_sa = ch.sa.phase;
  const double h_sp = ch.sp.magnitude, f_sp = ch.sp.phase;
  const double h_ep = ch.ep.magnitude, f_ep = ch.ep.phase;
  const double h_es = ch.es.magnitude, f_es = ch.es.phase;
  const double h_se = ch.se.magnitude, f_se = ch.se.phase;
  const double h_ea = ch.ea.magnitude, f_ea = ch.ea.phase;
  const double h_ae = ch.ae.magnitude, f_ae = ch.ae.phase;

  SnrTerms t;

  // A -> P direct and A -> S -> P backscatter paths.
  const double asp = p.kappa2 * h_sp * g * h_as;
  const double ap = p.kappa3 * h_ap;
  const double carrier_p =
      asp * asp + ap * ap + 2.0 * asp * ap * std::cos(f_sp - ps + f_as - f_ap);
  t.t2 = carrier_p;

  const double ep = p.kappa1 * h_ep;
  const double esp = p.kappa2 * h_sp * g * h_es;
  t.u2 = p.p_e * (ep * ep + esp * esp + 2.0 * ep * esp * std::cos(f_ep - f_sp - f_es + ps));

  t.v2 = h_ea * h_ea * p.p_e * carrier_p;

  const double y1 = ep * std::sin(f_ep) + esp * std::sin(f_sp + f_es - ps);
  const double x1 = ep * std::cos(f_ep) + esp * std::cos(f_sp + f_es - ps);
  const double y2 = asp * std::sin(f_sp - ps + f_as + f_ea) + ap * std::sin(f_ap + f_ea);
  const double x2 = asp * std::cos(f_sp - ps + f_as + f_ea) + ap * std::cos(f_ap + f_ea);
  t.phi1 = std::atan2(y1, x1) - std::atan2(y2, x2);

  // No cross term here, unlike V².
  t.j2 = p.sigma2_a * (ap * ap + asp * asp);
  t.g2 = p.sigma2_p;

  const double asa = h_sa * h_as * g;
  const double asa2 = asa * asa;
  t.m_hat = p.p_a * p.theta * asa2;
  t.q_hat = (1.0 - p.theta) * asa2;

  const double esa = h_sa * g * h_es;
  const double attack_a =
      esa * esa + h_ea * h_ea + 2.0 * esa * h_ea * std::cos(f_sa + f_es - ps - f_ea);
  t.l_term = p.tau * p.p_e * attack_a + p.beta * p.p_a * (1.0 - p.theta) * asa2 + p.sigma2_a;
  t.r_term = -p.beta * (1.0 - p.theta) * asa2;

  const double ese = h_se * g * h_es;
  t.a_hat = ese * ese * p.p_e;
  const double ase_dec = alpha * p.lambda * h_as * g * h_se;
  t.b_hat = ase_dec * ase_dec;

  const double ase = h_se * g * h_as;
  const double ae = alpha * h_ae;
  const double carrier_e =
      ase * ase + ae * ae + 2.0 * ase * ae * std::cos(f_se - ps + f_as - f_ae);
  t.c_den = p.p_a * carrier_e + p.sigma2_e;
  t.d_den = -p.lambda * p.lambda * carrier_e;

  t.m_agg = t.m_hat + t.l_term;
  t.q_agg = t.q_hat + t.r_term;
  t.a_agg = t.a_hat + t.c_den;
  t.b_agg = t.b_hat + t.d_den;
  t.sigma2_n = h_ea * h_ea * p.p_e + p.sigma2_a;
  return t;
}

double gamma_p_cos(const SnrTerms& t, double m, double n, double cos_term) {
  const double u = std::sqrt(t.u2);
  const double v = std::sqrt(t.v2);
  const double diff = u - n * v;
  const double den = diff * diff + 2.0 * n * u * v * (1.0 - cos_term) + t.g2 + n * n * t.j2;
  if (!(den > 0.0)) {
    throw ModelViolation("gamma_p: nonpositive denominator");
  }
  return m * m * t.t2 / den;
}

double gamma_p(const SnrTerms& t, double m, double n, double phi_a) {
  return gamma_p_cos(t, m, n, std::cos(phi_a + t.phi1));
}

double gamma_a(const SnrTerms& t, double m) {
  const double m2 = m * m;
  const double den = t.l_term + t.r_term * m2;
  if (!(den > 0.0)) {
    throw ModelViolation("gamma_a: nonpositive denominator");
  }
  return (t.m_hat + t.q_hat * m2) / den;
}

double gamma_e(const SnrTerms& t, double m) {
  const double m2 = m * m;
  const double den = t.c_den + t.d_den * m2;
  if (!(den > 0.0)) {
    throw ModelViolation("gamma_e: nonpositive denominator");
  }
  return (t.a_hat + t.b_hat * m2) / den;
}

double security_rate(double g_a, double g_e) {
  if (std::isinf(g_e)) return 0.0;
  const double r = std::log2(1.0 + g_a) - std::log2(1.0 + g_e);
  return r > 0.0 ? r : 0.0;
}

double an_amplitude(const SnrTerms& t, double p_a, double m) {
  if (!(t.sigma2_n > 0.0)) return 0.0;
  const double rest = p_a - m * m;
  return rest > 0.0 ? std::sqrt(rest / t.sigma2_n) : 0.0;
}

}  // namespace fdsr
