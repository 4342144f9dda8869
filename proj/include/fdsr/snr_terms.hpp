#pragma once

#include "fdsr/channel.hpp"

namespace fdsr {

/// Scalar model parameters. Powers and noise variances are in watts.
struct SystemParams {
  double p_a = 2.0;          // transmit budget of the access point
  double p_e = 2.0;          // eavesdropper attack power
  double sigma2_a = 1e-11;   // -80 dBm
  double sigma2_p = 1e-11;
  double sigma2_e = 1e-11;
  double gamma_refl = 0.7;   // backscatter amplitude coefficient
  double phi_s = 0.0;        // tag circuit phase
  double theta = 0.5;        // pseudo-information fraction of the AN power
  double beta = 0.01;        // residual of the pseudo-noise after cancellation
  double tau = 1e-4;         // residual of the attack signal after cancellation
  int alpha = 1;             // eavesdropper antenna: 1 omni, 0 directional
  double lambda = 1.0;       // eavesdropper decode/cancel ability
  double kappa1 = 1.0;
  double kappa2 = 1.0;
  double kappa3 = 1.0;
  double gamma_th_p = 10.0;  // primary SNR threshold (linear)

  void validate() const;
};

/// Closed-form building blocks of the three SNRs.
///
///   γ_P = m²T² / [(U² + G²) + n²(V² + J²) − 2nUV·cos(φ_A + φ₁)]
///   γ_A = (M̂ + Q̂m²) / (L + Rm²)
///   γ_E = (Â + B̂m²) / (C + Dm²)
///
/// `c_den`/`d_den` are the eavesdropper denominator constants. The
/// aggregates are M = M̂+L, Q = Q̂+R, A = Â+C, B = B̂+D.
struct SnrTerms {
  double t2 = 0, u2 = 0, v2 = 0, j2 = 0, g2 = 0;
  double phi1 = 0;
  double m_hat = 0, q_hat = 0, l_term = 0, r_term = 0;
  double a_hat = 0, b_hat = 0, c_den = 0, d_den = 0;
  double m_agg = 0, q_agg = 0, a_agg = 0, b_agg = 0;
  double sigma2_n = 0;
};

SnrTerms compute_terms(const ChannelSet& ch, const SystemParams& p);

/// γ_P with the cross term weighted by `cos_term` = cos(φ_A + φ₁). The
/// denominator is evaluated as (U − nV)² + 2nUV(1 − cos_term) + G² + n²J²,
/// which is exact near the deep null at cos_term = 1.
double gamma_p_cos(const SnrTerms& t, double m, double n, double cos_term);

double gamma_p(const SnrTerms& t, double m, double n, double phi_a);
double gamma_a(const SnrTerms& t, double m);
double gamma_e(const SnrTerms& t, double m);

/// max{0, log2(1+γ_A) − log2(1+γ_E)} in bits/s/Hz.
double security_rate(double g_a, double g_e);

/// AN amplitude implied by the power constraint m² + n²σ²_N = P_A.
double an_amplitude(const SnrTerms& t, double p_a, double m);

}  // namespace fdsr
