#pragma once

#include <optional>

#include "switchaff/design.hpp"

namespace sa {

// Blended simplex point: mode i's weight raised by eps, the rest shrunk
// proportionally. Affine in eps; gamma(0) = lambda.
Vec gamma_blend(const SimplexVector& lambda, double eps, int i);

// Modes with positive weight in lambda.
std::vector<int> active_set(const SimplexVector& lambda);

// Largest eps for which gamma_blend stays on the simplex for every active
// mode and both signs, capped at 1.
double eps_max(const SimplexVector& lambda);

// Uniform decrease rate of the slow block over the active blends:
// rho = -max_i max_{s=+-eps} s_max(He(S_bar A_gamma V_bar)).
double find_rho(const SwitchingLaw& law, double eps);

// Quadratic-plus-linear pieces of f_i around the equilibrium:
// f_i = quadratic + 2 g_i, g_i = xi_bar' U_i xi_perp + (S_bar l_i)' xi_bar
// + (S_perp l_i)' xi_perp, and h_i = (g_i's linear part)^2 / 2.
double g_value(const SwitchingLaw& law, int i, const Vec& xi);
double h_value(const SwitchingLaw& law, int i, const Vec& xi);

// Gram matrix of a quartic certificate over the monomial basis
// [1, zeta_1..zeta_n, deg-2 monomials] (or the deg>=1 suffix).
struct QuarticGram {
  std::vector<std::string> basis; // printable monomial labels
  Mat gram;
  double min_eig = 0.0;
  double recon_residual = 0.0; // max |coeff mismatch| vs the target poly
};

struct SosResult {
  double beta = 0.0;
  bool feasible = false;
  std::vector<QuarticGram> grams_lower; // |g_i| >= beta h_i side, per mode
  std::vector<QuarticGram> grams_upper; // |g_i| <= 1/beta side, per mode
  std::vector<QuarticGram> multipliers_lower; // phi_i
  std::vector<QuarticGram> multipliers_upper; // psi_i
  double solver_margin = 0.0;
  double bhat = 0.0;        // optimized beta^2 in normalized coefficients
  double coeff_scale = 1.0; // beta = sqrt(bhat) / coeff_scale
  int soundness_violations = 0;
  // Coefficient vectors that patch the certificates when beta is lowered.
  std::vector<Vec> patch_lower;
  std::vector<Vec> patch_upper;
};

struct RateOptions {
  int eps_grid = 50;
  double delta_shift = 2e-9; // PSD slack restoring a strict interior
  bool bisection_fallback = true;
  std::optional<Vec> mode_weights; // non-uniform W W' weighting
  bool general_G = false;          // solve a small SDP for G instead of rho I
  std::optional<double> fixed_beta; // skip the SOS search, take beta as given
  unsigned long long seed = 12345;  // sampling seed for the soundness check
  SolveOptions solve;
};

// Largest beta with a sum-of-squares witness that every g_i is steep
// (|g_i| >= beta h_i) yet bounded (|g_i| <= 1/beta) on the sublevel set
// v <= r.
SosResult sos_find_beta(const SwitchingLaw& law, double r,
                        const RateOptions& options = {});

// Replaces a certificate's beta by a smaller one, adding the exact PSD
// rank-one correction that keeps every Gram a witness for the new value.
void lower_beta(SosResult& sos, double new_beta);

struct RateCertificate {
  double alpha = 0.0;
  double eps = 0.0;
  double rho = 0.0;
  double beta = 0.0;
  double r = 0.0;
  Mat Q;
  bool certified = false;
};

// Exponential-rate certificate on v <= r: alpha = s_min(Q) / s_max(P) with
// Q = blkdiag(rho I, 0) + (eps beta / |K_a|) W W', maximized over an eps
// grid (refined once around the best point).
RateCertificate certify_rate(const SwitchingLaw& law, double r,
                             const RateOptions& options = {});

struct RateCurveRow {
  double r = 0.0;
  double beta = 0.0;
  double eps = 0.0;
  double alpha = 0.0;
};

// certify_rate over a grid of radii; beta is monotonized downward with the
// certificates patched so they stay exact witnesses.
std::vector<RateCurveRow> rate_curve(const SwitchingLaw& law,
                                     const std::vector<double>& radii,
                                     const RateOptions& options = {});

}  // namespace sa
