#pragma once
#include <stdexcept>
#include <vector>

namespace elicit {

// A second-moment report whose implied mean-parameter variance is not
// positive semidefinite.
struct InconsistentReportError : std::runtime_error {
  explicit InconsistentReportError(const std::string& what) : std::runtime_error(what) {}
};

// An exponential family on a finite outcome set: p(x | theta) proportional
// to exp(<phi(x), theta>) with theta restricted to a box.  The statistic
// must be minimal (no nonzero theta makes <theta, phi(x)> constant in x),
// and the dimension is capped at 2 so that box quadrature stays cheap.
struct FiniteExpFamily {
  std::vector<std::vector<double>> phi;  // |X| rows, dim columns
  std::vector<double> box_lo, box_hi;
  int grid_points = 201;  // quadrature nodes per dimension

  FiniteExpFamily(std::vector<std::vector<double>> statistic, std::vector<double> lo,
                  std::vector<double> hi, int grid_points = 201);

  int outcomes() const { return static_cast<int>(phi.size()); }
  int dim() const { return static_cast<int>(phi.empty() ? 0 : phi[0].size()); }

  // log sum_x exp(<phi(x), theta>).
  double cumulant(const std::vector<double>& theta) const;
  // Softmax-weighted mean of the statistic, equal to E[phi | theta].
  std::vector<double> grad_cumulant(const std::vector<double>& theta) const;
  // Covariance of phi under p(x | theta).
  std::vector<std::vector<double>> hess_cumulant(const std::vector<double>& theta) const;
  // Newton solve of grad_cumulant(theta) = mu; throws std::domain_error when
  // mu is not a mean realizable inside the box.
  std::vector<double> mean_to_natural(const std::vector<double>& mu) const;
};

struct ExpFamHyper {
  std::vector<double> nu;
  double n = 1.0;
};

// Predictive mass per outcome, p(x | nu, n) = integral of p(x | theta)
// against the conjugate prior exp{<theta, nu> - n g(theta)} normalized on
// the box.  Throws std::domain_error when the prior is not normalizable
// there (its mass piles up on the box boundary).
std::vector<double> expfam_ppd(const FiniteExpFamily& fam, const ExpFamHyper& hyper);

// Max deviation over coordinates between the predictive's expected
// statistic and nu / n.
double credible_mean_check(const FiniteExpFamily& fam, const ExpFamHyper& hyper);

enum class SweepFlag { injective, non_injective, mixed };

// Predictives p(x | n*mu, n) along a grid of n at fixed implied mean mu.
struct InjectivitySweep {
  std::vector<double> n_values;
  std::vector<std::vector<double>> ppds;
  double min_pairwise_gap = 0.0;  // smallest sup-distance between two rows
  double max_pairwise_gap = 0.0;
  std::vector<double> kl_to_mode;  // KL(ppd_n || p(x | theta_hat))
  SweepFlag flag = SweepFlag::mixed;
};

// Evidence probe: distinct-n predictives all separated by more than `tol`
// flags `injective`; all within `tol` flags `non_injective` (expected when
// dim phi == |X| - 1).  Reported as evidence, not proof.
InjectivitySweep injectivity_sweep(const FiniteExpFamily& fam, const std::vector<double>& mu,
                                   const std::vector<double>& n_grid, double tol = 1e-6);

// R2 - r1 r1^T, the posterior variance of the mean parameter implied by
// first and second moment reports of the statistic.  R2 must be symmetric
// and the result positive semidefinite within 1e-9.
std::vector<std::vector<double>> second_moment_variance(const std::vector<double>& r1,
                                                        const std::vector<std::vector<double>>& R2);

// Trace of the mean-parameter variance along an n grid at fixed mean.
struct VarianceSweep {
  std::vector<double> n_values;
  std::vector<double> traces;
  bool strictly_decreasing = false;
};

// Dirichlet case in closed form: alpha = n * p, with R2 the exact pair
// moment E[theta theta^T | alpha].
VarianceSweep dirichlet_variance_sweep(const std::vector<double>& p,
                                       const std::vector<double>& n_grid);

}  // namespace elicit
