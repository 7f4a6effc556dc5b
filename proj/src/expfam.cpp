#include "elicit/expfam.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace elicit {

namespace {

// Column rank of an |X| x c matrix by Gaussian elimination.
int matrix_rank(std::vector<std::vector<double>> a) {
  if (a.empty()) return 0;
  size_t rows = a.size(), cols = a[0].size();
  double scale = 0.0;
  for (const auto& row : a)
    for (double v : row) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return 0;
  double tol = 1e-9 * scale;
  int rank = 0;
  size_t pivot_row = 0;
  for (size_t col = 0; col < cols && pivot_row < rows; ++col) {
    size_t best = pivot_row;
    for (size_t r = pivot_row + 1; r < rows; ++r)
      if (std::abs(a[r][col]) > std::abs(a[best][col])) best = r;
    if (std::abs(a[best][col]) <= tol) continue;
    std::swap(a[pivot_row], a[best]);
    for (size_t r = pivot_row + 1; r < rows; ++r) {
      double f = a[r][col] / a[pivot_row][col];
      for (size_t c = col; c < cols; ++c) a[r][c] -= f * a[pivot_row][c];
    }
    ++pivot_row;
    ++rank;
  }
  return rank;
}

std::vector<double> solve_spd(const std::vector<std::vector<double>>& m,
                              const std::vector<double>& rhs) {
  if (m.size() == 1) return {rhs[0] / m[0][0]};
  double det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
  return {(m[1][1] * rhs[0] - m[0][1] * rhs[1]) / det,
          (-m[1][0] * rhs[0] + m[0][0] * rhs[1]) / det};
}

struct ThetaGrid {
  std::vector<std::vector<double>> nodes;
  std::vector<double> weights;     // trapezoid weights
  std::vector<bool> boundary;     // node lies on the window edge
};

// Orthonormal frame for the quadrature window: identity for k == 1,
// Hessian eigenvectors for k == 2 so the grid tracks correlated ridges.
struct Frame {
  std::vector<double> origin;
  std::vector<std::vector<double>> axes;  // axes[c] = unit vector of coord c

  std::vector<double> theta_at(const std::vector<double>& coords) const {
    std::vector<double> t = origin;
    for (size_t c = 0; c < coords.size(); ++c)
      for (size_t j = 0; j < t.size(); ++j) t[j] += coords[c] * axes[c][j];
    return t;
  }
};

Frame eigen_frame(const std::vector<double>& mode, const std::vector<std::vector<double>>& hess) {
  Frame f;
  f.origin = mode;
  if (mode.size() == 1) {
    f.axes = {{1.0}};
    return f;
  }
  double a = hess[0][0], b = 0.5 * (hess[0][1] + hess[1][0]), c = hess[1][1];
  if (std::abs(b) < 1e-14 * std::max(std::abs(a), std::abs(c))) {
    f.axes = {{1.0, 0.0}, {0.0, 1.0}};
    return f;
  }
  double half_tr = 0.5 * (a + c);
  double disc = std::sqrt(0.25 * (a - c) * (a - c) + b * b);
  double l1 = half_tr + disc;
  std::vector<double> e1 = {b, l1 - a};
  double norm = std::hypot(e1[0], e1[1]);
  e1 = {e1[0] / norm, e1[1] / norm};
  f.axes = {e1, {-e1[1], e1[0]}};
  return f;
}

bool inside_box(const FiniteExpFamily& fam, const std::vector<double>& theta) {
  for (size_t j = 0; j < theta.size(); ++j)
    if (theta[j] < fam.box_lo[j] || theta[j] > fam.box_hi[j]) return false;
  return true;
}

}  // namespace

FiniteExpFamily::FiniteExpFamily(std::vector<std::vector<double>> statistic, std::vector<double> lo,
                                 std::vector<double> hi, int grid)
    : phi(std::move(statistic)), box_lo(std::move(lo)), box_hi(std::move(hi)), grid_points(grid) {
  if (phi.size() < 2) throw std::invalid_argument("finite family needs at least 2 outcomes");
  size_t k = phi[0].size();
  if (k < 1 || k > 2) throw std::invalid_argument("statistic dimension must be 1 or 2");
  for (const auto& row : phi)
    if (row.size() != k) throw std::invalid_argument("statistic rows must share one dimension");
  if (box_lo.size() != k || box_hi.size() != k)
    throw std::invalid_argument("parameter box dimension must match the statistic");
  for (size_t i = 0; i < k; ++i)
    if (!(box_lo[i] < box_hi[i])) throw std::invalid_argument("parameter box must be nonempty");
  if (grid_points < 9) throw std::invalid_argument("grid too coarse");
  // Minimality: no nonzero theta makes <theta, phi(x)> constant over x,
  // i.e. the statistic columns plus the all-ones column are independent.
  std::vector<std::vector<double>> aug = phi;
  for (auto& row : aug) row.push_back(1.0);
  if (matrix_rank(aug) != static_cast<int>(k) + 1)
    throw std::invalid_argument("statistic is not minimal");
}

double FiniteExpFamily::cumulant(const std::vector<double>& theta) const {
  double best = -std::numeric_limits<double>::infinity();
  std::vector<double> dots(phi.size());
  for (size_t x = 0; x < phi.size(); ++x) {
    double d = 0.0;
    for (size_t j = 0; j < theta.size(); ++j) d += phi[x][j] * theta[j];
    dots[x] = d;
    best = std::max(best, d);
  }
  double s = 0.0;
  for (double d : dots) s += std::exp(d - best);
  return best + std::log(s);
}

std::vector<double> FiniteExpFamily::grad_cumulant(const std::vector<double>& theta) const {
  double g = cumulant(theta);
  std::vector<double> mean(dim(), 0.0);
  for (size_t x = 0; x < phi.size(); ++x) {
    double d = 0.0;
    for (size_t j = 0; j < theta.size(); ++j) d += phi[x][j] * theta[j];
    double w = std::exp(d - g);
    for (int j = 0; j < dim(); ++j) mean[j] += w * phi[x][j];
  }
  return mean;
}

std::vector<std::vector<double>> FiniteExpFamily::hess_cumulant(const std::vector<double>& theta) const {
  double g = cumulant(theta);
  std::vector<double> mean = grad_cumulant(theta);
  std::vector<std::vector<double>> h(dim(), std::vector<double>(dim(), 0.0));
  for (size_t x = 0; x < phi.size(); ++x) {
    double d = 0.0;
    for (size_t j = 0; j < theta.size(); ++j) d += phi[x][j] * theta[j];
    double w = std::exp(d - g);
    for (int a = 0; a < dim(); ++a)
      for (int b = 0; b < dim(); ++b) h[a][b] += w * (phi[x][a] - mean[a]) * (phi[x][b] - mean[b]);
  }
  return h;
}

std::vector<double> FiniteExpFamily::mean_to_natural(const std::vector<double>& mu) const {
  if (static_cast<int>(mu.size()) != dim())
    throw std::invalid_argument("mean_to_natural: dimension mismatch");
  double bound = 1.0;
  for (int j = 0; j < dim(); ++j)
    bound = std::max({bound, std::abs(box_lo[j]), std::abs(box_hi[j])});
  bound *= 4.0;
  std::vector<double> theta(dim(), 0.0);
  for (int it = 0; it < 500; ++it) {
    std::vector<double> g = grad_cumulant(theta);
    std::vector<double> r(dim());
    double rnorm = 0.0;
    for (int j = 0; j < dim(); ++j) {
      r[j] = mu[j] - g[j];
      rnorm = std::max(rnorm, std::abs(r[j]));
    }
    if (!std::isfinite(rnorm))
      throw std::domain_error("mean not realizable inside the parameter box");
    if (rnorm < 1e-13) {
      for (int j = 0; j < dim(); ++j)
        if (theta[j] < box_lo[j] || theta[j] > box_hi[j])
          throw std::domain_error("mean not realizable inside the parameter box");
      return theta;
    }
    std::vector<double> step = solve_spd(hess_cumulant(theta), r);
    double norm = 0.0;
    for (double s : step) norm = std::max(norm, std::abs(s));
    if (!std::isfinite(norm))
      throw std::domain_error("mean not realizable inside the parameter box");
    if (norm > 10.0)
      for (double& s : step) s *= 10.0 / norm;
    for (int j = 0; j < dim(); ++j) theta[j] += step[j];
    for (double t : theta)
      if (std::abs(t) > bound) throw std::domain_error("mean not realizable inside the parameter box");
  }
  throw std::domain_error("mean_to_natural: no convergence");
}

namespace {

double log_prior_unnorm(const FiniteExpFamily& fam, const ExpFamHyper& h,
                        const std::vector<double>& theta) {
  double dot = 0.0;
  for (size_t j = 0; j < theta.size(); ++j) dot += theta[j] * h.nu[j];
  return dot - h.n * fam.cumulant(theta);
}

// Tensor trapezoid grid over the coordinate rectangle [lo, hi] in `frame`.
// Nodes that leave the family box get zero weight; they are consumed by the
// caller's boundary-mass check.
ThetaGrid make_grid(const FiniteExpFamily& fam, const Frame& frame, const std::vector<double>& lo,
                    const std::vector<double>& hi, int g) {
  ThetaGrid grid;
  size_t k = lo.size();
  std::vector<double> step(k);
  for (size_t c = 0; c < k; ++c) step[c] = (hi[c] - lo[c]) / (g - 1);
  long total = 1;
  for (size_t c = 0; c < k; ++c) total *= g;
  std::vector<double> coords(k);
  for (long flat = 0; flat < total; ++flat) {
    long rem = flat;
    bool edge = false;
    double w = 1.0;
    for (size_t c = 0; c < k; ++c) {
      int i = rem % g;
      rem /= g;
      coords[c] = lo[c] + i * step[c];
      w *= (i == 0 || i == g - 1) ? 0.5 * step[c] : step[c];
      edge = edge || i == 0 || i == g - 1;
    }
    std::vector<double> theta = frame.theta_at(coords);
    grid.nodes.push_back(theta);
    grid.weights.push_back(inside_box(fam, theta) ? w : 0.0);
    grid.boundary.push_back(edge || !inside_box(fam, theta));
  }
  return grid;
}

struct Window {
  Frame frame;
  std::vector<double> lo, hi;  // coordinate rectangle in the frame
};

// Quadrature window centered at the prior mode, axes aligned with the
// mode Hessian so correlated ridges stay resolved.  Directional walks give
// an initial extent (out to a log-density drop of 35); the window then
// expands face by face until no boundary node carries meaningful mass.
// Mass stuck against the family box means the prior is not normalizable
// there.
Window find_window(const FiniteExpFamily& fam, const ExpFamHyper& h) {
  if (!(h.n > 0)) throw std::invalid_argument("hyper: n must be positive");
  int k = fam.dim();
  if (static_cast<int>(h.nu.size()) != k) throw std::invalid_argument("hyper: nu dimension mismatch");
  std::vector<double> mu(k);
  for (int j = 0; j < k; ++j) mu[j] = h.nu[j] / h.n;
  std::vector<double> mode = fam.mean_to_natural(mu);
  double lw_mode = log_prior_unnorm(fam, h, mode);

  auto hess = fam.hess_cumulant(mode);
  Frame frame = eigen_frame(mode, hess);

  std::vector<std::vector<double>> dirs;  // in frame coordinates
  if (k == 1) {
    dirs = {{1.0}, {-1.0}};
  } else {
    const double s = std::sqrt(0.5);
    dirs = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {s, s}, {s, -s}, {-s, s}, {-s, -s}};
  }
  std::vector<double> lo(k, 0.0), hi(k, 0.0);
  for (const auto& dir : dirs) {
    std::vector<double> dir_theta(k, 0.0);
    for (int c = 0; c < k; ++c)
      for (int j = 0; j < k; ++j) dir_theta[j] += dir[c] * frame.axes[c][j];
    double quad = 0.0;
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) quad += dir_theta[a] * hess[a][b] * dir_theta[b];
    double sd = 1.0 / std::sqrt(std::max(h.n * quad, 1e-12));
    double t = 0.0;
    for (;;) {
      double t_next = t + sd;
      std::vector<double> coords(k);
      for (int c = 0; c < k; ++c) coords[c] = t_next * dir[c];
      std::vector<double> p = frame.theta_at(coords);
      if (!inside_box(fam, p)) break;
      t = t_next;
      if (log_prior_unnorm(fam, h, p) - lw_mode <= -35.0) break;
      if (t > 1e7) throw std::domain_error("prior is not normalizable on the parameter box");
    }
    for (int c = 0; c < k; ++c) {
      lo[c] = std::min(lo[c], t * dir[c]);
      hi[c] = std::max(hi[c], t * dir[c]);
    }
  }
  for (int c = 0; c < k; ++c) {
    if (hi[c] - lo[c] < 2e-3) {
      lo[c] -= 1e-3;
      hi[c] += 1e-3;
    }
  }

  // Longest window extent the box can hold along each frame axis.
  double box_diag = 0.0;
  for (int j = 0; j < k; ++j) box_diag += (fam.box_hi[j] - fam.box_lo[j]) * (fam.box_hi[j] - fam.box_lo[j]);
  box_diag = std::sqrt(box_diag);

  for (int attempt = 0; attempt < 80; ++attempt) {
    ThetaGrid grid = make_grid(fam, frame, lo, hi, fam.grid_points);
    // Faces with boundary mass: 2c / 2c+1 -> low/high face of coord c.
    std::vector<bool> hot(2 * k, false);
    bool any_hot = false;
    int g = fam.grid_points;
    for (size_t i = 0; i < grid.nodes.size(); ++i) {
      if (!grid.boundary[i]) continue;
      if (log_prior_unnorm(fam, h, grid.nodes[i]) - lw_mode <= -22.0) continue;
      any_hot = true;
      long rem = static_cast<long>(i);
      for (int c = 0; c < k; ++c) {
        int ix = rem % g;
        rem /= g;
        if (ix == 0) hot[2 * c] = true;
        if (ix == g - 1) hot[2 * c + 1] = true;
      }
      if (grid.weights[i] == 0.0) {
        // Node outside the family box still carries mass: truncation is
        // material, no expansion can fix it.
        throw std::domain_error("prior is not normalizable on the parameter box");
      }
    }
    if (!any_hot) return Window{frame, lo, hi};
    bool expanded = false;
    for (int c = 0; c < k; ++c) {
      if (hot[2 * c] && -lo[c] < box_diag) {
        lo[c] = 1.6 * lo[c] - 1e-3;
        expanded = true;
      }
      if (hot[2 * c + 1] && hi[c] < box_diag) {
        hi[c] = 1.6 * hi[c] + 1e-3;
        expanded = true;
      }
    }
    if (!expanded) throw std::domain_error("prior is not normalizable on the parameter box");
  }
  throw std::domain_error("prior is not normalizable on the parameter box");
}

std::vector<double> ppd_on_grid(const FiniteExpFamily& fam, const ExpFamHyper& hyper,
                                const ThetaGrid& grid) {
  size_t nodes = grid.nodes.size();
  std::vector<double> lw(nodes);
  double lw_max = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < nodes; ++i) {
    lw[i] = log_prior_unnorm(fam, hyper, grid.nodes[i]);
    if (grid.weights[i] > 0.0) lw_max = std::max(lw_max, lw[i]);
  }
  for (size_t i = 0; i < nodes; ++i)
    if (grid.boundary[i] && lw[i] - lw_max > -20.0)
      throw std::domain_error("prior is not normalizable on the parameter box");

  std::vector<double> out(fam.outcomes(), 0.0);
  double z = 0.0;
  for (size_t i = 0; i < nodes; ++i) {
    if (grid.weights[i] == 0.0) continue;
    double w = grid.weights[i] * std::exp(lw[i] - lw_max);
    z += w;
    double g = fam.cumulant(grid.nodes[i]);
    for (int x = 0; x < fam.outcomes(); ++x) {
      double dot = 0.0;
      for (int j = 0; j < fam.dim(); ++j) dot += fam.phi[x][j] * grid.nodes[i][j];
      out[x] += w * std::exp(dot - g);
    }
  }
  if (!(z > 0)) throw std::domain_error("prior is not normalizable on the parameter box");
  for (double& v : out) v /= z;
  return out;
}

}  // namespace

std::vector<double> expfam_ppd(const FiniteExpFamily& fam, const ExpFamHyper& hyper) {
  Window window = find_window(fam, hyper);
  // Refine from the configured resolution until the predictive stabilizes.
  // Successive grids nest (odd counts, same window), so the comparison is a
  // plain Richardson-style convergence check.
  int g = fam.grid_points % 2 ? fam.grid_points : fam.grid_points + 1;
  const int cap = fam.dim() == 1 ? 6401 : 1601;
  std::vector<double> coarse =
      ppd_on_grid(fam, hyper, make_grid(fam, window.frame, window.lo, window.hi, g));
  for (;;) {
    int finer = 2 * (g - 1) + 1;
    if (finer > cap) return coarse;
    std::vector<double> fine =
        ppd_on_grid(fam, hyper, make_grid(fam, window.frame, window.lo, window.hi, finer));
    double gap = 0.0;
    for (int x = 0; x < fam.outcomes(); ++x) gap = std::max(gap, std::abs(fine[x] - coarse[x]));
    if (gap <= 1e-9) return fine;
    g = finer;
    coarse = std::move(fine);
  }
}

double credible_mean_check(const FiniteExpFamily& fam, const ExpFamHyper& hyper) {
  std::vector<double> p = expfam_ppd(fam, hyper);
  double dev = 0.0;
  for (int j = 0; j < fam.dim(); ++j) {
    double mean = 0.0;
    for (int x = 0; x < fam.outcomes(); ++x) mean += fam.phi[x][j] * p[x];
    dev = std::max(dev, std::abs(mean - hyper.nu[j] / hyper.n));
  }
  return dev;
}

InjectivitySweep injectivity_sweep(const FiniteExpFamily& fam, const std::vector<double>& mu,
                                   const std::vector<double>& n_grid, double tol) {
  if (n_grid.size() < 2) throw std::invalid_argument("injectivity_sweep: need at least two n values");
  InjectivitySweep sweep;
  sweep.n_values = n_grid;

  std::vector<double> mode = fam.mean_to_natural(mu);
  double g_mode = fam.cumulant(mode);
  std::vector<double> mode_ppd(fam.outcomes());
  for (int x = 0; x < fam.outcomes(); ++x) {
    double dot = 0.0;
    for (int j = 0; j < fam.dim(); ++j) dot += fam.phi[x][j] * mode[j];
    mode_ppd[x] = std::exp(dot - g_mode);
  }

  for (double n : n_grid) {
    ExpFamHyper h;
    h.n = n;
    h.nu.resize(mu.size());
    for (size_t j = 0; j < mu.size(); ++j) h.nu[j] = n * mu[j];
    std::vector<double> p = expfam_ppd(fam, h);
    double kl = 0.0;
    for (int x = 0; x < fam.outcomes(); ++x)
      if (p[x] > 1e-300) kl += p[x] * std::log(p[x] / mode_ppd[x]);
    sweep.kl_to_mode.push_back(kl);
    sweep.ppds.push_back(std::move(p));
  }

  sweep.min_pairwise_gap = std::numeric_limits<double>::infinity();
  sweep.max_pairwise_gap = 0.0;
  for (size_t i = 0; i < sweep.ppds.size(); ++i)
    for (size_t j = i + 1; j < sweep.ppds.size(); ++j) {
      double gap = 0.0;
      for (int x = 0; x < fam.outcomes(); ++x)
        gap = std::max(gap, std::abs(sweep.ppds[i][x] - sweep.ppds[j][x]));
      sweep.min_pairwise_gap = std::min(sweep.min_pairwise_gap, gap);
      sweep.max_pairwise_gap = std::max(sweep.max_pairwise_gap, gap);
    }
  if (sweep.min_pairwise_gap > tol)
    sweep.flag = SweepFlag::injective;
  else if (sweep.max_pairwise_gap < tol)
    sweep.flag = SweepFlag::non_injective;
  else
    sweep.flag = SweepFlag::mixed;
  return sweep;
}

std::vector<std::vector<double>> second_moment_variance(const std::vector<double>& r1,
                                                        const std::vector<std::vector<double>>& R2) {
  size_t k = r1.size();
  if (R2.size() != k) throw std::invalid_argument("second_moment_variance: dimension mismatch");
  double scale = 1.0;
  for (size_t i = 0; i < k; ++i) {
    if (R2[i].size() != k) throw std::invalid_argument("second_moment_variance: dimension mismatch");
    for (size_t j = 0; j < k; ++j) scale = std::max(scale, std::abs(R2[i][j]));
  }
  for (size_t i = 0; i < k; ++i)
    for (size_t j = i + 1; j < k; ++j)
      if (std::abs(R2[i][j] - R2[j][i]) > 1e-9 * scale)
        throw InconsistentReportError("second moment report is not symmetric");

  std::vector<std::vector<double>> m(k, std::vector<double>(k));
  for (size_t i = 0; i < k; ++i)
    for (size_t j = 0; j < k; ++j) m[i][j] = 0.5 * (R2[i][j] + R2[j][i]) - r1[i] * r1[j];

  // PSD within 1e-9: pivoted Cholesky that skips (near-)zero pivots and
  // rejects negative ones.
  const double tol = 1e-9 * scale;
  std::vector<std::vector<double>> l(k, std::vector<double>(k, 0.0));
  for (size_t j = 0; j < k; ++j) {
    double d = m[j][j];
    for (size_t t = 0; t < j; ++t) d -= l[j][t] * l[j][t];
    if (d < -tol) throw InconsistentReportError("implied mean-parameter variance is not PSD");
    if (d <= tol) {
      for (size_t i = j + 1; i < k; ++i) {
        double r = m[i][j];
        for (size_t t = 0; t < j; ++t) r -= l[i][t] * l[j][t];
        if (std::abs(r) > 1e-6 * scale)
          throw InconsistentReportError("implied mean-parameter variance is not PSD");
      }
      continue;
    }
    l[j][j] = std::sqrt(d);
    for (size_t i = j + 1; i < k; ++i) {
      double r = m[i][j];
      for (size_t t = 0; t < j; ++t) r -= l[i][t] * l[j][t];
      l[i][j] = r / l[j][j];
    }
  }
  return m;
}

VarianceSweep dirichlet_variance_sweep(const std::vector<double>& p,
                                       const std::vector<double>& n_grid) {
  size_t k = p.size();
  if (k < 2) throw std::invalid_argument("dirichlet_variance_sweep: need at least 2 outcomes");
  double total = std::accumulate(p.begin(), p.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("dirichlet_variance_sweep: p must sum to 1");
  VarianceSweep sweep;
  sweep.n_values = n_grid;
  for (double n : n_grid) {
    if (!(n > 0)) throw std::invalid_argument("dirichlet_variance_sweep: n must be positive");
    std::vector<std::vector<double>> r2(k, std::vector<double>(k));
    for (size_t i = 0; i < k; ++i)
      for (size_t j = 0; j < k; ++j) {
        double ai = n * p[i], aj = n * p[j];
        r2[i][j] = ai * (aj + (i == j ? 1.0 : 0.0)) / (n * (n + 1.0));
      }
    auto var = second_moment_variance(p, r2);
    double tr = 0.0;
    for (size_t i = 0; i < k; ++i) tr += var[i][i];
    sweep.traces.push_back(tr);
  }
  sweep.strictly_decreasing = true;
  for (size_t i = 0; i + 1 < sweep.traces.size(); ++i)
    if (!(sweep.traces[i + 1] < sweep.traces[i])) sweep.strictly_decreasing = false;
  return sweep;
}

}  // namespace elicit
