#include "labeldyn/markov_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "labeldyn/errors.hpp"
#include "labeldyn/fields.hpp"
#include "labeldyn/numerics.hpp"
#include "labeldyn/rng.hpp"

namespace labeldyn {

namespace {
constexpr double kInteriorTol = 1e-12;
constexpr double kNodeFloor = 1e-11;

Eigen::VectorXd to_eigen(const LabelDistribution& lam) {
  Eigen::VectorXd v(lam.size());
  for (int h = 0; h < lam.size(); ++h) v[h] = lam[h];
  return v;
}

LabelDistribution to_label(const Eigen::VectorXd& v) {
  return LabelDistribution(std::vector<double>(v.data(), v.data() + v.size()));
}
}  // namespace

LabelDistribution stationary_distribution(const Eigen::MatrixXd& Q) {
  check_rate_matrix(Q);
  const int n = static_cast<int>(Q.rows());

  // irreducibility: connectivity of the jump graph (symmetric support under
  // detailed balance)
  std::vector<int> comp(n, -1);
  std::vector<int> stack{0};
  comp[0] = 0;
  const double scale = std::max(1.0, Q.cwiseAbs().maxCoeff());
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (int v = 0; v < n; ++v) {
      if (v != u && comp[v] < 0 && (Q(u, v) > 1e-14 * scale || Q(v, u) > 1e-14 * scale)) {
        comp[v] = 0;
        stack.push_back(v);
      }
    }
  }
  for (int v = 0; v < n; ++v) {
    if (comp[v] < 0)
      throw ReducibleChain("state " + std::to_string(v) +
                           " is unreachable; the stationary distribution is not unique");
  }

  Eigen::FullPivLU<Eigen::MatrixXd> lu(Q);
  lu.setThreshold(1e-10);
  const Eigen::MatrixXd kernel = lu.kernel();
  if (kernel.cols() != 1)
    throw ReducibleChain("rate matrix kernel has dimension " + std::to_string(kernel.cols()));
  Eigen::VectorXd sigma = kernel.col(0);
  if (sigma.sum() < 0.0) sigma = -sigma;
  const double total = sigma.sum();
  if (total <= 0.0) throw ReducibleChain("degenerate kernel vector");
  sigma /= total;
  for (int h = 0; h < n; ++h) {
    if (sigma[h] < -1e-10) throw ReducibleChain("kernel vector is not signed");
    sigma[h] = std::max(sigma[h], 0.0);
  }

  for (int h = 0; h < n; ++h) {
    for (int l = 0; l < n; ++l) {
      if (h == l) continue;
      if (std::abs(Q(h, l) * sigma[l] - Q(l, h) * sigma[h]) > 1e-8 * scale)
        throw NotReversible("detailed balance fails between states " + std::to_string(h) +
                            " and " + std::to_string(l));
    }
  }
  return to_label(sigma);
}

MarkovGeometry::MarkovGeometry(Eigen::MatrixXd Q)
    : Q_(std::move(Q)), sigma_(stationary_distribution(Q_)), n_(static_cast<int>(Q_.rows())) {
  check();
}

MarkovGeometry::MarkovGeometry(Eigen::MatrixXd Q, LabelDistribution sigma)
    : Q_(std::move(Q)), sigma_(std::move(sigma)), n_(static_cast<int>(Q_.rows())) {
  check_rate_matrix(Q_);
  check();
}

void MarkovGeometry::check() const {
  if (sigma_.size() != n_) throw ContractViolation("stationary vector has wrong length");
  const double scale = std::max(1.0, Q_.cwiseAbs().maxCoeff());
  for (int h = 0; h < n_; ++h) {
    if (sigma_[h] <= 0.0) throw NotReversible("stationary distribution must be strictly positive");
    for (int l = 0; l < n_; ++l) {
      if (h != l && std::abs(Q_(h, l) * sigma_[l] - Q_(l, h) * sigma_[h]) > 1e-10 * scale)
        throw NotReversible("detailed balance fails between states " + std::to_string(h) +
                            " and " + std::to_string(l));
    }
  }
}

double log_mean(double a, double b) {
  if (a < 0.0 || b < 0.0) throw ContractViolation("log_mean needs nonnegative arguments");
  if (a == 0.0 || b == 0.0) return 0.0;
  if (a == b) return a;
  const double mean = 0.5 * (a + b);
  const double r = (a - b) / (a + b);
  if (std::abs(r) < 1e-6) {
    // Phi = m (1 - r^2/3 - 4 r^4/45 + ...)
    return mean * (1.0 - r * r / 3.0);
  }
  return (a - b) / (std::log(a) - std::log(b));
}

double log_mean_partial_a(double a, double b) {
  if (a <= 0.0 || b <= 0.0) return 0.0;
  const double r = (a - b) / (a + b);
  if (std::abs(r) < 1e-5) {
    // g(r) = r/artanh(r); dPhi/da = g/2 + g'(r)(1-r)/2
    const double g = 1.0 - r * r / 3.0 - 4.0 * r * r * r * r / 45.0;
    const double gp = -2.0 * r / 3.0 - 16.0 * r * r * r / 45.0;
    return 0.5 * g + 0.5 * gp * (1.0 - r);
  }
  const double L = std::log(a) - std::log(b);
  const double phi = (a - b) / L;
  return (1.0 - phi / a) / L;
}

double entropy(const LabelDistribution& lam, const MarkovGeometry& geom) {
  if (lam.size() != geom.size()) throw ContractViolation("entropy: dimension mismatch");
  double e = 0.0;
  for (int h = 0; h < lam.size(); ++h) {
    if (lam[h] > 0.0) e += lam[h] * std::log(lam[h] / geom.sigma()[h]);
  }
  return e;
}

Eigen::VectorXd entropy_gradient(const LabelDistribution& lam, const MarkovGeometry& geom) {
  Eigen::VectorXd g(lam.size());
  for (int h = 0; h < lam.size(); ++h) {
    if (lam[h] <= 0.0) throw NearSingularMetric("entropy gradient at the simplex boundary");
    g[h] = std::log(lam[h] / geom.sigma()[h]) + 1.0;
  }
  return g;
}

Eigen::MatrixXd onsager_matrix(const LabelDistribution& lam, const MarkovGeometry& geom) {
  const int n = geom.size();
  if (lam.size() != n) throw ContractViolation("onsager matrix: dimension mismatch");
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
  for (int l = 1; l < n; ++l) {
    for (int h = 0; h < l; ++h) {
      const double w = geom.Q()(h, l) * geom.sigma()[l];
      if (w == 0.0) continue;
      const double phi = log_mean(lam[h] / geom.sigma()[h], lam[l] / geom.sigma()[l]);
      const double entry = w * phi;
      K(h, h) += entry;
      K(l, l) += entry;
      K(h, l) -= entry;
      K(l, h) -= entry;
    }
  }
  return K;
}

Eigen::MatrixXd onsager_partial(const LabelDistribution& lam, const MarkovGeometry& geom, int m) {
  const int n = geom.size();
  Eigen::MatrixXd dK = Eigen::MatrixXd::Zero(n, n);
  for (int l = 1; l < n; ++l) {
    for (int h = 0; h < l; ++h) {
      if (h != m && l != m) continue;
      const double w = geom.Q()(h, l) * geom.sigma()[l];
      if (w == 0.0) continue;
      const double rh = lam[h] / geom.sigma()[h];
      const double rl = lam[l] / geom.sigma()[l];
      double dphi = 0.0;
      if (h == m) dphi = log_mean_partial_a(rh, rl) / geom.sigma()[h];
      if (l == m) dphi = log_mean_partial_a(rl, rh) / geom.sigma()[l];
      const double entry = w * dphi;
      dK(h, h) += entry;
      dK(l, l) += entry;
      dK(h, l) -= entry;
      dK(l, h) -= entry;
    }
  }
  return dK;
}

namespace {
// reduced SPD factor of K on the zero-sum hyperplane
Eigen::LLT<Eigen::MatrixXd> reduced_llt(const LabelDistribution& lam, const MarkovGeometry& geom,
                                        const Eigen::MatrixXd& B) {
  const Eigen::MatrixXd K = onsager_matrix(lam, geom);
  Eigen::LLT<Eigen::MatrixXd> llt(B.transpose() * K * B);
  if (llt.info() != Eigen::Success)
    throw NearSingularMetric("Onsager matrix is singular on the zero-sum hyperplane");
  return llt;
}
}  // namespace

Eigen::MatrixXd metric_tensor(const LabelDistribution& lam, const MarkovGeometry& geom) {
  if (lam.min_weight() < kInteriorTol)
    throw NearSingularMetric("metric tensor requested within 1e-12 of the simplex boundary");
  const Eigen::MatrixXd B = zero_sum_basis(geom.size());
  const auto llt = reduced_llt(lam, geom, B);
  const Eigen::MatrixXd inv =
      llt.solve(Eigen::MatrixXd::Identity(geom.size() - 1, geom.size() - 1));
  return B * inv * B.transpose();
}

double metric_quadform(const LabelDistribution& lam, const MarkovGeometry& geom,
                       const Eigen::VectorXd& mu) {
  const Eigen::MatrixXd B = zero_sum_basis(geom.size());
  const auto llt = reduced_llt(lam, geom, B);
  const Eigen::VectorXd z = B.transpose() * mu;
  return z.dot(llt.solve(z));
}

Eigen::VectorXd metric_apply(const LabelDistribution& lam, const MarkovGeometry& geom,
                             const Eigen::VectorXd& mu) {
  const Eigen::MatrixXd B = zero_sum_basis(geom.size());
  const auto llt = reduced_llt(lam, geom, B);
  return B * llt.solve(B.transpose() * mu);
}

namespace {

struct PathWork {
  std::vector<Eigen::VectorXd> nodes;
  double length = 0.0;
};

// length of the polygonal path under the midpoint-rule metric
double path_length(const std::vector<Eigen::VectorXd>& nodes, const MarkovGeometry& geom) {
  double L = 0.0;
  for (std::size_t j = 0; j + 1 < nodes.size(); ++j) {
    const Eigen::VectorXd mid = 0.5 * (nodes[j] + nodes[j + 1]);
    const Eigen::VectorXd delta = nodes[j + 1] - nodes[j];
    const double s = std::max(metric_quadform(to_label(mid), geom, delta), 0.0);
    L += std::sqrt(s);
  }
  return L;
}

// gradient of the discrete length with respect to every node
std::vector<Eigen::VectorXd> path_gradient(const std::vector<Eigen::VectorXd>& nodes,
                                           const MarkovGeometry& geom) {
  const int n = geom.size();
  std::vector<Eigen::VectorXd> grad(nodes.size(), Eigen::VectorXd::Zero(n));
  for (std::size_t j = 0; j + 1 < nodes.size(); ++j) {
    const Eigen::VectorXd mid = 0.5 * (nodes[j] + nodes[j + 1]);
    const Eigen::VectorXd delta = nodes[j + 1] - nodes[j];
    const LabelDistribution mid_label = to_label(mid);
    const Eigen::VectorXd g = metric_apply(mid_label, geom, delta);
    const double s = std::max(delta.dot(g), 1e-300);
    const double inv2rs = 0.5 / std::sqrt(s);

    Eigen::VectorXd w(n);
    for (int m = 0; m < n; ++m) w[m] = -g.dot(onsager_partial(mid_label, geom, m) * g);

    grad[j] += inv2rs * (-2.0 * g + 0.5 * w);
    grad[j + 1] += inv2rs * (2.0 * g + 0.5 * w);
  }
  // movements stay in the zero-sum hyperplane
  for (auto& g : grad) g.array() -= g.mean();
  return grad;
}

PathWork optimize_path(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                       const MarkovGeometry& geom, int segments, const GeodesicOptions& opts) {
  PathWork w;
  w.nodes.resize(segments + 1);
  for (int j = 0; j <= segments; ++j) {
    const double s = static_cast<double>(j) / segments;
    w.nodes[j] = (1.0 - s) * a + s * b;
  }
  w.length = path_length(w.nodes, geom);
  if (segments < 2) return w;

  double step = 0.1;
  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    const auto grad = path_gradient(w.nodes, geom);
    double gnorm2 = 0.0;
    for (std::size_t j = 1; j + 1 < w.nodes.size(); ++j) gnorm2 += grad[j].squaredNorm();
    if (gnorm2 <= 1e-24) break;

    bool accepted = false;
    double trial_step = step;
    for (int bt = 0; bt < 60; ++bt) {
      std::vector<Eigen::VectorXd> trial = w.nodes;
      bool feasible = true;
      for (std::size_t j = 1; j + 1 < trial.size(); ++j) {
        trial[j] -= trial_step * grad[j];
        if (trial[j].minCoeff() < kNodeFloor) {
          feasible = false;
          break;
        }
      }
      if (feasible) {
        const double trial_len = path_length(trial, geom);
        if (trial_len <= w.length - 1e-4 * trial_step * gnorm2) {
          const double gain = w.length - trial_len;
          w.nodes = std::move(trial);
          w.length = trial_len;
          step = std::min(trial_step * 1.5, 10.0);
          accepted = true;
          if (gain <= opts.length_tol * std::max(1.0, w.length)) return w;
          break;
        }
      }
      trial_step *= 0.5;
      if (trial_step < 1e-18) break;
    }
    if (!accepted) {
      if (step < 1e-17)
        throw GeodesicFailure("path optimizer pinned against the simplex boundary");
      break;  // no further deterministic progress at this tolerance
    }
  }
  return w;
}

GeodesicPath to_path(const PathWork& w) {
  GeodesicPath p;
  p.nodes.reserve(w.nodes.size());
  for (const auto& v : w.nodes) p.nodes.push_back(to_label(v));
  p.length = w.length;
  return p;
}

}  // namespace

GeodesicPath geodesic_distance(const LabelDistribution& lam1, const LabelDistribution& lam2,
                               const MarkovGeometry& geom, int segments,
                               const GeodesicOptions& opts) {
  if (lam1.size() != geom.size() || lam2.size() != geom.size())
    throw ContractViolation("geodesic: dimension mismatch");
  if (segments < 2) throw ContractViolation("geodesic needs at least two segments");
  if (lam1.min_weight() <= kInteriorTol || lam2.min_weight() <= kInteriorTol)
    throw NearSingularMetric("geodesic endpoints must be strictly interior");
  const Eigen::VectorXd a = to_eigen(lam1);
  const Eigen::VectorXd b = to_eigen(lam2);
  if ((a - b).norm() < 1e-15) {
    GeodesicPath p;
    p.nodes = {lam1, lam2};
    p.length = 0.0;
    return p;
  }
  return to_path(optimize_path(a, b, geom, segments, opts));
}

GeodesicPath geodesic_distance_auto(const LabelDistribution& lam1, const LabelDistribution& lam2,
                                    const MarkovGeometry& geom, int segments, double rel_tol) {
  GeodesicPath path = geodesic_distance(lam1, lam2, geom, segments);
  for (int m = segments * 2; m <= 1024; m *= 2) {
    GeodesicPath finer = geodesic_distance(lam1, lam2, geom, m);
    const double drift = std::abs(finer.length - path.length);
    path = std::move(finer);
    if (drift <= rel_tol * std::max(path.length, 1e-30)) break;
  }
  return path;
}

GeodesicWithGradient geodesic_with_gradient(const LabelDistribution& lam1,
                                            const LabelDistribution& lam2,
                                            const MarkovGeometry& geom, int segments,
                                            const GeodesicOptions& opts) {
  GeodesicWithGradient out{geodesic_distance(lam1, lam2, geom, segments, opts),
                           Eigen::VectorXd::Zero(geom.size())};
  const auto& nodes = out.path.nodes;
  if (nodes.size() < 2 || out.path.length <= 0.0) return out;

  // With the interior nodes optimized, the total derivative in the endpoint
  // reduces to the partial derivative through the last segment.
  const Eigen::VectorXd left = to_eigen(nodes[nodes.size() - 2]);
  const Eigen::VectorXd right = to_eigen(nodes.back());
  const Eigen::VectorXd mid = 0.5 * (left + right);
  const Eigen::VectorXd delta = right - left;
  const LabelDistribution mid_label = to_label(mid);
  const Eigen::VectorXd g = metric_apply(mid_label, geom, delta);
  const double s = std::max(delta.dot(g), 1e-300);
  Eigen::VectorXd w(geom.size());
  for (int m = 0; m < geom.size(); ++m)
    w[m] = -g.dot(onsager_partial(mid_label, geom, m) * g);
  Eigen::VectorXd grad = (2.0 * g + 0.5 * w) * (0.5 / std::sqrt(s));
  grad.array() -= grad.mean();
  out.endpoint_gradient = grad;
  return out;
}

GeometryConstants probe_constants(const MarkovGeometry& geom, double delta, int samples,
                                  double alpha, std::uint64_t seed) {
  const int n = geom.size();
  if (!(delta > 0.0) || delta * n >= 1.0)
    throw ContractViolation("probe_constants needs 0 < delta < 1/n");
  Rng rng(seed);
  const Eigen::MatrixXd B = zero_sum_basis(n);
  const double alphas[] = {1.0, 0.3, 0.05};

  GeometryConstants c;
  c.delta = delta;
  c.alpha = alpha;

  auto squeeze = [&](const std::vector<double>& w, double margin) {
    std::vector<double> out(w.size());
    for (std::size_t h = 0; h < w.size(); ++h)
      out[h] = margin + (1.0 - margin * w.size()) * w[h];
    return LabelDistribution(out);
  };

  double k_max = 0.0, k_min_interior = std::numeric_limits<double>::infinity();
  double l_g = 0.0, l_e = 0.0, c_e = 0.0;

  Eigen::MatrixXd prev_g;
  Eigen::VectorXd prev_lam;
  double prev_entropy = 0.0;
  Eigen::VectorXd prev_closed;
  bool have_prev = false;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
  for (int s = 0; s < samples; ++s) {
    const std::vector<double> raw = rng.dirichlet(n, alphas[s % 3]);
    const LabelDistribution on_closed(raw);
    const LabelDistribution interior = squeeze(raw, delta);

    eig.compute(B.transpose() * onsager_matrix(on_closed, geom) * B);
    k_max = std::max(k_max, eig.eigenvalues().maxCoeff());
    eig.compute(B.transpose() * onsager_matrix(interior, geom) * B);
    k_min_interior = std::min(k_min_interior, eig.eigenvalues().minCoeff());

    const Eigen::MatrixXd G = metric_tensor(interior, geom);
    const Eigen::VectorXd lam_vec = to_eigen(interior);
    Eigen::VectorXd egrad = entropy_gradient(interior, geom);
    egrad.array() -= egrad.mean();
    l_e = std::max(l_e, egrad.norm());

    const double ent_closed = entropy(on_closed, geom);
    const Eigen::VectorXd closed_vec = to_eigen(on_closed);
    if (have_prev) {
      const double gap = (lam_vec - prev_lam).norm();
      if (gap > 1e-9) l_g = std::max(l_g, (G - prev_g).norm() / gap);
      const double gap_closed = (closed_vec - prev_closed).norm();
      if (gap_closed > 1e-9)
        c_e = std::max(c_e, std::abs(ent_closed - prev_entropy) / std::pow(gap_closed, alpha));
    }
    prev_g = G;
    prev_lam = lam_vec;
    prev_entropy = ent_closed;
    prev_closed = closed_vec;
    have_prev = true;
  }

  c.c2 = k_max;
  c.c1 = 1.0 / k_max;
  c.c4 = k_min_interior;
  c.c3 = 1.0 / k_min_interior;
  c.m1 = std::sqrt(c.c1);
  c.m2 = std::sqrt(c.c3);
  c.L_G = l_g;
  c.L_E = l_e;
  c.C_E_alpha = c_e;
  c.m3 = std::sqrt(l_g);
  c.m4 = std::sqrt(l_g) * std::pow(c.c3 / c.c1, 0.75);
  return c;
}

}  // namespace labeldyn
