#include "labeldyn/label_geometry.hpp"

#include <algorithm>
#include <cmath>

#include "labeldyn/errors.hpp"
#include "labeldyn/linprog.hpp"

namespace labeldyn {

namespace {
constexpr double kNegTol = 1e-10;
constexpr double kMassTol = 1e-9;
}  // namespace

LabelMetricSpace::LabelMetricSpace(int n, std::vector<double> dist) : n_(n), dist_(std::move(dist)) {
  if (n <= 0) throw ContractViolation("label metric needs at least one label");
  if (dist_.size() != static_cast<std::size_t>(n) * n)
    throw ContractViolation("label metric matrix has wrong shape");
  for (int h = 0; h < n; ++h) {
    if (dist_[static_cast<std::size_t>(h) * n + h] != 0.0)
      throw ContractViolation("label metric diagonal must vanish");
    for (int l = 0; l < n; ++l) {
      const double d = (*this)(h, l);
      if (!std::isfinite(d) || (h != l && d <= 0.0))
        throw ContractViolation("label metric entries must be positive off the diagonal");
      if (std::abs(d - (*this)(l, h)) > 1e-12)
        throw ContractViolation("label metric must be symmetric");
      for (int m = 0; m < n; ++m) {
        if ((*this)(h, l) > (*this)(h, m) + (*this)(m, l) + 1e-12)
          throw ContractViolation("label metric violates the triangle inequality");
      }
    }
  }
}

LabelMetricSpace LabelMetricSpace::discrete(int n) {
  std::vector<double> d(static_cast<std::size_t>(n) * n, 1.0);
  for (int h = 0; h < n; ++h) d[static_cast<std::size_t>(h) * n + h] = 0.0;
  return LabelMetricSpace(n, std::move(d));
}

LabelDistribution::LabelDistribution(std::vector<double> weights) : w_(std::move(weights)) {
  if (w_.empty()) throw InvalidLabel("empty weight vector");
  double total = 0.0;
  for (auto& v : w_) {
    if (!std::isfinite(v)) throw InvalidLabel("non-finite weight");
    if (v < -kNegTol) throw InvalidLabel("negative weight " + std::to_string(v));
    if (v < 0.0) v = 0.0;
    total += v;
  }
  if (std::abs(total - 1.0) > kMassTol)
    throw InvalidLabel("weights sum to " + std::to_string(total) + ", expected 1");
  for (auto& v : w_) v /= total;
}

LabelDistribution LabelDistribution::uniform(int n) {
  return LabelDistribution(std::vector<double>(n, 1.0 / n));
}

LabelDistribution LabelDistribution::vertex(int n, int h) {
  std::vector<double> w(n, 0.0);
  w.at(h) = 1.0;
  return LabelDistribution(std::move(w));
}

double LabelDistribution::min_weight() const {
  return *std::min_element(w_.begin(), w_.end());
}

SignedLabelMeasure::SignedLabelMeasure(std::vector<double> w) : weights(std::move(w)) {
  for (double v : weights) {
    if (!std::isfinite(v)) throw ContractViolation("signed measure with non-finite component");
  }
}

SignedLabelMeasure SignedLabelMeasure::zero(int n) {
  return SignedLabelMeasure(std::vector<double>(n, 0.0));
}

double SignedLabelMeasure::sum() const {
  double s = 0.0;
  for (double v : weights) s += v;
  return s;
}

SignedLabelMeasure operator-(const LabelDistribution& a, const LabelDistribution& b) {
  if (a.size() != b.size()) throw ContractViolation("label dimension mismatch");
  std::vector<double> w(a.size());
  for (int h = 0; h < a.size(); ++h) w[h] = a[h] - b[h];
  return SignedLabelMeasure(std::move(w));
}

SignedLabelMeasure operator-(const SignedLabelMeasure& a, const SignedLabelMeasure& b) {
  if (a.size() != b.size()) throw ContractViolation("label dimension mismatch");
  std::vector<double> w(a.size());
  for (int h = 0; h < a.size(); ++h) w[h] = a[h] - b[h];
  return SignedLabelMeasure(std::move(w));
}

double tv_norm(const SignedLabelMeasure& mu) {
  double s = 0.0;
  for (double v : mu.weights) s += std::abs(v);
  return s;
}

double bl_norm(const SignedLabelMeasure& mu, const LabelMetricSpace& space) {
  const int n = mu.size();
  if (space.size() != n) throw ContractViolation("bl_norm: metric and measure dimensions differ");

  // Variables [phi_1..phi_n, s, L]; maximize <mu, phi> subject to
  //   |phi_h| <= s,  |phi_h - phi_l| <= dist(h,l) L,  s + L <= 1,  s, L >= 0.
  const int vars = n + 2;
  std::vector<double> c(vars, 0.0);
  for (int h = 0; h < n; ++h) c[h] = mu[h];

  std::vector<std::vector<double>> A;
  std::vector<double> b;
  auto add_row = [&](std::vector<double> row, double rhs) {
    A.push_back(std::move(row));
    b.push_back(rhs);
  };
  for (int h = 0; h < n; ++h) {
    std::vector<double> r1(vars, 0.0), r2(vars, 0.0);
    r1[h] = 1.0;
    r1[n] = -1.0;
    r2[h] = -1.0;
    r2[n] = -1.0;
    add_row(std::move(r1), 0.0);
    add_row(std::move(r2), 0.0);
  }
  for (int h = 0; h < n; ++h) {
    for (int l = h + 1; l < n; ++l) {
      const double d = space(h, l);
      std::vector<double> r1(vars, 0.0), r2(vars, 0.0);
      r1[h] = 1.0;
      r1[l] = -1.0;
      r1[n + 1] = -d;
      r2[h] = -1.0;
      r2[l] = 1.0;
      r2[n + 1] = -d;
      add_row(std::move(r1), 0.0);
      add_row(std::move(r2), 0.0);
    }
  }
  {
    std::vector<double> r(vars, 0.0);
    r[n] = 1.0;
    r[n + 1] = 1.0;
    add_row(std::move(r), 1.0);
  }
  {
    std::vector<double> r(vars, 0.0);
    r[n] = -1.0;
    add_row(std::move(r), 0.0);
  }
  {
    std::vector<double> r(vars, 0.0);
    r[n + 1] = -1.0;
    add_row(std::move(r), 0.0);
  }

  const auto sol = lp::maximize_free(c, A, b);
  if (!sol.optimal) throw NonConvergence("bl_norm LP did not reach optimality");
  return std::max(0.0, sol.value);
}

double bl_norm_two_labels_zero_sum(double m, double dist) {
  // Optimal phi is antisymmetric: |u| <= 2 dist / (dist + 2).
  return std::abs(m) * 2.0 * dist / (dist + 2.0);
}

double hellinger(const LabelDistribution& a, const LabelDistribution& b) {
  if (a.size() != b.size()) throw ContractViolation("hellinger: dimension mismatch");
  double s = 0.0;
  for (int h = 0; h < a.size(); ++h) {
    const double d = std::sqrt(a[h]) - std::sqrt(b[h]);
    s += d * d;
  }
  return std::sqrt(s);
}

double spherical_hellinger(const LabelDistribution& a, const LabelDistribution& b) {
  if (a.size() != b.size()) throw ContractViolation("spherical_hellinger: dimension mismatch");
  double bc = 0.0;
  for (int h = 0; h < a.size(); ++h) bc += std::sqrt(a[h] * b[h]);
  bc = std::clamp(bc, -1.0, 1.0);
  return std::acos(bc);
}

}  // namespace labeldyn
