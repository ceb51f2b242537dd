#pragma once

#include <string>
#include <vector>

namespace labeldyn {

// Finite metric space of pure strategies. The default is the discrete metric,
// dist = 1 off the diagonal; scenarios may override it.
class LabelMetricSpace {
  public:
  LabelMetricSpace(int n, std::vector<double> dist);
  static LabelMetricSpace discrete(int n);

  int size() const { return n_; }
  double operator()(int h, int l) const { return dist_[static_cast<std::size_t>(h) * n_ + l]; }

  private:
  int n_;
  std::vector<double> dist_;  // row-major n x n
};

// Point of the probability simplex over n labels. Construction clamps
// negative dust below 1e-10 magnitude, renormalizes mass drift up to 1e-9 and
// rejects anything worse.
class LabelDistribution {
  public:
  explicit LabelDistribution(std::vector<double> weights);
  static LabelDistribution uniform(int n);
  static LabelDistribution vertex(int n, int h);

  int size() const { return static_cast<int>(w_.size()); }
  double operator[](int h) const { return w_[h]; }
  const std::vector<double>& weights() const { return w_; }
  double min_weight() const;

  private:
  std::vector<double> w_;
};

// Signed measure on the label set; no mass constraint.
struct SignedLabelMeasure {
  std::vector<double> weights;

  explicit SignedLabelMeasure(std::vector<double> w);
  static SignedLabelMeasure zero(int n);

  int size() const { return static_cast<int>(weights.size()); }
  double operator[](int h) const { return weights[h]; }
  double sum() const;
};

SignedLabelMeasure operator-(const LabelDistribution& a, const LabelDistribution& b);
SignedLabelMeasure operator-(const SignedLabelMeasure& a, const SignedLabelMeasure& b);

double tv_norm(const SignedLabelMeasure& mu);

// sup { <mu, phi> : ||phi||_inf + Lip(phi) <= 1 }, solved as an exact LP.
double bl_norm(const SignedLabelMeasure& mu, const LabelMetricSpace& space);

// Closed form of the same supremum for zero-sum measures on two labels.
// Kept next to the LP as a cross-check and as the fast path for transport
// cost assembly.
double bl_norm_two_labels_zero_sum(double m, double dist);

double hellinger(const LabelDistribution& a, const LabelDistribution& b);

// arccos of the Bhattacharyya coefficient: geodesic angle between sqrt
// embeddings on the unit sphere.
double spherical_hellinger(const LabelDistribution& a, const LabelDistribution& b);

}  // namespace labeldyn
