#include "lyaplab/oracles.hpp"

#include <cmath>
#include <vector>

namespace lyaplab::oracles {

namespace {

std::vector<std::vector<int>> subsets(int n, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  auto rec = [&](auto&& self, int start) -> void {
    if (static_cast<int>(cur.size()) == k) {
      out.push_back(cur);
      return;
    }
    for (int i = start; i < n; ++i) {
      cur.push_back(i);
      self(self, i + 1);
      cur.pop_back();
    }
  };
  rec(rec, 0);
  return out;
}

double gaussian(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

Eigen::MatrixXd gaussian_matrix(Rng& rng, int rows, int cols) {
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = gaussian(rng);
  }
  return m;
}

}  // namespace

Eigen::MatrixXd exterior_power(const Eigen::MatrixXd& g, int k) {
  const auto idx = subsets(static_cast<int>(g.rows()), k);
  const auto n = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd out(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) {
      Eigen::MatrixXd minor(k, k);
      for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) minor(i, j) = g(idx[r][i], idx[c][j]);
      }
      out(r, c) = minor.determinant();
    }
  }
  return out;
}

double exterior_log_norm(const Eigen::MatrixXd& g, int k) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(exterior_power(g, k));
  return std::log(svd.singularValues()[0]);
}

std::pair<double, double> log_singular_values_2x2(double a, double b, double c, double d) {
  // g^T g = [[a^2 + c^2, ab + cd], [ab + cd, b^2 + d^2]].
  const double p = a * a + c * c;
  const double q = a * b + c * d;
  const double s = b * b + d * d;
  const double tr = p + s;
  const double det = p * s - q * q;
  const double disc = std::sqrt(tr * tr / 4.0 - det);
  const double big = tr / 2.0 + disc;
  const double small = det / big;
  return {0.5 * std::log(big), 0.5 * std::log(small)};
}

GroupElement random_sl(Rng& rng, int d, double spread) {
  const Eigen::MatrixXd u = random_orthogonal(rng, d);
  const Eigen::MatrixXd v = random_orthogonal(rng, d);
  Eigen::VectorXd logs(d);
  for (int i = 0; i < d; ++i) logs[i] = spread * gaussian(rng);
  logs.array() -= logs.mean();
  Eigen::MatrixXd g = u * logs.array().exp().matrix().asDiagonal() * v;
  if (g.determinant() < 0) g.row(0) *= -1.0;
  g /= std::pow(g.determinant(), 1.0 / d);
  return GroupElement::make(GroupModel::special_linear(d), g);
}

GroupElement random_sp(Rng& rng, int d) {
  const int m = d / 2;
  const GroupModel model = GroupModel::symplectic(d);
  auto symmetric = [&] {
    Eigen::MatrixXd s = gaussian_matrix(rng, m, m);
    return Eigen::MatrixXd(0.5 * (s + s.transpose()));
  };
  Eigen::MatrixXd upper = Eigen::MatrixXd::Identity(d, d);
  upper.block(0, m, m, m) = symmetric();
  Eigen::MatrixXd lower = Eigen::MatrixXd::Identity(d, d);
  lower.block(m, 0, m, m) = symmetric();
  Eigen::MatrixXd a = gaussian_matrix(rng, m, m) + 2.0 * Eigen::MatrixXd::Identity(m, m);
  Eigen::MatrixXd block = Eigen::MatrixXd::Zero(d, d);
  block.block(0, 0, m, m) = a;
  block.block(m, m, m, m) = a.inverse().transpose();
  const Eigen::MatrixXd g = upper * block * lower;
  return GroupElement::make(model, g);
}

Mat random_orthogonal(Rng& rng, int d) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian_matrix(rng, d, d));
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR();
  for (int i = 0; i < d; ++i) {
    if (r(i, i) < 0) q.col(i) *= -1.0;
  }
  return q;
}

Flag random_flag(Rng& rng, int d) { return Flag::from_frame(random_orthogonal(rng, d)); }

CartanVector random_cartan(Rng& rng, int d, double scale) {
  Vec v(d);
  for (int i = 0; i < d; ++i) v[i] = scale * gaussian(rng);
  v.array() -= v.mean();
  return CartanVector(v);
}

}  // namespace lyaplab::oracles
