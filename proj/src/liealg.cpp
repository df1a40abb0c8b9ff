#include "lyaplab/liealg.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>

#include "lyaplab/rng.hpp"

namespace lyaplab {

namespace {

void require_square(const Mat& g, int d) {
  if (g.rows() != d || g.cols() != d) {
    throw InvalidArgument("expected a " + std::to_string(d) + "x" + std::to_string(d) + " matrix, got " +
                          std::to_string(g.rows()) + "x" + std::to_string(g.cols()));
  }
}

double magnitude_tolerance(const Vec& u, const Vec& v) {
  return kTolDominance * std::max(1.0, u.lpNorm<1>() + v.lpNorm<1>());
}

}  // namespace

GroupModel GroupModel::special_linear(int d) {
  if (d < 2 || d > kMaxDim) throw InvalidArgument("SL dimension must lie in [2, 8]");
  return {GroupKind::SpecialLinear, d};
}

GroupModel GroupModel::symplectic(int d) {
  if (d < 2 || d > kMaxDim || d % 2 != 0) throw InvalidArgument("Sp matrix size must be even and in [2, 8]");
  return {GroupKind::Symplectic, d};
}

const char* to_string(GroupKind kind) {
  return kind == GroupKind::Symplectic ? "Sp" : "SL";
}

Mat standard_symplectic_form(int d) {
  const int m = d / 2;
  Mat j = Mat::Zero(d, d);
  j.block(0, m, m, m).setIdentity();
  j.block(m, 0, m, m) = -Mat::Identity(m, m);
  return j;
}

double model_defect(const GroupModel& model, const Mat& g) {
  if (model.kind == GroupKind::SpecialLinear) return std::abs(g.determinant() - 1.0);
  const Mat j = standard_symplectic_form(model.dim);
  const Mat residual = g.transpose() * j * g - j;
  return residual.norm() / std::max(1.0, g.squaredNorm());
}

GroupElement GroupElement::make(const GroupModel& model, const Mat& entries) {
  require_square(entries, model.dim);
  if (!entries.allFinite()) throw DegenerateInput("group element has non-finite entries");
  const double defect = model_defect(model, entries);
  const double tol = model.kind == GroupKind::SpecialLinear ? kTolDet : kTolForm;
  if (!(defect <= tol)) {
    throw InvalidArgument(std::string("matrix violates the ") + to_string(model.kind) +
                          " invariant (defect " + std::to_string(defect) + ")");
  }
  return GroupElement(model, entries);
}

GroupElement GroupElement::identity(const GroupModel& model) {
  return GroupElement(model, Mat::Identity(model.dim, model.dim));
}

GroupElement GroupElement::inverse() const {
  if (model_.kind == GroupKind::Symplectic) {
    // g^-1 = -J g^T J for g in Sp.
    const Mat j = standard_symplectic_form(model_.dim);
    return GroupElement(model_, -(j * entries_.transpose() * j));
  }
  return GroupElement(model_, entries_.inverse());
}

GroupElement GroupElement::renormalized() const {
  const double det = entries_.determinant();
  if (!(det > 0.0) || !std::isfinite(det)) return *this;
  return GroupElement(model_, entries_ / std::pow(det, 1.0 / model_.dim));
}

GroupElement operator*(const GroupElement& a, const GroupElement& b) {
  if (!(a.model_ == b.model_)) throw InvalidArgument("group model mismatch in product");
  return GroupElement(a.model_, a.entries_ * b.entries_);
}

CartanVector CartanVector::from(std::span<const double> values) {
  Vec v(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) v[static_cast<Eigen::Index>(i)] = values[i];
  return CartanVector(v);
}

bool CartanVector::is_sorted_nonincreasing() const {
  for (int i = 0; i + 1 < size(); ++i) {
    if (coords[i] < coords[i + 1]) return false;
  }
  return true;
}

CartanVector chamber_normalize(const GroupModel& model, CartanVector v) {
  std::sort(v.coords.data(), v.coords.data() + v.coords.size(), std::greater<>());
  if (model.kind == GroupKind::Symplectic) {
    const int d = v.size();
    Vec sym(d);
    for (int i = 0; i < d; ++i) sym[i] = 0.5 * (v[i] - v[d - 1 - i]);
    v.coords = sym;
  }
  return v;
}

Flag canonical_flag(Mat frame) {
  for (Eigen::Index c = 0; c < frame.cols(); ++c) {
    for (Eigen::Index r = 0; r < frame.rows(); ++r) {
      if (std::abs(frame(r, c)) > 1e-12) {
        if (frame(r, c) < 0) frame.col(c) *= -1.0;
        break;
      }
    }
  }
  return Flag(std::move(frame));
}

Flag Flag::from_frame(const Mat& frame) {
  if (frame.rows() != frame.cols() || frame.rows() < 1 || frame.rows() > kMaxDim) {
    throw InvalidArgument("flag frame must be square of size at most 8");
  }
  if (!frame.allFinite()) throw DegenerateInput("flag frame has non-finite entries");
  const double defect = (frame.transpose() * frame - Mat::Identity(frame.rows(), frame.cols())).norm();
  if (!(defect <= kTolOrth)) throw InvalidArgument("flag frame is not orthogonal");
  return canonical_flag(frame);
}

Flag Flag::standard(int d) { return Flag(Mat::Identity(d, d)); }

Flag Flag::generic(int d) {
  Mat m(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      m(i, j) = counter_uniform({0x5eedf1a6ULL, 0, i * kMaxDim + j, 0}) - 0.5;
    }
    m(i, i) += 1.0;
  }
  Mat frame = Mat::Identity(d, d);
  Vec unused(d);
  iwasawa_step(m, frame, unused);
  return canonical_flag(frame);
}

double flag_distance(const Flag& a, const Flag& b) {
  if (a.dim() != b.dim()) throw InvalidArgument("flag dimension mismatch");
  double worst = 0.0;
  for (int c = 0; c < a.dim(); ++c) {
    const double plus = (a.frame().col(c) - b.frame().col(c)).norm();
    const double minus = (a.frame().col(c) + b.frame().col(c)).norm();
    worst = std::max(worst, std::min(plus, minus));
  }
  return worst;
}

RootSystemInfo RootSystemInfo::for_model(const GroupModel& model) {
  RootSystemInfo rs{model, {}};
  const int d = model.dim;
  if (model.kind == GroupKind::SpecialLinear) {
    rs.simple_roots = Eigen::MatrixXd::Zero(d - 1, d);
    for (int i = 0; i + 1 < d; ++i) {
      rs.simple_roots(i, i) = 1.0;
      rs.simple_roots(i, i + 1) = -1.0;
    }
  } else {
    const int m = d / 2;
    rs.simple_roots = Eigen::MatrixXd::Zero(m, d);
    for (int i = 0; i + 1 < m; ++i) {
      rs.simple_roots(i, i) = 1.0;
      rs.simple_roots(i, i + 1) = -1.0;
    }
    rs.simple_roots(m - 1, m - 1) = 1.0;
  }
  return rs;
}

bool RootSystemInfo::is_regular(const CartanVector& v) const {
  const auto gaps = simple_root_gaps(v, *this);
  return std::all_of(gaps.begin(), gaps.end(), [](double g) { return g > 0.0; });
}

CartanVector cartan_projection(const GroupModel& model, const Mat& g) {
  require_square(g, model.dim);
  if (!g.allFinite()) throw DegenerateInput("Cartan projection of a non-finite matrix");
  Eigen::JacobiSVD<Mat> svd(g);
  const Vec& s = svd.singularValues();
  if (!(s[s.size() - 1] > 0.0)) throw DegenerateInput("Cartan projection of a singular matrix");
  Vec logs(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) logs[i] = std::log(std::max(s[i], kSingularFloor));
  return chamber_normalize(model, CartanVector(logs));
}

CartanVector cartan_projection(const GroupElement& g) { return cartan_projection(g.model(), g.matrix()); }

bool iwasawa_step(const Mat& g, Mat& frame, Vec& log_diag) {
  const Eigen::Index d = g.rows();
  Eigen::HouseholderQR<Mat> qr(g * frame);
  const Mat& packed = qr.matrixQR();
  frame = qr.householderQ();
  log_diag.resize(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double r = packed(i, i);
    if (!std::isfinite(r) || std::abs(r) <= kSingularFloor) return false;
    if (r < 0.0) frame.col(i) *= -1.0;
    log_diag[i] = std::log(std::abs(r));
  }
  return true;
}

IwasawaResult iwasawa_cocycle(const GroupElement& g, const Flag& xi) {
  if (xi.dim() != g.dim()) throw InvalidArgument("flag and group element dimensions differ");
  if (!g.matrix().allFinite()) throw DegenerateInput("Iwasawa cocycle of a non-finite matrix");
  Mat frame = xi.frame();
  Vec log_diag;
  if (!iwasawa_step(g.matrix(), frame, log_diag)) {
    throw DegenerateInput("g k is numerically rank deficient");
  }
  return {CartanVector(log_diag), canonical_flag(frame)};
}

double length(const GroupElement& g) {
  const CartanVector k = cartan_projection(g);
  return std::max({0.0, k[0], -k[k.size() - 1]});
}

double wedge_log_norm(const GroupElement& g, int k) {
  if (k < 1 || k > g.dim()) throw InvalidArgument("exterior power degree out of range");
  const CartanVector kappa = cartan_projection(g);
  return kappa.coords.head(k).sum();
}

std::vector<double> simple_root_gaps(const CartanVector& v, const RootSystemInfo& rs) {
  if (v.size() != rs.model.dim) throw InvalidArgument("Cartan vector length does not match root system");
  const Eigen::VectorXd x = v.coords.cast<double>();
  const Eigen::VectorXd gaps = rs.simple_roots * x;
  return {gaps.data(), gaps.data() + gaps.size()};
}

bool dominance_leq(const CartanVector& u, const CartanVector& v) {
  if (u.size() != v.size()) throw InvalidArgument("dominance comparison of vectors with different lengths");
  const double tol = magnitude_tolerance(u.coords, v.coords);
  double pu = 0.0;
  double pv = 0.0;
  for (int i = 0; i < u.size(); ++i) {
    pu += u[i];
    pv += v[i];
    if (pu > pv + tol) return false;
  }
  return std::abs(pu - pv) <= tol;
}

GroupElement exp_cartan(const GroupModel& model, const CartanVector& v) {
  if (v.size() != model.dim) throw InvalidArgument("Cartan vector length does not match group");
  Mat diag = Mat::Zero(model.dim, model.dim);
  for (int i = 0; i < model.dim; ++i) diag(i, i) = std::exp(v[i]);
  return GroupElement::unchecked(model, diag);
}

bool kostant_hull_check(const CartanVector& v, const Flag& k, int n_weyl_samples) {
  const int d = v.size();
  if (k.dim() != d) throw InvalidArgument("flag and Cartan vector dimensions differ");
  const GroupModel ambient{GroupKind::SpecialLinear, d};
  const CartanVector iota = iwasawa_cocycle(exp_cartan(ambient, v), k).sigma;

  std::vector<double> sorted_iota = iota.to_vector();
  std::vector<double> sorted_v = v.to_vector();
  std::sort(sorted_iota.begin(), sorted_iota.end(), std::greater<>());
  std::sort(sorted_v.begin(), sorted_v.end(), std::greater<>());
  const double tol = magnitude_tolerance(iota.coords, v.coords);

  double pi = 0.0;
  double pv = 0.0;
  for (int i = 0; i < d; ++i) {
    pi += sorted_iota[i];
    pv += sorted_v[i];
    if (pi > pv + tol) return false;
  }
  if (std::abs(pi - pv) > tol) return false;

  // Support function of conv(S_d v) at l is sum of sorted(l) * sorted(v).
  for (int s = 0; s < n_weyl_samples; ++s) {
    std::vector<double> l(d);
    double at_iota = 0.0;
    for (int i = 0; i < d; ++i) {
      l[i] = 2.0 * counter_uniform({0xc0517a17ULL, static_cast<std::uint64_t>(s), i, 1}) - 1.0;
      at_iota += l[i] * iota[i];
    }
    std::sort(l.begin(), l.end(), std::greater<>());
    const double support = std::inner_product(l.begin(), l.end(), sorted_v.begin(), 0.0);
    if (at_iota > support + tol) return false;
  }
  return true;
}

}  // namespace lyaplab
