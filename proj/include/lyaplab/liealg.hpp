#pragma once

// Matrix-group kernels for SL_d(R) and Sp_2m(R): Cartan projection,
// Iwasawa cocycle on full flags, simple roots, dominance order, length.

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

#include "lyaplab/errors.hpp"

namespace lyaplab {

inline constexpr int kMaxDim = 8;

// Bounded-size storage keeps the per-step kernels allocation free.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxDim, kMaxDim>;
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;

inline constexpr double kTolDet = 1e-9;
inline constexpr double kTolForm = 1e-9;
inline constexpr double kTolOrth = 1e-9;
inline constexpr double kTolDominance = 1e-9;
inline constexpr double kSingularFloor = 1e-300;

enum class GroupKind { SpecialLinear, Symplectic };

struct GroupModel {
  GroupKind kind = GroupKind::SpecialLinear;
  int dim = 2;

  static GroupModel special_linear(int d);
  static GroupModel symplectic(int d);

  // Half the matrix size for Sp, d - 1 for SL.
  int rank() const { return kind == GroupKind::Symplectic ? dim / 2 : dim - 1; }

  friend bool operator==(const GroupModel&, const GroupModel&) = default;
};

const char* to_string(GroupKind kind);

// J = [[0, I_m], [-I_m, 0]].
Mat standard_symplectic_form(int d);

// |det g - 1| for SL, ||g^T J g - J||_F / max(1, ||g||^2) for Sp.
double model_defect(const GroupModel& model, const Mat& g);

class GroupElement {
 public:
  // Validates shape, finiteness and the model invariant.
  static GroupElement make(const GroupModel& model, const Mat& entries);
  static GroupElement identity(const GroupModel& model);
  // For products of already valid elements.
  static GroupElement unchecked(const GroupModel& model, const Mat& entries) {
    return GroupElement(model, entries);
  }

  const GroupModel& model() const { return model_; }
  const Mat& matrix() const { return entries_; }
  int dim() const { return model_.dim; }

  GroupElement inverse() const;
  // Divides by det^(1/d); used to stop determinant drift on long products.
  GroupElement renormalized() const;

  friend GroupElement operator*(const GroupElement& a, const GroupElement& b);

 private:
  GroupElement(const GroupModel& model, const Mat& entries) : model_(model), entries_(entries) {}

  GroupModel model_;
  Mat entries_;
};

struct CartanVector {
  Vec coords;

  CartanVector() = default;
  explicit CartanVector(Vec c) : coords(std::move(c)) {}
  static CartanVector zero(int d) { return CartanVector(Vec::Zero(d)); }
  static CartanVector from(std::span<const double> values);

  int size() const { return static_cast<int>(coords.size()); }
  double operator[](int i) const { return coords[i]; }
  double& operator[](int i) { return coords[i]; }
  std::vector<double> to_vector() const { return {coords.data(), coords.data() + coords.size()}; }

  bool is_sorted_nonincreasing() const;

  friend CartanVector operator+(const CartanVector& a, const CartanVector& b) {
    return CartanVector(a.coords + b.coords);
  }
  friend CartanVector operator-(const CartanVector& a, const CartanVector& b) {
    return CartanVector(a.coords - b.coords);
  }
};

// Sorts non-increasing and, for Sp, enforces the (l, -reverse(l)) pairing.
CartanVector chamber_normalize(const GroupModel& model, CartanVector v);

class Flag {
 public:
  // Validates orthogonality and canonicalizes column signs.
  static Flag from_frame(const Mat& frame);
  static Flag standard(int d);
  // A fixed frame in general position with respect to coordinate flags.
  static Flag generic(int d);

  const Mat& frame() const { return frame_; }
  int dim() const { return static_cast<int>(frame_.cols()); }

 private:
  explicit Flag(Mat frame) : frame_(std::move(frame)) {}
  friend Flag canonical_flag(Mat frame);

  Mat frame_;
};

// Makes the first nonzero entry of every column positive. No validation.
Flag canonical_flag(Mat frame);

// max over columns of min(|k_i - k'_i|, |k_i + k'_i|); zero iff same flag.
double flag_distance(const Flag& a, const Flag& b);

struct RootSystemInfo {
  GroupModel model;
  // One row per simple root, as a linear functional on coordinates.
  Eigen::MatrixXd simple_roots;

  static RootSystemInfo for_model(const GroupModel& model);
  bool is_regular(const CartanVector& v) const;
};

// Log singular values, non-increasing. Throws DegenerateInput on singular
// or non-finite input.
CartanVector cartan_projection(const GroupElement& g);
CartanVector cartan_projection(const GroupModel& model, const Mat& g);

struct IwasawaResult {
  CartanVector sigma;
  Flag xi;
};

IwasawaResult iwasawa_cocycle(const GroupElement& g, const Flag& xi);

// In-place step shared with the estimators: frame <- Q of g*frame with
// positive-diagonal triangular factor R, log_diag <- log diag(R).
// Returns false if some |R_ii| underflows or is not finite.
bool iwasawa_step(const Mat& g, Mat& frame, Vec& log_diag);

double length(const GroupElement& g);

double wedge_log_norm(const GroupElement& g, int k);

std::vector<double> simple_root_gaps(const CartanVector& v, const RootSystemInfo& rs);

// Prefix-sum dominance with matching totals, tolerance scaled by magnitude.
bool dominance_leq(const CartanVector& u, const CartanVector& v);

// Tests iota(exp(v) k) against conv(S_d v) by majorization, plus
// n_weyl_samples random support-function probes of the same hull.
bool kostant_hull_check(const CartanVector& v, const Flag& k, int n_weyl_samples);

GroupElement exp_cartan(const GroupModel& model, const CartanVector& v);

}  // namespace lyaplab
