#pragma once

// Independent reference computations and random generators for property
// checks. Nothing in the estimation path depends on this header.

#include <Eigen/Dense>

#include <random>

#include "lyaplab/liealg.hpp"

namespace lyaplab::oracles {

// Matrix of the k-th exterior power in the basis of sorted k-subsets
// (entries are k x k minors).
Eigen::MatrixXd exterior_power(const Eigen::MatrixXd& g, int k);

// log ||wedge^k g||_op from a dense SVD of exterior_power(g, k).
double exterior_log_norm(const Eigen::MatrixXd& g, int k);

// Log singular values of a 2x2 matrix from the closed-form eigenvalues of
// g^T g, non-increasing.
std::pair<double, double> log_singular_values_2x2(double a, double b, double c, double d);

using Rng = std::mt19937_64;

// Gaussian matrix with positive determinant rescaled to det 1, times
// exp(spread * N(0,1)) on its singular values for varied conditioning.
GroupElement random_sl(Rng& rng, int d, double spread = 1.0);
// Product of random symplectic shears and block-diagonal (A, A^-T) factors.
GroupElement random_sp(Rng& rng, int d);
Mat random_orthogonal(Rng& rng, int d);
Flag random_flag(Rng& rng, int d);
// Trace-zero vector with N(0, scale^2) entries.
CartanVector random_cartan(Rng& rng, int d, double scale = 1.0);

}  // namespace lyaplab::oracles
