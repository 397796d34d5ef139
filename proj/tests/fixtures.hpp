#pragma once

#include <random>

#include "switchaff/demos.hpp"
#include "switchaff/design.hpp"

namespace fx {

using namespace sa;

// Random singular matrix with a controlled zero eigenstructure: when
// defective is set the zero eigenvalue sits in a 2x2 Jordan block, otherwise
// all zero eigenvalues are semisimple. The similarity transform is kept
// well conditioned so rank decisions stay clear of the tolerance.
Mat random_singular(std::mt19937& rng, int n, bool defective);

// Rank from singular values with the same relative cutoff the library uses.
// scale guards products whose true value is the zero matrix: the cutoff is
// relative to max(largest singular value, scale).
int svd_rank(const Mat& A, double scale = 0.0);

// Decomposition with V_perp = e_{null_col} and V_bar the remaining unit
// vectors in order, matching the coordinates the published certificates use.
NullspaceDecomposition axis_decomposition(const Mat& A_lambda, int null_col);

// Laws rebuilt from the certificate blocks published for each demo system.
SwitchingLaw example1_published();
SwitchingLaw example2_published();
SwitchingLaw motor_position_published();
SwitchingLaw motor_velocity_published();

// Assembled certificate matrix of example2_published, [xi_bar; xi_perp] order.
Mat example2_published_P();

}  // namespace fx
