#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "greenfront/pareto.hpp"

namespace greenfront::kernels {

// Data-parallel inner loops, OpenMP-parallelised. Each kernel has a plain
// serial twin in kernels::serial that must produce bit-identical results;
// the twins are the reference implementations used by the tests and the
// benchmark target.

// Matern 5/2 ARD gram matrix over rows of X, noise added on the diagonal.
Eigen::MatrixXd gram_matrix(const Eigen::MatrixXd& X,
                            const Eigen::VectorXd& lengthscales,
                            double signal_variance, double noise_variance);

// k(A_i, B_j) without noise; A: m x d, B: n x d.
Eigen::MatrixXd cross_covariance(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                 const Eigen::VectorXd& lengthscales,
                                 double signal_variance);

// Brute-force O(n^2) dominance filter; mask[i] = 1 iff points[i] is
// nondominated within `points`.
std::vector<std::uint8_t> nondominated_mask(const std::vector<ObjectiveVector>& points,
                                            const std::vector<Direction>& dirs);

// Per-draw 2-D hypervolume improvement for a Monte-Carlo acquisition
// estimate. front_draws holds `draws` resampled fronts of `front_size`
// points (draw-major, point-major, 2 values per point); candidate_draws
// holds one 2-D candidate per draw. Points that fall below `ref` contribute
// nothing. Returns one improvement per draw.
std::vector<double> hv_improvement_draws(std::size_t draws, std::size_t front_size,
                                         const std::vector<double>& front_draws,
                                         const std::vector<double>& candidate_draws,
                                         const std::array<double, 2>& ref);

namespace serial {

Eigen::MatrixXd gram_matrix(const Eigen::MatrixXd& X,
                            const Eigen::VectorXd& lengthscales,
                            double signal_variance, double noise_variance);

Eigen::MatrixXd cross_covariance(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                 const Eigen::VectorXd& lengthscales,
                                 double signal_variance);

std::vector<std::uint8_t> nondominated_mask(const std::vector<ObjectiveVector>& points,
                                            const std::vector<Direction>& dirs);

std::vector<double> hv_improvement_draws(std::size_t draws, std::size_t front_size,
                                         const std::vector<double>& front_draws,
                                         const std::vector<double>& candidate_draws,
                                         const std::array<double, 2>& ref);

}  // namespace serial

// Matern 5/2 value for a single weighted distance r.
double matern52(double r, double signal_variance);

}  // namespace greenfront::kernels
