#include "greenfront/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace greenfront::kernels {

namespace {

constexpr double kSqrt5 = 2.2360679774997896;

double weighted_distance(const Eigen::MatrixXd& A, Eigen::Index i,
                         const Eigen::MatrixXd& B, Eigen::Index j,
                         const Eigen::VectorXd& lengthscales) {
    double r2 = 0.0;
    for (Eigen::Index k = 0; k < A.cols(); ++k) {
        const double d = (A(i, k) - B(j, k)) / lengthscales(k);
        r2 += d * d;
    }
    return std::sqrt(r2);
}

// Exclusive 2-D hypervolume improvement of `cand` over `front` (both maximize),
// clamped at `ref`. Equivalent to hv(front + cand) - hv(front) but computed in
// one pass over the candidate's x-strip.
double improvement_2d(const double* front, std::size_t front_size,
                      const double* cand, const std::array<double, 2>& ref) {
    const double cx = cand[0];
    const double cy = cand[1];
    if (cx <= ref[0] || cy <= ref[1]) return 0.0;

    // Points with x >= cx cover the candidate's rectangle above max of their y.
    double covered_y = ref[1];
    for (std::size_t i = 0; i < front_size; ++i) {
        const double px = front[2 * i];
        const double py = front[2 * i + 1];
        if (px >= cx && py > covered_y) covered_y = py;
    }
    if (covered_y >= cy) return 0.0;

    // Sweep the strip x in (ref_x, cx] from the right; each front point with
    // y > covered_y truncates the remaining width.
    struct Edge {
        double x, y;
    };
    std::vector<Edge> edges;
    edges.reserve(front_size);
    for (std::size_t i = 0; i < front_size; ++i) {
        const double px = front[2 * i];
        const double py = front[2 * i + 1];
        if (px < cx && py > covered_y) {
            edges.push_back({std::max(px, ref[0]), std::min(py, cy)});
        }
    }
    std::sort(edges.begin(), edges.end(),
              [](const Edge& a, const Edge& b) { return a.x > b.x; });

    double area = 0.0;
    double right = cx;
    double base = covered_y;
    for (const Edge& edge : edges) {
        if (edge.y <= base) continue;
        area += (right - edge.x) * (cy - base);
        right = edge.x;
        base = edge.y;
        if (base >= cy) return area;
    }
    area += (right - ref[0]) * (cy - base);
    return area;
}

void check_mc_sizes(std::size_t draws, std::size_t front_size,
                    const std::vector<double>& front_draws,
                    const std::vector<double>& candidate_draws) {
    if (front_draws.size() != draws * front_size * 2 ||
        candidate_draws.size() != draws * 2) {
        throw std::invalid_argument("hv_improvement_draws: buffer sizes do not match");
    }
}

}  // namespace

double matern52(double r, double signal_variance) {
    const double a = kSqrt5 * r;
    return signal_variance * (1.0 + a + a * a / 3.0) * std::exp(-a);
}

namespace serial {

Eigen::MatrixXd gram_matrix(const Eigen::MatrixXd& X,
                            const Eigen::VectorXd& lengthscales,
                            double signal_variance, double noise_variance) {
    const Eigen::Index n = X.rows();
    Eigen::MatrixXd K(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        K(i, i) = signal_variance + noise_variance;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double k = matern52(weighted_distance(X, i, X, j, lengthscales),
                                      signal_variance);
            K(i, j) = k;
            K(j, i) = k;
        }
    }
    return K;
}

Eigen::MatrixXd cross_covariance(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                 const Eigen::VectorXd& lengthscales,
                                 double signal_variance) {
    Eigen::MatrixXd K(A.rows(), B.rows());
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        for (Eigen::Index j = 0; j < B.rows(); ++j) {
            K(i, j) = matern52(weighted_distance(A, i, B, j, lengthscales),
                               signal_variance);
        }
    }
    return K;
}

std::vector<std::uint8_t> nondominated_mask(const std::vector<ObjectiveVector>& points,
                                            const std::vector<Direction>& dirs) {
    const std::size_t n = points.size();
    std::vector<std::uint8_t> mask(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i && dominates(points[j], points[i], dirs)) {
                mask[i] = 0;
                break;
            }
        }
    }
    return mask;
}

std::vector<double> hv_improvement_draws(std::size_t draws, std::size_t front_size,
                                         const std::vector<double>& front_draws,
                                         const std::vector<double>& candidate_draws,
                                         const std::array<double, 2>& ref) {
    check_mc_sizes(draws, front_size, front_draws, candidate_draws);
    std::vector<double> improvements(draws);
    for (std::size_t s = 0; s < draws; ++s) {
        improvements[s] = improvement_2d(front_draws.data() + s * front_size * 2,
                                         front_size, candidate_draws.data() + s * 2, ref);
    }
    return improvements;
}

}  // namespace serial

Eigen::MatrixXd gram_matrix(const Eigen::MatrixXd& X,
                            const Eigen::VectorXd& lengthscales,
                            double signal_variance, double noise_variance) {
    const Eigen::Index n = X.rows();
    Eigen::MatrixXd K(n, n);
#pragma omp parallel for schedule(dynamic, 8)
    for (Eigen::Index i = 0; i < n; ++i) {
        K(i, i) = signal_variance + noise_variance;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double k = matern52(weighted_distance(X, i, X, j, lengthscales),
                                      signal_variance);
            K(i, j) = k;
            K(j, i) = k;
        }
    }
    return K;
}

Eigen::MatrixXd cross_covariance(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                 const Eigen::VectorXd& lengthscales,
                                 double signal_variance) {
    Eigen::MatrixXd K(A.rows(), B.rows());
#pragma omp parallel for
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        for (Eigen::Index j = 0; j < B.rows(); ++j) {
            K(i, j) = matern52(weighted_distance(A, i, B, j, lengthscales),
                               signal_variance);
        }
    }
    return K;
}

std::vector<std::uint8_t> nondominated_mask(const std::vector<ObjectiveVector>& points,
                                            const std::vector<Direction>& dirs) {
    const std::size_t n = points.size();
    std::vector<std::uint8_t> mask(n, 1);
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i && dominates(points[j], points[i], dirs)) {
                mask[i] = 0;
                break;
            }
        }
    }
    return mask;
}

std::vector<double> hv_improvement_draws(std::size_t draws, std::size_t front_size,
                                         const std::vector<double>& front_draws,
                                         const std::vector<double>& candidate_draws,
                                         const std::array<double, 2>& ref) {
    check_mc_sizes(draws, front_size, front_draws, candidate_draws);
    std::vector<double> improvements(draws);
#pragma omp parallel for schedule(static)
    for (std::size_t s = 0; s < draws; ++s) {
        improvements[s] = improvement_2d(front_draws.data() + s * front_size * 2,
                                         front_size, candidate_draws.data() + s * 2, ref);
    }
    return improvements;
}

}  // namespace greenfront::kernels
