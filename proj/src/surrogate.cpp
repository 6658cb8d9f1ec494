#include "greenfront/surrogate.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "greenfront/kernels.hpp"

namespace greenfront {

namespace {

constexpr double kSqrt5 = 2.2360679774997896;
constexpr double kLog2Pi = 1.8378770664093453;

Eigen::MatrixXd to_matrix(const std::vector<UnitPoint>& inputs) {
    const auto n = static_cast<Eigen::Index>(inputs.size());
    const auto d = n > 0 ? static_cast<Eigen::Index>(inputs[0].coords.size()) : 0;
    Eigen::MatrixXd X(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (static_cast<Eigen::Index>(inputs[i].coords.size()) != d) {
            throw std::invalid_argument("inconsistent input dimensions");
        }
        for (Eigen::Index j = 0; j < d; ++j) X(i, j) = inputs[i].coords[j];
    }
    return X;
}

}  // namespace

SurrogateModel::SurrogateModel() {
    params_.lengthscales = Eigen::VectorXd::Ones(0);
}

SurrogateModel SurrogateModel::create(const Eigen::MatrixXd& inputs,
                                      const Eigen::VectorXd& targets,
                                      KernelParams params) {
    if (inputs.rows() != targets.size()) {
        throw std::invalid_argument("inputs and targets must have equal length");
    }
    if (!targets.allFinite()) {
        throw std::invalid_argument("non-finite targets rejected");
    }
    if (params.lengthscales.size() != inputs.cols()) {
        throw std::invalid_argument("lengthscale count must match input dimension");
    }
    if ((params.lengthscales.array() <= 0.0).any() || params.signal_variance <= 0.0) {
        throw std::invalid_argument("kernel parameters must be positive");
    }
    params.noise_variance = std::max(params.noise_variance, KernelParams::kNoiseFloor);

    SurrogateModel model;
    model.params_ = std::move(params);
    model.inputs_ = inputs;

    const auto n = static_cast<double>(targets.size());
    if (targets.size() > 0) {
        model.target_mean_ = targets.mean();
        const double variance =
            (targets.array() - model.target_mean_).square().sum() / n;
        model.target_sd_ = variance > 0.0 ? std::sqrt(variance) : 1.0;
        model.targets_std_ =
            (targets.array() - model.target_mean_) / model.target_sd_;

        const Eigen::MatrixXd K = kernels::gram_matrix(
            inputs, model.params_.lengthscales, model.params_.signal_variance,
            model.params_.noise_variance);
        model.factorization_.compute(K);
        if (model.factorization_.info() != Eigen::Success) {
            throw std::runtime_error("covariance factorization failed (singular matrix)");
        }
        model.alpha_ = model.factorization_.solve(model.targets_std_);
    }
    return model;
}

Posterior SurrogateModel::posterior(const UnitPoint& x) const {
    Eigen::MatrixXd query(1, static_cast<Eigen::Index>(x.coords.size()));
    for (Eigen::Index j = 0; j < query.cols(); ++j) query(0, j) = x.coords[j];
    auto [means, variances] = posterior_batch(query);
    return Posterior{means(0), variances(0)};
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> SurrogateModel::posterior_batch(
    const Eigen::MatrixXd& queries) const {
    const Eigen::Index m = queries.rows();
    if (train_size() == 0) {
        // Prior: standardized mean 0, variance = signal variance.
        const double prior_var = params_.signal_variance * target_sd_ * target_sd_;
        return {Eigen::VectorXd::Constant(m, target_mean_),
                Eigen::VectorXd::Constant(m, prior_var)};
    }
    if (queries.cols() != inputs_.cols()) {
        throw std::invalid_argument("query dimension must match training inputs");
    }

    const Eigen::MatrixXd K_star = kernels::cross_covariance(
        queries, inputs_, params_.lengthscales, params_.signal_variance);
    Eigen::VectorXd means = K_star * alpha_;

    // Latent variance: k** - ||L^-1 k*||^2, clipped at zero.
    const Eigen::MatrixXd V =
        factorization_.matrixL().solve(K_star.transpose());
    Eigen::VectorXd variances =
        (params_.signal_variance - V.array().square().colwise().sum().transpose())
            .cwiseMax(0.0);

    means = (means.array() * target_sd_ + target_mean_).matrix();
    variances *= target_sd_ * target_sd_;
    return {std::move(means), std::move(variances)};
}

double SurrogateModel::log_marginal_likelihood() const {
    const auto n = static_cast<Eigen::Index>(train_size());
    if (n == 0) {
        throw std::logic_error("log marginal likelihood requires training data");
    }
    const double quad = targets_std_.dot(alpha_);
    const double log_det =
        factorization_.matrixLLT().diagonal().array().log().sum();
    return -0.5 * quad - log_det - 0.5 * static_cast<double>(n) * kLog2Pi;
}

Eigen::VectorXd SurrogateModel::log_marginal_likelihood_gradient() const {
    const auto n = static_cast<Eigen::Index>(train_size());
    if (n == 0) {
        throw std::logic_error("log marginal likelihood requires training data");
    }
    const Eigen::Index d = inputs_.cols();

    const Eigen::MatrixXd K_inv =
        factorization_.solve(Eigen::MatrixXd::Identity(n, n));
    const Eigen::MatrixXd W = alpha_ * alpha_.transpose() - K_inv;

    Eigen::VectorXd grad(d + 2);

    // d k / d log lengthscale_k = (5/3) sigma^2 e^{-sqrt5 r} (1 + sqrt5 r) d_k^2 / l_k^2
    for (Eigen::Index k = 0; k < d; ++k) {
        double sum = 0.0;
        const double ls2 = params_.lengthscales(k) * params_.lengthscales(k);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                if (i == j) continue;
                double r2 = 0.0;
                for (Eigen::Index c = 0; c < d; ++c) {
                    const double delta =
                        (inputs_(i, c) - inputs_(j, c)) / params_.lengthscales(c);
                    r2 += delta * delta;
                }
                const double r = std::sqrt(r2);
                const double dk = inputs_(i, k) - inputs_(j, k);
                const double dK = (5.0 / 3.0) * params_.signal_variance *
                                  std::exp(-kSqrt5 * r) * (1.0 + kSqrt5 * r) *
                                  (dk * dk / ls2);
                sum += W(i, j) * dK;
            }
        }
        grad(k) = 0.5 * sum;
    }

    // d K / d log signal = K - noise I; d K / d log noise = noise I.
    const Eigen::MatrixXd K_signal = kernels::gram_matrix(
        inputs_, params_.lengthscales, params_.signal_variance, 0.0);
    grad(d) = 0.5 * (W.array() * K_signal.array()).sum();
    grad(d + 1) = 0.5 * params_.noise_variance * W.trace();
    return grad;
}

namespace {

struct LogBounds {
    Eigen::VectorXd lo;
    Eigen::VectorXd hi;
};

LogBounds parameter_bounds(Eigen::Index d) {
    LogBounds bounds;
    bounds.lo.resize(d + 2);
    bounds.hi.resize(d + 2);
    for (Eigen::Index k = 0; k < d; ++k) {
        bounds.lo(k) = std::log(KernelParams::kLengthscaleMin);
        bounds.hi(k) = std::log(KernelParams::kLengthscaleMax);
    }
    bounds.lo(d) = std::log(KernelParams::kSignalMin);
    bounds.hi(d) = std::log(KernelParams::kSignalMax);
    bounds.lo(d + 1) = std::log(KernelParams::kNoiseFloor);
    bounds.hi(d + 1) = std::log(KernelParams::kNoiseMax);
    return bounds;
}

KernelParams params_from_log(const Eigen::VectorXd& theta, Eigen::Index d) {
    KernelParams params;
    params.lengthscales = theta.head(d).array().exp();
    params.signal_variance = std::exp(theta(d));
    params.noise_variance = std::exp(theta(d + 1));
    return params;
}

// Projected gradient ascent with backtracking; the LML trace is monotone by
// construction. Stops on gradient norm < 1e-5 or 200 steps.
SurrogateModel ascend(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                      Eigen::VectorXd theta, const LogBounds& bounds,
                      double* best_lml) {
    const Eigen::Index d = X.cols();
    auto clamp = [&](Eigen::VectorXd v) {
        return v.cwiseMax(bounds.lo).cwiseMin(bounds.hi);
    };

    theta = clamp(std::move(theta));
    SurrogateModel model = SurrogateModel::create(X, y, params_from_log(theta, d));
    double lml = model.log_marginal_likelihood();

    double step = 0.1;
    for (int iter = 0; iter < 200; ++iter) {
        Eigen::VectorXd grad = model.log_marginal_likelihood_gradient();
        if (grad.lpNorm<Eigen::Infinity>() < 1e-5) break;

        bool improved = false;
        while (step > 1e-12) {
            const Eigen::VectorXd candidate = clamp(theta + step * grad);
            if ((candidate - theta).lpNorm<Eigen::Infinity>() == 0.0) break;
            SurrogateModel trial;
            double trial_lml = -std::numeric_limits<double>::infinity();
            try {
                trial = SurrogateModel::create(X, y, params_from_log(candidate, d));
                trial_lml = trial.log_marginal_likelihood();
            } catch (const std::runtime_error&) {
            }
            if (std::isfinite(trial_lml) && trial_lml > lml) {
                theta = candidate;
                model = std::move(trial);
                lml = trial_lml;
                step *= 1.5;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if (!improved) break;
    }
    *best_lml = lml;
    return model;
}

}  // namespace

SurrogateModel fit(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets) {
    if (inputs.rows() != targets.size()) {
        throw std::invalid_argument("inputs and targets must have equal length");
    }
    if (!targets.allFinite()) {
        throw std::invalid_argument("non-finite targets rejected");
    }
    if (targets.size() == 0) {
        return SurrogateModel();
    }

    const Eigen::Index d = inputs.cols();
    const LogBounds bounds = parameter_bounds(d);

    // 8 deterministic restarts: lengthscale ladder x noise level.
    const double lengthscale_starts[] = {0.1, 0.3, 1.0, 3.0};
    const double noise_starts[] = {1e-4, 1e-2};

    SurrogateModel best;
    double best_lml = -std::numeric_limits<double>::infinity();
    for (const double ls : lengthscale_starts) {
        for (const double noise : noise_starts) {
            Eigen::VectorXd theta(d + 2);
            for (Eigen::Index k = 0; k < d; ++k) theta(k) = std::log(ls);
            theta(d) = std::log(1.0);
            theta(d + 1) = std::log(noise);

            double lml = 0.0;
            SurrogateModel model = ascend(inputs, targets, std::move(theta), bounds, &lml);
            if (lml > best_lml) {
                best_lml = lml;
                best = std::move(model);
            }
        }
    }
    return best;
}

SurrogateModel fit(const std::vector<UnitPoint>& inputs,
                   const std::vector<double>& targets) {
    if (inputs.size() != targets.size()) {
        throw std::invalid_argument("inputs and targets must have equal length");
    }
    Eigen::VectorXd y(static_cast<Eigen::Index>(targets.size()));
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = targets[i];
    return fit(to_matrix(inputs), y);
}

}  // namespace greenfront
