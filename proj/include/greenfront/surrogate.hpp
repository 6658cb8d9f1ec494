#pragma once

#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "greenfront/search_space.hpp"

namespace greenfront {

// Matern 5/2 ARD kernel parameters on the standardized-target scale.
struct KernelParams {
    Eigen::VectorXd lengthscales;   // one per input dimension, > 0
    double signal_variance = 1.0;   // > 0
    double noise_variance = 1e-6;   // >= noise floor

    static constexpr double kNoiseFloor = 1e-6;
    static constexpr double kLengthscaleMin = 1e-3;
    static constexpr double kLengthscaleMax = 10.0;
    static constexpr double kSignalMin = 1e-4;
    static constexpr double kSignalMax = 100.0;
    static constexpr double kNoiseMax = 1.0;
};

struct Posterior {
    double mean = 0.0;
    double variance = 0.0;
};

// Gaussian-process regression over encoded unit-cube inputs. Targets are
// standardized internally (mean 0, sd 1 over the training set); the
// factorization is cached, so fitted models are immutable and cheap to query
// from several threads at once.
class SurrogateModel {
public:
    // Prior model (no data): zero mean, unit variance in standardized space.
    SurrogateModel();

    // Factorize with the given parameters, no hyperparameter search.
    static SurrogateModel create(const Eigen::MatrixXd& inputs,
                                 const Eigen::VectorXd& targets,
                                 KernelParams params);

    std::size_t train_size() const { return static_cast<std::size_t>(inputs_.rows()); }
    std::size_t input_dimension() const { return static_cast<std::size_t>(inputs_.cols()); }
    const KernelParams& params() const { return params_; }
    double target_mean() const { return target_mean_; }
    double target_sd() const { return target_sd_; }

    // De-standardized predictive mean and latent variance (variance >= 0).
    Posterior posterior(const UnitPoint& x) const;
    std::pair<Eigen::VectorXd, Eigen::VectorXd> posterior_batch(
        const Eigen::MatrixXd& queries) const;

    // Of the standardized training data; requires >= 1 training point.
    double log_marginal_likelihood() const;
    // d LML / d theta with theta = (log lengthscales..., log signal, log noise).
    Eigen::VectorXd log_marginal_likelihood_gradient() const;

private:
    KernelParams params_;
    Eigen::MatrixXd inputs_;
    Eigen::VectorXd targets_std_;
    double target_mean_ = 0.0;
    double target_sd_ = 1.0;
    Eigen::LLT<Eigen::MatrixXd> factorization_;
    Eigen::VectorXd alpha_;
};

// Standardizes targets and maximises log marginal likelihood by multi-start
// projected gradient ascent (8 deterministic restarts, monotone trace,
// bounded parameters). With no data returns the prior model.
SurrogateModel fit(const std::vector<UnitPoint>& inputs,
                   const std::vector<double>& targets);
SurrogateModel fit(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets);

}  // namespace greenfront
