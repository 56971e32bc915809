#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "frugal/dataset.hpp"

namespace frugal {

// Gaussian naive Bayes over numeric attributes.
struct NBModel {
  static constexpr double kVarianceFloor = 1e-6;

  struct ClassStats {
    bool label = false;
    double prior = 0.0;
    std::vector<double> mean;      // kMissing when the class never saw a value
    std::vector<double> variance;  // >= kVarianceFloor
  };
  std::vector<ClassStats> classes;  // false before true, present classes only
};

NBModel nb_train(const Dataset& train);

// log P(class) + sum log N(x | mean, variance), skipping missing values.
double nb_log_joint(const NBModel::ClassStats& stats, std::span<const double> row);
// P(true | row); 0 or 1 for single-class models.
double nb_posterior(const NBModel& m, std::span<const double> row);
bool nb_predict(const NBModel& m, std::span<const double> row);

struct LogisticOptions {
  int epochs = 500;
  double learning_rate = 0.1;
};

// Logistic regression on standardized features.
struct LogisticModel {
  std::vector<double> weights;
  double bias = 0.0;
  std::vector<double> mean;
  std::vector<double> stddev;
};

// Standardized copy of the training rows; missing cells become 0 (the mean).
std::vector<std::vector<double>> lr_standardize(const LogisticModel& m, const Dataset& ds);

// Mean negative log-likelihood and its gradient (weights then bias) for the
// given parameters over standardized rows.
double lr_loss(std::span<const double> params, const std::vector<std::vector<double>>& x,
               std::span<const double> y);
std::vector<double> lr_gradient(std::span<const double> params,
                                const std::vector<std::vector<double>>& x,
                                std::span<const double> y);

LogisticModel lr_train(const Dataset& train, const LogisticOptions& options = {});
double lr_probability(const LogisticModel& m, std::span<const double> row);
bool lr_predict(const LogisticModel& m, std::span<const double> row);

}  // namespace frugal
