#include "frugal/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "frugal/error.hpp"

namespace frugal {

namespace {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double dot(std::span<const double> params, std::span<const double> x) {
  double z = params[x.size()];
  for (std::size_t j = 0; j < x.size(); ++j) z += params[j] * x[j];
  return z;
}

void require_binary(const Dataset& ds) {
  if (!ds.binary) throw PreconditionError(ds.label_text() + ": labels must be binarized");
}

}  // namespace

NBModel nb_train(const Dataset& train) {
  require_binary(train);
  if (train.size() == 0) throw PreconditionError(train.label_text() + ": empty training set");
  NBModel m;
  const std::size_t width = train.width();
  for (bool label : {false, true}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < train.size(); ++i)
      if (train.label(i) == label) members.push_back(i);
    if (members.empty()) continue;

    NBModel::ClassStats s;
    s.label = label;
    s.prior = static_cast<double>(members.size()) / static_cast<double>(train.size());
    s.mean.assign(width, kMissing);
    s.variance.assign(width, NBModel::kVarianceFloor);
    for (std::size_t c = 0; c < width; ++c) {
      double sum = 0.0;
      std::size_t n = 0;
      for (std::size_t i : members) {
        const double v = train.rows[i][c];
        if (!is_missing(v)) {
          sum += v;
          ++n;
        }
      }
      if (n == 0) continue;
      const double mean = sum / static_cast<double>(n);
      double ss = 0.0;
      for (std::size_t i : members) {
        const double v = train.rows[i][c];
        if (!is_missing(v)) ss += (v - mean) * (v - mean);
      }
      s.mean[c] = mean;
      s.variance[c] = std::max(ss / static_cast<double>(n), NBModel::kVarianceFloor);
    }
    m.classes.push_back(std::move(s));
  }
  return m;
}

double nb_log_joint(const NBModel::ClassStats& stats, std::span<const double> row) {
  double out = std::log(stats.prior);
  for (std::size_t c = 0; c < row.size(); ++c) {
    if (is_missing(row[c]) || is_missing(stats.mean[c])) continue;
    const double d = row[c] - stats.mean[c];
    out += -0.5 * std::log(2.0 * std::numbers::pi * stats.variance[c]) - d * d / (2.0 * stats.variance[c]);
  }
  return out;
}

double nb_posterior(const NBModel& m, std::span<const double> row) {
  if (m.classes.empty()) throw PreconditionError("untrained naive Bayes model");
  if (m.classes.size() == 1) return m.classes[0].label ? 1.0 : 0.0;
  const double lf = nb_log_joint(m.classes[0], row);
  const double lt = nb_log_joint(m.classes[1], row);
  return sigmoid(lt - lf);
}

bool nb_predict(const NBModel& m, std::span<const double> row) {
  if (m.classes.size() == 1) return m.classes[0].label;
  // Ties go to the more frequent class, then to false.
  const double lf = nb_log_joint(m.classes[0], row);
  const double lt = nb_log_joint(m.classes[1], row);
  if (lt != lf) return lt > lf;
  return m.classes[1].prior > m.classes[0].prior;
}

std::vector<std::vector<double>> lr_standardize(const LogisticModel& m, const Dataset& ds) {
  std::vector<std::vector<double>> out(ds.size(), std::vector<double>(ds.width(), 0.0));
  for (std::size_t i = 0; i < ds.size(); ++i)
    for (std::size_t c = 0; c < ds.width(); ++c) {
      const double v = ds.rows[i][c];
      out[i][c] = is_missing(v) ? 0.0 : (v - m.mean[c]) / m.stddev[c];
    }
  return out;
}

double lr_loss(std::span<const double> params, const std::vector<std::vector<double>>& x,
               std::span<const double> y) {
  double loss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double z = dot(params, x[i]);
    // -[y log s(z) + (1-y) log(1 - s(z))]
    loss += softplus(z) - y[i] * z;
  }
  return loss / static_cast<double>(x.size());
}

std::vector<double> lr_gradient(std::span<const double> params,
                                const std::vector<std::vector<double>>& x,
                                std::span<const double> y) {
  std::vector<double> g(params.size(), 0.0);
  const std::size_t width = params.size() - 1;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double err = sigmoid(dot(params, x[i])) - y[i];
    for (std::size_t j = 0; j < width; ++j) g[j] += err * x[i][j];
    g[width] += err;
  }
  for (double& v : g) v /= static_cast<double>(x.size());
  return g;
}

LogisticModel lr_train(const Dataset& train, const LogisticOptions& options) {
  require_binary(train);
  bool has_true = false, has_false = false;
  for (std::size_t i = 0; i < train.size(); ++i) (train.label(i) ? has_true : has_false) = true;
  if (!has_true || !has_false)
    throw PreconditionError(train.label_text() + ": logistic regression needs both classes");

  const std::size_t width = train.width();
  LogisticModel m;
  m.mean.assign(width, 0.0);
  m.stddev.assign(width, 1.0);
  for (std::size_t c = 0; c < width; ++c) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& row : train.rows)
      if (!is_missing(row[c])) {
        sum += row[c];
        ++n;
      }
    if (n == 0) continue;
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (const auto& row : train.rows)
      if (!is_missing(row[c])) ss += (row[c] - mean) * (row[c] - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n));
    m.mean[c] = mean;
    m.stddev[c] = sd > 1e-12 ? sd : 1.0;
  }

  const auto x = lr_standardize(m, train);
  std::vector<double> params(width + 1, 0.0);
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    const std::vector<double> g = lr_gradient(params, x, train.labels);
    for (std::size_t j = 0; j < params.size(); ++j) params[j] -= options.learning_rate * g[j];
  }
  m.weights.assign(params.begin(), params.end() - 1);
  m.bias = params.back();
  for (double w : params)
    if (!std::isfinite(w)) throw PreconditionError("logistic regression diverged");
  return m;
}

double lr_probability(const LogisticModel& m, std::span<const double> row) {
  double z = m.bias;
  for (std::size_t c = 0; c < m.weights.size(); ++c) {
    if (is_missing(row[c])) continue;
    z += m.weights[c] * (row[c] - m.mean[c]) / m.stddev[c];
  }
  return sigmoid(z);
}

bool lr_predict(const LogisticModel& m, std::span<const double> row) { return lr_probability(m, row) >= 0.5; }

}  // namespace frugal
