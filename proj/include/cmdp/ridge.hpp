/**
 * @file ridge.hpp
 * @brief Incremental ridge regression with bonus and information-gain support.
 *
 * One RidgeState per step h holds Lambda = lambda*I + sum_i x_i x_i^T over an
 * offline pool ingested once up front and an online pool that grows by one
 * sample per episode. The Cholesky factor is maintained by rank-one updates
 * and the log-determinant by the matrix determinant lemma,
 *   log det(Lambda + x x^T) = log det(Lambda) + log(1 + x^T Lambda^{-1} x),
 * with a full refactorization every refactor_period updates to pin down
 * drift. Pools keep raw samples because regression targets depend on the
 * current value estimate and must be rebuilt for every (episode, h).
 */
#ifndef CMDP_RIDGE_HPP
#define CMDP_RIDGE_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "cmdp/errors.hpp"
#include "cmdp/linalg.hpp"

namespace cmdp {

enum class Mode { dovi, dovi_plus, online_only, naive_confounded };

inline const char* to_string(Mode m) {
  switch (m) {
    case Mode::dovi: return "dovi";
    case Mode::dovi_plus: return "dovi_plus";
    case Mode::online_only: return "online_only";
    default: return "naive_confounded";
  }
}

inline Mode mode_from_string(const std::string& s) {
  if (s == "dovi") return Mode::dovi;
  if (s == "dovi_plus") return Mode::dovi_plus;
  if (s == "online_only") return Mode::online_only;
  if (s == "naive_confounded") return Mode::naive_confounded;
  throw ValidationError("unknown mode: " + s);
}

/// Learner configuration. beta_scale < 0 means "use the instance default
/// from the gallery registry"; zeta is the confidence level in (0, 1].
struct AlgoConfig {
  double lambda = 1.0;
  double beta_scale = -1.0;
  double zeta = 0.1;
  int K = 100;
  Mode mode = Mode::dovi;
  std::uint64_t seed = 0;
  std::vector<int> init_schedule;  // nonempty: episode k starts at schedule[k % size]
};

/// beta = c * d * H * sqrt(log(d (T + n H) / zeta)) with T = H K.
inline double beta_value(double c, int d, int H, int K, long long n, double zeta) {
  if (!(zeta > 0.0 && zeta <= 1.0)) throw ValidationError("zeta must lie in (0, 1]");
  const double T = static_cast<double>(H) * K;
  const double arg = d * (T + static_cast<double>(n) * H) / zeta;
  return c * d * H * std::sqrt(std::log(arg));
}

/// One regression sample: feature plus the raw payload needed to rebuild
/// targets later (realized reward, next state, and the (s, o) pair where o is
/// the observed summary or mediator).
struct RidgeSample {
  Vec x;
  double r = 0.0;
  int sp = 0;
  int s = 0, o = 0;
};

class RidgeState {
 public:
  static constexpr int refactor_period = 512;

  void init(int d, double lambda) {
    if (d <= 0) throw std::domain_error("ridge: dimension must be positive");
    if (!(lambda > 0.0)) throw std::domain_error("ridge: lambda must be positive");
    d_ = d;
    lambda_ = lambda;
    Lambda_ = Mat(d, d, 0.0);
    for (int i = 0; i < d; ++i) Lambda_(i, i) = lambda;
    chol_.factor(Lambda_);
    logdet_ = d * std::log(lambda);
    logdet_start_ = logdet_;
    adds_ = 0;
    offline_.clear();
    online_.clear();
  }

  int dim() const { return d_; }
  double lambda() const { return lambda_; }

  /// Rank-one ingest. Enforces the feature-norm contract ||x||_2 <= 1.
  void add_feature(RidgeSample smp, bool offline) {
    if (static_cast<int>(smp.x.size()) != d_)
      throw std::domain_error("ridge: feature dimension mismatch");
    if (norm2(smp.x) > 1.0 + 1e-9)
      throw std::domain_error("ridge: feature norm exceeds 1");
    logdet_ += std::log1p(chol_.quad_inv(smp.x));
    chol_.rank1_update(smp.x);
    for (int i = 0; i < d_; ++i)
      for (int j = 0; j < d_; ++j) Lambda_(i, j) += smp.x[i] * smp.x[j];
    if (++adds_ % refactor_period == 0) {
      chol_.factor(Lambda_);
      logdet_ = chol_.logdet();
    }
    (offline ? offline_ : online_).push_back(std::move(smp));
  }

  /// Freeze the current log det as the online-phase baseline (Lambda^1).
  void mark_online_start() { logdet_start_ = logdet_; }

  /// omega = Lambda^{-1} sum_i x_i t_i with targets rebuilt by the callable;
  /// accumulation order is offline pool then online pool, fixed for
  /// reproducibility.
  template <class F>
  Vec solve(F&& target) const {
    Vec b(d_, 0.0);
    for (const auto& smp : offline_) axpy(target(smp), smp.x, b);
    for (const auto& smp : online_) axpy(target(smp), smp.x, b);
    Vec omega;
    chol_.solve(b, omega);
    return omega;
  }

  double quad(const Vec& x) const { return chol_.quad_inv(x); }

  /// Exploration bonus beta * sqrt(log(1 + x^T Lambda^{-1} x)); equals
  /// beta * sqrt(log det(Lambda + x x^T) - log det(Lambda)).
  double bonus(const Vec& x, double beta) const {
    return beta * std::sqrt(std::log1p(chol_.quad_inv(x)));
  }

  double logdet() const { return logdet_; }
  double logdet_start() const { return logdet_start_; }
  long long n_offline() const { return static_cast<long long>(offline_.size()); }
  long long n_online() const { return static_cast<long long>(online_.size()); }
  const std::vector<RidgeSample>& offline_pool() const { return offline_; }
  const std::vector<RidgeSample>& online_pool() const { return online_; }
  const Mat& lambda_matrix() const { return Lambda_; }

 private:
  int d_ = 0;
  double lambda_ = 1.0;
  Mat Lambda_;
  Cholesky chol_;
  double logdet_ = 0.0, logdet_start_ = 0.0;
  long long adds_ = 0;
  std::vector<RidgeSample> offline_, online_;
};

/// Information gained between two engine snapshots: log det Lambda_b - log det Lambda_a.
inline double info_gain(const RidgeState& a, const RidgeState& b) {
  return b.logdet() - a.logdet();
}

}  // namespace cmdp

#endif  // CMDP_RIDGE_HPP
