#pragma once

// epsilon-entropy of finite metric-measure spaces,
//   H_eps = inf { H(lambda) : k(lambda, mu) < eps },
// bracketed by certified bounds, plus scaled-entropy evaluation and
// scaling-exponent regression over tables of H_eps(rho_n).

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "filtlab/mmspace.hpp"

namespace filtlab {

// The open condition k < eps is checked as k <= eps (1 - kStrictMargin).
inline constexpr double kStrictMargin = 1e-12;

struct EntropyBounds {
  double lower = 0.0;
  double upper = 0.0;
  bool lower_clamped = false;  // lower bound exceeded upper and was cut back
  std::string upper_method;    // which candidate family produced the upper bound
  std::vector<double> witness; // the lambda achieving `upper`, indexed like mu
};

struct EntropyOptions {
  // Separation of lower-bound center sets is 2 * theta * eps.
  double theta = 2.0;
};

// Throws DomainError for eps <= 0 and StructuralError on size mismatch.
EntropyBounds epsilon_entropy_bounds(const SemimetricMatrix& d, const DiscreteMeasure& mu,
                                     double eps, const EntropyOptions& opt = {});

// Bounds over a grid of eps values, made monotone: the upper bound is a
// running minimum toward larger eps and the lower bound a running maximum
// toward smaller eps (both stay valid). Result is in the order of `eps`.
std::vector<EntropyBounds> epsilon_entropy_profile(const SemimetricMatrix& d,
                                                   const DiscreteMeasure& mu,
                                                   const std::vector<double>& eps,
                                                   const EntropyOptions& opt = {});

struct OracleValue {
  double value = 0.0;
  double error_bar = 0.0;  // 0: the enumeration is exact
};

inline constexpr std::size_t kOracleMaxAtoms = 5;

// Exact H_eps on at most five atoms: H is concave, so its minimum over the
// feasible transport polytope sits at a vertex, and every vertex is either
// a map of atoms to atoms or such a map with one atom split across two
// targets so that the cost budget is met with equality.
OracleValue epsilon_entropy_oracle(const SemimetricMatrix& d, const DiscreteMeasure& mu,
                                   double eps);

class ScalingFamily {
 public:
  enum class Form { power, exponential, custom };

  // c(eps, n) = (n log2(1/eps))^beta
  static ScalingFamily power(double beta);
  // c(eps, n) = r_1 ... r_n; a single radix repeats at every level.
  static ScalingFamily exponential(std::vector<std::size_t> radices);
  // Values on a grid, keyed by (n, eps).
  static ScalingFamily custom(std::map<std::pair<std::size_t, double>, double> table);

  Form form() const { return form_; }
  double operator()(double eps, std::size_t n) const;
  // Increasing in n, nonincreasing in eps on the grid; throws DomainError.
  void validate(const std::vector<double>& eps, const std::vector<std::size_t>& ns) const;
  std::string describe() const;

 private:
  Form form_ = Form::power;
  double beta_ = 1.0;
  std::vector<std::size_t> radices_;
  std::map<std::pair<std::size_t, double>, double> table_;
};

// H[e][i] = H_eps(rho_n) for eps = epsilons[e], n = ns[i].
struct HTable {
  std::vector<double> epsilons;
  std::vector<std::size_t> ns;
  std::vector<std::vector<double>> H;
};

struct ScaledEntropy {
  double h = 0.0;               // value at the smallest eps
  std::vector<double> profile;  // per eps, in table order
};

// For every eps, the largest H/c over the top quartile of n; the reported
// value is the one at the smallest eps. Needs >= 3 eps and >= 4 n values.
ScaledEntropy scaled_entropy_eval(const HTable& table, const ScalingFamily& family);

struct ScalingFit {
  double beta = 0.0;
  double stderr_beta = 0.0;
  double intercept = 0.0;   // mean of the per-eps intercepts
  std::vector<double> intercepts;  // per eps row, NaN where the row is empty
  double r_squared = 0.0;   // within-eps R^2
  std::size_t points = 0;
};

// Least squares of log2 H on log2(n log2(1/eps)) pooled over the grid with
// one intercept per eps: the slope is identified by growth in n only, since
// the eps-dependence of H also carries the unknown factor h(eps).
// Nonpositive H are dropped. Throws InsufficientDataError with fewer than 6
// points left or no residual degrees of freedom.
ScalingFit scaling_exponent_fit(const HTable& table);

struct GrowthVerdict {
  bool exponential = false;
  double rate = 0.0;        // slope of log2 H against n
  double r_squared = 0.0;   // of that fit
  double power_r_squared = 0.0;  // of log2 H against log2 n
};

// Exponential when the slope exceeds 0.1, the fit has R^2 > 0.9, and the
// exponential model fits at least as well as a power law. Needs >= 5 points.
GrowthVerdict exponential_growth_test(const std::vector<std::size_t>& ns,
                                      const std::vector<double>& H);

}  // namespace filtlab
