#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace cocite {

template <class V>
using IdMap = std::map<std::string, V, std::less<>>;

struct HitLabels {
  IdMap<int> labels;  // 1 = hit
  std::uint64_t threshold = 0;
  double realized_rate = 0.0;
  /// Ties at the maximum count exceed top_frac; every max-count paper is a hit.
  bool tie_warning = false;
};

/// Threshold v = smallest count with share{count >= v} <= top_frac; a paper is a
/// hit iff its count >= v, so tied papers share one label. When even the maximum
/// count is held by more than top_frac of the papers, v falls back to that
/// maximum and tie_warning is set. Throws DegenerateError when all counts are
/// equal, ValidationError for an empty map or top_frac outside (0, 1).
HitLabels hit_labels(const IdMap<std::uint64_t>& future_citations, double top_frac = 0.05);

struct PercentileSeries {
  std::string variable;
  IdMap<int> percentiles;  // 1..100
};

/// ceil(100 * r / N) with r = number of values <= x, so ties share a percentile.
PercentileSeries percentile_rank(const IdMap<double>& values, std::string variable = {});

struct CurvePoint {
  int percentile = 0;
  double probability = 0.0;
  std::uint64_t n = 0;
  std::uint64_t hits = 0;
};

/// Hit probability per occupied percentile over papers present in both inputs.
std::vector<CurvePoint> hit_curve(const PercentileSeries& series, const HitLabels& labels);

struct LogisticFit {
  std::vector<std::pair<std::string, int>> variables;  // name, polynomial degree
  std::vector<double> coefficients;                    // intercept first
  double null_deviance = 0.0;
  double residual_deviance = 0.0;
  int iterations = 0;
  bool converged = false;
  bool separation = false;
  std::size_t n = 0;
};

struct LogisticOptions {
  int max_iterations = 100;
  double tolerance = 1e-8;  // on |change of deviance|
};

/// Maximum-likelihood logistic regression by iteratively reweighted least
/// squares. `columns` excludes the intercept, which is always fitted.
/// Rank-deficient designs are solved in the minimum-norm sense.
LogisticFit fit_logistic(std::span<const std::vector<double>> columns, std::span<const int> y,
                         const LogisticOptions& options = {}, std::span<const double> start = {});

/// -2 log-likelihood of the intercept-only model.
double null_deviance(std::uint64_t n, std::uint64_t hits);

/// Logit of hits on x, x^2, ..., x^degree where x = percentile / 100.
/// Throws DegenerateError with a single class or fewer than degree + 2 distinct
/// x values; ValidationError for a degree outside 0..4.
LogisticFit fit_logistic_poly(const PercentileSeries& x, const HitLabels& y, int degree,
                              const LogisticOptions& options = {});

/// Nested fits over the papers present in every series: element 0 is the
/// intercept-only model, element k adds the k-th variable's terms. Each step
/// starts from the previous estimate, so residual deviance never increases.
std::vector<LogisticFit> hierarchical_fit(std::span<const std::pair<PercentileSeries, int>> ordered_vars,
                                          const HitLabels& y, const LogisticOptions& options = {});

struct MIResult {
  std::string variable;
  double mi_bits = 0.0;
};

/// Plug-in mutual information between percentile and hit label, in bits.
MIResult mutual_information(const HitLabels& labels, const PercentileSeries& series);

/// H(p) in bits.
double binary_entropy(double p);

}  // namespace cocite
