#include "cocite/stats.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>

#include <Eigen/Dense>

#include "cocite/error.hpp"

namespace cocite {

HitLabels hit_labels(const IdMap<std::uint64_t>& future_citations, double top_frac) {
  if (future_citations.empty()) throw ValidationError("hit labels need at least one paper");
  if (!(top_frac > 0.0 && top_frac < 1.0)) throw ValidationError("top fraction must lie in (0, 1)");

  std::vector<std::uint64_t> counts;
  counts.reserve(future_citations.size());
  for (const auto& [id, c] : future_citations) counts.push_back(c);
  std::sort(counts.begin(), counts.end(), std::greater<>());
  if (counts.front() == counts.back()) {
    throw DegenerateError("all papers have the same citation count; hit labels are undefined");
  }

  const double n = static_cast<double>(counts.size());
  const double allowed = top_frac * n * (1.0 + 1e-12);
  HitLabels out;
  out.threshold = counts.front();
  out.tie_warning = true;
  // Lower the threshold through the distinct counts while the share of papers
  // at or above it stays within top_frac.
  std::size_t i = 0;
  while (i < counts.size()) {
    const std::uint64_t v = counts[i];
    std::size_t j = i;
    while (j < counts.size() && counts[j] == v) ++j;
    if (static_cast<double>(j) > allowed) break;
    out.threshold = v;
    out.tie_warning = false;
    i = j;
  }

  std::size_t hits = 0;
  for (const auto& [id, c] : future_citations) {
    const int label = c >= out.threshold ? 1 : 0;
    hits += static_cast<std::size_t>(label);
    out.labels.emplace(id, label);
  }
  out.realized_rate = static_cast<double>(hits) / n;
  return out;
}

PercentileSeries percentile_rank(const IdMap<double>& values, std::string variable) {
  PercentileSeries out;
  out.variable = std::move(variable);
  std::vector<double> sorted;
  sorted.reserve(values.size());
  for (const auto& [id, v] : values) sorted.push_back(v);
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<std::uint64_t>(sorted.size());
  for (const auto& [id, v] : values) {
    const auto r = static_cast<std::uint64_t>(std::upper_bound(sorted.begin(), sorted.end(), v) - sorted.begin());
    out.percentiles.emplace(id, static_cast<int>((100 * r + n - 1) / n));
  }
  return out;
}

std::vector<CurvePoint> hit_curve(const PercentileSeries& series, const HitLabels& labels) {
  std::map<int, CurvePoint> bins;
  for (const auto& [id, pct] : series.percentiles) {
    auto it = labels.labels.find(id);
    if (it == labels.labels.end()) continue;
    auto& bin = bins[pct];
    bin.percentile = pct;
    ++bin.n;
    bin.hits += static_cast<std::uint64_t>(it->second);
  }
  std::vector<CurvePoint> out;
  out.reserve(bins.size());
  for (auto& [pct, bin] : bins) {
    bin.probability = static_cast<double>(bin.hits) / static_cast<double>(bin.n);
    out.push_back(bin);
  }
  return out;
}

double null_deviance(std::uint64_t n, std::uint64_t hits) {
  if (n == 0 || hits == 0 || hits == n) return 0.0;
  const double p = static_cast<double>(hits) / static_cast<double>(n);
  return -2.0 * static_cast<double>(n) * (p * std::log(p) + (1.0 - p) * std::log1p(-p));
}

namespace {

// log(1 + e^x) without overflow
double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double deviance(const Eigen::VectorXd& eta, const Eigen::VectorXd& y) {
  double dev = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) dev += 2.0 * (y[i] > 0.5 ? softplus(-eta[i]) : softplus(eta[i]));
  return dev;
}

}  // namespace

LogisticFit fit_logistic(std::span<const std::vector<double>> columns, std::span<const int> y,
                         const LogisticOptions& options, std::span<const double> start) {
  const auto n = static_cast<Eigen::Index>(y.size());
  const auto k = static_cast<Eigen::Index>(columns.size() + 1);
  for (const auto& col : columns) {
    if (col.size() != y.size()) throw ValidationError("design column length differs from response length");
  }
  std::uint64_t hits = 0;
  for (int v : y) hits += static_cast<std::uint64_t>(v != 0);
  if (n == 0 || hits == 0 || hits == static_cast<std::uint64_t>(n)) {
    throw DegenerateError("logistic fit needs both classes present");
  }

  Eigen::MatrixXd x(n, k);
  Eigen::VectorXd yv(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    yv[i] = y[static_cast<std::size_t>(i)] != 0 ? 1.0 : 0.0;
    for (Eigen::Index c = 1; c < k; ++c) x(i, c) = columns[static_cast<std::size_t>(c - 1)][static_cast<std::size_t>(i)];
  }

  const double mean_y = static_cast<double>(hits) / static_cast<double>(n);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(k);
  if (!start.empty()) {
    for (Eigen::Index c = 0; c < k && c < static_cast<Eigen::Index>(start.size()); ++c) beta[c] = start[static_cast<std::size_t>(c)];
  } else {
    beta[0] = std::log(mean_y / (1.0 - mean_y));
  }

  LogisticFit fit;
  fit.n = static_cast<std::size_t>(n);
  fit.null_deviance = null_deviance(static_cast<std::uint64_t>(n), hits);

  Eigen::VectorXd eta = x * beta;
  double dev = deviance(eta, yv);
  Eigen::VectorXd w(n), z(n);
  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    fit.iterations = iter;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double mu = 1.0 / (1.0 + std::exp(-eta[i]));
      const double var = std::max(mu * (1.0 - mu), 1e-12);
      w[i] = std::sqrt(var);
      z[i] = eta[i] + (yv[i] - mu) / var;
    }
    const Eigen::MatrixXd wx = w.asDiagonal() * x;
    const Eigen::VectorXd wz = w.cwiseProduct(z);
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(wx);
    cod.setThreshold(1e-10);
    Eigen::VectorXd candidate = cod.solve(wz);

    Eigen::VectorXd step = candidate - beta;
    double new_dev = deviance(x * candidate, yv);
    // step halving keeps the deviance from increasing
    for (int halving = 0; halving < 30 && !(new_dev <= dev); ++halving) {
      step *= 0.5;
      candidate = beta + step;
      new_dev = deviance(x * candidate, yv);
    }
    if (!(new_dev <= dev)) {
      fit.converged = true;  // no descent direction left
      break;
    }
    const double change = dev - new_dev;
    beta = candidate;
    eta = x * beta;
    dev = new_dev;
    if (change < options.tolerance) {
      fit.converged = true;
      break;
    }
  }

  fit.residual_deviance = dev;
  fit.coefficients.assign(beta.data(), beta.data() + beta.size());
  const double max_eta = eta.cwiseAbs().maxCoeff();
  fit.separation = max_eta > 30.0 || beta.cwiseAbs().maxCoeff() > 1e6;
  return fit;
}

namespace {

void require_degree(int degree) {
  if (degree < 0 || degree > 4) throw ValidationError("polynomial degree must lie in 0..4");
}

void append_powers(std::vector<std::vector<double>>& columns, const std::vector<double>& x, int degree) {
  for (int p = 1; p <= degree; ++p) {
    std::vector<double> col(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) col[i] = std::pow(x[i], p);
    columns.push_back(std::move(col));
  }
}

}  // namespace

LogisticFit fit_logistic_poly(const PercentileSeries& x, const HitLabels& y, int degree,
                              const LogisticOptions& options) {
  require_degree(degree);
  std::vector<double> xs;
  std::vector<int> ys;
  std::set<int> distinct;
  for (const auto& [id, pct] : x.percentiles) {
    auto it = y.labels.find(id);
    if (it == y.labels.end()) continue;
    xs.push_back(pct / 100.0);
    ys.push_back(it->second);
    distinct.insert(pct);
  }
  if (static_cast<int>(distinct.size()) < degree + 2 && degree > 0) {
    throw DegenerateError("variable '" + x.variable + "' has too few distinct percentiles for degree " +
                          std::to_string(degree));
  }
  std::vector<std::vector<double>> columns;
  append_powers(columns, xs, degree);
  LogisticFit fit = fit_logistic(columns, ys, options);
  fit.variables = {{x.variable, degree}};
  return fit;
}

std::vector<LogisticFit> hierarchical_fit(std::span<const std::pair<PercentileSeries, int>> ordered_vars,
                                          const HitLabels& y, const LogisticOptions& options) {
  for (const auto& [series, degree] : ordered_vars) require_degree(degree);
  std::vector<std::string> ids;
  for (const auto& [id, label] : y.labels) {
    bool everywhere = true;
    for (const auto& [series, degree] : ordered_vars) {
      if (!series.percentiles.contains(id)) {
        everywhere = false;
        break;
      }
    }
    if (everywhere) ids.push_back(id);
  }
  std::vector<int> ys;
  ys.reserve(ids.size());
  for (const auto& id : ids) ys.push_back(y.labels.find(id)->second);

  std::vector<LogisticFit> fits;
  std::vector<std::vector<double>> columns;
  fits.push_back(fit_logistic(columns, ys, options));
  for (const auto& [series, degree] : ordered_vars) {
    std::vector<double> xs;
    xs.reserve(ids.size());
    for (const auto& id : ids) xs.push_back(series.percentiles.find(id)->second / 100.0);
    append_powers(columns, xs, degree);
    LogisticFit fit = fit_logistic(columns, ys, options, fits.back().coefficients);
    fit.variables = fits.back().variables;
    fit.variables.emplace_back(series.variable, degree);
    fits.push_back(std::move(fit));
  }
  return fits;
}

MIResult mutual_information(const HitLabels& labels, const PercentileSeries& series) {
  std::map<int, std::array<std::uint64_t, 2>> joint;
  std::array<std::uint64_t, 2> marginal_y{0, 0};
  std::uint64_t n = 0;
  for (const auto& [id, pct] : series.percentiles) {
    auto it = labels.labels.find(id);
    if (it == labels.labels.end()) continue;
    const int hit = it->second != 0 ? 1 : 0;
    ++joint[pct][static_cast<std::size_t>(hit)];
    ++marginal_y[static_cast<std::size_t>(hit)];
    ++n;
  }
  MIResult out{series.variable, 0.0};
  if (n == 0) return out;
  const double total = static_cast<double>(n);
  double mi = 0.0;
  for (const auto& [pct, cells] : joint) {
    const std::uint64_t nx = cells[0] + cells[1];
    for (std::size_t h = 0; h < 2; ++h) {
      if (cells[h] == 0) continue;
      // integer ratio so an exact product table yields log2(1) = 0 exactly
      const double ratio = static_cast<double>(cells[h] * n) / static_cast<double>(nx * marginal_y[h]);
      mi += static_cast<double>(cells[h]) / total * std::log2(ratio);
    }
  }
  out.mi_bits = std::max(0.0, mi);
  return out;
}

double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -(p * std::log2(p) + (1.0 - p) * std::log2(1.0 - p));
}

}  // namespace cocite
