#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "cocite/error.hpp"
#include "cocite/stats.hpp"
#include "doctest.h"

using namespace cocite;

namespace {

std::string pid(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "p%05d", i);
  return buf;
}

IdMap<std::uint64_t> counts_of(const std::vector<std::uint64_t>& counts) {
  IdMap<std::uint64_t> m;
  for (std::size_t i = 0; i < counts.size(); ++i) m.emplace(pid(static_cast<int>(i)), counts[i]);
  return m;
}

HitLabels labels_of(const std::vector<int>& y) {
  HitLabels h;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    h.labels.emplace(pid(static_cast<int>(i)), y[i]);
    hits += static_cast<std::size_t>(y[i]);
  }
  h.realized_rate = static_cast<double>(hits) / static_cast<double>(y.size());
  return h;
}

PercentileSeries series_of(const std::vector<double>& x, std::string name = "x") {
  IdMap<double> m;
  for (std::size_t i = 0; i < x.size(); ++i) m.emplace(pid(static_cast<int>(i)), x[i]);
  return percentile_rank(m, std::move(name));
}

double mean_fitted_probability(const LogisticFit& fit, const std::vector<std::vector<double>>& columns) {
  const std::size_t n = columns.empty() ? fit.n : columns[0].size();
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double eta = fit.coefficients[0];
    for (std::size_t c = 0; c < columns.size(); ++c) eta += fit.coefficients[c + 1] * columns[c][i];
    sum += 1.0 / (1.0 + std::exp(-eta));
  }
  return sum / static_cast<double>(n);
}

}  // namespace

TEST_CASE("hit labels take the top five percent of 0..99") {
  std::vector<std::uint64_t> c(100);
  std::iota(c.begin(), c.end(), 0);
  const HitLabels h = hit_labels(counts_of(c), 0.05);
  CHECK(h.threshold == 95);
  CHECK(h.realized_rate == 0.05);
  CHECK_FALSE(h.tie_warning);
  for (int i = 0; i < 100; ++i) CHECK(h.labels.at(pid(i)) == (i >= 95 ? 1 : 0));
}

TEST_CASE("hit labels fall back to the maximum when ties exceed the share") {
  const HitLabels h = hit_labels(counts_of({5, 5, 5, 5, 1}), 0.2);
  CHECK(h.threshold == 5);
  CHECK(h.realized_rate == doctest::Approx(0.8));
  CHECK(h.tie_warning);
}

TEST_CASE("a single distinct maximum is the only hit when it fits the share") {
  const HitLabels h = hit_labels(counts_of({1, 2, 2, 3, 9, 4, 4, 4, 0, 0}), 0.1);
  CHECK(h.threshold == 9);
  CHECK(h.realized_rate == doctest::Approx(0.1));
  CHECK(h.labels.at(pid(4)) == 1);
}

TEST_CASE("hit label errors") {
  CHECK_THROWS_AS((void)hit_labels(counts_of({3, 3, 3}), 0.05), DegenerateError);
  CHECK_THROWS_AS((void)hit_labels({}, 0.05), ValidationError);
  CHECK_THROWS_AS((void)hit_labels(counts_of({1, 2}), 0.0), ValidationError);
  CHECK_THROWS_AS((void)hit_labels(counts_of({1, 2}), 1.0), ValidationError);
}

TEST_CASE("tied counts share a label and the realized rate stays within top_frac") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::uint64_t> c(200 + static_cast<std::size_t>(trial));
    for (auto& v : c) v = rng() % 25;
    c[0] = 40;  // a unique maximum keeps the share attainable
    const HitLabels h = hit_labels(counts_of(c), 0.05);
    CHECK_FALSE(h.tie_warning);
    CHECK(h.realized_rate <= 0.05 + 1e-12);
    for (std::size_t i = 0; i < c.size(); ++i) CHECK(h.labels.at(pid(static_cast<int>(i))) == (c[i] >= h.threshold));
    // the next lower count would overshoot
    std::uint64_t next = 0;
    for (auto v : c) {
      if (v < h.threshold) next = std::max(next, v);
    }
    std::size_t at_or_above = 0;
    for (auto v : c) at_or_above += v >= next ? 1 : 0;
    CHECK(static_cast<double>(at_or_above) > 0.05 * static_cast<double>(c.size()));
  }
}

TEST_CASE("percentile ranks") {
  std::vector<double> x(100);
  std::iota(x.begin(), x.end(), 0.0);
  std::shuffle(x.begin(), x.end(), std::mt19937_64(3));
  const PercentileSeries p = series_of(x);
  for (int i = 0; i < 100; ++i) CHECK(p.percentiles.at(pid(i)) == static_cast<int>(x[static_cast<std::size_t>(i)]) + 1);

  std::vector<double> tied(100, 70.0);
  for (int i = 0; i < 20; ++i) tied[static_cast<std::size_t>(i)] = i;
  const PercentileSeries t = series_of(tied);
  for (int i = 20; i < 100; ++i) CHECK(t.percentiles.at(pid(i)) == 100);
  CHECK(t.percentiles.at(pid(0)) == 1);

  CHECK(series_of({3.5}).percentiles.at(pid(0)) == 100);
}

TEST_CASE("percentiles are invariant under increasing transforms and non-decreasing in the score") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> normal;
  std::vector<double> x(500);
  for (auto& v : x) v = std::round(normal(rng) * 10.0) / 10.0;
  std::vector<double> y(x.size());
  std::transform(x.begin(), x.end(), y.begin(), [](double v) { return std::exp(v) * 3.0 + 1.0; });
  const PercentileSeries a = series_of(x);
  const PercentileSeries b = series_of(y);
  CHECK(a.percentiles == b.percentiles);
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j < x.size(); j += 37) {
      if (x[i] <= x[j]) CHECK(a.percentiles.at(pid(static_cast<int>(i))) <= a.percentiles.at(pid(static_cast<int>(j))));
    }
    CHECK(a.percentiles.at(pid(static_cast<int>(i))) >= 1);
    CHECK(a.percentiles.at(pid(static_cast<int>(i))) <= 100);
  }
}

TEST_CASE("hit curves conserve the base rate") {
  std::mt19937_64 rng(17);
  std::vector<double> x(3000);
  std::vector<int> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = static_cast<double>(rng() % 700);
    y[i] = rng() % 100 < 7 ? 1 : 0;
  }
  const HitLabels h = labels_of(y);
  const auto curve = hit_curve(series_of(x), h);
  double weighted = 0.0;
  std::uint64_t n = 0;
  for (const auto& p : curve) {
    weighted += p.probability * static_cast<double>(p.n);
    n += p.n;
    CHECK(p.n > 0);
  }
  CHECK(n == x.size());
  CHECK(std::abs(weighted / static_cast<double>(n) - h.realized_rate) <= 1e-12);
}

TEST_CASE("labels above the median give zero probability in the lower bins") {
  std::vector<double> x(1000);
  std::iota(x.begin(), x.end(), 0.0);
  std::vector<int> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > 499.5 ? 1 : 0;
  const auto curve = hit_curve(series_of(x), labels_of(y));
  for (const auto& p : curve) {
    if (p.percentile <= 50) CHECK(p.probability == 0.0);
    else CHECK(p.probability == 1.0);
  }
}

TEST_CASE("empty percentile bins are omitted") {
  const auto curve = hit_curve(series_of({1.0, 1.0, 1.0, 2.0}), labels_of({0, 1, 0, 1}));
  REQUIRE(curve.size() == 2);
  CHECK(curve[0].percentile == 75);
  CHECK(curve[0].n == 3);
  CHECK(curve[1].percentile == 100);
}

TEST_CASE("independent labels give flat curves within binomial 3 sigma") {
  // Per bin, |p - base| > 3 sigma has a small binomial tail probability q. Over
  // many shuffles the share of such bins must stay near q.
  const std::size_t n = 10000;
  const double base = 0.05;
  const double sigma = std::sqrt(base * (1.0 - base) / 100.0);
  double q = 0.0;
  for (int k = 0; k <= 100; ++k) {
    if (std::abs(k / 100.0 - base) <= 3.0 * sigma) continue;
    q += std::exp(std::lgamma(101.0) - std::lgamma(k + 1.0) - std::lgamma(101.0 - k) + k * std::log(base) +
                  (100 - k) * std::log(1.0 - base));
  }
  std::size_t bins = 0;
  std::size_t outside = 0;
  double max_z = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    std::mt19937_64 rng(seed);
    std::vector<double> x(n);
    std::vector<int> y(n, 0);
    for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<double>(i);
    for (std::size_t i = 0; i < n / 20; ++i) y[i] = 1;
    std::shuffle(y.begin(), y.end(), rng);
    const HitLabels h = labels_of(y);
    for (const auto& p : hit_curve(series_of(x), h)) {
      CHECK(p.n == 100);
      ++bins;
      outside += std::abs(p.probability - h.realized_rate) > 3.0 * sigma ? 1 : 0;
      max_z = std::max(max_z, std::abs(p.probability - h.realized_rate) / sigma);
    }
  }
  REQUIRE(bins == 2000);
  const double expected = q * static_cast<double>(bins);
  CHECK(static_cast<double>(outside) <= expected + 4.0 * std::sqrt(expected * (1.0 - q)));
  CHECK(max_z < 6.0);
}

TEST_CASE("null deviance closed form") {
  const double p = 0.05;
  const double expected = -2.0 * 17000.0 * (p * std::log(p) + (1.0 - p) * std::log(1.0 - p));
  CHECK(null_deviance(17000, 850) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected == doctest::Approx(6750).epsilon(0.002));

  std::vector<int> y(17000, 0);
  for (std::size_t i = 0; i < 850; ++i) y[i * 20] = 1;
  const LogisticFit fit = fit_logistic({}, y);
  CHECK(fit.converged);
  CHECK(std::abs(fit.residual_deviance - expected) <= 1e-6 * expected);
  CHECK(std::abs(fit.null_deviance - expected) <= 1e-6 * expected);
  CHECK(fit.coefficients[0] == doctest::Approx(std::log(p / (1.0 - p))).epsilon(1e-9));

  std::vector<double> x(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i % 97);
  const LogisticFit poly0 = fit_logistic_poly(series_of(x), labels_of(y), 0);
  CHECK(std::abs(poly0.residual_deviance - expected) <= 1e-6 * expected);
}

TEST_CASE("independent response: deviance drop within chi-square range") {
  std::mt19937_64 rng(77);
  const std::size_t n = 4000;
  std::vector<double> x(n);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = static_cast<double>(rng() % 1000);
    y[i] = rng() % 10 == 0 ? 1 : 0;
  }
  // 99.9% quantiles of chi-square with 1..4 degrees of freedom
  const double quantile[5] = {0.0, 10.828, 13.816, 16.266, 18.467};
  for (int degree = 1; degree <= 4; ++degree) {
    const LogisticFit fit = fit_logistic_poly(series_of(x), labels_of(y), degree);
    CHECK(fit.converged);
    CHECK(fit.residual_deviance <= fit.null_deviance + 1e-9);
    CHECK(fit.null_deviance - fit.residual_deviance <= quantile[degree]);
  }
}

TEST_CASE("symmetric design with balanced labels has a zero odd coefficient") {
  std::vector<double> centered;
  std::vector<int> y;
  for (int k = -10; k <= 10; ++k) {
    const double v = k / 10.0;
    const int hits = 3 + (k * k) % 5;
    for (int r = 0; r < 10; ++r) {
      centered.push_back(v);
      y.push_back(r < hits ? 1 : 0);
    }
  }
  std::vector<double> squared(centered.size());
  std::transform(centered.begin(), centered.end(), squared.begin(), [](double v) { return v * v; });
  const std::vector<std::vector<double>> cols{centered, squared};
  const LogisticFit fit = fit_logistic(cols, y);
  CHECK(fit.converged);
  CHECK(std::abs(fit.coefficients[1]) < 1e-8);
}

TEST_CASE("fitted probabilities average to the hit rate") {
  std::mt19937_64 rng(8);
  std::vector<double> x(2000);
  std::vector<int> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = static_cast<double>(rng() % 1000) / 1000.0;
    y[i] = (static_cast<double>(rng() % 1000) / 1000.0) < 0.02 + 0.2 * x[i] * x[i] ? 1 : 0;
  }
  const double rate = static_cast<double>(std::count(y.begin(), y.end(), 1)) / static_cast<double>(y.size());
  std::vector<std::vector<double>> cols{x};
  for (int degree = 1; degree <= 3; ++degree) {
    const LogisticFit fit = fit_logistic(cols, y);
    CHECK(fit.converged);
    CHECK(std::abs(mean_fitted_probability(fit, cols) - rate) <= 1e-8);
    std::vector<double> next(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) next[i] = std::pow(x[i], degree + 1);
    cols.push_back(next);
  }
}

TEST_CASE("logistic fit errors and separation") {
  const std::vector<double> x{1, 2, 3, 4, 5, 6};
  CHECK_THROWS_AS((void)fit_logistic_poly(series_of(x), labels_of({0, 0, 0, 0, 0, 0}), 1), DegenerateError);
  CHECK_THROWS_AS((void)fit_logistic_poly(series_of(x), labels_of({0, 1, 0, 1, 0, 1}), 5), ValidationError);
  CHECK_THROWS_AS((void)fit_logistic_poly(series_of({1, 1, 2, 2, 1, 2}), labels_of({0, 1, 0, 1, 0, 1}), 1),
                  DegenerateError);
  const LogisticFit sep = fit_logistic_poly(series_of(x), labels_of({0, 0, 0, 1, 1, 1}), 1);
  CHECK(sep.separation);
  CHECK(sep.residual_deviance < 1e-3);
}

TEST_CASE("hierarchical fits: nesting, constant and duplicate columns, driven variable") {
  std::mt19937_64 rng(99);
  const std::size_t n = 3000;
  std::vector<double> v1(n), v2(n), constant(n, 4.0);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    v1[i] = static_cast<double>(rng() % 1000);
    v2[i] = static_cast<double>(rng() % 1000);
    const double p = 1.0 / (1.0 + std::exp(-(-4.0 + 5.0 * v2[i] / 1000.0)));
    y[i] = static_cast<double>(rng() % 100000) / 100000.0 < p ? 1 : 0;
  }
  const HitLabels h = labels_of(y);
  const PercentileSeries s1 = series_of(v1, "v1");
  const PercentileSeries s2 = series_of(v2, "v2");
  const PercentileSeries sc = series_of(constant, "const");

  const std::vector<std::pair<PercentileSeries, int>> order{{s1, 2}, {s2, 2}, {sc, 1}, {s2, 2}};
  const auto fits = hierarchical_fit(order, h);
  REQUIRE(fits.size() == 5);
  CHECK(fits[0].variables.empty());
  CHECK(fits[4].variables.size() == 4);
  for (std::size_t k = 1; k < fits.size(); ++k) CHECK(fits[k].residual_deviance <= fits[k - 1].residual_deviance);
  const double drop_v1 = fits[0].residual_deviance - fits[1].residual_deviance;
  const double drop_v2 = fits[1].residual_deviance - fits[2].residual_deviance;
  CHECK(drop_v2 > 100.0);
  CHECK(drop_v2 > 10.0 * drop_v1);
  CHECK(std::abs(fits[3].residual_deviance - fits[2].residual_deviance) < 1e-6);
  CHECK(fits[3].residual_deviance - fits[4].residual_deviance < 1e-6);
}

TEST_CASE("hierarchical fits use papers present in every series") {
  const std::size_t n = 400;
  std::mt19937_64 rng(4);
  IdMap<double> a, b;
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    a.emplace(pid(static_cast<int>(i)), static_cast<double>(rng() % 100));
    if (i % 4 != 0) b.emplace(pid(static_cast<int>(i)), static_cast<double>(rng() % 100));
    y[i] = rng() % 5 == 0 ? 1 : 0;
  }
  const std::vector<std::pair<PercentileSeries, int>> order{{percentile_rank(a, "a"), 1}, {percentile_rank(b, "b"), 1}};
  const auto fits = hierarchical_fit(order, labels_of(y));
  for (const auto& f : fits) CHECK(f.n == 300);
}

TEST_CASE("mutual information") {
  // exact product table: every bin holds hits in the overall proportion
  std::vector<double> x;
  std::vector<int> y;
  for (int bin = 0; bin < 10; ++bin) {
    for (int r = 0; r < 20; ++r) {
      x.push_back(bin);
      y.push_back(r < 1 ? 1 : 0);
    }
  }
  CHECK(mutual_information(labels_of(y), series_of(x)).mi_bits == 0.0);

  // label determined by the bin with hit rate 0.05
  std::vector<double> xd(1000);
  std::vector<int> yd(1000);
  for (std::size_t i = 0; i < 1000; ++i) {
    xd[i] = static_cast<double>(i);
    yd[i] = i >= 950 ? 1 : 0;
  }
  const double h05 = binary_entropy(0.05);
  CHECK(h05 == doctest::Approx(0.28640).epsilon(1e-4));
  CHECK(std::abs(mutual_information(labels_of(yd), series_of(xd)).mi_bits - h05) < 1e-4);

  // shuffled labels, N = 10^4, 100 bins
  std::mt19937_64 rng(123);
  std::vector<double> xs(10000);
  std::vector<int> ys(10000, 0);
  for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = static_cast<double>(i);
  for (std::size_t i = 0; i < 500; ++i) ys[i] = 1;
  std::shuffle(ys.begin(), ys.end(), rng);
  const HitLabels hs = labels_of(ys);
  const double mi = mutual_information(hs, series_of(xs)).mi_bits;
  CHECK(mi >= 0.0);
  CHECK(mi < 0.02);
  CHECK(mi <= binary_entropy(hs.realized_rate));
}

TEST_CASE("mutual information is symmetric in its arguments") {
  // swapping roles: treat the hit label as the binned variable and the bin as the outcome
  std::mt19937_64 rng(31);
  std::vector<double> x(600);
  std::vector<int> y(600);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = static_cast<double>(rng() % 4);
    y[i] = (rng() % 10) < (x[i] + 1.0) ? 1 : 0;
  }
  const double forward = mutual_information(labels_of(y), series_of(x)).mi_bits;
  // H(Y) - H(Y|X) computed by hand equals H(X) - H(X|Y)
  std::map<std::pair<int, int>, double> joint;
  for (std::size_t i = 0; i < x.size(); ++i) joint[{static_cast<int>(x[i]), y[i]}] += 1.0 / 600.0;
  std::map<int, double> px, py;
  for (const auto& [k, p] : joint) {
    px[k.first] += p;
    py[k.second] += p;
  }
  double hx = 0.0, hxy = 0.0, hy = 0.0;
  for (const auto& [k, p] : px) hx -= p * std::log2(p);
  for (const auto& [k, p] : py) hy -= p * std::log2(p);
  for (const auto& [k, p] : joint) hxy -= p * std::log2(p);
  CHECK(forward == doctest::Approx(hx - (hxy - hy)).epsilon(1e-12));
  CHECK(forward == doctest::Approx(hy - (hxy - hx)).epsilon(1e-12));
  CHECK(forward >= 0.0);
}

TEST_CASE("statistics are invariant under increasing transforms of the score") {
  std::mt19937_64 rng(55);
  std::vector<double> x(1500), tx(1500);
  std::vector<int> y(1500);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = static_cast<double>(rng() % 300) / 30.0;
    tx[i] = std::exp(x[i]) + 2.0;
    y[i] = rng() % 100 < static_cast<unsigned>(2 + x[i]) ? 1 : 0;
  }
  const HitLabels h = labels_of(y);
  const auto a = series_of(x);
  const auto b = series_of(tx);
  const auto ca = hit_curve(a, h);
  const auto cb = hit_curve(b, h);
  REQUIRE(ca.size() == cb.size());
  for (std::size_t i = 0; i < ca.size(); ++i) {
    CHECK(ca[i].percentile == cb[i].percentile);
    CHECK(ca[i].probability == cb[i].probability);
  }
  CHECK(mutual_information(h, a).mi_bits == mutual_information(h, b).mi_bits);
  CHECK(fit_logistic_poly(a, h, 2).residual_deviance == fit_logistic_poly(b, h, 2).residual_deviance);
}
