#include "obsgram/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "obsgram/errors.hpp"
#include "obsgram/matrix_io.hpp"

namespace obsgram {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double singular_threshold(const Eigen::MatrixXd& w) {
  return kPsdTolerance * std::abs(w.trace());
}

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

Eigen::VectorXd symmetric_eigenvalues(const Eigen::MatrixXd& w) {
  if (w.rows() != w.cols()) throw ConfigError("Gramian must be square");
  if (w.size() == 0) return Eigen::VectorXd(0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(w, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

bool is_singular(const Eigen::MatrixXd& w) {
  const Eigen::VectorXd ev = symmetric_eigenvalues(w);
  return ev.size() == 0 || ev[0] <= singular_threshold(w);
}

double unobservability_index(const Eigen::MatrixXd& w) {
  const Eigen::VectorXd ev = symmetric_eigenvalues(w);
  if (ev.size() == 0 || ev[0] <= singular_threshold(w)) return kInf;
  return 1.0 / ev[0];
}

double condition_number(const Eigen::MatrixXd& w) {
  const Eigen::VectorXd ev = symmetric_eigenvalues(w);
  if (ev.size() == 0 || ev[0] <= singular_threshold(w)) return kInf;
  return ev[ev.size() - 1] / ev[0];
}

double det_root(const Eigen::MatrixXd& w) {
  const Eigen::VectorXd ev = symmetric_eigenvalues(w);
  if (ev.size() == 0 || ev[0] <= singular_threshold(w)) return 0.0;
  return std::exp(ev.array().log().mean());
}

double combined_cost(const Eigen::MatrixXd& w, double w_nu) {
  const double kappa = condition_number(w);
  if (!std::isfinite(kappa)) return kInf;
  return w_nu == 0.0 ? kappa : kappa + w_nu * unobservability_index(w);
}

std::string MetricReport::csv_header() {
  return "m,lambda_min,lambda_max,nu,kappa,det_root,w_nu,combined";
}

std::string MetricReport::to_csv_row() const {
  std::string row = std::to_string(m);
  for (double v : {lambda_min, lambda_max, nu, kappa, det_root, w_nu,
                   combined}) {
    row += ',';
    row += format_double(v);
  }
  return row;
}

MetricReport evaluate_metrics(const Eigen::MatrixXd& w, double w_nu) {
  const Eigen::VectorXd ev = symmetric_eigenvalues(w);
  MetricReport r;
  r.m = static_cast<int>(ev.size());
  r.w_nu = w_nu;
  if (ev.size() == 0) return r;
  r.lambda_min = ev[0];
  r.lambda_max = ev[ev.size() - 1];
  const bool singular = ev[0] <= singular_threshold(w);
  r.nu = singular ? kInf : 1.0 / ev[0];
  r.kappa = singular ? kInf : r.lambda_max / r.lambda_min;
  r.det_root = singular ? 0.0 : std::exp(ev.array().log().mean());
  r.combined = singular ? kInf : (w_nu == 0.0 ? r.kappa : r.kappa + w_nu * r.nu);
  return r;
}

double Metric::operator()(const Eigen::MatrixXd& w) const {
  switch (kind) {
    case Kind::kUnobservabilityIndex:
      return unobservability_index(w);
    case Kind::kConditionNumber:
      return condition_number(w);
    case Kind::kCombined:
      return combined_cost(w, w_nu);
    case Kind::kInverseDetRoot: {
      const double d = det_root(w);
      return d > 0.0 ? 1.0 / d : kInf;
    }
  }
  return kInf;
}

std::string Metric::name() const {
  switch (kind) {
    case Kind::kUnobservabilityIndex:
      return "nu";
    case Kind::kConditionNumber:
      return "kappa";
    case Kind::kCombined:
      return "combined(w_nu=" + format_double(w_nu) + ")";
    case Kind::kInverseDetRoot:
      return "inv_det_root";
  }
  return "?";
}

bool MonteCarloCost::infinite() const { return !std::isfinite(mean); }

MonteCarloCost monte_carlo_cost(std::span<const Eigen::MatrixXd> gramians,
                                const Metric& j) {
  std::vector<double> values;
  values.reserve(gramians.size());
  for (const auto& w : gramians) {
    if (w.rows() != gramians.front().rows()) {
      throw ConfigError("Monte Carlo samples differ in dimension");
    }
    values.push_back(j(w));
  }
  return monte_carlo_cost(std::move(values));
}

MonteCarloCost monte_carlo_cost(std::vector<double> samples) {
  if (samples.empty()) throw ConfigError("Monte Carlo cost needs K >= 1");
  MonteCarloCost c;
  c.samples = std::move(samples);
  c.mean = mean(c.samples);
  return c;
}

double mean(std::span<const double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  double sum = 0.0;
  for (double x : v) {
    if (!std::isfinite(x)) return kInf;
    sum += x;
  }
  return sum / static_cast<double>(v.size());
}

double median(std::span<const double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::vector<double> s(v.begin(), v.end());
  std::sort(s.begin(), s.end());
  const std::size_t n = s.size();
  if (n % 2 == 1) return s[n / 2];
  if (!std::isfinite(s[n / 2])) return s[n / 2];
  return 0.5 * (s[n / 2 - 1] + s[n / 2]);
}

double variance(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double mu = mean(v);
  if (!std::isfinite(mu)) return kInf;
  double acc = 0.0;
  for (double x : v) acc += (x - mu) * (x - mu);
  return acc / static_cast<double>(v.size() - 1);
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw ConfigError("correlation needs two equally long series (n >= 2)");
  }
  const double ma = mean(a);
  const double mb = mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ConfigError("series lengths differ");
  const std::vector<double> ra = average_ranks(a);
  const std::vector<double> rb = average_ranks(b);
  return pearson(ra, rb);
}

}  // namespace obsgram
