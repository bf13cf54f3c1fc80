#include "sdngame/stats.h"

#include <charconv>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <vector>

namespace sdngame::stats {

namespace {

// Modified Lentz evaluation of the incomplete beta continued fraction.
double BetaContinuedFraction(double a, double b, double x) {
  constexpr int kMaxIterations = 10000;
  constexpr double kEpsilon = 1e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEpsilon) break;
  }
  return h;
}

// P(|T| > |t|) for T ~ Student(df).
double TwoTailProbability(double t, double df) {
  return RegularizedIncompleteBeta(df / 2.0, 0.5, df / (df + t * t));
}

void RequirePairs(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw StatsError("samples differ in length");
  if (xs.size() < 2) throw StatsError("need at least two observations per sample");
}

void FillCriticalValues(TTestReport& r) {
  r.t_critical_one_tail = InverseStudentT(1.0 - r.alpha, r.df);
  r.t_critical_two_tail = InverseStudentT(1.0 - r.alpha / 2.0, r.df);
}

}  // namespace

double RegularizedIncompleteBeta(double a, double b, double x) {
  if (a <= 0.0 || b <= 0.0) throw StatsError("incomplete beta needs a, b > 0");
  if (x < 0.0 || x > 1.0) throw StatsError("incomplete beta needs 0 <= x <= 1");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * BetaContinuedFraction(a, b, x) / a;
  return 1.0 - front * BetaContinuedFraction(b, a, 1.0 - x) / b;
}

double StudentTCdf(double t, double df) {
  if (!(df > 0.0)) throw StatsError("degrees of freedom must be positive");
  if (t == 0.0) return 0.5;
  const double tail = 0.5 * TwoTailProbability(t, df);
  return t > 0.0 ? 1.0 - tail : tail;
}

double InverseStudentT(double p, double df) {
  if (!(p > 0.0 && p < 1.0)) throw StatsError("probability must lie in (0, 1)");
  if (p == 0.5) return 0.0;
  double lo = -1.0;
  double hi = 1.0;
  while (StudentTCdf(lo, df) > p) lo *= 2.0;
  while (StudentTCdf(hi, df) < p) hi *= 2.0;
  for (int i = 0; i < 400 && hi - lo > 1e-12; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (StudentTCdf(mid, df) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double Mean(std::span<const double> xs) {
  if (xs.empty()) throw StatsError("mean of an empty sample");
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

double SampleVariance(std::span<const double> xs) {
  if (xs.size() < 2) throw StatsError("variance needs at least two observations");
  const double m = Mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return ss / static_cast<double>(xs.size() - 1);
}

double PearsonCorrelation(std::span<const double> xs, std::span<const double> ys) {
  RequirePairs(xs, ys);
  const double mx = Mean(xs);
  const double my = Mean(ys);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / std::sqrt(sxx * syy);
}

TTestReport PairedTTest(std::span<const double> xs, std::span<const double> ys, double alpha) {
  RequirePairs(xs, ys);
  if (!(alpha > 0.0 && alpha < 1.0)) throw StatsError("alpha must lie in (0, 1)");
  TTestReport r;
  r.mode = TTestMode::kPaired;
  r.alpha = alpha;
  r.mean_x = Mean(xs);
  r.mean_y = Mean(ys);
  r.variance_x = SampleVariance(xs);
  r.variance_y = SampleVariance(ys);
  r.n_x = r.n_y = static_cast<int>(xs.size());
  r.pearson = PearsonCorrelation(xs, ys);
  r.df = static_cast<double>(xs.size() - 1);

  std::vector<double> diffs(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) diffs[i] = xs[i] - ys[i];
  const double mean_d = Mean(diffs);
  const double var_d = SampleVariance(diffs);
  if (var_d == 0.0) {
    if (mean_d != 0.0) throw StatsError("differences have zero variance and non-zero mean");
    r.t_stat = 0.0;
    r.p_two_tail = 1.0;
    r.p_one_tail = 0.5;
  } else {
    r.t_stat = mean_d / std::sqrt(var_d / static_cast<double>(xs.size()));
    r.p_two_tail = TwoTailProbability(r.t_stat, r.df);
    r.p_one_tail = 0.5 * r.p_two_tail;
  }
  FillCriticalValues(r);
  return r;
}

TTestReport UnpairedTTest(std::span<const double> xs, std::span<const double> ys,
                          double alpha) {
  if (xs.size() < 2 || ys.size() < 2) throw StatsError("need at least two observations per sample");
  if (!(alpha > 0.0 && alpha < 1.0)) throw StatsError("alpha must lie in (0, 1)");
  TTestReport r;
  r.mode = TTestMode::kUnpaired;
  r.alpha = alpha;
  r.mean_x = Mean(xs);
  r.mean_y = Mean(ys);
  r.variance_x = SampleVariance(xs);
  r.variance_y = SampleVariance(ys);
  r.n_x = static_cast<int>(xs.size());
  r.n_y = static_cast<int>(ys.size());
  r.pearson = xs.size() == ys.size() ? PearsonCorrelation(xs, ys)
                                     : std::numeric_limits<double>::quiet_NaN();
  r.df = static_cast<double>(r.n_x + r.n_y - 2);
  r.pooled_variance = ((r.n_x - 1) * r.variance_x + (r.n_y - 1) * r.variance_y) / r.df;
  const double se = std::sqrt(r.pooled_variance * (1.0 / r.n_x + 1.0 / r.n_y));
  const double diff = r.mean_x - r.mean_y;
  if (se == 0.0) {
    if (diff != 0.0) throw StatsError("samples have zero variance and different means");
    r.t_stat = 0.0;
    r.p_two_tail = 1.0;
    r.p_one_tail = 0.5;
  } else {
    r.t_stat = diff / se;
    r.p_two_tail = TwoTailProbability(r.t_stat, r.df);
    r.p_one_tail = 0.5 * r.p_two_tail;
  }
  FillCriticalValues(r);
  return r;
}

std::string FormatNumber(double value) {
  if (std::isnan(value)) return "nan";
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, result.ptr);
}

std::string RenderText(const TTestReport& r, const std::string& label_x,
                       const std::string& label_y) {
  std::ostringstream out;
  out << (r.mode == TTestMode::kPaired ? "t-Test: Paired Two Sample for Means\n"
                                       : "t-Test: Two-Sample Assuming Equal Variances\n");
  auto row = [&](const std::string& name, const std::string& x, const std::string& y = "") {
    out << std::left << std::setw(30) << name << std::setw(24) << x << y << "\n";
  };
  row("", label_x, label_y);
  row("Mean", FormatNumber(r.mean_x), FormatNumber(r.mean_y));
  row("Variance", FormatNumber(r.variance_x), FormatNumber(r.variance_y));
  row("Observations", std::to_string(r.n_x), std::to_string(r.n_y));
  if (r.mode == TTestMode::kPaired) {
    row("Pearson Correlation", FormatNumber(r.pearson));
  } else {
    row("Pooled Variance", FormatNumber(r.pooled_variance));
  }
  row("Hypothesized Mean Difference", FormatNumber(r.hypothesized_mean_difference));
  row("df", FormatNumber(r.df));
  row("t Stat", FormatNumber(r.t_stat));
  row("P(T<=t) one-tail", FormatNumber(r.p_one_tail));
  row("t Critical one-tail", FormatNumber(r.t_critical_one_tail));
  row("P(T<=t) two-tail", FormatNumber(r.p_two_tail));
  row("t Critical two-tail", FormatNumber(r.t_critical_two_tail));
  row("alpha", FormatNumber(r.alpha));
  out << "significant at alpha: " << (r.p_two_tail < r.alpha ? "yes" : "no") << "\n";
  return out.str();
}

std::string RenderCsv(const TTestReport& r, const std::string& label_x,
                      const std::string& label_y) {
  std::ostringstream out;
  out << "field," << label_x << "," << label_y << "\n";
  out << "mode," << (r.mode == TTestMode::kPaired ? "paired" : "unpaired") << ",\n";
  out << "mean," << FormatNumber(r.mean_x) << "," << FormatNumber(r.mean_y) << "\n";
  out << "variance," << FormatNumber(r.variance_x) << "," << FormatNumber(r.variance_y) << "\n";
  out << "observations," << r.n_x << "," << r.n_y << "\n";
  out << "pearson_correlation," << FormatNumber(r.pearson) << ",\n";
  out << "pooled_variance," << FormatNumber(r.pooled_variance) << ",\n";
  out << "hypothesized_mean_difference," << FormatNumber(r.hypothesized_mean_difference) << ",\n";
  out << "df," << FormatNumber(r.df) << ",\n";
  out << "t_stat," << FormatNumber(r.t_stat) << ",\n";
  out << "p_one_tail," << FormatNumber(r.p_one_tail) << ",\n";
  out << "t_critical_one_tail," << FormatNumber(r.t_critical_one_tail) << ",\n";
  out << "p_two_tail," << FormatNumber(r.p_two_tail) << ",\n";
  out << "t_critical_two_tail," << FormatNumber(r.t_critical_two_tail) << ",\n";
  out << "alpha," << FormatNumber(r.alpha) << ",\n";
  return out.str();
}

}  // namespace sdngame::stats
