#ifndef SDNGAME_STATS_H_
#define SDNGAME_STATS_H_

#include <span>
#include <stdexcept>
#include <string>

namespace sdngame::stats {

class StatsError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// I_x(a, b), continued-fraction evaluation.
double RegularizedIncompleteBeta(double a, double b, double x);

double StudentTCdf(double t, double df);

// Bisection on StudentTCdf until the bracket is narrower than 1e-12.
double InverseStudentT(double p, double df);

double Mean(std::span<const double> xs);
double SampleVariance(std::span<const double> xs);
double PearsonCorrelation(std::span<const double> xs, std::span<const double> ys);

enum class TTestMode { kPaired, kUnpaired };

struct TTestReport {
  TTestMode mode = TTestMode::kPaired;
  double mean_x = 0.0;
  double mean_y = 0.0;
  double variance_x = 0.0;
  double variance_y = 0.0;
  int n_x = 0;
  int n_y = 0;
  double pearson = 0.0;  // NaN when undefined
  double pooled_variance = 0.0;  // unpaired only
  double hypothesized_mean_difference = 0.0;
  double df = 0.0;
  double t_stat = 0.0;
  double p_one_tail = 0.0;
  double t_critical_one_tail = 0.0;
  double p_two_tail = 0.0;
  double t_critical_two_tail = 0.0;
  double alpha = 0.05;
};

// Paired two-tailed Student t-test on xs - ys. Throws StatsError on length
// mismatch, fewer than two pairs, or zero-variance differences with a
// non-zero mean; identical samples give t = 0, p = 1.
TTestReport PairedTTest(std::span<const double> xs, std::span<const double> ys,
                        double alpha = 0.05);

// Equal-variance (pooled) two-sample t-test.
TTestReport UnpairedTTest(std::span<const double> xs, std::span<const double> ys,
                          double alpha = 0.05);

std::string RenderText(const TTestReport& report, const std::string& label_x,
                       const std::string& label_y);
std::string RenderCsv(const TTestReport& report, const std::string& label_x,
                      const std::string& label_y);

// Shortest round-trip decimal representation.
std::string FormatNumber(double value);

}  // namespace sdngame::stats

#endif  // SDNGAME_STATS_H_
