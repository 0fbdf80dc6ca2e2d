#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace deflab::mc {

/// Philox4x32-10 counter-based generator. The key is the run seed and the
/// upper counter half is the stream (path) id, so every path owns an
/// independent, reproducible sub-stream.
class Philox4x32 {
 public:
  using result_type = std::uint32_t;
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  Philox4x32(std::uint64_t seed, std::uint64_t stream);

  static Block encrypt(Block counter, Key key);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform();
  double normal();
  double exponential(double rate);

 private:
  Key key_{};
  Block counter_{};
  Block buffer_{};
  int used_ = 4;
  bool has_spare_ = false;
  double spare_ = 0;
};

inline constexpr const char* kGenerator = "philox4x32-10";

/// Sum in a fixed pairwise order; the result does not depend on how the
/// inputs were produced.
double pairwise_sum(std::span<const double> values);

enum class Verdict { Consistent, Rejected, Insufficient };
std::string to_string(Verdict v);

inline constexpr std::size_t kMinPaths = 100;

struct MartingaleTest {
  std::string quantity;
  double mean = 0;
  double se = 0;
  double z = 0;  // (mean - target) / se
  double target = 0;
  double threshold = 3;   // z critical value
  double allowance = 0;   // added to threshold * se
  std::size_t paths = 0;
  Verdict verdict = Verdict::Insufficient;

  bool consistent() const { return verdict == Verdict::Consistent; }
  bool rejected() const { return verdict == Verdict::Rejected; }
};

/// Consistent when |mean - target| <= threshold * se + allowance.
MartingaleTest martingale_test(std::string quantity, std::span<const double> samples, double target,
                               double threshold = 3, double allowance = 0);

struct RunOptions {
  unsigned threads = 1;
  double threshold = 3;
};

/// Terminal per-path values, one column per named quantity.
struct PathBatch {
  std::uint64_t seed = 0;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> values;  // [column][path]
};

/// Runs f(path, row) for every path on `threads` workers; row has `width`
/// slots. Output does not depend on the thread count.
PathBatch run_paths(std::uint64_t seed, std::vector<std::string> columns, std::size_t paths, unsigned threads,
                    const std::function<void(std::size_t, std::span<double>)>& f);

struct DiffusionScenario {
  double mu = 0.2;
  double sigma = 1;
  double s0 = 1;
  double horizon = 1;
  int steps = 512;
  std::size_t paths = 100000;
  std::uint64_t seed = 20240601;
  std::vector<double> pi{1.0};  // fraction of wealth, piecewise constant on equal pieces of [0, horizon]

  double lambda() const { return mu / (sigma * sigma); }
  void validate() const;
};

struct DiffusionResult {
  double lambda = 0;
  MartingaleTest density;  // E[Z_T] against 1
  MartingaleTest price;    // E[Z_T S_T] against S_0
  MartingaleTest wealth;   // E[Z_T W_T] against W_0 = 1
  PathBatch batch;
};

/// S = s0 + mu t + sigma W, Z = exp(-lambda M - lambda^2 <M> / 2) with
/// M = sigma W, W^pi the Euler product of (1 + pi dS).
DiffusionResult simulate_deflated_wealth(const DiffusionScenario& sc, const RunOptions& opt = {});

struct LevyScenario {
  double a = 2;
  double b = 1;
  int steps = 512;
  std::size_t paths = 100000;
  std::uint64_t seed = 20240601;

  void validate() const;
};

struct LevyResult {
  double analytic_bias = 0;  // b (1 - e^{-a}) / a
  MartingaleTest raw;        // L^{T-}_1 against 0
  MartingaleTest raw_bias;   // L^{T-}_1 against the analytic bias
  MartingaleTest corrected;  // L^{T-}_1 - (b / a) 1{T <= 1} against 0
  PathBatch batch;
};

/// Exact simulation under Q: L = N1 - N2 + b t with unit-rate Poisson N1, N2
/// and an independent T ~ Exp(a) truncated at 1.
LevyResult simulate_levy_counterexample(const LevyScenario& sc, const RunOptions& opt = {});

struct SurvivalResult {
  double analytic_gap = 0;  // e^{-a} exp(b int pi) - 1
  MartingaleTest gap;       // Z_1 W_1 - 1 against 0
  bool supermartingale = false;    // mean <= threshold * se
  bool strictly_negative = false;  // mean + threshold * se < 0, or a deterministic negative gap
  PathBatch batch;
};

/// Under P (L without death), Z_t = e^{-a t} and W^pi with |pi| <= 1 on the
/// step grid of [0, 1]. Throws ValidationError for |pi| > 1.
SurvivalResult simulate_survival_measure(const LevyScenario& sc, const std::vector<double>& pi,
                                         const RunOptions& opt = {});

struct InsiderScenario {
  double horizon = 0.5;
  int steps = 1024;  // grid on [0, 1]
  std::size_t paths = 100000;
  std::uint64_t seed = 20240601;
  bool zero_drift = false;  // force alpha = 0

  void validate() const;
};

struct InsiderResult {
  double allowance = 0;
  MartingaleTest density;       // E[Z_t] against 1
  MartingaleTest deflated;      // E[Z_t W_t] against 0
  MartingaleTest exact_density; // the closed-form bridge density ratio, against 1
  PathBatch batch;
};

/// W a Brownian motion, G_t = F_t v sigma(W_1), alpha_s = (W_1 - W_s) / (1 - s)
/// and Z_t = exp(-int alpha dM - int alpha^2 ds / 2) with dM = dW - alpha ds.
InsiderResult information_drift_deflator(const InsiderScenario& sc, const RunOptions& opt = {});

}  // namespace deflab::mc
