#include <deflab/error.hpp>
#include <deflab/montecarlo.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>

namespace deflab::mc {

namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

Philox4x32::Philox4x32(std::uint64_t seed, std::uint64_t stream) {
  key_ = {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  counter_ = {0, 0, static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
}

Philox4x32::Block Philox4x32::encrypt(Block ctr, Key key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kW0;
      key[1] += kW1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kM0, ctr[0], hi0, lo0);
    mulhilo(kM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

Philox4x32::result_type Philox4x32::operator()() {
  if (used_ == 4) {
    buffer_ = encrypt(counter_, key_);
    if (++counter_[0] == 0) ++counter_[1];
    used_ = 0;
  }
  return buffer_[static_cast<std::size_t>(used_++)];
}

double Philox4x32::uniform() {
  const std::uint64_t hi = (*this)();
  const std::uint64_t lo = (*this)();
  const std::uint64_t bits = ((hi << 32) | lo) >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double Philox4x32::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double r = std::sqrt(-2.0 * std::log(uniform()));
  const double theta = 2.0 * std::numbers::pi * uniform();
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

double Philox4x32::exponential(double rate) { return -std::log(uniform()) / rate; }

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0;
    for (double x : values) s += x;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Consistent: return "consistent";
    case Verdict::Rejected: return "rejected";
    case Verdict::Insufficient: return "insufficient-sample";
  }
  return "?";
}

MartingaleTest martingale_test(std::string quantity, std::span<const double> samples, double target,
                               double threshold, double allowance) {
  MartingaleTest t;
  t.quantity = std::move(quantity);
  t.target = target;
  t.threshold = threshold;
  t.allowance = allowance;
  t.paths = samples.size();
  if (samples.empty()) return t;
  const double n = static_cast<double>(samples.size());
  t.mean = pairwise_sum(samples) / n;
  if (samples.size() > 1) {
    std::vector<double> sq(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) sq[i] = (samples[i] - t.mean) * (samples[i] - t.mean);
    t.se = std::sqrt(pairwise_sum(sq) / (n - 1) / n);
  }
  const double dev = t.mean - target;
  if (t.se > 0) {
    t.z = dev / t.se;
  } else {
    t.z = dev == 0 ? 0 : std::copysign(std::numeric_limits<double>::infinity(), dev);
  }
  if (t.paths < kMinPaths) {
    t.verdict = Verdict::Insufficient;
  } else {
    t.verdict = std::abs(dev) <= threshold * t.se + allowance ? Verdict::Consistent : Verdict::Rejected;
  }
  return t;
}

PathBatch run_paths(std::uint64_t seed, std::vector<std::string> columns, std::size_t paths, unsigned threads,
                    const std::function<void(std::size_t, std::span<double>)>& f) {
  PathBatch batch;
  batch.seed = seed;
  const std::size_t width = columns.size();
  batch.columns = std::move(columns);
  batch.values.assign(width, std::vector<double>(paths));
  auto work = [&](std::size_t first, std::size_t last) {
    std::vector<double> row(width);
    for (std::size_t p = first; p < last; ++p) {
      f(p, row);
      for (std::size_t c = 0; c < width; ++c) batch.values[c][p] = row[c];
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(paths, 1));
  if (workers == 1) {
    work(0, paths);
    return batch;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (paths + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t first = w * chunk;
    const std::size_t last = std::min(paths, first + chunk);
    if (first >= last) break;
    pool.emplace_back(work, first, last);
  }
  for (auto& t : pool) t.join();
  return batch;
}

void DiffusionScenario::validate() const {
  if (!(sigma > 0)) throw ValidationError("diffusion: sigma must be > 0");
  if (steps < 1) throw ValidationError("diffusion: steps must be >= 1");
  if (!(horizon > 0)) throw ValidationError("diffusion: horizon must be > 0");
  if (!std::isfinite(mu) || !std::isfinite(s0)) throw ValidationError("diffusion: mu and s0 must be finite");
  if (pi.empty()) throw ValidationError("diffusion: strategy needs at least one piece");
  for (double x : pi) {
    if (!std::isfinite(x)) throw ValidationError("diffusion: strategy must be bounded");
  }
}

DiffusionResult simulate_deflated_wealth(const DiffusionScenario& sc, const RunOptions& opt) {
  sc.validate();
  const int m = sc.steps;
  const double dt = sc.horizon / m;
  const double sqdt = std::sqrt(dt);
  const double theta = sc.mu / sc.sigma;  // lambda * sigma, the drift per unit of W
  auto path = [&](std::size_t p, std::span<double> row) {
    Philox4x32 rng(sc.seed, p);
    double w = 0;
    double wealth = 1;
    for (int i = 0; i < m; ++i) {
      const double dw = sqdt * rng.normal();
      const double ds = sc.mu * dt + sc.sigma * dw;
      const std::size_t piece = static_cast<std::size_t>(i) * sc.pi.size() / static_cast<std::size_t>(m);
      wealth *= 1 + sc.pi[piece] * ds;
      w += dw;
    }
    const double z = std::exp(-theta * w - 0.5 * theta * theta * sc.horizon);
    const double s = sc.s0 + sc.mu * sc.horizon + sc.sigma * w;
    row[0] = z;
    row[1] = z * s;
    row[2] = z * wealth;
  };
  DiffusionResult r;
  r.lambda = sc.lambda();
  r.batch = run_paths(sc.seed, {"Z_T", "Z_T*S_T", "Z_T*W_T"}, sc.paths, opt.threads, path);
  const double allowance = 2.0 / m;
  r.density = martingale_test("E[Z_T]", r.batch.values[0], 1, opt.threshold);
  r.price = martingale_test("E[Z_T S_T]", r.batch.values[1], sc.s0, opt.threshold, allowance);
  r.wealth = martingale_test("E[Z_T W_T]", r.batch.values[2], 1, opt.threshold, allowance);
  return r;
}

void LevyScenario::validate() const {
  if (!(a > std::abs(b))) throw ValidationError("levy: requires a > |b|");
  if (steps < 1) throw ValidationError("levy: steps must be >= 1");
}

namespace {

// Arrival count of a unit-rate Poisson process on [0, t].
int poisson_count(Philox4x32& rng, double t) {
  int n = 0;
  for (double s = rng.exponential(1); s <= t; s += rng.exponential(1)) ++n;
  return n;
}

}  // namespace

LevyResult simulate_levy_counterexample(const LevyScenario& sc, const RunOptions& opt) {
  sc.validate();
  auto path = [&](std::size_t p, std::span<double> row) {
    Philox4x32 rng(sc.seed, p);
    const double tau = rng.exponential(sc.a);
    const bool dies = tau <= 1;
    const double end = dies ? tau : 1.0;
    const int up = poisson_count(rng, end);
    const int down = poisson_count(rng, end);
    const double stopped = sc.b * end + up - down;
    row[0] = stopped;
    row[1] = stopped - (dies ? sc.b / sc.a : 0.0);
  };
  LevyResult r;
  r.analytic_bias = sc.b * (1 - std::exp(-sc.a)) / sc.a;
  r.batch = run_paths(sc.seed, {"L^{T-}_1", "corrected_1"}, sc.paths, opt.threads, path);
  r.raw = martingale_test("E_Q[L^{T-}_1]", r.batch.values[0], 0, opt.threshold);
  r.raw_bias = martingale_test("E_Q[L^{T-}_1] - bias", r.batch.values[0], r.analytic_bias, opt.threshold);
  r.corrected = martingale_test("E_Q[corrected_1]", r.batch.values[1], 0, opt.threshold);
  return r;
}

SurvivalResult simulate_survival_measure(const LevyScenario& sc, const std::vector<double>& pi,
                                         const RunOptions& opt) {
  sc.validate();
  if (pi.empty()) throw ValidationError("survival: strategy needs at least one piece");
  for (double x : pi) {
    if (!(std::abs(x) <= 1)) throw ValidationError("strategy is not 1-admissible: |pi| > 1");
  }
  double integral = 0;
  for (double x : pi) integral += x;
  integral /= static_cast<double>(pi.size());
  const double drift_growth = std::exp(sc.b * integral);
  const double z1 = std::exp(-sc.a);
  auto holding = [&](double t) {
    const auto piece = std::min(pi.size() - 1, static_cast<std::size_t>(t * static_cast<double>(pi.size())));
    return pi[piece];
  };
  auto path = [&](std::size_t p, std::span<double> row) {
    Philox4x32 rng(sc.seed, p);
    double wealth = drift_growth;
    for (double s = rng.exponential(1); s <= 1; s += rng.exponential(1)) wealth *= 1 + holding(s);
    for (double s = rng.exponential(1); s <= 1; s += rng.exponential(1)) wealth *= 1 - holding(s);
    row[0] = z1 * wealth - 1;
  };
  SurvivalResult r;
  r.analytic_gap = z1 * drift_growth - 1;
  r.batch = run_paths(sc.seed, {"Z_1*W_1-1"}, sc.paths, opt.threads, path);
  r.gap = martingale_test("E[Z_1 W_1] - 1", r.batch.values[0], 0, opt.threshold);
  r.supermartingale = r.gap.paths >= kMinPaths && r.gap.mean <= opt.threshold * r.gap.se;
  r.strictly_negative = r.gap.paths >= kMinPaths && r.gap.mean + opt.threshold * r.gap.se < 0;
  return r;
}

void InsiderScenario::validate() const {
  if (steps < 2) throw ValidationError("insider: steps must be >= 2");
  if (!(horizon < 1)) throw ValidationError("insider: information drift is singular at s = 1; horizon must be < 1");
  if (horizon < 0) throw ValidationError("insider: horizon must be >= 0");
  if (horizon > 1 - 1.0 / steps) throw ValidationError("insider: horizon must be <= 1 - 1/steps");
}

InsiderResult information_drift_deflator(const InsiderScenario& sc, const RunOptions& opt) {
  sc.validate();
  const int m = sc.steps;
  const double dt = 1.0 / m;
  const double sqdt = std::sqrt(dt);
  const int k = static_cast<int>(std::lround(sc.horizon * m));
  const double t = static_cast<double>(k) * dt;
  auto path = [&](std::size_t p, std::span<double> row) {
    Philox4x32 rng(sc.seed, p);
    std::vector<double> dw(static_cast<std::size_t>(m));
    double w1 = 0;
    for (auto& x : dw) {
      x = sqdt * rng.normal();
      w1 += x;
    }
    double w = 0;
    double log_z = 0;
    for (int i = 0; i < k; ++i) {
      const double s = i * dt;
      const double alpha = sc.zero_drift ? 0.0 : (w1 - w) / (1 - s);
      const double step = dw[static_cast<std::size_t>(i)];
      log_z += -alpha * step + 0.5 * alpha * alpha * dt;
      w += step;
    }
    const double z = std::exp(log_z);
    row[0] = z;
    row[1] = z * w;
    if (sc.zero_drift) {
      row[2] = 1;
    } else {
      const double rest = w1 - w;
      row[2] = std::sqrt(1 - t) * std::exp(-0.5 * w1 * w1 + 0.5 * rest * rest / (1 - t));
    }
  };
  InsiderResult r;
  r.allowance = 2.0 / m;
  r.batch = run_paths(sc.seed, {"Z_t", "Z_t*W_t", "Z_t_exact"}, sc.paths, opt.threads, path);
  r.density = martingale_test("E[Z_t]", r.batch.values[0], 1, opt.threshold, r.allowance);
  r.deflated = martingale_test("E[Z_t W_t]", r.batch.values[1], 0, opt.threshold, r.allowance);
  r.exact_density = martingale_test("E[Z_t exact]", r.batch.values[2], 1, opt.threshold);
  return r;
}

}  // namespace deflab::mc
