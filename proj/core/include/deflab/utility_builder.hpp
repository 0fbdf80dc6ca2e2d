#pragma once

#include <deflab/arbitrage.hpp>
#include <deflab/rational.hpp>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace deflab {

/// Integer bounds [lo, hi] on 2^bits * x.
struct Enclosure {
  mpz_class lo;
  mpz_class hi;
};

/// Enclosure of a nonnegative rational at scale 2^bits.
Enclosure enclose(const Rational& x, unsigned bits);

/// A nonincreasing tail F(k), k >= 0, with values in [0, 1].
class Tail {
 public:
  virtual ~Tail() = default;

  virtual Rational at(long k) const = 0;

  /// Enclosure of F(k); the default rounds at(k).
  virtual Enclosure term(long k, unsigned bits) const;

  /// Enclosure of F(0) + ... + F(count - 1) when a closed form is known.
  virtual std::optional<Enclosure> prefix(long count, unsigned bits) const;

  virtual std::string describe() const = 0;
};

/// F(k) = ratio^k with 0 <= ratio < 1.
class GeometricTail : public Tail {
 public:
  explicit GeometricTail(Rational ratio);
  Rational at(long k) const override;
  Enclosure term(long k, unsigned bits) const override;
  std::optional<Enclosure> prefix(long count, unsigned bits) const override;
  std::string describe() const override;

 private:
  Rational ratio_;
};

/// F(k) = head[k] for k < head.size(), zero afterwards.
class FiniteTail : public Tail {
 public:
  explicit FiniteTail(RationalVector head);
  Rational at(long k) const override;
  std::optional<Enclosure> prefix(long count, unsigned bits) const override;
  std::string describe() const override;

 private:
  RationalVector head_;
  RationalVector cumulative_;
};

/// Arbitrary exact tail; prefix sums are accumulated term by term.
class FunctionTail : public Tail {
 public:
  FunctionTail(std::function<Rational(long)> f, std::string description);
  Rational at(long k) const override { return f_(k); }
  std::string describe() const override { return description_; }

 private:
  std::function<Rational(long)> f_;
  std::string description_;
};

struct UtilityBuilderOptions {
  long num_g = 10000;          // K: number of slopes g_1..g_K to emit
  long n_sum = 1000000;        // truncation of g_k = sum_{n >= n_k} 1/(n K_n)
  unsigned bits = 128;         // fixed-point resolution of the enclosures
  long probe_limit = 1L << 27; // largest cut level tried before giving up
  long monotone_check = 4096;  // F is checked exactly on 0..monotone_check
  long basel_terms = 1000;     // M in the rational lower bound of pi^2/6
};

struct UtilityBuilderResult {
  UtilityBuilderOptions options;
  std::string tail;

  std::vector<long> cut_levels;   // K_n for n = 1..n_sum (entry n - 1)
  std::vector<long> first_index;  // n_k for k = 1..num_g (entry k - 1)
  RationalVector g_lower;         // certified lower bounds of g_k
  RationalVector g_upper;         // certified upper bounds of g_k, remainder included
  Rational remainder_bound;       // sum over n > n_sum of 1/(n K_n) <= 1/n_sum

  RationalVector utility_samples;  // U(0..num_g) with slopes g_lower

  Rational sum_g_lower;         // <= sum_{k <= K} g_k
  long harmonic_index = 0;      // n* = max{n : K_n <= K}
  Rational harmonic_bound;      // H(n*)
  bool divergence_certified = false;

  Rational weighted_sum_upper;  // >= sum_{k <= K} g_k F(k - 1)
  Rational basel_lower;         // rational number strictly below pi^2 / 6
  bool tail_sum_certified = false;

  PiecewiseLinearUtility utility() const;
};

/// Concave utility with sum g_k F(k-1) finite and sum g_k divergent, built
/// from cut levels K_n with (1/K_n) sum_{k <= K_n} F(k-1) <= 1/n.
///
/// Throws ValidationError when F is not a nonincreasing [0,1]-valued tail
/// and Error("cannot certify Cesaro bound ...") when no cut level is found
/// below probe_limit.
UtilityBuilderResult build_utility(const Tail& tail, const UtilityBuilderOptions& options = {});

/// 1 + 1/2 + ... + 1/n.
Rational harmonic_number(long n);

/// sum_{n <= m} 1/n^2 + 1/(m + 1), which is strictly below pi^2 / 6.
Rational basel_lower_bound(long m);

}  // namespace deflab
