#include <deflab/error.hpp>
#include <deflab/utility_builder.hpp>

#include <algorithm>
#include <cmath>

namespace deflab {

namespace {

mpz_class scale(unsigned bits) {
  mpz_class d = 1;
  d <<= bits;
  return d;
}

mpz_class mul_floor(const mpz_class& a, const mpz_class& b, unsigned bits) {
  mpz_class r = a * b;
  r >>= bits;
  return r;
}

mpz_class mul_ceil(const mpz_class& a, const mpz_class& b, unsigned bits) {
  mpz_class r = a * b;
  mpz_class q;
  mpz_cdiv_q_2exp(q.get_mpz_t(), r.get_mpz_t(), bits);
  return q;
}

mpz_class ceil_div(const mpz_class& a, const mpz_class& b) {
  mpz_class q;
  mpz_cdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return q;
}

mpz_class floor_div(const mpz_class& a, const mpz_class& b) {
  mpz_class q;
  mpz_fdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return q;
}

Rational dyadic(const mpz_class& numerator, unsigned extra_bits) {
  Rational r{numerator, scale(extra_bits)};
  r.canonicalize();
  return r;
}

}  // namespace

Enclosure enclose(const Rational& x, unsigned bits) {
  if (x < 0) throw ValidationError("enclose: negative value");
  mpz_class num = x.get_num();
  num <<= bits;
  return {floor_div(num, x.get_den()), ceil_div(num, x.get_den())};
}

Enclosure Tail::term(long k, unsigned bits) const { return enclose(at(k), bits); }

std::optional<Enclosure> Tail::prefix(long, unsigned) const { return std::nullopt; }

// ------------------------------------------------------------ GeometricTail

GeometricTail::GeometricTail(Rational ratio) : ratio_(std::move(ratio)) {
  if (ratio_ < 0 || ratio_ >= 1) throw ValidationError("geometric tail needs 0 <= ratio < 1");
}

Rational GeometricTail::at(long k) const {
  if (k < 0) throw ValidationError("tail index must be nonnegative");
  Rational r;
  mpz_pow_ui(r.get_num_mpz_t(), ratio_.get_num_mpz_t(), static_cast<unsigned long>(k));
  mpz_pow_ui(r.get_den_mpz_t(), ratio_.get_den_mpz_t(), static_cast<unsigned long>(k));
  return r;
}

Enclosure GeometricTail::term(long k, unsigned bits) const {
  const mpz_class one = scale(bits);
  Enclosure result{one, one};
  if (k == 0) return result;
  if (ratio_ == 0) return {0, 0};
  const double log_inv = -std::log2(ratio_.get_d());
  if (static_cast<double>(k) * log_inv > static_cast<double>(bits) + 8.0) return {0, 1};
  Enclosure base = enclose(ratio_, bits);
  auto e = static_cast<unsigned long>(k);
  while (e > 0) {
    if (e & 1UL) {
      result.lo = mul_floor(result.lo, base.lo, bits);
      result.hi = mul_ceil(result.hi, base.hi, bits);
    }
    e >>= 1;
    if (e > 0) {
      base.lo = mul_floor(base.lo, base.lo, bits);
      base.hi = mul_ceil(base.hi, base.hi, bits);
    }
  }
  return result;
}

std::optional<Enclosure> GeometricTail::prefix(long count, unsigned bits) const {
  // sum_{j < count} r^j = (1 - r^count) / (1 - r)
  const mpz_class one = scale(bits);
  const Enclosure power = term(count, bits);
  const mpz_class p = ratio_.get_num();
  const mpz_class q = ratio_.get_den();
  const mpz_class gap = q - p;
  return Enclosure{floor_div((one - power.hi) * q, gap), ceil_div((one - power.lo) * q, gap)};
}

std::string GeometricTail::describe() const { return "geometric(" + format_rational(ratio_) + ")"; }

// --------------------------------------------------------------- FiniteTail

FiniteTail::FiniteTail(RationalVector head) : head_(std::move(head)) {
  cumulative_.reserve(head_.size() + 1);
  cumulative_.emplace_back(0);
  for (const auto& v : head_) cumulative_.push_back(cumulative_.back() + v);
}

Rational FiniteTail::at(long k) const {
  if (k < 0) throw ValidationError("tail index must be nonnegative");
  return static_cast<std::size_t>(k) < head_.size() ? head_[static_cast<std::size_t>(k)] : Rational(0);
}

std::optional<Enclosure> FiniteTail::prefix(long count, unsigned bits) const {
  const auto idx = std::min(static_cast<std::size_t>(std::max(count, 0L)), head_.size());
  return enclose(cumulative_[idx], bits);
}

std::string FiniteTail::describe() const { return "finite(" + std::to_string(head_.size()) + " terms)"; }

FunctionTail::FunctionTail(std::function<Rational(long)> f, std::string description)
    : f_(std::move(f)), description_(std::move(description)) {}

// ------------------------------------------------------------------ builder

PiecewiseLinearUtility UtilityBuilderResult::utility() const { return PiecewiseLinearUtility::unit_steps(g_lower); }

Rational harmonic_number(long n) {
  Rational h = 0;
  for (long k = 1; k <= n; ++k) h += Rational(1, static_cast<unsigned long>(k));
  return h;
}

Rational basel_lower_bound(long m) {
  Rational s = 0;
  for (long k = 1; k <= m; ++k) {
    mpz_class sq = k;
    sq *= k;
    s += Rational(mpz_class(1), sq);
  }
  s += Rational(1, static_cast<unsigned long>(m + 1));
  s.canonicalize();
  return s;
}

UtilityBuilderResult build_utility(const Tail& tail, const UtilityBuilderOptions& opts) {
  if (opts.num_g < 1) throw ValidationError("build_utility: K must be >= 1");
  if (opts.n_sum < opts.num_g) throw ValidationError("build_utility: summation cutoff must be >= K");
  if (opts.bits < 16) throw ValidationError("build_utility: at least 16 bits of resolution required");

  Rational prev = tail.at(0);
  if (prev < 0 || prev > 1) throw ValidationError("tail values must lie in [0, 1]; F(0) = " + format_rational(prev));
  for (long k = 1; k <= opts.monotone_check; ++k) {
    Rational cur = tail.at(k);
    if (cur < 0) throw ValidationError("tail is negative at k = " + std::to_string(k));
    if (cur > prev) throw ValidationError("tail is not nonincreasing at k = " + std::to_string(k));
    prev = std::move(cur);
  }

  const unsigned bits = opts.bits;
  const mpz_class one = scale(bits);
  UtilityBuilderResult out;
  out.options = opts;
  out.tail = tail.describe();

  // cut levels: smallest K >= max(n, K_{n-1}) with n * sum_{k <= K} F(k-1) <= K, certified on upper bounds
  long streamed = 0;
  mpz_class stream_hi = 0;
  auto prefix_hi = [&](long count) -> mpz_class {
    if (auto e = tail.prefix(count, bits)) return e->hi;
    while (streamed < count) {
      stream_hi += tail.term(streamed, bits).hi;
      ++streamed;
    }
    return stream_hi;
  };
  out.cut_levels.reserve(static_cast<std::size_t>(opts.n_sum));
  long K = 0;
  mpz_class lhs;
  mpz_class rhs;
  for (long n = 1; n <= opts.n_sum; ++n) {
    K = std::max(K, n);
    for (;;) {
      if (K > opts.probe_limit) {
        throw Error("cannot certify Cesaro bound for n = " + std::to_string(n) + " below probe limit " +
                    std::to_string(opts.probe_limit) + " (tail does not decay fast enough)");
      }
      lhs = prefix_hi(K);
      lhs *= n;
      rhs = one;
      rhs *= K;
      if (lhs <= rhs) break;
      ++K;
    }
    out.cut_levels.push_back(K);
  }

  // g_k = sum_{n = n_k}^{N} 1/(n K_n) as suffix sums of rounded terms
  std::vector<long> first(static_cast<std::size_t>(opts.num_g));
  long n = 1;
  for (long k = 1; k <= opts.num_g; ++k) {
    while (out.cut_levels[static_cast<std::size_t>(n - 1)] < k) ++n;
    first[static_cast<std::size_t>(k - 1)] = n;
  }
  const long n_max = first.back();
  std::vector<mpz_class> before_lo(static_cast<std::size_t>(n_max) + 1);
  std::vector<mpz_class> before_hi(static_cast<std::size_t>(n_max) + 1);
  mpz_class total_lo = 0;
  mpz_class total_hi = 0;
  mpz_class denom;
  for (long m = 1; m <= opts.n_sum; ++m) {
    if (m <= n_max) {
      before_lo[static_cast<std::size_t>(m)] = total_lo;
      before_hi[static_cast<std::size_t>(m)] = total_hi;
    }
    denom = m;
    denom *= out.cut_levels[static_cast<std::size_t>(m - 1)];
    total_lo += floor_div(one, denom);
    total_hi += ceil_div(one, denom);
  }

  out.first_index = first;
  out.remainder_bound = Rational(1, static_cast<unsigned long>(opts.n_sum));
  out.g_lower.reserve(first.size());
  out.g_upper.reserve(first.size());
  out.utility_samples.reserve(first.size() + 1);
  out.utility_samples.emplace_back(0);
  // K_n >= n, so the terms past the cutoff add at most sum_{n > N} 1/n^2 < 1/N
  const mpz_class remainder_hi = ceil_div(one, mpz_class(opts.n_sum));
  mpz_class sum_lo = 0;
  mpz_class weighted_hi = 0;
  for (std::size_t i = 0; i < first.size(); ++i) {
    const auto nk = static_cast<std::size_t>(first[i]);
    const mpz_class g_lo = total_lo - before_lo[nk];
    const mpz_class g_hi = total_hi - before_hi[nk] + remainder_hi;
    out.g_lower.push_back(dyadic(g_lo, bits));
    out.g_upper.push_back(dyadic(g_hi, bits));
    sum_lo += g_lo;
    out.utility_samples.push_back(dyadic(sum_lo, bits));
    weighted_hi += g_hi * tail.term(static_cast<long>(i), bits).hi;
  }
  out.sum_g_lower = dyadic(sum_lo, bits);

  out.harmonic_index = 0;
  for (std::size_t i = 0; i < out.cut_levels.size() && out.cut_levels[i] <= opts.num_g; ++i) {
    out.harmonic_index = static_cast<long>(i) + 1;
  }
  out.harmonic_bound = harmonic_number(out.harmonic_index);
  out.divergence_certified = out.sum_g_lower >= out.harmonic_bound;

  out.weighted_sum_upper = dyadic(weighted_hi, 2 * bits);
  out.basel_lower = basel_lower_bound(opts.basel_terms);
  out.tail_sum_certified = out.weighted_sum_upper <= out.basel_lower;
  return out;
}

}  // namespace deflab
