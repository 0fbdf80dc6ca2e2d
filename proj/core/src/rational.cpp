#include <deflab/error.hpp>
#include <deflab/rational.hpp>

#include <cctype>
#include <string>

namespace deflab {

namespace {

bool is_canonical_integer(std::string_view digits, bool allow_zero) {
  if (digits.empty()) return false;
  for (char c : digits) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  if (digits == "0") return allow_zero;
  return digits.front() != '0';
}

}  // namespace

Rational parse_rational(std::string_view text) {
  const std::string shown(text);
  std::string_view body = text;
  bool negative = false;
  if (!body.empty() && body.front() == '-') {
    negative = true;
    body.remove_prefix(1);
  }
  const auto slash = body.find('/');
  const std::string_view num = body.substr(0, slash);
  const std::string_view den = slash == std::string_view::npos ? std::string_view{} : body.substr(slash + 1);

  if (!is_canonical_integer(num, !negative)) {
    throw ParseError("non-canonical rational \"" + shown + "\"");
  }
  if (slash != std::string_view::npos && !is_canonical_integer(den, false)) {
    throw ParseError("non-canonical rational \"" + shown + "\"");
  }

  Rational value;
  value.get_num() = mpz_class(std::string(num));
  value.get_den() = slash == std::string_view::npos ? mpz_class(1) : mpz_class(std::string(den));
  if (negative) value.get_num() = -value.get_num();

  Rational reduced = value;
  reduced.canonicalize();
  if (reduced.get_num() != value.get_num() || reduced.get_den() != value.get_den() ||
      (slash != std::string_view::npos && value.get_den() == 1)) {
    throw ParseError("non-canonical rational \"" + shown + "\"");
  }
  return reduced;
}

std::string format_rational(const Rational& value) { return value.get_str(); }

Rational make_rational(long numerator, long denominator) {
  if (denominator == 0) throw ValidationError("rational with zero denominator");
  Rational r{mpz_class(numerator), mpz_class(denominator)};
  r.canonicalize();
  return r;
}

Rational dot(const RationalVector& a, const RationalVector& b) {
  if (a.size() != b.size()) throw ValidationError("dot: dimension mismatch");
  Rational sum = 0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

}  // namespace deflab
