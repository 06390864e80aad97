#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>

namespace anomaly {

using Rational = boost::multiprecision::cpp_rational;

// Element of the commutative ring Q[pi^{1/2}, pi^{-1/2}]: a finite sum of
// terms c * pi^{m/2} with rational c and integer m (m may be negative).
class Scalar {
public:
  Scalar() = default;
  Scalar(int v) { set_term(0, Rational(v)); }
  Scalar(long long v) { set_term(0, Rational(v)); }
  Scalar(const Rational& v) { set_term(0, v); }

  // c * pi^{m/2}
  static Scalar pi_half_pow(int m, const Rational& c = Rational(1)) {
    Scalar s;
    s.set_term(m, c);
    return s;
  }

  bool is_zero() const { return terms_.empty(); }

  bool is_rational() const {
    return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first == 0);
  }

  Rational rational() const {
    if (terms_.empty()) return Rational(0);
    if (!is_rational()) throw std::domain_error("Scalar carries pi factors");
    return terms_.begin()->second;
  }

  const std::map<int, Rational>& terms() const { return terms_; }

  Scalar& operator+=(const Scalar& o) {
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
  }
  Scalar& operator-=(const Scalar& o) {
    for (const auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
  }
  friend Scalar operator+(Scalar a, const Scalar& b) { return a += b; }
  friend Scalar operator-(Scalar a, const Scalar& b) { return a -= b; }
  Scalar operator-() const {
    Scalar r;
    for (const auto& [m, c] : terms_) r.terms_[m] = -c;
    return r;
  }
  friend Scalar operator*(const Scalar& a, const Scalar& b) {
    Scalar r;
    for (const auto& [ma, ca] : a.terms_)
      for (const auto& [mb, cb] : b.terms_) r.add_term(ma + mb, ca * cb);
    return r;
  }
  Scalar& operator*=(const Scalar& o) { return *this = *this * o; }

  // Inverse of a single-term scalar; general sums are never inverted here.
  Scalar inverse() const {
    if (terms_.size() != 1)
      throw std::domain_error("Scalar::inverse needs a monomial c*pi^{m/2}");
    const auto& [m, c] = *terms_.begin();
    return pi_half_pow(-m, Rational(1) / c);
  }

  bool operator==(const Scalar& o) const { return terms_ == o.terms_; }
  bool operator!=(const Scalar& o) const { return !(*this == o); }

  double to_double() const {
    double v = 0.0;
    for (const auto& [m, c] : terms_)
      v += c.convert_to<double>() * std::pow(std::numbers::pi, m / 2.0);
    return v;
  }

  std::string str() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [m, c] : terms_) {
      if (!first) os << " + ";
      first = false;
      os << c;
      if (m != 0) os << "*pi^{" << m << "/2}";
    }
    return os.str();
  }

private:
  void set_term(int m, const Rational& c) {
    if (c != 0) terms_[m] = c;
  }
  void add_term(int m, const Rational& c) {
    auto it = terms_.find(m);
    if (it == terms_.end()) {
      if (c != 0) terms_[m] = c;
    } else {
      it->second += c;
      if (it->second == 0) terms_.erase(it);
    }
  }

  std::map<int, Rational> terms_;
};

// Uniform interface over the two coefficient rings (exact Scalar / double).
// Keeping them behind distinct C++ types means exact and float data can never
// mix without an explicit conversion.
template <class S>
struct ring;

template <>
struct ring<Scalar> {
  static Scalar zero() { return Scalar(); }
  static Scalar one() { return Scalar(1); }
  static Scalar from_int(long long v) { return Scalar(v); }
  static Scalar from_fraction(long long num, long long den) {
    return Scalar(Rational(num, den));
  }
  static Scalar pi_half_pow(int m) { return Scalar::pi_half_pow(m); }
  static bool is_zero(const Scalar& s) { return s.is_zero(); }
  static double to_double(const Scalar& s) { return s.to_double(); }
};

template <>
struct ring<double> {
  static double zero() { return 0.0; }
  static double one() { return 1.0; }
  static double from_int(long long v) { return double(v); }
  static double from_fraction(long long num, long long den) {
    return double(num) / double(den);
  }
  static double pi_half_pow(int m) {
    return std::pow(std::numbers::pi, m / 2.0);
  }
  static bool is_zero(double s) { return s == 0.0; }
  static double to_double(double s) { return s; }
};

inline double to_float(const Scalar& s) { return s.to_double(); }

} // namespace anomaly
