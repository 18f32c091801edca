#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace pglc {

// Exact rational arithmetic. Thin wrapper around GMP's mpq_class that keeps
// values canonical (reduced, positive denominator) at all times.
class Rat {
 public:
  Rat() : q_(0) {}
  Rat(long n) : q_(n) {}  // NOLINT: implicit on purpose
  Rat(long n, long d) : q_(n, d) {
    if (d == 0) throw std::domain_error("rational with zero denominator");
    q_.canonicalize();
  }
  explicit Rat(const mpq_class& q) : q_(q) { q_.canonicalize(); }

  static Rat from_string(const std::string& s) {
    mpq_class q;
    if (q.set_str(s, 10) != 0) throw std::domain_error("bad rational literal: " + s);
    q.canonicalize();
    return Rat(q);
  }

  Rat operator+(const Rat& o) const { return Rat(mpq_class(q_ + o.q_)); }
  Rat operator-(const Rat& o) const { return Rat(mpq_class(q_ - o.q_)); }
  Rat operator*(const Rat& o) const { return Rat(mpq_class(q_ * o.q_)); }
  Rat operator/(const Rat& o) const {
    if (o.q_ == 0) throw std::domain_error("division by zero");
    return Rat(mpq_class(q_ / o.q_));
  }
  Rat operator-() const { return Rat(mpq_class(-q_)); }
  Rat& operator+=(const Rat& o) { q_ += o.q_; return *this; }
  Rat& operator-=(const Rat& o) { q_ -= o.q_; return *this; }
  Rat& operator*=(const Rat& o) { q_ *= o.q_; return *this; }

  bool operator==(const Rat& o) const { return q_ == o.q_; }
  bool operator!=(const Rat& o) const { return q_ != o.q_; }
  bool operator<(const Rat& o) const { return q_ < o.q_; }
  bool operator<=(const Rat& o) const { return q_ <= o.q_; }
  bool operator>(const Rat& o) const { return q_ > o.q_; }
  bool operator>=(const Rat& o) const { return q_ >= o.q_; }

  bool is_zero() const { return q_ == 0; }
  bool is_integer() const { return q_.get_den() == 1; }
  long to_long() const {
    if (!is_integer()) throw std::domain_error("rational is not an integer");
    return mpz_class(q_.get_num()).get_si();
  }

  // Canonical form: "n" for integers, "n/d" otherwise.
  std::string str() const {
    if (is_integer()) return q_.get_num().get_str();
    return q_.get_num().get_str() + "/" + q_.get_den().get_str();
  }

  const mpq_class& raw() const { return q_; }

 private:
  mpq_class q_;
};

inline Rat operator+(long n, const Rat& r) { return Rat(n) + r; }
inline Rat operator*(long n, const Rat& r) { return Rat(n) * r; }

}  // namespace pglc
