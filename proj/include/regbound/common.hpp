// Shared primitives: error type, exact rationals, radicals, bit rows, seeded randomness, hashing.
#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace regbound {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

enum class ErrorCode {
  Verification = 1,  // a checked property failed
  Usage = 2,         // bad arguments, malformed input, violated precondition
  Resource = 3,      // enumeration cap or retry budget exhausted
  Io = 4,
  Internal = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);
inline void require(bool cond, const std::string& message) {
  if (!cond) fail(ErrorCode::Usage, message);
}

// ---- rationals ----
Rational rat(int64_t num, int64_t den = 1);
Rational parse_rational(std::string_view text);  // "3/4", "0.25", "7"
std::string to_string(const Rational& r);
std::string to_string(const BigInt& v);
BigInt ceil_big(const Rational& r);
BigInt floor_big(const Rational& r);
int64_t ceil_to_i64(const Rational& r);
int64_t floor_to_i64(const Rational& r);
int64_t to_i64(const BigInt& v);
Rational pow(const Rational& base, unsigned exponent);
bool is_power_of_two(uint64_t v);
unsigned log2_exact(uint64_t v);  // requires a power of two
BigInt binomial(uint64_t n, uint64_t k);
double to_double(const Rational& r);

// Value coeff * radicand^(1/index), kept exact so thresholds such as |L|^(-1/6) never round.
class Radical {
 public:
  Radical() = default;
  Radical(Rational coeff, Rational radicand, unsigned index);
  static Radical of(const Rational& r) { return Radical(r, 1, 1); }

  // sign of (this - x)
  int compare(const Rational& x) const;
  int compare(const Radical& other) const;
  bool at_least(const Rational& x) const { return compare(x) >= 0; }
  bool at_most(const Rational& x) const { return compare(x) <= 0; }
  // smallest integer n with n >= value * factor
  int64_t ceil_mul(const Rational& factor) const;
  Radical scaled(const Rational& factor) const { return Radical(coeff_ * factor, radicand_, index_); }
  bool is_rational() const;
  Rational rational_value() const;  // only when is_rational()
  double approx() const;
  std::string str() const;
  const Rational& coeff() const { return coeff_; }
  const Rational& radicand() const { return radicand_; }
  unsigned index() const { return index_; }

 private:
  Rational coeff_{0};
  Rational radicand_{1};
  unsigned index_ = 1;
};

// ---- bit rows ----
namespace bits {
inline size_t words_for(size_t n) { return (n + 63) / 64; }
inline bool test(const uint64_t* w, size_t i) { return (w[i >> 6] >> (i & 63)) & 1u; }
inline void set(uint64_t* w, size_t i) { w[i >> 6] |= uint64_t(1) << (i & 63); }
inline void reset(uint64_t* w, size_t i) { w[i >> 6] &= ~(uint64_t(1) << (i & 63)); }
uint64_t count(const uint64_t* w, size_t nwords);
uint64_t and_count(const uint64_t* a, const uint64_t* b, size_t nwords);
uint64_t and3_count(const uint64_t* a, const uint64_t* b, const uint64_t* c, size_t nwords);
}  // namespace bits

class Bits {
 public:
  Bits() = default;
  explicit Bits(size_t n) : n_(n), w_(bits::words_for(n), 0) {}
  static Bits from_indices(size_t n, const std::vector<uint32_t>& idx);
  size_t size() const { return n_; }
  size_t nwords() const { return w_.size(); }
  bool test(size_t i) const { return bits::test(w_.data(), i); }
  void set(size_t i) { bits::set(w_.data(), i); }
  void reset(size_t i) { bits::reset(w_.data(), i); }
  uint64_t count() const { return bits::count(w_.data(), w_.size()); }
  const uint64_t* data() const { return w_.data(); }
  uint64_t* data() { return w_.data(); }
  std::vector<uint32_t> indices() const;
  bool operator==(const Bits& o) const { return n_ == o.n_ && w_ == o.w_; }

 private:
  size_t n_ = 0;
  std::vector<uint64_t> w_;
};

// ---- randomness ----
// All randomness derives from one master seed: seed_for(master, "command/module/level").
uint64_t splitmix64(uint64_t x);
uint64_t seed_for(uint64_t master, std::string_view label);

class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}
  uint64_t next() { return eng_(); }
  uint64_t below(uint64_t n);  // uniform in [0,n), portable rejection sampling
  bool coin(const Rational& p);  // Bernoulli with exact rational p (53-bit resolution)
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }
  std::vector<uint32_t> sample_subset(uint32_t n, uint32_t size);  // sorted

 private:
  std::mt19937_64 eng_;
};

// ---- hashing ----
uint64_t fnv1a64(const void* data, size_t len, uint64_t h = 14695981039346656037ULL);
uint64_t fnv1a64(std::string_view s);
std::string hex64(uint64_t v);

// Compact text for sorted index sets: "0-7 12 15-16".
std::string format_ranges(const std::vector<uint32_t>& sorted);
std::vector<uint32_t> parse_ranges(std::string_view text);

// Iterate all size-r subsets of [0,n) in lexicographic order; f returns false to stop.
template <class F>
void for_each_combination(uint32_t n, uint32_t r, F&& f) {
  if (r > n) return;
  std::vector<uint32_t> c(r);
  for (uint32_t i = 0; i < r; ++i) c[i] = i;
  while (true) {
    if (!f(static_cast<const std::vector<uint32_t>&>(c))) return;
    if (r == 0) return;
    int i = static_cast<int>(r) - 1;
    while (i >= 0 && c[i] == n - r + static_cast<uint32_t>(i)) --i;
    if (i < 0) return;
    ++c[i];
    for (uint32_t j = static_cast<uint32_t>(i) + 1; j < r; ++j) c[j] = c[j - 1] + 1;
  }
}

}  // namespace regbound
