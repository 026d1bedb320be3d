#include "regbound/common.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace regbound {

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

Rational rat(int64_t num, int64_t den) {
  require(den != 0, "zero denominator");
  return Rational(num) / Rational(den);
}

Rational parse_rational(std::string_view text) {
  std::string s(text);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  size_t b = 0;
  while (b < s.size() && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  s = s.substr(b);
  require(!s.empty(), "empty rational literal");
  try {
    auto slash = s.find('/');
    if (slash != std::string::npos) {
      BigInt n(s.substr(0, slash));
      BigInt d(s.substr(slash + 1));
      require(d != 0, "zero denominator in '" + s + "'");
      return Rational(n, d);
    }
    auto dot = s.find('.');
    if (dot != std::string::npos) {
      std::string ip = s.substr(0, dot), fp = s.substr(dot + 1);
      bool neg = !ip.empty() && ip[0] == '-';
      if (neg) ip = ip.substr(1);
      if (ip.empty()) ip = "0";
      for (char c : fp) require(std::isdigit(static_cast<unsigned char>(c)), "bad decimal '" + s + "'");
      BigInt scale = 1;
      for (size_t i = 0; i < fp.size(); ++i) scale *= 10;
      BigInt num = BigInt(ip) * scale + (fp.empty() ? BigInt(0) : BigInt(fp));
      Rational r(num, scale);
      return neg ? Rational(-r) : r;
    }
    return Rational(BigInt(s));
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    fail(ErrorCode::Usage, "cannot parse rational '" + s + "'");
  }
}

std::string to_string(const Rational& r) {
  BigInt n = numerator(r), d = denominator(r);
  if (d == 1) return n.str();
  return n.str() + "/" + d.str();
}

std::string to_string(const BigInt& v) { return v.str(); }

BigInt floor_big(const Rational& r) {
  BigInt n = numerator(r), d = denominator(r);
  BigInt q = n / d;
  if (n < 0 && q * d != n) q -= 1;
  return q;
}

BigInt ceil_big(const Rational& r) {
  BigInt n = numerator(r), d = denominator(r);
  BigInt q = n / d;
  if (n > 0 && q * d != n) q += 1;
  return q;
}

int64_t to_i64(const BigInt& v) {
  if (v > BigInt(INT64_MAX) || v < BigInt(INT64_MIN)) fail(ErrorCode::Resource, "integer overflow: " + v.str());
  return static_cast<int64_t>(v);
}

int64_t ceil_to_i64(const Rational& r) { return to_i64(ceil_big(r)); }
int64_t floor_to_i64(const Rational& r) { return to_i64(floor_big(r)); }

Rational pow(const Rational& base, unsigned exponent) {
  Rational out = 1, b = base;
  while (exponent) {
    if (exponent & 1u) out *= b;
    b *= b;
    exponent >>= 1;
  }
  return out;
}

bool is_power_of_two(uint64_t v) { return v && !(v & (v - 1)); }

unsigned log2_exact(uint64_t v) {
  require(is_power_of_two(v), "expected a power of two, got " + std::to_string(v));
  unsigned r = 0;
  while (v > 1) v >>= 1, ++r;
  return r;
}

BigInt binomial(uint64_t n, uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  BigInt r = 1;
  for (uint64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

double to_double(const Rational& r) { return static_cast<double>(r); }

// ---- Radical ----
Radical::Radical(Rational coeff, Rational radicand, unsigned index)
    : coeff_(std::move(coeff)), radicand_(std::move(radicand)), index_(index) {
  require(index_ >= 1, "radical index must be positive");
  require(coeff_ >= 0 && radicand_ >= 0, "radicals are restricted to nonnegative values");
}

int Radical::compare(const Rational& x) const {
  if (x < 0) return 1;
  Rational lhs = pow(coeff_, index_) * radicand_;
  Rational rhs = pow(x, index_);
  return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
}

int Radical::compare(const Radical& o) const {
  unsigned n = std::lcm(index_, o.index_);
  Rational a = pow(coeff_, n) * pow(radicand_, n / index_);
  Rational b = pow(o.coeff_, n) * pow(o.radicand_, n / o.index_);
  return a < b ? -1 : (a > b ? 1 : 0);
}

int64_t Radical::ceil_mul(const Rational& factor) const {
  require(factor >= 0, "negative factor");
  Radical v = scaled(factor);
  double guess = std::ceil(v.approx());
  int64_t n = guess < 0 ? 0 : static_cast<int64_t>(guess);
  while (n > 0 && v.compare(Rational(n - 1)) <= 0) --n;
  while (v.compare(Rational(n)) > 0) ++n;
  return n;
}

bool Radical::is_rational() const {
  if (index_ == 1 || coeff_ == 0 || radicand_ == 0) return true;
  auto root = [&](const BigInt& v) -> std::pair<bool, BigInt> {
    BigInt lo = 0, hi = 1;
    while (boost::multiprecision::pow(hi, index_) < v) hi *= 2;
    while (lo < hi) {
      BigInt mid = (lo + hi) / 2;
      if (boost::multiprecision::pow(mid, index_) < v) lo = mid + 1; else hi = mid;
    }
    return {boost::multiprecision::pow(lo, index_) == v, lo};
  };
  return root(numerator(radicand_)).first && root(denominator(radicand_)).first;
}

Rational Radical::rational_value() const {
  require(is_rational(), "radical is irrational");
  if (index_ == 1) return coeff_ * radicand_;
  if (coeff_ == 0 || radicand_ == 0) return 0;
  auto root = [&](const BigInt& v) {
    BigInt lo = 0, hi = 1;
    while (boost::multiprecision::pow(hi, index_) < v) hi *= 2;
    while (lo < hi) {
      BigInt mid = (lo + hi) / 2;
      if (boost::multiprecision::pow(mid, index_) < v) lo = mid + 1; else hi = mid;
    }
    return lo;
  };
  return coeff_ * Rational(root(numerator(radicand_)), root(denominator(radicand_)));
}

double Radical::approx() const {
  return static_cast<double>(coeff_) * std::pow(static_cast<double>(radicand_), 1.0 / index_);
}

std::string Radical::str() const {
  if (index_ == 1) return to_string(coeff_ * radicand_);
  std::string r = "(" + to_string(radicand_) + ")^(1/" + std::to_string(index_) + ")";
  if (coeff_ == 1) return r;
  return to_string(coeff_) + "*" + r;
}

// ---- bits ----
namespace bits {
uint64_t count(const uint64_t* w, size_t n) {
  uint64_t c = 0;
  for (size_t i = 0; i < n; ++i) c += static_cast<uint64_t>(__builtin_popcountll(w[i]));
  return c;
}
uint64_t and_count(const uint64_t* a, const uint64_t* b, size_t n) {
  uint64_t c = 0;
  for (size_t i = 0; i < n; ++i) c += static_cast<uint64_t>(__builtin_popcountll(a[i] & b[i]));
  return c;
}
uint64_t and3_count(const uint64_t* a, const uint64_t* b, const uint64_t* m, size_t n) {
  uint64_t c = 0;
  for (size_t i = 0; i < n; ++i) c += static_cast<uint64_t>(__builtin_popcountll(a[i] & b[i] & m[i]));
  return c;
}
}  // namespace bits

Bits Bits::from_indices(size_t n, const std::vector<uint32_t>& idx) {
  Bits b(n);
  for (uint32_t i : idx) {
    require(i < n, "index out of range in bit set");
    b.set(i);
  }
  return b;
}

std::vector<uint32_t> Bits::indices() const {
  std::vector<uint32_t> out;
  for (size_t wi = 0; wi < w_.size(); ++wi) {
    uint64_t x = w_[wi];
    while (x) {
      out.push_back(static_cast<uint32_t>(wi * 64 + __builtin_ctzll(x)));
      x &= x - 1;
    }
  }
  return out;
}

// ---- randomness ----
uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

uint64_t seed_for(uint64_t master, std::string_view label) {
  return splitmix64(master ^ fnv1a64(label));
}

uint64_t Rng::below(uint64_t n) {
  require(n > 0, "empty range");
  uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
  while (true) {
    uint64_t x = eng_();
    if (x < limit) return x % n;
  }
}

bool Rng::coin(const Rational& p) {
  if (p <= 0) return false;
  if (p >= 1) return true;
  uint64_t x = eng_() >> 11;  // 53 bits
  // x / 2^53 < p  <=>  x * den < p_num * 2^53
  BigInt lhs = BigInt(x) * denominator(p);
  BigInt rhs = numerator(p) * (BigInt(1) << 53);
  return lhs < rhs;
}

std::vector<uint32_t> Rng::sample_subset(uint32_t n, uint32_t size) {
  require(size <= n, "subset larger than ground set");
  std::vector<uint32_t> all(n);
  std::iota(all.begin(), all.end(), 0u);
  for (uint32_t i = 0; i < size; ++i) std::swap(all[i], all[i + below(n - i)]);
  all.resize(size);
  std::sort(all.begin(), all.end());
  return all;
}

// ---- hashing ----
uint64_t fnv1a64(const void* data, size_t len, uint64_t h) {
  auto p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

uint64_t fnv1a64(std::string_view s) { return fnv1a64(s.data(), s.size()); }

std::string hex64(uint64_t v) {
  static const char* d = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<size_t>(i)] = d[v & 15];
  return s;
}

std::string format_ranges(const std::vector<uint32_t>& v) {
  std::ostringstream os;
  for (size_t i = 0; i < v.size();) {
    size_t j = i;
    while (j + 1 < v.size() && v[j + 1] == v[j] + 1) ++j;
    if (i) os << ' ';
    os << v[i];
    if (j > i) os << '-' << v[j];
    i = j + 1;
  }
  return os.str();
}

std::vector<uint32_t> parse_ranges(std::string_view text) {
  std::vector<uint32_t> out;
  std::istringstream is{std::string(text)};
  std::string tok;
  while (is >> tok) {
    auto dash = tok.find('-');
    try {
      if (dash == std::string::npos) {
        out.push_back(static_cast<uint32_t>(std::stoul(tok)));
      } else {
        uint32_t a = static_cast<uint32_t>(std::stoul(tok.substr(0, dash)));
        uint32_t b = static_cast<uint32_t>(std::stoul(tok.substr(dash + 1)));
        require(a <= b, "bad range '" + tok + "'");
        for (uint32_t x = a; x <= b; ++x) out.push_back(x);
      }
    } catch (const Error&) {
      throw;
    } catch (const std::exception&) {
      fail(ErrorCode::Usage, "bad index token '" + tok + "'");
    }
  }
  for (size_t i = 1; i < out.size(); ++i) require(out[i - 1] < out[i], "index list not strictly increasing");
  return out;
}

}  // namespace regbound
