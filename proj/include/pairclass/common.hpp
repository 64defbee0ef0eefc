#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace pairclass {

enum class ErrorCode {
  invalid_argument,
  schema,
  duplicate_row,
  parse,
  insufficient_data,
  degenerate_support,
  cannot_split,
  numeric,
  io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) { throw Error(code, msg); }

inline double nan_value() { return std::numeric_limits<double>::quiet_NaN(); }

// Dense square matrix of doubles, NaN marks unset entries.
struct Matrix {
  int n = 0;
  std::vector<double> v;

  Matrix() = default;
  explicit Matrix(int size, double fill = std::numeric_limits<double>::quiet_NaN())
      : n(size), v(static_cast<size_t>(size) * size, fill) {}

  double& at(int i, int j) { return v[static_cast<size_t>(i) * n + j]; }
  double at(int i, int j) const { return v[static_cast<size_t>(i) * n + j]; }
};

struct CountMatrix {
  int n = 0;
  std::vector<int64_t> v;

  CountMatrix() = default;
  explicit CountMatrix(int size) : n(size), v(static_cast<size_t>(size) * size, 0) {}

  int64_t& at(int i, int j) { return v[static_cast<size_t>(i) * n + j]; }
  int64_t at(int i, int j) const { return v[static_cast<size_t>(i) * n + j]; }
};

// Linear-interpolation quantile of an ascending-sorted sample.
inline double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) fail(ErrorCode::invalid_argument, "quantile of empty sample");
  if (q <= 0.0) return sorted.front();
  if (q >= 1.0) return sorted.back();
  double pos = q * static_cast<double>(sorted.size() - 1);
  size_t lo = static_cast<size_t>(pos);
  double frac = pos - static_cast<double>(lo);
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

}  // namespace pairclass
