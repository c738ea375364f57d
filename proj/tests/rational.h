// Copyright 2026 The seedprop Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <stdexcept>

namespace seedprop::testing {

// Exact rational over 128-bit integers; enough for box areas built from
// small-denominator coordinates.
class Rational {
 public:
  using Int = __int128;

  Rational(Int num = 0, Int den = 1) : num_(num), den_(den) {
    if (den_ == 0) throw std::invalid_argument("zero denominator");
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    const Int g = gcd(num_ < 0 ? -num_ : num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
  }

  friend Rational operator+(const Rational& a, const Rational& b) {
    return {a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_};
  }
  friend Rational operator-(const Rational& a, const Rational& b) {
    return {a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_};
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return {a.num_ * b.num_, a.den_ * b.den_};
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    return {a.num_ * b.den_, a.den_ * b.num_};
  }
  friend bool operator<(const Rational& a, const Rational& b) {
    return a.num_ * b.den_ < b.num_ * a.den_;
  }
  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }

  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  bool positive() const { return num_ > 0; }

 private:
  static Int gcd(Int a, Int b) {
    while (b != 0) {
      const Int t = a % b;
      a = b;
      b = t;
    }
    return a == 0 ? 1 : a;
  }

  Int num_;
  Int den_;
};

inline const Rational& rmin(const Rational& a, const Rational& b) { return b < a ? b : a; }
inline const Rational& rmax(const Rational& a, const Rational& b) { return a < b ? b : a; }

// IoU of two corner boxes in exact arithmetic.
inline Rational rational_iou(const Rational (&a)[4], const Rational (&b)[4]) {
  const Rational iw = rmin(a[2], b[2]) - rmax(a[0], b[0]);
  const Rational ih = rmin(a[3], b[3]) - rmax(a[1], b[1]);
  const Rational inter = (iw.positive() && ih.positive()) ? iw * ih : Rational(0);
  const Rational area_a = (a[2] - a[0]) * (a[3] - a[1]);
  const Rational area_b = (b[2] - b[0]) * (b[3] - b[1]);
  const Rational uni = area_a + area_b - inter;
  if (!uni.positive()) return Rational(0);
  return inter / uni;
}

}  // namespace seedprop::testing
