#pragma once

// Truncated Taylor arithmetic in one variable (time).
//
// A Taylor<N> holds normalized coefficients c[k] = f^(k)(t0) / k! for k = 0..N. Arithmetic
// propagates them exactly, so derivatives of composed expressions come out analytic rather than
// from finite differences. Used by the flatness maps, which need attitude derivatives of
// arbitrary order along closed-form flat outputs.

#include <array>
#include <cmath>
#include <stdexcept>

namespace bimodal {

template <int N>
class Taylor {
 public:
  static constexpr int kOrder = N;

  constexpr Taylor() { c_.fill(0.0); }
  constexpr Taylor(double value) {  // NOLINT(google-explicit-constructor)
    c_.fill(0.0);
    c_[0] = value;
  }

  /// Builds a jet from raw derivatives d[k] = f^(k); missing entries are zero.
  template <typename Range>
  static Taylor from_derivatives(const Range& d) {
    Taylor out;
    double fact = 1.0;
    int k = 0;
    for (const double v : d) {
      if (k > N) break;
      if (k > 0) fact *= k;
      out.c_[k] = v / fact;
      ++k;
    }
    return out;
  }

  static Taylor variable(double t0) {
    Taylor out(t0);
    if constexpr (N >= 1) out.c_[1] = 1.0;
    return out;
  }

  double operator[](int k) const { return c_[k]; }
  double& operator[](int k) { return c_[k]; }
  double value() const { return c_[0]; }

  /// k-th time derivative at the expansion point.
  double derivative(int k) const {
    double fact = 1.0;
    for (int i = 2; i <= k; ++i) fact *= i;
    return c_[k] * fact;
  }

  /// Jet of the time derivative; the top coefficient is lost and set to zero.
  Taylor dt() const {
    Taylor out;
    for (int k = 0; k < N; ++k) out.c_[k] = (k + 1) * c_[k + 1];
    return out;
  }

  Taylor operator-() const {
    Taylor out;
    for (int k = 0; k <= N; ++k) out.c_[k] = -c_[k];
    return out;
  }
  Taylor& operator+=(const Taylor& o) {
    for (int k = 0; k <= N; ++k) c_[k] += o.c_[k];
    return *this;
  }
  Taylor& operator-=(const Taylor& o) {
    for (int k = 0; k <= N; ++k) c_[k] -= o.c_[k];
    return *this;
  }
  Taylor& operator*=(double s) {
    for (auto& v : c_) v *= s;
    return *this;
  }

  friend Taylor operator+(Taylor a, const Taylor& b) { return a += b; }
  friend Taylor operator-(Taylor a, const Taylor& b) { return a -= b; }
  friend Taylor operator*(Taylor a, double s) { return a *= s; }
  friend Taylor operator*(double s, Taylor a) { return a *= s; }
  friend Taylor operator+(Taylor a, double s) {
    a.c_[0] += s;
    return a;
  }
  friend Taylor operator+(double s, Taylor a) { return a + s; }
  friend Taylor operator-(Taylor a, double s) {
    a.c_[0] -= s;
    return a;
  }
  friend Taylor operator-(double s, const Taylor& a) { return (-a) + s; }

  friend Taylor operator*(const Taylor& a, const Taylor& b) {
    Taylor out;
    for (int k = 0; k <= N; ++k) {
      double acc = 0.0;
      for (int j = 0; j <= k; ++j) acc += a.c_[j] * b.c_[k - j];
      out.c_[k] = acc;
    }
    return out;
  }

  friend Taylor operator/(const Taylor& a, const Taylor& b) {
    if (b.c_[0] == 0.0) throw std::domain_error("taylor: division by a jet with zero value");
    Taylor q;
    for (int k = 0; k <= N; ++k) {
      double acc = a.c_[k];
      for (int j = 1; j <= k; ++j) acc -= b.c_[j] * q.c_[k - j];
      q.c_[k] = acc / b.c_[0];
    }
    return q;
  }
  friend Taylor operator/(double s, const Taylor& b) { return Taylor(s) / b; }
  friend Taylor operator/(const Taylor& a, double s) { return a * (1.0 / s); }

  friend Taylor sqrt(const Taylor& a) {
    if (!(a.c_[0] > 0.0)) throw std::domain_error("taylor: sqrt of a non-positive jet");
    Taylor r;
    r.c_[0] = std::sqrt(a.c_[0]);
    for (int k = 1; k <= N; ++k) {
      double acc = a.c_[k];
      for (int j = 1; j < k; ++j) acc -= r.c_[j] * r.c_[k - j];
      r.c_[k] = acc / (2.0 * r.c_[0]);
    }
    return r;
  }

  /// Joint recurrence for sin and cos of the same argument.
  friend void sincos(const Taylor& a, Taylor& s, Taylor& c) {
    s = Taylor();
    c = Taylor();
    s.c_[0] = std::sin(a.c_[0]);
    c.c_[0] = std::cos(a.c_[0]);
    for (int k = 1; k <= N; ++k) {
      double as = 0.0, ac = 0.0;
      for (int j = 1; j <= k; ++j) {
        as += j * a.c_[j] * c.c_[k - j];
        ac += j * a.c_[j] * s.c_[k - j];
      }
      s.c_[k] = as / k;
      c.c_[k] = -ac / k;
    }
  }
  friend Taylor sin(const Taylor& a) {
    Taylor s, c;
    sincos(a, s, c);
    return s;
  }
  friend Taylor cos(const Taylor& a) {
    Taylor s, c;
    sincos(a, s, c);
    return c;
  }

  /// Integrates a derivative jet: returns y with y(t0) = y0 and y' = d.
  static Taylor integrate(const Taylor& d, double y0) {
    Taylor y(y0);
    for (int k = 1; k <= N; ++k) y.c_[k] = d.c_[k - 1] / k;
    return y;
  }

  friend Taylor asin(const Taylor& a) {
    if (!(std::abs(a.c_[0]) < 1.0)) throw std::domain_error("taylor: asin argument outside (-1, 1)");
    const Taylor root = sqrt(1.0 - a * a);
    return integrate(a.dt() / root, std::asin(a.c_[0]));
  }

  friend Taylor atan2(const Taylor& y, const Taylor& x) {
    const Taylor r2 = x * x + y * y;
    if (!(r2.c_[0] > 0.0)) throw std::domain_error("taylor: atan2 at the origin");
    return integrate((x * y.dt() - y * x.dt()) / r2, std::atan2(y.c_[0], x.c_[0]));
  }

 private:
  std::array<double, N + 1> c_{};
};

}  // namespace bimodal
