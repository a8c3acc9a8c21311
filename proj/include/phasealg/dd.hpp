// Minimal double-double arithmetic (Dekker/Knuth error-free transforms),
// enough for the extended-precision determinant path.

#ifndef PHASEALG_DD_HPP_
#define PHASEALG_DD_HPP_

#include <cmath>

namespace phasealg {

struct DD {
  double hi = 0, lo = 0;

  DD() = default;
  DD(double x) : hi(x), lo(0) {}
  DD(double h, double l) : hi(h), lo(l) {}

  double value() const { return hi + lo; }
};

namespace dd_detail {
inline DD two_sum(double a, double b) {
  double s = a + b;
  double bb = s - a;
  double err = (a - (s - bb)) + (b - bb);
  return {s, err};
}
inline DD two_prod(double a, double b) {
  double p = a * b;
  double err = std::fma(a, b, -p);
  return {p, err};
}
inline DD renorm(double hi, double lo) {
  double s = hi + lo;
  double err = lo - (s - hi);
  return {s, err};
}
}  // namespace dd_detail

inline DD operator+(const DD& a, const DD& b) {
  DD s = dd_detail::two_sum(a.hi, b.hi);
  return dd_detail::renorm(s.hi, s.lo + a.lo + b.lo);
}
inline DD operator-(const DD& a) { return {-a.hi, -a.lo}; }
inline DD operator-(const DD& a, const DD& b) { return a + (-b); }
inline DD operator*(const DD& a, const DD& b) {
  DD p = dd_detail::two_prod(a.hi, b.hi);
  return dd_detail::renorm(p.hi, p.lo + a.hi * b.lo + a.lo * b.hi);
}
inline DD operator/(const DD& a, const DD& b) {
  double q1 = a.hi / b.hi;
  DD r = a - b * DD(q1);
  double q2 = r.hi / b.hi;
  r = r - b * DD(q2);
  double q3 = r.hi / b.hi;
  DD q = dd_detail::two_sum(q1, q2);
  return dd_detail::renorm(q.hi, q.lo + q3);
}

struct DDComplex {
  DD re, im;

  DDComplex() = default;
  DDComplex(DD r, DD i) : re(r), im(i) {}
  DDComplex(double r, double i = 0) : re(r), im(i) {}
};

inline DDComplex operator+(const DDComplex& a, const DDComplex& b) {
  return {a.re + b.re, a.im + b.im};
}
inline DDComplex operator-(const DDComplex& a, const DDComplex& b) {
  return {a.re - b.re, a.im - b.im};
}
inline DDComplex operator*(const DDComplex& a, const DDComplex& b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}
inline DDComplex operator/(const DDComplex& a, const DDComplex& b) {
  DD den = b.re * b.re + b.im * b.im;
  return {(a.re * b.re + a.im * b.im) / den, (a.im * b.re - a.re * b.im) / den};
}
inline double abs2(const DDComplex& a) {
  return (a.re * a.re + a.im * a.im).value();
}

}  // namespace phasealg

#endif
