#include "dcx/special.hpp"

#include <cmath>
#include <limits>

#include "dcx/expr.hpp"

namespace dcx {

double lambert_w(double z) {
  const double branch = -std::exp(-1.0);
  if (!(z >= branch - 1e-14))
    throw DomainFault("lambertW argument below -1/e");
  if (z == 0.0) return 0.0;

  double w;
  if (z > 1.0) {
    double l1 = std::log(z);
    double l2 = std::log(l1 > 0 ? l1 : 1.0);
    w = l1 - (l1 > 1 ? l2 : 0.0);
  } else if (z > -0.25) {
    w = z * (1.0 - z + 1.5 * z * z);
  } else {
    // expansion around the branch point
    double p = std::sqrt(std::max(0.0, 2.0 * (std::exp(1.0) * z + 1.0)));
    w = -1.0 + p - p * p / 3.0 + 11.0 * p * p * p / 72.0;
  }

  for (int i = 0; i < 100; ++i) {
    double ew = std::exp(w);
    double f = w * ew - z;
    double wp1 = w + 1.0;
    double denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
    if (denom == 0.0) break;
    double dw = f / denom;
    w -= dw;
    if (std::abs(dw) <= 1e-15 * (1.0 + std::abs(w))) return w;
  }
  if (!std::isfinite(w)) throw DomainFault("lambertW iteration diverged");
  return w;
}

double expint1(double x) {
  if (!(x > 0)) throw DomainFault("expint1 requires a positive argument");
  return -std::expint(-x);
}

namespace {

struct SimpsonState {
  const std::function<double(double)>* f;
  double tol;
  int max_depth = 48;
};

double simpson(const SimpsonState& st, double a, double b, double fa,
               double fm, double fb, double whole, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = (*st.f)(lm), frm = (*st.f)(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double delta = left + right - whole;
  if (depth <= 0) throw DomainFault("quadrature did not converge");
  if (std::abs(delta) <= 15.0 * st.tol || (b - a) < 1e-300)
    return left + right + delta / 15.0;
  SimpsonState half = st;
  half.tol = st.tol / 2.0;
  return simpson(half, a, m, fa, flm, fm, left, depth - 1) +
         simpson(half, m, b, fm, frm, fb, right, depth - 1);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol) {
  if (a == b) return 0.0;
  double sign = 1.0;
  if (b < a) {
    std::swap(a, b);
    sign = -1.0;
  }
  double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  if (!std::isfinite(fa) || !std::isfinite(fb) || !std::isfinite(fm))
    throw DomainFault("quadrature integrand not finite");
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  SimpsonState st{&f, std::max(tol, 1e-15) / 2.0, 48};
  double v = simpson(st, a, b, fa, fm, fb, whole, st.max_depth);
  return sign * v;
}

}  // namespace dcx
