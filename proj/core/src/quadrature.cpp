#include "oblab/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace oblab {

namespace {

struct Worker {
  const std::function<double(double)>& f;
  long evaluations = 0;
  bool converged = true;
  int max_depth;

  double eval(double x) {
    ++evaluations;
    const double v = f(x);
    if (!std::isfinite(v)) throw std::runtime_error("adaptive_simpson: integrand not finite");
    return v;
  }

  /// One adaptive step on [a, b] with endpoint/midpoint values and the
  /// whole-interval Simpson estimate already known.
  double refine(double a, double b, double fa, double fm, double fb, double whole, double tol,
                int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = eval(lm), frm = eval(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (std::abs(delta) <= 15.0 * tol || depth >= max_depth) {
      if (std::abs(delta) > 15.0 * tol) converged = false;
      return left + right + delta / 15.0;
    }
    return refine(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
           refine(m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
  }
};

}  // namespace

QuadratureResult adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                                  double rel_tol, double abs_floor, int max_depth) {
  if (!(rel_tol > 0.0) || !(abs_floor > 0.0))
    throw std::invalid_argument("adaptive_simpson: tolerances must be positive");
  if (a == b) return {0.0, true, 0};

  Worker worker{f, 0, true, max_depth};
  const double m = 0.5 * (a + b);
  const double fa = worker.eval(a), fm = worker.eval(m), fb = worker.eval(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double tol = std::max(abs_floor, rel_tol * std::abs(whole));
  const double value = worker.refine(a, b, fa, fm, fb, whole, tol, 0);
  return {value, worker.converged, worker.evaluations};
}

}  // namespace oblab
