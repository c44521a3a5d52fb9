#pragma once

#include <cmath>
#include <cstddef>
#include <sstream>

#include "optomech/errors.hpp"

namespace optomech {

/// Adaptive Simpson quadrature to an absolute tolerance. Throws NumericError
/// when more than `max_panels` panels would be needed.
template <typename F>
double adaptive_simpson(F&& f, double a, double b, double abs_tol = 1e-10,
                        std::size_t max_panels = std::size_t{1} << 20) {
  if (a == b) return 0.0;
  std::size_t panels = 1;

  struct Rec {
    F& f;
    std::size_t& panels;
    std::size_t max_panels;

    double run(double a, double b, double fa, double fm, double fb, double whole, double tol, int depth) {
      const double m = 0.5 * (a + b);
      const double lm = 0.5 * (a + m);
      const double rm = 0.5 * (m + b);
      const double flm = f(lm);
      const double frm = f(rm);
      const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
      const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
      const double delta = left + right - whole;
      if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
      if (++panels > max_panels) {
        std::ostringstream os;
        os << "adaptive Simpson exceeded " << max_panels << " panels near t = " << m;
        throw NumericError(os.str(), m);
      }
      return run(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
             run(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
    }
  };

  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  Rec rec{f, panels, max_panels};
  return rec.run(a, b, fa, fm, fb, whole, abs_tol, 50);
}

}  // namespace optomech
