#include "gmhmm/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace gmhmm {

namespace {

constexpr double kReflect = 1.0;
constexpr double kExpand = 2.0;
constexpr double kContract = 0.5;
constexpr double kShrink = 0.5;

}  // namespace

NelderMeadResult nelder_mead(const std::function<double(const Vector&)>& f, const Vector& x0,
                             const NelderMeadOptions& opt) {
  const int n = static_cast<int>(x0.size());
  if (n < 1) throw InputError("nelder_mead: empty parameter vector");

  NelderMeadResult res;
  auto eval = [&](const Vector& x) {
    ++res.evaluations;
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  std::vector<Vector> simplex(static_cast<std::size_t>(n + 1), x0);
  std::vector<double> fv(static_cast<std::size_t>(n + 1));
  for (int i = 0; i < n; ++i) simplex[static_cast<std::size_t>(i + 1)](i) += opt.initial_step;
  for (int i = 0; i <= n; ++i) fv[static_cast<std::size_t>(i)] = eval(simplex[static_cast<std::size_t>(i)]);

  std::vector<int> order(static_cast<std::size_t>(n + 1));
  while (true) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return fv[static_cast<std::size_t>(a)] < fv[static_cast<std::size_t>(b)]; });
    const auto best = static_cast<std::size_t>(order.front());
    const auto worst = static_cast<std::size_t>(order.back());
    const auto second = static_cast<std::size_t>(order[static_cast<std::size_t>(n - 1)]);

    double size = 0.0;
    for (const auto& v : simplex) size = std::max(size, (v - simplex[best]).cwiseAbs().maxCoeff());
    const double spread = fv[worst] - fv[best];
    if (std::isfinite(spread) &&
        spread <= opt.ftol * (std::abs(fv[best]) + opt.ftol) && size <= opt.xtol) {
      res.converged = true;
      break;
    }
    if (res.evaluations >= opt.max_evals) break;

    Vector centroid = Vector::Zero(n);
    for (int i = 0; i <= n; ++i)
      if (static_cast<std::size_t>(i) != worst) centroid += simplex[static_cast<std::size_t>(i)];
    centroid /= n;

    const Vector xr = centroid + kReflect * (centroid - simplex[worst]);
    const double fr = eval(xr);
    if (fr < fv[best]) {
      const Vector xe = centroid + kExpand * (xr - centroid);
      const double fe = eval(xe);
      if (fe < fr) {
        simplex[worst] = xe;
        fv[worst] = fe;
      } else {
        simplex[worst] = xr;
        fv[worst] = fr;
      }
      continue;
    }
    if (fr < fv[second]) {
      simplex[worst] = xr;
      fv[worst] = fr;
      continue;
    }
    const bool outside = fr < fv[worst];
    const Vector xc = outside ? Vector(centroid + kContract * (xr - centroid))
                              : Vector(centroid + kContract * (simplex[worst] - centroid));
    const double fc = eval(xc);
    if (fc < (outside ? fr : fv[worst])) {
      simplex[worst] = xc;
      fv[worst] = fc;
      continue;
    }
    for (int i = 0; i <= n; ++i) {
      const auto ii = static_cast<std::size_t>(i);
      if (ii == best) continue;
      simplex[ii] = simplex[best] + kShrink * (simplex[ii] - simplex[best]);
      fv[ii] = eval(simplex[ii]);
    }
  }

  const auto it = std::min_element(fv.begin(), fv.end());
  const auto bi = static_cast<std::size_t>(std::distance(fv.begin(), it));
  res.x = simplex[bi];
  res.fx = fv[bi];
  return res;
}

}  // namespace gmhmm
