#include "robreg/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

#include "robreg/errors.hpp"

namespace robreg {

namespace {

constexpr double kNodes[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kKronrod[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for the nodes with odd index (1, 3, 5) and the centre.
constexpr double kGauss[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

Segment gauss_kronrod(const Integrand& f, double a, double b) {
  const double centre = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(centre);
  double kronrod = fc * kKronrod[7];
  double gauss = fc * kGauss[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kNodes[j];
    const double sum = f(centre - dx) + f(centre + dx);
    kronrod += kKronrod[j] * sum;
    if (j % 2 == 1) gauss += kGauss[j / 2] * sum;
  }
  return {a, b, kronrod * half, std::abs((kronrod - gauss) * half)};
}

}  // namespace

QuadratureResult integrate(const Integrand& f, double a, double b,
                           const QuadratureOptions& opt) {
  QuadratureResult out;
  if (a == b) {
    out.converged = true;
    return out;
  }
  std::priority_queue<Segment> heap;
  Segment first = gauss_kronrod(f, a, b);
  double total = first.value;
  double error = first.error;
  heap.push(first);
  out.evaluations = 15;
  int intervals = 1;
  while (error > std::max(opt.abs_tol, opt.rel_tol * std::abs(total)) &&
         intervals < opt.max_intervals) {
    Segment worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      // Interval cannot be split further.
      heap.push(worst);
      break;
    }
    Segment left = gauss_kronrod(f, worst.a, mid);
    Segment right = gauss_kronrod(f, mid, worst.b);
    out.evaluations += 30;
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++intervals;
  }
  // Re-sum to remove drift from the incremental updates.
  total = 0.0;
  error = 0.0;
  while (!heap.empty()) {
    total += heap.top().value;
    error += heap.top().error;
    heap.pop();
  }
  out.value = total;
  out.abs_error = error;
  out.converged = error <= std::max(opt.abs_tol, opt.rel_tol * std::abs(total));
  return out;
}

QuadratureResult integrate_upper_tail(const Integrand& f, double a,
                                      const QuadratureOptions& opt) {
  auto g = [&](double t) {
    if (t >= 1.0) return 0.0;
    const double one_minus = 1.0 - t;
    const double x = a + t / one_minus;
    if (!std::isfinite(x)) return 0.0;
    return f(x) / (one_minus * one_minus);
  };
  return integrate(g, 0.0, 1.0, opt);
}

double integrate_real_line(const Integrand& f, std::span<const double> breakpoints,
                           const QuadratureOptions& opt) {
  std::vector<double> cuts(breakpoints.begin(), breakpoints.end());
  if (cuts.empty()) cuts.push_back(0.0);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  double total = 0.0;
  auto add = [&](const QuadratureResult& r) {
    if (!r.converged) {
      throw NumericalError("quadrature did not converge (error estimate " +
                           std::to_string(r.abs_error) + ")");
    }
    total += r.value;
  };
  const double left = cuts.front();
  add(integrate_upper_tail([&](double x) { return f(2.0 * left - x); }, left, opt));
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    add(integrate(f, cuts[i], cuts[i + 1], opt));
  }
  add(integrate_upper_tail(f, cuts.back(), opt));
  return total;
}

}  // namespace robreg
