#include "cglab/quadrature.hpp"

#include <cmath>
#include <sstream>

#include "cglab/error.hpp"

namespace cglab {

void QuadratureSpec::validate() const {
  if (!(rel_tol > 0.0)) throw InputError("quadrature rel_tol must be positive");
  if (max_subdivisions < 64) throw InputError("quadrature max_subdivisions must be >= 64");
}

namespace {

constexpr int kScanPoints = 257;
const double kInvPhi = (std::sqrt(5.0) - 1.0) / 2.0;

double golden_max(const std::function<double(double)>& f, double a, double b, double& fbest) {
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 80 && (b - a) > 1e-12 * (1.0 + std::abs(a) + std::abs(b)); ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  if (fc >= fd) {
    fbest = fc;
    return c;
  }
  fbest = fd;
  return d;
}

double checked(const std::function<double(double)>& logf, double x) {
  const double v = logf(x);
  if (std::isnan(v) || v == std::numeric_limits<double>::infinity()) {
    std::ostringstream os;
    os << "log-integrand is not finite at x = " << x;
    throw NumericalError(os.str(), x);
  }
  return v;
}

// Walks from the peak towards `bound`, returning where the integrand has
// dropped by cut_depth (or the bound, when the drop there exceeds edge_depth).
double walk(const std::function<double(double)>& logf, double peak, double bound, double step,
            double& log_peak, double cut_depth, double edge_depth) {
  const double dir = bound >= peak ? 1.0 : -1.0;
  double x = peak;
  double s = step;
  while (true) {
    double nx = x + dir * s;
    const bool at_bound = dir > 0 ? nx >= bound : nx <= bound;
    if (at_bound) nx = bound;
    const double v = checked(logf, nx);
    if (v > log_peak) log_peak = v;
    if (v < log_peak - cut_depth) return nx;
    if (at_bound) {
      if (v > log_peak - edge_depth) {
        std::ostringstream os;
        os << "integrand has not underflowed at the domain edge x = " << nx
           << " (relative log-mass " << v - log_peak << "); widen the domain";
        throw DomainError(os.str());
      }
      return nx;
    }
    x = nx;
    s *= 1.6;
  }
}

}  // namespace

MassWindow locate_mass(const std::function<double(double)>& logf, double lo, double hi,
                       double cut_depth, double edge_depth) {
  if (!(hi > lo)) throw InputError("locate_mass: empty interval");
  const double h = (hi - lo) / (kScanPoints - 1);
  int best = 0;
  double best_v = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < kScanPoints; ++i) {
    const double x = i + 1 == kScanPoints ? hi : lo + i * h;
    const double v = checked(logf, x);
    if (v > best_v) {
      best_v = v;
      best = i;
    }
  }
  if (!std::isfinite(best_v)) throw NumericalError("log-integrand is -inf on the whole interval", lo);

  const double a = std::max(lo, lo + (best - 1) * h);
  const double b = std::min(hi, lo + (best + 1) * h);
  double gv = 0.0;
  double peak = golden_max(logf, a, b, gv);
  if (best_v > gv) {
    peak = best == kScanPoints - 1 ? hi : lo + best * h;
    gv = best_v;
  }
  MassWindow w;
  w.peak = peak;
  w.log_peak = gv;
  const double step = h / 32.0;
  w.lo = peak > lo ? walk(logf, peak, lo, step, w.log_peak, cut_depth, edge_depth) : lo;
  w.hi = peak < hi ? walk(logf, peak, hi, step, w.log_peak, cut_depth, edge_depth) : hi;
  if (peak <= lo || peak >= hi) {
    // Mass piles against a bound: only acceptable if the bound itself is deep in the tail.
    throw DomainError("integrand maximum sits on the domain edge; widen the domain");
  }
  return w;
}

namespace {

std::vector<double> breakpoints_for(const MassWindow& w) {
  std::vector<double> bp;
  constexpr int kPieces = 8;
  for (int i = 0; i < kPieces; ++i) bp.push_back(w.lo + (w.peak - w.lo) * i / kPieces);
  for (int i = 0; i <= kPieces; ++i) bp.push_back(w.peak + (w.hi - w.peak) * i / kPieces);
  bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
  return bp;
}

template <std::size_t K, class F>
QuadratureOutcome<K> run_rule(F&& f, const MassWindow& w, const QuadratureSpec& quad) {
  if (quad.rule == QuadratureRule::simpson) {
    return integrate_simpson<K>(f, w.lo, w.hi, quad.rel_tol, quad.max_subdivisions);
  }
  const auto bp = breakpoints_for(w);
  return integrate_gauss_kronrod<K>(f, std::span<const double>(bp), quad.rel_tol, quad.max_subdivisions);
}

[[noreturn]] void fail(double tag, double err) {
  std::ostringstream os;
  os << "quadrature did not converge at " << tag << " (error estimate " << err << ")";
  throw NumericalError(os.str(), tag);
}

}  // namespace

double log_integrate(const std::function<double(double)>& logf, const MassWindow& window,
                     const QuadratureSpec& quad, double tag) {
  const double shift = window.log_peak;
  auto f = [&](double x) { return std::array<double, 1>{std::exp(logf(x) - shift)}; };
  const auto out = run_rule<1>(f, window, quad);
  if (!out.converged) fail(tag, out.error);
  if (!(out.value[0] > 0.0) || !std::isfinite(out.value[0])) fail(tag, out.error);
  return shift + std::log(out.value[0]);
}

double log_integrate(const std::function<double(double)>& logf, double lo, double hi,
                     const QuadratureSpec& quad, double tag) {
  return log_integrate(logf, locate_mass(logf, lo, hi), quad, tag);
}

DensityMoments density_moments(const std::function<double(double)>& logf, const MassWindow& window,
                               const QuadratureSpec& quad, double tag) {
  const double shift = window.log_peak;
  const double c = window.peak;
  auto f = [&](double x) {
    const double w = std::exp(logf(x) - shift);
    const double d = x - c;
    return std::array<double, 5>{w, w * d, w * d * d, w * d * d * d, w * d * d * d * d};
  };
  const auto out = run_rule<5>(f, window, quad);
  if (!out.converged) fail(tag, out.error);
  const auto& v = out.value;
  if (!(v[0] > 0.0)) fail(tag, out.error);
  const double m1 = v[1] / v[0], m2 = v[2] / v[0], m3 = v[3] / v[0], m4 = v[4] / v[0];
  DensityMoments dm;
  dm.log_mass = shift + std::log(v[0]);
  dm.mean = c + m1;
  dm.variance = m2 - m1 * m1;
  dm.third = m3 - 3.0 * m1 * m2 + 2.0 * m1 * m1 * m1;
  dm.fourth = m4 - 4.0 * m1 * m3 + 6.0 * m1 * m1 * m2 - 3.0 * m1 * m1 * m1 * m1;
  return dm;
}

}  // namespace cglab
