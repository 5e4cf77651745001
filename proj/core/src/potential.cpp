#include "cglab/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "cglab/error.hpp"

namespace cglab {

namespace {

// exp(-core) < 1e-18 at the truncation edge, relative to the core minimum.
const double kTailDepth = std::log(1e18);

double sgn(double x) { return (x > 0.0) - (x < 0.0); }

// Largest value of f on [-L, L]: grid scan with golden refinement of every
// local maximum found on the grid.
double grid_sup(const std::function<double(double)>& f, double L, std::size_t n) {
  const double h = 2.0 * L / static_cast<double>(n - 1);
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = f(-L + static_cast<double>(i) * h);
  double best = *std::max_element(v.begin(), v.end());
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(v[i] >= v[i - 1] && v[i] >= v[i + 1])) continue;
    double a = -L + static_cast<double>(i - 1) * h, b = a + 2.0 * h;
    double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < 60; ++it) {
      if (fc >= fd) {
        b = d, d = c, fd = fc, c = b - inv_phi * (b - a), fc = f(c);
      } else {
        a = c, c = d, fc = fd, d = a + inv_phi * (b - a), fd = f(d);
      }
    }
    best = std::max({best, fc, fd});
  }
  return best;
}

double default_halfwidth(const SmoothFunction& core) {
  double lo_min = core.f(0.0);
  for (double L = 0.05;; L += 0.05) {
    lo_min = std::min({lo_min, core.f(L), core.f(-L)});
    if (core.f(L) - lo_min >= kTailDepth && core.f(-L) - lo_min >= kTailDepth) return L;
    if (L > 1e4) throw DomainError("core does not grow; cannot choose a truncation radius");
  }
}

}  // namespace

std::string_view to_string(PotentialKind kind) {
  switch (kind) {
    case PotentialKind::gaussian: return "gaussian";
    case PotentialKind::quadratic_plus_power: return "quadratic-plus-power";
    case PotentialKind::double_well: return "double-well";
    case PotentialKind::quadratic_plus_cosine: return "quadratic-plus-cosine";
    case PotentialKind::custom: return "custom";
  }
  return "custom";
}

void PotentialSpec::finalize(double halfwidth) {
  if (!(p_ >= 2.0)) throw InputError("growth exponent p must be >= 2");
  if (!(c_ > 0.0)) throw InputError("core convexity constant c must be positive");
  halfwidth_ = halfwidth > 0.0 ? halfwidth : default_halfwidth(core_);
  if (!full_.f) {
    auto core = core_;
    auto pert = pert_;
    full_.f = [core, pert](double x) { return core.f(x) + pert.f(x); };
    full_.d1 = [core, pert](double x) { return core.d1(x) + pert.d1(x); };
    full_.d2 = [core, pert](double x) {
      if (!pert.d2) throw InputError("perturbation has no second derivative");
      return core.d2(x) + pert.d2(x);
    };
  }
  constexpr std::size_t kScan = 20001;
  auto abs_f = [this](double x) { return std::abs(pert_.f(x)); };
  auto abs_d = [this](double x) { return std::abs(pert_.d1(x)); };
  pert_sup_ = grid_sup(abs_f, halfwidth_, kScan) * (1.0 + 1e-12);
  pert_slope_sup_ = grid_sup(abs_d, halfwidth_, kScan) * (1.0 + 1e-12);
}

PotentialSpec PotentialSpec::gaussian() {
  PotentialSpec s = quadratic_plus_power(1.0, 0.0, 2.0);
  s.kind_ = PotentialKind::gaussian;
  s.name_ = "gaussian";
  return s;
}

PotentialSpec PotentialSpec::quadratic_plus_power(double a, double b, double p) {
  if (!(a > 0.0) || !(b >= 0.0) || !(p >= 2.0)) {
    throw InputError("quadratic-plus-power needs a > 0, b >= 0, p >= 2");
  }
  if (b == 0.0 && p > 2.0) throw InputError("quadratic-plus-power with b = 0 is not p-convex for p > 2");
  PotentialSpec s;
  s.kind_ = PotentialKind::quadratic_plus_power;
  std::ostringstream os;
  os << "quadratic-plus-power(a=" << a << ",b=" << b << ",p=" << p << ")";
  s.name_ = os.str();
  s.p_ = p;
  const double curv = b * p * (p - 1.0);
  s.c_ = p == 2.0 ? 0.5 * (a + curv) : std::min(a, curv);
  s.core_.f = [a, b, p](double x) { return 0.5 * a * x * x + b * std::pow(std::abs(x), p); };
  s.core_.d1 = [a, b, p](double x) { return a * x + b * p * std::pow(std::abs(x), p - 1.0) * sgn(x); };
  s.core_.d2 = [a, curv, p](double x) {
    return a + (p == 2.0 ? curv : curv * std::pow(std::abs(x), p - 2.0));
  };
  s.pert_.f = [](double) { return 0.0; };
  s.pert_.d1 = [](double) { return 0.0; };
  s.pert_.d2 = [](double) { return 0.0; };
  s.full_ = s.core_;
  s.finalize(0.0);
  return s;
}

PotentialSpec PotentialSpec::quadratic_plus_cosine(double a, double b) {
  if (!(a > 0.0)) throw InputError("quadratic-plus-cosine needs a > 0");
  PotentialSpec s;
  s.kind_ = PotentialKind::quadratic_plus_cosine;
  std::ostringstream os;
  os << "quadratic-plus-cosine(a=" << a << ",b=" << b << ")";
  s.name_ = os.str();
  s.p_ = 2.0;
  s.c_ = 0.5 * a;
  s.core_.f = [a](double x) { return 0.5 * a * x * x; };
  s.core_.d1 = [a](double x) { return a * x; };
  s.core_.d2 = [a](double) { return a; };
  s.pert_.f = [b](double x) { return b * std::cos(x); };
  s.pert_.d1 = [b](double x) { return -b * std::sin(x); };
  s.pert_.d2 = [b](double x) { return -b * std::cos(x); };
  s.finalize(0.0);
  return s;
}

PotentialSpec PotentialSpec::custom(std::string name, double p, double c, SmoothFunction core,
                                    SmoothFunction perturbation, double halfwidth) {
  if (!core.f || !core.d1 || !core.d2) throw InputError("custom core needs value, slope and curvature");
  if (!perturbation.f || !perturbation.d1) throw InputError("custom perturbation needs value and slope");
  PotentialSpec s;
  s.kind_ = PotentialKind::custom;
  s.name_ = std::move(name);
  s.p_ = p;
  s.c_ = c;
  s.core_ = std::move(core);
  s.pert_ = std::move(perturbation);
  s.finalize(halfwidth);
  return s;
}

double double_well_matching_radius() { return std::sqrt(15.0 / 11.0); }

PotentialSpec make_double_well() {
  const double a2 = 15.0 / 11.0;
  const double a = std::sqrt(a2);
  const double offset = (a2 - 1.0) * (a2 - 1.0) - 0.5 * a2 - a2 * a2 / 12.0;

  PotentialSpec s = PotentialSpec::custom(
      "double-well", 4.0, 1.0,
      SmoothFunction{
          [a, offset](double x) {
            return std::abs(x) >= a ? (x * x - 1.0) * (x * x - 1.0) : offset + 0.5 * x * x + x * x * x * x / 12.0;
          },
          [a](double x) { return std::abs(x) >= a ? 4.0 * x * (x * x - 1.0) : x + x * x * x / 3.0; },
          [a](double x) { return std::abs(x) >= a ? 12.0 * x * x - 4.0 : 1.0 + x * x; }},
      SmoothFunction{
          [a, offset](double x) {
            if (std::abs(x) >= a) return 0.0;
            return (x * x - 1.0) * (x * x - 1.0) - (offset + 0.5 * x * x + x * x * x * x / 12.0);
          },
          [a](double x) {
            if (std::abs(x) >= a) return 0.0;
            return 4.0 * x * (x * x - 1.0) - (x + x * x * x / 3.0);
          },
          [a](double x) {
            if (std::abs(x) >= a) return 0.0;
            return 12.0 * x * x - 4.0 - (1.0 + x * x);
          }});
  s.kind_ = PotentialKind::double_well;
  s.full_.f = [](double x) { return (x * x - 1.0) * (x * x - 1.0); };
  s.full_.d1 = [](double x) { return 4.0 * x * (x * x - 1.0); };
  s.full_.d2 = [](double x) { return 12.0 * x * x - 4.0; };
  return s;
}

PotentialSpec PotentialSpec::with_halfwidth(double halfwidth) const {
  if (!(halfwidth > 0.0)) throw InputError("halfwidth must be positive");
  PotentialSpec s = *this;
  s.finalize(halfwidth);
  return s;
}

void PotentialSpec::check(double x) const {
  if (!contains(x)) {
    std::ostringstream os;
    os << name_ << ": x = " << x << " outside the truncated domain [-" << halfwidth_ << ", " << halfwidth_ << "]";
    throw DomainError(os.str());
  }
}

double PotentialSpec::eval(double x, int order) const {
  check(x);
  switch (order) {
    case 0: return full_.f(x);
    case 1: return full_.d1(x);
    case 2: return full_.d2(x);
    default: throw InputError("derivative order must be 0, 1 or 2");
  }
}

double PotentialSpec::core(double x, int order) const {
  check(x);
  switch (order) {
    case 0: return core_.f(x);
    case 1: return core_.d1(x);
    case 2: return core_.d2(x);
    default: throw InputError("derivative order must be 0, 1 or 2");
  }
}

double PotentialSpec::perturbation(double x, int order) const {
  check(x);
  switch (order) {
    case 0: return pert_.f(x);
    case 1: return pert_.d1(x);
    default: throw InputError("perturbation derivative order must be 0 or 1");
  }
}

TabulatedPotential::TabulatedPotential(UniformGrid grid, std::vector<double> values, double p, double c,
                                       int iteration_count, double normalization_offset)
    : grid_(grid),
      values_(std::move(values)),
      p_(p),
      c_(c),
      iteration_count_(iteration_count),
      offset_(normalization_offset) {
  if (values_.size() != grid_.n_nodes) throw InputError("tabulated potential: value count does not match grid");
  if (!(grid_.step() > 0.0)) throw InputError("tabulated potential: grid step must be positive");
  for (double v : values_) {
    if (!std::isfinite(v)) throw InputError("tabulated potential: non-finite value");
  }
  if (iteration_count_ < 0) throw InputError("iteration count must be >= 0");
  spline_ = CubicSpline(grid_, values_);
}

double TabulatedPotential::block_size() const noexcept { return std::ldexp(1.0, iteration_count_); }

double TabulatedPotential::eval(double x, int order) const {
  if (!contains(x)) {
    std::ostringstream os;
    os << "x = " << x << " outside the tabulated grid [" << grid_.min << ", " << grid_.max << "]";
    throw DomainError(os.str());
  }
  if (order == 2) {
    const double h = grid_.step();
    if (x - h < grid_.min - 1e-12 * h || x + h > grid_.max + 1e-12 * h) {
      throw BoundaryError("second difference needs one grid step on both sides");
    }
    const double lo = std::max(x - h, grid_.min), hi = std::min(x + h, grid_.max);
    return (spline_(lo) - 2.0 * spline_(x) + spline_(hi)) / (h * h);
  }
  if (order != 0 && order != 1) throw InputError("derivative order must be 0, 1 or 2");
  return spline_.eval(x, order);
}

TabulatedPotential tabulate(const PotentialSpec& psi, const UniformGrid& grid) {
  std::vector<double> v(grid.n_nodes);
  for (std::size_t i = 0; i < grid.n_nodes; ++i) v[i] = psi.eval(grid.node(i), 0);
  return TabulatedPotential(grid, std::move(v), psi.p(), psi.c(), 0, 0.0);
}

TabulatedPotential coarse_site_potential(const TabulatedPotential& v) {
  std::vector<double> scaled = v.values();
  const double k = v.block_size();
  for (double& x : scaled) x *= k;
  return TabulatedPotential(v.grid(), std::move(scaled), v.p(), v.c(), 0, v.normalization_offset() * k);
}

double eval(const Potential& potential, double x, int order) {
  return std::visit([&](const auto& v) { return v.eval(x, order); }, potential);
}

bool contains(const Potential& potential, double x) {
  return std::visit([&](const auto& v) { return v.contains(x); }, potential);
}

std::pair<double, double> domain(const Potential& potential) {
  if (const auto* s = std::get_if<PotentialSpec>(&potential)) {
    return {-s->domain_halfwidth(), s->domain_halfwidth()};
  }
  const auto& t = std::get<TabulatedPotential>(potential);
  return {t.grid().min, t.grid().max};
}

double growth_exponent(const Potential& potential) {
  return std::visit([](const auto& v) { return v.p(); }, potential);
}

double convexity_constant(const Potential& potential) {
  return std::visit([](const auto& v) { return v.c(); }, potential);
}

OscResult osc(const std::function<double(double)>& f, double halfwidth, std::size_t n) {
  if (!(halfwidth > 0.0) || n < 3) throw InputError("osc needs a positive halfwidth and n >= 3");
  auto neg = [&f](double x) { return -f(x); };
  auto absf = [&f](double x) { return std::abs(f(x)); };
  const double sup = grid_sup(f, halfwidth, n);
  const double inf = -grid_sup(neg, halfwidth, n);
  const double inner = grid_sup(absf, halfwidth, 4001);
  const double outer = grid_sup(absf, 2.0 * halfwidth, 8001);
  if (!std::isfinite(sup) || !std::isfinite(inf) || outer > 2.0 * inner + 1.0) {
    throw UnboundedError("perturbation grows towards the domain edge; it is not bounded");
  }
  return OscResult{sup - inf, 2.0 * halfwidth / static_cast<double>(n - 1)};
}

OscResult osc(const PotentialSpec& psi) { return osc(psi.perturbation_function().f, psi.domain_halfwidth()); }

}  // namespace cglab
