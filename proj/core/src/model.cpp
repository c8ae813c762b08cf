#include "pfgb/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pfgb/error.hpp"

namespace pfgb {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double logistic(double y) noexcept {
  if (y >= 0.0) return 1.0 / (1.0 + std::exp(-y));
  const double e = std::exp(y);
  return e / (1.0 + e);
}

// Root of x - r + (lambda/2) log(x/(1-x)) = 0, solved in the logit variable
// y = log(x/(1-x)) where the residual psi(y) = sigma(y) - r + lambda y / 2 is
// strictly increasing with psi' >= lambda / 2.  Newton steps are kept inside a
// shrinking bracket and replaced by bisection whenever they leave it.
double log_prox(double lambda, double r) {
  const double half = 0.5 * lambda;
  double lo = 2.0 * (r - 1.0) / lambda;
  double hi = 2.0 * r / lambda;
  const double r0 = std::clamp(r, 1e-12, 1.0 - 1e-12);
  double y = std::clamp(std::log(r0 / (1.0 - r0)), lo, hi);
  for (int it = 0; it < 200; ++it) {
    const double s = logistic(y);
    const double psi = s - r + half * y;
    if (std::abs(psi) <= 1e-14 * (1.0 + std::abs(r))) break;
    if (psi > 0.0) {
      hi = y;
    } else {
      lo = y;
    }
    const double dpsi = s * (1.0 - s) + half;
    double next = y - psi / dpsi;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == y || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(y))) {
      y = next;
      break;
    }
    y = next;
  }
  const double x = logistic(y);
  return std::clamp(x, std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
}

}  // namespace

void PotentialSpec::validate() const {
  if (!(c > 0.0) || !std::isfinite(c)) throw InvalidArgument("potential: c must be positive");
  if (!std::isfinite(u)) throw InvalidArgument("potential: u must be finite");
  if (!(0.0 <= o_star && o_star < iota_star && iota_star <= 1.0))
    throw InvalidArgument("potential: need 0 <= o_star < iota_star <= 1");
  if (setting == Potential::Logarithmic && !(o_star > 0.0 && iota_star < 1.0))
    throw InvalidArgument("potential: logarithmic setting needs o_star, iota_star in (0,1)");
}

void MobilitySpec::validate() const {
  if (kind == MobilityKind::KobayashiSafeguarded) {
    if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw InvalidArgument("mobility: kappa must be >= 0");
    return;
  }
  if (!(a0 > 0.0)) throw InvalidArgument("mobility: constant a0 must be positive");
  if (!(a >= 0.0) || !(b >= 0.0)) throw InvalidArgument("mobility: constant a, b must be >= 0");
}

double gamma_eval(const PotentialSpec& spec, double w) {
  switch (spec.setting) {
    case Potential::Polynomial:
      return 0.0;
    case Potential::Indicator:
      return (w >= 0.0 && w <= 1.0) ? 0.0 : kInf;
    case Potential::Logarithmic:
      if (w < 0.0 || w > 1.0 || std::isnan(w)) return kInf;
      if (w == 0.0 || w == 1.0) return 1.0;
      return 0.5 * (w * std::log(w) + (1.0 - w) * std::log1p(-w));
  }
  return kInf;
}

Interval gamma_subdifferential(const PotentialSpec& spec, double w) {
  switch (spec.setting) {
    case Potential::Polynomial:
      return {0.0, 0.0};
    case Potential::Indicator:
      if (w < 0.0 || w > 1.0) return {1.0, 0.0};
      if (w == 0.0) return {-kInf, 0.0};
      if (w == 1.0) return {0.0, kInf};
      return {0.0, 0.0};
    case Potential::Logarithmic: {
      if (!(w > 0.0 && w < 1.0)) return {1.0, 0.0};
      const double d = 0.5 * std::log(w / (1.0 - w));
      return {d, d};
    }
  }
  return {1.0, 0.0};
}

double gamma_prox(const PotentialSpec& spec, double lambda, double r) {
  if (!(lambda > 0.0)) throw InvalidArgument("gamma_prox: lambda must be positive");
  switch (spec.setting) {
    case Potential::Polynomial:
      return r;
    case Potential::Indicator:
      return std::clamp(r, 0.0, 1.0);
    case Potential::Logarithmic:
      return log_prox(lambda, r);
  }
  return r;
}

double g_eval(const PotentialSpec& spec, double w, double eta) {
  const double coupling = 0.5 * (w - eta) * (w - eta);
  if (spec.setting == Potential::Polynomial) {
    const double well = 0.25 * w * w * (w - 1.0) * (w - 1.0) - spec.u * w * w * (w / 3.0 - 0.5);
    return spec.c * well + coupling;
  }
  const double s = w - spec.u - 0.5;
  return -0.5 * spec.c * s * s + coupling;
}

Vec2 grad_g(const PotentialSpec& spec, double w, double eta) {
  const double g_eta = eta - w;
  if (spec.setting == Potential::Polynomial) {
    return {spec.c * w * (w - 1.0) * (w - spec.u - 0.5) + (w - eta), g_eta};
  }
  return {-spec.c * (w - spec.u - 0.5) + (w - eta), g_eta};
}

Sym2 hess_g(const PotentialSpec& spec, double w, double /*eta*/) {
  if (spec.setting == Potential::Polynomial) {
    const double g_ww = spec.c * (3.0 * w * w - 3.0 * w + 0.5 - spec.u * (2.0 * w - 1.0)) + 1.0;
    return {g_ww, -1.0, 1.0};
  }
  return {1.0 - spec.c, -1.0, 1.0};
}

double spectral_norm(const Sym2& m) noexcept {
  const double mean = 0.5 * (m[0] + m[2]);
  const double rad = std::hypot(0.5 * (m[0] - m[2]), m[1]);
  return std::max(std::abs(mean + rad), std::abs(mean - rad));
}

C2NormEstimate estimate_c2_norm(const PotentialSpec& spec, int resolution) {
  if (resolution < 2) throw InvalidArgument("estimate_c2_norm: resolution must be >= 2");
  C2NormEstimate est;
  est.resolution = resolution;
  const double step = 1.0 / (resolution - 1);
  for (int i = 0; i < resolution; ++i) {
    const double w = i * step;
    for (int j = 0; j < resolution; ++j) {
      const double eta = j * step;
      const Vec2 gr = grad_g(spec, w, eta);
      est.sup_value = std::max(est.sup_value, std::abs(g_eval(spec, w, eta)));
      est.sup_gradient = std::max(est.sup_gradient, std::hypot(gr[0], gr[1]));
      est.sup_hessian = std::max(est.sup_hessian, spectral_norm(hess_g(spec, w, eta)));
    }
  }
  est.value = std::max({est.sup_value, est.sup_gradient, est.sup_hessian});
  return est;
}

double estimate_c_star(const PotentialSpec& spec, int resolution) {
  const double step = 1.0 / (resolution - 1);
  double lowest = kInf;
  for (int i = 0; i < resolution; ++i) {
    const double w = i * step;
    const double gw = gamma_eval(spec, w);
    for (int j = 0; j < resolution; ++j) lowest = std::min(lowest, gw + g_eval(spec, w, j * step));
  }
  return lowest - 1e-3 * (1.0 + std::abs(lowest));
}

MobilityValues mobility_eval(const MobilitySpec& spec, double w, double eta) {
  MobilityValues m;
  if (spec.kind == MobilityKind::Constant) {
    m.a0 = spec.a0;
    m.a = spec.a;
    m.b = spec.b;
    return m;
  }
  m.a = 0.5 * (eta * eta + spec.kappa);
  m.a0 = m.a;
  m.b = 0.5 * (w * w + spec.kappa);
  m.grad_a = {0.0, eta};
  m.grad_b = {w, 0.0};
  return m;
}

Vec2 mobility_curvature_bounds(const MobilitySpec& spec) {
  if (spec.kind == MobilityKind::Constant) return {0.0, 0.0};
  return {1.0, 1.0};
}

double delta1(const MobilitySpec& spec) {
  if (spec.kind == MobilityKind::Constant) return std::min(spec.a0, spec.b);
  return 0.5 * spec.kappa;
}

double delta0(const MobilitySpec& spec) {
  if (spec.kind == MobilityKind::Constant) return std::min(spec.a0, spec.a);
  return 0.5 * spec.kappa;
}

double delta_star(const MobilitySpec& spec, double radius) {
  if (spec.kind == MobilityKind::Constant) return spec.b;
  return 0.5 * (radius * radius + spec.kappa);
}

double alpha0_floor(const MobilitySpec& spec) {
  if (spec.kind == MobilityKind::Constant) return spec.a0;
  return 0.5 * spec.kappa;
}

ModelSpec ModelSpec::make(const PotentialSpec& potential, const MobilitySpec& mobility, int resolution) {
  potential.validate();
  mobility.validate();
  ModelSpec m;
  m.potential = potential;
  m.mobility = mobility;
  const C2NormEstimate est = estimate_c2_norm(potential, resolution);
  m.c2_norm = est.value;
  m.c2_resolution = est.resolution;
  m.c_star = estimate_c_star(potential, resolution);
  return m;
}

bool ValidationReport::ok() const noexcept {
  return std::all_of(items.begin(), items.end(), [](const ValidationItem& i) { return i.passed; });
}

void ValidationReport::add(std::string name, bool passed, std::string detail) {
  items.push_back({std::move(name), passed, std::move(detail)});
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  for (const auto& i : items) {
    if (i.passed) continue;
    os << i.name;
    if (!i.detail.empty()) os << " (" << i.detail << ")";
    os << "; ";
  }
  return os.str();
}

ValidationReport check_a4(const ModelSpec& model) {
  const PotentialSpec& p = model.potential;
  const MobilitySpec& mob = model.mobility;
  ValidationReport rep;
  auto num = [](double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
  };

  const Interval d_lo = gamma_subdifferential(p, p.o_star);
  const Interval d_hi = gamma_subdifferential(p, p.iota_star);
  rep.add("o_star in D(dgamma)", !d_lo.empty());
  rep.add("iota_star in D(dgamma)", !d_hi.empty());

  const Vec2 g_lo = grad_g(p, p.o_star, 0.0);
  const Vec2 g_hi = grad_g(p, p.iota_star, 1.0);
  rep.add("dgamma(o_star) meets (-inf, -g_w(o_star,0)]", !d_lo.empty() && d_lo.lo <= -g_lo[0],
          "inf dgamma = " + num(d_lo.lo) + ", bound = " + num(-g_lo[0]));
  rep.add("g_eta(o_star,0) <= 0", g_lo[1] <= 0.0, num(g_lo[1]));
  rep.add("dgamma(iota_star) meets [-g_w(iota_star,1), inf)", !d_hi.empty() && d_hi.hi >= -g_hi[0],
          "sup dgamma = " + num(d_hi.hi) + ", bound = " + num(-g_hi[0]));
  rep.add("g_eta(iota_star,1) >= 0", g_hi[1] >= 0.0, num(g_hi[1]));

  const MobilityValues m_lo = mobility_eval(mob, p.o_star, 0.0);
  const MobilityValues m_hi = mobility_eval(mob, p.iota_star, 1.0);
  rep.add("alpha_w(o_star,0) <= 0", m_lo.grad_a[0] <= 0.0, num(m_lo.grad_a[0]));
  rep.add("alpha_eta(o_star,0) <= 0", m_lo.grad_a[1] <= 0.0, num(m_lo.grad_a[1]));
  rep.add("beta_w(o_star,0) <= 0", m_lo.grad_b[0] <= 0.0, num(m_lo.grad_b[0]));
  rep.add("beta_eta(o_star,0) <= 0", m_lo.grad_b[1] <= 0.0, num(m_lo.grad_b[1]));
  rep.add("alpha_w(iota_star,1) >= 0", m_hi.grad_a[0] >= 0.0, num(m_hi.grad_a[0]));
  rep.add("alpha_eta(iota_star,1) >= 0", m_hi.grad_a[1] >= 0.0, num(m_hi.grad_a[1]));
  rep.add("beta_w(iota_star,1) >= 0", m_hi.grad_b[0] >= 0.0, num(m_hi.grad_b[0]));
  rep.add("beta_eta(iota_star,1) >= 0", m_hi.grad_b[1] >= 0.0, num(m_hi.grad_b[1]));
  return rep;
}

std::string to_string(Potential p) {
  switch (p) {
    case Potential::Polynomial:
      return "g1";
    case Potential::Logarithmic:
      return "g2";
    case Potential::Indicator:
      return "g3";
  }
  return "?";
}

std::string to_string(MobilityKind k) {
  return k == MobilityKind::Constant ? "constant" : "kobayashi";
}

}  // namespace pfgb
