// Energy densities f(x, xi) with linear growth, their recession functions,
// admissibility validation and the stationary random checkerboard model.
#pragma once

#include "phasehom/types.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace phasehom {

/// Profile phi of a radial density f(x, xi) = a(x) * phi(|xi|).
/// `slope` is phi'. For every catalog profile phi(sqrt(q)) is concave in q,
/// which is what the reweighted quadratic u-solver relies on.
struct RadialProfile {
  std::string name;
  double (*value)(double) = nullptr;
  double (*slope)(double) = nullptr;
  double scale = 1.0;  // multiplies both value and slope

  double operator()(double s) const { return scale * value(s); }
  double derivative(double s) const { return scale * slope(s); }
};

namespace profiles {

inline RadialProfile linear() {
  return {"linear", [](double s) { return s; }, [](double) { return 1.0; }, 1.0};
}

inline RadialProfile area() {
  return {"area", [](double s) { return std::sqrt(1.0 + s * s); },
          [](double s) { return s / std::sqrt(1.0 + s * s); }, 1.0};
}

inline RadialProfile sqrtsum() {
  return {"sqrtsum", [](double s) { return s + std::sqrt(s); },
          [](double s) { return 1.0 + 0.5 / std::sqrt(std::max(s, 1e-300)); }, 1.0};
}

}  // namespace profiles

/// Admissible density in the class F(C, alpha). Immutable, cheap to copy
/// (shared implementation), safe for concurrent evaluation.
class Integrand {
 public:
  using EvalFn = std::function<double(const Point&, const Grad&)>;
  using CoefficientFn = std::function<double(const Point&)>;

  struct Constants {
    double C = 1.0;
    double alpha = 0.5;
    bool positively_homogeneous = false;
  };

  static Integrand generic(std::string id, EvalFn eval, Constants constants) {
    auto impl = std::make_shared<Impl>();
    impl->id = std::move(id);
    impl->eval = std::move(eval);
    impl->constants = constants;
    check_constants(constants);
    return Integrand(std::move(impl));
  }

  /// f(x, xi) = a(x) * phi(|xi|), |.| the Frobenius norm.
  static Integrand radial(std::string id, CoefficientFn coefficient, RadialProfile profile,
                          Constants constants) {
    auto impl = std::make_shared<Impl>();
    impl->id = std::move(id);
    impl->coefficient = std::move(coefficient);
    impl->profile = std::move(profile);
    impl->eval = [a = impl->coefficient, phi = *impl->profile](const Point& x, const Grad& xi) {
      return a(x) * phi(xi.norm());
    };
    impl->constants = constants;
    check_constants(constants);
    return Integrand(std::move(impl));
  }

  /// Copy with a closed-form recession function attached.
  Integrand with_recession(const Integrand& recession) const {
    if (!recession.positively_homogeneous())
      throw PreconditionError("recession density must be positively 1-homogeneous");
    auto impl = std::make_shared<Impl>(*impl_);
    impl->recession = std::make_shared<const Integrand>(recession);
    return Integrand(std::move(impl));
  }

  Integrand without_recession() const {
    auto impl = std::make_shared<Impl>(*impl_);
    impl->recession.reset();
    return Integrand(std::move(impl));
  }

  Integrand renamed(std::string id) const {
    auto impl = std::make_shared<Impl>(*impl_);
    impl->id = std::move(id);
    return Integrand(std::move(impl));
  }

  /// Unchecked evaluation.
  double operator()(const Point& x, const Grad& xi) const { return impl_->eval(x, xi); }

  const std::string& id() const { return impl_->id; }
  double C() const { return impl_->constants.C; }
  double alpha() const { return impl_->constants.alpha; }
  const Constants& constants() const { return impl_->constants; }
  bool positively_homogeneous() const { return impl_->constants.positively_homogeneous; }
  bool has_closed_recession() const { return impl_->recession != nullptr || positively_homogeneous(); }

  /// Closed-form recession density; a 1-homogeneous density is its own recession.
  std::optional<Integrand> recession() const {
    if (impl_->recession) return *impl_->recession;
    if (positively_homogeneous()) return *this;
    return std::nullopt;
  }

  bool is_radial() const { return impl_->profile.has_value(); }
  double coefficient(const Point& x) const { return impl_->coefficient(x); }
  const CoefficientFn& coefficient_fn() const { return impl_->coefficient; }
  const RadialProfile& profile() const { return *impl_->profile; }

 private:
  struct Impl {
    std::string id;
    EvalFn eval;
    Constants constants;
    CoefficientFn coefficient;
    std::optional<RadialProfile> profile;
    std::shared_ptr<const Integrand> recession;
  };

  explicit Integrand(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

  static void check_constants(const Constants& c) {
    if (!(c.C > 0.0) || !std::isfinite(c.C)) throw DomainError("growth constant C must be positive");
    if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw DomainError("recession exponent alpha must lie in (0,1)");
  }

  std::shared_ptr<const Impl> impl_;
};

/// f(x, xi) with input validation.
inline double eval_density(const Integrand& g, const Point& x, const Grad& xi) {
  if (!all_finite(x) || !all_finite(xi)) throw DomainError("eval_density: non-finite input");
  return g(x, xi);
}

// ---------------------------------------------------------------------------
// Catalog

inline Integrand euclid() {
  return Integrand::radial("euclid", [](const Point&) { return 1.0; }, profiles::linear(),
                           {1.0, 0.5, true});
}

inline Integrand area() {
  return Integrand::radial("area", [](const Point&) { return 1.0; }, profiles::area(), {1.0, 0.5, false})
      .with_recession(euclid());
}

/// |xi| + |xi|^{1/2}; in F(2, 1/2) with recession |xi|.
inline Integrand sqrtsum() {
  return Integrand::radial("sqrtsum", [](const Point&) { return 1.0; }, profiles::sqrtsum(),
                           {2.0, 0.5, false})
      .with_recession(euclid());
}

namespace detail {

inline std::string format_number(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace detail

/// Density a(x) * base(x, xi) with a piecewise constant in x_dir: a1 on
/// [0, period/2) + period Z, a2 on the other half.
inline Integrand laminate(double a1, double a2, double period, int dir, const Integrand& base) {
  if (!(a1 > 0.0) || !(a2 > 0.0)) throw DomainError("laminate: coefficients must be positive");
  if (!(period > 0.0)) throw DomainError("laminate: period must be positive");
  if (dir < 0 || dir >= kMaxDim) throw DomainError("laminate: direction out of range");
  auto a = [a1, a2, period, dir](const Point& x) {
    if (dir >= x.size()) return a1;
    const double t = x(dir) / period;
    return (t - std::floor(t)) < 0.5 ? a1 : a2;
  };
  const double amax = std::max(a1, a2), amin = std::min(a1, a2);
  Integrand::Constants c{base.C() * std::max(amax, 1.0 / amin), base.alpha(), base.positively_homogeneous()};
  std::string id = "laminate:" + detail::format_number(a1) + "," + detail::format_number(a2) + "," +
                   detail::format_number(period) + "," + std::to_string(dir) + "," + base.id();

  auto build = [&](const Integrand& b, std::string name, Integrand::Constants cc) {
    if (b.is_radial()) {
      auto ab = b.coefficient_fn();
      return Integrand::radial(std::move(name), [a, ab](const Point& x) { return a(x) * ab(x); },
                               b.profile(), cc);
    }
    return Integrand::generic(std::move(name), [a, b](const Point& x, const Grad& xi) { return a(x) * b(x, xi); },
                              cc);
  };

  Integrand out = build(base, id, c);
  if (!base.positively_homogeneous()) {
    if (auto rec = base.recession()) {
      Integrand::Constants rc{rec->C() * std::max(amax, 1.0 / amin), rec->alpha(), true};
      out = out.with_recession(build(*rec, "recession(" + id + ")", rc));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Recession

struct RecessionValue {
  double value = 0.0;
  double error_bound = 0.0;  // 0 for closed-form recessions
};

inline constexpr double kDefaultRecessionCap = 1e8;

/// Constant M with |f_inf(x, e) - f(x, t e)/t| <= M / t^alpha for |e| = 1 and t >= 1,
/// derived from the upper growth bound and the recession rate inequality.
inline double recession_rate_constant(const Integrand& g) {
  return g.C() * (1.0 + std::pow(2.0 * g.C(), 1.0 - g.alpha()));
}

/// f(x, T xi)/T with the smallest T whose a-priori bound meets tol, clipped to cap.
/// Never throws on an unresolved bound; reports it instead.
inline RecessionValue recession_with_bound(const Integrand& g, const Point& x, const Grad& xi, double tol,
                                           double cap = kDefaultRecessionCap) {
  const double norm = xi.norm();
  if (norm == 0.0) return {0.0, 0.0};
  if (auto rec = g.recession()) return {(*rec)(x, xi), 0.0};
  const double M = recession_rate_constant(g);
  // |xi| * M / (T |xi|)^alpha <= tol  and  T |xi| >= 1.
  double s = std::max(1.0, std::pow(M * norm / tol, 1.0 / g.alpha()));
  double T = s / norm;
  T = std::min(T, cap);
  s = T * norm;
  const double bound = norm * M / std::pow(std::max(s, 1.0), g.alpha());
  Grad scaled = xi * T;
  return {g(x, scaled) / T, bound};
}

inline double eval_recession(const Integrand& g, const Point& x, const Grad& xi, double tol,
                             double cap = kDefaultRecessionCap) {
  if (!(tol > 0.0)) throw DomainError("eval_recession: tol must be positive");
  if (!all_finite(x) || !all_finite(xi)) throw DomainError("eval_recession: non-finite input");
  const RecessionValue r = recession_with_bound(g, x, xi, tol, cap);
  if (r.error_bound > tol)
    throw UnresolvedRecessionError("eval_recession: T cap reached before tolerance", r.error_bound);
  return r.value;
}

/// Recession density as an integrand: the closed form when available, otherwise
/// a numerical limit at tolerance `tol`. Radial densities stay radial.
inline Integrand recession_integrand(const Integrand& g, double tol = 1e-6, double cap = kDefaultRecessionCap) {
  if (auto rec = g.recession()) return *rec;
  Integrand::Constants c{g.C(), g.alpha(), true};
  const std::string id = "recession(" + g.id() + ")";
  if (g.is_radial()) {
    // a(x) phi(T s)/T -> a(x) kappa s with kappa = lim phi(t)/t.
    const RadialProfile& phi = g.profile();
    const double M = recession_rate_constant(g);
    double s = std::max(1.0, std::pow(M / tol, 1.0 / g.alpha()));
    s = std::min(s, cap);
    RadialProfile lin = profiles::linear();
    lin.scale = phi(s) / s;
    return Integrand::radial(id, g.coefficient_fn(), lin, c);
  }
  return Integrand::generic(id, [g, tol, cap](const Point& x, const Grad& xi) {
    return recession_with_bound(g, x, xi, tol, cap).value;
  }, c);
}

// ---------------------------------------------------------------------------
// Validation

struct ValidationSpec {
  int num_x = 8;
  int num_xi = 32;
  double radius = 10.0;
  std::vector<double> t_values{1.0, 10.0, 100.0, 1000.0};
  int dim = 2;         // n
  int components = 1;  // N
  std::uint64_t seed = 12345;
  double recession_tol = 1e-6;
};

struct ValidationReport {
  double growth_lower_margin = -std::numeric_limits<double>::infinity();  // C^-1|xi| - f
  double growth_upper_margin = -std::numeric_limits<double>::infinity();  // f - C(|xi|+1)
  std::vector<double> f4_margins;                                          // one per t value
  double recession_homogeneity_margin = -std::numeric_limits<double>::infinity();
  double recession_lower_margin = -std::numeric_limits<double>::infinity();  // C^-1|xi| - f_inf
  double recession_upper_margin = -std::numeric_limits<double>::infinity();  // f_inf - C|xi|
  bool passed = false;

  static constexpr double kSlack = 1e-10;

  double worst_margin() const {
    double m = std::max({growth_lower_margin, growth_upper_margin, recession_homogeneity_margin,
                         recession_lower_margin, recession_upper_margin});
    for (double f : f4_margins) m = std::max(m, f);
    return m;
  }
};

namespace detail {

/// Uniform double in [0,1) from a 64-bit engine, independent of the standard
/// library's distribution implementation.
inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

inline ValidationReport validate_admissibility(const Integrand& g, const ValidationSpec& spec) {
  if (spec.num_x < 1 || spec.num_xi < 1) throw DomainError("validate_admissibility: sample counts must be >= 1");
  std::mt19937_64 rng(spec.seed);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * detail::unit_uniform(rng); };

  ValidationReport rep;
  rep.f4_margins.assign(spec.t_values.size(), -std::numeric_limits<double>::infinity());
  const double C = g.C(), alpha = g.alpha();

  for (int ix = 0; ix < spec.num_x; ++ix) {
    Point x(spec.dim);
    for (int i = 0; i < spec.dim; ++i) x(i) = uniform(-spec.radius, spec.radius);
    for (int ixi = 0; ixi < spec.num_xi; ++ixi) {
      Grad xi(spec.components, spec.dim);
      if (ixi == 0) {
        xi.setZero();
      } else {
        // Spread magnitudes over several decades.
        const double mag = spec.radius * std::pow(10.0, -3.0 * detail::unit_uniform(rng));
        for (int a = 0; a < spec.components; ++a)
          for (int b = 0; b < spec.dim; ++b) xi(a, b) = uniform(-1.0, 1.0);
        const double nrm = xi.norm();
        if (nrm > 0) xi *= mag / nrm;
      }
      const double norm = xi.norm();
      const double f = g(x, xi);
      rep.growth_lower_margin = std::max(rep.growth_lower_margin, norm / C - f);
      rep.growth_upper_margin = std::max(rep.growth_upper_margin, f - C * (norm + 1.0));

      const RecessionValue rec = recession_with_bound(g, x, xi, spec.recession_tol);
      rep.recession_lower_margin = std::max(rep.recession_lower_margin, norm / C - rec.value - rec.error_bound);
      rep.recession_upper_margin = std::max(rep.recession_upper_margin, rec.value - C * norm - rec.error_bound);

      for (std::size_t it = 0; it < spec.t_values.size(); ++it) {
        const double t = spec.t_values[it];
        Grad txi = xi * t;
        const double ft = g(x, txi);
        const double lhs = std::abs(rec.value - ft / t);
        const double rhs = (C / t) * (1.0 + std::pow(ft, 1.0 - alpha));
        rep.f4_margins[it] = std::max(rep.f4_margins[it], lhs - rhs - rec.error_bound);
      }

      for (double lambda : {0.5, 2.0, 10.0}) {
        Grad lxi = xi * lambda;
        const RecessionValue rl = recession_with_bound(g, x, lxi, spec.recession_tol * lambda);
        const double gap = std::abs(rl.value - lambda * rec.value) - rl.error_bound - lambda * rec.error_bound;
        rep.recession_homogeneity_margin = std::max(rep.recession_homogeneity_margin, gap);
      }
    }
  }
  rep.passed = rep.worst_margin() <= ValidationReport::kSlack;
  return rep;
}

// ---------------------------------------------------------------------------
// Stationary random checkerboard

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace detail

using LatticePoint = std::array<std::int64_t, kMaxDim>;

/// omega -> f(omega, x, xi) = a(floor(x)) * base(x, xi) with per-cell
/// coefficients a(z) in [a_min, a_max] hashed from (seed, z). A lattice
/// offset realises the measure-preserving shift tau_z.
class RandomIntegrandModel {
 public:
  RandomIntegrandModel(std::uint64_t master_seed, double a_min, double a_max, Integrand base)
      : seed_(master_seed), a_min_(a_min), a_max_(a_max), base_(std::move(base)) {
    if (!(a_min > 0.0)) throw DomainError("checkerboard: a_min must be positive");
    if (!(a_max >= a_min)) throw DomainError("checkerboard: a_max must be >= a_min");
  }

  std::uint64_t master_seed() const { return seed_; }
  double a_min() const { return a_min_; }
  double a_max() const { return a_max_; }
  const Integrand& base_profile() const { return base_; }
  const LatticePoint& offset() const { return offset_; }

  /// Coefficient of lattice cell z (before the shift offset is applied).
  static double hashed_coefficient(std::uint64_t seed, double a_min, double a_max, const LatticePoint& z,
                                   int dim) {
    std::uint64_t h = detail::splitmix64(seed);
    for (int i = 0; i < dim; ++i)
      h = detail::splitmix64(h ^ (static_cast<std::uint64_t>(z[i]) + 0x632BE59BD9B4E019ULL * (i + 1)));
    const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
    return a_min + (a_max - a_min) * u;
  }

  /// a(z + offset) for a lattice cell z of dimension `dim`.
  double cell_coeff(const LatticePoint& z, int dim) const {
    LatticePoint w{};
    for (int i = 0; i < dim; ++i) w[i] = z[i] + offset_[i];
    return hashed_coefficient(seed_, a_min_, a_max_, w, dim);
  }

  double coefficient(const Point& x) const {
    LatticePoint z{};
    const int dim = static_cast<int>(x.size());
    for (int i = 0; i < dim; ++i) z[i] = static_cast<std::int64_t>(std::floor(x(i)));
    return cell_coeff(z, dim);
  }

  double operator()(const Point& x, const Grad& xi) const { return coefficient(x) * base_(shifted(x), xi); }

  std::string id() const {
    return "checkerboard:" + std::to_string(seed_) + "," + detail::format_number(a_min_) + "," +
           detail::format_number(a_max_) + "," + base_.id();
  }

  /// Declared growth constant C_base * max(a_max, 1/a_min).
  double declared_C() const { return base_.C() * std::max(a_max_, 1.0 / a_min_); }

  /// Realisation omega as an integrand (radial when the base is).
  Integrand integrand() const {
    Integrand::Constants c{declared_C(), base_.alpha(), base_.positively_homogeneous()};
    Integrand out = realise(base_, id(), c);
    if (!base_.positively_homogeneous()) {
      if (auto rec = base_.recession()) {
        Integrand::Constants rc{rec->C() * std::max(a_max_, 1.0 / a_min_), rec->alpha(), true};
        out = out.with_recession(realise(*rec, "recession(" + id() + ")", rc));
      }
    }
    return out;
  }

  RandomIntegrandModel with_seed(std::uint64_t seed) const {
    RandomIntegrandModel m = *this;
    m.seed_ = seed;
    return m;
  }

  RandomIntegrandModel with_offset(const LatticePoint& off) const {
    RandomIntegrandModel m = *this;
    m.offset_ = off;
    return m;
  }

 private:
  Point shifted(const Point& x) const {
    Point y = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) y(i) += static_cast<double>(offset_[i]);
    return y;
  }

  Integrand realise(const Integrand& b, std::string name, Integrand::Constants c) const {
    const RandomIntegrandModel self = *this;
    if (b.is_radial()) {
      auto ab = b.coefficient_fn();
      return Integrand::radial(std::move(name),
                               [self, ab](const Point& x) { return self.coefficient(x) * ab(self.shifted(x)); },
                               b.profile(), c);
    }
    return Integrand::generic(std::move(name),
                              [self, b](const Point& x, const Grad& xi) {
                                return self.coefficient(x) * b(self.shifted(x), xi);
                              },
                              c);
  }

  std::uint64_t seed_;
  double a_min_, a_max_;
  Integrand base_;
  LatticePoint offset_{};
};

inline RandomIntegrandModel make_checkerboard(std::uint64_t seed, double a_min, double a_max, const Integrand& base) {
  return RandomIntegrandModel(seed, a_min, a_max, base);
}

/// tau_z: eval(shift(m, z), x, xi) = eval(m, x + z, xi).
inline RandomIntegrandModel shift(const RandomIntegrandModel& model, const Point& z) {
  LatticePoint off = model.offset();
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (!std::isfinite(z(i)) || z(i) != std::round(z(i))) throw DomainError("shift: z must be a lattice point");
    off[i] += static_cast<std::int64_t>(z(i));
  }
  return model.with_offset(off);
}

// ---------------------------------------------------------------------------
// Catalog ids

namespace detail {

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline double parse_double(const std::string& s, const std::string& what) {
  const std::string t = trim(s);
  double v = 0.0;
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size() || t.empty())
    throw DomainError("cannot parse number '" + t + "' for " + what);
  return v;
}

inline std::int64_t parse_int(const std::string& s, const std::string& what) {
  const std::string t = trim(s);
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size() || t.empty())
    throw DomainError("cannot parse integer '" + t + "' for " + what);
  return v;
}

inline std::uint64_t parse_uint(const std::string& s, const std::string& what) {
  const std::string t = trim(s);
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size() || t.empty())
    throw DomainError("cannot parse unsigned integer '" + t + "' for " + what);
  return v;
}

inline Integrand base_by_name(const std::string& name) {
  const std::string n = trim(name);
  if (n == "euclid") return euclid();
  if (n == "area") return area();
  if (n == "sqrtsum") return sqrtsum();
  throw DomainError("unknown base integrand '" + n + "'");
}

}  // namespace detail

/// Parsed catalog entry: a deterministic integrand or a random model.
struct CatalogEntry {
  std::optional<Integrand> deterministic;
  std::optional<RandomIntegrandModel> random;

  Integrand integrand() const { return deterministic ? *deterministic : random->integrand(); }
};

/// Catalog ids: "euclid", "area", "sqrtsum", "laminate:a1,a2,period[,dir[,base]]",
/// "checkerboard:seed,a_min,a_max[,base]".
inline CatalogEntry parse_integrand(const std::string& spec) {
  const std::string s = detail::trim(spec);
  const auto colon = s.find(':');
  const std::string head = s.substr(0, colon);
  const std::vector<std::string> args =
      colon == std::string::npos ? std::vector<std::string>{} : detail::split(s.substr(colon + 1), ',');
  CatalogEntry e;
  if (head == "euclid" || head == "area" || head == "sqrtsum") {
    if (!args.empty()) throw DomainError("integrand '" + head + "' takes no parameters");
    e.deterministic = detail::base_by_name(head);
    return e;
  }
  if (head == "laminate") {
    if (args.size() < 3 || args.size() > 5)
      throw DomainError("laminate expects a1,a2,period[,dir[,base]]");
    const double a1 = detail::parse_double(args[0], "laminate a1");
    const double a2 = detail::parse_double(args[1], "laminate a2");
    const double period = detail::parse_double(args[2], "laminate period");
    const int dir = args.size() > 3 ? static_cast<int>(detail::parse_int(args[3], "laminate dir")) : 0;
    const Integrand base = args.size() > 4 ? detail::base_by_name(args[4]) : euclid();
    e.deterministic = laminate(a1, a2, period, dir, base);
    return e;
  }
  if (head == "checkerboard") {
    if (args.size() < 3 || args.size() > 4) throw DomainError("checkerboard expects seed,a_min,a_max[,base]");
    const std::uint64_t seed = detail::parse_uint(args[0], "checkerboard seed");
    const double amin = detail::parse_double(args[1], "checkerboard a_min");
    const double amax = detail::parse_double(args[2], "checkerboard a_max");
    const Integrand base = args.size() > 3 ? detail::base_by_name(args[3]) : euclid();
    e.random = make_checkerboard(seed, amin, amax, base);
    return e;
  }
  throw DomainError("unknown integrand id '" + s + "'");
}

}  // namespace phasehom
