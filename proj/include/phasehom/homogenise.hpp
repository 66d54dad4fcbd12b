// Drivers for the asymptotic cell formulas: f_hom, f^inf_hom (two routes),
// g_hom over r-schedules, ensemble averages and the subadditive surface process.
#pragma once

#include "phasehom/solvers.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace phasehom {

/// Runs independent jobs on up to `jobs` threads. Results are indexed by job,
/// so the output order never depends on scheduling.
class Executor {
 public:
  explicit Executor(int jobs = 1) : jobs_(std::max(1, jobs)) {}

  int jobs() const { return jobs_; }

  template <class F>
  auto map(std::size_t count, F&& fn) const -> std::vector<decltype(fn(std::size_t{}))> {
    using T = decltype(fn(std::size_t{}));
    std::vector<std::optional<T>> slots(count);
    std::vector<std::exception_ptr> errors(count);
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(jobs_), count);
    if (workers <= 1) {
      for (std::size_t i = 0; i < count; ++i) slots[i].emplace(fn(i));
    } else {
      std::atomic<std::size_t> next{0};
      auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            slots[i].emplace(fn(i));
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      };
      std::vector<std::thread> pool;
      pool.reserve(workers);
      for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
      for (auto& t : pool) t.join();
      for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    }
    std::vector<T> out;
    out.reserve(count);
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
  }

 private:
  int jobs_;
};

enum class Quantity { f_hom, f_inf_hom, g_hom };
enum class RecessionRoute { none, recession_of_hom, hom_of_recession };

inline const char* to_string(Quantity q) {
  switch (q) {
    case Quantity::f_hom: return "f_hom";
    case Quantity::f_inf_hom: return "f_inf_hom";
    case Quantity::g_hom: return "g_hom";
  }
  return "?";
}

inline const char* to_string(RecessionRoute r) {
  switch (r) {
    case RecessionRoute::none: return "none";
    case RecessionRoute::recession_of_hom: return "recession_of_hom";
    case RecessionRoute::hom_of_recession: return "hom_of_recession";
  }
  return "?";
}

/// r-schedule with a spacing rule. `center` is the macroscopic point x; each
/// cell is centred at r x.
struct Schedule {
  std::vector<double> r;
  double h = 0.25;
  /// Optional per-r spacing; overrides h when non-empty.
  std::vector<double> h_values;
  Point center;
  Point nu;
  int k = 1;
  double tol_r = 0.05;

  double spacing(std::size_t i) const { return h_values.empty() ? h : h_values.at(i); }

  static Schedule standard(int n, std::vector<double> r, double h = 0.25) {
    Schedule s;
    s.r = std::move(r);
    s.h = h;
    s.center = Point::Zero(n);
    s.nu = basis_vector(n, n - 1);
    return s;
  }

  void validate(int n) const {
    if (r.empty()) throw DomainError("schedule: r list is empty");
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (!(r[i] > 0.0)) throw DomainError("schedule: r values must be positive");
      if (i > 0 && !(r[i] > r[i - 1])) throw DomainError("schedule: r values must be increasing");
    }
    if (!h_values.empty() && h_values.size() != r.size())
      throw DomainError("schedule: h_values must align with r");
    if (center.size() != n || nu.size() != n) throw DomainError("schedule: center/nu dimension mismatch");
    if (k < 1) throw DomainError("schedule: k must be >= 1");
    if (!(tol_r > 0.0)) throw DomainError("schedule: tol_r must be positive");
  }
};

struct Ensemble {
  std::vector<std::uint64_t> seeds;
  std::vector<double> values;
  double mean = 0.0;
  double sample_std = 0.0;
  /// Normal-approximation 95% half-width 1.96 s / sqrt(m).
  double half_width = 0.0;
  /// max - min over seeds.
  double spread = 0.0;
};

struct HomEstimate {
  Quantity quantity = Quantity::f_hom;
  RecessionRoute route = RecessionRoute::none;
  std::string integrand_id;
  Grad xi;
  Amplitude zeta;
  Point nu;
  std::vector<double> r_values;
  std::vector<double> scaled_values;
  std::vector<double> raw_values;
  double extrapolated = 0.0;
  double cauchy_gap = 0.0;
  /// Richardson value assuming an error linear in 1/r (reported only).
  std::optional<double> richardson;
  /// Route recession_of_hom: t-schedule and the last-r value of f_hom(t xi)/t per t.
  std::vector<double> t_values;
  std::vector<double> t_scaled;
  std::vector<CellResult> per_r_results;
  std::optional<Ensemble> ensemble;
  std::vector<std::string> warnings;

  bool converged() const {
    for (const auto& r : per_r_results)
      if (!r.converged) return false;
    return true;
  }
};

namespace detail {

inline void finish_estimate(HomEstimate& est, const Schedule& s) {
  est.extrapolated = est.scaled_values.back();
  const std::size_t m = est.scaled_values.size();
  if (m >= 2) {
    est.cauchy_gap = std::abs(est.scaled_values[m - 1] - est.scaled_values[m - 2]);
    const double r1 = est.r_values[m - 2], r2 = est.r_values[m - 1];
    est.richardson = (r2 * est.scaled_values[m - 1] - r1 * est.scaled_values[m - 2]) / (r2 - r1);
    if (est.cauchy_gap > s.tol_r) est.warnings.push_back("non-Cauchy: gap exceeds tol_r");
  }
  for (std::size_t i = 0; i < est.per_r_results.size(); ++i) {
    if (!est.per_r_results[i].converged)
      est.warnings.push_back("unconverged solve at r=" + format_number(est.r_values[i]) +
                             " (value kept as an upper bound)");
  }
}

inline Ensemble summarise_ensemble(std::vector<std::uint64_t> seeds, std::vector<double> values) {
  Ensemble e;
  e.seeds = std::move(seeds);
  e.values = std::move(values);
  const double m = static_cast<double>(e.values.size());
  e.mean = pairwise_sum(e.values) / m;
  const auto [lo, hi] = std::minmax_element(e.values.begin(), e.values.end());
  e.spread = *hi - *lo;
  if (e.spread == 0.0) {
    e.mean = *lo;
  } else if (e.values.size() >= 2) {
    std::vector<double> sq;
    sq.reserve(e.values.size());
    for (double x : e.values) sq.push_back((x - e.mean) * (x - e.mean));
    e.sample_std = std::sqrt(pairwise_sum(sq) / (m - 1.0));
    e.mean = std::clamp(e.mean, *lo, *hi);
  }
  e.half_width = 1.96 * e.sample_std / std::sqrt(m);
  return e;
}

inline CellResult bulk_solve(const Integrand& g, const Grad& xi, const Schedule& s, std::size_t i,
                             const SolverOptions& opts, double* volume) {
  const double r = s.r[i];
  const CellDomain cell = make_cell(Point(r * s.center), r, s.nu, s.k, s.spacing(i));
  *volume = cell.volume();
  return solve_bulk_cell(cell, g, xi, opts);
}

}  // namespace detail

/// Scaled bulk cell values m_b(l_xi, Q^{nu,k}_r(r x)) / (k^{n-1} r^n) over the
/// schedule; the denominator is the realised grid volume.
inline HomEstimate estimate_f_hom(const Integrand& g, const Grad& xi, const Schedule& s, const SolverOptions& opts,
                                  const Executor& ex = Executor()) {
  const int n = static_cast<int>(xi.cols());
  s.validate(n);
  HomEstimate est;
  est.quantity = Quantity::f_hom;
  est.integrand_id = g.id();
  est.xi = xi;
  est.nu = s.nu;
  est.r_values = s.r;
  struct Out {
    CellResult res;
    double volume;
  };
  auto outs = ex.map(s.r.size(), [&](std::size_t i) {
    Out o;
    o.res = detail::bulk_solve(g, xi, s, i, opts, &o.volume);
    return o;
  });
  for (auto& o : outs) {
    est.raw_values.push_back(o.res.value);
    est.scaled_values.push_back(o.res.value / o.volume);
    est.per_r_results.push_back(std::move(o.res));
  }
  detail::finish_estimate(est, s);
  return est;
}

/// f^inf_hom(xi) by either route. hom_of_recession homogenises the recession
/// density; recession_of_hom evaluates f_hom(t xi)/t along `t_schedule` and
/// reports the largest t.
inline HomEstimate estimate_f_inf_hom(const Integrand& g, const Grad& xi, RecessionRoute route, const Schedule& s,
                                      const SolverOptions& opts, const std::vector<double>& t_schedule = {8, 32, 128},
                                      const Executor& ex = Executor()) {
  if (route == RecessionRoute::hom_of_recession) {
    HomEstimate est = estimate_f_hom(recession_integrand(g), xi, s, opts, ex);
    est.quantity = Quantity::f_inf_hom;
    est.route = route;
    est.integrand_id = g.id();
    return est;
  }
  if (route != RecessionRoute::recession_of_hom) throw DomainError("estimate_f_inf_hom: a route is required");
  if (t_schedule.empty()) throw DomainError("estimate_f_inf_hom: t-schedule is required");
  for (std::size_t j = 0; j < t_schedule.size(); ++j) {
    if (!(t_schedule[j] > 0.0) || (j > 0 && !(t_schedule[j] > t_schedule[j - 1])))
      throw DomainError("estimate_f_inf_hom: t-schedule must be positive and increasing");
  }
  const int n = static_cast<int>(xi.cols());
  s.validate(n);
  const std::size_t nr = s.r.size(), nt = t_schedule.size();
  struct Out {
    CellResult res;
    double volume;
  };
  auto outs = ex.map(nr * nt, [&](std::size_t idx) {
    const std::size_t j = idx / nr, i = idx % nr;
    Out o;
    o.res = detail::bulk_solve(g, Grad(t_schedule[j] * xi), s, i, opts, &o.volume);
    return o;
  });
  HomEstimate est;
  est.quantity = Quantity::f_inf_hom;
  est.route = route;
  est.integrand_id = g.id();
  est.xi = xi;
  est.nu = s.nu;
  est.r_values = s.r;
  est.t_values = t_schedule;
  for (std::size_t j = 0; j < nt; ++j) {
    const Out& last = outs[j * nr + nr - 1];
    est.t_scaled.push_back(last.res.value / last.volume / t_schedule[j]);
  }
  const double t = t_schedule.back();
  for (std::size_t i = 0; i < nr; ++i) {
    Out& o = outs[(nt - 1) * nr + i];
    est.raw_values.push_back(o.res.value);
    est.scaled_values.push_back(o.res.value / o.volume / t);
  }
  for (auto& o : outs) est.per_r_results.push_back(std::move(o.res));
  detail::finish_estimate(est, s);
  // per_r_results holds every (t, r) solve; only the last-t ones align with r_values.
  return est;
}

/// Scaled surface cell values m_s(u_{rx,zeta,nu}, Q^nu_r(r x)) / r^{n-1}; the
/// denominator is the realised cross-section of the grid.
inline HomEstimate estimate_g_hom(const Integrand& ginf, const Amplitude& zeta, const Point& nu, const Schedule& s,
                                  const SolverOptions& opts, const Executor& ex = Executor()) {
  const int n = static_cast<int>(nu.size());
  if (!ginf.positively_homogeneous())
    throw PreconditionError("estimate_g_hom: density must be positively 1-homogeneous");
  Schedule sn = s;
  sn.nu = nu;
  sn.validate(n);
  HomEstimate est;
  est.quantity = Quantity::g_hom;
  est.integrand_id = ginf.id();
  est.zeta = zeta;
  est.nu = nu;
  est.r_values = s.r;
  struct Out {
    CellResult res;
    double section;
  };
  auto outs = ex.map(s.r.size(), [&](std::size_t i) {
    const double r = s.r[i];
    const CellDomain cell = make_cell(Point(r * s.center), r, nu, 1, s.spacing(i));
    return Out{solve_surface_cell(cell, ginf, zeta, nu, opts), cell.cross_section()};
  });
  for (auto& o : outs) {
    est.raw_values.push_back(o.res.value);
    est.scaled_values.push_back(o.res.value / o.section);
    est.per_r_results.push_back(std::move(o.res));
  }
  detail::finish_estimate(est, sn);
  return est;
}

/// What mc_expectation evaluates per realisation.
struct QuantitySpec {
  Quantity quantity = Quantity::f_hom;
  Grad xi;
  Amplitude zeta;
  Point nu;
  Point center;
  int k = 1;
  double h = 0.25;
};

/// Per-seed scaled cell value at fixed r for realisations model.with_seed(seed).
inline HomEstimate mc_expectation(const RandomIntegrandModel& model, const QuantitySpec& q,
                                  const std::vector<std::uint64_t>& seeds, double r, const SolverOptions& opts,
                                  const Executor& ex = Executor()) {
  if (seeds.size() < 2) throw DomainError("mc_expectation: at least 2 seeds are required");
  if (q.quantity == Quantity::f_inf_hom) throw DomainError("mc_expectation: quantity must be f_hom or g_hom");
  const int n = static_cast<int>(q.quantity == Quantity::f_hom ? q.xi.cols() : q.nu.size());
  Schedule s;
  s.r = {r};
  s.h = q.h;
  s.center = q.center.size() == n ? q.center : Point(Point::Zero(n));
  s.nu = q.nu.size() == n ? q.nu : basis_vector(n, n - 1);
  s.k = q.k;
  s.validate(n);
  auto results = ex.map(seeds.size(), [&](std::size_t i) {
    const Integrand g = model.with_seed(seeds[i]).integrand();
    if (q.quantity == Quantity::f_hom) return estimate_f_hom(g, q.xi, s, opts);
    const Integrand ginf = recession_integrand(g);
    return estimate_g_hom(ginf, q.zeta, s.nu, s, opts);
  });
  HomEstimate est;
  est.quantity = q.quantity;
  est.integrand_id = model.id();
  est.xi = q.xi;
  est.zeta = q.zeta;
  est.nu = s.nu;
  est.r_values = {r};
  std::vector<double> values;
  for (auto& e : results) {
    values.push_back(e.scaled_values.front());
    est.raw_values.push_back(e.raw_values.front());
    est.per_r_results.push_back(std::move(e.per_r_results.front()));
  }
  est.ensemble = detail::summarise_ensemble(seeds, values);
  est.scaled_values = {est.ensemble->mean};
  est.extrapolated = est.ensemble->mean;
  for (std::size_t i = 0; i < est.per_r_results.size(); ++i) {
    if (!est.per_r_results[i].converged)
      est.warnings.push_back("unconverged solve for seed " + std::to_string(seeds[i]));
  }
  return est;
}

// ---------------------------------------------------------------------------
// Subadditive surface process

/// Half-open box [lo, hi) in R^{n-1}.
struct HalfOpenBox {
  std::vector<double> lo, hi;

  int dim() const { return static_cast<int>(lo.size()); }
  double measure() const {
    double m = 1.0;
    for (std::size_t i = 0; i < lo.size(); ++i) m *= hi[i] - lo[i];
    return m;
  }
  void validate() const {
    if (lo.size() != hi.size()) throw DomainError("box: lo/hi dimension mismatch");
    for (std::size_t i = 0; i < lo.size(); ++i)
      if (!(hi[i] > lo[i])) throw DomainError("box: each side must have positive length");
  }
  HalfOpenBox translated(const std::vector<double>& z) const {
    HalfOpenBox b = *this;
    for (std::size_t i = 0; i < lo.size(); ++i) {
      b.lo[i] += z.at(i);
      b.hi[i] += z.at(i);
    }
    return b;
  }
};

/// Least positive integer M <= cap with M R_nu integral, or nullopt.
inline std::optional<int> integral_multiplier(const Rotation& rot, int cap) {
  for (int M = 1; M <= cap; ++M) {
    const Matrix S = static_cast<double>(M) * rot.matrix;
    if ((S.array() - S.array().round()).abs().maxCoeff() < 1e-9) return M;
  }
  return std::nullopt;
}

class UnsupportedNormalError : public DomainError {
 public:
  using DomainError::DomainError;
};

struct ProcessOptions {
  double h = 0.25;
  int multiplier_cap = 64;
  SolverOptions solver;
};

struct ProcessValue {
  double value = 0.0;
  int multiplier = 1;
  CellResult result;
};

/// mu_{zeta,nu}(omega, A') = m_s(ubar_{zeta,nu}, T_nu(A')) / M_nu^{n-1} with
/// T_nu(A') = M_nu R_nu (A' x [-c, c)), c = max side of A' / 2, and ubar the
/// unit-width smoothed jump through the origin.
inline ProcessValue subadditive_process(const RandomIntegrandModel& model, const Amplitude& zeta, const Point& nu,
                                        const HalfOpenBox& box, const ProcessOptions& po) {
  const int n = static_cast<int>(nu.size());
  if (n < 2) throw DomainError("subadditive_process: requires n >= 2");
  box.validate();
  if (box.dim() != n - 1) throw DomainError("subadditive_process: box must have dimension n-1");
  const Rotation rot = rotation_for_normal(nu);
  const auto M = integral_multiplier(rot, po.multiplier_cap);
  if (!M) throw UnsupportedNormalError("subadditive_process: no integral multiple of R_nu up to the cap");
  double c = 0.0;
  for (int i = 0; i < n - 1; ++i) c = std::max(c, 0.5 * (box.hi[i] - box.lo[i]));
  Point mid_local(n);
  std::vector<double> lengths(static_cast<std::size_t>(n));
  for (int i = 0; i < n - 1; ++i) {
    mid_local(i) = 0.5 * (box.lo[i] + box.hi[i]) * *M;
    lengths[i] = (box.hi[i] - box.lo[i]) * *M;
  }
  mid_local(n - 1) = 0.0;
  lengths[n - 1] = 2.0 * c * *M;
  const CellDomain cell = make_box(Point(rot.matrix * mid_local), lengths, rot, po.h);

  const Integrand g = model.integrand();
  const Integrand ginf = recession_integrand(g);
  const Point origin = Point::Zero(n);
  const VectorField datum = jump_datum(cell, zeta, nu, 1.0, origin);
  ProcessValue pv;
  pv.multiplier = *M;
  pv.result = solve_surface_with_datum(cell, ginf, datum, nu, origin, po.solver);
  pv.value = pv.result.value / std::pow(static_cast<double>(*M), n - 1);
  return pv;
}

inline double subadditive_process_eval(const RandomIntegrandModel& model, const Amplitude& zeta, const Point& nu,
                                       const HalfOpenBox& box, const ProcessOptions& po) {
  return subadditive_process(model, zeta, nu, box, po).value;
}

/// z'_nu = M_nu R_nu (z', 0): the lattice vector realising the shift of A' by z'.
inline Point process_shift(const Point& nu, const std::vector<double>& z_prime, int cap = 64) {
  const int n = static_cast<int>(nu.size());
  const Rotation rot = rotation_for_normal(nu);
  const auto M = integral_multiplier(rot, cap);
  if (!M) throw UnsupportedNormalError("process_shift: no integral multiple of R_nu up to the cap");
  Point z = Point::Zero(n);
  for (int i = 0; i < n - 1; ++i) z(i) = z_prime.at(static_cast<std::size_t>(i));
  Point out = static_cast<double>(*M) * (rot.matrix * z);
  return out.array().round().matrix();
}

}  // namespace phasehom
