// Property checks over homogenised estimates: growth, Lipschitz bounds,
// rank-one convexity, g_hom bounds and symmetry, route agreement and the
// subadditive process axioms.
#pragma once

#include "phasehom/homogenise.hpp"

#include <cmath>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace phasehom {

/// passed <=> margin <= tolerance. Margins are signed: negative means slack.
struct PropertyCheck {
  std::string name;
  std::string inputs;
  double margin = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string provenance;
};

inline PropertyCheck make_check(std::string name, std::string inputs, double margin, double tolerance,
                                std::string provenance) {
  PropertyCheck c{std::move(name), std::move(inputs), margin, tolerance, false, std::move(provenance)};
  c.passed = std::isfinite(margin) && margin <= tolerance;
  return c;
}

struct FSample {
  Grad xi;
  double value = 0.0;
};

struct GSample {
  Amplitude zeta;
  Point nu;
  double value = 0.0;
};

inline FSample f_sample(const HomEstimate& e) { return {e.xi, e.extrapolated}; }
inline GSample g_sample(const HomEstimate& e) { return {e.zeta, e.nu, e.extrapolated}; }

namespace detail {

inline std::string describe(const Grad& xi) {
  std::ostringstream os;
  os.precision(6);
  os << '(';
  for (Eigen::Index i = 0; i < xi.size(); ++i) os << (i ? " " : "") << xi(i);
  os << ')';
  return os.str();
}

inline std::string describe(const Point& p) {
  return describe(Grad(Grad::Map(p.data(), 1, p.size())));
}

inline std::string describe_g(const GSample& s) {
  return "zeta=" + describe(Grad(Grad::Map(s.zeta.data(), 1, s.zeta.size()))) + " nu=" + describe(s.nu);
}

}  // namespace detail

/// Relative violation of C^{-1}|xi| <= f_hom(xi) <= C(|xi| + 1) (3% default).
inline PropertyCheck check_fhom_growth(const std::vector<FSample>& samples, double C, double tol = 0.03) {
  double margin = -std::numeric_limits<double>::infinity();
  std::string inputs = "C=" + detail::format_number(C);
  for (const auto& s : samples) {
    const double norm = s.xi.norm();
    const double lo = norm / C, hi = C * (norm + 1.0);
    if (lo > 0.0) margin = std::max(margin, 1.0 - s.value / lo);
    else margin = std::max(margin, -s.value);
    margin = std::max(margin, s.value / hi - 1.0);
    inputs += " xi=" + detail::describe(s.xi);
  }
  return make_check("fhom_growth", inputs, margin, tol, "linear growth bounds of f_hom");
}

/// Generous default: C sqrt(n) n H^{n-1}(boundary of the unit cube).
inline double default_lipschitz_cap(double C, int n) { return C * std::sqrt(double(n)) * n * (2.0 * n); }

/// Largest difference quotient over the pairs minus K_cap.
inline PropertyCheck check_fhom_lipschitz(const std::vector<std::pair<FSample, FSample>>& pairs, double K_cap) {
  if (pairs.size() < 3) throw DomainError("check_fhom_lipschitz: at least 3 pairs are required");
  double q = 0.0;
  for (const auto& [a, b] : pairs) {
    const double d = (a.xi - b.xi).norm();
    if (d == 0.0) continue;
    q = std::max(q, std::abs(a.value - b.value) / d);
  }
  return make_check("fhom_lipschitz",
                    "pairs=" + std::to_string(pairs.size()) + " K_cap=" + detail::format_number(K_cap), q - K_cap,
                    0.0, "Lipschitz continuity of f_hom");
}

/// Relative violation of 2|z|/(C(|z|+2)) <= g_hom <= 2C|z|/(|z|+2) (15% default).
inline PropertyCheck check_ghom_bounds(const std::vector<GSample>& samples, double C, double tol = 0.15) {
  double margin = -std::numeric_limits<double>::infinity();
  std::string inputs = "C=" + detail::format_number(C);
  for (const auto& s : samples) {
    const double z = s.zeta.norm();
    const double lo = 2.0 * z / (C * (z + 2.0)), hi = 2.0 * C * z / (z + 2.0);
    if (z == 0.0) {
      margin = std::max(margin, std::abs(s.value));
    } else {
      margin = std::max(margin, 1.0 - s.value / lo);
      margin = std::max(margin, s.value / hi - 1.0);
    }
    inputs += " " + detail::describe_g(s);
  }
  return make_check("ghom_bounds", inputs, margin, tol, "two-sided bounds of g_hom");
}

/// Symmetry g(z, nu) = g(-z, -nu) (relative, sym_tol) and zeta-Lipschitz
/// continuity with constant lip_factor * C * 2n. The margin is the larger
/// normalised excess, so the check passes iff both parts pass.
inline PropertyCheck check_ghom_symmetry_and_lipschitz(const std::vector<std::pair<GSample, GSample>>& symmetric,
                                                       const std::vector<std::pair<GSample, GSample>>& lipschitz,
                                                       double C, int n, double sym_tol = 0.02,
                                                       double lip_factor = 1.1) {
  double sym = 0.0;
  for (const auto& [a, b] : symmetric) {
    const double scale = std::max(std::abs(a.value), std::abs(b.value));
    if (scale > 0.0) sym = std::max(sym, std::abs(a.value - b.value) / scale);
  }
  const double cap = lip_factor * C * 2.0 * n;
  double q = 0.0;
  for (const auto& [a, b] : lipschitz) {
    const double d = (a.zeta - b.zeta).norm();
    if (d > 0.0) q = std::max(q, std::abs(a.value - b.value) / d);
  }
  std::ostringstream in;
  in << "sym_pairs=" << symmetric.size() << " sym_rel=" << sym << " lip_pairs=" << lipschitz.size()
     << " lip_quotient=" << q << " lip_cap=" << cap;
  const double margin = std::max(sym - sym_tol, q / cap - 1.0);
  return make_check("ghom_symmetry_lipschitz", in.str(), margin, 0.0,
                    "g_hom symmetric under (zeta,nu) -> (-zeta,-nu) and Lipschitz in zeta");
}

/// f_hom at xi - t a(x)b, xi and xi + t a(x)b.
struct RankOneLine {
  FSample minus, mid, plus;
};

/// Relative midpoint-convexity defect along rank-one lines.
inline PropertyCheck check_rank_one_convexity(const std::vector<RankOneLine>& lines, double tol = 0.02) {
  double margin = -std::numeric_limits<double>::infinity();
  for (const auto& l : lines) {
    const double avg = 0.5 * (l.minus.value + l.plus.value);
    margin = std::max(margin, (l.mid.value - avg) / std::max(std::abs(avg), 1e-12));
  }
  return make_check("fhom_rank_one_convexity", "lines=" + std::to_string(lines.size()), margin, tol,
                    "rank-one convexity of f_hom along sampled lines");
}

/// |route1 - route2| relative to route2, against max(2%, tol).
inline PropertyCheck check_recession_routes(const HomEstimate& a, const HomEstimate& b, double tol = 0.02) {
  const double denom = std::max(std::abs(b.extrapolated), 1e-12);
  const double rel = std::abs(a.extrapolated - b.extrapolated) / denom;
  return make_check("recession_routes",
                    a.integrand_id + " xi=" + detail::describe(a.xi) + " " + to_string(a.route) + "=" +
                        detail::format_number(a.extrapolated) + " " + to_string(b.route) + "=" +
                        detail::format_number(b.extrapolated),
                    rel, std::max(0.02, tol), "homogenisation commutes with taking the recession");
}

/// A box and a partition of it into disjoint boxes.
struct ProcessSplit {
  HalfOpenBox whole;
  std::vector<HalfOpenBox> parts;
};

struct ProcessChecks {
  PropertyCheck subadditivity, boundedness, stationarity, combined;
};

/// Subadditivity (relative, sub_tol), boundedness mu <= C|zeta| 3/2 L(A')
/// and lattice-shift stationarity (relative, stat_tol). Stationarity compares
/// mu(tau_{z_nu} omega, A') with mu(omega, A' + z') for each shift z'.
/// `solves`, when given, receives every process value in scheduling order.
inline ProcessChecks check_subadditive_process(const RandomIntegrandModel& model, const Amplitude& zeta,
                                               const Point& nu, const std::vector<ProcessSplit>& splits,
                                               const std::vector<std::vector<double>>& shifts,
                                               const ProcessOptions& po, double sub_tol = 0.05,
                                               double stat_tol = 0.05, const Executor& ex = Executor(),
                                               std::vector<ProcessValue>* solves = nullptr) {
  const double c = model.declared_C() * zeta.norm() * kCutoffSlopeMax;
  // Jobs: for each split the whole and the parts; then the shift pairs on the first box.
  struct Job {
    RandomIntegrandModel m;
    HalfOpenBox box;
  };
  std::vector<Job> jobs;
  for (const auto& s : splits) {
    jobs.push_back({model, s.whole});
    for (const auto& p : s.parts) jobs.push_back({model, p});
  }
  const HalfOpenBox base = splits.empty() ? HalfOpenBox{std::vector<double>(nu.size() - 1, 0.0),
                                                        std::vector<double>(nu.size() - 1, 1.0)}
                                          : splits.front().whole;
  const std::size_t shift_start = jobs.size();
  for (const auto& z : shifts) {
    jobs.push_back({shift(model, process_shift(nu, z, po.multiplier_cap)), base});
    jobs.push_back({model, base.translated(z)});
  }
  std::vector<ProcessValue> pvs = ex.map(jobs.size(), [&](std::size_t i) {
    return subadditive_process(jobs[i].m, zeta, nu, jobs[i].box, po);
  });
  std::vector<double> mu;
  for (const auto& pv : pvs) mu.push_back(pv.value);
  if (solves) *solves = std::move(pvs);

  double sub = -std::numeric_limits<double>::infinity(), bound = -std::numeric_limits<double>::infinity();
  std::size_t j = 0;
  for (const auto& s : splits) {
    const double whole = mu[j++];
    double sum = 0.0;
    bound = std::max(bound, whole - c * s.whole.measure());
    for (const auto& p : s.parts) {
      bound = std::max(bound, mu[j] - c * p.measure());
      sum += mu[j++];
    }
    sub = std::max(sub, sum > 0.0 ? (whole - sum) / sum : whole);
  }
  double stat = shifts.empty() ? 0.0 : -std::numeric_limits<double>::infinity();
  for (std::size_t i = shift_start; i < jobs.size(); i += 2) {
    const double scale = std::max({std::abs(mu[i]), std::abs(mu[i + 1]), 1e-300});
    stat = std::max(stat, std::abs(mu[i] - mu[i + 1]) / scale);
  }
  for (double m : mu) bound = std::max(bound, -m);  // mu >= 0
  if (splits.empty()) sub = 0.0, bound = std::max(bound, 0.0 - c);

  const std::string in = model.id() + " " + detail::describe_g({zeta, nu, 0.0});
  ProcessChecks out;
  out.subadditivity = make_check("process_subadditivity", in + " splits=" + std::to_string(splits.size()), sub,
                                 sub_tol, "subadditivity of the surface process over disjoint unions");
  out.boundedness = make_check("process_boundedness", in + " c=" + detail::format_number(c), bound, 0.0,
                               "0 <= mu <= c L(A') with c = C|zeta| sup|ubar'|");
  out.stationarity = make_check("process_stationarity", in + " shifts=" + std::to_string(shifts.size()), stat,
                                stat_tol, "covariance of the surface process under lattice shifts");
  const double combined = std::max({sub - sub_tol, bound, stat - stat_tol});
  out.combined = make_check("subadditive_process", in, combined, 0.0, "subadditive process axioms");
  return out;
}

// ---------------------------------------------------------------------------
// Suite

struct SuiteEntry {
  std::string name;
  Integrand g;
  double C = 1.0;
};

struct SuiteConfig {
  /// Bulk and surface schedules (n = 2 by default).
  Schedule fhom = Schedule::standard(2, {8});
  Schedule ghom = Schedule::standard(2, {16});
  std::vector<Grad> xi_grid{make_grad({1, 0}), make_grad({0, 1}), make_grad({1, 1}), make_grad({2, -1}),
                            make_grad({0.5, 0.25})};
  /// Rank-one lines xi0 +- t a(x)b.
  Grad line_center = make_grad({1, 0.5});
  double line_step = 0.5;
  std::vector<std::pair<Point, Point>> line_dirs{{make_point({1}), make_point({1, 0})},
                                                 {make_point({1}), make_point({0, 1})},
                                                 {make_point({1}), make_point({0.6, 0.8})}};
  std::vector<double> zetas{0.5, 1.0, 2.0};
  double tol_scale = 1.0;
  double growth_tol = 0.03;
  double ghom_tol = 0.15;
  double symmetry_tol = 0.02;
  double convexity_tol = 0.02;
  SolverOptions opts;
};

inline std::vector<SuiteEntry> default_catalog() {
  return {{"euclid", euclid(), 1.0},
          {"area", area(), 1.0},
          {"laminate", laminate(1, 2, 1, 0, euclid()), 2.0},
          {"checkerboard", make_checkerboard(1, 1, 2, euclid()).integrand(), 2.0}};
}

/// Results of one entry: its checks and every estimate they read.
struct SuiteResult {
  std::vector<PropertyCheck> checks;
  std::vector<HomEstimate> estimates;
};

/// Growth, f_hom Lipschitz, rank-one convexity, g_hom bounds and g_hom
/// symmetry/Lipschitz for each entry. Check names are prefixed by the entry name.
inline SuiteResult run_property_suite(const std::vector<SuiteEntry>& catalog, const SuiteConfig& cfg,
                                      const Executor& ex = Executor()) {
  SuiteResult out;
  const double ts = cfg.tol_scale;
  for (const auto& e : catalog) {
    const int n = static_cast<int>(cfg.fhom.center.size());
    // Bulk arguments: the grid, then per line (minus, mid, plus).
    std::vector<Grad> xis = cfg.xi_grid;
    for (const auto& [a, b] : cfg.line_dirs) {
      const Grad ab = a * b.transpose();
      xis.push_back(Grad(cfg.line_center - cfg.line_step * ab));
      xis.push_back(cfg.line_center);
      xis.push_back(Grad(cfg.line_center + cfg.line_step * ab));
    }
    // Surface arguments: zeta sweep on nu, its mirror (-zeta, -nu) at zeta = 1, and zeta = 0.
    const Point nu = cfg.ghom.nu;
    std::vector<std::pair<Amplitude, Point>> gargs;
    for (double z : cfg.zetas) gargs.push_back({make_amplitude({z}), nu});
    gargs.push_back({make_amplitude({-1.0}), Point(-nu)});
    gargs.push_back({make_amplitude({0.0}), nu});
    const Integrand ginf = recession_integrand(e.g);

    const std::size_t nb = xis.size();
    auto ests = ex.map(nb + gargs.size(), [&](std::size_t i) {
      if (i < nb) return estimate_f_hom(e.g, xis[i], cfg.fhom, cfg.opts);
      const auto& [z, v] = gargs[i - nb];
      return estimate_g_hom(ginf, z, v, cfg.ghom, cfg.opts);
    });

    std::vector<FSample> grid;
    for (std::size_t i = 0; i < cfg.xi_grid.size(); ++i) grid.push_back(f_sample(ests[i]));
    std::vector<std::pair<FSample, FSample>> pairs;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) pairs.push_back({grid[i], grid[i + 1]});
    std::vector<RankOneLine> lines;
    for (std::size_t i = cfg.xi_grid.size(); i + 2 < nb; i += 3)
      lines.push_back({f_sample(ests[i]), f_sample(ests[i + 1]), f_sample(ests[i + 2])});

    std::vector<GSample> gs;
    for (std::size_t i = nb; i < ests.size(); ++i) gs.push_back(g_sample(ests[i]));
    const std::size_t nz = cfg.zetas.size();
    std::vector<std::pair<GSample, GSample>> lip;
    for (std::size_t i = 0; i + 1 < nz; ++i) lip.push_back({gs[i], gs[i + 1]});
    lip.push_back({gs[nz + 1], gs[0]});  // zeta = 0 against the smallest zeta
    std::vector<std::pair<GSample, GSample>> sym;
    for (std::size_t i = 0; i < nz; ++i)
      if (cfg.zetas[i] == 1.0) sym.push_back({gs[i], gs[nz]});

    auto tag = [&](PropertyCheck c) {
      c.name = e.name + "." + c.name;
      return c;
    };
    out.checks.push_back(tag(check_fhom_growth(grid, e.C, cfg.growth_tol * ts)));
    out.checks.push_back(tag(check_fhom_lipschitz(pairs, default_lipschitz_cap(e.C, n))));
    out.checks.push_back(tag(check_rank_one_convexity(lines, cfg.convexity_tol * ts)));
    out.checks.push_back(tag(check_ghom_bounds(gs, e.C, cfg.ghom_tol * ts)));
    out.checks.push_back(tag(check_ghom_symmetry_and_lipschitz(sym, lip, e.C, n, cfg.symmetry_tol * ts)));
    for (auto& est : ests) out.estimates.push_back(std::move(est));
  }
  return out;
}

/// Line-oriented machine-readable records, one per check.
inline void write_verify_report(std::ostream& os, const std::vector<PropertyCheck>& checks) {
  const auto old = os.precision(17);
  for (const auto& c : checks) {
    os << "check=" << c.name << "\tpassed=" << (c.passed ? 1 : 0) << "\tmargin=" << c.margin
       << "\ttolerance=" << c.tolerance << "\tinputs=" << c.inputs << "\tprovenance=" << c.provenance << '\n';
  }
  os.precision(old);
}

/// Human summary table.
inline void write_verify_summary(std::ostream& os, const std::vector<PropertyCheck>& checks) {
  std::size_t w = 5;
  for (const auto& c : checks) w = std::max(w, c.name.size());
  char buf[256];
  for (const auto& c : checks) {
    std::snprintf(buf, sizeof buf, "%-*s  %-4s  margin=%+.4e  tol=%.3e\n", static_cast<int>(w), c.name.c_str(),
                  c.passed ? "PASS" : "FAIL", c.margin, c.tolerance);
    os << buf;
  }
}

}  // namespace phasehom
