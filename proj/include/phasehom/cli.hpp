// Run configuration, config parsing and the command driver behind the CLI.
//
// Config schema: one `key = value` per line, `#` starts a comment. Lists of
// compound values are separated by ';', components by ','; rows of a gradient
// matrix by '/'. Example:
//
//   command   = fhom
//   integrand = laminate:1,2,1
//   xi        = 1,0 ; 0,1
//   r         = 4,8,16
#pragma once

#include "phasehom/verify.hpp"

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace phasehom {

inline constexpr int kReportFormatVersion = 1;
inline constexpr const char* kVersion = "0.1.0";

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Command { fhom, finfhom, ghom, mc, mu, verify, sweep };

inline const char* to_string(Command c) {
  switch (c) {
    case Command::fhom: return "fhom";
    case Command::finfhom: return "finfhom";
    case Command::ghom: return "ghom";
    case Command::mc: return "mc";
    case Command::mu: return "mu";
    case Command::verify: return "verify";
    case Command::sweep: return "sweep";
  }
  return "?";
}

struct RunConfig {
  Command command = Command::fhom;
  std::string integrand = "euclid";
  /// verify / sweep: integrand ids; empty means the default catalog.
  std::vector<std::string> catalog;
  std::vector<Grad> xi;
  std::vector<Amplitude> zeta;
  std::vector<Point> nu;
  std::vector<double> r;
  /// False when r came from the defaults (verify then keeps the suite schedules).
  bool r_explicit = false;
  double h = 0.25;
  int k = 1;
  std::optional<Point> center;
  double tol_r = 0.05;
  /// finfhom: hom_of_recession, recession_of_hom or both.
  std::string route = "both";
  std::vector<double> t{8, 32, 128};
  std::vector<std::uint64_t> seeds;
  /// mc: f_hom or g_hom.
  std::string quantity = "f_hom";
  /// mu: A' boxes, and the splits/shifts checked by verify.
  std::vector<HalfOpenBox> boxes;
  int multiplier_cap = 64;
  SolverOptions solver;
  std::string out = "out";
  int format_version = kReportFormatVersion;
  double tol_scale = 1.0;
  int jobs = 1;
  /// Canonical text the config hash is computed from.
  std::string source;

  int dim() const {
    if (!xi.empty()) return static_cast<int>(xi.front().cols());
    if (!nu.empty()) return static_cast<int>(nu.front().size());
    if (center) return static_cast<int>(center->size());
    return 2;
  }
};

namespace detail {

inline std::vector<double> parse_reals(const std::string& s, const std::string& what) {
  std::vector<double> out;
  for (const auto& part : split(s, ',')) out.push_back(parse_double(trim(part), what));
  return out;
}

inline Point to_point(const std::vector<double>& xs) {
  if (xs.empty() || xs.size() > static_cast<std::size_t>(kMaxDim)) throw DomainError("expected 1 to 3 components");
  Point p(static_cast<Eigen::Index>(xs.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) p(static_cast<Eigen::Index>(i)) = xs[i];
  return p;
}

inline Grad parse_gradient(const std::string& s) {
  const auto rows = split(s, '/');
  std::vector<std::vector<double>> m;
  for (const auto& row : rows) m.push_back(parse_reals(row, "xi"));
  const std::size_t n = m.front().size();
  if (m.size() > static_cast<std::size_t>(kMaxDim) || n == 0 || n > static_cast<std::size_t>(kMaxDim))
    throw DomainError("xi must be an N x n matrix with N, n <= 3");
  Grad g(static_cast<Eigen::Index>(m.size()), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i].size() != n) throw DomainError("xi rows must have equal length");
    for (std::size_t j = 0; j < n; ++j) g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m[i][j];
  }
  return g;
}

/// "lo:hi, lo:hi" -> box.
inline HalfOpenBox parse_box(const std::string& s) {
  HalfOpenBox b;
  for (const auto& side : split(s, ',')) {
    const auto ends = split(side, ':');
    if (ends.size() != 2) throw DomainError("box sides are written lo:hi");
    b.lo.push_back(parse_double(trim(ends[0]), "box"));
    b.hi.push_back(parse_double(trim(ends[1]), "box"));
  }
  b.validate();
  return b;
}

inline std::vector<std::string> list_items(const std::string& s) {
  std::vector<std::string> out;
  for (const auto& item : split(s, ';')) {
    const std::string t = trim(item);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

inline std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string join(const std::vector<double>& xs, char sep = ';') {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? std::string(1, sep) : "") + num(xs[i]);
  return s;
}

inline std::string argument_string(const HomEstimate& e) {
  auto mat = [](const auto& m) {
    std::string s;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      if (i) s += '/';
      for (Eigen::Index j = 0; j < m.cols(); ++j) s += (j ? " " : "") + num(m(i, j));
    }
    return s;
  };
  if (e.quantity == Quantity::g_hom) return "zeta=" + mat(e.zeta.transpose()) + " nu=" + mat(e.nu.transpose());
  return "xi=" + mat(e.xi);
}

}  // namespace detail

/// Parses and validates a config; defaults: h = 0.25, k = 1, r = {4,8,16} (n = 2)
/// or {8,16,32,64} (n = 1), center = 0, nu = e_n.
inline RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  std::string canonical;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = detail::trim(t.substr(0, eq));
    const std::string val = detail::trim(t.substr(eq + 1));
    auto fail = [&](const std::string& why) -> ConfigError {
      return ConfigError("line " + std::to_string(lineno) + ": key '" + key + "': " + why);
    };
    if (!seen.insert(key).second) throw fail("duplicate key");
    canonical += key + "=" + val + "\n";
    try {
      if (key == "command") {
        static const std::map<std::string, Command> cmds{{"fhom", Command::fhom},   {"finfhom", Command::finfhom},
                                                         {"ghom", Command::ghom},   {"mc", Command::mc},
                                                         {"mu", Command::mu},       {"verify", Command::verify},
                                                         {"sweep", Command::sweep}};
        const auto it = cmds.find(val);
        if (it == cmds.end()) throw fail("unknown command '" + val + "'");
        cfg.command = it->second;
      } else if (key == "integrand") {
        parse_integrand(val);
        cfg.integrand = val;
      } else if (key == "catalog") {
        cfg.catalog = detail::list_items(val);
        for (const auto& id : cfg.catalog) parse_integrand(id);
      } else if (key == "xi") {
        for (const auto& item : detail::list_items(val)) cfg.xi.push_back(detail::parse_gradient(item));
      } else if (key == "zeta") {
        for (const auto& item : detail::list_items(val))
          cfg.zeta.push_back(detail::to_point(detail::parse_reals(item, "zeta")));
      } else if (key == "nu") {
        for (const auto& item : detail::list_items(val)) {
          Point p = detail::to_point(detail::parse_reals(item, "nu"));
          rotation_for_normal(p);
          cfg.nu.push_back(p);
        }
      } else if (key == "r") {
        cfg.r = detail::parse_reals(val, "r");
        cfg.r_explicit = true;
      } else if (key == "h") {
        cfg.h = detail::parse_double(val, "h");
      } else if (key == "k") {
        cfg.k = static_cast<int>(detail::parse_int(val, "k"));
      } else if (key == "center") {
        cfg.center = detail::to_point(detail::parse_reals(val, "center"));
      } else if (key == "tol_r") {
        cfg.tol_r = detail::parse_double(val, "tol_r");
      } else if (key == "route") {
        if (val != "hom_of_recession" && val != "recession_of_hom" && val != "both")
          throw fail("expected hom_of_recession, recession_of_hom or both");
        cfg.route = val;
      } else if (key == "t") {
        cfg.t = detail::parse_reals(val, "t");
      } else if (key == "seeds") {
        for (const auto& s : detail::split(val, ',')) cfg.seeds.push_back(detail::parse_uint(detail::trim(s), "seed"));
      } else if (key == "quantity") {
        if (val != "f_hom" && val != "g_hom") throw fail("expected f_hom or g_hom");
        cfg.quantity = val;
      } else if (key == "box") {
        for (const auto& item : detail::list_items(val)) cfg.boxes.push_back(detail::parse_box(item));
      } else if (key == "multiplier_cap") {
        cfg.multiplier_cap = static_cast<int>(detail::parse_int(val, "multiplier_cap"));
      } else if (key == "out") {
        cfg.out = val;
      } else if (key == "format_version") {
        cfg.format_version = static_cast<int>(detail::parse_int(val, "format_version"));
      } else if (key == "solver.delta") {
        cfg.solver.delta_schedule = detail::parse_reals(val, "solver.delta");
      } else if (key == "solver.am_max_iters") {
        cfg.solver.am_max_iters = static_cast<int>(detail::parse_int(val, key));
      } else if (key == "solver.am_rel_tol") {
        cfg.solver.am_rel_tol = detail::parse_double(val, key);
      } else if (key == "solver.inner_tol") {
        cfg.solver.inner_tol = detail::parse_double(val, key);
      } else if (key == "solver.inner_max_iters") {
        cfg.solver.inner_max_iters = static_cast<int>(detail::parse_int(val, key));
      } else if (key == "solver.v_floor") {
        cfg.solver.v_floor = detail::parse_double(val, key);
      } else if (key == "solver.v_dip") {
        cfg.solver.v_dip = detail::parse_double(val, key);
      } else if (key == "solver.rng_seed") {
        cfg.solver.rng_seed = detail::parse_uint(val, key);
      } else {
        throw fail("unknown key");
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw fail(e.what());
    }
  }
  cfg.source = canonical;

  auto invalid = [](const std::string& why) { return ConfigError("config: " + why); };
  if (cfg.format_version != kReportFormatVersion)
    throw invalid("unsupported format_version " + std::to_string(cfg.format_version));
  const int n = cfg.dim();
  for (const auto& x : cfg.xi)
    if (x.cols() != n) throw invalid("xi entries must share the dimension n");
  for (const auto& v : cfg.nu)
    if (v.size() != n) throw invalid("nu entries must share the dimension n");
  if (cfg.center && cfg.center->size() != n) throw invalid("center dimension does not match");
  if (cfg.r.empty()) cfg.r = n == 1 ? std::vector<double>{8, 16, 32, 64} : std::vector<double>{4, 8, 16};
  if (!(cfg.h > 0.0)) throw invalid("h must be positive");
  if (cfg.k < 1) throw invalid("k must be >= 1");
  if (cfg.nu.empty()) cfg.nu.push_back(basis_vector(n, n - 1));
  try {
    cfg.solver.validate();
  } catch (const std::exception& e) {
    throw invalid(e.what());
  }
  Schedule s = Schedule::standard(n, cfg.r, cfg.h);
  s.k = cfg.k;
  s.tol_r = cfg.tol_r;
  try {
    s.validate(n);
  } catch (const std::exception& e) {
    throw invalid(e.what());
  }

  const bool random = parse_integrand(cfg.integrand).random.has_value();
  switch (cfg.command) {
    case Command::fhom:
    case Command::finfhom:
      if (cfg.xi.empty()) throw invalid("xi required");
      break;
    case Command::ghom:
      if (cfg.zeta.empty()) throw invalid("zeta required");
      break;
    case Command::mc:
      if (cfg.seeds.empty()) throw invalid("seeds required");
      if (cfg.seeds.size() < 2) throw invalid("mc needs at least 2 seeds");
      if (!random) throw invalid("mc requires a random integrand (checkerboard)");
      if (cfg.quantity == "f_hom" && cfg.xi.empty()) throw invalid("xi required");
      if (cfg.quantity == "g_hom" && cfg.zeta.empty()) throw invalid("zeta required");
      break;
    case Command::mu:
      if (!random) throw invalid("mu requires a random integrand (checkerboard)");
      if (cfg.zeta.empty()) throw invalid("zeta required");
      if (cfg.boxes.empty()) throw invalid("box required");
      if (n < 2) throw invalid("mu requires n >= 2");
      for (const auto& b : cfg.boxes)
        if (b.dim() != n - 1) throw invalid("box must have dimension n-1");
      break;
    case Command::verify:
    case Command::sweep:
      break;
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// CSV output (format version 1)

inline const char* results_header() {
  return "quantity,route,integrand,argument,seed,t,r,h,scaled_value,raw_value,iterations,converged,initial_energy";
}

inline const char* summary_header() {
  return "quantity,route,integrand,argument,r_values,scaled_values,extrapolated,cauchy_gap,richardson,"
         "ensemble_mean,ensemble_std,ensemble_half_width,ensemble_spread,warnings";
}

/// Accumulates result and summary rows in a deterministic order.
class ReportWriter {
 public:
  /// One results row per cell solve.
  void add(const HomEstimate& e, double h) {
    const std::string head = std::string(to_string(e.quantity)) + "," + to_string(e.route) + "," +
                             csv_field(e.integrand_id) + "," + csv_field(detail::argument_string(e)) + ",";
    const std::size_t nr = e.r_values.size();
    const std::size_t nt = e.t_values.empty() ? 1 : e.t_values.size();
    for (std::size_t idx = 0; idx < e.per_r_results.size(); ++idx) {
      const CellResult& res = e.per_r_results[idx];
      std::string seed = "", t = "";
      double r = 0.0, scaled = 0.0;
      if (e.ensemble) {
        seed = std::to_string(e.ensemble->seeds[idx]);
        r = e.r_values.front();
        scaled = e.ensemble->values[idx];
      } else if (!e.t_values.empty()) {
        const std::size_t j = idx / nr, i = idx % nr;
        t = detail::num(e.t_values[j]);
        r = e.r_values[i];
        scaled = j + 1 == nt ? e.scaled_values[i] : std::numeric_limits<double>::quiet_NaN();
      } else {
        r = e.r_values[idx];
        scaled = e.scaled_values[idx];
      }
      results_ += head + seed + "," + t + "," + detail::num(r) + "," + detail::num(h) + "," +
                  (std::isnan(scaled) ? std::string() : detail::num(scaled)) + "," + detail::num(res.value) + "," +
                  std::to_string(res.iterations) + "," + (res.converged ? "1" : "0") + "," +
                  detail::num(res.initial_energy) + "\n";
      all_converged_ = all_converged_ && res.converged;
    }
    std::string warn;
    for (const auto& w : e.warnings) warn += (warn.empty() ? "" : "|") + w;
    summary_ += head + detail::join(e.r_values) + "," + detail::join(e.scaled_values) + "," +
                detail::num(e.extrapolated) + "," + detail::num(e.cauchy_gap) + "," +
                (e.richardson ? detail::num(*e.richardson) : "") + ",";
    if (e.ensemble)
      summary_ += detail::num(e.ensemble->mean) + "," + detail::num(e.ensemble->sample_std) + "," +
                  detail::num(e.ensemble->half_width) + "," + detail::num(e.ensemble->spread);
    else
      summary_ += ",,,";
    summary_ += "," + csv_field(warn) + "\n";
  }

  /// Results row for a subadditive-process value.
  void add_process(const std::string& model_id, const std::string& argument, double h, const ProcessValue& pv) {
    results_ += std::string("mu,none,") + csv_field(model_id) + "," + csv_field(argument) + ",,,," +
                detail::num(h) + "," + detail::num(pv.value) + "," + detail::num(pv.result.value) + "," +
                std::to_string(pv.result.iterations) + "," + (pv.result.converged ? "1" : "0") + "," +
                detail::num(pv.result.initial_energy) + "\n";
    all_converged_ = all_converged_ && pv.result.converged;
  }

  void add_checks(const std::vector<PropertyCheck>& checks) {
    for (const auto& c : checks) {
      checks_.push_back(c);
      all_passed_ = all_passed_ && c.passed;
    }
  }

  std::string results_csv() const { return std::string(results_header()) + "\n" + results_; }
  std::string summary_csv() const { return std::string(summary_header()) + "\n" + summary_; }
  const std::vector<PropertyCheck>& checks() const { return checks_; }
  bool all_converged() const { return all_converged_; }
  bool all_passed() const { return all_passed_; }

  static std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  }

 private:
  std::string results_, summary_;
  std::vector<PropertyCheck> checks_;
  bool all_converged_ = true;
  bool all_passed_ = true;
};

struct RunOverrides {
  std::optional<std::string> out;
  std::optional<int> jobs;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol_scale;
};

/// Applies command-line overrides. --seed-override S replaces the seed list by
/// S, S+1, ... (same length) and the master seed of a checkerboard integrand by S.
inline RunConfig apply_overrides(RunConfig cfg, const RunOverrides& o) {
  if (o.out) cfg.out = *o.out;
  if (o.jobs) {
    if (*o.jobs < 1) throw ConfigError("--jobs must be >= 1");
    cfg.jobs = *o.jobs;
  }
  if (o.tol_scale) {
    if (!(*o.tol_scale > 0.0)) throw ConfigError("--tol-scale must be positive");
    cfg.tol_scale = *o.tol_scale;
  }
  if (o.seed) {
    for (std::size_t i = 0; i < cfg.seeds.size(); ++i) cfg.seeds[i] = *o.seed + i;
    const CatalogEntry e = parse_integrand(cfg.integrand);
    if (e.random) cfg.integrand = e.random->with_seed(*o.seed).id();
    cfg.source += "seed_override=" + std::to_string(*o.seed) + "\n";
  }
  if (o.tol_scale) cfg.source += "tol_scale=" + detail::num(cfg.tol_scale) + "\n";
  return cfg;
}

struct RunOutcome {
  int exit_code = 0;
  ReportWriter report;
  std::string message;
};

namespace detail {

inline Schedule schedule_of(const RunConfig& cfg, int n) {
  Schedule s = Schedule::standard(n, cfg.r, cfg.h);
  s.k = cfg.k;
  s.tol_r = cfg.tol_r * cfg.tol_scale;
  if (cfg.center) s.center = *cfg.center;
  s.nu = cfg.nu.front();
  return s;
}

inline void run_fhom(const RunConfig& cfg, const Integrand& g, const Executor& ex, ReportWriter& rep) {
  const Schedule s = schedule_of(cfg, cfg.dim());
  const auto ests = ex.map(cfg.xi.size(), [&](std::size_t i) { return estimate_f_hom(g, cfg.xi[i], s, cfg.solver); });
  for (const auto& e : ests) rep.add(e, cfg.h);
}

inline void run_ghom(const RunConfig& cfg, const Integrand& g, const Executor& ex, ReportWriter& rep) {
  const Integrand ginf = recession_integrand(g);
  const Schedule s = schedule_of(cfg, cfg.dim());
  std::vector<std::pair<Amplitude, Point>> args;
  for (const auto& z : cfg.zeta)
    for (const auto& v : cfg.nu) args.push_back({z, v});
  const auto ests = ex.map(args.size(), [&](std::size_t i) {
    return estimate_g_hom(ginf, args[i].first, args[i].second, s, cfg.solver);
  });
  for (const auto& e : ests) rep.add(e, cfg.h);
}

inline void run_finfhom(const RunConfig& cfg, const Integrand& g, const Executor& ex, ReportWriter& rep) {
  const Schedule s = schedule_of(cfg, cfg.dim());
  std::vector<RecessionRoute> routes;
  if (cfg.route != "recession_of_hom") routes.push_back(RecessionRoute::hom_of_recession);
  if (cfg.route != "hom_of_recession") routes.push_back(RecessionRoute::recession_of_hom);
  const std::size_t nr = routes.size();
  const auto ests = ex.map(cfg.xi.size() * nr, [&](std::size_t i) {
    return estimate_f_inf_hom(g, cfg.xi[i / nr], routes[i % nr], s, cfg.solver, cfg.t);
  });
  for (const auto& e : ests) rep.add(e, cfg.h);
  if (nr == 2) {
    std::vector<PropertyCheck> checks;
    for (std::size_t i = 0; i < cfg.xi.size(); ++i)
      checks.push_back(check_recession_routes(ests[2 * i], ests[2 * i + 1], 0.02 * cfg.tol_scale));
    rep.add_checks(checks);
  }
}

inline void run_mc(const RunConfig& cfg, const RandomIntegrandModel& model, const Executor& ex, ReportWriter& rep) {
  const int n = cfg.dim();
  QuantitySpec q;
  q.quantity = cfg.quantity == "f_hom" ? Quantity::f_hom : Quantity::g_hom;
  q.h = cfg.h;
  q.k = cfg.k;
  q.center = cfg.center ? *cfg.center : Point(Point::Zero(n));
  q.nu = cfg.nu.front();
  std::vector<std::pair<std::size_t, double>> jobs;  // (argument, r)
  const std::size_t nargs = q.quantity == Quantity::f_hom ? cfg.xi.size() : cfg.zeta.size();
  for (std::size_t a = 0; a < nargs; ++a)
    for (double r : cfg.r) jobs.push_back({a, r});
  const auto ests = ex.map(jobs.size(), [&](std::size_t i) {
    QuantitySpec qi = q;
    if (q.quantity == Quantity::f_hom) qi.xi = cfg.xi[jobs[i].first];
    else qi.zeta = cfg.zeta[jobs[i].first];
    return mc_expectation(model, qi, cfg.seeds, jobs[i].second, cfg.solver);
  });
  for (const auto& e : ests) rep.add(e, cfg.h);
}

inline void run_mu(const RunConfig& cfg, const RandomIntegrandModel& model, const Executor& ex, ReportWriter& rep) {
  ProcessOptions po;
  po.h = cfg.h;
  po.multiplier_cap = cfg.multiplier_cap;
  po.solver = cfg.solver;
  std::vector<std::tuple<Amplitude, Point, HalfOpenBox>> args;
  for (const auto& z : cfg.zeta)
    for (const auto& v : cfg.nu)
      for (const auto& b : cfg.boxes) args.emplace_back(z, v, b);
  const auto vals = ex.map(args.size(), [&](std::size_t i) {
    const auto& [z, v, b] = args[i];
    return subadditive_process(model, z, v, b, po);
  });
  for (std::size_t i = 0; i < args.size(); ++i) {
    const auto& [z, v, b] = args[i];
    std::string arg = "zeta=" + join(std::vector<double>(z.data(), z.data() + z.size()), ' ') +
                      " nu=" + join(std::vector<double>(v.data(), v.data() + v.size()), ' ') + " box=";
    for (int d = 0; d < b.dim(); ++d) arg += (d ? " " : "") + num(b.lo[d]) + ":" + num(b.hi[d]);
    rep.add_process(model.id(), arg, cfg.h, vals[i]);
  }
}

inline std::vector<SuiteEntry> catalog_of(const RunConfig& cfg) {
  if (cfg.catalog.empty()) return default_catalog();
  std::vector<SuiteEntry> out;
  for (const auto& id : cfg.catalog) {
    const CatalogEntry e = parse_integrand(id);
    const double C = e.random ? e.random->declared_C() : e.deterministic->C();
    out.push_back({id, e.integrand(), C});
  }
  return out;
}

inline void run_verify(const RunConfig& cfg, const Executor& ex, ReportWriter& rep) {
  SuiteConfig sc;
  const int n = cfg.dim();
  if (cfg.r_explicit) {
    sc.fhom = schedule_of(cfg, n);
    sc.ghom = schedule_of(cfg, n);
  } else {
    for (Schedule* s : {&sc.fhom, &sc.ghom}) {
      *s = Schedule::standard(n, s->r, cfg.h);
      s->tol_r *= cfg.tol_scale;
      if (cfg.center) s->center = *cfg.center;
    }
  }
  sc.ghom.nu = cfg.nu.front();
  if (!cfg.xi.empty()) sc.xi_grid = cfg.xi;
  if (!cfg.zeta.empty()) {
    sc.zetas.clear();
    for (const auto& z : cfg.zeta) sc.zetas.push_back(z(0));
  }
  sc.tol_scale = cfg.tol_scale;
  sc.opts = cfg.solver;
  const SuiteResult res = run_property_suite(catalog_of(cfg), sc, ex);
  for (const auto& e : res.estimates) rep.add(e, cfg.h);
  rep.add_checks(res.checks);
}

inline void run_sweep(const RunConfig& cfg, const Executor& ex, ReportWriter& rep) {
  for (const auto& entry : catalog_of(cfg)) {
    if (!cfg.xi.empty()) run_fhom(cfg, entry.g, ex, rep);
    if (!cfg.zeta.empty()) run_ghom(cfg, entry.g, ex, rep);
  }
}

inline std::string manifest_text(const RunConfig& cfg, const ReportWriter& rep) {
  std::ostringstream os;
  os << "config_hash=" << hex(fnv1a(cfg.source)) << '\n'
     << "command=" << to_string(cfg.command) << '\n'
     << "integrand=" << cfg.integrand << '\n'
     << "seeds=";
  for (std::size_t i = 0; i < cfg.seeds.size(); ++i) os << (i ? "," : "") << cfg.seeds[i];
  os << '\n'
     << "solver_rng_seed=" << cfg.solver.rng_seed << '\n'
     << "format_version=" << cfg.format_version << '\n'
     << "phasehom_version=" << kVersion << '\n'
     << "eigen_version=" << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION << '\n'
     << "jobs=" << cfg.jobs << '\n'
     << "tol_scale=" << num(cfg.tol_scale) << '\n'
     << "all_converged=" << (rep.all_converged() ? 1 : 0) << '\n'
     << "checks=" << rep.checks().size() << '\n'
     << "checks_passed=" << (rep.all_passed() ? 1 : 0) << '\n';
  return os.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + p.string() + " for writing");
  f << text;
  if (!f) throw std::runtime_error("write to " + p.string() + " failed");
}

}  // namespace detail

/// Executes the command and writes results.csv, summary.csv, manifest and (for
/// commands with checks) verify.report into cfg.out. Exit code: 0 when every
/// check passed and every solve converged, 2 otherwise, 1 on operational errors.
inline RunOutcome run(const RunConfig& cfg) {
  RunOutcome out;
  try {
    const Executor ex(cfg.jobs);
    const CatalogEntry entry = parse_integrand(cfg.integrand);
    switch (cfg.command) {
      case Command::fhom: detail::run_fhom(cfg, entry.integrand(), ex, out.report); break;
      case Command::finfhom: detail::run_finfhom(cfg, entry.integrand(), ex, out.report); break;
      case Command::ghom: detail::run_ghom(cfg, entry.integrand(), ex, out.report); break;
      case Command::mc: detail::run_mc(cfg, *entry.random, ex, out.report); break;
      case Command::mu: detail::run_mu(cfg, *entry.random, ex, out.report); break;
      case Command::verify: detail::run_verify(cfg, ex, out.report); break;
      case Command::sweep: detail::run_sweep(cfg, ex, out.report); break;
    }
    const std::filesystem::path dir(cfg.out);
    std::filesystem::create_directories(dir);
    detail::write_file(dir / "results.csv", out.report.results_csv());
    detail::write_file(dir / "summary.csv", out.report.summary_csv());
    detail::write_file(dir / "manifest", detail::manifest_text(cfg, out.report));
    if (!out.report.checks().empty()) {
      std::ostringstream rep;
      write_verify_report(rep, out.report.checks());
      detail::write_file(dir / "verify.report", rep.str());
    }
    out.exit_code = out.report.all_passed() && out.report.all_converged() ? 0 : 2;
    if (!out.report.all_passed()) out.message = "one or more checks failed";
    else if (!out.report.all_converged()) out.message = "one or more solves did not converge";
  } catch (const std::exception& e) {
    out.exit_code = 1;
    out.message = e.what();
  }
  return out;
}

}  // namespace phasehom
