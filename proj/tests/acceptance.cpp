// Acceptance gate: one PASS/FAIL line per criterion. Criteria 1-7 run twice
// (one and four workers); criterion 8 scans every cell solve of the first
// pass and criterion 9 compares the two results.csv files byte for byte.
#include "phasehom/cli.hpp"

#include "oracles.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

using namespace phasehom;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct CellRecord {
  std::string label;
  CellResult res;
};

struct Pass {
  const Executor* ex = nullptr;
  ReportWriter report;
  std::vector<CellRecord> cells;
  std::vector<PropertyCheck> checks;

  void keep(const HomEstimate& e, double h) {
    report.add(e, h);
    for (const auto& r : e.per_r_results) cells.push_back({e.integrand_id + " " + to_string(e.quantity), r});
  }
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string rel(double v, double target) { return fmt("%+.2f%%", 100.0 * (v / target - 1.0)); }

// 1. 1D cohesive law g(s) = 2s/(s+2).
Outcome cohesive_law(Pass& p) {
  const std::vector<double> jumps{0.5, 1, 2, 4, 8};
  const Schedule s = Schedule::standard(1, {16}, 0.05);
  const auto ests = p.ex->map(jumps.size(), [&](std::size_t i) {
    return estimate_g_hom(euclid(), make_amplitude({jumps[i]}), make_point({1}), s, SolverOptions{});
  });
  Outcome o{true, ""};
  for (std::size_t i = 0; i < jumps.size(); ++i) {
    p.keep(ests[i], s.h);
    const double target = 2 * jumps[i] / (jumps[i] + 2);
    o.passed = o.passed && std::abs(ests[i].extrapolated / target - 1) <= 0.02;
    o.detail += "s=" + detail::num(jumps[i]) + ":" + rel(ests[i].extrapolated, target) + " ";
  }
  return o;
}

// 2. 2D isotropic surface density, zeta = 1, nu = e2.
Outcome isotropic_surface(Pass& p) {
  const Schedule s = Schedule::standard(2, {8, 16});
  const HomEstimate e = estimate_g_hom(euclid(), make_amplitude({1}), make_point({0, 1}), s, {}, *p.ex);
  p.keep(e, s.h);
  const double target = 2.0 / 3.0;
  bool ok = e.scaled_values[1] <= e.scaled_values[0] * 1.02;
  for (double v : e.scaled_values) ok = ok && std::abs(v / target - 1) <= 0.15;
  return {ok, "r=8:" + fmt("%.4f", e.scaled_values[0]) + " r=16:" + fmt("%.4f", e.scaled_values[1]) +
                  " target 0.6667"};
}

// 3. Bulk exactness for homogeneous convex densities.
Outcome bulk_exactness(Pass& p) {
  const Schedule s = Schedule::standard(2, {4, 8, 16});
  struct Arg {
    Integrand g;
    Grad xi;
  };
  const std::vector<Arg> args{{euclid(), make_grad({1, 0})}, {euclid(), make_grad({1, 1})},
                              {euclid(), make_grad({2, -1})}, {area(), make_grad({0, 0})},
                              {area(), make_grad({1, 0})},    {area(), make_grad({0.5, -2})}};
  const auto ests =
      p.ex->map(args.size(), [&](std::size_t i) { return estimate_f_hom(args[i].g, args[i].xi, s, SolverOptions{}); });
  double worst = 0.0;
  for (std::size_t i = 0; i < args.size(); ++i) {
    p.keep(ests[i], s.h);
    const double exact = args[i].g(Point::Zero(2), args[i].xi);
    for (double v : ests[i].scaled_values) worst = std::max(worst, std::abs(v - exact));
  }
  return {worst <= 1e-3, "max |est - f(xi)| = " + fmt("%.2e", worst)};
}

// 4. 1D laminate against the discrete LP oracle.
Outcome laminate_oracle(Pass& p) {
  const double r = 8, h = 0.05;
  const Integrand g = laminate(1, 2, 1, 0, euclid());
  const CellDomain cell = make_cell(make_point({0}), r, make_point({1}), 1, h);
  std::vector<double> a;
  for (const Point& y : GridOperators(cell).cell_centers) a.push_back(g.coefficient(y));
  const double oracle_value = oracle::laminate_lp(a, h, 1.0, r) / r;
  const HomEstimate e = estimate_f_hom(g, make_grad({1}), Schedule::standard(1, {r}, h), {}, *p.ex);
  p.keep(e, h);
  const bool ok = std::abs(oracle_value - 1.0) < 1e-9 && std::abs(e.extrapolated / oracle_value - 1) <= 0.1;
  return {ok, "oracle " + fmt("%.6f", oracle_value) + " estimate " + fmt("%.6f", e.extrapolated)};
}

// 5. The two recession routes agree.
Outcome recession_routes(Pass& p) {
  const Schedule s = Schedule::standard(2, {8});
  struct Arg {
    std::string name;
    Integrand g;
    double tol;
  };
  const std::vector<Arg> dens{{"euclid", euclid(), 0.02},
                              {"area", area(), 0.02},
                              {"laminate", laminate(1, 2, 1, 0, euclid()), 0.05},
                              {"laminate_area", laminate(1, 2, 1, 0, area()), 0.05}};
  const std::vector<Grad> xis{make_grad({1, 0}), make_grad({1, 1})};
  const std::size_t per = 2 * xis.size();
  const auto ests = p.ex->map(dens.size() * per, [&](std::size_t i) {
    const Arg& d = dens[i / per];
    const Grad& xi = xis[(i % per) / 2];
    const auto route = i % 2 == 0 ? RecessionRoute::hom_of_recession : RecessionRoute::recession_of_hom;
    return estimate_f_inf_hom(d.g, xi, route, s, SolverOptions{});
  });
  Outcome o{true, ""};
  for (std::size_t i = 0; i < ests.size(); i += 2) {
    p.keep(ests[i], s.h);
    p.keep(ests[i + 1], s.h);
    const Arg& d = dens[i / per];
    const PropertyCheck c = check_recession_routes(ests[i], ests[i + 1], d.tol);
    p.checks.push_back(c);
    o.passed = o.passed && c.passed;
    if (i % per == 0) o.detail += d.name + ":" + fmt("%.2e", c.margin) + " ";
  }
  return o;
}

// 6. Property suite over the default catalog.
Outcome property_suite(Pass& p) {
  const SuiteConfig cfg;
  const SuiteResult res = run_property_suite(default_catalog(), cfg, *p.ex);
  for (const auto& e : res.estimates) p.keep(e, e.quantity == Quantity::g_hom ? cfg.ghom.h : cfg.fhom.h);
  Outcome o{true, ""};
  int failed = 0;
  for (const auto& c : res.checks) {
    p.checks.push_back(c);
    if (!c.passed) {
      ++failed;
      o.detail += c.name + "(" + fmt("%.3f", c.margin) + ") ";
    }
  }
  o.passed = failed == 0;
  o.detail = std::to_string(res.checks.size() - failed) + "/" + std::to_string(res.checks.size()) + " checks pass " +
             o.detail;
  return o;
}

// 7. Stochastic layer: ensemble bounds, spread, subadditive process.
Outcome stochastic_layer(Pass& p) {
  const RandomIntegrandModel model = make_checkerboard(1, 1, 2, euclid());
  QuantitySpec q;
  q.xi = make_grad({1, 0});
  const std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8};
  bool ok = true;
  std::vector<double> stds;
  for (double r : {8.0, 16.0}) {
    const HomEstimate e = mc_expectation(model, q, seeds, r, {}, *p.ex);
    p.keep(e, q.h);
    for (double v : e.ensemble->values) ok = ok && v >= 1 - 0.03 && v <= 2 + 0.03;
    stds.push_back(e.ensemble->sample_std);
  }
  std::string d = "std r8=" + fmt("%.4f", stds[0]) + " r16=" + fmt("%.4f", stds[1]);
  d += stds[1] <= stds[0] ? " (spread shrinks)" : " (soft: spread grew)";

  const ProcessOptions po;
  ProcessSplit halving;
  halving.whole = HalfOpenBox{{0}, {2}};
  halving.parts = {HalfOpenBox{{0}, {1}}, HalfOpenBox{{1}, {2}}};
  const std::vector<ProcessSplit> splits{halving};
  const std::vector<std::vector<double>> shifts{{1}};
  for (const Point& nu : {make_point({0, 1}), make_point({1, 0})}) {
    std::vector<ProcessValue> solves;
    const ProcessChecks pc =
        check_subadditive_process(model, make_amplitude({1}), nu, splits, shifts, po, 0.05, 0.05, *p.ex, &solves);
    for (const auto& pv : solves) {
      p.report.add_process(model.id(), "zeta=1 nu=" + detail::num(nu(0)) + " " + detail::num(nu(1)), po.h, pv);
      p.cells.push_back({model.id() + " mu", pv.result});
    }
    for (const auto& c : {pc.subadditivity, pc.boundedness, pc.stationarity}) {
      p.checks.push_back(c);
      ok = ok && c.passed;
    }
    d += " nu=(" + detail::num(nu(0)) + "," + detail::num(nu(1)) + ") sub=" + fmt("%.3f", pc.subadditivity.margin) +
         " stat=" + fmt("%.1e", pc.stationarity.margin);
  }
  return {ok, d};
}

// 8. Solver invariants over every recorded cell solve.
Outcome solver_invariants(const Pass& p, double inner_tol) {
  std::size_t bad = 0;
  std::string first;
  for (const auto& c : p.cells) {
    const auto& t = c.res.energy_trace;
    bool ok = !t.empty() && c.res.value <= c.res.initial_energy;
    for (std::size_t i = 1; i < t.size(); ++i) ok = ok && t[i] <= t[i - 1] + inner_tol * (1 + std::abs(t[i - 1]));
    ok = ok && std::abs(c.res.value - t.back()) <= 1e-12 * (1 + std::abs(t.back()));
    if (!ok && bad++ == 0) first = c.label;
  }
  return {bad == 0, std::to_string(p.cells.size()) + " cell solves, " + std::to_string(bad) + " violations" +
                        (bad ? " (first: " + first + ")" : "")};
}

using Criterion = std::function<Outcome(Pass&)>;

struct Spec {
  int id;
  std::string title;
  double budget_seconds;
  Criterion run;
};

const std::vector<Spec>& criteria() {
  static const std::vector<Spec> list{
      {1, "1D cohesive law", 10, cohesive_law},
      {2, "2D isotropic surface density", 300, isotropic_surface},
      {3, "bulk exactness", 30, bulk_exactness},
      {4, "1D laminate oracle", 10, laminate_oracle},
      {5, "recession-route agreement", 120, recession_routes},
      {6, "property suite", 600, property_suite},
      {7, "stochastic layer", 900, stochastic_layer},
  };
  return list;
}

std::vector<Outcome> run_pass(Pass& p) {
  std::vector<Outcome> out;
  for (const auto& c : criteria()) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run(p);
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.push_back(o);
  }
  return out;
}

void line(bool passed, int id, const std::string& title, const std::string& detail) {
  std::cout << (passed ? "[PASS]" : "[FAIL]") << " criterion " << id << ": " << title << " -- " << detail
            << std::endl;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance gate"};
  std::string out = "acceptance_out";
  app.add_option("--out", out, "Directory for the two result sets");
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(out);

  const Executor serial(1), parallel(4);
  Pass first;
  first.ex = &serial;
  const std::vector<Outcome> outcomes = run_pass(first);

  int failures = 0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    const Spec& c = criteria()[i];
    const Outcome& o = outcomes[i];
    const bool in_time = o.seconds <= c.budget_seconds;
    const bool ok = o.passed && in_time;
    failures += ok ? 0 : 1;
    line(ok, c.id, c.title,
         o.detail + " [" + fmt("%.1f", o.seconds) + " s / " + fmt("%.0f", c.budget_seconds) + " s" +
             (in_time ? "" : ", over budget") + "]");
  }

  const Outcome inv = solver_invariants(first, SolverOptions{}.inner_tol);
  failures += inv.passed ? 0 : 1;
  line(inv.passed, 8, "solver invariants", inv.detail);

  Pass second;
  second.ex = &parallel;
  run_pass(second);
  const std::string a = first.report.results_csv(), b = second.report.results_csv();
  write(fs::path(out) / "results.csv", a);
  write(fs::path(out) / "results_pass2.csv", b);
  write(fs::path(out) / "summary.csv", first.report.summary_csv());
  std::ostringstream rep;
  write_verify_report(rep, first.checks);
  write(fs::path(out) / "verify.report", rep.str());
  const bool same = a == b;
  failures += same ? 0 : 1;
  line(same, 9, "determinism",
       std::string(same ? "byte-identical" : "results differ") + " results.csv across 1- and 4-worker passes (" +
           std::to_string(std::count(a.begin(), a.end(), '\n')) + " lines)");

  std::cout << (failures == 0 ? "acceptance: all criteria pass" : "acceptance: " + std::to_string(failures) +
                                                                       " criteria fail")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
