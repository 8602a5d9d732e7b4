// nadyn: command-line front end for the exact analysis engine.
//
// Exit codes: 0 analysis completed, 1 a `verify` scenario failed its checks,
// 2 malformed input, 3 propagation budget exceeded, 4 unknown command or
// example.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nadyn/nadyn.hpp"

namespace {

using nadyn::Interval;
using nadyn::IntervalSet;
using nadyn::Rational;
using nadyn::Schedule;
using nadyn::io::Json;

constexpr int kExitVerifyFailed = 1;
constexpr int kExitMalformed = 2;
constexpr int kExitBudget = 3;
constexpr int kExitUnknown = 4;

const std::vector<std::string> kCommands{"eval",         "image",   "preimage", "correlate",   "cesaro",
                                         "density",      "kvn",     "hitting",  "transitivity", "weakmix",
                                         "mixing",       "sensitivity", "mc",   "verify"};

struct Options {
  std::string system;
  std::string out;
  std::string x;
  std::string set;
  std::string a;
  std::string b;
  std::string u;
  std::string v;
  std::string w;
  std::string grid;
  std::string delta;
  std::string x0;
  std::string y0;
  std::string scale;
  std::string members;
  std::string pattern;
  std::string values;
  std::string csv;
  std::string scenario;
  std::string quantity = "correlation";
  std::string epsilon = "1/16";
  std::int64_t n = 1;
  std::int64_t horizon = 0;
  std::int64_t tail = 1;
  std::int64_t levels = 8;
  std::int64_t samples = nadyn::mc::SampleConfig{}.sample_count;
  std::uint64_t seed = nadyn::mc::SampleConfig{}.seed;
  unsigned threads = 0;
};

struct BudgetInfo {
  nadyn::PropagationBudget budget;
  std::string source;
};

BudgetInfo resolve_budget() {
  const char* env = std::getenv("NADYN_BUDGET");
  return {nadyn::PropagationBudget::from_env(), env && *env ? "NADYN_BUDGET" : "default"};
}

IntervalSet parse_set(const std::string& text, const char* flag) {
  if (text.empty()) throw nadyn::InvalidArgument(std::string("missing required set ") + flag);
  return nadyn::io::parse_interval_set(text);
}

Rational parse_rational(const std::string& text, const char* flag) {
  if (text.empty()) throw nadyn::InvalidArgument(std::string("missing required value ") + flag);
  return Rational::parse(text);
}

void require_positive(std::int64_t v, const char* flag) {
  if (v < 1) throw nadyn::InvalidArgument(std::string(flag) + " must be >= 1");
}

/// Indicator-style index sets for density and kvn.
nadyn::IndexSet pattern_set(const std::string& pattern, std::int64_t horizon) {
  if (pattern == "squares") {
    return nadyn::IndexSet::where(horizon, [](std::int64_t k) {
      std::int64_t r = 0;
      while ((r + 1) * (r + 1) <= k) ++r;
      return r * r == k;
    });
  }
  if (pattern == "evens") return nadyn::IndexSet::where(horizon, [](std::int64_t k) { return k % 2 == 0; });
  if (pattern == "odds") return nadyn::IndexSet::where(horizon, [](std::int64_t k) { return k % 2 == 1; });
  const std::string prefix = "multiples:";
  if (pattern.rfind(prefix, 0) == 0) {
    const std::int64_t d = std::stoll(pattern.substr(prefix.size()));
    if (d < 1) throw nadyn::InvalidArgument("multiples:K needs K >= 1");
    return nadyn::IndexSet::where(horizon, [d](std::int64_t k) { return k % d == 0; });
  }
  throw nadyn::InvalidArgument("unknown pattern '" + pattern + "' (squares, evens, odds, multiples:K)");
}

std::vector<std::int64_t> parse_members(const std::string& text) {
  std::vector<std::int64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    std::size_t used = 0;
    const long long v = std::stoll(item, &used);
    if (item.find_first_not_of(" \t", used) != std::string::npos) {
      throw nadyn::InvalidArgument("malformed index '" + item + "'");
    }
    out.push_back(v);
  }
  return out;
}

std::vector<Rational> parse_values(const std::string& text) {
  std::vector<Rational> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(Rational::parse(item));
  return out;
}

Json rational_list(const std::vector<Rational>& v) { return nadyn::io::rationals(v); }

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw nadyn::InvalidArgument("cannot write '" + path + "'");
  f << text;
}

// ---------------------------------------------------------------------------
// verify scenarios

struct Check {
  std::string name;
  bool pass;
};

Json checks_json(const std::vector<Check>& checks, bool& all) {
  Json a = Json::array();
  all = true;
  for (const auto& c : checks) {
    a.push_back({{"check", c.name}, {"status", c.pass ? "PASS" : "FAIL"}});
    all = all && c.pass;
  }
  return a;
}

Json verify_example31(const nadyn::PropagationBudget& budget, bool& all) {
  const Schedule sch = nadyn::bundled_example("example31");
  const IntervalSet u(Interval::open(0, 1));
  const IntervalSet v(Interval::open(1, Rational(3, 2)));
  const IntervalSet w(Interval::closed(0, 1));
  std::vector<Check> checks;

  checks.push_back({"f(5/4) = 1/2", nadyn::eval_point(sch.map_at(0), Rational(5, 4)) == Rational(1, 2)});
  const auto cert = nadyn::invariant_set_certificate(sch, u, v, w);
  checks.push_back({"invariant-set certificate re-checks", nadyn::recheck(sch, cert)});
  const auto verdict =
      nadyn::certify_failure(sch, nadyn::transitivity_verdict(sch, Rational(1, 4), 30, budget), cert);

  const Rational delta(1, 4), scale(1, 64);
  const auto sens = nadyn::sensitivity_certificate(sch, delta, scale, 30, budget);
  const auto* sc = std::get_if<nadyn::SensitivityCertificate>(&sens);
  checks.push_back({"sensitivity certificate passes", sc != nullptr});
  checks.push_back({"sensitivity certificate re-checks", sc != nullptr && nadyn::recheck(sch, *sc)});

  Json report{{"scenario", "example31"},
              {"system", nadyn::io::to_json(sch)},
              {"non_transitivity", nadyn::io::to_json(cert)},
              {"transitivity_verdict", nadyn::io::to_json(verdict)},
              {"sensitivity", nadyn::io::to_json(sens)}};
  report["checks"] = checks_json(checks, all);
  report["status"] = all ? "PASS" : "FAIL";
  return report;
}

Json verify_tent(const nadyn::PropagationBudget& budget, bool& all) {
  const Schedule sch = nadyn::bundled_example("tent");
  std::vector<Check> checks;

  const IntervalSet half(Interval::closed(0, Rational(1, 2)));
  const auto series = nadyn::correlation_series(sch, half, half, 17, budget);
  bool series_ok = series.values[0] == Rational(1, 2);
  for (std::size_t i = 1; i < series.values.size(); ++i) series_ok = series_ok && series.values[i] == Rational(1, 4);
  checks.push_back({"c_0 = 1/2 and c_i = 1/4 for 1 <= i <= 16", series_ok});
  bool cesaro_ok = true;
  for (std::int64_t n = 1; n <= 17; ++n) {
    cesaro_ok = cesaro_ok && nadyn::cesaro_deviation(series, n) == Rational(1, 4 * n);
  }
  checks.push_back({"cesaro_deviation(n) = 1/(4n)", cesaro_ok});

  const auto wm = nadyn::weakmix_verdict(sch, Rational(1, 16), 16, budget);
  checks.push_back({"weakmix_verdict(1/16, 16) = WITNESSED_UP_TO", wm.kind == nadyn::VerdictKind::WitnessedUpTo});
  const Rational delta = nadyn::sensitivity_constant(sch, Rational(0), Rational(1));
  checks.push_back({"sensitivity_constant(0, 1) = 1/8", delta == Rational(1, 8)});
  const auto sens = nadyn::sensitivity_certificate(sch, delta, Rational(1, 16), 16, budget);
  const auto* sc = std::get_if<nadyn::SensitivityCertificate>(&sens);
  checks.push_back({"sensitivity certificate passes and re-checks", sc != nullptr && nadyn::recheck(sch, *sc)});

  Json wm_summary{{"property", nadyn::to_string(wm.property)},
                  {"kind", nadyn::to_string(wm.kind)},
                  {"grid", wm.grid.str()},
                  {"horizon", wm.horizon},
                  {"pair_pairs_witnessed", wm.pair_pair_witnesses.size()},
                  {"pair_pairs_unhit", wm.unhit_pair_pairs.size()}};
  Json report{{"scenario", "tent"},
              {"system", nadyn::io::to_json(sch)},
              {"correlation", nadyn::io::to_json(series)},
              {"weak_mixing", std::move(wm_summary)},
              {"sensitivity", nadyn::io::to_json(sens)}};
  report["checks"] = checks_json(checks, all);
  report["status"] = all ? "PASS" : "FAIL";
  return report;
}

// ---------------------------------------------------------------------------

int run(const std::string& command, const Options& o, const BudgetInfo& bi) {
  const auto& budget = bi.budget;
  Json request{{"command", command},
               {"budget", {{"max_parts", budget.max_parts}, {"source", bi.source}}}};
  Json result;
  int exit_code = 0;

  const auto load = [&]() {
    if (o.system.empty()) throw nadyn::InvalidArgument("--system is required for '" + command + "'");
    request["system"] = o.system;
    return nadyn::io::load_system(o.system);
  };

  if (command == "verify") {
    const std::string scenario = o.scenario.empty() ? "example31" : o.scenario;
    request["scenario"] = scenario;
    bool all = false;
    if (scenario == "example31") {
      result = verify_example31(budget, all);
    } else if (scenario == "tent") {
      result = verify_tent(budget, all);
    } else {
      throw nadyn::UnknownExample("unknown verify scenario '" + scenario + "' (example31, tent)");
    }
    if (!all) exit_code = kExitVerifyFailed;
  } else if (command == "eval") {
    const Schedule sch = load();
    const Rational x = parse_rational(o.x, "--x");
    if (o.n < 0) throw nadyn::InvalidArgument("--n must be >= 0");
    request["x"] = x.str();
    request["n"] = o.n;
    Rational y = x;
    if (!sch.domain().contains(x)) throw nadyn::OutOfDomain(x.str() + " is outside " + sch.domain().str());
    Json orbit = Json::array({x.str()});
    for (std::int64_t k = 0; k < o.n; ++k) {
      y = nadyn::eval_point(sch.map_at(k), y);
      orbit.push_back(y.str());
    }
    result = {{"value", y.str()}, {"orbit", std::move(orbit)}, {"index_base", 0}};
  } else if (command == "image" || command == "preimage") {
    const Schedule sch = load();
    const IntervalSet s = parse_set(o.set, "--set");
    if (o.n < 0) throw nadyn::InvalidArgument("--n must be >= 0");
    request["set"] = nadyn::io::to_json(s);
    request["n"] = o.n;
    const IntervalSet r = command == "image" ? nadyn::prefix_image(sch, s, o.n, budget)
                                             : nadyn::prefix_preimage(sch, s, o.n, budget);
    result = {{"set", nadyn::io::to_json(r)}, {"text", r.str()}, {"measure", r.measure().str()}, {"parts", r.size()}};
  } else if (command == "correlate" || command == "cesaro") {
    const Schedule sch = load();
    const IntervalSet a = parse_set(o.a, "--A");
    const IntervalSet b = parse_set(o.b, "--B");
    require_positive(o.horizon, "--N");
    request["A"] = nadyn::io::to_json(a);
    request["B"] = nadyn::io::to_json(b);
    request["N"] = o.horizon;
    const auto series = nadyn::correlation_series(sch, a, b, o.horizon, budget);
    if (command == "correlate") {
      request["csv"] = o.csv.empty() ? Json(nullptr) : Json(o.csv);
      result = nadyn::io::to_json(series);
      if (!o.csv.empty()) write_text(o.csv, nadyn::io::to_csv(series));
    } else {
      Json dev = Json::array();
      for (std::int64_t n = 1; n <= o.horizon; ++n) dev.push_back(nadyn::cesaro_deviation(series, n).str());
      result = {{"index_base", 1},
                {"note", "cesaro[k] is (1/n) sum_{i<n} |c_i - mu(A)mu(B)| for n = k + 1"},
                {"cesaro", std::move(dev)},
                {"series", nadyn::io::to_json(series)}};
    }
  } else if (command == "density") {
    require_positive(o.horizon, "--N");
    request["N"] = o.horizon;
    request["tail"] = o.tail;
    nadyn::IndexSet s;
    if (!o.pattern.empty()) {
      request["pattern"] = o.pattern;
      s = pattern_set(o.pattern, o.horizon);
    } else {
      request["members"] = parse_members(o.members);
      s = nadyn::IndexSet(o.horizon, parse_members(o.members));
    }
    result = nadyn::io::to_json(nadyn::density_stats(s, o.tail));
    result["index_base"] = 0;
    result["count"] = s.size();
  } else if (command == "kvn") {
    if (o.levels < 1) throw nadyn::InvalidArgument("--levels must be >= 1");
    request["levels"] = o.levels;
    std::vector<Rational> seq;
    if (!o.pattern.empty()) {
      require_positive(o.horizon, "--N");
      request["pattern"] = o.pattern;
      request["N"] = o.horizon;
      const auto s = pattern_set(o.pattern, o.horizon);
      seq.assign(static_cast<std::size_t>(o.horizon), Rational(0));
      for (auto k : s.members()) seq[static_cast<std::size_t>(k)] = Rational(1);
    } else if (!o.values.empty()) {
      seq = parse_values(o.values);
      request["values"] = rational_list(seq);
    } else {
      const Schedule sch = load();
      const IntervalSet a = parse_set(o.a, "--A");
      const IntervalSet b = parse_set(o.b, "--B");
      require_positive(o.horizon, "--N");
      request["A"] = nadyn::io::to_json(a);
      request["B"] = nadyn::io::to_json(b);
      request["N"] = o.horizon;
      request["sequence"] = "correlation deviations |c_i - mu(A)mu(B)|";
      seq = nadyn::correlation_series(sch, a, b, o.horizon, budget).deviations;
    }
    result = nadyn::io::to_json(nadyn::kvn_extract(seq, nadyn::dyadic_thresholds(static_cast<int>(o.levels))));
  } else if (command == "hitting") {
    const Schedule sch = load();
    const IntervalSet u = parse_set(o.u, "--U");
    const IntervalSet v = parse_set(o.v, "--V");
    require_positive(o.horizon, "--H");
    request["U"] = nadyn::io::to_json(u);
    request["V"] = nadyn::io::to_json(v);
    request["H"] = o.horizon;
    result = nadyn::io::to_json(nadyn::hitting_set(sch, u, v, o.horizon, budget));
  } else if (command == "transitivity" || command == "weakmix" || command == "mixing") {
    const Schedule sch = load();
    const Rational g = parse_rational(o.grid, "--grid");
    require_positive(o.horizon, "--H");
    request["grid"] = g.str();
    request["H"] = o.horizon;
    std::optional<nadyn::InvariantSetCertificate> cert;
    if (!o.w.empty()) {
      const IntervalSet u = parse_set(o.u, "--U");
      const IntervalSet v = parse_set(o.v, "--V");
      const IntervalSet w = parse_set(o.w, "--W");
      request["certificate_request"] = {{"U", nadyn::io::to_json(u)}, {"V", nadyn::io::to_json(v)},
                                        {"W", nadyn::io::to_json(w)}};
      try {
        cert = nadyn::invariant_set_certificate(sch, u, v, w);
      } catch (const nadyn::NotInvariant& e) {
        result["certificate_rejected"] = e.what();
      }
    } else {
      request["certificate_request"] = nullptr;
    }
    nadyn::Verdict verdict = command == "transitivity" ? nadyn::transitivity_verdict(sch, g, o.horizon, budget)
                             : command == "weakmix"    ? nadyn::weakmix_verdict(sch, g, o.horizon, budget)
                                                       : nadyn::mixing_verdict(sch, g, o.horizon, budget);
    if (cert) verdict = nadyn::certify_failure(sch, std::move(verdict), *cert);
    Json j = nadyn::io::to_json(verdict);
    if (result.contains("certificate_rejected")) j["certificate_rejected"] = result["certificate_rejected"];
    result = std::move(j);
  } else if (command == "sensitivity") {
    const Schedule sch = load();
    Rational delta;
    if (!o.delta.empty()) {
      delta = parse_rational(o.delta, "--delta");
      request["delta_source"] = "--delta";
    } else {
      const Rational x0 = parse_rational(o.x0, "--x0 (or --delta)");
      const Rational y0 = parse_rational(o.y0, "--y0 (or --delta)");
      delta = nadyn::sensitivity_constant(sch, x0, y0);
      request["delta_source"] = {{"x0", x0.str()}, {"y0", y0.str()}, {"rule", "|x0 - y0| / 8"}};
    }
    const Rational scale = parse_rational(o.scale, "--scale");
    require_positive(o.horizon, "--H");
    request["delta"] = delta.str();
    request["scale"] = scale.str();
    request["H"] = o.horizon;
    const auto out = nadyn::sensitivity_certificate(sch, delta, scale, o.horizon, budget);
    result = nadyn::io::to_json(out);
    if (const auto* c = std::get_if<nadyn::SensitivityCertificate>(&out)) result["rechecked"] = nadyn::recheck(sch, *c);
  } else if (command == "mc") {
    if (o.system.empty()) throw nadyn::InvalidArgument("--system is required for 'mc'");
    request["system"] = o.system;
    const auto fs = nadyn::io::load_float_system(o.system);
    nadyn::mc::SampleConfig cfg;
    cfg.sample_count = o.samples;
    cfg.seed = o.seed;
    cfg.threads = o.threads;
    if (o.n < 0) throw nadyn::InvalidArgument("--n must be >= 0");
    request["n"] = o.n;
    request["samples"] = cfg.sample_count;
    request["seed"] = cfg.seed;
    request["threads"] = cfg.threads;
    request["quantity"] = o.quantity;
    if (o.quantity == "correlation") {
      const IntervalSet a = parse_set(o.a, "--A");
      const IntervalSet b = parse_set(o.b, "--B");
      request["A"] = nadyn::io::to_json(a);
      request["B"] = nadyn::io::to_json(b);
      const auto est = nadyn::mc::mc_correlation(fs, a, b, o.n, cfg);
      result = {{"estimate", est.estimate}, {"stderr", est.std_error}};
    } else if (o.quantity == "separation") {
      const Rational x = parse_rational(o.x, "--x");
      const Rational eps = parse_rational(o.epsilon, "--epsilon");
      request["x"] = x.str();
      request["epsilon"] = eps.str();
      result = {{"max_separation", nadyn::mc::mc_separation(fs, x.to_double(), eps.to_double(), o.n, cfg)},
                {"note", "sampled maximum; a lower bound on the supremum"}};
    } else {
      throw nadyn::InvalidArgument("--quantity must be 'correlation' or 'separation'");
    }
    result["estimate_only"] = fs.estimate_only;
  }

  const Json report{{"request", std::move(request)}, {"result", std::move(result)}};
  const std::string text = report.dump(2) + "\n";
  if (o.csv == "-" && o.out.empty()) return exit_code;  // stdout carries the CSV
  write_text(o.out, text);
  return exit_code;
}

Json error_json(const char* kind, const std::string& message) {
  return Json{{"error", kind}, {"message", message}};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc >= 2 && argv[1][0] != '-') {
    const std::string cmd = argv[1];
    if (std::find(kCommands.begin(), kCommands.end(), cmd) == kCommands.end()) {
      std::cerr << error_json("UnknownCommand", "unknown command '" + cmd + "'").dump() << "\n";
      return kExitUnknown;
    }
  }

  CLI::App app{"Exact analysis of non-autonomous piecewise-linear interval systems"};
  app.require_subcommand(1);
  Options o;

  const auto common = [&](CLI::App* sub, bool needs_system = true) {
    if (needs_system) sub->add_option("--system", o.system, "bundled example name or system file path");
    sub->add_option("-o,--out", o.out, "write the JSON report here instead of stdout");
    return sub;
  };

  auto* eval = common(app.add_subcommand("eval", "evaluate the orbit of a point"));
  eval->add_option("--x", o.x, "exact point, e.g. 5/4")->required();
  eval->add_option("--n", o.n, "number of steps")->capture_default_str();

  for (const char* name : {"image", "preimage"}) {
    auto* sub = common(app.add_subcommand(name, std::string("exact ") + name + " of a set under f_0^n"));
    sub->add_option("--set", o.set, "interval set, e.g. \"[0,1/4] u (1/2,1]\"")->required();
    sub->add_option("--n", o.n, "number of steps")->capture_default_str();
  }

  for (const char* name : {"correlate", "cesaro"}) {
    auto* sub = common(app.add_subcommand(name, std::string(name) == "correlate" ? "correlation series c_i"
                                                                                : "Cesàro deviation averages"));
    sub->add_option("--A", o.a, "set A")->required();
    sub->add_option("--B", o.b, "set B")->required();
    sub->add_option("--N", o.horizon, "series length (indices 0..N-1)")->required();
    if (std::string(name) == "correlate") sub->add_option("--csv", o.csv, "write the series as CSV ('-' for stdout)");
  }

  auto* density = common(app.add_subcommand("density", "finite-horizon upper and lower density"), false);
  density->add_option("--N", o.horizon, "horizon")->required();
  density->add_option("--tail", o.tail, "smallest n in the extremes")->capture_default_str();
  auto* dsrc = density->add_option_group("source");
  dsrc->add_option("--members", o.members, "comma-separated indices");
  dsrc->add_option("--pattern", o.pattern, "squares | evens | odds | multiples:K");
  dsrc->require_option(1);

  auto* kvn = common(app.add_subcommand("kvn", "extract a density-zero exceptional set"));
  kvn->add_option("--values", o.values, "comma-separated nonnegative rationals");
  kvn->add_option("--pattern", o.pattern, "indicator of squares | evens | odds | multiples:K");
  kvn->add_option("--A", o.a, "with --system: use correlation deviations for A");
  kvn->add_option("--B", o.b, "with --system: use correlation deviations for B");
  kvn->add_option("--N", o.horizon, "horizon for --pattern or the correlation series");
  kvn->add_option("--levels", o.levels, "dyadic thresholds 1/2 .. 1/2^levels")->capture_default_str();

  auto* hitting = common(app.add_subcommand("hitting", "hitting set N(U,V) up to H"));
  hitting->add_option("--U", o.u, "set U")->required();
  hitting->add_option("--V", o.v, "set V")->required();
  hitting->add_option("--H", o.horizon, "horizon")->required();

  for (const char* name : {"transitivity", "weakmix", "mixing"}) {
    auto* sub = common(app.add_subcommand(name, std::string(name) + " verdict on a grid"));
    sub->add_option("--grid", o.grid, "cell width g")->required();
    sub->add_option("--H", o.horizon, "horizon")->required();
    sub->add_option("--U", o.u, "certificate: open set U");
    sub->add_option("--V", o.v, "certificate: open set V");
    sub->add_option("--W", o.w, "certificate: forward-invariant W");
  }

  auto* sens = common(app.add_subcommand("sensitivity", "finite-scale sensitivity certificate"));
  sens->add_option("--delta", o.delta, "separation constant");
  sens->add_option("--x0", o.x0, "derive delta = |x0 - y0|/8");
  sens->add_option("--y0", o.y0, "derive delta = |x0 - y0|/8");
  sens->add_option("--scale", o.scale, "closed cell width")->required();
  sens->add_option("--H", o.horizon, "horizon")->required();

  auto* mc = common(app.add_subcommand("mc", "Monte Carlo cross-check"));
  mc->add_option("--quantity", o.quantity, "correlation | separation")->capture_default_str();
  mc->add_option("--A", o.a, "set A (correlation)");
  mc->add_option("--B", o.b, "set B (correlation)");
  mc->add_option("--x", o.x, "base point (separation)");
  mc->add_option("--epsilon", o.epsilon, "neighbourhood radius (separation)")->capture_default_str();
  mc->add_option("--n", o.n, "time index")->capture_default_str();
  mc->add_option("--samples", o.samples, "sample count m")->capture_default_str();
  mc->add_option("--seed", o.seed, "64-bit seed")->capture_default_str();
  mc->add_option("--threads", o.threads, "worker threads (0: all cores; never changes results)")->capture_default_str();

  auto* verify = common(app.add_subcommand("verify", "bundled reproduction scenarios"), false);
  verify->add_option("scenario", o.scenario, "example31 | tent")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitMalformed;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    const BudgetInfo bi = resolve_budget();
    return run(command, o, bi);
  } catch (const nadyn::BudgetExceeded& e) {
    Json j = error_json("BudgetExceeded", e.what());
    j["step"] = e.step();
    j["parts"] = e.parts();
    j["max_parts"] = e.max_parts();
    std::cerr << j.dump() << "\n";
    return kExitBudget;
  } catch (const nadyn::UnknownExample& e) {
    std::cerr << error_json("UnknownExample", e.what()).dump() << "\n";
    return kExitUnknown;
  } catch (const nadyn::io::SystemFileError& e) {
    Json j = error_json(e.kind().c_str(), e.what());
    j["field"] = e.field();
    std::cerr << j.dump() << "\n";
    return kExitMalformed;
  } catch (const nadyn::Error& e) {
    std::cerr << error_json("InvalidInput", e.what()).dump() << "\n";
    return kExitMalformed;
  } catch (const std::invalid_argument& e) {
    std::cerr << error_json("InvalidInput", e.what()).dump() << "\n";
    return kExitMalformed;
  } catch (const std::out_of_range& e) {
    std::cerr << error_json("InvalidInput", e.what()).dump() << "\n";
    return kExitMalformed;
  }
}
