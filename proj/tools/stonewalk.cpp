// Copyright 2026 The stonewalk Authors
// SPDX-License-Identifier: Apache-2.0

// stonewalk: command-line front end for the simulators, limit laws and walk analytics.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 a `compare` check failed.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "stonewalk/stonewalk.hpp"

namespace sw = stonewalk;
using sw::io::Json;

namespace {

struct Options {
  // shared
  std::uint64_t seed = 1;
  unsigned threads = 0;  // 0: STONEWALK_THREADS, then hardware
  std::string out;
  std::string format;
  // model
  std::uint64_t M = 200;
  double nu = 0.1;
  std::int64_t L = 200;
  std::optional<double> alpha;
  std::uint64_t bigN = 400;
  std::string kernel = "uniform";
  double mix = sw::dispersal::kDefaultMix;
  double x0 = 1.0;
  std::uint64_t replicas = 1000;
  std::uint64_t maxSteps = sw::genealogy::kDefaultMaxSteps;
  double horizon = std::numeric_limits<double>::infinity();
  std::int64_t ringSeparation = 0;
  // limit
  double t = 1.0;
  double x = 1.0;
  double lambda = 1.0;
  std::string method = "quadrature";
  std::optional<double> dx;
  std::optional<double> dt;
  std::optional<double> xmax;
  int every = 80;
  double eps = 1e-3;
  // compare
  std::string samples;
  std::string law = "stepping-stone";
  double sigma = 1.0;
  double tmax = std::numeric_limits<double>::infinity();
  double tol = 0.05;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void add_shared(CLI::App* s, Options& o) {
  s->add_option("--seed", o.seed, "master seed (u64)")->capture_default_str();
  s->add_option("--threads", o.threads, "worker threads (count; 0 = STONEWALK_THREADS or all cores)");
  s->add_option("--out", o.out, "output file path (default: stdout; manifest goes to <out>.manifest.json)");
  s->add_option("--format", o.format, "output format")->check(CLI::IsMember({"csv", "json", "ndjson"}));
}

void add_kernel(CLI::App* s, Options& o) {
  s->add_option("--big-n", o.bigN, "dispersal scale N (sites)")->capture_default_str();
  s->add_option("--kernel", o.kernel, "dispersal family")
      ->check(CLI::IsMember({"uniform", "bexp", "dnormal", "nn"}))
      ->capture_default_str();
  s->add_option("--mix", o.mix, "nearest-neighbor mixing weight (probability)")->capture_default_str();
  s->add_option("--x0", o.x0, "initial separation in units of sigma N (dimensionless)")->capture_default_str();
}

void add_replicas(CLI::App* s, Options& o) {
  s->add_option("--replicas", o.replicas, "number of independent replicas (count)")->capture_default_str();
  s->add_option("--max-steps", o.maxSteps, "per-replica event cap (events)")->capture_default_str();
  s->add_option("--horizon", o.horizon, "censor beyond this scaled time (dimensionless; default none)");
}

void add_limit(CLI::App* s, Options& o, bool withMethod) {
  s->add_option("--t", o.t, "scaled time t (units of L^2/nu)")->capture_default_str();
  s->add_option("--x", o.x, "scaled position x (units of L)")->capture_default_str();
  s->add_option("--lambda", o.lambda, "killing rate on local time (per unit local time)")->capture_default_str();
  if (withMethod) {
    s->add_option("--method", o.method, "evaluation route")
        ->check(CLI::IsMember({"quadrature", "pde"}))
        ->capture_default_str();
  }
  s->add_option("--dx", o.dx, "PDE space step (units of x; default 1/400)");
  s->add_option("--dt", o.dt, "PDE time step (units of t; default 1/800)");
  s->add_option("--xmax", o.xmax, "PDE far-field boundary (units of x; default max(3, x + 6 sqrt(t)))");
}

sw::dispersal::Kernel make_kernel(const Options& o) {
  return sw::dispersal::build_kernel(sw::dispersal::parse_family(o.kernel), o.bigN, o.mix);
}

sw::pde::Grid make_grid(const Options& o) {
  sw::pde::Grid g = sw::pde::reference_grid(o.t, o.x);
  if (o.dx) g.dx = *o.dx;
  if (o.dt) g.dt = *o.dt;
  if (o.xmax) g.xMax = *o.xmax;
  return g;
}

void require_format(const Options& o, std::initializer_list<const char*> allowed) {
  if (o.format.empty()) return;
  for (const char* a : allowed) {
    if (o.format == a) return;
  }
  throw UsageError("--format " + o.format + " is not supported by this subcommand");
}

// Writes the payload to --out or stdout and the manifest next to it (or to stderr).
class Emitter {
 public:
  Emitter(const CLI::App& sub, const Options& o)
      : sub_(sub), o_(o), start_(std::chrono::steady_clock::now()) {}

  std::ostream& stream() {
    if (o_.out.empty()) return std::cout;
    if (!file_.is_open()) {
      file_.open(o_.out, std::ios::binary);
      if (!file_) throw sw::ConfigError("cannot open output file " + o_.out);
    }
    return file_;
  }

  void set_kernel_hash(std::uint64_t h) { kernelHash_ = h; }
  void add(const std::string& key, Json v) { extra_[key] = std::move(v); }

  void finish() {
    if (file_.is_open()) file_.close();
    Json m;
    m["subcommand"] = sub_.get_name();
    // Merged flags, config file and defaults, in a form --config accepts.
    std::istringstream all(sub_.config_to_str(true, false));
    std::string config = "[" + sub_.get_name() + "]\n";
    for (std::string line; std::getline(all, line);) {
      if (!line.ends_with("=\"\"")) config += line + '\n';  // unset optional flags
    }
    m["config"] = config;
    m["master_seed"] = o_.seed;
    if (kernelHash_) m["kernel_hash"] = sw::io::hex64(*kernelHash_);
    m["version"] = STONEWALK_VERSION;
    m["wall_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    m["outputs"] = o_.out.empty() ? Json::array({"stdout"}) : Json::array({o_.out});
    for (auto& [k, v] : extra_.items()) m[k] = v;
    if (o_.out.empty()) {
      std::cerr << m.dump() << '\n';
    } else {
      std::ofstream mf(o_.out + ".manifest.json");
      mf << m.dump(2) << '\n';
    }
  }

 private:
  const CLI::App& sub_;
  const Options& o_;
  std::chrono::steady_clock::time_point start_;
  std::ofstream file_;
  std::optional<std::uint64_t> kernelHash_;
  Json extra_ = Json::object();
};

sw::genealogy::Limits limits(const Options& o) {
  sw::genealogy::Limits lim;
  lim.maxSteps = o.maxSteps;
  lim.horizon = o.horizon;
  return lim;
}

unsigned threads(const Options& o) {
  return sw::resolve_threads(o.threads > 0 ? std::optional<unsigned>(o.threads) : std::nullopt);
}

// ---------------------------------------------------------------------------

int run_stepping(const CLI::App& cmd, const Options& o) {
  require_format(o, {"ndjson"});
  sw::genealogy::SteppingStoneConfig cfg{o.M, o.nu, o.L};
  if (o.alpha) {
    const double m = std::round(*o.alpha * static_cast<double>(o.L) / o.nu);
    if (m < 1.0) throw UsageError("--alpha gives a colony size below 1");
    cfg.M = static_cast<std::uint64_t>(m);
  }
  cfg.validate();
  const auto lim = limits(o);
  const auto s = sw::run_replicas(sw::SeedPlan(o.seed, o.replicas), threads(o),
                                  [&](std::uint64_t id, sw::Stream& rng) {
                                    return sw::genealogy::simulate_stepping_pair(cfg, rng, lim, id);
                                  });
  Emitter e(cmd, o);
  sw::io::write_ndjson(e.stream(), s);
  e.add("model", {{"M", cfg.M}, {"nu", cfg.nu}, {"L", cfg.L}, {"alpha", cfg.alpha()},
                  {"time_scale", cfg.time_scale()}});
  e.finish();
  return 0;
}

int run_ring(const CLI::App& cmd, const Options& o) {
  require_format(o, {"ndjson"});
  sw::genealogy::RingConfig cfg;
  cfg.colonies = o.L;
  cfg.m = o.nu;
  cfg.dipSize = o.M;
  cfg.i = o.ringSeparation;
  if (o.alpha) {
    // 2 dipSize genes per colony and alpha = (2 dipSize) m / (2 L).
    const double d = std::round(2.0 * *o.alpha * static_cast<double>(o.L) / o.nu);
    if (d < 1.0) throw UsageError("--alpha gives fewer than one diploid individual per colony");
    cfg.dipSize = static_cast<std::uint64_t>(d);
  }
  cfg.validate();
  const auto lim = limits(o);
  const auto s = sw::run_replicas(sw::SeedPlan(o.seed, o.replicas), threads(o),
                                  [&](std::uint64_t id, sw::Stream& rng) {
                                    return sw::genealogy::simulate_ring_pair(cfg, rng, lim, id);
                                  });
  Emitter e(cmd, o);
  sw::io::write_ndjson(e.stream(), s);
  const double alpha = static_cast<double>(cfg.genes()) * cfg.m / (2.0 * cfg.length());
  e.add("model", {{"colonies", cfg.colonies}, {"dip_size", cfg.dipSize}, {"m", cfg.m}, {"i", cfg.i},
                  {"alpha", alpha}, {"time_scale", cfg.time_scale()}});
  e.finish();
  return 0;
}

int run_voter(const CLI::App& cmd, const Options& o) {
  require_format(o, {"ndjson"});
  const auto q = make_kernel(o);
  sw::genealogy::VoterConfig cfg;
  cfg.kernel = &q;
  cfg.L = sw::genealogy::separation_for(q, o.x0);
  cfg.maxSteps = o.maxSteps;
  cfg.validate();
  const auto lim = limits(o);
  const auto s = sw::run_replicas(sw::SeedPlan(o.seed, o.replicas), threads(o),
                                  [&](std::uint64_t id, sw::Stream& rng) {
                                    return sw::genealogy::simulate_voter_pair(cfg, rng, lim, id);
                                  });
  Emitter e(cmd, o);
  e.set_kernel_hash(sw::dispersal::kernel_hash(q));
  sw::io::write_ndjson(e.stream(), s);
  e.add("model", {{"L", cfg.L}, {"sigma", q.sigma_n()}, {"time_scale", cfg.time_scale()}});
  e.finish();
  return 0;
}

int run_limit(const CLI::App& cmd, const Options& o) {
  require_format(o, {"json"});
  double u = 0.0;
  if (o.method == "pde") {
    u = sw::pde::survival_pde(o.lambda, make_grid(o)).at(o.t, o.x);
  } else {
    u = sw::limit::survival_quadrature(o.t, o.x, o.lambda);
  }
  Emitter e(cmd, o);
  if (o.format == "json") {
    e.stream() << Json{{"t", o.t}, {"x", o.x}, {"lambda", o.lambda}, {"method", o.method}, {"u", u}}.dump()
               << '\n';
  } else {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g\n", u);
    e.stream() << buf;
  }
  e.finish();
  return 0;
}

int run_pde(const CLI::App& cmd, const Options& o) {
  require_format(o, {"csv"});
  sw::pde::Grid g = make_grid(o);
  g.snapshotEvery = o.every;
  const auto sol = sw::pde::survival_pde(o.lambda, g);
  Emitter e(cmd, o);
  sol.write_csv(e.stream());
  e.add("grid", {{"dx", sol.dx}, {"dt", sol.dt}, {"xmax", sol.xMax}, {"tmax", sol.tMax},
                 {"residual", sol.residual}});
  e.finish();
  return 0;
}

int run_kernel(const CLI::App& cmd, const Options& o) {
  require_format(o, {"json", "csv"});
  const auto q = make_kernel(o);
  Emitter e(cmd, o);
  e.set_kernel_hash(sw::dispersal::kernel_hash(q));
  if (o.format == "csv") {
    const double n = static_cast<double>(q.N());
    const auto xMax = o.xmax ? static_cast<std::int64_t>(*o.xmax)
                             : static_cast<std::int64_t>(std::floor(4.0 * std::sqrt(n) * std::log(std::max(n, 2.0))));
    const auto table = sw::walk::potential_kernel(q, xMax, o.eps);
    table.write_csv(e.stream());
    e.add("potential", {{"series_depth", table.seriesDepth}, {"tail_bound", table.tailBound},
                        {"c_star", table.cStar}});
  } else {
    Json j;
    j["kernel"] = sw::io::to_json(q);
    j["audit"] = sw::io::to_json(sw::dispersal::verify_assumptions(q));
    j["hash"] = sw::io::hex64(sw::dispersal::kernel_hash(q));
    e.stream() << j.dump(2) << '\n';
  }
  e.finish();
  return 0;
}

int run_crossings(const CLI::App& cmd, const Options& o) {
  require_format(o, {"ndjson", "csv"});
  const auto q = make_kernel(o);
  const double N = static_cast<double>(q.N());
  const std::int64_t start = sw::genealogy::separation_for(q, o.x0);
  const auto steps = static_cast<std::uint64_t>(std::floor(N * o.t));
  struct Row {
    std::uint64_t crossings;
    double localTime;
  };
  const auto rows = sw::run_replicas(sw::SeedPlan(o.seed, o.replicas), threads(o),
                                     [&](std::uint64_t, sw::Stream& rng) {
                                       const auto path = sw::genealogy::kernel_walk_path(q, start, steps, rng);
                                       const auto d = sw::cycles::cycle_decompose(path, N);
                                       const auto n = static_cast<std::int64_t>(steps);
                                       return Row{static_cast<std::uint64_t>(d.crossings(n)),
                                                  sw::cycles::crossing_local_time(d, N, o.t)};
                                     });
  Emitter e(cmd, o);
  e.set_kernel_hash(sw::dispersal::kernel_hash(q));
  auto& os = e.stream();
  char buf[128];
  if (o.format == "csv") os << "replica,crossings,local_time\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (o.format == "csv") {
      std::snprintf(buf, sizeof buf, "%zu,%llu,%.17g\n", i, static_cast<unsigned long long>(rows[i].crossings),
                    rows[i].localTime);
      os << buf;
    } else {
      os << Json{{"replica", i}, {"crossings", rows[i].crossings}, {"local_time", rows[i].localTime}}.dump()
         << '\n';
    }
  }
  e.add("walk", {{"start", start}, {"steps", steps}, {"sigma", q.sigma_n()}});
  e.finish();
  return 0;
}

int run_compare(const CLI::App& cmd, const Options& o) {
  require_format(o, {"json"});
  std::ifstream in(o.samples);
  if (!in) throw sw::ConfigError("cannot open samples file " + o.samples);
  const auto s = sw::io::read_ndjson(in);
  sw::stats::Report r;
  if (o.law == "ring") {
    if (!o.alpha) throw UsageError("--law ring needs --alpha");
    const auto est = sw::stats::laplace_estimate(s, o.lambda);
    const double target = sw::limit::ring_limit_laplace(*o.alpha, o.lambda);
    r = {"laplace_gap", std::fabs(est.mean - target), est.n, std::max(o.tol, 3.0 * est.se), false};
  } else {
    const auto d = sw::stats::ecdf(s);
    double ks = 0.0;
    if (o.law == "stepping-stone") {
      if (!o.alpha) throw UsageError("--law stepping-stone needs --alpha");
      const double a = *o.alpha;
      ks = sw::stats::ks_distance(d, [a](double t) { return 1.0 - sw::limit::stepping_stone_limit_survival(t, a); },
                                  o.tmax);
    } else {
      ks = sw::stats::ks_distance(
          d, [&](double t) { return 1.0 - sw::limit::voter_limit_survival(t, o.sigma, o.x0); }, o.tmax);
    }
    r = {"ks", ks, d.size(), o.tol, false};
  }
  r.pass = r.value <= r.tolerance;
  Emitter e(cmd, o);
  e.stream() << sw::io::to_json(r).dump() << '\n';
  e.finish();
  return r.pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stonewalk: pairwise coalescence in one-dimensional stepping-stone and voter models"};
  app.set_version_flag("--version", STONEWALK_VERSION);
  app.set_config("--config", "", "TOML/INI configuration file; command-line flags override its values");
  app.require_subcommand(1);
  app.fallthrough();
  Options o;

  auto* stepping = app.add_subcommand("simulate-stepping", "pairwise coalescence in the stepping-stone model on Z (NDJSON)");
  add_shared(stepping, o);
  auto* mOpt = stepping->add_option("--M", o.M, "haploid individuals per colony (count)")->capture_default_str();
  stepping->add_option("--nu", o.nu, "migration probability per replacement (probability)")->capture_default_str();
  stepping->add_option("--L", o.L, "initial separation (colonies)")->capture_default_str();
  stepping->add_option("--alpha", o.alpha, "M nu / L (dimensionless); sets M = round(alpha L / nu)")->excludes(mOpt);
  add_replicas(stepping, o);

  auto* ring = app.add_subcommand("simulate-ring", "pairwise coalescence on a ring of colonies (NDJSON)");
  add_shared(ring, o);
  auto* dOpt = ring->add_option("--M", o.M, "diploid individuals per colony (count; 2M genes)")->capture_default_str();
  ring->add_option("--nu", o.nu, "migration probability m (probability)")->capture_default_str();
  ring->add_option("--L", o.L, "number of colonies on the ring (colonies)")->capture_default_str();
  ring->add_option("--alpha", o.alpha, "2M m / (2L) (dimensionless); sets M = round(2 alpha L / m)")->excludes(dOpt);
  ring->add_option("--i", o.ringSeparation, "separation of the two sampled colonies (colonies)")->capture_default_str();
  add_replicas(ring, o);

  auto* voter = app.add_subcommand("simulate-voter", "pairwise coalescence in the long-range voter model (NDJSON)");
  add_shared(voter, o);
  add_kernel(voter, o);
  add_replicas(voter, o);

  auto* limitCmd = app.add_subcommand("limit", "u(t, x) = E_x exp(-lambda l0(t)) by quadrature or PDE");
  add_shared(limitCmd, o);
  add_limit(limitCmd, o, true);

  auto* pdeCmd = app.add_subcommand("pde", "Crank-Nicolson grid for u with the Robin condition at 0 (CSV)");
  add_shared(pdeCmd, o);
  add_limit(pdeCmd, o, false);
  pdeCmd->add_option("--every", o.every, "store every k-th time level (steps)")->capture_default_str();

  auto* kernelCmd = app.add_subcommand("kernel", "dispersal kernel with its assumption audit (JSON) or potential kernel (CSV)");
  add_shared(kernelCmd, o);
  add_kernel(kernelCmd, o);
  kernelCmd->add_option("--xmax", o.xmax, "potential-kernel table half-width (sites; default 4 sqrt(N) log N)");
  kernelCmd->add_option("--eps", o.eps, "certified tail bound target for the potential kernel")->capture_default_str();

  auto* crossingsCmd = app.add_subcommand("crossings", "strip-crossing estimate of local time for kernel walks");
  add_shared(crossingsCmd, o);
  add_kernel(crossingsCmd, o);
  crossingsCmd->add_option("--t", o.t, "scaled time (walk runs floor(N t) steps)")->capture_default_str();
  crossingsCmd->add_option("--replicas", o.replicas, "number of walks (count)")->capture_default_str();

  auto* compareCmd = app.add_subcommand("compare", "KS or Laplace check of a sample file against a limit law (JSON)");
  add_shared(compareCmd, o);
  compareCmd->add_option("--samples", o.samples, "NDJSON sample file")->required()->check(CLI::ExistingFile);
  compareCmd->add_option("--law", o.law, "limit law")
      ->check(CLI::IsMember({"stepping-stone", "voter", "ring"}))
      ->capture_default_str();
  compareCmd->add_option("--alpha", o.alpha, "alpha of the stepping-stone or ring limit (dimensionless)");
  compareCmd->add_option("--sigma", o.sigma, "kernel sigma for the voter limit (dimensionless)")->capture_default_str();
  compareCmd->add_option("--x0", o.x0, "voter starting separation (units of sigma N)")->capture_default_str();
  compareCmd->add_option("--lambda", o.lambda, "Laplace argument for the ring law")->capture_default_str();
  compareCmd->add_option("--tmax", o.tmax, "compare CDFs on t <= tmax (scaled time)");
  compareCmd->add_option("--tol", o.tol, "pass threshold")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*stepping) return run_stepping(*stepping, o);
    if (*ring) return run_ring(*ring, o);
    if (*voter) return run_voter(*voter, o);
    if (*limitCmd) return run_limit(*limitCmd, o);
    if (*pdeCmd) return run_pde(*pdeCmd, o);
    if (*kernelCmd) return run_kernel(*kernelCmd, o);
    if (*crossingsCmd) return run_crossings(*crossingsCmd, o);
    if (*compareCmd) return run_compare(*compareCmd, o);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const sw::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
