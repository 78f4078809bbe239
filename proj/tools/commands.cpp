#include "commands.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "ouspec/error.hpp"
#include "ouspec/estimates.hpp"
#include "ouspec/io.hpp"
#include "ouspec/nls.hpp"
#include "ouspec/propagator.hpp"

namespace ou::cli {

namespace fs = std::filesystem;
using io::format_double;
using io::json;

namespace {

// A command-line option that can also be supplied by the JSON config.
// Config keys are the long option names with '-' replaced by '_'.
struct Param {
  CLI::Option* opt = nullptr;
  std::function<void(const json&)> set;
  std::function<json()> get;
  bool from_config = false;
  bool given() const { return from_config || (opt && opt->count() > 0); }
};

class Params {
 public:
  explicit Params(CLI::App* app) : app_(app) {}

  template <typename T>
  void add(const std::string& flags, const std::string& key, T& var, const std::string& desc) {
    Param p;
    p.opt = app_->add_option(flags, var, desc)->capture_default_str();
    p.set = [&var](const json& v) { var = v.get<T>(); };
    p.get = [&var] { return json(var); };
    items_[key] = std::move(p);
  }

  void add_flag(const std::string& flags, const std::string& key, bool& var, const std::string& desc) {
    Param p;
    p.opt = app_->add_flag(flags, var, desc);
    p.set = [&var](const json& v) { var = v.get<bool>(); };
    p.get = [&var] { return json(var); };
    items_[key] = std::move(p);
  }

  /// Fills every option not given on the command line from the config document.
  void merge(const json& cfg) {
    require(cfg.is_object(), ErrorKind::invalid_parameter, "config document must be a JSON object");
    for (const auto& [k, v] : cfg.items()) {
      auto it = items_.find(k);
      require(it != items_.end(), ErrorKind::invalid_parameter, "unknown config key '" + k + "'");
      if (it->second.opt->count() > 0) continue;
      try {
        it->second.set(v);
      } catch (const json::exception& e) {
        fail(ErrorKind::invalid_parameter, "config key '" + k + "': " + e.what());
      }
      it->second.from_config = true;
    }
  }

  json effective() const {
    json j = json::object();
    for (const auto& [k, p] : items_) j[k] = p.get();
    return j;
  }

  bool given(const std::string& key) const { return items_.at(key).given(); }

 private:
  CLI::App* app_;
  std::map<std::string, Param> items_;
};

struct Common {
  std::string config;
  std::string out;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "JSON config; command-line flags take precedence");
  sub->add_option("--out", c.out, std::string("Output directory (default: $") + kOutDirEnv + " or ./ouspec_out)");
}

fs::path prepare_out_dir(const Common& c) {
  fs::path dir = c.out;
  if (dir.empty()) {
    const char* env = std::getenv(kOutDirEnv);
    dir = env && *env ? fs::path(env) : fs::path("ouspec_out");
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  require(!ec && fs::is_directory(dir), ErrorKind::io, "cannot create output directory " + dir.string());
  return dir;
}

void load_config(const Common& c, Params& params) {
  if (!c.config.empty()) params.merge(io::read_json_file(c.config));
}

void echo_config(const fs::path& dir, const std::string& command, json effective) {
  effective["command"] = command;
  io::write_text_file(dir / "config.json", effective.dump(2) + "\n");
}

class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : cols_(header.size()) { row_strings(header); }

  void row_strings(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os_ << (i ? "," : "") << cells[i];
    os_ << '\n';
  }
  std::size_t columns() const { return cols_; }
  std::string str() const { return os_.str(); }

 private:
  std::size_t cols_;
  std::ostringstream os_;
};

std::string mode_label(const MultiIndex& a) {
  std::string s;
  for (std::size_t i = 0; i < a.dimension(); ++i) s += (i ? "." : "") + std::to_string(a[i]);
  return s;
}

struct BasisArgs {
  int dimension = 1;
  int max_degree = 24;
  int nodes = 32;

  void add_to(Params& p, int dflt_degree = 24, int dflt_nodes = 32) {
    max_degree = dflt_degree;
    nodes = dflt_nodes;
    p.add("-d,--dimension", "dimension", dimension, "Spatial dimension d");
    p.add("-N,--max-degree", "max_degree", max_degree, "Total-degree truncation N");
    p.add("-M,--nodes", "nodes", nodes, "Quadrature nodes per axis M (>= N+1)");
  }
  BasisSpec spec() const {
    BasisSpec s{dimension, max_degree, nodes};
    s.validate();
    return s;
  }
};

struct EnsembleArgs {
  int count = 8;
  std::uint64_t seed = 1;
  std::string profile = "random-coefficient";
  int k = 0;

  void add_to(Params& p, int dflt_count) {
    count = dflt_count;
    p.add("--count", "count", count, "Ensemble size");
    p.add("--seed", "seed", seed, "RNG seed");
    p.add("--profile", "profile", profile, "random-coefficient | gaussian-bump | hermite-mode");
    p.add("--k", "k", k, "Mode order for the hermite-mode profile");
  }
  EnsembleSpec spec(const BasisSpec& b) const {
    EnsembleSpec e;
    e.count = count;
    e.seed = seed;
    e.profile = parse_profile(profile);
    e.basis = b;
    e.mode_order = k;
    e.validate();
    return e;
  }
};

// ---------------------------------------------------------------- basis-check

struct BasisCheck {
  Common common;
  BasisArgs basis;
  double tol = 1e-10;

  void attach(CLI::App* sub, Params& p) {
    add_common(sub, common);
    basis.add_to(p);
    p.add("--tol", "tol", tol, "Residual tolerance");
  }

  int run(const Params& params, std::ostream& out, std::ostream& err) {
    const BasisSpec spec = basis.spec();
    require(tol > 0.0, ErrorKind::invalid_parameter, "tol must be positive");
    const fs::path dir = prepare_out_dir(common);
    echo_config(dir, "basis-check", params.effective());

    const auto hb = basis_for(spec);
    const auto& modes = hb->modes();
    const std::size_t nm = modes.size(), ng = spec.grid_size();
    const int d = spec.dimension, N = spec.max_degree, M = spec.nodes_per_axis;
    const auto& rule = hb->rule();

    // Per-axis tables: h_k, h_k', h_k'' at each node.
    std::vector<double> h((N + 1) * M), h1((N + 1) * M), h2((N + 1) * M);
    for (int m = 0; m < M; ++m) {
      std::vector<double> col(N + 1);
      hermite_eval_all(N, rule.nodes[m], col);
      for (int k = 0; k <= N; ++k) {
        h[k * M + m] = col[k];
        h1[k * M + m] = k >= 1 ? std::sqrt(2.0 * k) * col[k - 1] : 0.0;
        h2[k * M + m] = k >= 2 ? std::sqrt(4.0 * k * (k - 1)) * col[k - 2] : 0.0;
      }
    }

    std::vector<double> vals(nm * ng), weights(ng);
    std::vector<double> eig(nm, 0.0);
    for (std::size_t g = 0; g < ng; ++g) weights[g] = hb->node_weight(g);
    for (std::size_t a = 0; a < nm; ++a) {
      double acc = 0.0;
      for (std::size_t g = 0; g < ng; ++g) {
        std::size_t rest = g;
        std::vector<int> idx(d);
        for (int ax = d - 1; ax >= 0; --ax) {
          idx[ax] = static_cast<int>(rest % M);
          rest /= M;
        }
        double prod = 1.0, lh = 0.0;
        for (int ax = 0; ax < d; ++ax) prod *= h[modes[a][ax] * M + idx[ax]];
        for (int ax = 0; ax < d; ++ax) {
          double other = 1.0;
          for (int b = 0; b < d; ++b) {
            if (b != ax) other *= h[modes[a][b] * M + idx[b]];
          }
          const int k = modes[a][ax];
          const double x = rule.nodes[idx[ax]];
          lh += (-0.5 * h2[k * M + idx[ax]] + x * h1[k * M + idx[ax]]) * other;
        }
        vals[a * ng + g] = prod;
        const double r = lh - modes[a].order() * prod;
        acc += weights[g] * r * r;
      }
      eig[a] = std::sqrt(acc);
    }

    Csv orth({"alpha", "beta", "residual"});
    double worst = 0.0;
    std::string worst_pair;
    for (std::size_t a = 0; a < nm; ++a) {
      for (std::size_t b = 0; b < nm; ++b) {
        double ip = 0.0;
        for (std::size_t g = 0; g < ng; ++g) ip += weights[g] * vals[a * ng + g] * vals[b * ng + g];
        const double r = std::abs(ip - (a == b ? 1.0 : 0.0));
        orth.row_strings({mode_label(modes[a]), mode_label(modes[b]), format_double(r)});
        if (r > worst || worst_pair.empty()) {
          worst = r;
          worst_pair = mode_label(modes[a]) + "," + mode_label(modes[b]);
        }
      }
    }
    Csv eigcsv({"alpha", "order", "residual"});
    double worst_eig = 0.0;
    std::string worst_mode = modes.empty() ? "" : mode_label(modes[0]);
    for (std::size_t a = 0; a < nm; ++a) {
      eigcsv.row_strings({mode_label(modes[a]), std::to_string(modes[a].order()), format_double(eig[a])});
      if (eig[a] > worst_eig) {
        worst_eig = eig[a];
        worst_mode = mode_label(modes[a]);
      }
    }
    double worst_rt = 0.0;
    for (std::size_t a = 0; a < nm; ++a) {
      const SpectralField e = SpectralField::mode(spec, modes[a]);
      worst_rt = std::max(worst_rt, (forward_transform(inverse_transform(e)) - e).l2_norm());
    }
    io::write_text_file(dir / "orthonormality.csv", orth.str());
    io::write_text_file(dir / "eigenrelation.csv", eigcsv.str());

    const bool pass = worst <= tol && worst_eig <= tol && worst_rt <= tol;
    json summary = {{"modes", nm},
                    {"max_orthonormality", worst},
                    {"worst_pair", worst_pair},
                    {"max_eigenrelation", worst_eig},
                    {"worst_mode", worst_mode},
                    {"max_roundtrip", worst_rt},
                    {"tol", tol},
                    {"pass", pass}};
    io::write_text_file(dir / "summary.json", summary.dump(2) + "\n");
    out << "modes " << nm << "  orthonormality " << format_double(worst) << "  eigenrelation "
        << format_double(worst_eig) << "  roundtrip " << format_double(worst_rt) << "\n";
    if (!pass) {
      if (worst > tol) err << "orthonormality breach at (" << worst_pair << ")\n";
      if (worst_eig > tol) err << "eigenrelation breach at mode " << worst_mode << "\n";
      if (worst_rt > tol) err << "transform round-trip breach\n";
      return invariant_breach;
    }
    return ok;
  }
};

// ------------------------------------------------------------ dispersive-scan

struct DispersiveCmd {
  Common common;
  BasisArgs basis;
  EnsembleArgs ens;
  double t_min = 0.05;
  double t_max = 0.5 * M_PI;
  int t_count = 30;
  double t_exclusion = 0.05;
  bool refine = true;

  void attach(CLI::App* sub, Params& p) {
    add_common(sub, common);
    basis.add_to(p);
    ens.add_to(p, 8);
    p.add("--t-min", "t_min", t_min, "First time node");
    p.add("--t-max", "t_max", t_max, "Last time node (<= pi/2)");
    p.add("--t-count", "t_count", t_count, "Number of time nodes");
    p.add("--t-exclusion", "t_exclusion", t_exclusion, "Singular-time guard around t = 0");
    p.add_flag("--refine,!--no-refine", "refine", refine, "Repeat with M doubled and report the change");
  }

  int run(const Params& params, std::ostream& out, std::ostream& err) {
    const EnsembleSpec es = ens.spec(basis.spec());
    require(t_exclusion > 0.0, ErrorKind::invalid_parameter, "t_exclusion must be positive");
    require(t_min >= t_exclusion - 1e-15, ErrorKind::singular_time,
            "t_min = " + format_double(t_min) + " is inside the singularity guard |t| < " +
                format_double(t_exclusion));
    require(t_max <= 0.5 * M_PI + 1e-12 && t_max >= t_min, ErrorKind::invalid_parameter,
            "time window must satisfy t_min <= t_max <= pi/2");
    require(t_count >= 1 && (t_count > 1 || t_min == t_max), ErrorKind::invalid_parameter,
            "t_count must be >= 1 (a single node needs t_min == t_max)");
    const fs::path dir = prepare_out_dir(common);
    echo_config(dir, "dispersive-scan", params.effective());

    DispersiveScanOptions opts;
    opts.t_exclusion = t_exclusion;
    opts.refine = refine;
    const EstimateReport rep = dispersive_scan(es, TimeGrid{t_min, t_max, t_count}, opts);

    Csv csv({"sample_id", "t_or_pair", "quotient"});
    for (const auto& e : rep.entries) csv.row_strings({std::to_string(e.sample_id), e.label, format_double(e.quotient)});
    io::write_text_file(dir / "dispersive.csv", csv.str());
    json summary = {{"max", rep.max},
                    {"argmax", {{"sample_id", rep.argmax_sample}, {"t", rep.argmax_label}}},
                    {"refinement_delta", refine ? json(rep.refinement_delta) : json(nullptr)}};
    io::write_text_file(dir / "summary.json", summary.dump(2) + "\n");
    out << "max ratio " << format_double(rep.max) << " at sample " << rep.argmax_sample << ", t = " << rep.argmax_label
        << "\n";
    if (rep.max > 1.0 + 1e-6) {
      err << "dispersive bound violated: " << format_double(rep.max) << " > 1 + 1e-6\n";
      return invariant_breach;
    }
    return ok;
  }
};

// ----------------------------------------------------------- strichartz-scan

std::vector<AdmissiblePair> parse_pairs(const std::string& text, int d) {
  std::vector<AdmissiblePair> out;
  std::stringstream ss(text);
  std::string item;
  auto num = [](const std::string& s) {
    if (s == "inf") return kInf;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    require(used == s.size() && !s.empty(), ErrorKind::invalid_parameter, "bad exponent '" + s + "'");
    return v;
  };
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    require(colon != std::string::npos, ErrorKind::invalid_parameter, "pairs are written q:r, got '" + item + "'");
    AdmissiblePair p{num(item.substr(0, colon)), num(item.substr(colon + 1)), 0.5 * d};
    require(admissible_check(p), ErrorKind::invalid_parameter, "pair " + item + " is not sharp d/2-admissible");
    out.push_back(p);
  }
  require(!out.empty(), ErrorKind::invalid_parameter, "empty pair list");
  return out;
}

Trajectory cosine_forcing(const SpectralField& g, const TimeGrid& grid) {
  Trajectory f{grid, {}};
  for (double s : grid.nodes()) f.states.push_back(cplx(std::cos(s)) * g);
  return f;
}

double relative_change(double a, double b) {
  const double scale = std::max(std::abs(a), 1e-300);
  return std::abs(b - a) / scale;
}

struct StrichartzCmd {
  Common common;
  BasisArgs basis;
  EnsembleArgs ens;
  double T = 0.5 * M_PI;
  int time_nodes = 81;
  std::string pairs;
  int pair_count = 5;
  bool refine = false;
  bool dual = true;

  void attach(CLI::App* sub, Params& p) {
    add_common(sub, common);
    basis.add_to(p);
    ens.add_to(p, 4);
    p.add("--T", "T", T, "Half-width of the symmetric time window (<= pi/2)");
    p.add("--time-nodes", "time_nodes", time_nodes, "Time nodes on [-T, T]");
    p.add("--pairs", "pairs", pairs, "Comma-separated q:r list (default: sampled family)");
    p.add("--pair-count", "pair_count", pair_count, "Size of the sampled family when --pairs is empty");
    p.add_flag("--refine", "refine", refine, "Double N, M and time resolution; adds a delta column");
    p.add_flag("--dual,!--no-dual", "dual", dual, "Also report dual-estimate rows with F(s) = cos(s) u0");
  }

  int run(const Params& params, std::ostream& out, std::ostream& err) {
    const BasisSpec spec = basis.spec();
    const EnsembleSpec es = ens.spec(spec);
    require(T > 0.0 && T <= 0.5 * M_PI + 1e-12, ErrorKind::invalid_parameter, "T must lie in (0, pi/2]");
    require(time_nodes >= 2, ErrorKind::invalid_parameter, "time_nodes must be >= 2");
    const auto family = pairs.empty() ? admissible_family(spec.dimension, pair_count) : parse_pairs(pairs, spec.dimension);
    const TimeGrid grid = TimeGrid::symmetric(T, time_nodes);
    grid.validate();
    const fs::path dir = prepare_out_dir(common);
    echo_config(dir, "strichartz-scan", params.effective());

    const StrichartzScan scan = strichartz_scan(es, family, grid, refine);

    std::vector<std::string> header{"sample_id", "t_or_pair", "quotient"};
    if (refine) header.push_back("delta");
    Csv csv(header);
    for (std::size_t i = 0; i < scan.report.entries.size(); ++i) {
      const auto& e = scan.report.entries[i];
      std::vector<std::string> row{std::to_string(e.sample_id), e.label, format_double(e.quotient)};
      if (refine) row.push_back(format_double(relative_change(e.quotient, scan.refined_quotients[i])));
      csv.row_strings(row);
    }

    json dual_max = json::object();
    if (dual) {
      const auto data = generate_ensemble(es);
      BasisSpec fine{spec.dimension, 2 * spec.max_degree, 2 * spec.nodes_per_axis};
      TimeGrid fgrid{grid.t0, grid.t1, 2 * grid.n - 1};
      std::vector<double> best(family.size(), 0.0);
      for (std::size_t s = 0; s < data.size(); ++s) {
        const Trajectory f = cosine_forcing(data[s], grid);
        std::optional<Trajectory> ff;
        if (refine) ff = cosine_forcing(rebase(data[s], fine), fgrid);
        for (std::size_t k = 0; k < family.size(); ++k) {
          const double q = dual_strichartz_quotient(f, family[k], family[k]);
          best[k] = std::max(best[k], q);
          std::vector<std::string> row{std::to_string(s), "dual:" + family[k].label(), format_double(q)};
          if (refine) row.push_back(format_double(relative_change(q, dual_strichartz_quotient(*ff, family[k], family[k]))));
          csv.row_strings(row);
        }
      }
      for (std::size_t k = 0; k < family.size(); ++k) dual_max[family[k].label()] = best[k];
    }
    io::write_text_file(dir / "strichartz.csv", csv.str());

    json per_pair = json::array();
    bool breach = false;
    for (std::size_t k = 0; k < family.size(); ++k) {
      json row = {{"pair", family[k].label()}, {"max", scan.pair_max[k]}};
      if (refine) {
        row["max_refined"] = scan.pair_max_refined[k];
        row["delta"] = scan.pair_delta[k];
      }
      per_pair.push_back(row);
      if (std::isinf(family[k].q) && family[k].r == 2.0 && std::abs(scan.pair_max[k] - 1.0) > 1e-12) {
        err << "(inf,2) quotient " << format_double(scan.pair_max[k]) << " differs from 1\n";
        breach = true;
      }
      out << "pair " << family[k].label() << "  max " << format_double(scan.pair_max[k]);
      if (refine) out << "  delta " << format_double(scan.pair_delta[k]);
      out << "\n";
    }
    json summary = {{"max", scan.report.max},
                    {"argmax", {{"sample_id", scan.report.argmax_sample}, {"pair", scan.report.argmax_label}}},
                    {"refinement_delta", refine ? json(scan.report.refinement_delta) : json(nullptr)},
                    {"pairs", per_pair}};
    if (dual) summary["dual_max"] = dual_max;
    io::write_text_file(dir / "summary.json", summary.dump(2) + "\n");
    return breach ? invariant_breach : ok;
  }
};

// ------------------------------------------------------------------ nls-solve

struct ProblemOverrides {
  double p = 3.0;
  int mu = 1;
  double T = 0.3;
  int time_nodes = 61;
  double tol = 1e-12;
  int max_iter = 60;
  double delta = 0.5;
  int max_degree = 24;
  int nodes = 32;
  double eta = 0.05;

  void add_to(Params& ps) {
    ps.add("--p", "p", p, "Power of the nonlinearity");
    ps.add("--mu", "mu", mu, "Sign of the nonlinearity (+1 or -1)");
    ps.add("--T", "T", T, "Half-width of [-T, T]");
    ps.add("--time-nodes", "time_nodes", time_nodes, "Odd number of time nodes");
    ps.add("--tol", "tol", tol, "Picard tolerance");
    ps.add("--max-iter", "max_iter", max_iter, "Picard iteration cap");
    ps.add("--delta", "delta", delta, "Weight of the L^inf L^2 part of the critical norm");
    ps.add("-N,--max-degree", "max_degree", max_degree, "Truncation degree (u0 is rebased)");
    ps.add("-M,--nodes", "nodes", nodes, "Nodes per axis");
    ps.add("--eta", "eta", eta, "Critical smallness threshold");
  }

  /// Writes explicitly given values into the problem document.
  void patch(json& doc, const Params& ps) const {
    if (ps.given("p")) doc["p"] = p;
    if (ps.given("mu")) doc["mu"] = mu;
    if (ps.given("T")) doc["T"] = T;
    if (ps.given("time_nodes")) doc["time_nodes"] = time_nodes;
    if (ps.given("tol")) doc["tol"] = tol;
    if (ps.given("max_iter")) doc["max_iter"] = max_iter;
    if (ps.given("delta")) doc["delta"] = delta;
    if (ps.given("max_degree")) doc["max_degree"] = max_degree;
    if (ps.given("nodes")) doc["nodes_per_axis"] = nodes;
    if (ps.given("eta")) doc["critical"]["eta"] = eta;
  }
};

io::ProblemDocument load_patched(const std::string& path, const ProblemOverrides& ov, const Params& ps) {
  require(!path.empty(), ErrorKind::invalid_parameter, "--problem is required");
  json doc = io::read_json_file(path);
  ov.patch(doc, ps);
  return io::parse_problem(doc, fs::path(path).parent_path());
}

struct NlsCmd {
  Common common;
  std::string problem;
  std::string format = "binary";
  ProblemOverrides ov;

  void attach(CLI::App* sub, Params& p) {
    add_common(sub, common);
    p.add("--problem", "problem", problem, "Problem document (JSON)");
    p.add("--format", "format", format, "Solution format: binary | json");
    ov.add_to(p);
  }

  int run(const Params& params, std::ostream& out, std::ostream& err) {
    require(format == "binary" || format == "json", ErrorKind::invalid_parameter, "format must be binary or json");
    io::ProblemDocument doc = load_patched(problem, ov, params);
    NLSProblem& pr = doc.problem;
    const Regime regime = classify_regime(pr.basis.dimension, pr.p);
    require(regime != Regime::supercritical, ErrorKind::regime,
            "p = " + format_double(pr.p) + " is supercritical for d = " + std::to_string(pr.basis.dimension) +
                " (critical power is " + format_double(1.0 + 4.0 / pr.basis.dimension) + ")");
    const fs::path dir = prepare_out_dir(common);

    NLSSolution sol;
    json extra = json::object();
    if (regime == Regime::critical) {
      const io::CriticalSettings cs = doc.critical.value_or(io::CriticalSettings{});
      if (cs.auto_interval) {
        SmallnessOptions so;
        so.time_nodes = cs.smallness_nodes;
        const SmallnessResult sm = find_smallness_interval(pr.u0, pr.p, cs.eta, so);
        extra["smallness"] = {{"n", sm.n}, {"T", sm.interval.t1}, {"norm", sm.norm}, {"satisfied", sm.satisfied}};
        if (!sm.satisfied) {
          echo_config(dir, "nls-solve", io::to_json(doc));
          err << "no interval I_n with n <= n_max meets the smallness bound\n";
          return non_convergence;
        }
        pr.interval = sm.interval;
      }
      pr.validate();
      echo_config(dir, "nls-solve", io::to_json(doc));
      CriticalOptions co;
      co.eta = cs.eta;
      sol = critical_solve(pr, co);
    } else {
      pr.validate();
      echo_config(dir, "nls-solve", io::to_json(doc));
      sol = picard_solve(pr);
    }

    if (format == "json") {
      io::save_trajectory(dir / "solution.json", sol.solution);
    } else {
      io::save_trajectory(dir / "solution.ousf", sol.solution);
    }
    json rep = io::to_json(sol.report);
    rep["interval"] = {{"T", pr.interval.t1}, {"time_nodes", pr.interval.n}};
    for (const auto& [k, v] : extra.items()) rep[k] = v;
    io::write_text_file(dir / "report.json", rep.dump(2) + "\n");
    Csv mass({"t", "mass"});
    const auto m = mass_trace(sol.solution);
    const auto ts = pr.interval.nodes();
    for (std::size_t j = 0; j < m.size(); ++j) mass.row_strings({format_double(ts[j]), format_double(m[j])});
    io::write_text_file(dir / "mass.csv", mass.str());

    out << to_string(regime) << "  iterations " << sol.report.iterations << "  final residual "
        << format_double(sol.report.residuals.empty() ? 0.0 : sol.report.residuals.back()) << "  tail ratio "
        << format_double(sol.report.tail_ratio) << "\n";
    if (!sol.report.converged) {
      err << "Picard iteration did not converge in " << pr.max_iter << " iterations\n";
      return non_convergence;
    }
    return ok;
  }
};

// ---------------------------------------------------------- critical-interval

struct IntervalCmd {
  Common common;
  std::string problem;
  bool zero = false;
  BasisArgs basis;
  double p = 5.0;
  double eta = 0.05;
  int time_nodes = 61;
  int n_max = 10000;

  void attach(CLI::App* sub, Params& ps) {
    add_common(sub, common);
    ps.add("--problem", "problem", problem, "Problem document; its u0 is the ball center u1");
    ps.add_flag("--zero", "zero", zero, "Use u1 = 0 on the basis given by -d/-N/-M");
    basis.add_to(ps);
    ps.add("--p", "p", p, "Power (defaults to the problem's p)");
    ps.add("--eta", "eta", eta, "Smallness threshold");
    ps.add("--time-nodes", "time_nodes", time_nodes, "Odd node count per tested interval");
    ps.add("--n-max", "n_max", n_max, "Largest n tried for I_n = [-1/n, 1/n]");
  }

  int run(const Params& params, std::ostream& out, std::ostream& err) {
    require(zero != !problem.empty(), ErrorKind::invalid_parameter, "give exactly one of --problem or --zero");
    SpectralField u1;
    double power = p;
    if (zero) {
      u1 = SpectralField::zero(basis.spec());
    } else {
      const io::ProblemDocument doc = io::load_problem(problem);
      u1 = doc.problem.u0;
      if (!params.given("p")) power = doc.problem.p;
      if (!params.given("eta") && doc.critical) eta = doc.critical->eta;
    }
    const fs::path dir = prepare_out_dir(common);
    json eff = params.effective();
    eff["p"] = power;
    eff["eta"] = eta;
    echo_config(dir, "critical-interval", eff);

    SmallnessOptions so;
    so.time_nodes = time_nodes;
    so.n_max = n_max;
    const SmallnessResult sm = find_smallness_interval(u1, power, eta, so);
    json tested = json::array();
    Csv csv({"n", "T", "norm"});
    for (const auto& [n, v] : sm.tested) {
      const double half = n == 0 ? 0.5 * M_PI : std::min(1.0 / n, 0.5 * M_PI);
      tested.push_back({{"n", n}, {"norm", v}});
      csv.row_strings({std::to_string(n), format_double(half), format_double(v)});
    }
    io::write_text_file(dir / "tested.csv", csv.str());
    json rep = {{"n", sm.n},
                {"T", sm.interval.t1},
                {"time_nodes", sm.interval.n},
                {"norm", sm.norm},
                {"eta", eta},
                {"p", power},
                {"satisfied", sm.satisfied},
                {"tested", tested}};
    io::write_text_file(dir / "interval.json", rep.dump(2) + "\n");
    out << "n " << sm.n << "  T " << format_double(sm.interval.t1) << "  norm " << format_double(sm.norm)
        << (sm.satisfied ? "" : "  (bound not met)") << "\n";
    if (!sm.satisfied) {
      err << "smallness bound " << format_double(eta) << " not met up to n = " << n_max << "\n";
      return non_convergence;
    }
    return ok;
  }
};

int exit_for(const Error& e) { return e.kind() == ErrorKind::regime ? regime_rejected : config_error; }

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spectral toolkit for the Ornstein-Uhlenbeck Schroedinger propagator", "ouspec"};
  app.require_subcommand(1);
  app.footer("Exit codes: 0 ok, 1 invariant breach, 2 non-convergence, 3 regime rejected, 4 config error");

  auto* s_basis = app.add_subcommand("basis-check", "Orthonormality, eigenrelation and transform residuals");
  auto* s_disp = app.add_subcommand("dispersive-scan", "Normalized dispersive ratios over an ensemble");
  auto* s_str = app.add_subcommand("strichartz-scan", "Strichartz and dual quotients over admissible pairs");
  auto* s_nls = app.add_subcommand("nls-solve", "Picard/Duhamel solve of a problem document");
  auto* s_int = app.add_subcommand("critical-interval", "Smallness-interval search for the critical regime");

  Params p_basis(s_basis), p_disp(s_disp), p_str(s_str), p_nls(s_nls), p_int(s_int);
  BasisCheck c_basis;
  DispersiveCmd c_disp;
  StrichartzCmd c_str;
  NlsCmd c_nls;
  IntervalCmd c_int;
  c_basis.attach(s_basis, p_basis);
  c_disp.attach(s_disp, p_disp);
  c_str.attach(s_str, p_str);
  c_nls.attach(s_nls, p_nls);
  c_int.attach(s_int, p_int);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : config_error;
  }

  auto dispatch = [&](auto& cmd, Params& params) -> int {
    try {
      load_config(cmd.common, params);
      return cmd.run(params, out, err);
    } catch (const Error& e) {
      err << "error: " << e.what() << "\n";
      return exit_for(e);
    } catch (const std::exception& e) {
      err << "internal error: " << e.what() << "\n";
      return invariant_breach;
    }
  };
  if (s_basis->parsed()) return dispatch(c_basis, p_basis);
  if (s_disp->parsed()) return dispatch(c_disp, p_disp);
  if (s_str->parsed()) return dispatch(c_str, p_str);
  if (s_nls->parsed()) return dispatch(c_nls, p_nls);
  return dispatch(c_int, p_int);
}

}  // namespace ou::cli
