#include "riskcb/cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

#include "riskcb/errors.hpp"
#include "riskcb/harness.hpp"

namespace rcb::cli {

namespace fs = std::filesystem;
using harness::Json;

namespace {

struct Options {
  std::string config_path;
  std::string manifest_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  std::string run_id;
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 1;

  // report
  std::vector<std::string> run_dirs;
  std::string q_eval;

  // ingest-check
  std::string schema;
  std::string path;

  // verify
  std::string suite;
  bool corrupt = false;

  // synth
  std::string kind;
  std::size_t rows = 0;
  std::size_t dim = 0;
  std::size_t num_actions = 5;
};

fs::path output_root(const Options& o) {
  if (!o.out_dir.empty()) return o.out_dir;
  if (const char* env = std::getenv(kOutputRootVar); env && *env) return env;
  return ".";
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

harness::RunConfig resolve_config(const Options& o) {
  Json j = Json::object();
  if (!o.manifest_path.empty()) {
    j = harness::load_config_file(o.manifest_path);
    if (!j.contains("config")) throw ConfigError("manifest " + o.manifest_path + " has no config");
    j = j["config"];
  } else if (!o.config_path.empty()) {
    j = harness::load_config_file(o.config_path);
  }
  for (const auto& ov : o.overrides) harness::apply_override(j, ov);
  if (o.seed) j["seed"] = *o.seed;
  auto cfg = harness::config_from_json(j);
  cfg.require_seed();
  return cfg;
}

fs::path run_directory(const Options& o, const harness::RunConfig& cfg) {
  const std::string id = o.run_id.empty() ? harness::config_hash(cfg).substr(0, 12) : o.run_id;
  fs::path dir = output_root(o) / "runs" / id;
  fs::create_directories(dir);
  return dir;
}

void write_run(const fs::path& dir, const harness::RunConfig& cfg, const env::Environment& environment,
               const std::vector<RoundRecord>& records, const harness::ExperimentReport& report) {
  harness::write_rounds((dir / "rounds.jsonl").string(), records);
  write_file(dir / "report.json", report.to_json().dump(2) + "\n");
  write_file(dir / "manifest.json", harness::make_manifest(cfg, environment).dump(2) + "\n");
}

int cmd_run(const Options& o, std::ostream& out) {
  const auto cfg = resolve_config(o);
  const auto environment = harness::build_environment(cfg);
  const auto records = harness::run(cfg, *environment);
  const auto report = harness::make_report(environment->kind(), cfg.q, records, cfg.report);
  const auto dir = run_directory(o, cfg);
  write_run(dir, cfg, *environment, records, report);
  out << "wrote " << dir.string() << " (" << records.size() << " rounds)\n";
  for (const auto& m : report.metrics) {
    out << "  " << m.name << " " << m.ci.point << " [" << m.ci.lo << ", " << m.ci.hi << "]\n";
  }
  return kExitOk;
}

int cmd_sweep(const Options& o, std::ostream& out) {
  const auto cfg = resolve_config(o);
  const auto environment = harness::build_environment(cfg);
  const auto result = harness::sweep(cfg, *environment, o.jobs);
  const auto dir = run_directory(o, cfg);

  std::ostringstream board;
  std::size_t rank = 0;
  for (const auto& t : result.leaderboard) {
    Json row;
    row["rank"] = ++rank;
    row["trial"] = t.index;
    row["ok"] = t.ok();
    if (t.ok()) {
      row["objective"] = t.objective;
      row["metrics"] = t.metrics;
    } else {
      row["error"] = t.error;
    }
    row["config"] = t.config;
    board << row.dump() << '\n';
  }
  write_file(dir / "leaderboard.jsonl", board.str());
  write_run(dir, result.best, *environment, result.best_records, result.best_report);
  write_file(dir / "sweep_manifest.json", harness::make_manifest(cfg, *environment).dump(2) + "\n");
  out << "wrote " << dir.string() << " (" << result.leaderboard.size() << " trials, best objective "
      << result.leaderboard.front().objective << ")\n";
  return kExitOk;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("--q-eval entry '" + item + "' is not a number");
    }
    if (!(out.back() > 0.0 && out.back() < 1.0)) throw ConfigError("--q-eval entries must lie in (0,1)");
  }
  if (out.empty()) throw ConfigError("--q-eval is empty");
  return out;
}

struct LoadedRun {
  std::string id;
  harness::RunConfig cfg;
  env::EnvKind kind;
  harness::ExperimentReport report;
};

std::string csv_num(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

int cmd_report(const Options& o, std::ostream& out) {
  std::optional<std::vector<double>> grid;
  if (!o.q_eval.empty()) grid = parse_grid(o.q_eval);

  std::vector<LoadedRun> runs;
  for (const auto& d : o.run_dirs) {
    const fs::path dir(d);
    if (!fs::exists(dir / "rounds.jsonl") || !fs::exists(dir / "manifest.json")) {
      throw std::runtime_error("run directory " + d + " lacks rounds.jsonl or manifest.json");
    }
    const Json manifest = Json::parse(read_file(dir / "manifest.json"));
    LoadedRun run;
    run.id = dir.filename().string();
    if (run.id.empty()) run.id = dir.parent_path().filename().string();
    run.cfg = harness::config_from_json(manifest.at("config"));
    run.kind = env::env_kind_from_string(manifest.at("env_kind").get<std::string>());
    const auto records = harness::read_rounds((dir / "rounds.jsonl").string());
    auto options = run.cfg.report;
    if (grid) options.q_eval = *grid;
    run.report = harness::make_report(run.kind, run.cfg.q, records, options);
    runs.push_back(std::move(run));
  }

  const fs::path dir = o.out_dir.empty() ? output_root(o) / "report" : fs::path(o.out_dir);
  fs::create_directories(dir);

  std::set<std::string> names;
  for (const auto& r : runs) {
    for (const auto& m : r.report.metrics) names.insert(m.name);
  }
  std::ostringstream table;
  table << "run,env,q,rounds";
  for (const auto& n : names) table << ',' << n << ',' << n << "_lo," << n << "_hi";
  table << '\n';
  for (const auto& r : runs) {
    table << r.id << ',' << r.report.env << ',' << csv_num(r.cfg.q) << ',' << r.report.rounds;
    for (const auto& n : names) {
      const auto it = std::find_if(r.report.metrics.begin(), r.report.metrics.end(),
                                   [&](const auto& m) { return m.name == n; });
      if (it == r.report.metrics.end()) {
        table << ",,,";
      } else {
        table << ',' << csv_num(it->ci.point) << ',' << csv_num(it->ci.lo) << ',' << csv_num(it->ci.hi);
      }
    }
    table << '\n';
  }
  write_file(dir / "metrics.csv", table.str());

  std::ostringstream curves;
  curves << "run,q,q_eval,value,lo,hi\n";
  for (const auto& r : runs) {
    for (const auto& p : r.report.curve) {
      curves << r.id << ',' << csv_num(r.cfg.q) << ',' << csv_num(p.q_eval) << ',' << csv_num(p.ci.point) << ','
             << csv_num(p.ci.lo) << ',' << csv_num(p.ci.hi) << '\n';
    }
  }
  write_file(dir / "expectile_curves.csv", curves.str());

  // Lift/regression front over the query-optimizer runs.
  struct Point {
    std::string id;
    double q, lift, regression, depth;
  };
  std::vector<Point> points;
  for (const auto& r : runs) {
    if (r.kind != env::EnvKind::QueryOpt) continue;
    points.push_back({r.id, r.cfg.q, r.report.metric("lift").ci.point, r.report.metric("regression").ci.point,
                      r.report.metric("regression_depth").ci.point});
  }
  if (!points.empty()) {
    auto dominated = [&](const Point& p) {
      return std::any_of(points.begin(), points.end(), [&](const Point& o2) {
        return o2.lift >= p.lift && o2.regression <= p.regression && (o2.lift > p.lift || o2.regression < p.regression);
      });
    };
    std::ostringstream all, front;
    all << "run,q,lift,regression,regression_depth,on_front\n";
    front << "run,q,lift,regression,regression_depth\n";
    std::vector<Point> on_front;
    for (const auto& p : points) {
      const bool f = !dominated(p);
      all << p.id << ',' << csv_num(p.q) << ',' << csv_num(p.lift) << ',' << csv_num(p.regression) << ','
          << csv_num(p.depth) << ',' << (f ? 1 : 0) << '\n';
      if (f) on_front.push_back(p);
    }
    std::sort(on_front.begin(), on_front.end(), [](const Point& a, const Point& b) { return a.regression < b.regression; });
    for (const auto& p : on_front) {
      front << p.id << ',' << csv_num(p.q) << ',' << csv_num(p.lift) << ',' << csv_num(p.regression) << ','
            << csv_num(p.depth) << '\n';
    }
    write_file(dir / "pareto.csv", all.str());
    write_file(dir / "pareto_front.csv", front.str());
  }
  out << "wrote " << dir.string() << " (" << runs.size() << " runs)\n";
  return kExitOk;
}

int cmd_ingest_check(const Options& o, std::ostream& out) {
  env::IngestSummary s;
  if (o.schema == "query_opt") {
    env::ingest_query_opt(o.path, &s);
  } else {
    env::ingest_csv(o.path, env::builtin_schema(o.schema), &s);
  }
  out << "rows " << s.rows << "\n";
  out << "features " << s.feature_dim << "\n";
  out << "sha256 " << s.sha256 << "\n";
  if (s.expected_rows) {
    out << "expected_rows " << *s.expected_rows << (s.row_count_matches() ? " (match)" : " (MISMATCH)") << "\n";
  }
  return kExitOk;
}

int cmd_verify(const Options& o, std::ostream& out) {
  const auto r = run_suite(o.suite, o.seed.value_or(1), o.corrupt);
  out << (r.pass ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
  return r.pass ? kExitOk : kExitRuntime;
}

int cmd_synth(const Options& o, std::ostream& out) {
  if (!o.seed) throw ConfigError("synth requires --seed");
  env::SyntheticOptions opt;
  opt.dim = o.dim;
  opt.num_actions = o.num_actions;
  const auto environment = env::synthetic_surrogate(env::env_kind_from_string(o.kind), o.rows, *o.seed, opt);
  const fs::path path = o.path.empty() ? output_root(o) / ("synthetic_" + o.kind + (o.kind == "query_opt" ? ".jsonl" : ".csv"))
                                       : fs::path(o.path);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  env::write_dataset(*environment, path.string());
  out << "wrote " << path.string() << " (" << environment->size() << " rows)\n";
  return kExitOk;
}

}  // namespace

int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Risk-averse contextual bandits: runs, sweeps, reports and property checks", "rcb"};
  app.require_subcommand(1, 1);
  Options o;

  auto add_run_flags = [&](CLI::App* c) {
    auto* cfg = c->add_option("--config,-c", o.config_path, "JSON run config");
    auto* man = c->add_option("--manifest", o.manifest_path, "rerun the config recorded in a manifest.json");
    cfg->excludes(man);
    c->add_option("--seed", o.seed, "run seed (overrides the config)");
    c->add_option("--out,-o", o.out_dir, std::string("output root (default $") + kOutputRootVar + " or .)");
    c->add_option("--id", o.run_id, "run id (default: config hash prefix)");
    c->add_option("overrides", o.overrides, "key=value config overrides");
  };

  auto* run = app.add_subcommand("run", "single online run");
  add_run_flags(run);
  auto* sweep = app.add_subcommand("sweep", "random-search sweep");
  add_run_flags(sweep);
  sweep->add_option("--jobs,-j", o.jobs, "parallel trials")->check(CLI::PositiveNumber);

  auto* report = app.add_subcommand("report", "tables and plot series from run directories");
  report->add_option("runs", o.run_dirs, "run directories")->required();
  report->add_option("--q-eval", o.q_eval, "comma-separated evaluation levels");
  report->add_option("--out,-o", o.out_dir, "output directory");

  auto* ingest = app.add_subcommand("ingest-check", "parse a dataset and report its shape and hash");
  std::vector<std::string> schemas = env::builtin_schema_names();
  schemas.push_back("query_opt");
  ingest->add_option("--schema", o.schema, "dataset schema")->required()->check(CLI::IsMember(schemas));
  ingest->add_option("path", o.path, "dataset file")->required();

  auto* verify = app.add_subcommand("verify", "property suites");
  verify->add_option("--suite", o.suite, "suite name")->required()->check(CLI::IsMember(suite_names()));
  verify->add_flag("--corrupt", o.corrupt, "meta-test: corrupt the checked object; the suite must fail");
  verify->add_option("--seed", o.seed, "suite seed");

  auto* synth = app.add_subcommand("synth", "write a synthetic dataset");
  synth->add_option("--kind", o.kind, "environment kind")
      ->required()
      ->check(CLI::IsMember({"pricing_discrete", "pricing_continuous", "inventory", "query_opt"}));
  synth->add_option("--rows", o.rows, "row count")->required()->check(CLI::PositiveNumber);
  synth->add_option("--seed", o.seed, "generator seed")->required();
  synth->add_option("--dim", o.dim, "context dimension (0: kind default)");
  synth->add_option("--out,-o", o.path, "output file");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (run->parsed()) return cmd_run(o, out);
    if (sweep->parsed()) return cmd_sweep(o, out);
    if (report->parsed()) return cmd_report(o, out);
    if (ingest->parsed()) return cmd_ingest_check(o, out);
    if (verify->parsed()) return cmd_verify(o, out);
    if (synth->parsed()) return cmd_synth(o, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const harness::RunError& e) {
    err << "run failed at " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace rcb::cli
