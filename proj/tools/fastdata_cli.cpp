// fastdata command-line front end: run, experiment, serve.

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "fastdata/fastdata.hpp"
#include "fastdata/service/rest.hpp"

namespace fs = std::filesystem;
using namespace fastdata;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

struct RunArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string mode;
  std::string out;
};

struct ExperimentArgs {
  std::string name;
  std::string out;
  std::uint64_t seed = 1;
  std::size_t points = 0;  // 0: experiment default
  std::size_t trials = 0;  // 0: experiment default
};

struct ServeArgs {
  std::string addr = "127.0.0.1:8080";
  std::string data_dir = "data";
  std::string report_log;
};

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path);
  f << text;
}

QuerySpec load_spec(const RunArgs& a) {
  std::ifstream in(a.config);
  if (!in) throw ConfigError("cannot read config file '" + a.config + "'");
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw ConfigError("config file '" + a.config + "' is not valid JSON");
  if (a.seed && j.is_object()) j["randomSeed"] = *a.seed;
  if (!a.mode.empty() && j.is_object()) j["mode"] = a.mode;
  QuerySpec spec = parse_query_spec(j).value();
  // Relative dataset paths are relative to the config file.
  auto& src = spec.source;
  if ((src.kind == SourceKind::CsvFile || src.kind == SourceKind::JsonLines) && fs::path(src.path).is_relative())
    src.path = (fs::path(a.config).parent_path() / src.path).lexically_normal().string();
  return spec;
}

int cmd_run(const RunArgs& a) {
  const QuerySpec spec = load_spec(a);
  auto reports = run_query(spec);
  const QueryReport& last = reports.back();
  write_text(a.out, to_json(last).dump(2) + "\n");
  if (reports.size() > 1 && !a.out.empty() && a.out != "-") {
    std::ofstream log(a.out + ".emissions.jsonl");
    for (const auto& r : reports) log << to_json(r).dump() << '\n';
  }
  std::cerr << "points=" << last.points_processed << " outliers=" << last.outlier_count
            << " explanations=" << last.explanations.size() << " emissions=" << reports.size() << "\n";
  for (const auto& w : last.warnings) std::cerr << "warning: " << w << "\n";
  return kExitOk;
}

int cmd_experiment(const ExperimentArgs& a) {
  std::ostringstream csv;
  const std::string& n = a.name;
  if (n == "synthetic-noise") {
    NoiseSweepOptions o;
    o.seed = a.seed;
    if (a.points) o.n_points = a.points;
    if (a.trials) o.trials = a.trials;
    const auto rs = synthetic_noise_experiment(o);
    to_table(rs).write(csv);
    for (const auto& r : rs)
      if (r.noise == 0.0) std::cerr << r.kind << " noise 0: F1 = " << r.score.f1 << "\n";
  } else if (n == "contamination") {
    ContaminationOptions o;
    o.seed = a.seed;
    if (a.points) o.n_points = a.points;
    to_table(contamination_experiment(o)).write(csv);
  } else if (n == "adaptivity") {
    AdaptivityOptions o;
    o.seed = a.seed;
    const auto rows = adaptivity_experiment(o);
    to_table(rows).write(csv);
    std::map<std::string, double> peak;
    const AdaptivityScript script;
    for (const auto& r : rows)
      if (r.second >= script.spike_begin && r.second < script.spike_end)
        peak[r.config] = std::max(peak[r.config], r.d0_risk_ratio);
    for (const auto& [cfg, rr] : peak) std::cerr << cfg << ": peak D0 risk ratio during spike = " << rr << "\n";
  } else if (n == "amc-bench") {
    AmcBenchOptions o;
    o.seed = a.seed;
    if (a.points) o.items = a.points;
    to_table(amc_bench(o)).write(csv);
  } else if (n == "explain-bench") {
    ExplainFixtureOptions o;
    o.seed = a.seed;
    if (a.points) o.n_points = a.points;
    const auto r = explain_bench(make_explain_fixture(o));
    to_table(std::vector<ExplainBenchResult>{r}).write(csv);
    std::cerr << "speedup = " << r.speedup << (r.identical ? " (identical output)" : " (OUTPUT DIFFERS)") << "\n";
  } else {
    throw ConfigError("unknown experiment '" + n + "'");
  }
  write_text(a.out, csv.str());
  return kExitOk;
}

int cmd_serve(const ServeArgs& a) {
  const auto colon = a.addr.rfind(':');
  if (colon == std::string::npos) throw ConfigError("--serve-addr must be host:port");
  const std::string host = a.addr.substr(0, colon);
  int port = 0;
  try {
    port = std::stoi(a.addr.substr(colon + 1));
  } catch (const std::exception&) {
    throw ConfigError("bad port in --serve-addr '" + a.addr + "'");
  }
  if (!fs::is_directory(a.data_dir)) throw ConfigError("data directory '" + a.data_dir + "' does not exist");

  // Signals are taken synchronously by this thread; workers never see them.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  QueryManager mgr({a.data_dir, 16, a.report_log});
  httplib::Server srv;
  install_routes(srv, mgr);
  if (!srv.bind_to_port(host, port)) throw ConfigError("cannot bind " + a.addr);
  std::thread server([&] { srv.listen_after_bind(); });
  std::cerr << "listening on " << a.addr << ", data dir " << mgr.data_dir().string() << "\n";
  int sig = 0;
  sigwait(&set, &sig);
  srv.stop();
  server.join();
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fastdata: outlier classification and explanation over point streams"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run a query from a JSON config and write its report");
  run_cmd->add_option("--config", run.config, "Query config file")->required()->envname("FASTDATA_CONFIG");
  run_cmd->add_option("--seed", run.seed, "Override randomSeed")->envname("FASTDATA_SEED");
  run_cmd->add_option("--mode", run.mode, "Override mode")
      ->check(CLI::IsMember({"oneshot", "streaming"}))
      ->envname("FASTDATA_MODE");
  run_cmd->add_option("--out", run.out, "Report file (default: standard output)")->envname("FASTDATA_OUT");

  ExperimentArgs exp;
  auto* exp_cmd = app.add_subcommand("experiment", "Run one of the evaluation experiments and write CSV");
  exp_cmd->add_option("name", exp.name, "Experiment name")
      ->required()
      ->check(CLI::IsMember({"synthetic-noise", "contamination", "adaptivity", "amc-bench", "explain-bench"}));
  exp_cmd->add_option("--out", exp.out, "CSV file (default: standard output)")->envname("FASTDATA_OUT");
  exp_cmd->add_option("--seed", exp.seed, "Random seed")->envname("FASTDATA_SEED");
  exp_cmd->add_option("--points", exp.points, "Stream length override");
  exp_cmd->add_option("--trials", exp.trials, "Seeds averaged per noise level (synthetic-noise)");

  ServeArgs serve;
  auto* serve_cmd = app.add_subcommand("serve", "Serve the REST API");
  serve_cmd->add_option("--serve-addr", serve.addr, "host:port")->envname("FASTDATA_SERVE_ADDR");
  serve_cmd->add_option("--data-dir", serve.data_dir, "Directory of datasets")->envname("FASTDATA_DATA_DIR");
  serve_cmd->add_option("--report-log", serve.report_log, "Append evicted streaming reports here")
      ->envname("FASTDATA_REPORT_LOG");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*exp_cmd) return cmd_experiment(exp);
    if (*serve_cmd) return cmd_serve(serve);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const CapacityError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}
