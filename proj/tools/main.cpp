// chattersim: event-driven simulation and verification of impact
// oscillators. Subcommands: simulate, check, sweep, control, list-models.
// Exit codes: 0 success / verdict holds, 1 verdict negative, 2 usage
// error, 3 runtime error.
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "chatter/config.hpp"
#include "chatter/control.hpp"
#include "chatter/engine.hpp"
#include "chatter/models.hpp"
#include "chatter/report.hpp"
#include "chatter/theorem.hpp"

namespace fs = std::filesystem;
using namespace chatter;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir = ".";
  std::string format;
  std::string model, field, guard, impact_cap;
  std::string out_trace, out_report;
  std::vector<std::pair<std::string, std::string>> numeric;  // key, raw value
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config_path, "configuration file (flat key = value table)");
  cmd->add_option("--out", o.out_dir, "output directory")->capture_default_str();
  cmd->add_option("--format", o.format, "output format: csv|json");
  cmd->add_option("--model", o.model, "catalog model name");
  cmd->add_option("--field", o.field, "inline field expression f(x, v, t)");
  cmd->add_option("--guard", o.guard, "guard kind: fixed|sinusoidal");
  cmd->add_option("--impact-cap", o.impact_cap, "truncation cap: auto|N|none");
  cmd->add_option("--out-trace", o.out_trace, "trace file name");
  cmd->add_option("--out-report", o.out_report, "report file name");
  for (const char* key : {"phi", "X0", "omega", "r", "x0", "v0", "t0", "t_end", "rel_tol",
                          "abs_tol", "event_tol", "zeno_dt", "v_stick", "control_C",
                          "control_tau"}) {
    cmd->add_option_function<std::string>(
        std::string("--") + key,
        [&o, key](const std::string& value) { o.numeric.emplace_back(key, value); },
        std::string("override config key ") + key);
  }
  cmd->add_option_function<std::vector<std::string>>(
      "--set",
      [&o](const std::vector<std::string>& kvs) {
        for (const auto& kv : kvs) {
          const auto eq = kv.find('=');
          if (eq == std::string::npos)
            throw CLI::ValidationError("--set", "expected key=value");
          o.numeric.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
        }
      },
      "extra model parameter overrides as key=value");
}

RunConfig load_config(const CommonOpts& o) {
  std::string text;
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path);
    if (!in) throw SchemaError("config", "cannot open '" + o.config_path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }

  // Command-line overrides are layered on as extra config lines so that
  // one validation path serves both sources.
  std::ostringstream merged;
  merged << text << '\n';
  if (!o.model.empty()) merged << "model = " << o.model << '\n';
  if (!o.field.empty()) merged << "field = \"" << o.field << "\"\n";
  if (!o.guard.empty()) merged << "guard = " << o.guard << '\n';
  if (!o.impact_cap.empty()) merged << "impact_cap = " << o.impact_cap << '\n';
  if (!o.format.empty()) merged << "format = " << o.format << '\n';
  if (!o.out_trace.empty()) merged << "out_trace = " << o.out_trace << '\n';
  if (!o.out_report.empty()) merged << "out_report = " << o.out_report << '\n';
  for (const auto& [key, value] : o.numeric) merged << key << " = " << value << '\n';

  // Later lines win: drop earlier duplicates before parsing.
  std::map<std::string, std::string> last;
  std::vector<std::string> order;
  std::istringstream lines(merged.str());
  std::string line;
  while (std::getline(lines, line)) {
    const auto eq = line.find_first_of("=:");
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    key.erase(0, key.find_first_not_of(" \t"));
    key.erase(key.find_last_not_of(" \t") + 1);
    if (key.empty() || key[0] == '#') continue;
    if (!last.count(key)) order.push_back(key);
    last[key] = line;
  }
  std::ostringstream final_text;
  for (const auto& key : order) final_text << last[key] << '\n';
  return parse_config(final_text.str());
}

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

fs::path out_path(const CommonOpts& o, const std::string& name, const std::string& fallback) {
  return fs::path(o.out_dir) / (name.empty() ? fallback : name);
}

Trajectory run_instance(const ModelInstance& inst, const RunConfig& cfg) {
  if (inst.control && inst.control->gain != 0.0)
    return simulate_controlled(inst.system, inst.control->gain, inst.control->tau, inst.init,
                               inst.t_end, cfg.step, cfg.zeno);
  switch (cfg.cap_mode) {
    case CapMode::automatic:
      return simulate_truncated(inst.system, inst.init, inst.t_end, cfg.step, cfg.zeno);
    case CapMode::fixed_count:
      return simulate_truncated(inst.system, inst.init, inst.t_end, cfg.step, cfg.zeno, {},
                                cfg.cap_count);
    case CapMode::none:
      break;
  }
  return simulate(inst.system, inst.init, inst.t_end, cfg.step, cfg.zeno);
}

int cmd_simulate(const CommonOpts& o) {
  const RunConfig cfg = load_config(o);
  const ModelInstance inst = resolve(cfg);
  const Trajectory traj = run_instance(inst, cfg);

  const auto trace = build_trace(traj);
  write_file(out_path(o, cfg.out_trace, inst.name + "_trace.csv"),
             trace_to_csv(trace, inst.system.dimension()));

  nlohmann::json report = simulation_report(traj, cfg.zeno);
  report["model"] = inst.name;
  write_file(out_path(o, cfg.out_report, inst.name + "_report.json"), report.dump(2) + "\n");

  std::cout << report["verdict"].get<std::string>() << " (" << traj.impacts.size()
            << " impacts, termination " << to_string(traj.termination) << ")\n";
  return 0;
}

int cmd_check(const CommonOpts& o, int grid_n, const std::vector<double>& check_times,
              double m_override, double M_override) {
  const RunConfig cfg = load_config(o);
  const ModelInstance inst = resolve(cfg);
  if (!inst.system.domain)
    throw std::runtime_error("model '" + inst.name + "' declares no domain box to check");

  const std::vector<double> times = check_times.empty() ? std::vector<double>{0.0} : check_times;
  ChatteringCertificate cert =
      theorem_verdict(inst.system.field, *inst.system.domain, grid_n, 1e-12, times);

  nlohmann::json report = certificate_report(cert);
  if (m_override > 0.0 || M_override > 0.0) {
    const double m = m_override > 0.0 ? m_override : cert.bounds.m_est;
    const double M = M_override > 0.0 ? M_override : cert.bounds.M_est;
    cert.inequality = check_inequality(*inst.system.domain, m, M);
    cert.overall = cert.c1_holds && cert.c2.holds && cert.inequality.holds;
    report["inequality"] = {{"holds", cert.inequality.holds},
                            {"lhs", cert.inequality.lhs},
                            {"margin", cert.inequality.margin},
                            {"m_used", m},
                            {"M_used", M},
                            {"bounds_overridden", true}};
    report["overall"] = cert.overall;
  }
  report["model"] = inst.name;
  write_file(out_path(o, cfg.out_report, inst.name + "_certificate.json"),
             report.dump(2) + "\n");
  std::cout << report.dump(2) << "\n";
  return cert.overall ? 0 : 1;
}

int cmd_control(const CommonOpts& o, double t_skip, double tol_T) {
  const RunConfig cfg = load_config(o);
  const ModelInstance inst = resolve(cfg);
  if (!inst.control)
    throw SchemaError("control_C", "control runs need control_C and control_tau");

  const Trajectory traj = simulate_controlled(inst.system, inst.control->gain,
                                              inst.control->tau, inst.init, inst.t_end,
                                              cfg.step, cfg.zeno);
  const ControlOutcome outcome = classify_outcome(traj, t_skip, tol_T);

  const auto trace = build_trace(traj);
  write_file(out_path(o, cfg.out_trace, inst.name + "_trace.csv"),
             trace_to_csv(trace, inst.system.dimension()));
  nlohmann::json report = control_report(outcome);
  report["model"] = inst.name;
  report["n_impacts"] = traj.impacts.size();
  write_file(out_path(o, cfg.out_report, inst.name + "_control.json"), report.dump(2) + "\n");

  std::cout << to_string(outcome.kind);
  if (outcome.kind == OutcomeKind::periodic)
    std::cout << " T=" << format_double(outcome.period)
              << " peak=" << format_double(outcome.amplitude_peak);
  std::cout << "\n";
  return 0;
}

int cmd_sweep(const CommonOpts& o, const std::string& param, const std::string& values_csv,
              double t_skip, double tol_T) {
  const RunConfig cfg = load_config(o);
  if (param.empty()) throw SchemaError("param", "sweep requires --param");

  std::vector<double> values;
  std::istringstream vs(values_csv);
  std::string item;
  while (std::getline(vs, item, ','))
    if (!item.empty()) values.push_back(std::stod(item));
  if (values.empty()) throw SchemaError("values", "sweep requires a nonempty value list");

  struct Row {
    double value = 0.0;
    bool failed = false;
    std::string error;
    std::size_t n_impacts = 0;
    ZenoVerdict verdict = ZenoVerdict::inconclusive;
    double theta_inf = std::numeric_limits<double>::quiet_NaN();
    ControlOutcome outcome;
    bool controlled = false;
    nlohmann::json report;
  };

  const auto run_one = [&](double value) {
    Row row;
    row.value = value;
    try {
      RunConfig local = cfg;
      local.overrides[param] = value;
      if (local.model.empty())
        throw SchemaError(param, "sweeps require a catalog model");
      const ModelInstance inst = resolve(local);
      const Trajectory traj = run_instance(inst, local);
      row.n_impacts = traj.impacts.size();
      if (traj.impacts.size() >= 3) {
        const ZenoReport rep = detect_zeno(traj.impacts, local.zeno);
        row.verdict = rep.verdict;
        row.theta_inf = rep.theta_inf;
      }
      row.controlled = inst.control && inst.control->gain != 0.0;
      if (row.controlled) {
        row.outcome = classify_outcome(traj, t_skip, tol_T);
        row.report = control_report(row.outcome);
      } else {
        row.report = simulation_report(traj, local.zeno);
      }
      row.report["sweep_parameter"] = param;
      row.report["sweep_value"] = value;
    } catch (const std::exception& e) {
      row.failed = true;
      row.error = e.what();
    }
    return row;
  };

  std::vector<std::future<Row>> futures;
  futures.reserve(values.size());
  for (double v : values)
    futures.push_back(std::async(std::launch::async, run_one, v));
  std::vector<Row> rows;
  rows.reserve(values.size());
  for (auto& f : futures) rows.push_back(f.get());

  std::sort(rows.begin(), rows.end(),
            [](const Row& a, const Row& b) { return a.value < b.value; });

  const std::string model_name = cfg.model.empty() ? "inline" : cfg.model;
  const bool control_table = std::any_of(rows.begin(), rows.end(),
                                         [](const Row& r) { return r.controlled; });
  std::string csv;
  if (control_table) {
    csv = param + ",period,amplitude_half_pp,amplitude_peak,classification\n";
    for (const auto& r : rows) {
      if (r.failed) {
        csv += format_double(r.value) + ",,,,error\n";
        continue;
      }
      csv += format_double(r.value) + ',';
      csv += (r.outcome.kind == OutcomeKind::periodic ? format_double(r.outcome.period) : "");
      csv += ',';
      csv += (r.outcome.kind == OutcomeKind::periodic
                  ? format_double(r.outcome.amplitude_half_pp) : "");
      csv += ',';
      csv += (r.outcome.kind == OutcomeKind::periodic
                  ? format_double(r.outcome.amplitude_peak) : "");
      csv += ',';
      csv += to_string(r.outcome.kind) + "\n";
    }
  } else {
    csv = param + ",n_impacts,theta_inf_estimate,verdict\n";
    for (const auto& r : rows) {
      if (r.failed) {
        csv += format_double(r.value) + ",,,error\n";
        continue;
      }
      csv += format_double(r.value) + ',' + std::to_string(r.n_impacts) + ',';
      csv += std::isfinite(r.theta_inf) ? format_double(r.theta_inf) : std::string();
      csv += ',' + to_string(r.verdict) + "\n";
    }
  }
  write_file(fs::path(o.out_dir) / (model_name + "_sweep.csv"), csv);

  for (const auto& r : rows) {
    if (r.failed) continue;
    std::ostringstream name;
    name << model_name << '_' << param << '_' << r.value << "_report.json";
    write_file(fs::path(o.out_dir) / name.str(), r.report.dump(2) + "\n");
  }

  std::cout << csv;
  return 0;
}

int cmd_list_models() {
  for (const auto& spec : catalog()) {
    std::cout << spec.name << "\n  " << spec.summary << "\n";
    for (const auto& p : spec.params)
      std::cout << "    " << p.name << " = " << p.value << " [" << p.unit << "] " << p.doc
                << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"event-driven impact-oscillator simulation and verification"};
  app.require_subcommand(1);

  CommonOpts sim_opts, check_opts, control_opts, sweep_opts;
  int grid_n = 401;
  std::vector<double> check_times;
  double m_override = 0.0, M_override = 0.0;
  double t_skip = 50.0, tol_T = 0.02;
  std::string sweep_param, sweep_values;

  auto* sim = app.add_subcommand("simulate", "run a model and emit trace + report");
  add_common(sim, sim_opts);

  auto* check = app.add_subcommand("check", "certify the chattering conditions on the box");
  add_common(check, check_opts);
  check->add_option("--grid-n", grid_n, "samples per axis")->capture_default_str();
  check->add_option("--check-time", check_times, "time slices for time-dependent fields");
  check->add_option("--m", m_override, "override the sampled lower bound m");
  check->add_option("--M", M_override, "override the sampled upper bound M");

  auto* control = app.add_subcommand("control", "run under delay feedback and classify");
  add_common(control, control_opts);
  control->add_option("--t-skip", t_skip, "transient to discard")->capture_default_str();
  control->add_option("--tol-T", tol_T, "period agreement tolerance")->capture_default_str();

  auto* sweep = app.add_subcommand("sweep", "run a parameter sweep, emit a combined CSV");
  add_common(sweep, sweep_opts);
  sweep->add_option("--param", sweep_param, "model parameter to sweep")->required();
  sweep->add_option("--values", sweep_values, "comma-separated values")->required();
  sweep->add_option("--t-skip", t_skip, "transient to discard")->capture_default_str();
  sweep->add_option("--tol-T", tol_T, "period agreement tolerance")->capture_default_str();

  auto* list = app.add_subcommand("list-models", "print the model catalog");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sim->parsed()) return cmd_simulate(sim_opts);
    if (check->parsed())
      return cmd_check(check_opts, grid_n, check_times, m_override, M_override);
    if (control->parsed()) return cmd_control(control_opts, t_skip, tol_T);
    if (sweep->parsed()) return cmd_sweep(sweep_opts, sweep_param, sweep_values, t_skip, tol_T);
    if (list->parsed()) return cmd_list_models();
  } catch (const SchemaError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
