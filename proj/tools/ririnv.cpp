// Copyright 2026 The ririnv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// ririnv command-line driver.
//
//   ririnv simulate --config scenario.json --out sim/
//   ririnv degrade sim/ --out plant/
//   ririnv invert sim/ --out filters/ --set inversion.tau=0.06
//   ririnv apply filters/ plant/ --input x0.wav --input x1.wav --out y/
//   ririnv evaluate plant/ filters/ --out report/
//   ririnv sweep --config scenario.json --param tau --out sweep/
//
// Exit status: 0 ok, 2 config, 3 geometry, 4 dimension, 5 I/O, 1 anything else.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ririnv/ririnv.hpp"

namespace fs = std::filesystem;
using namespace ririnv;

namespace {

enum Exit : int {
  kExitOk = 0,
  kExitOther = 1,
  kExitConfig = 2,
  kExitGeometry = 3,
  kExitDimension = 4,
  kExitIo = 5,
};

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::kConfig:
    case ErrorKind::kInvalidArgument:
    case ErrorKind::kBetaNegative:
    case ErrorKind::kNonpositiveTau:
    case ErrorKind::kOutOfRange:
      return kExitConfig;
    case ErrorKind::kPointOutsideRoom:
    case ErrorKind::kCoincidentSourceReceiver:
      return kExitGeometry;
    case ErrorKind::kDimensionMismatch:
    case ErrorKind::kRateMismatch:
      return kExitDimension;
    case ErrorKind::kIo:
      return kExitIo;
    default:
      return kExitOther;
  }
}

struct Common {
  std::optional<std::string> config;
  std::string out;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, Common& c, bool need_out = true) {
  cmd->add_option("--config", c.config, "scenario JSON file")->check(CLI::ExistingFile);
  auto* o = cmd->add_option("--out", c.out, "output directory");
  if (need_out) o->required();
  cmd->add_option("--set", c.overrides, "override a scenario key, e.g. inversion.tau=0.06")
      ->allow_extra_args(false);
  cmd->add_option("--seed", c.seed, "seed recorded with the run (no step is random)");
}

std::vector<std::string> with_seed(const Common& c) {
  auto o = c.overrides;
  if (c.seed) o.push_back("seed=" + std::to_string(*c.seed));
  return o;
}

// Scenario stored in an existing set, with command-line overrides on top.
ScenarioConfig scenario_of(const ResponseSet& set, const Common& c) {
  if (c.config) throw Error(ErrorKind::kConfig, "--config cannot be combined with an input set");
  Json j = to_json(set.scenario);
  for (const auto& o : with_seed(c)) apply_override(j, o);
  ScenarioConfig sc = scenario_from_json(j);
  sc.validate();
  return sc;
}

void check_same_geometry(const ScenarioConfig& a, const ScenarioConfig& b) {
  if (a.sources != b.sources || a.receivers != b.receivers) {
    std::clog << "warning: the two sets disagree on source/receiver positions\n";
  }
}

void note(const std::string& s) { std::cout << s << '\n'; }

int run_simulate(const Common& c) {
  const auto sc = load_scenario(c.config ? std::optional<fs::path>(*c.config) : std::nullopt,
                                with_seed(c));
  const auto set = simulate_set(sc);
  write_set(c.out, set);
  note("wrote " + std::to_string(set.data.rows() * set.data.cols()) + " responses to " + c.out);
  return kExitOk;
}

int run_degrade(const Common& c, const std::optional<std::string>& input) {
  ScenarioConfig sc;
  if (input) {
    const auto sim = read_set(*input);
    if (sim.kind != SetKind::kSimulation) {
      throw Error(ErrorKind::kConfig, "degrade expects a simulation set");
    }
    sc = scenario_of(sim, c);
  } else {
    sc = load_scenario(c.config ? std::optional<fs::path>(*c.config) : std::nullopt, with_seed(c));
  }
  const auto set = degrade_set(sc);
  write_set(c.out, set);
  note(std::string("wrote ") + (set.synthetic() ? kSyntheticLabel : "undegraded copy") + " to " + c.out);
  return kExitOk;
}

int run_invert(const Common& c, const std::string& input) {
  const auto model = read_set(input);
  const auto sc = scenario_of(model, c);
  InverseFilterSet diag{TransferMatrix(ImpulseResponse({0.0}, 1.0)), InversionConfig(), 0, 0, 0.0, {}};
  const auto set = invert_set(model, sc, &diag);
  write_set(c.out, set);
  std::ostringstream msg;
  msg << "wrote " << set.data.rows() * set.data.cols() << " filters to " << c.out
      << " (fft " << diag.fft_length << ", delay " << diag.delay_samples
      << " samples, max wraparound " << format_number(diag.max_wraparound_ratio()) << ")";
  note(msg.str());
  return kExitOk;
}

int run_apply(const Common& c, const std::string& filters_dir, const std::string& plant_dir,
              const std::vector<std::string>& inputs) {
  const auto filters = read_set(filters_dir);
  const auto plant = read_set(plant_dir);
  if (filters.kind != SetKind::kFilters) throw Error(ErrorKind::kConfig, filters_dir + " is not a filter set");
  if (plant.kind == SetKind::kFilters) throw Error(ErrorKind::kConfig, plant_dir + " is a filter set");
  check_same_geometry(filters.scenario, plant.scenario);
  std::vector<ImpulseResponse> x;
  for (const auto& p : inputs) x.push_back(wav::read(p));
  const auto y = apply(filters.data, plant.data, x);
  std::error_code ec;
  fs::create_directories(c.out, ec);
  if (ec) throw Error(ErrorKind::kIo, c.out + ": " + ec.message());
  for (std::size_t k = 0; k < y.size(); ++k) wav::write(fs::path(c.out) / ("y_r" + std::to_string(k) + ".wav"), y[k]);
  note("wrote " + std::to_string(y.size()) + " outputs to " + c.out);
  return kExitOk;
}

int run_evaluate(const Common& c, const std::string& plant_dir, const std::string& filters_dir) {
  const auto plant = read_set(plant_dir);
  const auto filters = read_set(filters_dir);
  if (filters.kind != SetKind::kFilters) throw Error(ErrorKind::kConfig, filters_dir + " is not a filter set");
  if (plant.kind == SetKind::kFilters) throw Error(ErrorKind::kConfig, plant_dir + " is a filter set");
  check_same_geometry(filters.scenario, plant.scenario);
  const auto sc = scenario_of(filters, c);
  const auto& inv = filters.extra.at("inversion");
  const auto delay = inv.at("delay_samples").get<std::size_t>();
  const auto report = evaluate(plant.data, filters.data, delay, sc.eval_config(), plant.synthetic());

  std::error_code ec;
  fs::create_directories(c.out, ec);
  if (ec) throw Error(ErrorKind::kIo, c.out + ": " + ec.message());
  const auto path = fs::path(c.out) / "evaluate.csv";
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw Error(ErrorKind::kIo, path.string() + ": cannot open for writing");
  write_eval_csv(f, report);
  write_eval_csv(std::cout, report);
  if (plant.synthetic()) note(std::string("note: plant is a ") + kSyntheticLabel);
  return kExitOk;
}

std::vector<double> default_values(SweepParameter p) {
  switch (p) {
    case SweepParameter::kTau: return {0.01, 0.02, 0.04, 0.08, 0.16, 0.32, 0.64};
    case SweepParameter::kBeta: return {1e-4, 1e-3, 1e-2, 1e-1, 1.0};
    case SweepParameter::kAbar: return {0.01, 0.02, 0.04, 0.08, 0.16};
  }
  return {};
}

int run_sweep(const Common& c, const std::string& param_name, std::vector<double> values) {
  const auto sc = load_scenario(c.config ? std::optional<fs::path>(*c.config) : std::nullopt, with_seed(c));
  const auto param = sweep_parameter_from(param_name);
  if (values.empty()) values = default_values(param);
  const auto result = ririnv::run_sweep(sc, param, values);
  std::error_code ec;
  fs::create_directories(c.out, ec);
  if (ec) throw Error(ErrorKind::kIo, c.out + ": " + ec.message());
  const auto path = fs::path(c.out) / ("sweep_" + param_name + ".csv");
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw Error(ErrorKind::kIo, path.string() + ": cannot open for writing");
  write_sweep_csv(f, result);
  write_sweep_csv(std::cout, result);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Image-source room simulation, regularized inverse filters and dereverberation metrics"};
  app.require_subcommand(1);

  Common sim_c, deg_c, inv_c, app_c, eval_c, sweep_c;
  std::optional<std::string> deg_in;
  std::string inv_in, apply_filters, apply_plant, eval_plant, eval_filters, sweep_param;
  std::vector<std::string> apply_inputs;
  std::vector<double> sweep_values;

  auto* simulate = app.add_subcommand("simulate", "write the image-source responses of a scenario");
  add_common(simulate, sim_c);

  auto* degrade = app.add_subcommand("degrade", "write the synthetic 'measured' proxy set");
  degrade->add_option("input", deg_in, "simulation set directory (or use --config)");
  add_common(degrade, deg_c);

  auto* inv = app.add_subcommand("invert", "compute inverse filters for a response set");
  inv->add_option("input", inv_in, "response set directory")->required();
  add_common(inv, inv_c);

  auto* ap = app.add_subcommand("apply", "drive a plant through inverse filters");
  ap->add_option("filters", apply_filters, "filter set directory")->required();
  ap->add_option("plant", apply_plant, "response set directory")->required();
  ap->add_option("--input", apply_inputs, "one WAV per control point")->required();
  add_common(ap, app_c);

  auto* ev = app.add_subcommand("evaluate", "dereverberation metrics per control point");
  ev->add_option("plant", eval_plant, "plant response set directory")->required();
  ev->add_option("filters", eval_filters, "filter set directory")->required();
  add_common(ev, eval_c);

  auto* sw = app.add_subcommand("sweep", "rerun the pipeline across tau, beta or abar");
  sw->add_option("--param", sweep_param, "tau, beta or abar")->required();
  sw->add_option("--values", sweep_values, "values to try (defaults per parameter)")->delimiter(',');
  add_common(sw, sweep_c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*simulate) return run_simulate(sim_c);
    if (*degrade) {
      if (!deg_in && !deg_c.config) throw Error(ErrorKind::kIo, "degrade needs an input set or --config");
      return run_degrade(deg_c, deg_in);
    }
    if (*inv) return run_invert(inv_c, inv_in);
    if (*ap) return run_apply(app_c, apply_filters, apply_plant, apply_inputs);
    if (*ev) return run_evaluate(eval_c, eval_plant, eval_filters);
    if (*sw) return run_sweep(sweep_c, sweep_param, sweep_values);
  } catch (const PointOutsideRoom& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitGeometry;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const Json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitOther;
  }
  return kExitOther;
}
