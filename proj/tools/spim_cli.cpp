#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "spim/harness.hpp"

namespace {

struct SubcommandFlags {
  std::string config_file;
  std::vector<std::string> sets;
  std::map<std::string, std::string> values;
};

std::string flag_name(std::string key) {
  for (auto& ch : key)
    if (ch == '_') ch = '-';
  return "--" + key;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Photonic spatial-Euler Ising machine simulator and Max-cut toolkit"};
  app.require_subcommand(1);
  app.footer(std::string("Artifacts go to <output>/<task>-<config hash>; default output root is $") +
             spim::kOutputRootEnv + " or ./spim-out.\nExit status: 0 ok, 1 verification failed, 2 config error, "
             "3 runtime error.");

  const std::vector<std::pair<spim::Task, std::string>> tasks{
      {spim::Task::generate, "Generate seeded rank-2 instances and their encodings"},
      {spim::Task::solve, "Run solvers on a file instance or generated instances"},
      {spim::Task::sweep_density, "Compare solvers across graph densities"},
      {spim::Task::sweep_noise, "Anneal with matched seeds across detector noise levels"},
      {spim::Task::verify, "Run the invariant checks"},
      {spim::Task::bench, "Time cost evaluation and solvers"}};

  std::map<CLI::App*, std::pair<spim::Task, SubcommandFlags>> commands;
  for (const auto& [task, help] : tasks) {
    CLI::App* sub = app.add_subcommand(spim::to_string(task), help);
    auto& [t, flags] = commands[sub];
    t = task;
    sub->add_option("-c,--config", flags.config_file, "Flat key = value config file")->check(CLI::ExistingFile);
    sub->add_option("--set", flags.sets, "Override any key: --set key=value");
    for (const auto& key : spim::config_keys()) {
      if (key == "task") continue;
      sub->add_option(flag_name(key), flags.values[key], "config key '" + key + "'");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? spim::kExitOk : spim::kExitConfigError;
  }

  for (auto& [sub, entry] : commands) {
    if (!sub->parsed()) continue;
    auto& [task, flags] = entry;
    spim::ExperimentConfig config;
    try {
      if (!flags.config_file.empty()) config = spim::read_config(flags.config_file);
      config.task = task;
      for (const auto& key : spim::config_keys())
        if (key != "task" && sub->count(flag_name(key)) > 0) spim::apply_setting(config, key, flags.values[key]);
      for (const auto& kv : flags.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw spim::ConfigError("--set expects key=value, got '" + kv + "'");
        spim::apply_setting(config, kv.substr(0, eq), kv.substr(eq + 1));
      }
      config.task = task;
    } catch (const spim::ConfigError& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return spim::kExitConfigError;
    }
    return spim::run_main(config, std::cout, std::cerr);
  }
  return spim::kExitConfigError;
}
