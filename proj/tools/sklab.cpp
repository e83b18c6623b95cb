// Command-line front end: every subcommand maps onto one experiment of the
// harness; flags override config-file entries.

#include "sk/harness.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <stdexcept>
#include <vector>

namespace {

struct RawOptions {
  std::string config;
  std::vector<std::pair<std::string, std::string>> entries;  // in CLI order
};

void add_common_flags(CLI::App* cmd, RawOptions& raw) {
  cmd->set_help_flag("--help", "print usage");  // frees -h / --h for the field
  auto bind = [&raw](const std::string& key) {
    return [&raw, key](const std::string& v) { raw.entries.emplace_back(key, v); };
  };
  cmd->add_option_function<std::string>("--beta", bind("beta"), "inverse temperature");
  cmd->add_option_function<std::string>("--h", bind("h"), "external field");
  cmd->add_option_function<std::string>("--n", bind("n"), "system size(s), comma separated");
  cmd->add_option_function<std::string>("--seeds", bind("seeds"),
                                        "seed list a,b,c or base:count");
  cmd->add_option_function<std::string>("--k-max", bind("k_max"), "iteration count");
  cmd->add_option_function<std::string>("--n-points", bind("n_points"),
                                        "number of sampled magnetizations");
  cmd->add_option_function<std::string>("--restarts", bind("restarts"),
                                        "maximizer restarts");
  cmd->add_option_function<std::string>("--order", bind("order"), "quadrature order");
  cmd->add_option_function<std::string>("--rho", bind("rho"), "shell radius q_EA");
  cmd->add_option_function<std::string>("--eps", bind("eps"), "shell width / bound eps");
  cmd->add_option_function<std::string>("--scan", bind("scan"),
                                        "hessian-scan set: cube|shell|shell-rejection");
  cmd->add_option_function<std::string>("--out", bind("out"), "output file (default stdout)");
  cmd->add_option_function<std::string>("--format", bind("format"), "csv or json");
  cmd->add_option_function<std::string>("--threads", bind("threads"),
                                        "parallelism degree (0 = cores)");
  cmd->add_option("--config", raw.config, "flat key=value config file");
  cmd->add_flag_callback("--assert",
                         [&raw] { raw.entries.emplace_back("assert", "1"); },
                         "exit 3 when any emitted check fails");
  cmd->add_flag_callback("--timings",
                         [&raw] { raw.entries.emplace_back("timings", "1"); },
                         "include wall time in the output");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SK high-temperature laboratory"};
  app.set_help_flag("--help", "print usage");
  app.require_subcommand(1);

  const std::vector<std::string> commands = {
      "rs-solve",     "region-classify", "tap-run",   "tap-conditioned",
      "hessian-scan", "bound-bvh",       "exact-compare", "hs-verify",
      "gap-study",    "sweep"};
  RawOptions raw;
  std::string sweep_axis, sweep_values, sweep_command = "rs-solve";
  for (const auto& name : commands) {
    CLI::App* cmd = app.add_subcommand(name, "");
    add_common_flags(cmd, raw);
    if (name == "sweep") {
      cmd->add_option("--axis", sweep_axis, "parameter to sweep (beta|h|rho)");
      cmd->add_option("--values", sweep_values, "comma separated values");
      cmd->add_option("--command", sweep_command, "experiment to run per value");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  sk::ExperimentConfig cfg;
  try {
    cfg.command = app.get_subcommands().front()->get_name();
    if (!raw.config.empty()) sk::apply_config_file(cfg, raw.config);
    for (const auto& [key, value] : raw.entries)
      sk::apply_config_entry(cfg, key, value);

    std::vector<sk::ResultRecord> records;
    if (cfg.command == "sweep") {
      cfg.command = sweep_command;
      if (!sweep_axis.empty()) cfg.axis = sweep_axis;
      std::vector<double> values;
      {
        std::stringstream ss(sweep_values);
        std::string tok;
        while (std::getline(ss, tok, ','))
          if (!tok.empty()) values.push_back(std::stod(tok));
      }
      if (cfg.axis.empty()) throw std::invalid_argument("sweep: --axis is required");
      records = sk::sweep(cfg, cfg.axis, values);
    } else {
      records.push_back(sk::run_experiment(cfg));
    }
    sk::emit(records, cfg);

    if (cfg.assert_checks) {
      for (const auto& rec : records)
        if (!rec.all_checks_pass()) return 3;
    }
    return 0;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  }
}
