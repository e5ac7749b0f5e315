#include <CLI11.hpp>
#include <cstdio>
#include <iostream>

#include "kbreg/commands.hpp"

namespace {

void write_result(const kbreg::CommandResult& result, const std::string& out_path) {
  if (out_path.empty()) {
    std::fputs(result.table.to_csv().c_str(), stdout);
    for (const auto& [suffix, table] : result.sidecars)
      std::fprintf(stderr, "note: sidecar%s suppressed without --out\n", suffix.c_str());
    return;
  }
  result.table.write(out_path);
  for (const auto& [suffix, table] : result.sidecars) table.write(out_path + suffix);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kbreg: Bayesian kernel regression toolkit (RVM / Q-GP / GP, linear smoothers, AR(1) Kalman filtering)"};
  app.require_subcommand(1);

  std::string config_path, data_path, out_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> jitter;

  const std::vector<std::string> commands = {"fit",   "predict",   "smooth", "sample",
                                             "learn", "relevance", "kalman", "compare"};
  for (const auto& name : commands) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "flat key = value configuration file")->required();
    sub->add_option("--data", data_path, "dataset CSV (input columns then 'y')");
    sub->add_option("--out", out_path, "output CSV path (stdout when omitted)");
    sub->add_option("--seed", seed, "seed override");
    sub->add_option("--jitter", jitter, "jitter override");
  }

  CLI11_PARSE(app, argc, argv);

  try {
    kbreg::RunConfig rc;
    rc.command = app.get_subcommands().front()->get_name();
    rc.config = kbreg::Config::load(config_path);
    rc.data_path = data_path;
    rc.out_path = out_path;
    rc.seed = seed;
    rc.jitter = jitter;
    write_result(kbreg::run_command(rc), out_path);
    return 0;
  } catch (const kbreg::Error& e) {
    std::fprintf(stderr, "error [%s]: %s\n", e.code().c_str(), e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error [INTERNAL]: %s\n", e.what());
    return 2;
  }
}
