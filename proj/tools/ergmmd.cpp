// ergmmd command line: ergodic coverage trajectory optimization over sampled
// domains. Subcommands: run, bench, samples.

#include <CLI11.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ergmmd/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"ergodic coverage trajectory optimization via kernel MMD"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override;
  std::int64_t seed_flag = -1;
  bool verbose = false;

  CLI::App* run = app.add_subcommand("run", "optimize a scenario config");
  run->add_option("config", config_path, "scenario config (JSON)")->required();
  run->add_option("--out", out_override, "output directory override");
  run->add_option("--seed", seed_flag, "seed override (also: ERGMMD_SEED)");
  run->add_flag("-v,--verbose", verbose, "progress output on stderr");

  std::string samples_out = "samples.csv";
  CLI::App* samples = app.add_subcommand("samples", "export the domain sample set");
  samples->add_option("config", config_path, "scenario config (JSON)")->required();
  samples->add_option("--out", samples_out, "output CSV path");
  samples->add_option("--seed", seed_flag, "seed override (also: ERGMMD_SEED)");

  std::vector<int> dims{2};
  std::vector<int> horizons{64};
  std::vector<int> counts{64};
  int repeats = 5;
  std::uint64_t bench_seed = 0;
  std::string bench_out = "bench.csv";
  CLI::App* bench = app.add_subcommand("bench", "time emmd + gradient evaluations");
  bench->add_option("--dims", dims, "state dimensions")->delimiter(',');
  bench->add_option("--horizons", horizons, "time horizons T")->delimiter(',');
  bench->add_option("--samples", counts, "domain sample counts M")->delimiter(',');
  bench->add_option("--repeats", repeats, "timed repeats per cell");
  bench->add_option("--seed", bench_seed, "instance seed");
  bench->add_option("--out", bench_out, "output CSV path");

  CLI11_PARSE(app, argc, argv);

  std::optional<std::uint64_t> seed_override;
  if (seed_flag >= 0) seed_override = static_cast<std::uint64_t>(seed_flag);

  if (run->parsed())
    return ergmmd::run_scenario(config_path, out_override, seed_override, verbose);
  if (samples->parsed())
    return ergmmd::export_samples(config_path, samples_out, seed_override);
  return ergmmd::run_bench(dims, horizons, counts, repeats, bench_seed, bench_out);
}
