#include <iostream>
#include <stdexcept>

#include <CLI11.hpp>

#include "rough/cli/commands.hpp"
#include "rough/errors.hpp"

int main(int argc, char** argv) {
  using namespace rough;
  CLI::App app{"Schauder-basis path generation and roughness analysis"};
  app.set_version_flag("--version", std::string(version));
  app.require_subcommand(1);

  std::string config_file;
  std::string out;
  std::string paths;
  std::string save;
  std::uint64_t seed = 0;
  cli::Options opt;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config,-c", config_file, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--threads", opt.threads, "worker threads (results do not depend on it)")
        ->check(CLI::Range(1u, 1024u));
  };

  auto* gen = app.add_subcommand("generate", "draw paths and write paths.csv + manifest.json");
  add_common(gen);
  gen->add_option("--out,-o", out, "output directory")->required();
  auto* seed_opt = gen->add_option("--seed", seed, "override run.seed");

  auto* ana = app.add_subcommand("analyze", "Holder, variation and quadratic-variation reports");
  add_common(ana);
  ana->add_option("--paths,-p", paths, "paths.csv")->required()->check(CLI::ExistingFile);
  ana->add_option("--out,-o", out, "output directory")->required();

  auto* nor = app.add_subcommand("normality", "KS and JB table at test points");
  add_common(nor);
  nor->add_option("--paths,-p", paths, "paths.csv")->required()->check(CLI::ExistingFile);
  nor->add_option("--out,-o", out, "table CSV")->required();

  auto* cov = app.add_subcommand("covariance", "assemble and dump the coefficient covariance");
  add_common(cov);
  cov->add_option("--out,-o", out, "output directory")->required();

  auto* val = app.add_subcommand("validate-partition", "partition diagnostics as JSON");
  add_common(val);
  val->add_option("--save", save, "write the partition levels to this JSON file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : cli::usage;
  }

  try {
    const auto cfg = cli::load_config(config_file);
    if (*seed_opt) opt.seed = seed;
    if (gen->parsed()) return cli::cmd_generate(cfg, out, opt);
    if (ana->parsed()) return cli::cmd_analyze(cfg, paths, out);
    if (nor->parsed()) return cli::cmd_normality(cfg, paths, out);
    if (cov->parsed()) return cli::cmd_covariance(cfg, out, opt);
    if (val->parsed()) return cli::cmd_validate_partition(cfg, save);
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return cli::numerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::usage;
  }
  return cli::usage;
}
