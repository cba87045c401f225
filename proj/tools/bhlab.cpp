#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "bh_capi.h"

namespace {

struct Flags {
  std::string config, out = ".";
  int threads = 1;
  uint64_t seed = 1;
};

int report_failure(const char* what, bh_status s) {
  std::fprintf(stderr, "bhlab: %s: %s: %s\n", what, bh_status_name(s), bh_last_error());
  return 2;
}

void print_report(const bh_report* rep) {
  const char* text = nullptr;
  if (bh_report_summary(rep, &text) == BH_OK) std::fputs(text, stdout);
  size_t files = 0;
  bh_report_file_count(rep, &files);
  for (size_t i = 0; i < files; ++i) {
    const char* p = nullptr;
    if (bh_report_file(rep, i, &p) == BH_OK) std::printf("wrote %s\n", p);
  }
}

int run(bh_command cmd, const Flags& f) {
  bh_config* cfg = nullptr;
  const bh_status ls = f.config.empty() ? bh_config_default(&cfg) : bh_config_load(f.config.c_str(), &cfg);
  if (ls != BH_OK) return report_failure("config", ls);
  size_t count = 0;
  bh_config_count(cfg, &count);
  const bh_run_options opt{f.out.c_str(), f.threads, f.seed};
  int code = 0;
  for (size_t i = 0; i < count; ++i) {
    bh_report* rep = nullptr;
    const char* name = nullptr;
    bh_config_name(cfg, i, &name);
    const bh_status s = bh_run(cfg, i, cmd, &opt, &rep);
    if (s != BH_OK) {
      report_failure(name, s);
      code = 2;
      continue;
    }
    print_report(rep);
    size_t aborted = 0;
    bh_report_aborted(rep, &aborted);
    if (aborted > 0 && code == 0) code = 1;
    bh_report_free(rep);
  }
  bh_config_free(cfg);
  return code;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stability lab for the perturbed biharmonic Navier inverse problem"};
  app.require_subcommand(1);
  Flags f;
  const std::pair<const char*, bh_command> commands[] = {
      {"forward", BH_CMD_FORWARD}, {"dtn", BH_CMD_DTN}, {"cgo", BH_CMD_CGO},     {"reconstruct", BH_CMD_RECONSTRUCT},
      {"carleman", BH_CMD_CARLEMAN}, {"uc", BH_CMD_UC},   {"sweep", BH_CMD_SWEEP}};
  const char* help[] = {"solve the forward problem for both coefficient sets",
                        "assemble partial DtN maps and their differences",
                        "build CGO solutions over a tau sweep",
                        "extract Fourier data and invert it",
                        "Carleman inequality sweep on the sine test function",
                        "unique continuation experiment and fit",
                        "stability sweep over t and h"};
  int code = 0;
  int i = 0;
  for (const auto& [name, cmd] : commands) {
    CLI::App* sub = app.add_subcommand(name, help[i++]);
    sub->add_option("--config", f.config, "run-config file (JSON); default: calibration scenario");
    sub->add_option("--out", f.out, "output directory")->capture_default_str();
    sub->add_option("--threads", f.threads, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--seed", f.seed, "seed for random boundary data")->capture_default_str();
    sub->callback([&code, &f, c = cmd] { code = run(c, f); });
  }

  std::string records, model = "log_power", target = "q";
  CLI::App* fit = app.add_subcommand("fit", "fit error against delta from a records CSV");
  fit->add_option("--records", records, "records CSV written by sweep")->required();
  fit->add_option("--model", model, "log_power or loglog_power")
      ->check(CLI::IsMember({"log_power", "loglog_power"}))
      ->capture_default_str();
  fit->add_option("--target", target, "q, A or dA")->check(CLI::IsMember({"q", "A", "dA"}))->capture_default_str();
  fit->add_option("--config", f.config, "ignored by fit");
  fit->add_option("--out", f.out, "output directory")->capture_default_str();
  fit->add_option("--threads", f.threads, "ignored by fit");
  fit->add_option("--seed", f.seed, "ignored by fit");
  fit->callback([&] {
    const bh_run_options opt{f.out.c_str(), f.threads, f.seed};
    bh_report* rep = nullptr;
    const bh_status s = bh_fit(records.c_str(), model == "log_power" ? BH_FIT_LOG_POWER : BH_FIT_LOGLOG_POWER,
                               target == "q" ? BH_FIT_Q : target == "A" ? BH_FIT_A : BH_FIT_DA, &opt, &rep);
    if (s != BH_OK) {
      code = report_failure("fit", s);
      return;
    }
    print_report(rep);
    bh_report_free(rep);
  });

  CLI11_PARSE(app, argc, argv);
  return code;
}
