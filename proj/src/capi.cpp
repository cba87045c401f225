#include "bh_capi.h"

#include <exception>
#include <new>
#include <string>
#include <vector>

#include "bh/commands.hpp"
#include "bh/error.hpp"
#include "bh/io.hpp"
#include "bh/norms.hpp"

struct bh_config {
  std::vector<bh::Scenario> scenarios;
  std::vector<std::string> text;
};

struct bh_report {
  bh::CommandReport rep;
};

struct bh_field {
  std::vector<bh::ScalarField> comps;
};

namespace {

thread_local std::string last_error;

bh_status set_error(bh_status s, const std::string& what) {
  last_error = what;
  return s;
}

template <class Fn>
bh_status guarded(Fn&& fn) {
  try {
    last_error.clear();
    fn();
    return BH_OK;
  } catch (const bh::Error& e) {
    return set_error(static_cast<bh_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(BH_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(BH_E_INTERNAL, e.what());
  }
}

void need(const void* p, const char* what) {
  if (!p) bh::fail(bh::ErrorCode::invalid_argument, std::string(what) + " is null");
}

bh_status make_config(std::vector<bh::Scenario> v, bh_config** out) {
  auto* c = new bh_config{std::move(v), {}};
  c->text.resize(c->scenarios.size());
  *out = c;
  return BH_OK;
}

bh::CommandOptions command_options(const bh_run_options* opt) {
  bh::CommandOptions o;
  if (opt) {
    if (opt->out_dir) o.out_dir = opt->out_dir;
    o.threads = opt->threads < 1 ? 1 : opt->threads;
    o.seed = opt->seed;
  }
  return o;
}

const bh::Scenario& scenario_at(const bh_config* cfg, size_t index) {
  need(cfg, "config");
  if (index >= cfg->scenarios.size()) bh::fail(bh::ErrorCode::invalid_argument, "scenario index out of range");
  return cfg->scenarios[index];
}

} // namespace

extern "C" {

const char* bh_last_error(void) { return last_error.c_str(); }

const char* bh_status_name(bh_status s) {
  switch (s) {
  case BH_OK:
    return "ok";
  case BH_E_INVALID_ARGUMENT:
    return "invalid argument";
  case BH_E_PRECONDITION:
    return "precondition violated";
  case BH_E_NEAR_SINGULAR:
    return "near singular";
  case BH_E_DIVERGENT:
    return "divergent";
  case BH_E_IO:
    return "i/o error";
  case BH_E_PARSE:
    return "parse error";
  case BH_E_UNKNOWN_KEY:
    return "unknown key";
  case BH_E_NUMERIC:
    return "numeric error";
  case BH_E_INTERNAL:
    return "internal error";
  }
  return "unknown status";
}

bh_status bh_config_default(bh_config** out) {
  return guarded([&] {
    need(out, "out");
    make_config({bh::calibration_scenario()}, out);
  });
}

bh_status bh_config_load(const char* path, bh_config** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    make_config(bh::load_config(path), out);
  });
}

bh_status bh_config_parse(const char* text, bh_config** out) {
  return guarded([&] {
    need(text, "text");
    need(out, "out");
    make_config(bh::parse_config(text), out);
  });
}

bh_status bh_config_save(const bh_config* cfg, const char* path) {
  return guarded([&] {
    need(cfg, "config");
    need(path, "path");
    bh::persist_config(path, cfg->scenarios);
  });
}

bh_status bh_config_count(const bh_config* cfg, size_t* count) {
  return guarded([&] {
    need(cfg, "config");
    need(count, "count");
    *count = cfg->scenarios.size();
  });
}

bh_status bh_config_name(const bh_config* cfg, size_t index, const char** name) {
  return guarded([&] {
    need(name, "name");
    *name = scenario_at(cfg, index).name.c_str();
  });
}

bh_status bh_config_describe(const bh_config* cfg, size_t index, const char** text) {
  return guarded([&] {
    need(text, "text");
    const bh::Scenario& sc = scenario_at(cfg, index);
    auto& slot = const_cast<bh_config*>(cfg)->text[index];
    slot = bh::describe(sc);
    *text = slot.c_str();
  });
}

void bh_config_free(bh_config* cfg) { delete cfg; }

bh_status bh_run(const bh_config* cfg, size_t index, bh_command cmd, const bh_run_options* opt, bh_report** out) {
  return guarded([&] {
    need(out, "out");
    const bh::Scenario& sc = scenario_at(cfg, index);
    if (cmd < BH_CMD_FORWARD || cmd > BH_CMD_SWEEP) bh::fail(bh::ErrorCode::invalid_argument, "unknown command");
    auto rep = bh::run_command(static_cast<bh::Command>(cmd), sc, command_options(opt));
    *out = new bh_report{std::move(rep)};
  });
}

bh_status bh_fit(const char* records_csv, bh_fit_model model, bh_fit_target target, const bh_run_options* opt,
                 bh_report** out) {
  return guarded([&] {
    need(records_csv, "records path");
    need(out, "out");
    if (model != BH_FIT_LOG_POWER && model != BH_FIT_LOGLOG_POWER)
      bh::fail(bh::ErrorCode::invalid_argument, "unknown fit model");
    if (target < BH_FIT_Q || target > BH_FIT_DA) bh::fail(bh::ErrorCode::invalid_argument, "unknown fit target");
    auto rep = bh::run_fit(records_csv, model == BH_FIT_LOG_POWER ? bh::FitModel::log_power : bh::FitModel::loglog_power,
                           static_cast<bh::FitTarget>(target), command_options(opt));
    *out = new bh_report{std::move(rep)};
  });
}

bh_status bh_report_summary(const bh_report* rep, const char** text) {
  return guarded([&] {
    need(rep, "report");
    need(text, "text");
    *text = rep->rep.summary.c_str();
  });
}

bh_status bh_report_aborted(const bh_report* rep, size_t* count) {
  return guarded([&] {
    need(rep, "report");
    need(count, "count");
    *count = rep->rep.aborted;
  });
}

bh_status bh_report_file_count(const bh_report* rep, size_t* count) {
  return guarded([&] {
    need(rep, "report");
    need(count, "count");
    *count = rep->rep.files.size();
  });
}

bh_status bh_report_file(const bh_report* rep, size_t index, const char** path) {
  return guarded([&] {
    need(rep, "report");
    need(path, "path");
    if (index >= rep->rep.files.size()) bh::fail(bh::ErrorCode::invalid_argument, "file index out of range");
    *path = rep->rep.files[index].c_str();
  });
}

void bh_report_free(bh_report* rep) { delete rep; }

bh_status bh_field_load(const char* path, bh_field** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new bh_field{bh::read_fields(path)};
  });
}

bh_status bh_field_shape(const bh_field* f, int* n, int* N, int* components) {
  return guarded([&] {
    need(f, "field");
    const bh::GridSpec& g = f->comps.at(0).grid;
    if (n) *n = g.n;
    if (N) *N = g.N;
    if (components) *components = static_cast<int>(f->comps.size());
  });
}

bh_status bh_field_norm(const bh_field* f, int component, double s, double* value) {
  return guarded([&] {
    need(f, "field");
    need(value, "value");
    if (component < 0 || component >= static_cast<int>(f->comps.size()))
      bh::fail(bh::ErrorCode::invalid_argument, "component out of range");
    *value = s == 0.0 ? bh::l2_norm(f->comps[component]) : bh::sobolev_norm(f->comps[component], s);
  });
}

void bh_field_free(bh_field* f) { delete f; }

} // extern "C"
