#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <random>

#include "bh/error.hpp"
#include "bh/experiment.hpp"

using namespace bh;

namespace {

std::vector<StabilityRecord> synthetic(double exponent, double noise, unsigned seed, bool loglog = false) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> G;
  std::vector<StabilityRecord> out;
  for (int i = 1; i <= 12; ++i) {
    StabilityRecord r;
    r.delta = std::pow(10.0, -i);
    double x = std::abs(std::log(r.delta));
    if (loglog) x = std::abs(std::log(x));
    r.err_q_Hminus1 = std::pow(x, exponent) * std::exp(noise * G(rng));
    out.push_back(r);
  }
  return out;
}

std::string expect_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

Scenario small_scenario() {
  Scenario sc = calibration_scenario();
  sc.name = "small";
  sc.N = 12;
  sc.basis_modes = 4;
  sc.mode = "A_zero";
  sc.t = {0.0, 0.0625, 0.125, 0.25, 0.5, 1.0};
  sc.h = {0.1};
  return sc;
}

} // namespace

TEST_CASE("fit recovers an exact log power law") {
  const FitResult f = fit_stability_curve(synthetic(-0.4, 0.0, 1), FitModel::log_power);
  CHECK(std::abs(f.exponent + 0.4) < 1e-6);
  CHECK(f.residual < 1e-10);
  CHECK(f.points == 12u);
  const FitResult g = fit_stability_curve(synthetic(-0.25, 0.0, 1, true), FitModel::loglog_power);
  CHECK(std::abs(g.exponent + 0.25) < 1e-6);
}

TEST_CASE("fit under multiplicative noise") {
  for (unsigned seed : {3u, 4u, 5u, 6u, 7u}) {
    const FitResult f = fit_stability_curve(synthetic(-0.4, 0.05, seed), FitModel::log_power);
    CHECK(std::abs(f.exponent + 0.4) <= 0.1);
    CHECK(f.std_error > 0.0);
  }
}

TEST_CASE("fit of a constant error is flat") {
  auto recs = synthetic(0.0, 0.0, 1);
  for (auto& r : recs) r.err_q_Hminus1 = 0.3;
  CHECK(std::abs(fit_stability_curve(recs, FitModel::log_power).exponent) < 1e-12);
}

TEST_CASE("fit needs a decade of distinct deltas") {
  std::vector<StabilityRecord> recs(5);
  for (int i = 0; i < 5; ++i) {
    recs[i].delta = 1e-3 * (1.0 + i);
    recs[i].err_q_Hminus1 = 1.0 + i;
  }
  CHECK_THROWS_WITH_AS(fit_stability_curve(recs, FitModel::log_power), "need wider delta range", Error);
  recs.resize(3);
  recs[2].delta = 1.0;
  CHECK_THROWS_WITH_AS(fit_stability_curve(recs, FitModel::log_power), "need wider delta range", Error);
  // t = 0 rows carry delta = 0 and are ignored rather than counted
  auto ok = synthetic(-0.4, 0.0, 1);
  ok.push_back(StabilityRecord{});
  CHECK(fit_stability_curve(ok, FitModel::log_power).points == 12u);
}

TEST_CASE("minimal config takes every default") {
  const auto v = parse_config(R"({"scenarios": [{"name": "calibration"}]})");
  REQUIRE(v.size() == 1u);
  CHECK(v[0] == calibration_scenario());
  const std::string d = describe(v[0]);
  for (const char* key : {"lambda 4", "basis_modes 8", "beta0 2", "eps_reg_factor 0.01", "neumann_max_iter 50",
                          "widths 0.2 0.15 0.1 0.05", "delta_threshold 1", "mode with_A", "direct_cap 24"})
    CHECK_MESSAGE(d.find(key) != std::string::npos, key);
}

TEST_CASE("config errors") {
  CHECK(expect_error(R"({"scenarios": [{"name": "x", "lamda": 2}]})").find("\"lamda\"") != std::string::npos);
  CHECK(expect_error(R"({"scenarios": [{"name": "x", "solver": {"tol": 1e-9, "maxiter": 3}}]})").find("\"maxiter\"") !=
        std::string::npos);
  const std::string missing = expect_error(R"({"scenarios": [{"N": 12}]})");
  CHECK(missing.find("missing required keys: name") != std::string::npos);
  const std::string bump = expect_error(R"({"scenarios": [{"name": "x", "perturbation": {"q": [{"width": 0.1}]}}]})");
  CHECK(bump.find("center, amplitude") != std::string::npos);
  const std::string parse = expect_error("{\"scenarios\": [\n  {\"name\": \"x\",,}\n]}");
  CHECK(parse.find("line 2") != std::string::npos);
  const std::string dim = expect_error(R"({"scenarios": [{"name": "x", "n": 2, "base": {}, "perturbation": {}}]})");
  CHECK(dim.find("n >= 3") != std::string::npos);
  CHECK(expect_error(R"({"scenarios": [{"name": "x", "mode": "A=0"}]})").find("mode") != std::string::npos);
}

TEST_CASE("config round trip") {
  Scenario a = calibration_scenario();
  a.name = "changed";
  a.t = {0.0, 0.3};
  a.pert_q[0].amplitude = {cd(0.5, -0.25)};
  a.cgo.bloch_shift = false;
  a.mode = "A_zero";
  const std::vector<Scenario> v{a, calibration_scenario()};
  CHECK(parse_config(serialize_config(v)) == v);
  const auto path = (std::filesystem::temp_directory_path() / "bh_roundtrip.json").string();
  persist_config(path, v);
  CHECK(load_config(path) == v);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_config(path), Error);
}

TEST_CASE("small sweep: sanity row, monotone delta, record invariants") {
  const Scenario sc = small_scenario();
  const SweepResult r = run_scenario(sc);
  CHECK(r.aborted.empty());
  REQUIRE(r.records.size() == sc.t.size());
  const StabilityRecord& zero = r.records[0];
  CHECK(zero.t == 0.0);
  CHECK(zero.delta <= 1e-8);
  CHECK(zero.err_q_Hminus1 <= sc.solver.tol);
  for (std::size_t i = 1; i < r.records.size(); ++i) CHECK(r.records[i].delta > r.records[i - 1].delta);
  for (const auto& rec : r.records) {
    CHECK(rec.delta >= 0.0);
    CHECK(rec.err_q_Hminus1 >= 0.0);
    CHECK(rec.tau == sc.lambda * rec.h);
    const double rho = std::pow(rec.h, -1.0 / (sc.n + 2));
    CHECK(rec.rho == std::min(rho, std::numbers::pi * (sc.N + 1)));
  }
  const FitResult f = fit_stability_curve(r.records, FitModel::log_power);
  MESSAGE("err_q exponent " << f.exponent << ", reference -" << r.reference.a_zero_rate);
  CHECK(f.exponent < 0.0);
  CHECK(r.records.back().fit_q == f.exponent);
}

TEST_CASE("with_A mode reports A and dA errors") {
  Scenario sc = small_scenario();
  sc.mode = "with_A";
  sc.t = {0.0, 1.0};
  const SweepResult r = run_scenario(sc);
  REQUIRE(r.records.size() == 2u);
  CHECK(r.records[0].err_A_Linf == 0.0);
  CHECK(r.records[0].err_dA_Linf == 0.0);
  CHECK(r.records[1].err_A_Linf > 0.0);
  CHECK(r.records[1].err_dA_Linf > 0.0);
  // a two-point sweep cannot be fitted; the note says so
  CHECK(r.fit_notes.at(0).find("need wider delta range") != std::string::npos);
}

TEST_CASE("failing cells are recorded and the run continues") {
  Scenario sc = small_scenario();
  sc.t = {0.0, 1.0};
  sc.h = {0.1, 1e-9};
  const SweepResult r = run_scenario(sc);
  CHECK(r.records.size() == 2u);
  REQUIRE(r.aborted.size() == 2u);
  CHECK(r.aborted[0].h == 1e-9);
  CHECK(r.aborted[0].stage == "extract");
  CHECK(aborted_csv(r.aborted).find("extract") != std::string::npos);
}

TEST_CASE("delta threshold flags records") {
  Scenario sc = small_scenario();
  sc.t = {0.0, 1.0};
  sc.delta_threshold = 1e-6;
  const SweepResult r = run_scenario(sc);
  CHECK_FALSE(r.records[0].above_threshold);
  CHECK(r.records[1].above_threshold);
}

TEST_CASE("sweep output is deterministic across runs and thread counts") {
  Scenario sc = small_scenario();
  sc.t = {0.0, 0.5, 1.0};
  sc.h = {0.2, 0.1};
  const std::string a = records_csv(run_scenario(sc, {1}).records);
  const std::string b = records_csv(run_scenario(sc, {1}).records);
  const std::string c = records_csv(run_scenario(sc, {2}).records);
  CHECK(a == b);
  CHECK(a == c);
  const SweepResult r = run_scenario(sc);
  const std::string s = sweep_summary(sc, r, 1);
  CHECK(s.find("A = 0 rate -0.4") != std::string::npos);
  CHECK(s.find("lambda 4") != std::string::npos);
}
