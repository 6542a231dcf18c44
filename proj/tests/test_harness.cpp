// SPDX-License-Identifier: Apache-2.0
//
// dbssim - link-level simulator for feedback-based distributed transmit beamforming

#include <doctest.h>

#include "dbs/harness.hpp"

using namespace dbs;

TEST_SUITE("harness") {
  TEST_CASE("parse_config: defaults and overrides") {
    const auto cfg = parse_config(
        "# comment line\n"
        "experiment = fig7-narrowband-outage\n"
        "seed = 42\n"
        "trials = 5000\n"
        "n_nodes = 100\n"
        "format = json\n");
    CHECK(cfg.experiment == "fig7-narrowband-outage");
    CHECK(cfg.seed == 42);
    CHECK(cfg.trials == 5000);
    CHECK(cfg.format == ExperimentConfig::Format::Json);
    const auto params = resolve_params(cfg.overrides);
    CHECK(params.n_nodes == 100);
    // untouched defaults stay at the Table I/II values
    CHECK(params.ofdm.n_subcarriers == 1200);
    CHECK(params.ofdm.n_pilot_subcarriers == 200);
    CHECK(params.epsilon == doctest::Approx(0.01));
  }

  TEST_CASE("parse_config: rejections") {
    CHECK_THROWS_AS(parse_config("epsilon = 1.5\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config("unknown_key = 3\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config("this line has no equals\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config("n_nodes = -3\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config("format = yaml\n"), std::invalid_argument);
  }

  TEST_CASE("unknown experiments are rejected") {
    ExperimentConfig cfg;
    cfg.experiment = "fig99-nonexistent";
    CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);
  }

  TEST_CASE("catalog holds the nine named experiments") {
    const auto& catalog = experiment_catalog();
    REQUIRE(catalog.size() == 9);
    CHECK(catalog.front().name == "fig2-noiseless-evolution");
    CHECK(catalog.back().name == "tab-link-budget");
  }

  TEST_CASE("identical configs produce identical bytes") {
    ExperimentConfig cfg;
    cfg.experiment = "fig3-noisy-evolution";
    cfg.seed = 7;
    cfg.trials = 8;
    cfg.overrides["n_nodes"] = "16";
    cfg.overrides["iterations"] = "30";
    const auto a = format_records(cfg, run_experiment(cfg));
    const auto b = format_records(cfg, run_experiment(cfg));
    CHECK(a == b);
    CHECK(a.find("algorithm") != std::string::npos);
  }

  TEST_CASE("results are independent of the worker count") {
    ExperimentConfig cfg;
    cfg.experiment = "fig3-noisy-evolution";
    cfg.seed = 11;
    cfg.trials = 12;
    cfg.overrides["n_nodes"] = "8";
    cfg.overrides["iterations"] = "20";
    cfg.threads = 1;
    const auto serial = format_records(cfg, run_experiment(cfg));
    cfg.threads = 4;
    const auto parallel = format_records(cfg, run_experiment(cfg));
    CHECK(serial == parallel);
  }

  TEST_CASE("single-trial runs emit per-trial records without averaging") {
    ExperimentConfig cfg;
    cfg.experiment = "fig3-noisy-evolution";
    cfg.seed = 3;
    cfg.trials = 1;
    cfg.overrides["n_nodes"] = "4";
    cfg.overrides["iterations"] = "5";
    cfg.overrides["emit"] = "trace";
    const auto records = run_experiment(cfg);
    // 4 algorithms x 6 trace points (initial + 5 iterations)
    CHECK(records.size() == 24);
    CHECK(records.front().parameters[1].first == "trial");
    CHECK(records.front().metrics[0].first == "rss");
  }

  TEST_CASE("trace CSV rows carry (trial, iteration, rss, gain_db)") {
    ExperimentConfig cfg;
    cfg.experiment = "fig2-noiseless-evolution";
    cfg.seed = 5;
    cfg.trials = 2;
    cfg.overrides["n_nodes"] = "4";
    cfg.overrides["iterations"] = "3";
    cfg.overrides["emit"] = "trace";
    const auto text = format_records(cfg, run_experiment(cfg));
    CHECK(text.rfind("experiment,seed,algorithm,trial,iteration,rss,gain_db\n", 0) == 0);
  }

  TEST_CASE("pdp overrides feed the channel model") {
    ExperimentConfig cfg;
    cfg.experiment = "fig9-uplink-outage";
    cfg.seed = 9;
    cfg.trials = 2000;
    cfg.overrides["pdp_delays_ns"] = "0,100";
    cfg.overrides["pdp_powers_db"] = "0,-3";
    cfg.overrides["snr_list"] = "-5";
    const auto records = run_experiment(cfg);
    REQUIRE(records.size() == 1);
    CHECK(records.front().metrics.size() == 3);
  }

  TEST_CASE("link budget records default to JSON") {
    ExperimentConfig cfg;
    cfg.experiment = "tab-link-budget";
    const auto text = format_records(cfg, run_experiment(cfg));
    CHECK(text.front() == '[');
    CHECK(text.find("\"range_km\"") != std::string::npos);
  }
}

TEST_SUITE("harness") {
  TEST_CASE("profiles round-trip through the config format") {
    const auto pdp = dbs::epa_profile();
    const auto cfg = parse_config(pdp_to_config(pdp));
    const auto params = resolve_params(cfg.overrides);
    const auto restored = params.profile();
    REQUIRE(restored.n_taps() == pdp.n_taps());
    for (Eigen::Index p = 0; p < pdp.n_taps(); ++p) {
      CHECK(restored.taps[p].delay_s == doctest::Approx(pdp.taps[p].delay_s).epsilon(1e-12));
      CHECK(restored.amplitudes[p] == doctest::Approx(pdp.amplitudes[p]).epsilon(1e-12));
    }
  }
}
