#include <catch2/catch_amalgamated.hpp>

#include "hsr/run_config.hpp"

using namespace hsr;

TEST_CASE("an empty config keeps the published defaults") {
  const RunConfig cfg = parse_config("");
  CHECK(cfg.train.icm_k == 10);
  CHECK(cfg.train.lr == Catch::Approx(0.005));
  CHECK(cfg.train.iterations == 30);
  CHECK(cfg.train.epochs_per_iter == 10);
  CHECK(cfg.train.p_ids == 8);
  CHECK(cfg.train.k_imgs == 4);
  CHECK(cfg.train.margin == Catch::Approx(0.3));
  CHECK(cfg.train.min_pts == 4);
  CHECK(cfg.train.d_out == 64);
  CHECK(cfg.train.eps == 0.0);  // auto
  CHECK(cfg.train.lambda_auto);
  CHECK(cfg.train.use_icm);
  CHECK(cfg.train.use_pbh);
  CHECK(cfg.synth.num_ids == 60);
  CHECK(cfg.synth.cams == 6);
}

TEST_CASE("single overrides leave everything else at default") {
  const RunConfig cfg = parse_config("K = 5\n");
  CHECK(cfg.train.icm_k == 5);
  CHECK(cfg.train.lr == Catch::Approx(0.005));
  CHECK(cfg.train.iterations == 30);
}

TEST_CASE("comments, blank lines and spacing are tolerated") {
  const RunConfig cfg = parse_config(
      "# a comment\n"
      "\n"
      "  lr = 0.01   # trailing comment\n"
      "use_icm = false\n"
      "eps = 0.75\n"
      "lambda = -0.25\n");
  CHECK(cfg.train.lr == Catch::Approx(0.01));
  CHECK_FALSE(cfg.train.use_icm);
  CHECK(cfg.train.eps == Catch::Approx(0.75));
  CHECK_FALSE(cfg.train.lambda_auto);
  CHECK(cfg.train.fixed_lambda == Catch::Approx(-0.25));
}

TEST_CASE("type errors name the offending key") {
  try {
    parse_config("K = banana\n");
    FAIL("expected ConfigTypeError");
  } catch (const ConfigTypeError& e) {
    CHECK(std::string(e.what()).find("'K'") != std::string::npos);
    CHECK(std::string(e.what()).find("line 1") != std::string::npos);
  }
}

TEST_CASE("unknown keys and malformed lines are rejected with line numbers") {
  CHECK_THROWS_AS(parse_config("no_such_key = 3\n"), UnknownKeyError);
  try {
    parse_config("K = 3\nthis is not a key value line\n");
    FAIL("expected ConfigParseError");
  } catch (const ConfigParseError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("enum-valued keys parse and reject junk") {
  CHECK(parse_config("triplet_variant = all_pairs\n").train.triplet_variant ==
        TripletVariant::kAllPairs);
  CHECK(parse_config("icm_negative_mode = batch_hard\n").train.icm_negative_mode ==
        IcmNegativeMode::kBatchHard);
  CHECK_THROWS_AS(parse_config("triplet_variant = softmax\n"), ConfigTypeError);
  CHECK_THROWS_AS(parse_config("icm_negative_mode = hardest\n"), ConfigTypeError);
}

TEST_CASE("seed feeds both training and synthesis") {
  const RunConfig cfg = parse_config("seed = 99\n");
  CHECK(cfg.train.seed == 99);
  CHECK(cfg.synth.seed == 99);
  CHECK(cfg.synth_config(7).seed == 7);  // explicit override wins
}

TEST_CASE("boolean values accept true/false/1/0 only") {
  CHECK(parse_config("use_pbh = 0\n").train.use_pbh == false);
  CHECK(parse_config("use_pbh = true\n").train.use_pbh == true);
  CHECK_THROWS_AS(parse_config("use_pbh = yes\n"), ConfigTypeError);
}

TEST_CASE("classifier temperature is tunable") {
  CHECK(parse_config("").train.logit_scale == Catch::Approx(16.0));
  CHECK(parse_config("logit_scale = 8\n").train.logit_scale == Catch::Approx(8.0));
}
