// Copyright 2026 The Cascade Transfer Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <filesystem>
#include <fstream>
#include <sstream>

#include "cascade/config.hpp"
#include "cascade/errors.hpp"
#include "doctest.h"

using namespace cascade;

namespace {

int error_line(const std::string& text) {
  try {
    (void)parse_config_string(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

}  // namespace

TEST_CASE("defaults and parsed overrides") {
  const RunConfig empty = parse_config_string("");
  CHECK(empty.seed == 0);
  CHECK(empty.sweep.omega_grid().size() == 11);
  CHECK(empty.sweep.zeta_grid().size() == 9);
  CHECK(empty.sweep.zeta_grid().back() == doctest::Approx(1.0));

  const RunConfig c = parse_config_string(
      "# comment\n"
      "seed = 42\n"
      "[plant]\n"
      "noise_sigma = 0.1\n"
      "; another comment\n"
      "[train]\n"
      "iterations = 7\n"
      "hidden = 32, 16\n"
      "[sweep]\n"
      "deterministic_policy = false\n"
      "omega_n_min = 4\n"
      "[io]\n"
      "out_dir = /tmp/x\n");
  CHECK(c.seed == 42);
  CHECK(c.train.seed == 42);
  CHECK(c.train.plant.noise_sigma == 0.1);
  CHECK(c.train.iterations == 7);
  CHECK(c.train.hidden == std::vector<int>{32, 16});
  CHECK_FALSE(c.sweep.deterministic_policy);
  CHECK(c.sweep.omega_grid().front() == 4.0);
  CHECK(c.checkpoint_path() == std::filesystem::path("/tmp/x") / "policy.ckpt");
  CHECK(c.sweep_seed() != c.certify_seed());
}

TEST_CASE("errors carry line numbers") {
  CHECK(error_line("[train]\nbogus = 1\n") == 2);
  CHECK(error_line("[nope]\n") == 1);
  CHECK(error_line("[train]\niterations = 3\niterations = 4\n") == 3);
  CHECK(error_line("[train]\n[sweep]\n[train]\n") == 3);
  CHECK(error_line("[train]\niterations = three\n") == 2);
  CHECK(error_line("[train]\ngamma = 0.9x\n") == 2);
  CHECK(error_line("\n\nno equals sign\n") == 3);
  CHECK(error_line("[sweep]\ndeterministic_policy = maybe\n") == 2);
  try {
    (void)parse_config_string("[train]\nbogus = 1\n");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("bogus") != std::string::npos);
  }
}

TEST_CASE("semantic validation") {
  CHECK_THROWS_AS(parse_config_string("[train]\ngamma = 1.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_string("[plant]\nmass = -1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_string("[sweep]\nepisodes = 0\n"), ConfigError);
}

TEST_CASE("canonical text round-trips exactly") {
  RunConfig c = parse_config_string("seed = 9\n[train]\nlearning_rate = 0.00041\n"
                                    "[certify]\ndelta = 0.1\n[plant]\ndt = 0.033\n");
  const std::string text = config_to_string(c);
  const RunConfig back = parse_config_string(text);
  CHECK(config_to_string(back) == text);
  CHECK(back.train.learning_rate == c.train.learning_rate);
  CHECK(back.train.plant.dt == 0.033);
  CHECK(back.certify.delta == 0.1);
}

TEST_CASE("loading from disk") {
  const auto dir = std::filesystem::temp_directory_path() / "cascade_test_config";
  std::filesystem::create_directories(dir);
  const auto path = dir / "run.ini";
  {
    std::ofstream os(path);
    os << "seed = 3\n[train]\niterations = 2\n";
  }
  CHECK(load_config(path).train.iterations == 2);
  const auto missing = dir / "absent.ini";
  try {
    (void)load_config(missing);
    FAIL("expected an error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find(missing.string()) != std::string::npos);
  }
  std::filesystem::remove_all(dir);
}
