// Copyright (c) 2026, the gazete authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "gazete/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"gazete: Turkish news AI-rewrite detection pipeline"};

  std::string config_path;
  std::string stage = "pipeline";
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  bool mock_rewriter = false;

  app.add_option("--config", config_path, "pipeline config file (JSON, // comments allowed)")
      ->required();
  app.add_option("--stage", stage,
                 "ingest|clean|synthesize|split|train|evaluate|predict|report|pipeline");
  app.add_option("--seed", seed, "override the top-level seed");
  app.add_option("--out", out_dir, "override the output directory");
  app.add_flag("--mock-rewriter", mock_rewriter,
               "force the deterministic offline rewriter regardless of config");

  CLI11_PARSE(app, argc, argv);

  try {
    auto config = gazete::pipeline::load_config(config_path);
    gazete::pipeline::StageOverrides overrides;
    overrides.seed = seed;
    overrides.out_dir = out_dir;
    overrides.force_mock = mock_rewriter;
    gazete::pipeline::run_stage(stage, std::move(config), overrides);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
