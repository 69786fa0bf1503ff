// Copyright 2026 The Hemoflow Authors.
// SPDX-License-Identifier: Apache-2.0

// Exercises the shared library through its C header only.

#include "hemoflow/hemoflow.h"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("hemoflow_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

} // namespace

TEST_CASE("version and error state") {
  CHECK(std::string(hf_version()).size() > 0);
  hf_power_law pl{};
  CHECK(hf_fit_for_hct(90.0, nullptr, &pl) == HF_ERROR);
  CHECK(std::string(hf_last_error()).size() > 0);
  CHECK(hf_fit_for_hct(45.0, nullptr, nullptr) == HF_ERROR);
  CHECK(hf_fit_for_hct(45.0, nullptr, &pl) == HF_OK);
  CHECK(std::string(hf_last_error()).empty());
}

TEST_CASE("rheology calls") {
  hf_power_law pl{};
  REQUIRE(hf_fit_for_hct(45.0, nullptr, &pl) == HF_OK);
  CHECK(pl.m == doctest::Approx(0.0242).epsilon(1e-6));
  CHECK(pl.n == doctest::Approx(0.72).epsilon(1e-6));
  CHECK(pl.hct == 45.0);
  double mu = 0.0;
  REQUIRE(hf_newtonian_equivalent(&pl, 12, 123, &mu) == HF_OK);
  // mean of m g^(n-1) over [12, 123] in closed form
  const double expected = pl.m * (std::pow(123.0, pl.n) - std::pow(12.0, pl.n)) / (pl.n * (123.0 - 12.0));
  CHECK(mu == doctest::Approx(expected).epsilon(1e-12));
  CHECK(hf_newtonian_equivalent(&pl, 123, 12, &mu) == HF_ERROR);

  const auto dir = scratch("capi_rheo");
  {
    std::ofstream m(dir / "m.csv");
    m.precision(17);
    m << "shear_rate,viscosity,hct\n";
    for (double g : {10.0, 50.0, 200.0, 1000.0})
      m << g << ',' << 0.03 * std::pow(g, -0.3) << ",40\n";
  }
  hf_power_law fit{};
  REQUIRE(hf_fit_measurements((dir / "m.csv").c_str(), &fit) == HF_OK);
  CHECK(fit.m == doctest::Approx(0.03).epsilon(1e-9));
  CHECK(fit.n == doctest::Approx(0.7).epsilon(1e-9));
  CHECK(hf_write_params((dir / "p.csv").c_str(), &fit, 1) == HF_OK);
  CHECK(fs::exists(dir / "p.csv"));
  CHECK(hf_fit_measurements((dir / "missing.csv").c_str(), &fit) == HF_ERROR);
}

TEST_CASE("mesh handles") {
  hf_mesh* mesh = nullptr;
  REQUIRE(hf_mesh_generate_pipe(0.01, 0.05, 0, &mesh) == HF_OK);
  CHECK(hf_mesh_vertex_count(mesh) > 0);
  CHECK(hf_mesh_tet_count(mesh) > 0);
  const double vol = hf_mesh_volume(mesh);
  CHECK(vol > 0.9 * M_PI * 1e-4 * 0.05);
  CHECK(vol < M_PI * 1e-4 * 0.05);
  const auto dir = scratch("capi_mesh");
  REQUIRE(hf_mesh_save(mesh, (dir / "m.vtk").c_str()) == HF_OK);
  hf_mesh* back = nullptr;
  REQUIRE(hf_mesh_load((dir / "m.vtk").c_str(), &back) == HF_OK);
  CHECK(hf_mesh_tet_count(back) == hf_mesh_tet_count(mesh));
  hf_mesh_free(back);
  hf_mesh_free(mesh);
  CHECK(hf_mesh_generate_pipe(-1.0, 0.05, 0, &mesh) == HF_ERROR);
  CHECK(hf_mesh_load((dir / "none.vtk").c_str(), &mesh) == HF_ERROR);
}

TEST_CASE("config handles") {
  hf_config* cfg = nullptr;
  REQUIRE(hf_config_default(&cfg) == HF_OK);
  CHECK(hf_config_validate(cfg) == HF_OK);
  CHECK(hf_config_set_output(cfg, "/tmp/somewhere") == HF_OK);
  char buf[64];
  REQUIRE(hf_config_output(cfg, buf, sizeof buf) == HF_OK);
  CHECK(std::string(buf) == "/tmp/somewhere");
  char tiny[4];
  CHECK(hf_config_output(cfg, tiny, sizeof tiny) == HF_ERROR);
  CHECK(hf_config_set_seed(cfg, 42) == HF_OK);
  CHECK(hf_run_stage(cfg, "bogus", "/tmp/x") == HF_ERROR);
  hf_config_free(cfg);

  const auto dir = scratch("capi_cfg");
  std::ofstream(dir / "bad.ini") << "[phantom]\nfoo = 1\n";
  CHECK(hf_config_load((dir / "bad.ini").c_str(), &cfg) == HF_ERROR);
  CHECK(std::string(hf_last_error()).find("phantom.foo") != std::string::npos);
}

TEST_CASE("windkessel through the C interface") {
  const auto dir = scratch("capi_wk");
  {
    std::ofstream q(dir / "q.csv");
    q << "t,value\n0,100\n0.4,300\n0.8,100\n";
  }
  const hf_windkessel_params p{0.5, 2.0, 0.25, 0.0};
  double drift = -1.0;
  REQUIRE(hf_windkessel_run(&p, (dir / "q.csv").c_str(), 1e-3, 4, "none", (dir / "p.csv").c_str(), &drift) == HF_OK);
  CHECK(drift >= 0.0);
  std::ifstream in(dir / "p.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "t,p_wk,p_d");
  CHECK(hf_windkessel_run(&p, (dir / "q.csv").c_str(), 1e-3, 4, "sideways", (dir / "p.csv").c_str(), nullptr) ==
        HF_ERROR);
}
