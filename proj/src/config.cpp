// Copyright 2026 The Hemoflow Authors.
// SPDX-License-Identifier: Apache-2.0

#include "hemoflow/pipeline.hpp"

#include "hemoflow/error.hpp"
#include "text_util.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <regex>
#include <set>
#include <sstream>

namespace hemoflow {

namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"paths", {"output", "mesh", "velocity_frames", "inlet_waveform", "period"}},
      {"phantom", {"geometry", "radius", "length", "resolution", "wall_grading", "limb_length", "bend_radius", "m0"}},
      {"rheology", {"hct", "base_curves", "gamma0", "gamma1", "shear_rate_floor"}},
      {"sequence",
       {"venc", "matrix", "voxel", "oversampling", "cardiac_phases", "time_spacing", "t2_star", "adc_bandwidth",
        "slew_rate", "max_gradient", "raster_time", "line_order", "quadrature_subdivisions"}},
      {"noise", {"sigma_fraction", "seed"}},
      {"segments", {}}, // cutN and excludeN, checked by pattern
      {"comparison", {"models", "reference"}},
      {"hemodynamics", {"deviatoric_coefficient", "background_threshold"}},
      {"windkessel", {"rp", "rd", "c", "p_d0", "dt", "cycles", "flow_scaling", "flow_scale"}},
  };
  return keys;
}

std::vector<double> numbers(const std::string& text, size_t count, const std::string& key) {
  std::vector<double> out;
  for (auto tok : detail::split_ws(text))
    out.push_back(detail::parse_double(tok, "config key '" + key + "'"));
  if (count > 0 && out.size() != count)
    fail(ErrorKind::Validation, "config key '" + key + "' needs " + std::to_string(count) + " numbers");
  return out;
}

} // namespace

RunConfig load_config(const std::filesystem::path& path) {
  const std::string text = detail::read_file(path);
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    fail(ErrorKind::Parse, path.string() + ":" + std::to_string(e.line()) + ": " + e.message());
  }

  static const std::regex segment_key("(cut|exclude)[1-9][0-9]*");
  for (const auto& [section, body] : tree) {
    if (body.empty())
      fail(ErrorKind::Validation, "unknown config key '" + section + "' (keys belong in a section)");
    const auto it = known_keys().find(section);
    if (it == known_keys().end())
      fail(ErrorKind::Validation, "unknown config section '" + section + "'");
    for (const auto& [key, value] : body) {
      const bool ok = section == "segments" ? std::regex_match(key, segment_key) : it->second.count(key) > 0;
      if (!ok)
        fail(ErrorKind::Validation, "unknown config key '" + section + "." + key + "'");
    }
  }

  RunConfig c;
  const auto base = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  auto resolve = [&](const std::string& p) -> std::filesystem::path {
    if (p.empty())
      return {};
    std::filesystem::path q(p);
    return q.is_absolute() ? q : base / q;
  };
  auto get = [&](const char* section, const char* key) -> std::optional<std::string> {
    auto v = tree.get_optional<std::string>(pt::ptree::path_type(std::string(section) + "/" + key, '/'));
    if (!v)
      return std::nullopt;
    return std::string(detail::trim(*v));
  };
  auto num = [&](const char* section, const char* key, double& dst) {
    if (auto v = get(section, key))
      dst = detail::parse_double(*v, std::string("config key '") + section + "." + key + "'");
  };
  auto integer = [&](const char* section, const char* key, auto& dst) {
    if (auto v = get(section, key))
      dst = static_cast<std::remove_reference_t<decltype(dst)>>(
          detail::parse_int(*v, std::string("config key '") + section + "." + key + "'"));
  };
  auto str = [&](const char* section, const char* key, std::string& dst) {
    if (auto v = get(section, key))
      dst = *v;
  };

  if (auto v = get("paths", "output"))
    c.output = resolve(*v);
  if (auto v = get("paths", "mesh"))
    c.mesh = resolve(*v);
  if (auto v = get("paths", "velocity_frames"))
    for (auto tok : detail::split_ws(*v))
      c.velocity_frames.push_back(resolve(std::string(tok)));
  if (auto v = get("paths", "inlet_waveform"))
    c.inlet_waveform = resolve(*v);
  num("paths", "period", c.period);

  str("phantom", "geometry", c.phantom.geometry);
  num("phantom", "radius", c.phantom.radius);
  num("phantom", "length", c.phantom.length);
  integer("phantom", "resolution", c.phantom.resolution);
  num("phantom", "wall_grading", c.phantom.wall_grading);
  num("phantom", "limb_length", c.phantom.limb_length);
  num("phantom", "bend_radius", c.phantom.bend_radius);
  num("phantom", "m0", c.phantom.m0);

  num("rheology", "hct", c.rheology.hct);
  if (auto v = get("rheology", "base_curves"))
    c.rheology.base_curves = resolve(*v);
  num("rheology", "gamma0", c.rheology.gamma0);
  num("rheology", "gamma1", c.rheology.gamma1);
  num("rheology", "shear_rate_floor", c.rheology.shear_rate_floor);

  auto& s = c.sequence;
  num("sequence", "venc", s.venc);
  if (auto v = get("sequence", "matrix")) {
    const auto m = numbers(*v, 3, "sequence.matrix");
    for (size_t i = 0; i < 3; ++i) {
      if (m[i] != std::floor(m[i]))
        fail(ErrorKind::Validation, "config key 'sequence.matrix' needs integers");
      s.matrix[i] = static_cast<int>(m[i]);
    }
  }
  if (auto v = get("sequence", "voxel")) {
    const auto m = numbers(*v, 3, "sequence.voxel");
    std::copy(m.begin(), m.end(), s.voxel.begin());
  }
  integer("sequence", "oversampling", s.oversampling);
  integer("sequence", "cardiac_phases", s.cardiac_phases);
  num("sequence", "time_spacing", s.time_spacing);
  num("sequence", "t2_star", s.t2_star);
  num("sequence", "adc_bandwidth", s.adc_bandwidth);
  num("sequence", "slew_rate", s.slew_rate);
  num("sequence", "max_gradient", s.max_gradient);
  num("sequence", "raster_time", s.raster_time);
  if (auto v = get("sequence", "line_order")) {
    if (*v == "partition_outer")
      s.line_order = LineOrder::PartitionOuter;
    else if (*v == "phase_outer")
      s.line_order = LineOrder::PhaseOuter;
    else
      fail(ErrorKind::Validation, "config key 'sequence.line_order' must be partition_outer or phase_outer");
  }
  integer("sequence", "quadrature_subdivisions", c.quadrature_subdivisions);

  num("noise", "sigma_fraction", c.noise.sigma_fraction);
  if (auto v = get("noise", "seed")) {
    const auto seed = detail::parse_int(*v, "config key 'noise.seed'");
    if (seed < 0)
      fail(ErrorKind::Validation, "config key 'noise.seed' must be non-negative");
    c.noise.seed = static_cast<std::uint64_t>(seed);
  }

  if (auto seg = tree.get_child_optional("segments")) {
    std::map<int, Plane> cuts;
    std::map<int, ExclusionSphere> spheres;
    for (const auto& [key, value] : *seg) {
      const std::string text(detail::trim(value.data()));
      if (key.rfind("cut", 0) == 0) {
        const auto v = numbers(text, 6, "segments." + key);
        cuts[std::stoi(key.substr(3))] = Plane{Vec3(v[0], v[1], v[2]), Vec3(v[3], v[4], v[5])};
      } else {
        const auto v = numbers(text, 4, "segments." + key);
        spheres[std::stoi(key.substr(7))] = ExclusionSphere{Vec3(v[0], v[1], v[2]), v[3]};
      }
    }
    for (auto& [i, p] : cuts)
      c.cuts.push_back(p);
    for (auto& [i, e] : spheres)
      c.exclusions.push_back(e);
  }

  if (auto v = get("comparison", "models")) {
    c.models.clear();
    for (auto tok : detail::split_ws(*v))
      c.models.emplace_back(tok);
  }
  str("comparison", "reference", c.reference_model);
  num("hemodynamics", "deviatoric_coefficient", c.hemo.deviatoric_coefficient);
  num("hemodynamics", "background_threshold", c.background_threshold);

  auto& w = c.windkessel;
  num("windkessel", "rp", w.params.rp);
  num("windkessel", "rd", w.params.rd);
  num("windkessel", "c", w.params.c);
  num("windkessel", "p_d0", w.params.p_d0);
  num("windkessel", "dt", w.dt);
  integer("windkessel", "cycles", w.cycles);
  str("windkessel", "flow_scaling", w.flow_scaling);
  num("windkessel", "flow_scale", w.flow_scale);

  c.source_hash = detail::hex64(detail::fnv1a(text));
  validate(c);
  return c;
}

void validate(const RunConfig& c) {
  auto check = [](bool ok, const std::string& what) {
    if (!ok)
      fail(ErrorKind::Validation, what);
  };
  auto exists = [&](const std::filesystem::path& p, const char* key) {
    if (!p.empty())
      check(std::filesystem::exists(p), std::string("config key '") + key + "': file '" + p.string() + "' not found");
  };
  exists(c.mesh, "paths.mesh");
  for (const auto& f : c.velocity_frames)
    exists(f, "paths.velocity_frames");
  exists(c.inlet_waveform, "paths.inlet_waveform");
  exists(c.rheology.base_curves, "rheology.base_curves");
  check(c.velocity_frames.empty() || !c.mesh.empty(), "paths.velocity_frames requires paths.mesh");
  check(c.period >= 0.0, "paths.period must be non-negative");

  const auto& p = c.phantom;
  check(p.geometry == "pipe" || p.geometry == "ubend", "phantom.geometry must be pipe or ubend");
  check(p.radius > 0.0 && p.length > 0.0 && p.m0 >= 0.0, "phantom radius and length must be positive, m0 non-negative");
  check(p.resolution >= 0 && p.resolution <= 6, "phantom.resolution must be in [0, 6]");
  check(p.wall_grading >= 0.0 && p.wall_grading < 1.0, "phantom.wall_grading must be in [0, 1)");
  if (p.geometry == "ubend")
    check(p.bend_radius > p.radius && p.limb_length >= 0.0 &&
              p.length >= p.limb_length + std::numbers::pi * p.bend_radius,
          "phantom ubend needs bend_radius > radius and length >= limb_length + pi * bend_radius");

  check(c.rheology.hct > 0.0 && c.rheology.hct < 100.0, "rheology.hct must be in (0, 100)");
  check(c.rheology.gamma1 > c.rheology.gamma0 && c.rheology.gamma0 >= 0.0, "rheology needs 0 <= gamma0 < gamma1");
  check(c.rheology.shear_rate_floor > 0.0, "rheology.shear_rate_floor must be positive");

  try {
    c.sequence.validate();
  } catch (const Error& e) {
    fail(ErrorKind::Validation, std::string("sequence: ") + e.what());
  }
  check(c.quadrature_subdivisions >= 0 && c.quadrature_subdivisions <= 3, "sequence.quadrature_subdivisions must be in [0, 3]");
  check(c.noise.sigma_fraction >= 0.0, "noise.sigma_fraction must be non-negative");
  check(c.cuts.size() <= 3, "segments: at most three cut planes");
  for (const auto& cut : c.cuts)
    check(cut.normal.norm() > 0.0, "segments: cut normals must be nonzero");
  for (const auto& e : c.exclusions)
    check(e.radius > 0.0, "segments: exclusion radius must be positive");

  check(c.background_threshold >= 0.0 && c.background_threshold < 1.0,
        "hemodynamics.background_threshold must be in [0, 1)");
  check(!c.models.empty(), "comparison.models is empty");
  const PowerLawParams probe{1e-2, 0.7, 45.0, 1.0, 0.0};
  for (const auto& m : c.models) {
    try {
      resolve_model(m, probe, c.rheology);
    } catch (const Error&) {
      fail(ErrorKind::Validation, "comparison.models: cannot resolve model '" + m + "'");
    }
  }
  check(std::find(c.models.begin(), c.models.end(), c.reference_model) != c.models.end(),
        "comparison.reference must be one of comparison.models");

  try {
    c.windkessel.params.validate();
  } catch (const Error& e) {
    fail(ErrorKind::Validation, std::string("windkessel: ") + e.what());
  }
  check(c.windkessel.dt > 0.0 && c.windkessel.cycles >= 1, "windkessel needs dt > 0 and cycles >= 1");
  check(c.windkessel.flow_scaling == "periodic" || c.windkessel.flow_scaling == "mean" ||
            c.windkessel.flow_scaling == "none",
        "windkessel.flow_scaling must be periodic, mean or none");
}

std::string config_hash(const RunConfig& c) {
  return detail::hex64(detail::fnv1a(c.source_hash + ";seed=" + std::to_string(c.noise.seed)));
}

} // namespace hemoflow
