// Copyright 2026 The Hemoflow Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef HEMOFLOW_VTK_IO_HPP
#define HEMOFLOW_VTK_IO_HPP

#include "hemoflow/geometry.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace hemoflow::vtk {

inline constexpr int kTriangle = 5;
inline constexpr int kTetra = 10;

struct DataArray {
  std::string type = "double"; // "double", "float" or "int"
  int components = 1;
  std::vector<double> values; // tuple-major
};

/// In-memory image of a VTK legacy ASCII unstructured grid.
struct Dataset {
  std::string title = "hemoflow";
  std::vector<Vec3> points;
  std::vector<std::vector<int>> cells;
  std::vector<int> cell_types;
  std::map<std::string, DataArray> cell_data;
  std::map<std::string, DataArray> point_data; // SCALARS (1-3 comps) and VECTORS (3 comps)
  std::map<std::string, DataArray> field_data;
};

Dataset read(const std::filesystem::path& path);
void write(const std::filesystem::path& path, const Dataset& data);

} // namespace hemoflow::vtk

#endif
