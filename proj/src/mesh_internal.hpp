// Copyright 2026 The Hemoflow Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef HEMOFLOW_SRC_MESH_INTERNAL_HPP
#define HEMOFLOW_SRC_MESH_INTERNAL_HPP

#include "hemoflow/mesh.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <unordered_map>

namespace hemoflow::detail {

using FaceKey = std::array<int, 3>;

inline FaceKey sorted_face(int a, int b, int c) {
  FaceKey k{a, b, c};
  std::sort(k.begin(), k.end());
  return k;
}

struct FaceKeyHash {
  size_t operator()(const FaceKey& k) const noexcept {
    size_t h = std::hash<int>{}(k[0]);
    h = h * 1000003u ^ std::hash<int>{}(k[1]);
    h = h * 1000003u ^ std::hash<int>{}(k[2]);
    return h;
  }
};

struct FaceInfo {
  int tet = -1;
  int opposite = -1; // vertex of `tet` not on the face
  int count = 0;
};

using FaceMap = std::unordered_map<FaceKey, FaceInfo, FaceKeyHash>;

FaceMap build_face_map(const TetMesh& mesh);

} // namespace hemoflow::detail

#endif
