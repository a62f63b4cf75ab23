#pragma once

#include <random>

#include "volex/mesh.hpp"

namespace volex::test {

// Independent random triangles scattered around the origin.
inline Mesh random_triangle_soup(int faces, std::mt19937_64& rng, double spread = 2.0, double size = 1.5) {
  std::uniform_real_distribution<double> c(-spread, spread), d(-size, size);
  Mesh m;
  for (int f = 0; f < faces; ++f) {
    const Vec3 centre(c(rng), c(rng), c(rng));
    for (int k = 0; k < 3; ++k) m.vertices.push_back(centre + Vec3(d(rng), d(rng), d(rng)));
    m.faces.push_back({3 * f, 3 * f + 1, 3 * f + 2});
  }
  return m;
}

// nx × ny grid of quads (two triangles each) in the plane z = z0, facing +z.
inline Mesh facing_grid(int nx, int ny, double half_w, double half_h, double z0 = 0.0) {
  Mesh m;
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      m.vertices.push_back(Vec3(-half_w + 2 * half_w * i / nx, -half_h + 2 * half_h * j / ny, z0));
  auto id = [&](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      m.faces.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      m.faces.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  return m;
}

}  // namespace volex::test
