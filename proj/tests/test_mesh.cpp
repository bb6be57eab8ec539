#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "edghdg/errors.hpp"
#include "edghdg/mesh.hpp"

using namespace edghdg;

namespace {

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
  const auto dir = std::filesystem::path("mesh_test_tmp");
  std::filesystem::create_directories(dir);
  const auto path = dir / name;
  std::ofstream out(path);
  out << content;
  return path;
}

}  // namespace

TEST_CASE("coarsest structured mesh has the expected counts and measures") {
  const Mesh mesh = generate_mesh(2);
  CHECK(mesh.vertices.size() == 9);
  CHECK(mesh.cells.size() == 8);
  CHECK(mesh.facets.size() == 16);
  CHECK(mesh.n_cells(Region::Stokes) == 4);
  CHECK(mesh.n_cells(Region::Darcy) == 4);
  CHECK(mesh.n_facets(FacetClass::Interface) == 2);
  for (const Cell& c : mesh.cells) {
    CHECK(c.area == doctest::Approx(0.125).epsilon(1e-14));
    CHECK(c.h == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-14));
  }
  double area_s = 0.0, area_d = 0.0;
  for (const Cell& c : mesh.cells) (c.region == Region::Stokes ? area_s : area_d) += c.area;
  CHECK(area_s == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(area_d == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("interface facets are owned by the free-flow side, normal downward") {
  const Mesh mesh = generate_mesh(4);
  int count = 0;
  for (const Facet& f : mesh.facets) {
    if (f.cls != FacetClass::Interface) continue;
    ++count;
    REQUIRE(f.owner >= 0);
    REQUIRE(f.neighbor >= 0);
    CHECK(mesh.cells[f.owner].region == Region::Stokes);
    CHECK(mesh.cells[f.neighbor].region == Region::Darcy);
    CHECK(f.normal.x == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(f.normal.y == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(mesh.vertices[f.v0].y == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(mesh.vertices[f.v1].y == doctest::Approx(0.5).epsilon(1e-14));
  }
  CHECK(count == 4);
}

TEST_CASE("facet geometry invariants hold on a perturbed mesh") {
  const Mesh mesh = generate_mesh(6, true, 42u);
  for (std::size_t fi = 0; fi < mesh.facets.size(); ++fi) {
    const Facet& f = mesh.facets[fi];
    CHECK(f.v0 < f.v1);
    CHECK(norm(f.normal) == doctest::Approx(1.0).epsilon(1e-13));
    const Vec2 edge = mesh.vertices[f.v1] - mesh.vertices[f.v0];
    CHECK(f.length == doctest::Approx(norm(edge)).epsilon(1e-13));
    CHECK(std::abs(dot(edge, f.normal)) <= 1e-12 * f.length);
    // Stored normal must leave the owner cell.
    const Vec2 mid = 0.5 * (mesh.vertices[f.v0] + mesh.vertices[f.v1]);
    const Vec2 to_centroid = mesh.centroid(f.owner) - mid;
    CHECK(dot(to_centroid, f.normal) < 0.0);
    if (f.neighbor >= 0) {
      CHECK(dot(mesh.centroid(f.neighbor) - mid, f.normal) > 0.0);
      CHECK(mesh.outward_sign(f.neighbor, static_cast<int>(fi)) == -1.0);
    }
    CHECK(mesh.outward_sign(f.owner, static_cast<int>(fi)) == 1.0);
  }
  // Local edge i faces vertex i.
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    for (int e = 0; e < 3; ++e) {
      const Facet& f = mesh.facets[mesh.cell_facets[c][e]];
      const int opposite = mesh.cells[c].v[e];
      CHECK(f.v0 != opposite);
      CHECK(f.v1 != opposite);
    }
  }
}

TEST_CASE("collapsed and heterogeneous boundary labels") {
  Mesh mesh = generate_mesh(2);
  CHECK(mesh.n_facets(FacetClass::GammaS) == 4);
  CHECK(mesh.n_facets(FacetClass::GammaD) == 4);

  classify_facets(mesh, BoundarySplit::HeterogeneousCase);
  CHECK(mesh.n_facets(FacetClass::GammaS1) == 1);
  CHECK(mesh.n_facets(FacetClass::GammaS2) == 1);
  CHECK(mesh.n_facets(FacetClass::GammaS3) == 2);
  CHECK(mesh.n_facets(FacetClass::GammaD1) == 2);
  CHECK(mesh.n_facets(FacetClass::GammaD2) == 2);
  CHECK(mesh.n_facets(FacetClass::GammaS) == 0);
  CHECK(mesh.n_facets(FacetClass::GammaD) == 0);

  classify_facets(mesh, BoundarySplit::Collapsed);
  CHECK(mesh.n_facets(FacetClass::GammaS) == 4);
  CHECK(mesh.n_facets(FacetClass::GammaD) == 4);
}

TEST_CASE("perturbation is deterministic and keeps the protected vertices") {
  const Mesh base = generate_mesh(8);
  const Mesh a = generate_mesh(8, true, 3u);
  const Mesh b = generate_mesh(8, true, 3u);
  const Mesh c = generate_mesh(8, true, 4u);

  REQUIRE(a.vertices.size() == base.vertices.size());
  bool identical_ab = true, identical_ac = true;
  bool moved_any = false;
  for (std::size_t i = 0; i < a.vertices.size(); ++i) {
    identical_ab &= (a.vertices[i].x == b.vertices[i].x && a.vertices[i].y == b.vertices[i].y);
    identical_ac &= (a.vertices[i].x == c.vertices[i].x && a.vertices[i].y == c.vertices[i].y);
    const double dx = a.vertices[i].x - base.vertices[i].x;
    const double dy = a.vertices[i].y - base.vertices[i].y;
    CHECK(std::abs(dx) <= 0.2 / 8 + 1e-15);
    CHECK(std::abs(dy) <= 0.2 / 8 + 1e-15);
    if (dx != 0.0 || dy != 0.0) moved_any = true;
    const bool on_boundary = base.vertices[i].x == 0.0 || base.vertices[i].x == 1.0 ||
                             base.vertices[i].y == 0.0 || base.vertices[i].y == 1.0;
    if (on_boundary || base.vertices[i].y == 0.5) {
      CHECK(a.vertices[i].x == base.vertices[i].x);
      CHECK(a.vertices[i].y == base.vertices[i].y);
    }
  }
  CHECK(identical_ab);
  CHECK_FALSE(identical_ac);
  CHECK(moved_any);
  validate(a);
}

TEST_CASE("mesh parameter validation") {
  CHECK_THROWS_AS(generate_mesh(3), InputError);
  CHECK_THROWS_AS(generate_mesh(0), InputError);
  CHECK_THROWS_AS(generate_mesh(-2), InputError);
}

TEST_CASE("write/read roundtrip preserves the mesh exactly") {
  const Mesh mesh = generate_mesh(4, true, 11u);
  const auto path = temp_file("roundtrip.txt", "");
  write_mesh(mesh, path.string());
  const Mesh back = read_mesh(path.string());
  REQUIRE(back.vertices.size() == mesh.vertices.size());
  REQUIRE(back.cells.size() == mesh.cells.size());
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    CHECK(back.vertices[i].x == mesh.vertices[i].x);
    CHECK(back.vertices[i].y == mesh.vertices[i].y);
  }
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    CHECK(back.cells[c].v == mesh.cells[c].v);
    CHECK(back.cells[c].region == mesh.cells[c].region);
  }
  CHECK(back.facets.size() == mesh.facets.size());
}

TEST_CASE("header variants and malformed files") {
  const std::string vertices_block =
      "0 0\n1 0\n0 1\n1 1\n0 0.5\n1 0.5\n";
  // Two squares stacked: porous below, free flow above.
  const std::string cells_block =
      "0 1 5 d\n0 5 4 d\n4 5 3 s\n4 3 2 s\n";

  SUBCASE("slash-separated header is tolerated") {
    const auto path = temp_file("slash.txt",
                                "vertices 6 / cells 4\n" + vertices_block + cells_block);
    const Mesh mesh = read_mesh(path.string());
    CHECK(mesh.cells.size() == 4);
    CHECK(mesh.n_facets(FacetClass::Interface) == 1);
  }
  SUBCASE("wrong keyword") {
    const auto path = temp_file("badkw.txt", "points 6 cells 4\n" + vertices_block + cells_block);
    CHECK_THROWS_WITH_AS(read_mesh(path.string()),
                         doctest::Contains("expected header"), InputError);
  }
  SUBCASE("bad region tag") {
    const auto path = temp_file("badtag.txt",
                                "vertices 6 cells 4\n" + vertices_block +
                                    "0 1 5 q\n0 5 4 d\n4 5 3 s\n4 3 2 s\n");
    CHECK_THROWS_WITH_AS(read_mesh(path.string()), doctest::Contains("region s or d"),
                         InputError);
  }
  SUBCASE("vertex index out of range") {
    const auto path = temp_file("badidx.txt",
                                "vertices 6 cells 4\n" + vertices_block +
                                    "0 1 9 d\n0 5 4 d\n4 5 3 s\n4 3 2 s\n");
    CHECK_THROWS_WITH_AS(read_mesh(path.string()), doctest::Contains("references vertex"),
                         InputError);
  }
  SUBCASE("clockwise cell") {
    const auto path = temp_file("cw.txt",
                                "vertices 6 cells 4\n" + vertices_block +
                                    "0 5 1 d\n0 5 4 d\n4 5 3 s\n4 3 2 s\n");
    CHECK_THROWS_WITH_AS(read_mesh(path.string()),
                         doctest::Contains("not counterclockwise"), InputError);
  }
  SUBCASE("truncated file") {
    const auto path = temp_file("short.txt", "vertices 6 cells 4\n0 0\n1 0\n");
    CHECK_THROWS_WITH_AS(read_mesh(path.string()),
                         doctest::Contains("unexpected end of file"), InputError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_WITH_AS(read_mesh("mesh_test_tmp/nope.txt"),
                         doctest::Contains("cannot open"), InputError);
  }
}

TEST_CASE("geometric validation catches region violations") {
  SUBCASE("cell crossing the midline") {
    const auto path = temp_file("cross.txt",
                                "vertices 4 cells 2\n0 0\n1 0\n1 1\n0 1\n"
                                "0 1 2 s\n0 2 3 s\n");
    CHECK_THROWS_WITH_AS(read_mesh(path.string()), doctest::Contains("crosses the interface"),
                         InputError);
  }
  SUBCASE("duplicated cell") {
    const auto path = temp_file("dup.txt",
                                "vertices 6 cells 4\n0 0\n1 0\n0 1\n1 1\n0 0.5\n1 0.5\n"
                                "0 1 5 d\n0 1 5 d\n4 5 3 s\n4 3 2 s\n");
    CHECK_THROWS_AS(read_mesh(path.string()), InputError);
  }
}
