#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "speclab/geometry.hpp"

namespace speclab {

enum class NodeFlag : std::uint8_t { Free, Constrained };
enum class NodeKind : std::uint8_t { Interior, Boundary, Slit };

/// Conforming P1 triangulation. Triangles are counter-clockwise.
struct Mesh {
  DomainSpec spec;
  std::vector<Point> nodes;
  std::vector<std::array<int, 3>> tris;
  std::vector<NodeFlag> flags;
  std::vector<NodeKind> kinds;
  std::vector<double> elementArea;
  double hMax = 0.0;

  std::size_t num_nodes() const { return nodes.size(); }
  std::size_t num_elements() const { return tris.size(); }
  std::size_t num_free() const;
  Point centroid(std::size_t e) const;
  double total_area() const;
};

/// Constrained tensor-grid triangulation: every rectangle corner and slit
/// endpoint coordinate is a grid line, each interval is split into equal
/// pieces no longer than hTarget, adjacent piece lengths differ by at most a
/// factor 4, and every grid cell inside the union is cut into two right
/// triangles. Throws ResolutionError when hTarget exceeds a quarter of the
/// smallest feature.
Mesh triangulate(const DomainSpec& spec, double hTarget);

/// Uniform quadrisection of every triangle.
Mesh refine(const Mesh& mesh);

/// Throws GeometryError when the free nodes do not form one connected
/// component of the edge graph.
void check_free_connectivity(const Mesh& mesh);

/// Legacy ASCII VTK unstructured grid with node flags and optional fields.
void write_vtk(const Mesh& mesh, std::ostream& os,
               const std::vector<std::pair<std::string, std::vector<double>>>& pointFields = {});

/// Grid-line coordinates of a mesh built by triangulate() (sorted unique).
std::vector<double> grid_lines_x(const Mesh& mesh);
std::vector<double> grid_lines_y(const Mesh& mesh);

}  // namespace speclab
