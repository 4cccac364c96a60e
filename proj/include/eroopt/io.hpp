// Mesh and field I/O: Gmsh ASCII v2.2 reader (2-node lines + 3-node
// triangles), VTK legacy ASCII writer, CSV helpers.
#pragma once

#include "eroopt/mesh.hpp"

#include <map>
#include <string>
#include <vector>

namespace eroopt {

struct GmshBoundarySpec {
    BoundaryRole role = BoundaryRole::Wall;
    bool deformable = false;
};

// Maps Gmsh physical-group ids of line elements to boundary roles. When the
// file carries $PhysicalNames, groups named "inflow", "outflow", "wall" and
// "wall_deformable" (case-insensitive) are recognized automatically; entries
// in `roles` override names.
Mesh load_gmsh(const std::string& path,
               const std::map<int, GmshBoundarySpec>& roles = {});

// Point-data fields attached to a VTK output; vector fields are interleaved
// 2*n arrays and get a zero third component.
struct VtkField {
    std::string name;
    bool is_vector = false;
    const std::vector<double>* data = nullptr;
};

void write_vtk(const std::string& path, const Mesh& mesh,
               const std::vector<VtkField>& fields = {});

// CSV with a `# schema: <name> v<version>` first line, then a header row.
void write_csv(const std::string& path, const std::string& schema,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows);

} // namespace eroopt
