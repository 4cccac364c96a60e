#include "eroopt/io.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace eroopt {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

} // namespace

Mesh load_gmsh(const std::string& path,
               const std::map<int, GmshBoundarySpec>& roles) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_gmsh: cannot open " + path);

    Mesh mesh;
    std::map<int, GmshBoundarySpec> role_map = roles;
    std::map<int, int> node_id_to_index;
    std::string line;

    while (std::getline(in, line)) {
        if (line.rfind("$MeshFormat", 0) == 0) {
            std::getline(in, line);
            std::istringstream ss(line);
            double version = 0.0;
            int file_type = -1, data_size = 0;
            ss >> version >> file_type >> data_size;
            if (!(version >= 2.0 && version < 3.0) || file_type != 0)
                throw std::runtime_error(
                    "load_gmsh: only ASCII msh format 2.x is supported");
        } else if (line.rfind("$PhysicalNames", 0) == 0) {
            std::getline(in, line);
            const int n = std::stoi(line);
            for (int i = 0; i < n; ++i) {
                std::getline(in, line);
                std::istringstream ss(line);
                int dim = 0, id = 0;
                std::string name;
                ss >> dim >> id >> name;
                if (dim != 1 || role_map.count(id)) continue;
                // strip quotes
                name.erase(std::remove(name.begin(), name.end(), '"'), name.end());
                const std::string lname = lower(name);
                GmshBoundarySpec spec;
                if (lname == "inflow" || lname == "inlet")
                    spec.role = BoundaryRole::Inflow;
                else if (lname == "outflow" || lname == "outlet")
                    spec.role = BoundaryRole::Outflow;
                else if (lname == "wall_deformable" || lname == "design") {
                    spec.role = BoundaryRole::Wall;
                    spec.deformable = true;
                } else if (lname == "wall")
                    spec.role = BoundaryRole::Wall;
                else
                    continue;
                role_map[id] = spec;
            }
        } else if (line.rfind("$Nodes", 0) == 0) {
            std::getline(in, line);
            const int n = std::stoi(line);
            mesh.X.reserve(n);
            for (int i = 0; i < n; ++i) {
                std::getline(in, line);
                std::istringstream ss(line);
                int id;
                double x, y, z;
                ss >> id >> x >> y >> z;
                node_id_to_index[id] = static_cast<int>(mesh.X.size());
                mesh.X.emplace_back(x, y);
            }
        } else if (line.rfind("$Elements", 0) == 0) {
            std::getline(in, line);
            const int n = std::stoi(line);
            for (int i = 0; i < n; ++i) {
                std::getline(in, line);
                std::istringstream ss(line);
                int id, type, ntags;
                ss >> id >> type >> ntags;
                int physical = 0;
                for (int t = 0; t < ntags; ++t) {
                    int tag;
                    ss >> tag;
                    if (t == 0) physical = tag;
                }
                if (type == 1) {  // 2-node line -> boundary facet
                    int a, b;
                    ss >> a >> b;
                    auto it = role_map.find(physical);
                    if (it == role_map.end())
                        throw std::runtime_error(
                            "load_gmsh: line element with unmapped physical id " +
                            std::to_string(physical));
                    BoundaryFacet f;
                    f.v[0] = node_id_to_index.at(a);
                    f.v[1] = node_id_to_index.at(b);
                    f.role = it->second.role;
                    f.deformable = it->second.deformable;
                    mesh.facets.push_back(f);
                } else if (type == 2) {  // 3-node triangle
                    int a, b, c;
                    ss >> a >> b >> c;
                    mesh.cells.push_back({node_id_to_index.at(a),
                                          node_id_to_index.at(b),
                                          node_id_to_index.at(c)});
                } else {
                    throw std::runtime_error(
                        "load_gmsh: unsupported element type " + std::to_string(type));
                }
            }
        }
        // other sections are skipped line-by-line by the outer loop
    }
    if (mesh.cells.empty())
        throw std::runtime_error("load_gmsh: no triangles found in " + path);
    mesh.finalize();
    return mesh;
}

void write_vtk(const std::string& path, const Mesh& mesh,
               const std::vector<VtkField>& fields) {
    FILE* fp = std::fopen(path.c_str(), "w");
    if (!fp) throw std::runtime_error("write_vtk: cannot open " + path);
    std::fprintf(fp, "# vtk DataFile Version 3.0\n");
    std::fprintf(fp, "eroopt output\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    std::fprintf(fp, "POINTS %d double\n", mesh.n_vertices());
    for (const auto& p : mesh.X)
        std::fprintf(fp, "%.17g %.17g 0\n", p.x, p.y);
    std::fprintf(fp, "CELLS %d %d\n", mesh.n_cells(), 4 * mesh.n_cells());
    for (const auto& c : mesh.cells)
        std::fprintf(fp, "3 %d %d %d\n", c[0], c[1], c[2]);
    std::fprintf(fp, "CELL_TYPES %d\n", mesh.n_cells());
    for (int c = 0; c < mesh.n_cells(); ++c) std::fprintf(fp, "5\n");
    if (!fields.empty()) {
        std::fprintf(fp, "POINT_DATA %d\n", mesh.n_vertices());
        for (const auto& f : fields) {
            if (!f.data) continue;
            if (f.is_vector) {
                std::fprintf(fp, "VECTORS %s double\n", f.name.c_str());
                for (int v = 0; v < mesh.n_vertices(); ++v)
                    std::fprintf(fp, "%.17g %.17g 0\n", (*f.data)[2 * v],
                                 (*f.data)[2 * v + 1]);
            } else {
                std::fprintf(fp, "SCALARS %s double 1\nLOOKUP_TABLE default\n",
                             f.name.c_str());
                for (int v = 0; v < mesh.n_vertices(); ++v)
                    std::fprintf(fp, "%.17g\n", (*f.data)[v]);
            }
        }
    }
    std::fclose(fp);
}

void write_csv(const std::string& path, const std::string& schema,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows) {
    FILE* fp = std::fopen(path.c_str(), "w");
    if (!fp) throw std::runtime_error("write_csv: cannot open " + path);
    std::fprintf(fp, "# schema: %s\n", schema.c_str());
    for (size_t i = 0; i < columns.size(); ++i)
        std::fprintf(fp, "%s%s", columns[i].c_str(),
                     i + 1 < columns.size() ? "," : "\n");
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i)
            std::fprintf(fp, "%.12g%s", row[i], i + 1 < row.size() ? "," : "\n");
    }
    std::fclose(fp);
}

} // namespace eroopt
