// Output files: CSV tables with the resolved config embedded as comment lines,
// VTU snapshots of the two subtriangulations, and coordinate matrix export.
#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cutfsi/analysis.hpp"
#include "cutfsi/config.hpp"
#include "cutfsi/sparse.hpp"
#include "cutfsi/timestepper.hpp"

namespace cutfsi {

inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.8e", v);
  return buf;
}

/// "# key = value" lines for every config key, then any extra metadata.
inline void write_config_comment(std::ostream& os, const SimulationConfig& cfg,
                                 const std::vector<std::pair<std::string, std::string>>& extra = {}) {
  for (const auto& [k, v] : config_entries(cfg)) os << "# " << k << " = " << v << '\n';
  for (const auto& [k, v] : extra) os << "# " << k << " = " << v << '\n';
}

/// Comma-separated table: embedded config, header row, %.8e numbers.
class CsvWriter {
 public:
  CsvWriter(std::ostream& os, std::vector<std::string> columns) : os_(&os), columns_(std::move(columns)) {}

  void header() {
    for (std::size_t i = 0; i < columns_.size(); ++i) *os_ << (i ? "," : "") << columns_[i];
    *os_ << '\n';
  }

  void row(std::span<const double> values) {
    if (values.size() != columns_.size()) throw std::invalid_argument("CsvWriter: row width mismatch");
    for (std::size_t i = 0; i < values.size(); ++i) *os_ << (i ? "," : "") << format_number(values[i]);
    *os_ << '\n';
  }

 private:
  std::ostream* os_;
  std::vector<std::string> columns_;
};

inline const std::vector<std::string>& step_log_columns() {
  static const std::vector<std::string> cols{"n", "t", "solve_residual", "constraint_residual", "E_T2", "E_g2",
                                             "triple2", "trace2", "g_vf", "g_p", "g_vs", "g_u"};
  return cols;
}

inline std::vector<double> step_log_row(const StepRecord& r, const EnergySnapshot& e) {
  return {static_cast<double>(r.n), r.t, r.solve_residual, r.constraint_residual, e.E_T2, e.E_g2,
          e.triple2, e.trace2, e.g_vf, e.g_p, e.g_vs, e.g_u};
}

/// Rows of h (or k), five errors and the orders against the previous row
/// (empty on the first row).
inline void write_error_report(std::ostream& os, const ErrorReport& report, const SimulationConfig& cfg,
                               const std::vector<std::pair<std::string, std::string>>& extra = {}) {
  auto meta = extra;
  meta.emplace_back("mode", report.mode);
  meta.emplace_back("error_evaluation", "reference quadrature points, coarse field evaluated in the parent cell");
  write_config_comment(os, cfg, meta);
  os << "h_or_k";
  for (int c = 0; c < 5; ++c) os << ",err" << c + 1;
  for (int c = 0; c < 5; ++c) os << ",ord" << c + 1;
  os << '\n';
  const auto orders = report.orders();
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const ErrorRow& r = report.rows[i];
    os << format_number(report.mode == "time" ? r.k : r.h);
    for (double e : r.errors) os << ',' << format_number(e);
    for (int c = 0; c < 5; ++c) os << ',' << (i == 0 ? std::string() : format_number(orders[i - 1][c]));
    os << '\n';
  }
}

inline void write_matrix(const std::filesystem::path& path, const SparseMatrix& a) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string());
  export_coordinate(a, os);
}

namespace detail {

inline void vtu_array(std::ostream& os, const char* type, const std::string& name, int ncomp,
                      const std::vector<double>& data) {
  os << "        <DataArray type=\"" << type << "\" Name=\"" << name << "\" NumberOfComponents=\"" << ncomp
     << "\" format=\"ascii\">\n         ";
  char buf[32];
  for (double v : data) {
    std::snprintf(buf, sizeof buf, " %.8e", v);
    os << buf;
  }
  os << "\n        </DataArray>\n";
}

}  // namespace detail

/// One side's subtriangulation as an unstructured grid of quads. Point data
/// holds every field of that side evaluated at the cell corners; cell data
/// holds the cell class (0 fluid only, 1 solid only, 2 cut) and kappa.
inline void write_vtu(std::ostream& os, const Discretization& disc, std::span<const double> U, Side side) {
  const Mesh& mesh = disc.mesh();
  const CutTopology& topo = disc.topology();
  const int nv = mesh.cells_per_side() + 1;
  std::vector<int> cells;
  std::map<int, int> point_id;
  std::vector<int> point_cell;
  for (int c = 0; c < mesh.num_cells(); ++c) {
    if (!topo.in_side(c, side)) continue;
    cells.push_back(c);
    const auto [i, j] = mesh.cell_ij(c);
    for (int v : {j * nv + i, j * nv + i + 1, (j + 1) * nv + i + 1, (j + 1) * nv + i}) {
      if (point_id.emplace(v, static_cast<int>(point_cell.size())).second) point_cell.push_back(c);
    }
  }
  std::vector<int> vertex_of(point_cell.size());
  for (const auto& [v, id] : point_id) vertex_of[id] = v;

  const std::vector<FieldRole> roles = side == Side::Fluid
                                           ? std::vector<FieldRole>{FieldRole::FluidVelocity, FieldRole::Pressure}
                                           : std::vector<FieldRole>{FieldRole::SolidVelocity, FieldRole::Displacement};
  os << "<?xml version=\"1.0\"?>\n<VTKFile type=\"UnstructuredGrid\" version=\"0.1\" byte_order=\"LittleEndian\">\n"
     << "  <UnstructuredGrid>\n    <Piece NumberOfPoints=\"" << point_cell.size() << "\" NumberOfCells=\"" << cells.size()
     << "\">\n";
  os << "      <PointData>\n";
  for (FieldRole r : roles) {
    const DofMap& d = disc.dofs(r);
    const auto x = disc.block(U, r);
    std::vector<double> data;
    for (std::size_t p = 0; p < point_cell.size(); ++p) {
      const FieldSample s = sample_field(mesh, d, x, point_cell[p], mesh.vertex(vertex_of[p]), 0);
      if (d.components() == 2) {
        data.insert(data.end(), {s.value[0], s.value[1], 0.0});
      } else {
        data.push_back(s.value[0]);
      }
    }
    detail::vtu_array(os, "Float64", to_string(r), d.components() == 2 ? 3 : 1, data);
  }
  os << "      </PointData>\n      <CellData>\n";
  std::vector<double> cls, kap;
  for (int c : cells) {
    cls.push_back(static_cast<double>(topo.cell_class(c)));
    kap.push_back(topo.kappa(c, side));
  }
  detail::vtu_array(os, "Float64", "class", 1, cls);
  detail::vtu_array(os, "Float64", "kappa", 1, kap);
  os << "      </CellData>\n      <Points>\n";
  std::vector<double> pts;
  for (int v : vertex_of) {
    const Vec2 x = mesh.vertex(v);
    pts.insert(pts.end(), {x.x, x.y, 0.0});
  }
  detail::vtu_array(os, "Float64", "coordinates", 3, pts);
  os << "      </Points>\n      <Cells>\n        <DataArray type=\"Int32\" Name=\"connectivity\" format=\"ascii\">\n         ";
  for (int c : cells) {
    const auto [i, j] = mesh.cell_ij(c);
    for (int v : {j * nv + i, j * nv + i + 1, (j + 1) * nv + i + 1, (j + 1) * nv + i}) os << ' ' << point_id.at(v);
  }
  os << "\n        </DataArray>\n        <DataArray type=\"Int32\" Name=\"offsets\" format=\"ascii\">\n         ";
  for (std::size_t c = 0; c < cells.size(); ++c) os << ' ' << 4 * (c + 1);
  os << "\n        </DataArray>\n        <DataArray type=\"UInt8\" Name=\"types\" format=\"ascii\">\n         ";
  for (std::size_t c = 0; c < cells.size(); ++c) os << " 9";
  os << "\n        </DataArray>\n      </Cells>\n    </Piece>\n  </UnstructuredGrid>\n</VTKFile>\n";
}

/// Writes <stem>_fluid_<n>.vtu and <stem>_solid_<n>.vtu into `dir`.
inline void write_snapshot(const std::filesystem::path& dir, const std::string& stem, const Discretization& disc,
                           const State& s) {
  for (Side side : {Side::Fluid, Side::Solid}) {
    char name[64];
    std::snprintf(name, sizeof name, "_%s_%04d.vtu", side == Side::Fluid ? "fluid" : "solid", s.n);
    const auto path = dir / (stem + name);
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path.string());
    write_vtu(os, disc, s.U, side);
  }
}

}  // namespace cutfsi
