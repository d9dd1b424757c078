#include <algorithm>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include <gtest/gtest.h>

#include "cutfsi/io.hpp"

using namespace cutfsi;

namespace {

SimulationConfig small() {
  SimulationConfig c;
  c.final_time = 2.0;
  return c;
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST(Csv, NumberFormat) {
  EXPECT_EQ(format_number(1.0), "1.00000000e+00");
  EXPECT_EQ(format_number(-0.000123456789), "-1.23456789e-04");
}

TEST(Csv, EmbedsConfigAndHeader) {
  std::ostringstream os;
  write_config_comment(os, small(), {{"note", "x"}});
  CsvWriter w(os, {"a", "b"});
  w.header();
  w.row(std::vector<double>{1.0, 2.5});
  EXPECT_THROW(w.row(std::vector<double>{1.0}), std::invalid_argument);
  const auto ls = lines(os.str());
  const auto entries = config_entries(small());
  ASSERT_EQ(ls.size(), entries.size() + 3);
  for (std::size_t i = 0; i < entries.size(); ++i) EXPECT_EQ(ls[i], "# " + entries[i].first + " = " + entries[i].second);
  EXPECT_EQ(ls[entries.size()], "# note = x");
  EXPECT_EQ(ls[entries.size() + 1], "a,b");
  EXPECT_EQ(ls[entries.size() + 2], "1.00000000e+00,2.50000000e+00");
  // The embedded block parses back to the same config.
  std::string cfg_text;
  for (std::size_t i = 0; i < entries.size(); ++i) cfg_text += ls[i].substr(2) + "\n";
  EXPECT_EQ(to_config_text(parse_config_text(cfg_text)), to_config_text(small()));
}

TEST(ErrorReportCsv, Layout) {
  ErrorReport r;
  r.mode = "space";
  r.rows.push_back({0.25, 1.0, {4.0, 4.0, 4.0, 4.0, 4.0}});
  r.rows.push_back({0.125, 1.0, {1.0, 2.0, 4.0, 0.5, 1.0}});
  std::ostringstream os;
  write_error_report(os, r, small());
  std::vector<std::string> data;
  for (const auto& l : lines(os.str())) {
    if (l[0] != '#') data.push_back(l);
  }
  ASSERT_EQ(data.size(), 3u);
  EXPECT_EQ(data[0], "h_or_k,err1,err2,err3,err4,err5,ord1,ord2,ord3,ord4,ord5");
  EXPECT_EQ(data[1].substr(0, 15), "2.50000000e-01,");
  EXPECT_NE(data[1].find(",,,,"), std::string::npos);
  EXPECT_NE(data[2].find(",2.00000000e+00,1.00000000e+00,0.00000000e+00,3.00000000e+00,2.00000000e+00"), std::string::npos);
}

TEST(Vtu, StructureAndZeroFields) {
  const Discretization d(small());
  const State s = initialize(d);
  for (Side side : {Side::Fluid, Side::Solid}) {
    std::ostringstream os;
    write_vtu(os, d, s.U, side);
    const std::string x = os.str();
    const int cells = d.topology().count_side(side);
    EXPECT_NE(x.find("NumberOfCells=\"" + std::to_string(cells) + "\""), std::string::npos);
    EXPECT_NE(x.find("Name=\"class\""), std::string::npos);
    EXPECT_NE(x.find("Name=\"kappa\""), std::string::npos);
    const char* f0 = side == Side::Fluid ? "v_f" : "v_s";
    const char* f1 = side == Side::Fluid ? "p" : "u";
    EXPECT_NE(x.find(std::string("Name=\"") + f0 + "\" NumberOfComponents=\"3\""), std::string::npos);
    EXPECT_NE(x.find(std::string("Name=\"") + f1 + "\""), std::string::npos);
    std::smatch m;
    ASSERT_TRUE(std::regex_search(x, m, std::regex("Name=\"types\" format=\"ascii\">\\s*([ 9]*)")));
    const std::string types = m[1].str();
    EXPECT_EQ(static_cast<int>(std::count(types.begin(), types.end(), '9')), cells);
    // Zero state: the first point-data array is all zeros.
    ASSERT_TRUE(std::regex_search(x, m, std::regex(std::string("Name=\"") + f0 + "\"[^>]*>\\s*([^<]*)<")));
    std::istringstream vals(m[1].str());
    for (double v; vals >> v;) EXPECT_EQ(v, 0.0);
  }
}

TEST(Vtu, SnapshotFilesAndVelocityValues) {
  const Discretization d(small());
  const RunResult r = run(d);
  const auto dir = std::filesystem::temp_directory_path() / "cutfsi_io_test";
  std::filesystem::create_directories(dir);
  write_snapshot(dir, "s", d, r.final_state);
  EXPECT_TRUE(std::filesystem::exists(dir / "s_fluid_0002.vtu"));
  EXPECT_TRUE(std::filesystem::exists(dir / "s_solid_0002.vtu"));
  std::ifstream in(dir / "s_fluid_0002.vtu");
  const std::string x((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  EXPECT_NE(x.find("2.00000000e-01"), std::string::npos);  // lid plateau at t = 2
  std::filesystem::remove_all(dir);
}

TEST(MatrixExport, RoundTrip) {
  const Discretization d(small());
  const SparseMatrix a = assemble_mass(d);
  const auto path = std::filesystem::temp_directory_path() / "cutfsi_matrix.txt";
  write_matrix(path, a);
  std::ifstream in(path);
  TripletList t(a.rows(), a.cols());
  int i, j;
  double v;
  std::size_t count = 0;
  while (in >> i >> j >> v) {
    t.add(i, j, v);
    ++count;
  }
  EXPECT_EQ(count, a.nonzeros());
  const SparseMatrix b = t.compress();
  EXPECT_EQ(b.col_idx(), a.col_idx());
  EXPECT_EQ(b.values(), a.values());
  std::filesystem::remove(path);
}

TEST(StepLog, RerunIsByteIdentical) {
  auto produce = [] {
    const Discretization d(small());
    const EnergyEvaluator ev(d);
    std::ostringstream os;
    write_config_comment(os, small());
    CsvWriter w(os, step_log_columns());
    w.header();
    run(d, {}, [&](const State& s, const StepRecord& rec) { w.row(step_log_row(rec, ev.energy(s.U))); });
    return os.str();
  };
  const std::string a = produce();
  EXPECT_EQ(a, produce());
  EXPECT_EQ(lines(a).size(), config_entries(small()).size() + 1 + 2);
}
