#include "sulab/io.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>

#include <json.hpp>

#include "sulab/error.hpp"

namespace sulab {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

namespace {

struct BinHeader {
  char magic[4];
  int32_t version;
  int32_t kind;  // 0 torus, 1 polar
  int32_t K;
  int32_t d0;  // torus n, polar n_r
  int32_t d1;  // torus n, polar n_theta
};

}  // namespace

void save_field(const MapField& f, const std::string& path_base) {
  BinHeader h{};
  std::memcpy(h.magic, "SULB", 4);
  h.version = 1;
  h.kind = f.grid_kind == GridKind::Torus ? 0 : 1;
  h.K = f.K;
  if (f.grid_kind == GridKind::Torus) {
    h.d0 = f.torus.n;
    h.d1 = f.torus.n;
  } else {
    h.d0 = f.polar.n_r;
    h.d1 = f.polar.n_theta;
  }
  std::ofstream bin(path_base + ".bin", std::ios::binary);
  if (!bin) throw Error("cannot write " + path_base + ".bin");
  bin.write(reinterpret_cast<const char*>(&h), sizeof(h));
  bin.write(reinterpret_cast<const char*>(f.values.data()),
            static_cast<std::streamsize>(f.values.size() * sizeof(double)));
  if (!bin) throw Error("short write on " + path_base + ".bin");

  nlohmann::json j;
  j["kind"] = f.grid_kind == GridKind::Torus ? "torus" : "polar";
  j["K"] = f.K;
  j["constraint_tol"] = f.constraint_tol;
  if (f.grid_kind == GridKind::Torus) {
    j["n"] = f.torus.n;
    j["side"] = f.torus.side;
    j["bc"] = "periodic";
  } else {
    j["n_r"] = f.polar.n_r;
    j["n_theta"] = f.polar.n_theta;
    j["center"] = {f.polar.center[0], f.polar.center[1]};
    j["r_min"] = f.polar.r_min;
    j["r_max"] = f.polar.r_max;
    j["bc"] = f.bc == BoundaryKind::DirichletRing ? "dirichlet_ring" : "periodic";
    j["fix_inner"] = f.fix_inner;
    j["fix_outer"] = f.fix_outer;
  }
  std::ofstream side(path_base + ".json");
  if (!side) throw Error("cannot write " + path_base + ".json");
  side << j.dump(2) << "\n";
}

MapField load_field(const std::string& path_base) {
  std::ifstream side(path_base + ".json");
  if (!side) throw Error("cannot read " + path_base + ".json");
  nlohmann::json j;
  side >> j;

  MapField f;
  if (j.at("kind") == "torus") {
    f = make_field(build_torus_grid(j.at("n").get<int>(), j.at("side").get<double>()));
  } else {
    const auto c = j.at("center");
    PolarGrid g = build_polar_grid({c[0].get<double>(), c[1].get<double>()},
                                   j.at("r_min").get<double>(),
                                   j.at("r_max").get<double>(),
                                   j.at("n_r").get<int>(), j.at("n_theta").get<int>());
    const BoundaryKind bc = j.value("bc", "periodic") == std::string("dirichlet_ring")
                                ? BoundaryKind::DirichletRing
                                : BoundaryKind::Periodic;
    f = make_field(g, bc);
    f.fix_inner = j.value("fix_inner", false);
    f.fix_outer = j.value("fix_outer", false);
  }
  f.constraint_tol = j.value("constraint_tol", 1e-8);

  std::ifstream bin(path_base + ".bin", std::ios::binary);
  if (!bin) throw Error("cannot read " + path_base + ".bin");
  BinHeader h{};
  bin.read(reinterpret_cast<char*>(&h), sizeof(h));
  if (!bin || std::memcmp(h.magic, "SULB", 4) != 0 || h.version != 1)
    throw Error("bad field header in " + path_base + ".bin");
  if (h.K != f.K) throw Error("component count mismatch in " + path_base + ".bin");
  const int expect_d0 = f.grid_kind == GridKind::Torus ? f.torus.n : f.polar.n_r;
  const int expect_d1 = f.grid_kind == GridKind::Torus ? f.torus.n : f.polar.n_theta;
  if (h.d0 != expect_d0 || h.d1 != expect_d1)
    throw Error("grid shape mismatch between sidecar and binary payload");
  bin.read(reinterpret_cast<char*>(f.values.data()),
           static_cast<std::streamsize>(f.values.size() * sizeof(double)));
  if (!bin) throw Error("short read on " + path_base + ".bin");
  return f;
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& columns)
    : out_(path), ncols_(columns.size()), path_(path) {
  if (!out_) throw Error("cannot write " + path);
  for (size_t i = 0; i < columns.size(); ++i)
    out_ << columns[i] << (i + 1 < columns.size() ? "," : "\n");
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != ncols_) throw Error("column count mismatch in " + path_);
  for (size_t i = 0; i < values.size(); ++i)
    out_ << fmt17(values[i]) << (i + 1 < values.size() ? "," : "\n");
}

void CsvWriter::row_cells(const std::vector<std::string>& cells) {
  if (cells.size() != ncols_) throw Error("column count mismatch in " + path_);
  for (size_t i = 0; i < cells.size(); ++i)
    out_ << cells[i] << (i + 1 < cells.size() ? "," : "\n");
}

}  // namespace sulab
