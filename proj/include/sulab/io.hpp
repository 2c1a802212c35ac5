#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "sulab/field.hpp"

namespace sulab {

// Floats print with 17 significant digits so CSV regressions are
// byte-comparable.
std::string fmt17(double x);

// Field serialization: <base>.bin holds a small fixed header plus row-major
// 64-bit samples; <base>.json describes the grid.
void save_field(const MapField& f, const std::string& path_base);
MapField load_field(const std::string& path_base);

class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& columns);
  void row(const std::vector<double>& values);
  void row_cells(const std::vector<std::string>& cells);

 private:
  std::ofstream out_;
  size_t ncols_;
  std::string path_;
};

}  // namespace sulab
