#pragma once

// Deterministic text exports: 17 significant digits everywhere, config and
// version stamped into every file.

#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "ssflow/fb_solver.hpp"
#include "ssflow/vec2.hpp"

namespace ssflow::cli {

using json = nlohmann::json;

std::string fmt(double x);  // %.17g, "nan"/"inf" spelled out

// JSON with sorted keys and %.17g numbers (NaN/inf become null).
void write_json(std::ostream& os, const json& j, int indent = 2);
std::string to_json_string(const json& j, int indent = 2);

// CSV with "# ssflow <version>" and "# config <json>" comment lines on top.
class CsvWriter {
 public:
  CsvWriter(std::ostream& os, const json& config, const std::vector<std::string>& columns);
  void row(const std::vector<std::string>& cells);
  static std::string cell(double x) { return fmt(x); }

 private:
  std::ostream& os_;
  std::size_t ncols_;
};

// Minimal self-contained SVG line plot.
class SvgPlot {
 public:
  SvgPlot(std::string title, std::string xlabel, std::string ylabel);
  void polyline(const std::vector<Vec2>& pts, const std::string& color, const std::string& label, bool dashed = false);
  void marker(Vec2 p, const std::string& color, const std::string& label);
  void equal_aspect() { equal_ = true; }
  void write(std::ostream& os, const json& config) const;

 private:
  struct Line {
    std::vector<Vec2> pts;
    std::string color, label;
    bool dashed;
  };
  struct Mark {
    Vec2 p;
    std::string color, label;
  };
  std::string title_, xlabel_, ylabel_;
  std::vector<Line> lines_;
  std::vector<Mark> marks_;
  bool equal_ = false;
};

// Field exports of a solved free-boundary problem.
void write_field_csv(std::ostream& os, const fb::SelfSimilarField& f, const json& config);
void write_shock_csv(std::ostream& os, const fb::ShockPolyline& s, const json& config);
// VTK XML structured grid (.vts) with named point arrays.
void write_field_vts(std::ostream& os, const fb::StructuredGrid& g,
                     const std::vector<std::pair<std::string, std::vector<double>>>& arrays, const json& config);

}  // namespace ssflow::cli
