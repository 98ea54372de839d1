#include "output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "ssflow/version.hpp"

namespace ssflow::cli {

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

void emit(std::ostream& os, const json& j, int indent, int level) {
  const std::string pad = indent > 0 ? std::string(static_cast<std::size_t>(indent) * (level + 1), ' ') : "";
  const std::string pad_end = indent > 0 ? std::string(static_cast<std::size_t>(indent) * level, ' ') : "";
  const char* nl = indent > 0 ? "\n" : "";
  const char* sep = indent > 0 ? ": " : ":";
  switch (j.type()) {
    case json::value_t::number_float: {
      const double x = j.get<double>();
      if (std::isfinite(x)) os << fmt(x);
      else os << "null";
      break;
    }
    case json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        break;
      }
      // numeric arrays stay on one line
      const bool flat = std::all_of(j.begin(), j.end(), [](const json& e) { return e.is_primitive(); });
      os << '[';
      bool first = true;
      for (const auto& e : j) {
        if (!first) os << ',';
        if (flat) {
          if (!first && indent > 0) os << ' ';
        } else {
          os << nl << pad;
        }
        emit(os, e, indent, level + 1);
        first = false;
      }
      if (!flat) os << nl << pad_end;
      os << ']';
      break;
    }
    case json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        break;
      }
      os << '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ',';
        os << nl << pad << json(it.key()).dump() << sep;
        emit(os, it.value(), indent, level + 1);
        first = false;
      }
      os << nl << pad_end << '}';
      break;
    }
    default:
      os << j.dump();
  }
}

std::string xml_escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    switch (c) {
      case '&': o += "&amp;"; break;
      case '<': o += "&lt;"; break;
      case '>': o += "&gt;"; break;
      case '"': o += "&quot;"; break;
      default: o += c;
    }
  }
  return o;
}

// config inside an XML comment; "--" is not allowed there
std::string comment_safe(std::string s) {
  for (std::size_t p; (p = s.find("--")) != std::string::npos;) s.replace(p, 2, "- -");
  return s;
}

}  // namespace

void write_json(std::ostream& os, const json& j, int indent) {
  emit(os, j, indent, 0);
  os << '\n';
}

std::string to_json_string(const json& j, int indent) {
  std::ostringstream ss;
  emit(ss, j, indent, 0);
  return ss.str();
}

CsvWriter::CsvWriter(std::ostream& os, const json& config, const std::vector<std::string>& columns)
    : os_(os), ncols_(columns.size()) {
  os_ << "# ssflow " << version << '\n';
  os_ << "# config " << to_json_string(config, 0) << '\n';
  for (std::size_t i = 0; i < columns.size(); ++i) os_ << (i ? "," : "") << columns[i];
  os_ << '\n';
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& c = cells[i];
    const bool quote = c.find_first_of(",\"\n") != std::string::npos;
    if (i) os_ << ',';
    if (quote) {
      os_ << '"';
      for (char ch : c) os_ << (ch == '"' ? std::string("\"\"") : std::string(1, ch));
      os_ << '"';
    } else {
      os_ << c;
    }
  }
  for (std::size_t i = cells.size(); i < ncols_; ++i) os_ << ',';
  os_ << '\n';
}

SvgPlot::SvgPlot(std::string title, std::string xlabel, std::string ylabel)
    : title_(std::move(title)), xlabel_(std::move(xlabel)), ylabel_(std::move(ylabel)) {}

void SvgPlot::polyline(const std::vector<Vec2>& pts, const std::string& color, const std::string& label, bool dashed) {
  lines_.push_back({pts, color, label, dashed});
}

void SvgPlot::marker(Vec2 p, const std::string& color, const std::string& label) { marks_.push_back({p, color, label}); }

void SvgPlot::write(std::ostream& os, const json& config) const {
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  auto grow = [&](Vec2 p) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) return;
    x0 = std::min(x0, p.x), x1 = std::max(x1, p.x), y0 = std::min(y0, p.y), y1 = std::max(y1, p.y);
  };
  for (const auto& l : lines_)
    for (auto p : l.pts) grow(p);
  for (const auto& m : marks_) grow(m.p);
  if (!(x1 > x0)) x0 -= 1, x1 += 1;
  if (!(y1 > y0)) y0 -= 1, y1 += 1;
  const double mx = 0.05 * (x1 - x0), my = 0.05 * (y1 - y0);
  x0 -= mx, x1 += mx, y0 -= my, y1 += my;
  const double W = 640, H = 480, L = 70, R = 170, T = 40, B = 50;
  double sx = (W - L - R) / (x1 - x0), sy = (H - T - B) / (y1 - y0);
  if (equal_) sx = sy = std::min(sx, sy);
  auto X = [&](double x) { return L + (x - x0) * sx; };
  auto Y = [&](double y) { return H - B - (y - y0) * sy; };

  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<!-- ssflow " << version << " config " << comment_safe(to_json_string(config, 0)) << " -->\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
     << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << xml_escape(title_) << "</text>\n";
  os << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << (W - L - R) << "\" height=\"" << (H - T - B)
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = x0 + (x1 - x0) * k / 4, yv = y0 + (y1 - y0) * k / 4;
    char bx[32], by[32];
    std::snprintf(bx, sizeof bx, "%.4g", xv);
    std::snprintf(by, sizeof by, "%.4g", yv);
    os << "<text x=\"" << X(xv) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << bx << "</text>\n";
    os << "<text x=\"" << L - 6 << "\" y=\"" << Y(yv) + 4 << "\" text-anchor=\"end\">" << by << "</text>\n";
  }
  os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">" << xml_escape(xlabel_)
     << "</text>\n";
  os << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
     << (T + H - B) / 2 << ")\">" << xml_escape(ylabel_) << "</text>\n";
  os << "<clipPath id=\"box\"><rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << (W - L - R) << "\" height=\""
     << (H - T - B) << "\"/></clipPath>\n<g clip-path=\"url(#box)\">\n";
  for (const auto& l : lines_) {
    os << "<polyline fill=\"none\" stroke=\"" << l.color << "\" stroke-width=\"1.5\""
       << (l.dashed ? " stroke-dasharray=\"5,4\"" : "") << " points=\"";
    bool first = true;
    for (auto p : l.pts) {
      if (!std::isfinite(p.x) || !std::isfinite(p.y)) continue;
      char b[64];
      std::snprintf(b, sizeof b, "%s%.2f,%.2f", first ? "" : " ", X(p.x), Y(p.y));
      os << b;
      first = false;
    }
    os << "\"/>\n";
  }
  for (const auto& m : marks_) {
    if (!std::isfinite(m.p.x) || !std::isfinite(m.p.y)) continue;
    os << "<circle cx=\"" << X(m.p.x) << "\" cy=\"" << Y(m.p.y) << "\" r=\"4\" fill=\"" << m.color << "\"/>\n";
  }
  os << "</g>\n";
  double ly = T + 10;
  for (const auto& l : lines_) {
    if (l.label.empty()) continue;
    os << "<line x1=\"" << W - R + 10 << "\" y1=\"" << ly << "\" x2=\"" << W - R + 30 << "\" y2=\"" << ly
       << "\" stroke=\"" << l.color << "\" stroke-width=\"2\"" << (l.dashed ? " stroke-dasharray=\"5,4\"" : "") << "/>\n";
    os << "<text x=\"" << W - R + 35 << "\" y=\"" << ly + 4 << "\">" << xml_escape(l.label) << "</text>\n";
    ly += 18;
  }
  for (const auto& m : marks_) {
    if (m.label.empty()) continue;
    os << "<circle cx=\"" << W - R + 20 << "\" cy=\"" << ly << "\" r=\"4\" fill=\"" << m.color << "\"/>\n";
    os << "<text x=\"" << W - R + 35 << "\" y=\"" << ly + 4 << "\">" << xml_escape(m.label) << "</text>\n";
    ly += 18;
  }
  os << "</svg>\n";
}

void write_field_csv(std::ostream& os, const fb::SelfSimilarField& f, const json& config) {
  CsvWriter w(os, config, {"i", "j", "xi", "eta", "phi", "rho", "mach_ratio"});
  const auto& g = f.grid;
  for (int i = 0; i <= g.nx; ++i)
    for (int j = 0; j <= g.ny; ++j) {
      const auto k = g.index(i, j);
      w.row({std::to_string(i), std::to_string(j), fmt(g.nodes[k].x), fmt(g.nodes[k].y), fmt(f.phi[k]), fmt(f.rho[k]),
             fmt(f.ratio[k])});
    }
}

void write_shock_csv(std::ostream& os, const fb::ShockPolyline& s, const json& config) {
  CsvWriter w(os, config, {"j", "xi", "eta", "angle", "radius"});
  for (std::size_t j = 0; j < s.size(); ++j) {
    const Vec2 v = s.vertex(j);
    w.row({std::to_string(j), fmt(v.x), fmt(v.y), fmt(s.angles[j]), fmt(s.radii[j])});
  }
}

void write_field_vts(std::ostream& os, const fb::StructuredGrid& g,
                     const std::vector<std::pair<std::string, std::vector<double>>>& arrays, const json& config) {
  // VTK orders points with the first index fastest: loop j (b) outer, i (a) inner
  os << "<?xml version=\"1.0\"?>\n";
  os << "<!-- ssflow " << version << " config " << comment_safe(to_json_string(config, 0)) << " -->\n";
  os << "<VTKFile type=\"StructuredGrid\" version=\"0.1\" byte_order=\"LittleEndian\">\n";
  os << "<StructuredGrid WholeExtent=\"0 " << g.nx << " 0 " << g.ny << " 0 0\">\n";
  os << "<Piece Extent=\"0 " << g.nx << " 0 " << g.ny << " 0 0\">\n<PointData>\n";
  for (const auto& [name, values] : arrays) {
    os << "<DataArray type=\"Float64\" Name=\"" << xml_escape(name) << "\" format=\"ascii\">\n";
    for (int j = 0; j <= g.ny; ++j)
      for (int i = 0; i <= g.nx; ++i) os << fmt(values[g.index(i, j)]) << '\n';
    os << "</DataArray>\n";
  }
  os << "</PointData>\n<Points>\n<DataArray type=\"Float64\" NumberOfComponents=\"3\" format=\"ascii\">\n";
  for (int j = 0; j <= g.ny; ++j)
    for (int i = 0; i <= g.nx; ++i) {
      const Vec2 x = g.at(i, j);
      os << fmt(x.x) << ' ' << fmt(x.y) << " 0\n";
    }
  os << "</DataArray>\n</Points>\n</Piece>\n</StructuredGrid>\n</VTKFile>\n";
}

}  // namespace ssflow::cli
