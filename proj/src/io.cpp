#include "skm1/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace skm1 {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

namespace {

std::ofstream open_out(const std::string& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot open for writing: " + file);
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  return fields;
}

}  // namespace

void write_path_csv(const CadlagPath& path, const std::string& file) {
  std::ofstream out = open_out(file);
  out << "t";
  for (int k = 1; k <= path.dim(); ++k) out << ",v_minus_" << k;
  for (int k = 1; k <= path.dim(); ++k) out << ",v_plus_" << k;
  out << "\n";
  for (const Breakpoint& b : path.breakpoints()) {
    out << format_double(b.t);
    for (int k = 0; k < path.dim(); ++k) out << "," << format_double(b.v_minus[k]);
    for (int k = 0; k < path.dim(); ++k) out << "," << format_double(b.v_plus[k]);
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + file);
}

CadlagPath read_path_csv(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot open for reading: " + file);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty CSV: " + file);
  std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 3 || header[0] != "t" || header.size() % 2 == 0)
    throw std::runtime_error("bad path CSV header: " + file);
  int dim = int((header.size() - 1) / 2);
  for (int k = 0; k < dim; ++k) {
    if (header[1 + k] != "v_minus_" + std::to_string(k + 1) ||
        header[1 + dim + k] != "v_plus_" + std::to_string(k + 1))
      throw std::runtime_error("bad path CSV header: " + file);
  }
  std::vector<Breakpoint> bps;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields = split_csv_line(line);
    if (int(fields.size()) != 1 + 2 * dim)
      throw std::runtime_error("bad path CSV row: " + file);
    Breakpoint b;
    b.t = std::stod(fields[0]);
    b.v_minus = Vec(dim);
    b.v_plus = Vec(dim);
    for (int k = 0; k < dim; ++k) {
      b.v_minus[k] = std::stod(fields[1 + k]);
      b.v_plus[k] = std::stod(fields[1 + dim + k]);
    }
    bps.push_back(std::move(b));
  }
  return CadlagPath(dim, std::move(bps));
}

void write_matching_csv(const M1Result& result, const DensifiedGraph& a,
                        const DensifiedGraph& b, const std::string& file) {
  std::ofstream out = open_out(file);
  out << "i,j,r_A,r_B,cost\n";
  for (const auto& [i, j] : result.matching.pairs) {
    double cost = std::max(std::abs(a.r[i] - b.r[j]), (a.z[i] - b.z[j]).norm());
    out << i << "," << j << "," << format_double(a.r[i]) << ","
        << format_double(b.r[j]) << "," << format_double(cost) << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + file);
}

void write_report_csv(const std::vector<EstimateRow>& rows, const std::string& file) {
  std::ofstream out = open_out(file);
  out << "scenario,gamma,delta,epsilon,functional,t,estimate,stderr\n";
  for (const EstimateRow& r : rows) {
    out << r.scenario << "," << format_double(r.gamma) << ","
        << format_double(r.delta) << "," << format_double(r.epsilon) << ","
        << r.functional << "," << format_double(r.t) << ","
        << format_double(r.estimate) << "," << format_double(r.stderr_) << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + file);
}

void write_path_svg(const CadlagPath& path, const std::string& file) {
  // Polyline vertices in breakpoint order; jump edges appear as segments
  // between the left-limit and value points.
  std::vector<std::pair<double, double>> pts;
  for (const Breakpoint& b : path.breakpoints()) {
    if (path.dim() == 2) {
      pts.emplace_back(b.v_minus[0], b.v_minus[1]);
      pts.emplace_back(b.v_plus[0], b.v_plus[1]);
    } else {
      pts.emplace_back(b.t, b.v_minus[0]);
      pts.emplace_back(b.t, b.v_plus[0]);
    }
  }
  double xmin = pts[0].first, xmax = pts[0].first;
  double ymin = pts[0].second, ymax = pts[0].second;
  for (const auto& [x, y] : pts) {
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
    ymin = std::min(ymin, y);
    ymax = std::max(ymax, y);
  }
  double xspan = xmax > xmin ? xmax - xmin : 1.0;
  double yspan = ymax > ymin ? ymax - ymin : 1.0;
  const double size = 480.0, margin = 20.0;
  auto sx = [&](double x) { return margin + (x - xmin) / xspan * (size - 2 * margin); };
  auto sy = [&](double y) {
    return size - margin - (y - ymin) / yspan * (size - 2 * margin);
  };

  std::ofstream out = open_out(file);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"480\" height=\"480\" "
         "viewBox=\"0 0 480 480\">\n";
  out << "<rect width=\"480\" height=\"480\" fill=\"white\"/>\n";
  out << "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1\" points=\"";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i) out << " ";
    out << format_double(sx(pts[i].first)) << "," << format_double(sy(pts[i].second));
  }
  out << "\"/>\n</svg>\n";
  if (!out) throw std::runtime_error("write failed: " + file);
}

}  // namespace skm1
