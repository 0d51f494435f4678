#pragma once

// Report documents and emitters. Reports are deterministic: no timestamps or
// host information, floats serialized with 17 significant digits, fixed key
// order. The same (spec, options, seed) always produces identical bytes.

#include <json.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fermisig/errors.hpp"
#include "fermisig/inverse.hpp"

namespace fermisig {

inline constexpr const char* kToolVersion = "0.1.0";

struct ReportDocument {
  std::string command;
  nlohmann::ordered_json inputs;   // spec echo and options; rerunnable
  nlohmann::ordered_json results;
  std::vector<double> eigenvalues;                 // emitted as CSV / stem plot
  std::optional<ReconstructionField> density;      // emitted as heat map
};

namespace detail {

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void write_json(std::ostream& os, const nlohmann::ordered_json& j, int depth) {
  const std::string pad(2 * depth, ' ');
  const std::string pad_in(2 * (depth + 1), ' ');
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      bool first = true;
      for (const auto& [key, val] : j.items()) {
        if (!first) os << ",\n";
        first = false;
        os << pad_in << nlohmann::json(key).dump() << ": ";
        write_json(os, val, depth + 1);
      }
      os << "\n" << pad << "}";
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      os << "[\n";
      bool first = true;
      for (const auto& val : j) {
        if (!first) os << ",\n";
        first = false;
        os << pad_in;
        write_json(os, val, depth + 1);
      }
      os << "\n" << pad << "]";
      return;
    }
    case nlohmann::json::value_t::number_float:
      os << fmt17(j.get<double>());
      return;
    default:
      os << j.dump();
      return;
  }
}

}  // namespace detail

inline std::string render_report_json(const ReportDocument& doc) {
  nlohmann::ordered_json root;
  root["tool"] = "fermisig";
  root["version"] = kToolVersion;
  root["command"] = doc.command;
  root["inputs"] = doc.inputs;
  root["results"] = doc.results;
  if (!doc.eigenvalues.empty()) root["eigenvalues"] = doc.eigenvalues;
  std::ostringstream os;
  detail::write_json(os, root, 0);
  os << "\n";
  return os.str();
}

inline std::string render_eigenvalue_csv(const ReportDocument& doc) {
  std::ostringstream os;
  os << "index,value\n";
  for (std::size_t i = 0; i < doc.eigenvalues.size(); ++i)
    os << (i + 1) << "," << detail::fmt17(doc.eigenvalues[i]) << "\n";
  return os.str();
}

// stem plot of the spectrum
inline std::string render_spectrum_svg(const std::vector<double>& ev) {
  const int W = 800, H = 400, margin = 40;
  double peak = 1e-300;
  for (double v : ev) peak = std::max(peak, std::fabs(v));
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 "
     << W << " " << H << "\">\n";
  os << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  const double y0 = H / 2.0;
  os << "<line x1=\"" << margin << "\" y1=\"" << y0 << "\" x2=\"" << W - margin << "\" y2=\"" << y0
     << "\" stroke=\"black\"/>\n";
  const std::size_t count = ev.size();
  for (std::size_t i = 0; i < count; ++i) {
    const double x = margin + (W - 2.0 * margin) * (count == 1 ? 0.5 : static_cast<double>(i) / (count - 1));
    const double y = y0 - (H / 2.0 - margin) * ev[i] / peak;
    os << "<line x1=\"" << x << "\" y1=\"" << y0 << "\" x2=\"" << x << "\" y2=\"" << y
       << "\" stroke=\"steelblue\"/>\n";
    os << "<circle cx=\"" << x << "\" cy=\"" << y << "\" r=\"2\" fill=\"crimson\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

// grayscale heat map of the recovered density over (u, w)
inline std::string render_density_svg(const ReconstructionField& field) {
  const int target = 160;
  const int stride = std::max(1, field.n / target);
  const int cells = (field.n + stride - 1) / stride;
  const double px = 720.0 / cells;
  double peak = 1e-300;
  for (double v : field.density) peak = std::max(peak, v);
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"760\" height=\"760\" viewBox=\"0 0 760 760\">\n";
  os << "<rect width=\"760\" height=\"760\" fill=\"white\"/>\n";
  for (int a = 0; a < cells; ++a)
    for (int c = 0; c < cells; ++c) {
      double sum = 0.0;
      int cnt = 0;
      for (int i = a * stride; i < std::min(field.n, (a + 1) * stride); ++i)
        for (int j = c * stride; j < std::min(field.n, (c + 1) * stride); ++j) {
          sum += field.at(i, j);
          ++cnt;
        }
      const int shade = 255 - static_cast<int>(255.0 * std::min(1.0, (sum / cnt) / peak));
      os << "<rect x=\"" << 20 + a * px << "\" y=\"" << 740 - (c + 1) * px << "\" width=\"" << px + 0.5
         << "\" height=\"" << px + 0.5 << "\" fill=\"rgb(" << shade << "," << shade << "," << shade << ")\"/>\n";
    }
  os << "</svg>\n";
  return os.str();
}

inline std::vector<std::filesystem::path> emit_report(const ReportDocument& doc,
                                                      const std::vector<std::string>& formats,
                                                      const std::filesystem::path& outdir) {
  std::error_code ec;
  std::filesystem::create_directories(outdir, ec);
  std::vector<std::filesystem::path> written;
  auto write_file = [&](const std::filesystem::path& name, const std::string& content) {
    const std::filesystem::path full = outdir / name;
    std::ofstream os(full, std::ios::binary);
    if (!os) throw IoError("cannot write " + full.string());
    os << content;
    written.push_back(full);
  };
  for (const std::string& fmt : formats) {
    if (fmt == "json") {
      write_file("report.json", render_report_json(doc));
    } else if (fmt == "csv") {
      write_file("spectrum.csv", render_eigenvalue_csv(doc));
    } else if (fmt == "svg") {
      write_file("spectrum.svg", render_spectrum_svg(doc.eigenvalues));
      if (doc.density) write_file("density.svg", render_density_svg(*doc.density));
    } else {
      throw SchemaError("unknown output format: " + fmt);
    }
  }
  return written;
}

}  // namespace fermisig
