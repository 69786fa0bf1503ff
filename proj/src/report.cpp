// Copyright 2026 The Hemoflow Authors.
// SPDX-License-Identifier: Apache-2.0

#include "hemoflow/pipeline.hpp"

#include "hemoflow/error.hpp"
#include "text_util.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace hemoflow {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v, const char* spec = "%.4g") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

struct Panel {
  std::string key;   // file stem of the chart
  std::string title;
  std::string unit;
  std::string param;
  int frame;
};

const char* kPalette[] = {"#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3", "#937860", "#da8bc3", "#8c8c8c"};

std::string bar_chart(const Panel& panel, const std::vector<std::string>& segments,
                      const std::vector<std::string>& models, const std::map<std::string, SegmentStats>& stats) {
  const double group_w = 40.0 + 22.0 * static_cast<double>(models.size());
  const double left = 70, top = 40, plot_h = 220, bottom = 60;
  const double width = left + group_w * static_cast<double>(segments.size()) + 20 + 110;
  const double height = top + plot_h + bottom;
  double vmax = 0.0;
  for (const auto& m : models)
    for (const auto& s : segments)
      if (const auto* r = stats.at(m).find(s, panel.frame, panel.param); r && r->mean)
        vmax = std::max(vmax, *r->mean + r->std.value_or(0.0));
  if (!(vmax > 0.0))
    vmax = 1.0;
  auto y = [&](double v) { return top + plot_h * (1.0 - v / vmax); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width, "%.0f") << "\" height=\""
      << fmt(height, "%.0f") << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "<text x=\"" << left << "\" y=\"20\" font-size=\"14\">" << panel.title << " (" << panel.unit << ")</text>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + plot_h
      << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << width - 110 << "\" y2=\"" << top + plot_h
      << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double v = vmax * t / 4.0;
    svg << "<text x=\"" << left - 6 << "\" y=\"" << fmt(y(v) + 4, "%.1f") << "\" text-anchor=\"end\">" << fmt(v, "%.3g")
        << "</text>\n";
  }
  for (size_t si = 0; si < segments.size(); ++si) {
    const double x0 = left + group_w * static_cast<double>(si) + 20;
    for (size_t mi = 0; mi < models.size(); ++mi) {
      const auto* r = stats.at(models[mi]).find(segments[si], panel.frame, panel.param);
      if (!r || !r->mean)
        continue;
      const double x = x0 + 22.0 * static_cast<double>(mi);
      const double v = std::max(0.0, *r->mean);
      svg << "<rect x=\"" << fmt(x, "%.1f") << "\" y=\"" << fmt(y(v), "%.1f") << "\" width=\"18\" height=\""
          << fmt(top + plot_h - y(v), "%.1f") << "\" fill=\"" << kPalette[mi % 8] << "\"/>\n";
      if (r->std && *r->std > 0.0) {
        const double cx = x + 9;
        svg << "<line x1=\"" << fmt(cx, "%.1f") << "\" y1=\"" << fmt(y(v + *r->std), "%.1f") << "\" x2=\""
            << fmt(cx, "%.1f") << "\" y2=\"" << fmt(y(std::max(0.0, v - *r->std)), "%.1f") << "\" stroke=\"black\"/>\n";
      }
    }
    svg << "<text x=\"" << fmt(x0 + 11.0 * static_cast<double>(models.size()), "%.1f") << "\" y=\""
        << top + plot_h + 16 << "\" text-anchor=\"middle\">" << segments[si] << "</text>\n";
  }
  for (size_t mi = 0; mi < models.size(); ++mi) {
    const double ly = top + 14.0 * static_cast<double>(mi);
    svg << "<rect x=\"" << width - 100 << "\" y=\"" << ly << "\" width=\"10\" height=\"10\" fill=\"" << kPalette[mi % 8]
        << "\"/><text x=\"" << width - 85 << "\" y=\"" << ly + 9 << "\">" << models[mi] << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

} // namespace

void render_report(const fs::path& out, const std::string& reference_model) {
  std::map<std::string, SegmentStats> stats;
  require(fs::is_directory(out / "stats"), ErrorKind::Io, "no stats directory in '" + out.string() + "'");
  for (const auto& e : fs::directory_iterator(out / "stats"))
    if (e.path().extension() == ".csv")
      stats[e.path().stem().string()] = read_stats_csv(e.path());
  require(stats.count(reference_model) > 0, ErrorKind::Io, "missing statistics for reference model " + reference_model);

  // Model order: as listed in rheology.csv when present, reference first.
  std::vector<std::string> models{reference_model};
  if (fs::exists(out / "rheology.csv")) {
    const auto t = detail::read_csv(out / "rheology.csv");
    const size_t c = t.column("model", "rheology.csv");
    for (const auto& row : t.rows)
      if (row[c] != reference_model && stats.count(row[c]))
        models.push_back(row[c]);
  }
  for (const auto& [name, s] : stats)
    if (std::find(models.begin(), models.end(), name) == models.end())
      models.push_back(name);

  const auto& ref = stats.at(reference_model);
  std::vector<std::string> segments;
  int last_frame = -1;
  for (const auto& r : ref.rows) {
    if (r.segment != kCrossSegment && std::find(segments.begin(), segments.end(), r.segment) == segments.end())
      segments.push_back(r.segment);
    if (r.param == "wss")
      last_frame = std::max(last_frame, r.frame);
  }
  segments.push_back(kCrossSegment);
  int systole = 0, diastole = 0;
  double hi = -1e300, lo = 1e300;
  for (int f = 0; f <= last_frame; ++f)
    if (const auto* r = ref.find(kCrossSegment, f, "wss"); r && r->mean) {
      if (*r->mean > hi) {
        hi = *r->mean;
        systole = f;
      }
      if (*r->mean < lo) {
        lo = *r->mean;
        diastole = f;
      }
    }

  const std::vector<Panel> panels{
      {"wss_systole", "WSS at peak systole, frame " + std::to_string(systole), "Pa", "wss", systole},
      {"wss_diastole", "WSS in diastole, frame " + std::to_string(diastole), "Pa", "wss", diastole},
      {"osi", "OSI", "dimensionless", "osi", kAllFrames},
      {"el_rate_systole", "Energy loss rate at peak systole, frame " + std::to_string(systole), "uW", "el_rate", systole},
  };

  std::ostringstream md;
  md << "# Hemodynamic comparison\n\n";
  md << "Reference model: " << reference_model << ". Entries are segment mean ± standard deviation; "
     << "percentages are (model - " << reference_model << ") / " << reference_model
     << " x 100, positive when the model estimate is larger. The `" << kCrossSegment
     << "` row is the mean ± standard deviation of the segment means.\n";
  for (const auto& p : panels) {
    md << "\n## " << p.title << " (" << p.unit << ")\n\n| Segment |";
    for (const auto& m : models)
      md << ' ' << m << " |";
    md << "\n|---|";
    for (size_t i = 0; i < models.size(); ++i)
      md << "---|";
    md << '\n';
    for (const auto& s : segments) {
      md << "| " << s << " |";
      const auto* a = ref.find(s, p.frame, p.param);
      for (const auto& m : models) {
        const auto* r = stats.at(m).find(s, p.frame, p.param);
        if (!r || !r->mean) {
          md << " NA |";
          continue;
        }
        md << ' ' << fmt(*r->mean) << " ± " << fmt(r->std.value_or(0.0));
        if (m != reference_model && a && a->mean && *a->mean != 0.0)
          md << " (" << fmt((*r->mean - *a->mean) / *a->mean * 100.0, "%+.1f") << "%)";
        md << " |";
      }
      md << '\n';
    }
    md << "\n![" << p.title << "](" << p.key << ".svg)\n";
    auto svg = detail::open_output(out / "report" / (p.key + ".svg"));
    svg << bar_chart(p, segments, models, stats);
  }
  auto f = detail::open_output(out / "report" / "report.md");
  f << md.str();
}

} // namespace hemoflow
