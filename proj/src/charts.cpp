#include "surgeflow/charts.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "surgeflow/numfmt.hpp"

namespace surgeflow::io {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kMarginLeft = 60.0;
constexpr double kMarginRight = 20.0;
constexpr double kMarginTop = 30.0;
constexpr double kMarginBottom = 40.0;

double plot_width() { return kWidth - kMarginLeft - kMarginRight; }
double plot_height() { return kHeight - kMarginTop - kMarginBottom; }

std::string svg_open(const std::string& title) {
  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" "
       "viewBox=\"0 0 640 400\">\n";
  s += "  <rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
  s += "  <text x=\"320\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" "
       "font-size=\"14\">" + title + "</text>\n";
  // axes
  s += "  <line x1=\"" + fmt_double(kMarginLeft) + "\" y1=\"" + fmt_double(kMarginTop) +
       "\" x2=\"" + fmt_double(kMarginLeft) + "\" y2=\"" +
       fmt_double(kHeight - kMarginBottom) + "\" stroke=\"black\"/>\n";
  s += "  <line x1=\"" + fmt_double(kMarginLeft) + "\" y1=\"" +
       fmt_double(kHeight - kMarginBottom) + "\" x2=\"" + fmt_double(kWidth - kMarginRight) +
       "\" y2=\"" + fmt_double(kHeight - kMarginBottom) + "\" stroke=\"black\"/>\n";
  return s;
}

std::string axis_labels(double max_value) {
  std::string s;
  s += "  <text x=\"" + fmt_double(kMarginLeft - 6) + "\" y=\"" +
       fmt_double(kHeight - kMarginBottom) +
       "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">0</text>\n";
  s += "  <text x=\"" + fmt_double(kMarginLeft - 6) + "\" y=\"" + fmt_double(kMarginTop + 10) +
       "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" +
       fmt_double(max_value) + "</text>\n";
  return s;
}

std::string polyline(const std::vector<double>& values, double max_value,
                     const std::string& color) {
  const std::size_t n = values.size();
  std::string points;
  for (std::size_t i = 0; i < n; ++i) {
    double x = kMarginLeft + (n == 1 ? 0.0 : plot_width() * i / (n - 1));
    double y = kHeight - kMarginBottom -
               (max_value > 0.0 ? plot_height() * values[i] / max_value : 0.0);
    if (!points.empty()) points += ' ';
    points += fmt_double(x) + "," + fmt_double(y);
  }
  return "  <polyline fill=\"none\" stroke=\"" + color + "\" points=\"" + points + "\"/>\n";
}

std::string bars(const std::vector<std::pair<std::string, double>>& data, double max_value,
                 const std::string& color) {
  std::string s;
  const std::size_t n = data.size();
  const double slot = plot_width() / static_cast<double>(n);
  const double bar_w = slot * 0.7;
  for (std::size_t i = 0; i < n; ++i) {
    double h = max_value > 0.0 ? plot_height() * data[i].second / max_value : 0.0;
    double x = kMarginLeft + slot * i + (slot - bar_w) / 2.0;
    double y = kHeight - kMarginBottom - h;
    s += "  <rect x=\"" + fmt_double(x) + "\" y=\"" + fmt_double(y) + "\" width=\"" +
         fmt_double(bar_w) + "\" height=\"" + fmt_double(h) + "\" fill=\"" + color + "\"/>\n";
    s += "  <text x=\"" + fmt_double(x + bar_w / 2.0) + "\" y=\"" +
         fmt_double(kHeight - kMarginBottom + 14) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" +
         data[i].first + "</text>\n";
  }
  return s;
}

void write_svg(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write chart: " + path.string());
  out << body << "</svg>\n";
}

std::string legend(const std::string& label, const std::string& color, int slot) {
  double y = kMarginTop + 14.0 * slot;
  return "  <rect x=\"" + fmt_double(kWidth - kMarginRight - 110) + "\" y=\"" +
         fmt_double(y - 8) + "\" width=\"10\" height=\"10\" fill=\"" + color + "\"/>\n" +
         "  <text x=\"" + fmt_double(kWidth - kMarginRight - 96) + "\" y=\"" + fmt_double(y) +
         "\" font-family=\"sans-serif\" font-size=\"10\">" + label + "</text>\n";
}

double max_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  return m;
}

}  // namespace

ChartResult render_loss_chart(const forecast::TrainReport& report,
                              const std::filesystem::path& out_dir) {
  ChartResult result;
  if (report.train_loss.empty() || report.val_loss.empty()) {
    result.warnings.push_back("loss chart skipped: empty training report");
    return result;
  }
  double max_value = std::max(max_of(report.train_loss), max_of(report.val_loss));
  std::string s = svg_open("Loss per epoch");
  s += axis_labels(max_value);
  s += polyline(report.train_loss, max_value, "#1f77b4");
  s += polyline(report.val_loss, max_value, "#d62728");
  s += legend("train", "#1f77b4", 0);
  s += legend("validation", "#d62728", 1);
  write_svg(out_dir / "loss.svg", s);
  result.files.push_back("loss.svg");
  return result;
}

ChartResult render_metric_charts(const sim::SimulationMetrics& metrics,
                                 const std::filesystem::path& out_dir) {
  ChartResult result;

  if (metrics.relocations_per_hour.empty()) {
    result.warnings.push_back("relocations chart skipped: no data");
  } else {
    std::vector<std::pair<std::string, double>> data;
    for (std::size_t h = 0; h < metrics.relocations_per_hour.size(); ++h)
      data.emplace_back(std::to_string(h),
                        static_cast<double>(metrics.relocations_per_hour[h]));
    double max_value = 0.0;
    for (const auto& [_, v] : data) max_value = std::max(max_value, v);
    std::string s = svg_open("Relocations per hour");
    s += axis_labels(max_value);
    s += bars(data, max_value, "#1f77b4");
    write_svg(out_dir / "relocations.svg", s);
    result.files.push_back("relocations.svg");
  }

  if (metrics.served_per_hospital.empty()) {
    result.warnings.push_back("distribution chart skipped: no data");
  } else {
    std::vector<std::pair<std::string, double>> data;
    if (!metrics.hospital_ids.empty()) {
      for (const std::string& id : metrics.hospital_ids) {
        auto it = metrics.served_per_hospital.find(id);
        data.emplace_back(id, it == metrics.served_per_hospital.end()
                                  ? 0.0
                                  : static_cast<double>(it->second));
      }
    } else {
      for (const auto& [id, served] : metrics.served_per_hospital)
        data.emplace_back(id, static_cast<double>(served));
    }
    double max_value = 0.0;
    for (const auto& [_, v] : data) max_value = std::max(max_value, v);
    std::string s = svg_open("Patients served per hospital");
    s += axis_labels(max_value);
    s += bars(data, max_value, "#2ca02c");
    write_svg(out_dir / "distribution.svg", s);
    result.files.push_back("distribution.svg");
  }

  if (metrics.cumulative_cost_series.empty()) {
    result.warnings.push_back("cost chart skipped: no data");
  } else {
    double max_value = max_of(metrics.cumulative_cost_series);
    std::string s = svg_open("Cumulative transfer cost");
    s += axis_labels(max_value);
    s += polyline(metrics.cumulative_cost_series, max_value, "#ff7f0e");
    write_svg(out_dir / "cost.svg", s);
    result.files.push_back("cost.svg");
  }

  const bool any_relocated = metrics.acuity_counts_relocated[0] +
                                 metrics.acuity_counts_relocated[1] +
                                 metrics.acuity_counts_relocated[2] >
                             0;
  if (!any_relocated) {
    result.warnings.push_back("acuity chart skipped: no data");
  } else {
    std::vector<std::pair<std::string, double>> data;
    for (int level = 0; level < 3; ++level)
      data.emplace_back(alloc::to_string(static_cast<alloc::Acuity>(level)),
                        static_cast<double>(metrics.acuity_counts_relocated[level]));
    double max_value = 0.0;
    for (const auto& [_, v] : data) max_value = std::max(max_value, v);
    std::string s = svg_open("Relocated patients by acuity");
    s += axis_labels(max_value);
    s += bars(data, max_value, "#9467bd");
    write_svg(out_dir / "acuity.svg", s);
    result.files.push_back("acuity.svg");
  }

  return result;
}

}  // namespace surgeflow::io
