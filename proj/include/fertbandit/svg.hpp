#pragma once

#include <string>
#include <vector>

namespace fertbandit::svg {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

// One box per (group slot, series); whiskers are clipped to 1.5 * IQR.
struct Box {
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double lo = 0.0;  // sample min
  double hi = 0.0;  // sample max
};

struct BoxGroup {
  std::string label;  // e.g. the checkpoint round
  std::vector<Box> boxes;  // one per series, series order
};

// Self-contained SVG documents; axes autoscale with a 5% margin.
void write_line_chart(const std::string& path, const std::string& title,
                      const std::string& x_label, const std::string& y_label,
                      const std::vector<Series>& series);

void write_box_chart(const std::string& path, const std::string& title,
                     const std::string& y_label,
                     const std::vector<std::string>& series_labels,
                     const std::vector<BoxGroup>& groups);

// Stacked shares per step: values[step][band], each row summing to one.
void write_stacked_area(const std::string& path, const std::string& title,
                        const std::string& x_label,
                        const std::vector<std::string>& band_labels,
                        const std::vector<std::vector<double>>& values);

// Small-multiple line panels sharing the x axis.
struct Panel {
  std::string title;
  std::vector<Series> series;
};
void write_panels(const std::string& path, const std::string& title,
                  const std::vector<Panel>& panels);

}  // namespace fertbandit::svg
