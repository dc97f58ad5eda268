#pragma once

/// Minimal SVG output: polylines, heat cells, axes and labels. Enough to
/// render phase portraits, reward curves and heat maps; publication styling
/// is out of scope.

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace biogas {

class SvgCanvas {
public:
    SvgCanvas(double x_min, double x_max, double y_min, double y_max, int width = 760,
              int height = 560);

    void set_labels(const std::string& title, const std::string& x_label,
                    const std::string& y_label);

    void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& color,
                  double stroke_width = 1.5, bool dashed = false);
    void line(double x1, double y1, double x2, double y2, const std::string& color,
              double stroke_width = 1.5, bool dashed = false);
    /// Axis-aligned filled cell in world coordinates (heat maps).
    void cell(double x, double y, double w, double h, const std::string& fill);
    void marker(double x, double y, const std::string& color, double radius = 3.0);
    void text(double x, double y, const std::string& label, const std::string& color = "#333");
    /// Color/label pairs drawn in the top-right corner.
    void legend(const std::vector<std::pair<std::string, std::string>>& entries);

    void save(const std::filesystem::path& path) const;

private:
    double px(double x) const;
    double py(double y) const;

    double x_min_, x_max_, y_min_, y_max_;
    int width_, height_;
    std::string title_, x_label_, y_label_;
    std::vector<std::string> elements_;
};

/// Distinguishable line colors, cycled by index.
const char* palette_color(int i);

/// Sequential ramp for values in [0, 1] (dark blue to warm yellow).
std::string heat_color(double v);

/// Diverging ramp for values in [-1, 1] (blue / white / red).
std::string diverging_color(double v);

}  // namespace biogas
