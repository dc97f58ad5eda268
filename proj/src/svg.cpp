#include "biogas/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "biogas/errors.hpp"

namespace biogas {

namespace {
constexpr double kMarginLeft = 64.0;
constexpr double kMarginRight = 16.0;
constexpr double kMarginTop = 30.0;
constexpr double kMarginBottom = 46.0;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string rgb(int r, int g, int b) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
    return buf;
}
}  // namespace

SvgCanvas::SvgCanvas(double x_min, double x_max, double y_min, double y_max, int width,
                     int height)
    : x_min_(x_min), x_max_(x_max), y_min_(y_min), y_max_(y_max), width_(width),
      height_(height) {
    if (!(x_max_ > x_min_)) x_max_ = x_min_ + 1.0;
    if (!(y_max_ > y_min_)) y_max_ = y_min_ + 1.0;
}

double SvgCanvas::px(double x) const {
    return kMarginLeft + (x - x_min_) / (x_max_ - x_min_) *
                             (width_ - kMarginLeft - kMarginRight);
}

double SvgCanvas::py(double y) const {
    return height_ - kMarginBottom -
           (y - y_min_) / (y_max_ - y_min_) * (height_ - kMarginTop - kMarginBottom);
}

void SvgCanvas::set_labels(const std::string& title, const std::string& x_label,
                           const std::string& y_label) {
    title_ = title;
    x_label_ = x_label;
    y_label_ = y_label;
}

void SvgCanvas::polyline(const std::vector<std::pair<double, double>>& pts,
                         const std::string& color, double stroke_width, bool dashed) {
    if (pts.size() < 2) return;
    std::ostringstream os;
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"" << stroke_width
       << "\"";
    if (dashed) os << " stroke-dasharray=\"6,4\"";
    os << " points=\"";
    for (const auto& [x, y] : pts) {
        os << fmt(px(x)) << ',' << fmt(py(y)) << ' ';
    }
    os << "\"/>";
    elements_.push_back(os.str());
}

void SvgCanvas::line(double x1, double y1, double x2, double y2, const std::string& color,
                     double stroke_width, bool dashed) {
    std::ostringstream os;
    os << "<line x1=\"" << fmt(px(x1)) << "\" y1=\"" << fmt(py(y1)) << "\" x2=\""
       << fmt(px(x2)) << "\" y2=\"" << fmt(py(y2)) << "\" stroke=\"" << color
       << "\" stroke-width=\"" << stroke_width << "\"";
    if (dashed) os << " stroke-dasharray=\"6,4\"";
    os << "/>";
    elements_.push_back(os.str());
}

void SvgCanvas::cell(double x, double y, double w, double h, const std::string& fill) {
    const double x0 = px(x);
    const double y0 = py(y + h);
    const double ww = px(x + w) - x0;
    const double hh = py(y) - y0;
    std::ostringstream os;
    os << "<rect x=\"" << fmt(x0) << "\" y=\"" << fmt(y0) << "\" width=\"" << fmt(ww + 0.5)
       << "\" height=\"" << fmt(hh + 0.5) << "\" fill=\"" << fill << "\"/>";
    elements_.push_back(os.str());
}

void SvgCanvas::marker(double x, double y, const std::string& color, double radius) {
    std::ostringstream os;
    os << "<circle cx=\"" << fmt(px(x)) << "\" cy=\"" << fmt(py(y)) << "\" r=\"" << radius
       << "\" fill=\"" << color << "\"/>";
    elements_.push_back(os.str());
}

void SvgCanvas::text(double x, double y, const std::string& label, const std::string& color) {
    std::ostringstream os;
    os << "<text x=\"" << fmt(px(x)) << "\" y=\"" << fmt(py(y))
       << "\" font-size=\"11\" font-family=\"sans-serif\" fill=\"" << color << "\">" << label
       << "</text>";
    elements_.push_back(os.str());
}

void SvgCanvas::legend(const std::vector<std::pair<std::string, std::string>>& entries) {
    double y = kMarginTop + 12.0;
    for (const auto& [color, label] : entries) {
        std::ostringstream os;
        const double x0 = width_ - kMarginRight - 150.0;
        os << "<line x1=\"" << x0 << "\" y1=\"" << y - 4 << "\" x2=\"" << x0 + 24 << "\" y2=\""
           << y - 4 << "\" stroke=\"" << color << "\" stroke-width=\"2.5\"/>"
           << "<text x=\"" << x0 + 30 << "\" y=\"" << y
           << "\" font-size=\"11\" font-family=\"sans-serif\" fill=\"#333\">" << label
           << "</text>";
        elements_.push_back(os.str());
        y += 16.0;
    }
}

void SvgCanvas::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) {
        throw numeric_error("cannot open " + path.string() + " for writing");
    }
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width_ << "\" height=\""
        << height_ << "\" viewBox=\"0 0 " << width_ << " " << height_ << "\">\n";
    out << "<rect width=\"" << width_ << "\" height=\"" << height_ << "\" fill=\"white\"/>\n";
    for (const auto& e : elements_) out << e << "\n";

    // frame and ticks on top of the data
    const double x0 = kMarginLeft, x1 = width_ - kMarginRight;
    const double y0 = height_ - kMarginBottom, y1 = kMarginTop;
    out << "<rect x=\"" << x0 << "\" y=\"" << y1 << "\" width=\"" << x1 - x0 << "\" height=\""
        << y0 - y1 << "\" fill=\"none\" stroke=\"#444\"/>\n";
    const int ticks = 5;
    for (int i = 0; i <= ticks; ++i) {
        const double wx = x_min_ + (x_max_ - x_min_) * i / ticks;
        const double wy = y_min_ + (y_max_ - y_min_) * i / ticks;
        out << "<line x1=\"" << fmt(px(wx)) << "\" y1=\"" << y0 << "\" x2=\"" << fmt(px(wx))
            << "\" y2=\"" << y0 + 4 << "\" stroke=\"#444\"/>\n";
        out << "<text x=\"" << fmt(px(wx)) << "\" y=\"" << y0 + 16
            << "\" font-size=\"10\" font-family=\"sans-serif\" fill=\"#333\" "
               "text-anchor=\"middle\">"
            << fmt(wx) << "</text>\n";
        out << "<line x1=\"" << x0 - 4 << "\" y1=\"" << fmt(py(wy)) << "\" x2=\"" << x0
            << "\" y2=\"" << fmt(py(wy)) << "\" stroke=\"#444\"/>\n";
        out << "<text x=\"" << x0 - 7 << "\" y=\"" << fmt(py(wy) + 3)
            << "\" font-size=\"10\" font-family=\"sans-serif\" fill=\"#333\" "
               "text-anchor=\"end\">"
            << fmt(wy) << "</text>\n";
    }
    if (!title_.empty()) {
        out << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << kMarginTop - 10
            << "\" font-size=\"13\" font-family=\"sans-serif\" fill=\"#111\" "
               "text-anchor=\"middle\">"
            << title_ << "</text>\n";
    }
    if (!x_label_.empty()) {
        out << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << height_ - 10
            << "\" font-size=\"12\" font-family=\"sans-serif\" fill=\"#111\" "
               "text-anchor=\"middle\">"
            << x_label_ << "</text>\n";
    }
    if (!y_label_.empty()) {
        out << "<text x=\"14\" y=\"" << (y0 + y1) / 2
            << "\" font-size=\"12\" font-family=\"sans-serif\" fill=\"#111\" "
               "text-anchor=\"middle\" transform=\"rotate(-90 14 "
            << (y0 + y1) / 2 << ")\">" << y_label_ << "</text>\n";
    }
    out << "</svg>\n";
}

const char* palette_color(int i) {
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                   "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
    return colors[i % 8];
}

std::string heat_color(double v) {
    v = std::min(std::max(v, 0.0), 1.0);
    // dark blue -> teal -> yellow
    const double r = std::min(1.0, std::max(0.0, 2.2 * v - 0.8));
    const double g = std::pow(v, 0.8);
    const double b = 0.55 - 0.45 * v;
    return rgb(static_cast<int>(30 + 225 * r), static_cast<int>(30 + 210 * g),
               static_cast<int>(255 * std::max(b, 0.0)));
}

std::string diverging_color(double v) {
    v = std::min(std::max(v, -1.0), 1.0);
    if (v < 0) {
        const double a = -v;
        return rgb(static_cast<int>(255 * (1 - a) + 40 * a), static_cast<int>(255 * (1 - a) + 80 * a),
                   static_cast<int>(255 * (1 - a) + 200 * a));
    }
    const double a = v;
    return rgb(static_cast<int>(255 * (1 - a) + 200 * a), static_cast<int>(255 * (1 - a) + 40 * a),
               static_cast<int>(255 * (1 - a) + 40 * a));
}

}  // namespace biogas
