#include "robustdrop/chart.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "robustdrop/experiment.hpp"

namespace robustdrop {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

struct DataPoint {
    double x = 0.0;
    std::string x_label;
    double y = 0.0;
    double err = 0.0;
};

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

}  // namespace

std::string render_chart_svg(const std::filesystem::path& csv_path) {
    std::ifstream in(csv_path);
    if (!in) throw std::runtime_error("render: cannot open " + csv_path.string());

    std::string header_line;
    if (!std::getline(in, header_line)) throw std::runtime_error("render: empty file");
    const auto header = split_line(header_line);

    std::ptrdiff_t metric_col = -1;
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == "metric") metric_col = static_cast<std::ptrdiff_t>(i);
    if (metric_col < 0 || header.size() < static_cast<std::size_t>(metric_col) + 4 ||
        header[static_cast<std::size_t>(metric_col) + 1] != "mean" ||
        header[static_cast<std::size_t>(metric_col) + 2] != "ci95")
        throw std::runtime_error("render: malformed header in " + csv_path.string());
    const std::size_t n_sweep = static_cast<std::size_t>(metric_col);
    const std::size_t x_col = n_sweep > 0 ? n_sweep - 1 : 0;

    // series key -> points; map keeps legend order deterministic
    std::map<std::string, std::vector<DataPoint>> series;
    std::vector<std::string> x_categories;
    bool x_numeric = true;
    std::string line;
    std::size_t row_index = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = split_line(line);
        if (fields.size() != header.size())
            throw std::runtime_error("render: malformed row in " + csv_path.string());
        DataPoint p;
        std::string key;
        for (std::size_t i = 0; i < n_sweep; ++i) {
            if (i == x_col) continue;
            if (!key.empty()) key += ' ';
            key += header[i].substr(6) + "=" + fields[i];
        }
        if (!key.empty()) key += ' ';
        key += fields[static_cast<std::size_t>(metric_col)];

        try {
            p.y = std::stod(fields[static_cast<std::size_t>(metric_col) + 1]);
            p.err = std::stod(fields[static_cast<std::size_t>(metric_col) + 2]);
        } catch (const std::exception&) {
            throw std::runtime_error("render: non-numeric mean/ci95 in " + csv_path.string());
        }
        if (n_sweep > 0) {
            p.x_label = fields[x_col];
            try {
                std::size_t used = 0;
                p.x = std::stod(p.x_label, &used);
                if (used != p.x_label.size()) x_numeric = false;
            } catch (const std::exception&) {
                x_numeric = false;
            }
        } else {
            p.x = static_cast<double>(row_index);
            p.x_label = std::to_string(row_index);
        }
        series[key].push_back(p);
        ++row_index;
    }
    if (series.empty()) throw std::runtime_error("no data");

    if (!x_numeric) {
        // categorical x: order of first appearance per label
        for (auto& [key, pts] : series) {
            for (auto& p : pts) {
                auto it = std::find(x_categories.begin(), x_categories.end(), p.x_label);
                if (it == x_categories.end()) {
                    x_categories.push_back(p.x_label);
                    it = std::prev(x_categories.end());
                }
                p.x = static_cast<double>(it - x_categories.begin());
            }
        }
    }

    double x_min = 0, x_max = 0, y_min = 0, y_max = 0;
    bool first = true;
    for (const auto& [key, pts] : series) {
        for (const auto& p : pts) {
            if (first) {
                x_min = x_max = p.x;
                y_min = p.y - p.err;
                y_max = p.y + p.err;
                first = false;
            } else {
                x_min = std::min(x_min, p.x);
                x_max = std::max(x_max, p.x);
                y_min = std::min(y_min, p.y - p.err);
                y_max = std::max(y_max, p.y + p.err);
            }
        }
    }
    if (x_max == x_min) x_max = x_min + 1;
    if (y_max == y_min) y_max = y_min + 1;
    const double y_pad = 0.05 * (y_max - y_min);
    y_min -= y_pad;
    y_max += y_pad;

    const double width = 800, height = 480;
    const double left = 70, right = width - 200, top = 24, bottom = height - 48;
    const auto sx = [&](double x) { return left + (x - x_min) / (x_max - x_min) * (right - left); };
    const auto sy = [&](double y) {
        return bottom - (y - y_min) / (y_max - y_min) * (bottom - top);
    };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    svg << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    svg << "<line x1=\"" << left << "\" y1=\"" << bottom << "\" x2=\"" << right << "\" y2=\""
        << bottom << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << bottom
        << "\" stroke=\"black\"/>\n";

    // axis tick labels (min / max, plus category labels when applicable)
    svg << "<text x=\"" << left - 8 << "\" y=\"" << sy(y_min + y_pad)
        << "\" font-size=\"12\" text-anchor=\"end\">" << fmt(y_min + y_pad) << "</text>\n";
    svg << "<text x=\"" << left - 8 << "\" y=\"" << sy(y_max - y_pad)
        << "\" font-size=\"12\" text-anchor=\"end\">" << fmt(y_max - y_pad) << "</text>\n";
    if (x_numeric) {
        svg << "<text x=\"" << sx(x_min) << "\" y=\"" << bottom + 18
            << "\" font-size=\"12\" text-anchor=\"middle\">" << fmt(x_min) << "</text>\n";
        svg << "<text x=\"" << sx(x_max) << "\" y=\"" << bottom + 18
            << "\" font-size=\"12\" text-anchor=\"middle\">" << fmt(x_max) << "</text>\n";
    } else {
        for (std::size_t i = 0; i < x_categories.size(); ++i)
            svg << "<text x=\"" << sx(static_cast<double>(i)) << "\" y=\"" << bottom + 18
                << "\" font-size=\"12\" text-anchor=\"middle\">" << x_categories[i] << "</text>\n";
    }

    std::size_t color = 0;
    double legend_y = top + 12;
    for (auto& [key, pts] : series) {
        auto sorted = pts;
        std::stable_sort(sorted.begin(), sorted.end(),
                         [](const DataPoint& a, const DataPoint& b) { return a.x < b.x; });
        const char* stroke = kPalette[color % (sizeof(kPalette) / sizeof(kPalette[0]))];
        svg << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& p : sorted) svg << fmt(sx(p.x)) << ',' << fmt(sy(p.y)) << ' ';
        svg << "\"/>\n";
        for (const auto& p : sorted) {
            const double cx = sx(p.x);
            svg << "<line class=\"errbar\" x1=\"" << fmt(cx) << "\" y1=\"" << fmt(sy(p.y - p.err))
                << "\" x2=\"" << fmt(cx) << "\" y2=\"" << fmt(sy(p.y + p.err)) << "\" stroke=\""
                << stroke << "\"/>\n";
            svg << "<circle cx=\"" << fmt(cx) << "\" cy=\"" << fmt(sy(p.y)) << "\" r=\"3\" fill=\""
                << stroke << "\"/>\n";
        }
        svg << "<text x=\"" << right + 10 << "\" y=\"" << legend_y << "\" font-size=\"12\" fill=\""
            << stroke << "\">" << key << "</text>\n";
        legend_y += 16;
        ++color;
    }
    svg << "</svg>\n";
    return svg.str();
}

int render_directory(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir))
        throw std::runtime_error("render: not a directory: " + dir.string());
    std::vector<std::filesystem::path> csvs;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.path().extension() == ".csv") csvs.push_back(entry.path());
    std::sort(csvs.begin(), csvs.end());

    int written = 0;
    for (const auto& csv : csvs) {
        const std::string svg = render_chart_svg(csv);
        std::filesystem::path out = csv;
        out.replace_extension(".svg");
        std::ofstream file(out, std::ios::binary);
        if (!file) throw OutputError("render: cannot open " + out.string());
        file << svg;
        if (!file) throw OutputError("render: write failed for " + out.string());
        ++written;
    }
    return written;
}

}  // namespace robustdrop
