#include "perfcharter/report.hpp"

#include "csv.hpp"
#include "perfcharter/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <system_error>

#include <unistd.h>

namespace perfcharter {

using nlohmann::ordered_json;

std::string format_sig(double value, int digits) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, value);
    return buf;
}

namespace {

ordered_json number(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}

ordered_json vector_json(const std::vector<double> &v) {
    ordered_json out = ordered_json::array();
    for (double x : v) out.push_back(number(x));
    return out;
}

ordered_json matrix_json(const Matrix &m) {
    ordered_json out = ordered_json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        ordered_json row = ordered_json::array();
        for (double x : m.row(r)) row.push_back(number(x));
        out.push_back(std::move(row));
    }
    return out;
}

// Fixed two-decimal coordinates keep the SVG text stable across platforms.
std::string px(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string xml_escape(std::string_view text) {
    std::string out;
    for (char c : text) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string svg_open(double width, double height) {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + px(width) + "\" height=\"" + px(height) +
           "\" viewBox=\"0 0 " + px(width) + " " + px(height) + "\" font-family=\"sans-serif\" font-size=\"11\">\n"
           "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

std::string line(double x1, double y1, double x2, double y2, std::string_view style) {
    return "<line x1=\"" + px(x1) + "\" y1=\"" + px(y1) + "\" x2=\"" + px(x2) + "\" y2=\"" + px(y2) + "\" " +
           std::string(style) + "/>\n";
}

std::string text(double x, double y, std::string_view body, std::string_view extra = {}) {
    return "<text x=\"" + px(x) + "\" y=\"" + px(y) + "\"" + (extra.empty() ? "" : " " + std::string(extra)) + ">" +
           xml_escape(body) + "</text>\n";
}

constexpr const char *kPalette[] = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
                                    "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"};

} // namespace

std::string pca_json(const PcaModel &model) {
    ordered_json doc;
    doc["workloads"] = model.workloads;
    doc["metrics"] = model.metrics();
    doc["dropped"] = model.dropped;
    doc["means"] = vector_json(model.standardization.means);
    doc["stds"] = vector_json(model.standardization.stds);
    doc["eigenvalues"] = vector_json(model.eigenvalues);
    doc["eigenvectors"] = matrix_json(model.eigenvectors);
    doc["explained"] = vector_json(model.explained);
    doc["cumulative_explained"] = vector_json(cumulative_explained(model));
    doc["projections"] = matrix_json(model.projections);
    ordered_json dominant = ordered_json::array();
    for (std::size_t pc = 0; pc < model.components(); ++pc) {
        const auto d = dominant_metric(model, pc);
        dominant.push_back({{"pc", pc + 1}, {"metric", d.metric}, {"loading", number(d.loading)}});
    }
    doc["dominant"] = std::move(dominant);
    return doc.dump(2) + "\n";
}

std::string dendrogram_json(const Dendrogram &dendrogram, Linkage linkage) {
    ordered_json doc;
    doc["linkage"] = to_string(linkage);
    doc["leaves"] = dendrogram.leaves;
    ordered_json merges = ordered_json::array();
    for (const auto &m : dendrogram.merges)
        merges.push_back({{"left", m.left}, {"right", m.right}, {"height", number(m.height)}, {"size", m.size}});
    doc["merges"] = std::move(merges);
    return doc.dump(2) + "\n";
}

std::string subset_report_json(const SubsetReport &report, const Clusters &clusters,
                               const std::vector<std::string> &names, double threshold) {
    ordered_json doc;
    doc["threshold"] = number(threshold);
    ordered_json groups = ordered_json::array();
    for (const auto &c : clusters) {
        ordered_json members = ordered_json::array();
        for (std::size_t id : c) members.push_back(names.at(id));
        groups.push_back(std::move(members));
    }
    doc["clusters"] = std::move(groups);
    doc["selected"] = report.selected;
    ordered_json cov = ordered_json::object();
    for (const auto &r : report.coverage)
        cov[r.metric] = {{"low_pct", number(r.low_pct)}, {"high_pct", number(r.high_pct)}, {"degenerate", r.degenerate}};
    doc["coverage"] = std::move(cov);
    return doc.dump(2) + "\n";
}

std::string schedule_json(const Schedule &schedule) {
    ordered_json doc;
    doc["gpu_count"] = schedule.gpu_count;
    ordered_json placements = ordered_json::array();
    for (const auto &p : schedule.placements)
        placements.push_back({{"job", p.job},
                              {"width", p.width},
                              {"gpu_ids", p.gpu_ids},
                              {"start", number(p.start)},
                              {"end", number(p.end)}});
    doc["placements"] = std::move(placements);
    doc["makespan_min"] = number(schedule.makespan);
    doc["method"] = schedule.method;
    return doc.dump(2) + "\n";
}

std::string roofline_csv(std::span<const RooflinePoint> points, const MachineModel &machine) {
    std::string out = "name,intensity,throughput,classification\n";
    for (const auto &p : points) {
        out += detail::csv_escape(p.name) + "," + format_double(p.intensity) + "," + format_double(p.throughput) + "," +
               std::string(to_string(classify(machine, p.precision, p))) + "\n";
    }
    return out;
}

std::string dendrogram_svg(const Dendrogram &dendrogram, double cut_height) {
    const std::size_t n = dendrogram.leaf_count();
    const double left = 60, right = 20, top = 20, plot_h = 300, label_h = 140;
    const double step = 28;
    const double width = left + right + step * static_cast<double>(std::max<std::size_t>(n, 1));
    const double height = top + plot_h + label_h;

    // Leaf order from a left-first walk of the tree, so no links cross.
    std::vector<std::size_t> order;
    std::function<void(std::size_t)> walk = [&](std::size_t node) {
        if (node < n) {
            order.push_back(node);
            return;
        }
        const auto &m = dendrogram.merges[node - n];
        walk(m.left);
        walk(m.right);
    };
    if (n > 0) {
        if (dendrogram.merges.empty()) {
            for (std::size_t i = 0; i < n; ++i) order.push_back(i);
        } else {
            walk(n + dendrogram.merges.size() - 1);
        }
    }

    double max_h = 0.0;
    for (const auto &m : dendrogram.merges) max_h = std::max(max_h, m.height);
    if (cut_height > max_h && std::isfinite(cut_height)) max_h = cut_height;
    if (max_h <= 0.0) max_h = 1.0;
    const double base = top + plot_h;
    auto y_of = [&](double h) { return base - h / max_h * plot_h; };

    std::vector<double> x(n + dendrogram.merges.size()), y(n + dendrogram.merges.size(), base);
    for (std::size_t k = 0; k < order.size(); ++k) x[order[k]] = left + step * (static_cast<double>(k) + 0.5);

    std::string svg = svg_open(width, height);
    svg += line(left - 10, top, left - 10, base, "stroke=\"#444\"");
    for (int t = 0; t <= 4; ++t) {
        const double h = max_h * t / 4.0;
        svg += line(left - 14, y_of(h), left - 10, y_of(h), "stroke=\"#444\"");
        svg += text(left - 16, y_of(h) + 4, format_sig(h, 3), "text-anchor=\"end\"");
    }
    for (std::size_t k = 0; k < dendrogram.merges.size(); ++k) {
        const auto &m = dendrogram.merges[k];
        const std::size_t id = n + k;
        const double yh = y_of(m.height);
        x[id] = 0.5 * (x[m.left] + x[m.right]);
        y[id] = yh;
        svg += line(x[m.left], y[m.left], x[m.left], yh, "stroke=\"#1f3b63\"");
        svg += line(x[m.right], y[m.right], x[m.right], yh, "stroke=\"#1f3b63\"");
        svg += line(x[m.left], yh, x[m.right], yh, "stroke=\"#1f3b63\"");
    }
    if (cut_height >= 0.0 && std::isfinite(cut_height))
        svg += line(left - 10, y_of(cut_height), width - right, y_of(cut_height),
                    "stroke=\"#c0392b\" stroke-dasharray=\"4 3\"");
    for (std::size_t leaf : order) {
        const std::string transform = "transform=\"rotate(60 " + px(x[leaf]) + " " + px(base + 8) + ")\"";
        svg += text(x[leaf], base + 8, dendrogram.leaves[leaf], transform);
    }
    svg += "</svg>\n";
    return svg;
}

std::string roofline_svg(std::span<const RooflinePoint> points, const MachineModel &machine) {
    const double left = 70, right = 30, top = 20, bottom = 50, plot_w = 560, plot_h = 380;

    double lo_i = 1e300, hi_i = 0.0, lo_p = 1e300, hi_p = 0.0;
    for (const auto &[prec, peak] : machine.peaks) {
        lo_p = std::min(lo_p, peak);
        hi_p = std::max(hi_p, peak);
        hi_i = std::max(hi_i, machine.ridge(prec));
        lo_i = std::min(lo_i, machine.ridge(prec));
    }
    for (const auto &p : points) {
        if (!(p.intensity > 0.0) || std::isinf(p.intensity)) continue;
        lo_i = std::min(lo_i, p.intensity);
        hi_i = std::max(hi_i, p.intensity);
        if (p.throughput > 0.0) {
            lo_p = std::min(lo_p, p.throughput);
            hi_p = std::max(hi_p, p.throughput);
        }
    }
    if (hi_i <= 0.0) {
        lo_i = 0.1;
        hi_i = 100.0;
    }
    if (hi_p <= 0.0) {
        lo_p = 1.0;
        hi_p = 1000.0;
    }
    const double x0 = std::floor(std::log10(lo_i)) - 1.0;
    const double x1 = std::max(std::ceil(std::log10(hi_i)), x0 + 1.0) + 1.0;
    const double y0 = std::floor(std::log10(std::min(lo_p, machine.mem_bandwidth_gbps * lo_i)));
    const double y1 = std::max(std::ceil(std::log10(hi_p * 1.5)), y0 + 1.0);
    auto sx = [&](double i) { return left + (std::log10(i) - x0) / (x1 - x0) * plot_w; };
    auto sy = [&](double g) { return top + plot_h - (std::log10(g) - y0) / (y1 - y0) * plot_h; };

    std::string svg = svg_open(left + plot_w + right, top + plot_h + bottom);
    svg += "<rect x=\"" + px(left) + "\" y=\"" + px(top) + "\" width=\"" + px(plot_w) + "\" height=\"" + px(plot_h) +
           "\" fill=\"none\" stroke=\"#444\"/>\n";
    for (double e = x0; e <= x1; e += 1.0) {
        svg += line(sx(std::pow(10.0, e)), top + plot_h, sx(std::pow(10.0, e)), top + plot_h + 4, "stroke=\"#444\"");
        svg += text(sx(std::pow(10.0, e)), top + plot_h + 16, format_sig(std::pow(10.0, e), 3), "text-anchor=\"middle\"");
    }
    for (double e = y0; e <= y1; e += 1.0) {
        svg += line(left - 4, sy(std::pow(10.0, e)), left, sy(std::pow(10.0, e)), "stroke=\"#444\"");
        svg += text(left - 6, sy(std::pow(10.0, e)) + 4, format_sig(std::pow(10.0, e), 3), "text-anchor=\"end\"");
    }
    svg += text(left + plot_w / 2, top + plot_h + 36, "Arithmetic intensity (FLOPs/Byte)", "text-anchor=\"middle\"");
    svg += text(16, top + plot_h / 2, "GFLOP/s",
                "text-anchor=\"middle\" transform=\"rotate(-90 16 " + px(top + plot_h / 2) + ")\"");

    const double i_min = std::pow(10.0, x0), i_max = std::pow(10.0, x1);
    std::size_t color = 0;
    for (auto it = machine.peaks.rbegin(); it != machine.peaks.rend(); ++it, ++color) {
        const auto [prec, peak] = *it;
        const double ridge = machine.ridge(prec);
        const std::string style = std::string("stroke=\"") + kPalette[color % 10] + "\" stroke-width=\"1.5\"";
        const double start_i = std::max(i_min, std::pow(10.0, y0) / machine.mem_bandwidth_gbps);
        svg += line(sx(start_i), sy(machine.mem_bandwidth_gbps * start_i), sx(ridge), sy(peak), style);
        svg += line(sx(ridge), sy(peak), sx(i_max), sy(peak), style);
        svg += text(sx(i_max) - 4, sy(peak) - 4,
                    std::string(to_string(prec)) + " " + format_sig(peak, 6) + " GFLOP/s",
                    "text-anchor=\"end\" fill=\"" + std::string(kPalette[color % 10]) + "\"");
    }
    svg += text(sx(i_min) + 6, sy(machine.mem_bandwidth_gbps * i_min) - 6,
                format_sig(machine.mem_bandwidth_gbps, 6) + " GB/s", "fill=\"#444\"");

    for (const auto &p : points) {
        if (!(p.intensity > 0.0) || std::isinf(p.intensity) || !(p.throughput > 0.0)) continue;
        svg += "<circle cx=\"" + px(sx(p.intensity)) + "\" cy=\"" + px(sy(p.throughput)) +
               "\" r=\"3.5\" fill=\"#222\"/>\n";
        svg += text(sx(p.intensity) + 5, sy(p.throughput) - 5, p.name, "font-size=\"9\"");
    }
    svg += "</svg>\n";
    return svg;
}

std::string gantt_svg(const Schedule &schedule) {
    const double left = 60, right = 20, top = 20, row_h = 30, plot_w = 640, bottom = 40;
    const double height = top + row_h * schedule.gpu_count + bottom;
    const double span = schedule.makespan > 0.0 ? schedule.makespan : 1.0;
    auto sx = [&](double t) { return left + t / span * plot_w; };

    std::string svg = svg_open(left + plot_w + right, height);
    for (unsigned g = 0; g < schedule.gpu_count; ++g)
        svg += text(left - 8, top + row_h * (g + 0.5) + 4, "GPU" + std::to_string(g), "text-anchor=\"end\"");
    for (std::size_t i = 0; i < schedule.placements.size(); ++i) {
        const auto &p = schedule.placements[i];
        for (unsigned g : p.gpu_ids) {
            svg += "<rect x=\"" + px(sx(p.start)) + "\" y=\"" + px(top + row_h * g + 2) + "\" width=\"" +
                   px(std::max(0.5, sx(p.end) - sx(p.start))) + "\" height=\"" + px(row_h - 4) + "\" fill=\"" +
                   kPalette[i % 10] + "\" stroke=\"white\"><title>" + xml_escape(p.job) + " w=" +
                   std::to_string(p.width) + " " + format_sig(p.start) + "-" + format_sig(p.end) +
                   " min</title></rect>\n";
            if (sx(p.end) - sx(p.start) > 40)
                svg += text(sx(p.start) + 4, top + row_h * g + row_h / 2 + 4, p.job, "fill=\"white\" font-size=\"10\"");
        }
    }
    const double axis_y = top + row_h * schedule.gpu_count;
    svg += line(left, axis_y, left + plot_w, axis_y, "stroke=\"#444\"");
    for (int t = 0; t <= 5; ++t) {
        const double v = span * t / 5.0;
        svg += line(sx(v), axis_y, sx(v), axis_y + 4, "stroke=\"#444\"");
        svg += text(sx(v), axis_y + 16, format_sig(v, 4), "text-anchor=\"middle\"");
    }
    svg += text(left + plot_w / 2, axis_y + 32,
                "minutes (" + schedule.method + ", makespan " + format_sig(schedule.makespan) + ")",
                "text-anchor=\"middle\"");
    svg += "</svg>\n";
    return svg;
}

void write_atomic(const std::filesystem::path &path, std::string_view content) {
    const auto dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
    const auto tmp = dir / ("." + path.filename().string() + ".tmp" + std::to_string(::getpid()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            std::error_code ignored;
            std::filesystem::remove(tmp, ignored);
            throw Error(ErrorKind::Io, "short write to " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw Error(ErrorKind::Io, "cannot replace " + path.string());
    }
}

} // namespace perfcharter
