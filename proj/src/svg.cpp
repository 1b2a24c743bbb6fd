#include "lpm/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>

#include "lpm/error.hpp"
#include "lpm/io.hpp"

namespace lpm {

void SvgScatter::add_points(const RowMatrix& pts, std::string color, double radius) {
    require(pts.cols() >= 2, ErrorCode::parameter, "svg scatter needs two coordinates");
    layers_.push_back({pts.leftCols(2), std::move(color), radius, false});
}

void SvgScatter::add_polyline(const RowMatrix& pts, std::string color) {
    require(pts.cols() >= 2, ErrorCode::parameter, "svg polyline needs two coordinates");
    layers_.push_back({pts.leftCols(2), std::move(color), 0.0, true});
}

std::string SvgScatter::render(int width, int height) const {
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& l : layers_) {
        if (l.pts.rows() == 0) continue;
        x0 = std::min(x0, l.pts.col(0).minCoeff());
        x1 = std::max(x1, l.pts.col(0).maxCoeff());
        y0 = std::min(y0, l.pts.col(1).minCoeff());
        y1 = std::max(y1, l.pts.col(1).maxCoeff());
    }
    if (!(x1 > x0)) { x0 -= 1; x1 += 1; }
    if (!(y1 > y0)) { y0 -= 1; y1 += 1; }
    const double pad = 20.0;
    auto sx = [&](double x) { return pad + (x - x0) / (x1 - x0) * (width - 2 * pad); };
    auto sy = [&](double y) { return height - pad - (y - y0) / (y1 - y0) * (height - 2 * pad); };
    std::string out;
    char buf[160];
    std::snprintf(buf, sizeof buf, "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\">\n", width,
                  height);
    out += buf;
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (const auto& l : layers_) {
        if (l.line) {
            out += "<polyline fill=\"none\" stroke=\"" + l.color + "\" stroke-width=\"1.5\" points=\"";
            for (Eigen::Index i = 0; i < l.pts.rows(); ++i) {
                std::snprintf(buf, sizeof buf, "%.2f,%.2f ", sx(l.pts(i, 0)), sy(l.pts(i, 1)));
                out += buf;
            }
            out += "\"/>\n";
        } else {
            out += "<g fill=\"" + l.color + "\" fill-opacity=\"0.5\">\n";
            for (Eigen::Index i = 0; i < l.pts.rows(); ++i) {
                std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"%.2f\"/>\n", sx(l.pts(i, 0)),
                              sy(l.pts(i, 1)), l.radius);
                out += buf;
            }
            out += "</g>\n";
        }
    }
    out += "</svg>\n";
    return out;
}

void SvgScatter::write(const std::filesystem::path& path) const { io::write_text(path, render()); }

}  // namespace lpm
