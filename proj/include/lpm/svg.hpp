#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "lpm/types.hpp"

namespace lpm {

/// Flat scatter of the first two coordinates.
class SvgScatter {
public:
    void add_points(const RowMatrix& pts, std::string color, double radius);
    void add_polyline(const RowMatrix& pts, std::string color);
    std::string render(int width = 640, int height = 640) const;
    void write(const std::filesystem::path& path) const;

private:
    struct Layer {
        RowMatrix pts;
        std::string color;
        double radius;
        bool line;
    };
    std::vector<Layer> layers_;
};

}  // namespace lpm
